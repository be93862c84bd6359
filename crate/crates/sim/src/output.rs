use std::fs::File;
use std::io::{self, BufWriter, Write};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// A file path, or standard output when `None`.
pub fn open(path: Option<&str>) -> CliResult<Box<dyn Write>> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|source| CliError::Io {
                path: p.to_string(),
                source,
            })?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn io_err(path: Option<&str>) -> impl Fn(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.unwrap_or("<stdout>").to_string(),
        source,
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_json<T: Serialize>(path: Option<&str>, value: &T) -> CliResult<()> {
    let mut w = open(path)?;
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    writeln!(w, "{text}").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// Writes a header and rows of numbers.
pub fn write_csv<I>(path: Option<&str>, header: &[String], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = Vec<f64>>,
{
    let w = open(path)?;
    let mut csv = csv::Writer::from_writer(w);
    let map = |e: csv::Error| CliError::Io {
        path: path.unwrap_or("<stdout>").to_string(),
        source: e.into(),
    };
    csv.write_record(header).map_err(map)?;
    for row in rows {
        csv.write_record(row.iter().map(|v| format_f64(*v))).map_err(map)?;
    }
    csv.flush().map_err(io_err(path))
}
