use clap::Parser;

fn main() {
    let cli = contact_sim::Cli::parse();
    std::process::exit(contact_sim::run(&cli));
}
