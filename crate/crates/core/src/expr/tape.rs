//! Flat postfix compilation of expression trees.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::eval::{apply_binary, apply_unary};
use super::{BinaryOp, Expr, UnaryFn};
use crate::error::{Error, Result};

const NO_LABEL: u32 = u32::MAX;
const INLINE_STACK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Instr {
    Push(f64),
    Load(u32),
    Binary(BinaryOp, u32),
    Unary(UnaryFn, u32),
}

/// Postfix program equivalent to an [`Expr`] over a fixed slot layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Tape {
    code: Vec<Instr>,
    labels: Vec<String>,
    max_depth: usize,
    slots: usize,
}

impl Tape {
    /// Compiles `e` against `layout`; slot `i` holds the value of `layout[i]`.
    pub fn compile(e: &Expr, layout: &[&str]) -> Result<Tape> {
        let mut tape = Tape {
            code: Vec::with_capacity(e.size()),
            labels: Vec::new(),
            max_depth: 0,
            slots: layout.len(),
        };
        let mut depth = 0usize;
        tape.emit(e, layout, &mut depth)?;
        Ok(tape)
    }

    fn emit(&mut self, e: &Expr, layout: &[&str], depth: &mut usize) -> Result<()> {
        match e {
            Expr::Const(c) => {
                self.code.push(Instr::Push(*c));
                self.grow(depth);
            }
            Expr::Var(v) => {
                let slot = layout
                    .iter()
                    .position(|n| n == v)
                    .ok_or_else(|| Error::UnknownIdentifier { name: v.clone() })?;
                self.code.push(Instr::Load(slot as u32));
                self.grow(depth);
            }
            Expr::Binary(op, a, b) => {
                self.emit(a, layout, depth)?;
                self.emit(b, layout, depth)?;
                let label = match op {
                    BinaryOp::Div | BinaryOp::Pow => self.label(e),
                    _ => NO_LABEL,
                };
                self.code.push(Instr::Binary(*op, label));
                *depth -= 1;
            }
            Expr::Unary(f, a) => {
                self.emit(a, layout, depth)?;
                let label = if *f == UnaryFn::Log { self.label(e) } else { NO_LABEL };
                self.code.push(Instr::Unary(*f, label));
            }
        }
        Ok(())
    }

    fn grow(&mut self, depth: &mut usize) {
        *depth += 1;
        self.max_depth = self.max_depth.max(*depth);
    }

    fn label(&mut self, e: &Expr) -> u32 {
        self.labels.push(e.to_string());
        (self.labels.len() - 1) as u32
    }

    pub fn instructions(&self) -> &[Instr] {
        &self.code
    }

    pub fn slot_count(&self) -> usize {
        self.slots
    }

    /// Evaluates with `slots[i]` bound to the i-th layout name.
    pub fn eval(&self, slots: &[f64]) -> Result<f64> {
        debug_assert!(slots.len() >= self.slots);
        if self.max_depth <= INLINE_STACK {
            let mut stack = [0.0f64; INLINE_STACK];
            self.run(slots, &mut stack)
        } else {
            let mut stack = vec![0.0f64; self.max_depth];
            self.run(slots, &mut stack)
        }
    }

    fn run(&self, slots: &[f64], stack: &mut [f64]) -> Result<f64> {
        let mut sp = 0usize;
        for ins in &self.code {
            match *ins {
                Instr::Push(c) => {
                    stack[sp] = c;
                    sp += 1;
                }
                Instr::Load(s) => {
                    stack[sp] = slots[s as usize];
                    sp += 1;
                }
                Instr::Binary(op, label) => {
                    let b = stack[sp - 1];
                    let a = stack[sp - 2];
                    stack[sp - 2] = apply_binary(op, a, b, || self.labels[label as usize].clone())?;
                    sp -= 1;
                }
                Instr::Unary(f, label) => {
                    let a = stack[sp - 1];
                    stack[sp - 1] = apply_unary(f, a, || self.labels[label as usize].clone())?;
                }
            }
        }
        Ok(stack[0])
    }
}
