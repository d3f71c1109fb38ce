//! A laboratory for clocked Böhm trees of untyped lambda terms.

pub mod catalog;
pub mod cli;
pub mod delta;
pub mod discrimination;
pub mod fpc;
pub mod rational;
pub mod sampling;
pub mod reduction;
pub mod render;
pub mod syntax;
pub mod term;
pub mod tree;

pub use reduction::{ReductionOutcome, StepTrace};
pub use syntax::{parse, print, Style};
pub use term::{alpha_eq, Position, Term};
