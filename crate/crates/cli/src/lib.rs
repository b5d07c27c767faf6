//! Problem files, query evaluation and the self-test behind `phispec`.

pub mod problem;
pub mod run;
pub mod selftest;

pub use problem::{parse_problem, ParseError, ProblemFile, GRAMMAR};
pub use run::{run, RunReport};
