//! Command-line driver for the `mli-dm` toolkit: configuration loading,
//! experiment runs, CSV output and the validation suite.

pub mod config;
pub mod output;
pub mod run;
pub mod validate;
