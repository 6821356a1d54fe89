pub mod config;
pub mod discretize;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod linalg;
pub mod potential;
pub mod spectrum;
pub mod sweep;
pub mod crossing_form;
pub mod bifurcation;
pub mod pipeline;
pub mod report;

pub use error::{Error, Result};
