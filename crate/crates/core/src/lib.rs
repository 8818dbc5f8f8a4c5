pub mod baseline;
pub mod check;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod estimator;
pub mod evaluate;
pub mod grid;
pub mod lattice;
pub mod rect_average;
pub mod simulate;
