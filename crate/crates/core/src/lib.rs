//! Exact Hopf algebra of Feynman graphs.

pub mod algebra;
pub mod birkhoff;
pub mod corpus;
pub mod error;
pub mod generate;
pub mod graph;
pub mod greens;
pub mod hopf;
pub mod laurent;
pub mod linalg;
pub mod report;
pub mod series;
pub mod subgraph;
pub mod theory;

pub use error::{Error, Result};

/// Exact rational numbers over arbitrary-precision integers.
pub type Rational = num_rational::BigRational;
