pub mod circuit;
pub mod combinatorics;
pub mod degree;
pub mod error;
pub mod formats;
pub mod interval;
pub mod matrix;
pub mod partitions;
pub mod semiring;
pub mod solvers;
pub mod spectrum;

pub use circuit::{circuit_kron, circuit_sum, verify, Circuit, Gate, Measure, VerifyReport, VerifyScope};
pub use error::{Error, Result};
pub use interval::Interval;
pub use matrix::{kron, MatrixSpec, SparseMatrix, SparseVector};
pub use semiring::{Scalar, Semiring};
