//! Dense non-negative matrix factorization: update rules, a generic driver and
//! a catalogue of initialization strategies (random, clustering, heuristic
//! and low-rank families).

pub mod error;
pub mod linalg;
pub mod init;
pub mod solvers;

pub use error::{NmfError, Result};
pub use linalg::{DenseMatrix, Rank, TruncatedSvd};
pub use solvers::{FactorPair, IterationTrace, Origin, SolverConfig, SolverKind, StopReason};
