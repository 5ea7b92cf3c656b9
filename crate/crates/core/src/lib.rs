//! Communication-assisted local-hidden-variable models for Pauli measurements
//! on graph states.

pub mod chain;
pub mod error;
pub mod exec;
pub mod gf2;
pub mod graph;
pub mod lhv;
pub mod nogo;
pub mod oracle;
pub mod pauli;

pub use error::{Error, Result};
pub use exec::Exec;
pub use graph::{Graph, NodeColoring};
pub use oracle::{classify, statevector_verdict, Verdict};
pub use pauli::{Measurement, Pauli, PhasedPauli, Sign};
