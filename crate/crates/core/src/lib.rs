//! Universal finite-type invariants of braids.
//!
//! The crate combines exact computation in the truncated Drinfeld–Kohno algebra
//! `U(n)_r` with numerical parallel transport of the Knizhnik–Zamolodchikov
//! connection, the Hopf algebra of chord diagrams, and a numerical Drinfeld
//! associator.

pub mod braid;
pub mod chord;
pub mod dk;
pub mod error;
pub mod kz;
pub mod linalg;
pub mod quadrature;
pub mod scalar;
pub mod series;
pub mod vassiliev;

pub use braid::{BraidWord, Permutation, StrandPath};
pub use chord::{ChordAlgebra, ChordDiagram, DiagramSpace};
pub use dk::{DkAlgebra, DkElement, DkPresentation, Limits, ReductionCache};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use scalar::{Rational, Scalar};
pub use series::{Alphabet, NCSeries, Word};
pub use vassiliev::{AssociatorResult, SemidirectElement};
