//! Exact computer algebra for LLT Catalanimals.
//!
//! A Catalanimal is a symmetric rational function in `z_1, ..., z_l` cut out
//! by a weight `lambda` and three subsets `R_q, R_t, R_qt` of the positive
//! roots of `GL_l`.  This crate builds the Catalanimals attached to tuples of
//! skew shapes, verifies tameness and the `(m,n)`-cuddliness bounds, extracts
//! the polynomial part of the associated raising-operator series, and
//! machine-checks the identities relating those objects to LLT polynomials
//! and the Macdonald `nabla` operator.
//!
//! Module map:
//! - [`qt`]: exact arithmetic in the fraction field Q(q,t).
//! - [`shapes`]: skew-shape tuples, reading order, attacking pairs,
//!   `m`-stretching, and the lattice-path vectors `b(m,n)`.
//! - [`symfunc`]: symmetric functions over Q(q,t) in the classical bases,
//!   plethystic evaluation, and coproduct components.
//! - [`llt`]: LLT polynomials by tableau enumeration, super tableaux, and the
//!   `1-q` specialization.
//! - [`catalanimal`]: Catalanimal construction, cuddliness reports,
//!   restriction/join, numeric evaluation of `H`/`phi`/`g`, wheel tests,
//!   principal specialization, polynomial parts, and cub verification.
//! - [`nabla`]: the modified Macdonald basis and the diagonal `nabla` action,
//!   used as an oracle independent of the Catalanimal pipeline.

pub mod catalanimal;
pub mod error;
pub mod llt;
pub mod nabla;
pub mod par;
pub mod partition;
pub mod qt;
pub mod shapes;
pub mod symfunc;
#[doc(hidden)]
pub mod testutil;
pub mod varpoly;

pub use catalanimal::{Catalanimal, CubTranscript, CuddlyReport, GlCharPoly, RootSet};
pub use error::Error;
pub use llt::SuperLetter;
pub use nabla::MacdonaldBasis;
pub use partition::Partition;
pub use qt::{QtPoly, QtRational};
pub use shapes::{BoxRef, SkewShape, SkewTuple, StretchSpec, TupleStats};
pub use symfunc::{Basis, QtAlphabet, SymFunc};

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
