//! Symbolic verification of Dirac structures on local coordinate charts.
//!
//! The crate represents vector fields, differential forms, and multivector
//! fields with exact symbolic coefficients over a chart, presents maximal
//! isotropic subbundles of `TM + T*M` by explicit frames, and mechanically
//! checks isotropy, bracket closure, coupling decompositions with respect to
//! a foliation, geometric-data extraction and reconstruction, the first-order
//! model of a structure around a presymplectic leaf, and the induced calculus
//! along normalized submanifolds (kernels, properness, second fundamental
//! form, contravariant derivative).
//!
//! Every "= 0" condition is decided by [`expr::classify_zero`]: exactly on
//! rational coefficient functions, by deterministic seeded sampling when
//! transcendental coefficients appear. Open conditions (ranks,
//! transversality) are checked by exact rational linear algebra at seeded
//! sample points.

pub mod cartan;
pub mod catalog;
pub mod chart;
pub mod coupling;
pub mod courant;
pub mod error;
pub mod expr;
pub mod leafline;
pub mod linalg;
pub mod report;
pub mod scalar;
pub mod submanifold;
pub mod symmat;

pub use chart::{Chart, FloatPoint, Point};
pub use error::{Error, Result};
pub use expr::{classify_zero, parse_expr, Expr, SampleConfig, ZeroVerdict};
pub use report::{CheckRecord, CheckStatus, VerificationReport, Witness};
pub use scalar::Scalar;
