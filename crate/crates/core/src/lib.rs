//! Path combinatorics, Toeplitz-Cuntz-Krieger symbolic algebra and truncated
//! Fock representations for product systems of graphs over ℕ^k.
//!
//! A [`Skeleton`] presents a k-graph by its colored edges and commuting
//! squares. [`Path`]s are kept in ascending-color normal form, which makes
//! minimal common extensions, the `∨F` closure and exact symbolic products
//! computable; [`fock::FockSpace`] realizes the same algebra as sparse
//! matrices.

pub mod alignment;
pub mod degree;
pub mod fixtures;
pub mod fock;
pub mod paths;
pub mod skeleton;
pub mod tck;

pub use alignment::{AlignmentError, AlignmentReport, MceSet, VeeClosure};
pub use degree::{Degree, DegreeError};
pub use fock::{operator_norm, FockError, FockOperator, FockSpace, NormEstimate};
pub use paths::{Path, PathError};
pub use skeleton::{EdgeId, Skeleton, SkeletonDoc, SkeletonError, VertexId};
pub use tck::{FormalElement, Tck, TckError, Term};
