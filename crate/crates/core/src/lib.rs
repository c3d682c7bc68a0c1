//! Spectral set functions of principal submatrices.
//!
//! Given a hermitian matrix A and a scalar function f, the set function
//! w(I) = tr f(A[I]) over subsets I of the index range is submodular,
//! supermodular, or neither depending on f. This crate computes such set
//! functions, classifies their modularity exhaustively with witnesses,
//! extends the machinery to M-matrices (via certified power series) and to
//! the lattice of subspaces (via compressions), and runs the greedy
//! maximal-volume index selection behind CUR cross approximations together
//! with its error bounds.

pub mod cur;
pub mod dense;
pub mod eig;
pub mod error;
pub mod hermitian;
pub mod indexset;
pub mod io;
pub mod mmatrix;
pub mod setfun;
pub mod specfun;
pub mod subspace;
pub mod verify;

pub use dense::{C64, CMatrix, RMatrix};
pub use eig::{eig_hermitian, pseudo_inverse, singular_values, EigenDecomposition};
pub use error::{Error, Result};
pub use hermitian::HermitianMatrix;
pub use indexset::IndexSet;
pub use setfun::{classify_modularity, delta, is_nondecreasing, spectral_trace, ModularityReport, Verdict};
pub use specfun::{matrix_function, trace_function, ExtendedReal, SpectralFunction};
