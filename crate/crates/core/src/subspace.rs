//! The finite-dimensional subspace lattice: compressions A(U) of a hermitian
//! matrix to a subspace, the join U + V and meet U n V, and the modularity
//! defect of U -> tr f(A(U)).

use crate::dense::{C64, CMatrix};
use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::indexset::IndexSet;
use crate::specfun::{trace_of_spectrum, ExtendedReal, SpectralFunction};

/// Default residual tolerance for dropping dependent vectors.
pub const ORTHO_TOL: f64 = 1e-10;
/// Eigenvalues of P(U) P(V) P(U) within this band of 1 span the intersection.
pub const INTERSECT_TOL: f64 = 1e-8;

/// A subspace of C^m held as an orthonormal basis (m x r matrix, r possibly
/// zero).
#[derive(Clone, Debug)]
pub struct Subspace {
    basis: CMatrix, // columns orthonormal
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Self {
            basis: CMatrix::zeros(ambient, 0),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self {
            basis: CMatrix::identity(ambient),
        }
    }

    /// Span of coordinate vectors e_i for i in the index set.
    pub fn coordinate(set: &IndexSet) -> Self {
        let m = set.dim();
        let idx = set.indices();
        let basis = CMatrix::from_fn(m, idx.len(), |i, j| {
            if i == idx[j] {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self { basis }
    }

    /// Modified Gram-Schmidt with a second re-orthogonalization pass.
    /// Vectors whose residual norm drops below tol * max(1, input norm) are
    /// dropped, so degenerate inputs shrink the basis instead of failing.
    pub fn span(ambient: usize, vectors: &[Vec<C64>], tol: f64) -> Result<Self> {
        let mut basis: Vec<Vec<C64>> = Vec::new();
        for v in vectors {
            if v.len() != ambient {
                return Err(Error::DimensionMismatch {
                    expected: ambient,
                    got: v.len(),
                });
            }
            let norm0 = vec_norm(v);
            let mut w = v.clone();
            for _ in 0..2 {
                for u in &basis {
                    let c = inner(u, &w);
                    for (wk, uk) in w.iter_mut().zip(u) {
                        *wk -= c * uk;
                    }
                }
            }
            let norm = vec_norm(&w);
            if norm <= tol * norm0.max(1.0) {
                continue;
            }
            for wk in &mut w {
                *wk = wk.scale(1.0 / norm);
            }
            basis.push(w);
        }
        let r = basis.len();
        Ok(Self {
            basis: CMatrix::from_fn(ambient, r, |i, j| basis[j][i]),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn basis_vector(&self, j: usize) -> Vec<C64> {
        (0..self.ambient_dim()).map(|i| self.basis[(i, j)]).collect()
    }

    /// Orthogonal projector P(U) = X X*.
    pub fn projector(&self) -> CMatrix {
        if self.dim() == 0 {
            return CMatrix::zeros(self.ambient_dim(), self.ambient_dim());
        }
        &self.basis * &self.basis.adjoint()
    }

    /// Gram-matrix deviation from the identity; the orthonormality defect.
    pub fn gram_defect(&self) -> f64 {
        let r = self.dim();
        let gram = &self.basis.adjoint() * &self.basis;
        (&gram - &CMatrix::identity(r)).max_abs()
    }
}

fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn inner(u: &[C64], w: &[C64]) -> C64 {
    u.iter().zip(w).map(|(a, b)| a.conj() * b).sum()
}

/// The compression A(U): the r x r matrix of <A x_i, x_j> in the stored
/// orthonormal basis, i.e. X* A X.
pub fn compress(a: &HermitianMatrix, u: &Subspace) -> Result<HermitianMatrix> {
    if u.ambient_dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: u.ambient_dim(),
        });
    }
    if u.dim() == 0 {
        return Ok(HermitianMatrix::empty());
    }
    let x = u.basis();
    let m = &(&x.adjoint() * a.as_matrix()) * x;
    Ok(HermitianMatrix::symmetrize(m))
}

/// Join U + V: the span of both bases.
pub fn subspace_sum(u: &Subspace, v: &Subspace) -> Result<Subspace> {
    if u.ambient_dim() != v.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: u.ambient_dim(),
            got: v.ambient_dim(),
        });
    }
    let mut vectors = Vec::with_capacity(u.dim() + v.dim());
    for j in 0..u.dim() {
        vectors.push(u.basis_vector(j));
    }
    for j in 0..v.dim() {
        vectors.push(v.basis_vector(j));
    }
    Subspace::span(u.ambient_dim(), &vectors, ORTHO_TOL)
}

/// Meet U n V, computed as the eigenspace of P(U) P(V) P(U) with eigenvalue
/// within `tol` of 1.
pub fn subspace_intersection(u: &Subspace, v: &Subspace, tol: f64) -> Result<Subspace> {
    if u.ambient_dim() != v.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: u.ambient_dim(),
            got: v.ambient_dim(),
        });
    }
    let m = u.ambient_dim();
    if u.dim() == 0 || v.dim() == 0 {
        return Subspace::span(m, &[], ORTHO_TOL);
    }
    let p = u.projector();
    let q = v.projector();
    let pqp = HermitianMatrix::symmetrize(&(&p * &q) * &p);
    let dec = pqp.eig()?;
    let mut vectors = Vec::new();
    for (j, &l) in dec.eigenvalues.iter().enumerate() {
        if (l - 1.0).abs() <= tol {
            vectors.push((0..m).map(|i| dec.vectors[(i, j)]).collect());
        }
    }
    Subspace::span(m, &vectors, ORTHO_TOL)
}

/// tr f(A(U)) with the empty-compression convention w(0) = 0.
pub fn subspace_trace(
    a: &HermitianMatrix,
    f: &SpectralFunction,
    u: &Subspace,
) -> Result<ExtendedReal> {
    let c = compress(a, u)?;
    if c.dim() == 0 {
        return Ok(ExtendedReal::Finite(0.0));
    }
    trace_of_spectrum(&c.eig()?.eigenvalues, f)
}

/// w(U) + w(V) - w(U + V) - w(U n V) for w(U) = tr f(A(U)).
///
/// All four traces must be finite; sentinel values make the defect
/// meaningless on the subspace lattice and are reported as errors.
///
/// The guaranteed modularity directions apply to pairs drawn from a common
/// orthonormal frame (equivalently, commuting projectors): those are the
/// subspace analogs of index sets. Skewed pairs can produce either sign;
/// see the tests.
pub fn subspace_delta(
    a: &HermitianMatrix,
    f: &SpectralFunction,
    u: &Subspace,
    v: &Subspace,
) -> Result<f64> {
    let join = subspace_sum(u, v)?;
    let meet = subspace_intersection(u, v, INTERSECT_TOL)?;
    let wu = subspace_trace(a, f, u)?.expect_finite("tr f(A(U))")?;
    let wv = subspace_trace(a, f, v)?.expect_finite("tr f(A(V))")?;
    let wj = subspace_trace(a, f, &join)?.expect_finite("tr f(A(U+V))")?;
    let wm = subspace_trace(a, f, &meet)?.expect_finite("tr f(A(U n V))")?;
    Ok((wu - wm) + (wv - wj))
}
