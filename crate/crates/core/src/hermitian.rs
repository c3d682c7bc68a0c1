//! Hermitian matrices with construction-time symmetrization, and the
//! principal / rectangular submatrix extractors.

use crate::dense::{C64, CMatrix};
use crate::eig::{self, EigenDecomposition};
use crate::error::{Error, Result};
use crate::indexset::IndexSet;

/// Construction accepts ||M - M*||_{inf,e} up to this multiple of
/// max(1, ||M||_{inf,e}); anything worse is rejected as non-hermitian.
pub const SYMMETRIZE_REL_TOL: f64 = 1e-9;

/// Square complex matrix with exact conjugate symmetry: entry (i,j) is stored
/// as the conjugate of entry (j,i) bit for bit, and the diagonal is real.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    mat: CMatrix,
}

impl HermitianMatrix {
    /// Validates squareness and near-symmetry, then stores (M + M*)/2.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare {
                rows: mat.rows(),
                cols: mat.cols(),
            });
        }
        if mat.rows() == 0 {
            return Err(Error::EmptyMatrix);
        }
        let asymmetry = mat.asymmetry();
        let tolerance = SYMMETRIZE_REL_TOL * mat.max_abs().max(1.0);
        if asymmetry > tolerance {
            return Err(Error::NotHermitian {
                asymmetry,
                tolerance,
            });
        }
        Ok(Self::symmetrize(mat))
    }

    /// Symmetrizes unconditionally; for matrices that are hermitian by
    /// construction (compressions, spectral reassembly) up to round-off.
    pub fn symmetrize(mat: CMatrix) -> Self {
        assert!(mat.is_square(), "hermitian matrices are square");
        let n = mat.rows();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = C64::new(mat[(i, i)].re, 0.0);
            for j in i + 1..n {
                let v = (mat[(i, j)] + mat[(j, i)].conj()).scale(0.5);
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        Self { mat: out }
    }

    /// The 0x0 matrix; its trace conventions are handled by the callers.
    pub fn empty() -> Self {
        Self {
            mat: CMatrix::zeros(0, 0),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            mat: CMatrix::identity(n),
        }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::new(CMatrix::from_real_rows(rows))
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            mat: CMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    C64::new(diag[i], 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.max_abs()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.mat[(i, i)].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn eig(&self) -> Result<EigenDecomposition> {
        eig::eig_hermitian(&self.mat)
    }

    /// Determinant as the product of eigenvalues (real for hermitian input).
    pub fn det(&self) -> Result<f64> {
        Ok(self.eig()?.eigenvalues.iter().product())
    }

    /// Rows and columns indexed by `i` in ascending order; the empty set
    /// yields the 0x0 matrix.
    pub fn principal_submatrix(&self, i: &IndexSet) -> Result<HermitianMatrix> {
        if i.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: i.dim(),
            });
        }
        let idx = i.indices();
        Ok(HermitianMatrix {
            mat: self.mat.submatrix(&idx, &idx),
        })
    }

    /// Rows `i`, columns `j`, both in ascending order; both must be nonempty.
    pub fn rectangular_submatrix(&self, i: &IndexSet, j: &IndexSet) -> Result<CMatrix> {
        if i.dim() != self.dim() || j.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: i.dim().max(j.dim()),
            });
        }
        if i.is_empty() || j.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        Ok(self.mat.submatrix(&i.indices(), &j.indices()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn example_matrix() -> HermitianMatrix {
        HermitianMatrix::from_real_rows(&[
            &[5.0, -12.0, 9.0],
            &[-12.0, 33.0, -24.0],
            &[9.0, -24.0, 19.0],
        ])
        .unwrap()
    }

    #[test]
    fn construction_symmetrizes_and_rejects() {
        let slightly_off = CMatrix::from_rows(vec![
            vec![C64::new(1.0, 1e-12), C64::new(2.0, 3.0)],
            vec![C64::new(2.0, -3.0 + 1e-12), C64::new(4.0, 0.0)],
        ]);
        let h = HermitianMatrix::new(slightly_off).unwrap();
        assert_eq!(h.entry(0, 0).im, 0.0);
        assert_eq!(h.entry(0, 1), h.entry(1, 0).conj());

        let bad = CMatrix::from_real_rows(&[&[1.0, 2.0], &[5.0, 1.0]]);
        assert!(matches!(
            HermitianMatrix::new(bad),
            Err(Error::NotHermitian { .. })
        ));
        assert!(matches!(
            HermitianMatrix::new(CMatrix::zeros(0, 0)),
            Err(Error::EmptyMatrix)
        ));
    }

    #[test]
    fn principal_submatrix_examples() {
        let a = example_matrix();
        let i = IndexSet::from_indices(3, &[0, 1]).unwrap();
        let sub = a.principal_submatrix(&i).unwrap();
        assert_eq!(sub.entry(0, 0).re, 5.0);
        assert_eq!(sub.entry(0, 1).re, -12.0);
        assert_eq!(sub.entry(1, 1).re, 33.0);

        let full = a.principal_submatrix(&IndexSet::full(3)).unwrap();
        assert_eq!(full, a);

        let empty = a.principal_submatrix(&IndexSet::empty(3)).unwrap();
        assert_eq!(empty.dim(), 0);
    }

    #[test]
    fn rectangular_submatrix_examples() {
        let a = example_matrix();
        let i = IndexSet::full(3);
        let j = IndexSet::from_indices(3, &[1, 2]).unwrap();
        let block = a.rectangular_submatrix(&i, &j).unwrap();
        assert_eq!(block.rows(), 3);
        assert_eq!(block.cols(), 2);
        assert_eq!(block[(0, 0)].re, -12.0);
        assert_eq!(block[(1, 0)].re, 33.0);
        assert_eq!(block[(2, 1)].re, 19.0);

        let single = a
            .rectangular_submatrix(
                &IndexSet::singleton(3, 1).unwrap(),
                &IndexSet::singleton(3, 0).unwrap(),
            )
            .unwrap();
        assert_eq!(single[(0, 0)].re, -12.0);

        assert!(a
            .rectangular_submatrix(&IndexSet::empty(3), &j)
            .is_err());
    }

    #[test]
    fn entrywise_max_norm_of_example_is_33() {
        assert_eq!(example_matrix().max_abs(), 33.0);
    }
}
