//! Hermitian eigendecomposition by cyclic Jacobi rotations, plus the singular
//! value and Moore-Penrose routines built on top of it.
//!
//! Each rotation annihilates one off-diagonal entry a_pq. For complex input
//! the 2x2 block is first made real by the diagonal phase diag(e^{i arg a_pq}, 1)
//! and then rotated with the classical real Jacobi angle. Off-diagonal mass
//! decreases monotonically, so convergence is unconditional for hermitian
//! input; the sweep cap only guards against NaN-poisoned data.

use crate::dense::{C64, CMatrix};
use crate::error::{Error, Result};

/// Convergence threshold: off-diagonal Frobenius mass below this multiple of
/// the input Frobenius norm counts as diagonal.
pub const OFF_DIAG_REL_TOL: f64 = 1e-14;
pub const SWEEP_CAP: usize = 100;

/// Relative scale used everywhere a numerical rank decision is needed:
/// eigenvalues of modulus <= RANK_TOL_COEFF * n * max(1, |lambda|_max) count
/// as zero.
pub const RANK_TOL_COEFF: f64 = 1e-10;

/// Rank cutoff for a spectrum given as a slice.
pub fn rank_tolerance(eigenvalues: &[f64]) -> f64 {
    let amax = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    RANK_TOL_COEFF * eigenvalues.len() as f64 * amax.max(1.0)
}

/// Eigendecomposition A = U diag(lambda) U* with eigenvalues sorted
/// descending and orthonormal columns in `vectors`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenDecomposition {
    /// U diag(f(lambda)) U* for an arbitrary scalar map of the spectrum.
    pub fn assemble(&self, values: &[f64]) -> CMatrix {
        let n = self.eigenvalues.len();
        assert_eq!(values.len(), n);
        let u = &self.vectors;
        let mut scaled = u.clone();
        for j in 0..n {
            for i in 0..n {
                scaled[(i, j)] = u[(i, j)] * values[j];
            }
        }
        &scaled * &u.adjoint()
    }
}

/// Cyclic Jacobi on a hermitian matrix. The input is symmetrized exactly
/// before iterating, so tiny round-off asymmetry is harmless.
pub fn eig_hermitian(a: &CMatrix) -> Result<EigenDecomposition> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(EigenDecomposition {
            eigenvalues: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        });
    }

    // Exact symmetrization: w_ij = (a_ij + conj(a_ji)) / 2.
    let mut w = CMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()).scale(0.5));
    for i in 0..n {
        let re = w[(i, i)].re;
        w[(i, i)] = C64::new(re, 0.0);
    }
    let mut v = CMatrix::identity(n);

    let norm = w.fro_norm();
    let target = OFF_DIAG_REL_TOL * norm;

    let off = |w: &CMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += 2.0 * w[(i, j)].norm_sqr();
            }
        }
        s.sqrt()
    };

    if off(&w) <= target {
        return Ok(sorted_decomposition(w, v));
    }

    for _sweep in 0..SWEEP_CAP {
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = w[(p, q)];
                let g = apq.norm();
                if g < 1e-300 {
                    w[(p, q)] = C64::new(0.0, 0.0);
                    w[(q, p)] = C64::new(0.0, 0.0);
                    continue;
                }
                let phase = apq / g; // e^{i arg a_pq}
                let alpha = w[(p, p)].re;
                let beta = w[(q, q)].re;
                let theta = (beta - alpha) / (2.0 * g);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Column update of W by U, where U_pp = c*phase, U_qp = -s,
                // U_pq = s*phase, U_qq = c; then the row update by U* is
                // recovered from hermitian symmetry.
                let cp = phase.scale(c);
                let sp = phase.scale(s);
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let wkp = w[(k, p)];
                    let wkq = w[(k, q)];
                    let new_p = wkp * cp - wkq.scale(s);
                    let new_q = wkp * sp + wkq.scale(c);
                    w[(k, p)] = new_p;
                    w[(p, k)] = new_p.conj();
                    w[(k, q)] = new_q;
                    w[(q, k)] = new_q.conj();
                }
                w[(p, p)] = C64::new(alpha - t * g, 0.0);
                w[(q, q)] = C64::new(beta + t * g, 0.0);
                w[(p, q)] = C64::new(0.0, 0.0);
                w[(q, p)] = C64::new(0.0, 0.0);

                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * cp - vkq.scale(s);
                    v[(k, q)] = vkp * sp + vkq.scale(c);
                }
            }
        }
        if off(&w) <= target {
            return Ok(sorted_decomposition(w, v));
        }
    }

    Err(Error::EigenNoConvergence {
        sweeps: SWEEP_CAP,
        off: off(&w),
    })
}

fn sorted_decomposition(w: CMatrix, v: CMatrix) -> EigenDecomposition {
    let n = w.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[(j, j)].re.partial_cmp(&w[(i, i)].re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| w[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    EigenDecomposition {
        eigenvalues,
        vectors,
    }
}

/// Singular values as the square roots of the eigenvalues of M*M, sorted
/// descending. For hermitian input this equals the sorted absolute spectrum.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let h = &m.adjoint() * m;
    let dec = eig_hermitian(&h)?;
    Ok(dec
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .collect())
}

/// One-sided Jacobi SVD: rotates column pairs until all columns are mutually
/// orthogonal. Returns (B, V) with B = M V, the columns of B orthogonal, and
/// V unitary. Chosen for the pseudo-inverse because it keeps high relative
/// accuracy on small singular values, which the Gram-matrix route loses.
fn one_sided_jacobi(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = m.cols();
    let mut b = m.clone();
    let mut v = CMatrix::identity(n);
    let rows = m.rows();
    // Columns whose squared norm falls below this are numerically zero;
    // rotating them against each other would never converge.
    let col_floor = (f64::EPSILON * m.fro_norm()).powi(2);
    for _sweep in 0..SWEEP_CAP {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let mut alpha = 0.0f64;
                let mut beta = 0.0f64;
                let mut gamma = C64::new(0.0, 0.0);
                for i in 0..rows {
                    alpha += b[(i, p)].norm_sqr();
                    beta += b[(i, q)].norm_sqr();
                    gamma += b[(i, p)].conj() * b[(i, q)];
                }
                let g = gamma.norm();
                if alpha <= col_floor
                    || beta <= col_floor
                    || g <= 1e-15 * (alpha * beta).sqrt()
                    || g < 1e-300
                {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let theta = (beta - alpha) / (2.0 * g);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let cp = phase.scale(c);
                let sp = phase.scale(s);
                for i in 0..rows {
                    let bip = b[(i, p)];
                    let biq = b[(i, q)];
                    b[(i, p)] = bip * cp - biq.scale(s);
                    b[(i, q)] = bip * sp + biq.scale(c);
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * cp - viq.scale(s);
                    v[(i, q)] = vip * sp + viq.scale(c);
                }
            }
        }
        if !rotated {
            return Ok((b, v));
        }
    }
    Err(Error::EigenNoConvergence {
        sweeps: SWEEP_CAP,
        off: f64::NAN,
    })
}

/// Moore-Penrose inverse via one-sided Jacobi SVD. Singular values at or
/// below `tol` (raised to an internal floor of eps * max(rows, cols) *
/// sigma_max) are treated as zero.
pub fn pseudo_inverse(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let (rows, cols) = (m.rows(), m.cols());
    if m.is_empty() || m.max_abs() == 0.0 {
        return Ok(CMatrix::zeros(cols, rows));
    }
    let (b, v) = one_sided_jacobi(m)?;
    let mut order: Vec<(f64, usize)> = (0..cols)
        .map(|j| {
            let norm = (0..rows).map(|i| b[(i, j)].norm_sqr()).sum::<f64>().sqrt();
            (norm, j)
        })
        .collect();
    order.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    let smax = order.first().map_or(0.0, |o| o.0);
    let cutoff = tol.max(f64::EPSILON * rows.max(cols) as f64 * smax);
    let rank = order.iter().take_while(|o| o.0 > cutoff).count();
    if rank == 0 {
        return Ok(CMatrix::zeros(cols, rows));
    }
    // pinv = sum_j sigma_j^{-1} v_j u_j* with u_j = b_j / sigma_j
    let mut pinv = CMatrix::zeros(cols, rows);
    for &(sigma, j) in order.iter().take(rank) {
        let inv_sq = 1.0 / (sigma * sigma);
        for i in 0..cols {
            let vij = v[(i, j)].scale(inv_sq);
            for k in 0..rows {
                let add = vij * b[(k, j)].conj();
                pinv[(i, k)] += add;
            }
        }
    }
    Ok(pinv)
}
