//! Greedy maximal-volume index selection and CUR reconstruction.
//!
//! The greedy loop selects the largest remaining diagonal pivot and applies
//! one Schur-complement elimination step per selection, so the running pivot
//! product equals det A[I]. The entrywise error of the cross approximation
//! C A[I]^{-1} R is bounded by (mu_k / det A[I]) (k+1) sigma_{k+1}.

use serde::Serialize;

use crate::dense::CMatrix;
use crate::eig::{rank_tolerance, singular_values};
use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::indexset::IndexSet;
use crate::setfun::{is_nondecreasing, MonotonicityReport};
use crate::specfun::{ExtendedReal, SpectralFunction};

/// Full |det A[I,J]| scans enumerate C(m,k)^2 pairs up to this budget.
pub const FULL_SCAN_BUDGET: u128 = 10_000_000;
/// Principal-only scans enumerate C(m,k) subsets up to this budget.
pub const PRINCIPAL_SCAN_BUDGET: u128 = 100_000;
/// A pivot at or below this multiple of the largest initial diagonal entry
/// takes the zero-pivot exit.
pub const ZERO_PIVOT_REL_TOL: f64 = 1e-12;
/// Diagonal entries below -this * ||A||_inf,e flag a non-PSD input.
pub const PSD_GUARD_REL_TOL: f64 = 1e-9;

/// Output of the greedy maximal-volume selection.
#[derive(Clone, Debug, Serialize)]
pub struct CurSelection {
    pub indices: IndexSet,
    /// Product of the pivots; equals det A[indices] when not degenerate.
    pub det_product: f64,
    pub pivots: Vec<(usize, f64)>,
    /// True when the zero-pivot exit fired; then indices = {0, .., k-1} and
    /// det_product = 0.
    pub degenerate: bool,
}

/// Greedy selection: pick the largest remaining diagonal entry (ties to the
/// smallest index), multiply it into the running determinant, and eliminate
/// it from the remaining block.
pub fn greedy_select(a: &HermitianMatrix, k: usize) -> Result<CurSelection> {
    let m = a.dim();
    if m > crate::indexset::MAX_DIM {
        return Err(Error::DimensionTooLarge {
            dim: m,
            max: crate::indexset::MAX_DIM,
        });
    }
    if k == 0 || k > m {
        return Err(Error::InvalidCardinality { k, dim: m });
    }
    let mut w = a.as_matrix().clone();
    let mut active: Vec<bool> = vec![true; m];
    let psd_floor = -PSD_GUARD_REL_TOL * a.max_abs().max(1.0);
    let max_diag0 = a.diag().into_iter().fold(0.0f64, f64::max);
    let zero_floor = ZERO_PIVOT_REL_TOL * max_diag0;

    let mut picked: Vec<usize> = Vec::with_capacity(k);
    let mut pivots: Vec<(usize, f64)> = Vec::with_capacity(k);
    let mut t = 1.0f64;

    loop {
        let mut pivot_idx = None;
        let mut pivot_val = f64::NEG_INFINITY;
        for i in 0..m {
            if !active[i] {
                continue;
            }
            let d = w[(i, i)].re;
            if d < psd_floor {
                return Err(Error::NotPsd { index: i, value: d });
            }
            if d > pivot_val {
                pivot_val = d;
                pivot_idx = Some(i);
            }
        }
        let i = pivot_idx.expect("at least one active index");
        if pivot_val <= zero_floor {
            return Ok(CurSelection {
                indices: IndexSet::from_mask(m, (1u64 << k) - 1).expect("k <= m"),
                det_product: 0.0,
                pivots,
                degenerate: true,
            });
        }
        picked.push(i);
        pivots.push((i, pivot_val));
        t *= pivot_val;
        active[i] = false;
        if picked.len() == k {
            break;
        }
        for p in 0..m {
            if !active[p] {
                continue;
            }
            for q in 0..m {
                if !active[q] {
                    continue;
                }
                let update = w[(p, i)] * w[(i, q)].scale(1.0 / pivot_val);
                w[(p, q)] -= update;
            }
        }
    }

    Ok(CurSelection {
        indices: IndexSet::from_indices(m, &picked).expect("picked indices valid"),
        det_product: t,
        pivots,
        degenerate: false,
    })
}

/// Maximal k x k volume found by exhaustive enumeration.
#[derive(Clone, Debug, Serialize)]
pub struct MaxVolume {
    pub value: f64,
    pub i: IndexSet,
    pub j: IndexSet,
    pub principal_only: bool,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// mu_k(A) = max |det A[I,J]| over index sets of cardinality k, with ties
/// broken lexicographically on the pair of bitmasks. `principal_only`
/// restricts to I = J.
pub fn mu_k_exhaustive(a: &CMatrix, k: usize, principal_only: bool) -> Result<MaxVolume> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let m = a.rows();
    if m > crate::indexset::MAX_DIM {
        return Err(Error::DimensionTooLarge {
            dim: m,
            max: crate::indexset::MAX_DIM,
        });
    }
    if k == 0 || k > m {
        return Err(Error::InvalidCardinality { k, dim: m });
    }
    let subsets = binomial(m, k);
    if principal_only {
        if subsets > PRINCIPAL_SCAN_BUDGET {
            return Err(Error::BudgetExceeded {
                needed: subsets,
                cap: PRINCIPAL_SCAN_BUDGET,
            });
        }
    } else if subsets.saturating_mul(subsets) > FULL_SCAN_BUDGET {
        return Err(Error::BudgetExceeded {
            needed: subsets.saturating_mul(subsets),
            cap: FULL_SCAN_BUDGET,
        });
    }

    let mut best: Option<MaxVolume> = None;
    let mut consider = |i: &IndexSet, j: &IndexSet| -> Result<()> {
        let sub = a.submatrix(&i.indices(), &j.indices());
        let vol = sub.det_lu()?.norm();
        // strict improvement keeps the lexicographically first maximizer
        if best.as_ref().is_none_or(|b| vol > b.value) {
            best = Some(MaxVolume {
                value: vol,
                i: *i,
                j: *j,
                principal_only,
            });
        }
        Ok(())
    };
    if principal_only {
        for i in IndexSet::all_of_card(m, k) {
            consider(&i, &i)?;
        }
    } else {
        for i in IndexSet::all_of_card(m, k) {
            for j in IndexSet::all_of_card(m, k) {
                consider(&i, &j)?;
            }
        }
    }
    Ok(best.expect("at least one subset"))
}

/// CUR reconstruction from a principal index set.
#[derive(Clone, Debug, Serialize)]
pub struct CurResult {
    #[serde(skip)]
    pub approximant: CMatrix,
    pub achieved_error: f64,
    pub bound: ExtendedReal,
    pub sigma_k1: f64,
    pub mu_k: Option<f64>,
    pub det_core: f64,
    /// Why the bound is unavailable, when it is.
    pub bound_note: Option<String>,
}

/// Builds C A[I]^{-1} R, measures the entrywise error, and evaluates the
/// maximal-volume error bound when the enumeration budget allows it: the
/// full scan directly, or the principal-only scan for PSD input (where the
/// full maximum is attained on a principal submatrix).
pub fn cur_build(a: &HermitianMatrix, i: &IndexSet) -> Result<CurResult> {
    let m = a.dim();
    let k = i.card();
    if k == 0 {
        return Err(Error::EmptyIndexSet);
    }
    let core = a.principal_submatrix(i)?;
    let dec = core.eig()?;
    let tol = rank_tolerance(&dec.eigenvalues);
    let det_core: f64 = dec.eigenvalues.iter().product();
    if dec.eigenvalues.iter().any(|l| l.abs() <= tol) {
        return Err(Error::SingularCore {
            det: det_core.abs(),
        });
    }
    let inv_values: Vec<f64> = dec.eigenvalues.iter().map(|l| 1.0 / l).collect();
    let core_inv = dec.assemble(&inv_values);

    let full = IndexSet::full(m);
    let c = a.rectangular_submatrix(&full, i)?;
    let r = a.rectangular_submatrix(i, &full)?;
    let approximant = &(&c * &core_inv) * &r;
    let achieved_error = (a.as_matrix() - &approximant).max_abs();

    let sigma = singular_values(a.as_matrix())?;
    let sigma_k1 = if k < m { sigma[k] } else { 0.0 };

    let subsets = binomial(m, k);
    let (mu_k, bound_note) = if subsets.saturating_mul(subsets) <= FULL_SCAN_BUDGET {
        (Some(mu_k_exhaustive(a.as_matrix(), k, false)?.value), None)
    } else {
        let spectrum = a.eig()?.eigenvalues;
        let psd = spectrum
            .iter()
            .all(|&l| l >= -rank_tolerance(&spectrum));
        if psd && subsets <= PRINCIPAL_SCAN_BUDGET {
            (Some(mu_k_exhaustive(a.as_matrix(), k, true)?.value), None)
        } else {
            (
                None,
                Some(format!(
                    "maximal-volume enumeration over budget (C({m},{k}) = {subsets}); \
                     bound unavailable"
                )),
            )
        }
    };
    let bound = match mu_k {
        Some(mu) => {
            ExtendedReal::Finite(mu / det_core.abs() * (k as f64 + 1.0) * sigma_k1)
        }
        None => ExtendedReal::PosInf,
    };

    Ok(CurResult {
        approximant,
        achieved_error,
        bound,
        sigma_k1,
        mu_k,
        det_core: det_core.abs(),
        bound_note,
    })
}

/// Greedy guarantee report: det A[I_greedy] against mu_k^{1 - 1/e}.
#[derive(Clone, Debug, Serialize)]
pub struct GreedyBoundReport {
    pub holds: bool,
    /// det A[I_greedy], recomputed from the eigenvalues of the submatrix.
    pub lhs: f64,
    /// mu_k(A)^{1 - 1/e}.
    pub rhs: f64,
    pub mu_k: f64,
    pub mu_index_set: IndexSet,
    /// (k+1) mu_k^{1/e} sigma_{k+1}: the CUR error bound the guarantee buys.
    pub cur_error_bound: f64,
    /// The guarantee is only backed by theory when the log-det set function
    /// is nondecreasing; lambda_min >= 1 is the sufficient condition
    /// surfaced here.
    pub monotone: MonotonicityReport,
    pub lambda_min: f64,
    pub lambda_min_ge_one: bool,
    pub selection: CurSelection,
}

pub fn greedy_bound_check(a: &HermitianMatrix, k: usize) -> Result<GreedyBoundReport> {
    let selection = greedy_select(a, k)?;
    let monotone = is_nondecreasing(a, &SpectralFunction::Log, None)?;
    let spectrum = a.eig()?.eigenvalues;
    let lambda_min = *spectrum.last().expect("nonempty");
    let mu = mu_k_exhaustive(a.as_matrix(), k, true)?;
    let lhs: f64 = a
        .principal_submatrix(&selection.indices)?
        .eig()?
        .eigenvalues
        .iter()
        .product();
    let frac = 1.0 - (-1.0f64).exp();
    let rhs = mu.value.powf(frac);
    let sigma = singular_values(a.as_matrix())?;
    let sigma_k1 = if k < a.dim() { sigma[k] } else { 0.0 };
    let cur_error_bound = (k as f64 + 1.0) * mu.value.powf((-1.0f64).exp()) * sigma_k1;
    let slack = 1e-9 * lhs.abs().max(rhs.abs()).max(1.0);
    Ok(GreedyBoundReport {
        holds: lhs + slack >= rhs,
        lhs,
        rhs,
        mu_k: mu.value,
        mu_index_set: mu.i,
        cur_error_bound,
        monotone,
        lambda_min,
        lambda_min_ge_one: lambda_min >= 1.0,
        selection,
    })
}

/// The Frobenius-optimal core C^+ A R^+ for fixed row set I and column set J.
pub struct OptimalCore {
    pub core: CMatrix,
    pub frobenius_error: f64,
}

pub fn optimal_core_frobenius(a: &CMatrix, i: &IndexSet, j: &IndexSet) -> Result<OptimalCore> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let m = a.rows();
    if i.dim() != m || j.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: i.dim().max(j.dim()),
        });
    }
    if i.is_empty() || j.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    let all: Vec<usize> = (0..m).collect();
    let c = a.submatrix(&all, &j.indices());
    let r = a.submatrix(&i.indices(), &all);
    let c_pinv = crate::eig::pseudo_inverse(&c, 0.0)?;
    let r_pinv = crate::eig::pseudo_inverse(&r, 0.0)?;
    let core = &(&c_pinv * a) * &r_pinv;
    let residual = a - &(&(&c * &core) * &r);
    Ok(OptimalCore {
        core,
        frobenius_error: residual.fro_norm(),
    })
}

/// Hadamard-style upper bound (a_1 ... a_k / det A[I]) (k+1) sigma_{k+1}
/// using the k largest diagonal entries; always dominates the
/// maximal-volume bound.
pub fn hadamard_upper_bound(a: &HermitianMatrix, i: &IndexSet, k: usize) -> Result<f64> {
    if i.card() != k {
        return Err(Error::CardinalityMismatch {
            set_size: i.card(),
            k,
        });
    }
    if k == 0 {
        return Err(Error::EmptyIndexSet);
    }
    let core = a.principal_submatrix(i)?;
    let dec = core.eig()?;
    let det: f64 = dec.eigenvalues.iter().product();
    if det.abs() <= rank_tolerance(&dec.eigenvalues) {
        return Err(Error::SingularCore { det: det.abs() });
    }
    let mut diag = a.diag();
    diag.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let top_product: f64 = diag.iter().take(k).product();
    let sigma = singular_values(a.as_matrix())?;
    let sigma_k1 = if k < a.dim() { sigma[k] } else { 0.0 };
    Ok(top_product / det.abs() * (k as f64 + 1.0) * sigma_k1)
}
