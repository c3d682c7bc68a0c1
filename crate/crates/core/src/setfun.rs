//! The set-function engine: w(I) = tr f(A[I]) over the subset lattice, the
//! modularity defect delta, exhaustive classification with witnesses, and the
//! covering-pair monotonicity check.
//!
//! Delta is always evaluated in a canonical argument order (smaller bitmask
//! first) so that delta(I, J) == delta(J, I) bit for bit and nested pairs
//! cancel to exactly zero.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::indexset::IndexSet;
use crate::specfun::{trace_of_spectrum, ExtendedReal, SpectralFunction};

/// Exhaustive pair classification scans 4^m pairs; this cap keeps it sane.
pub const MAX_CLASSIFY_DIM: usize = 14;
/// The covering-pair monotonicity check walks all 2^m subsets.
pub const MAX_MONOTONE_DIM: usize = 20;
/// Default tolerance coefficient: 1e-9 * max(1, |w|_max).
pub const DEFAULT_TOL_COEFF: f64 = 1e-9;
/// At most this many extreme witnesses are kept per violated direction.
pub const MAX_WITNESSES: usize = 16;

/// Eigenvalues of every principal submatrix, indexed by subset bitmask.
/// Computing them once lets many spectral functions be classified against
/// the same matrix without repeating eigendecompositions.
#[derive(Clone, Debug)]
pub struct SubsetSpectra {
    dim: usize,
    spectra: Vec<Vec<f64>>,
}

impl SubsetSpectra {
    pub fn compute(a: &HermitianMatrix) -> Result<Self> {
        let dim = a.dim();
        if dim > MAX_CLASSIFY_DIM {
            return Err(Error::DimensionTooLarge {
                dim,
                max: MAX_CLASSIFY_DIM,
            });
        }
        let spectra: Vec<Vec<f64>> = (0u64..(1 << dim))
            .into_par_iter()
            .map(|mask| {
                let set = IndexSet::from_mask(dim, mask).expect("mask in range");
                let sub = a.principal_submatrix(&set)?;
                Ok(sub.eig()?.eigenvalues)
            })
            .collect::<Result<_>>()?;
        Ok(Self { dim, spectra })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spectrum(&self, set: &IndexSet) -> &[f64] {
        &self.spectra[set.mask() as usize]
    }

    /// The full table of w(I) = tr f(A[I]) for one spectral function.
    pub fn traces(&self, f: &SpectralFunction) -> Result<SubsetTable> {
        let values = self
            .spectra
            .iter()
            .map(|eigs| trace_of_spectrum(eigs, f))
            .collect::<Result<Vec<_>>>()?;
        Ok(SubsetTable {
            dim: self.dim,
            values,
        })
    }
}

/// Values of a set function over all 2^dim subsets, indexed by bitmask.
#[derive(Clone, Debug)]
pub struct SubsetTable {
    dim: usize,
    values: Vec<ExtendedReal>,
}

impl SubsetTable {
    pub fn new(dim: usize, values: Vec<ExtendedReal>) -> Self {
        assert_eq!(values.len(), 1usize << dim);
        Self { dim, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, set: &IndexSet) -> ExtendedReal {
        self.values[set.mask() as usize]
    }

    /// Largest finite |w(I)|; the scale behind the default tolerance.
    pub fn max_abs_finite(&self) -> f64 {
        self.values
            .iter()
            .filter_map(|v| v.as_f64())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn default_tolerance(&self) -> f64 {
        DEFAULT_TOL_COEFF * self.max_abs_finite().max(1.0)
    }

    fn delta_masks(&self, i: u64, j: u64) -> Result<ExtendedReal> {
        let (p, q) = if i <= j { (i, j) } else { (j, i) };
        let wp = self.values[p as usize];
        let wq = self.values[q as usize];
        let w_meet = self.values[(p & q) as usize];
        let w_join = self.values[(p | q) as usize];
        // (w(P) - w(P&Q)) + (w(Q) - w(P|Q)): cancels exactly on nested pairs.
        wp.checked_sub(w_meet)?.checked_add(wq.checked_sub(w_join)?)
    }

    pub fn delta(&self, i: &IndexSet, j: &IndexSet) -> Result<ExtendedReal> {
        assert_eq!(i.dim(), self.dim);
        assert_eq!(j.dim(), self.dim);
        self.delta_masks(i.mask(), j.mask())
    }
}

/// w(I) = tr f(A[I]); zero on the empty set by convention.
pub fn spectral_trace(
    a: &HermitianMatrix,
    f: &SpectralFunction,
    i: &IndexSet,
) -> Result<ExtendedReal> {
    let sub = a.principal_submatrix(i)?;
    if sub.dim() == 0 {
        return Ok(ExtendedReal::Finite(0.0));
    }
    trace_of_spectrum(&sub.eig()?.eigenvalues, f)
}

/// The modularity defect w(I) + w(J) - w(I u J) - w(I n J).
pub fn delta(
    a: &HermitianMatrix,
    f: &SpectralFunction,
    i: &IndexSet,
    j: &IndexSet,
) -> Result<ExtendedReal> {
    let (p, q) = if i.mask() <= j.mask() { (i, j) } else { (j, i) };
    let wp = spectral_trace(a, f, p)?;
    let wq = spectral_trace(a, f, q)?;
    let w_meet = spectral_trace(a, f, &p.intersection(q))?;
    let w_join = spectral_trace(a, f, &p.union(q))?;
    wp.checked_sub(w_meet)?.checked_add(wq.checked_sub(w_join)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Submodular,
    Supermodular,
    Modular,
    Neither,
}

/// A pair where one modularity direction fails, with the defect value.
#[derive(Clone, Debug, Serialize)]
pub struct PairWitness {
    pub i: IndexSet,
    pub j: IndexSet,
    pub delta: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModularityReport {
    pub verdict: Verdict,
    pub min_delta: f64,
    pub max_delta: f64,
    pub tolerance: f64,
    pub pairs_scanned: u64,
    /// Pairs skipped because some lattice point had a non-finite trace.
    pub pairs_skipped: u64,
    /// Pairs with delta < -tol, most extreme first.
    pub submodularity_violations: Vec<PairWitness>,
    /// Pairs with delta > +tol, most extreme first.
    pub supermodularity_violations: Vec<PairWitness>,
}

impl ModularityReport {
    pub fn satisfies_submodular(&self) -> bool {
        matches!(self.verdict, Verdict::Submodular | Verdict::Modular)
    }

    pub fn satisfies_supermodular(&self) -> bool {
        matches!(self.verdict, Verdict::Supermodular | Verdict::Modular)
    }
}

/// Witness list bounded to the most extreme entries, ordered by |delta|
/// descending and then lexicographically on the pair of bitmasks.
struct TopWitnesses {
    items: Vec<PairWitness>,
}

impl TopWitnesses {
    fn new() -> Self {
        Self { items: Vec::new() }
    }

    fn offer(&mut self, w: PairWitness) {
        let key = |x: &PairWitness| {
            (
                std::cmp::Reverse(ordered(x.delta.abs())),
                x.i.mask(),
                x.j.mask(),
            )
        };
        let pos = self
            .items
            .binary_search_by(|probe| key(probe).cmp(&key(&w)))
            .unwrap_or_else(|p| p);
        if pos < MAX_WITNESSES {
            self.items.insert(pos, w);
            self.items.truncate(MAX_WITNESSES);
        }
    }
}

fn ordered(x: f64) -> u64 {
    // total order on nonnegative finite floats
    x.to_bits()
}

/// Classify a precomputed set-function table by scanning every unordered
/// pair of subsets in lexicographic bitmask order.
pub fn classify_table(w: &SubsetTable, tol: Option<f64>) -> ModularityReport {
    let tol = tol.unwrap_or_else(|| w.default_tolerance());
    let n_masks = 1u64 << w.dim;
    let mut min_delta = 0.0f64;
    let mut max_delta = 0.0f64;
    let mut scanned = 0u64;
    let mut skipped = 0u64;
    let mut sub_viol = TopWitnesses::new();
    let mut super_viol = TopWitnesses::new();

    for i in 0..n_masks {
        for j in i..n_masks {
            scanned += 1;
            let d = match w.delta_masks(i, j) {
                Ok(ExtendedReal::Finite(d)) => d,
                _ => {
                    skipped += 1;
                    continue;
                }
            };
            min_delta = min_delta.min(d);
            max_delta = max_delta.max(d);
            if d < -tol {
                sub_viol.offer(PairWitness {
                    i: IndexSet::from_mask(w.dim, i).unwrap(),
                    j: IndexSet::from_mask(w.dim, j).unwrap(),
                    delta: d,
                });
            } else if d > tol {
                super_viol.offer(PairWitness {
                    i: IndexSet::from_mask(w.dim, i).unwrap(),
                    j: IndexSet::from_mask(w.dim, j).unwrap(),
                    delta: d,
                });
            }
        }
    }

    let submodular = min_delta >= -tol;
    let supermodular = max_delta <= tol;
    let verdict = match (submodular, supermodular) {
        (true, true) => Verdict::Modular,
        (true, false) => Verdict::Submodular,
        (false, true) => Verdict::Supermodular,
        (false, false) => Verdict::Neither,
    };
    ModularityReport {
        verdict,
        min_delta,
        max_delta,
        tolerance: tol,
        pairs_scanned: scanned,
        pairs_skipped: skipped,
        submodularity_violations: sub_viol.items,
        supermodularity_violations: super_viol.items,
    }
}

/// Exhaustive modularity classification of I -> tr f(A[I]).
///
/// `tol = None` uses the scale-aware default 1e-9 * max(1, |w|_max). Pairs
/// where any of the four lattice points is non-finite are skipped and
/// counted in the report.
pub fn classify_modularity(
    a: &HermitianMatrix,
    f: &SpectralFunction,
    tol: Option<f64>,
) -> Result<ModularityReport> {
    if let Some(t) = tol {
        if t < 0.0 {
            return Err(Error::InvalidParameter {
                detail: format!("tolerance must be nonnegative, got {t}"),
            });
        }
    }
    let spectra = SubsetSpectra::compute(a)?;
    let w = spectra.traces(f)?;
    Ok(classify_table(&w, tol))
}

/// First covering pair violating w(I) <= w(I u {i}) + tol, if any.
#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub nondecreasing: bool,
    pub witness: Option<(IndexSet, usize)>,
    pub tolerance: f64,
}

/// Covering pairs suffice: w is nondecreasing iff w(I) <= w(I u {i}) for all
/// I and i outside I. The first violator in (bitmask, index) order is
/// returned.
pub fn is_nondecreasing(
    a: &HermitianMatrix,
    f: &SpectralFunction,
    tol: Option<f64>,
) -> Result<MonotonicityReport> {
    let dim = a.dim();
    if dim > MAX_MONOTONE_DIM {
        return Err(Error::DimensionTooLarge {
            dim,
            max: MAX_MONOTONE_DIM,
        });
    }
    let values: Vec<ExtendedReal> = (0u64..(1 << dim))
        .into_par_iter()
        .map(|mask| {
            let set = IndexSet::from_mask(dim, mask).expect("mask in range");
            spectral_trace(a, f, &set)
        })
        .collect::<Result<_>>()?;
    let table = SubsetTable::new(dim, values);
    let tol = tol.unwrap_or_else(|| table.default_tolerance());
    for mask in 0u64..(1 << dim) {
        for i in 0..dim {
            if mask >> i & 1 == 1 {
                continue;
            }
            let lo = table.values[mask as usize];
            let hi = table.values[(mask | 1 << i) as usize];
            if !lo.le_with_tol(&hi, tol) {
                return Ok(MonotonicityReport {
                    nondecreasing: false,
                    witness: Some((IndexSet::from_mask(dim, mask).unwrap(), i)),
                    tolerance: tol,
                });
            }
        }
    }
    Ok(MonotonicityReport {
        nondecreasing: true,
        witness: None,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::dense::{C64, CMatrix};

    fn example_matrix() -> HermitianMatrix {
        HermitianMatrix::from_real_rows(&[
            &[5.0, -12.0, 9.0],
            &[-12.0, 33.0, -24.0],
            &[9.0, -24.0, 19.0],
        ])
        .unwrap()
    }

    fn random_psd(m: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
        let g = CMatrix::from_fn(m, m, |_, _| {
            C64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
        });
        HermitianMatrix::symmetrize(&g * &g.adjoint())
    }

    #[test]
    fn spectral_trace_examples() {
        let a = example_matrix();
        // oracle: trace of the inverse of a 2x2 [[a,b],[b,d]] is (a+d)/(ad-b^2)
        let oracle: f64 = (5.0 + 33.0) / (5.0 * 33.0 - 144.0);
        assert!((oracle - 38.0 / 21.0).abs() < 1e-15);
        let i = IndexSet::from_indices(3, &[0, 1]).unwrap();
        let t = spectral_trace(&a, &SpectralFunction::Power(-1.0), &i)
            .unwrap()
            .as_f64()
            .unwrap();
        assert!((t - 38.0 / 21.0).abs() < 1e-10, "t = {t}");

        let empty = IndexSet::empty(3);
        assert_eq!(
            spectral_trace(&a, &SpectralFunction::Log, &empty).unwrap(),
            ExtendedReal::Finite(0.0)
        );

        let id = HermitianMatrix::identity(6);
        let s = IndexSet::from_indices(6, &[1, 3, 4]).unwrap();
        assert_eq!(
            spectral_trace(&id, &SpectralFunction::Power(2.5), &s).unwrap(),
            ExtendedReal::Finite(3.0)
        );
    }

    #[test]
    fn delta_reproduces_the_inverse_power_counterexample() {
        let a = example_matrix();
        let i = IndexSet::from_indices(3, &[0, 1]).unwrap();
        let j = IndexSet::from_indices(3, &[0, 2]).unwrap();
        let d = delta(&a, &SpectralFunction::Power(-1.0), &i, &j)
            .unwrap()
            .as_f64()
            .unwrap();
        assert!((d - 16.0 / 35.0).abs() < 1e-10, "delta = {d}");
    }

    #[test]
    fn delta_of_operator_convex_example() {
        let a = HermitianMatrix::from_real_rows(&[
            &[1.0, -2.0, -2.0],
            &[-2.0, 6.0, 4.0],
            &[-2.0, 4.0, 8.0],
        ])
        .unwrap();
        let f = SpectralFunction::custom("t^2/(1+t)", -0.999, f64::INFINITY, |t| {
            t * t / (1.0 + t)
        });
        let i = IndexSet::from_indices(3, &[0, 1]).unwrap();
        let j = IndexSet::from_indices(3, &[0, 2]).unwrap();
        let d = delta(&a, &f, &i, &j).unwrap().as_f64().unwrap();
        assert!((d - 44.0 / 1085.0).abs() < 1e-10, "delta = {d}");
    }

    #[test]
    fn delta_degeneracies_are_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let m = 2 + rng.gen::<usize>() % 5; // up to 6
            let a = random_psd(m, &mut rng);
            let spectra = SubsetSpectra::compute(&a).unwrap();
            let w = spectra.traces(&SpectralFunction::Power(1.5)).unwrap();
            for i in IndexSet::all(m) {
                for j in IndexSet::all(m) {
                    let dij = w.delta(&i, &j).unwrap();
                    let dji = w.delta(&j, &i).unwrap();
                    assert_eq!(dij, dji, "antisymmetry must be exact");
                    if i.is_subset_of(&j) || j.is_subset_of(&i) {
                        assert_eq!(dij, ExtendedReal::Finite(0.0), "nested pairs cancel");
                    }
                }
            }
        }
    }

    #[test]
    fn classification_regimes_on_random_psd() {
        // one shared spectra table per sample serves every function
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for m in 3..=6usize {
            for _ in 0..200 {
                let a = random_psd(m, &mut rng);
                let spectra = SubsetSpectra::compute(&a).unwrap();
                for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
                    let w = spectra.traces(&SpectralFunction::Power(p)).unwrap();
                    let rep = classify_table(&w, None);
                    assert!(rep.satisfies_submodular(), "p = {p}, m = {m}: {rep:?}");
                }
                for p in [1.25, 1.5, 1.75, 2.0] {
                    let w = spectra.traces(&SpectralFunction::Power(p)).unwrap();
                    let rep = classify_table(&w, None);
                    assert!(rep.satisfies_supermodular(), "p = {p}, m = {m}: {rep:?}");
                }
                let w = spectra.traces(&SpectralFunction::XLogX).unwrap();
                assert!(classify_table(&w, None).satisfies_supermodular());
            }
        }
    }

    #[test]
    fn log_det_is_submodular_on_positive_definite() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..200 {
            let m = 3 + trial % 4; // sizes 3..=6
            let psd = random_psd(m, &mut rng);
            let shift = 1e-6 * psd.trace() / m as f64;
            let mat = psd.as_matrix() + &CMatrix::identity(m).scale_re(shift.max(1e-9));
            let a = HermitianMatrix::symmetrize(mat);
            let rep = classify_modularity(&a, &SpectralFunction::Log, None).unwrap();
            assert!(rep.satisfies_submodular(), "{rep:?}");
        }
    }

    #[test]
    fn linear_trace_is_modular() {
        let a = example_matrix();
        let rep = classify_modularity(&a, &SpectralFunction::Power(1.0), None).unwrap();
        assert_eq!(rep.verdict, Verdict::Modular);
    }

    #[test]
    fn classify_agrees_with_independent_double_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let m = 2 + rng.gen::<usize>() % 4; // up to 5
            let a = random_psd(m, &mut rng);
            let f = SpectralFunction::Power([0.5, 1.5, 2.0][rng.gen::<usize>() % 3]);
            let rep = classify_modularity(&a, &f, None).unwrap();
            // oracle: four independent traces per pair, no shared caching
            let mut min_d = 0.0f64;
            let mut max_d = 0.0f64;
            for i in IndexSet::all(m) {
                for j in IndexSet::all(m).filter(|j| j.mask() >= i.mask()) {
                    let wi = spectral_trace(&a, &f, &i).unwrap().as_f64().unwrap();
                    let wj = spectral_trace(&a, &f, &j).unwrap().as_f64().unwrap();
                    let wu = spectral_trace(&a, &f, &i.union(&j)).unwrap().as_f64().unwrap();
                    let wn = spectral_trace(&a, &f, &i.intersection(&j))
                        .unwrap()
                        .as_f64()
                        .unwrap();
                    let d = wi + wj - wu - wn;
                    min_d = min_d.min(d);
                    max_d = max_d.max(d);
                }
            }
            let scale = rep.tolerance.max(1e-12);
            assert!((rep.min_delta - min_d).abs() <= scale, "min mismatch");
            assert!((rep.max_delta - max_d).abs() <= scale, "max mismatch");
        }
    }

    #[test]
    fn witnesses_are_reproducible_and_bounded() {
        let a = example_matrix();
        let rep = classify_modularity(&a, &SpectralFunction::Power(-1.0), None).unwrap();
        assert!(!rep.supermodularity_violations.is_empty());
        assert!(rep.supermodularity_violations.len() <= MAX_WITNESSES);
        for w in rep
            .supermodularity_violations
            .iter()
            .chain(&rep.submodularity_violations)
        {
            let again = delta(&a, &SpectralFunction::Power(-1.0), &w.i, &w.j)
                .unwrap()
                .as_f64()
                .unwrap();
            assert!((again - w.delta).abs() <= 1e-12, "witness must re-evaluate");
        }
        // most extreme witness first
        let v = &rep.supermodularity_violations;
        for k in 1..v.len() {
            assert!(v[k - 1].delta.abs() >= v[k].delta.abs());
        }
    }

    #[test]
    fn classification_rejects_oversized_lattices() {
        let a = HermitianMatrix::identity(MAX_CLASSIFY_DIM + 1);
        assert!(matches!(
            classify_modularity(&a, &SpectralFunction::Power(1.0), None),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn indeterminate_sentinel_difference_is_an_error() {
        // log of the singleton {1} and of {0,1} are both -inf, so the
        // defect would be inf - inf
        let a = HermitianMatrix::from_diag(&[1.0, 0.0, 2.0]);
        let i = IndexSet::from_indices(3, &[1]).unwrap();
        let j = IndexSet::from_indices(3, &[0]).unwrap();
        assert!(matches!(
            delta(&a, &SpectralFunction::Log, &i, &j),
            Err(Error::IndeterminateArithmetic)
        ));
    }

    #[test]
    fn pairs_with_sentinels_are_skipped_and_counted() {
        let a = HermitianMatrix::from_diag(&[1.0, 0.0, 2.0]);
        let rep = classify_modularity(&a, &SpectralFunction::Log, None).unwrap();
        assert!(rep.pairs_skipped > 0);
        assert_eq!(
            rep.pairs_scanned,
            (8 * 9) / 2,
            "unordered pairs over 2^3 masks"
        );
    }

    #[test]
    fn monotonicity_check_and_witness() {
        let two_id = HermitianMatrix::from_diag(&[2.0, 2.0, 2.0, 2.0]);
        let rep = is_nondecreasing(&two_id, &SpectralFunction::Log, None).unwrap();
        assert!(rep.nondecreasing);

        let small = HermitianMatrix::from_diag(&[0.1, 0.2]);
        let rep = is_nondecreasing(&small, &SpectralFunction::Log, None).unwrap();
        assert!(!rep.nondecreasing);
        let (set, idx) = rep.witness.unwrap();
        assert!(set.is_empty());
        assert_eq!(idx, 0, "first violator in scan order");

        let oversized = HermitianMatrix::identity(MAX_MONOTONE_DIM + 1);
        assert!(matches!(
            is_nondecreasing(&oversized, &SpectralFunction::Log, None),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn monotone_when_lambda_min_at_least_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let m = 2 + rng.gen::<usize>() % 4;
            let base = random_psd(m, &mut rng);
            let a = HermitianMatrix::symmetrize(base.as_matrix() + &CMatrix::identity(m));
            let rep = is_nondecreasing(&a, &SpectralFunction::Log, None).unwrap();
            assert!(rep.nondecreasing);
        }
    }

    #[test]
    fn midpoint_convexity_of_operator_monotone_primitives() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let m = 2 + rng.gen::<usize>() % 4; // up to 5
            let a = random_psd(m, &mut rng);
            let b = random_psd(m, &mut rng);
            let mid = crate::specfun::midpoint(&a, &b).unwrap();
            for f in [SpectralFunction::Power(1.5), SpectralFunction::Power(2.0)] {
                for i in IndexSet::all(m) {
                    let wm = spectral_trace(&mid, &f, &i).unwrap().as_f64().unwrap();
                    let wa = spectral_trace(&a, &f, &i).unwrap().as_f64().unwrap();
                    let wb = spectral_trace(&b, &f, &i).unwrap().as_f64().unwrap();
                    assert!(wm <= 0.5 * (wa + wb) + 1e-9, "trace is convex in A");
                }
            }
        }
    }
}
