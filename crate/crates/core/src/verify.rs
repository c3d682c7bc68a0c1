//! End-to-end reproduction of the counterexample family, the block trace
//! identities, the power-regime summary table, and the auxiliary
//! inequalities (majorization of disjoint splits, the three-matrix power
//! trace inequality, and midpoint convexity of A -> tr f(A[I])).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dense::{C64, CMatrix};
use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::indexset::IndexSet;
use crate::io::MatrixJson;
use crate::setfun::{classify_table, delta, spectral_trace, SubsetSpectra};
use crate::specfun::{midpoint, ExtendedReal, SpectralFunction};

/// Random ensembles shared by the verification scans and the test suites.
/// All draws are deterministic functions of the supplied RNG.
pub mod ensembles {
    use super::*;
    use rand_distr::StandardNormal;

    fn gaussian(rng: &mut impl Rng) -> f64 {
        rng.sample(StandardNormal)
    }

    pub fn complex_gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| {
            C64::new(gaussian(rng), gaussian(rng)).scale(std::f64::consts::FRAC_1_SQRT_2)
        })
    }

    pub fn random_hermitian(m: usize, rng: &mut impl Rng) -> HermitianMatrix {
        let g = complex_gaussian_matrix(m, m, rng);
        HermitianMatrix::symmetrize(g)
    }

    /// G G* with a standard complex Gaussian G; almost surely positive
    /// definite but treated as PSD.
    pub fn random_psd(m: usize, rng: &mut impl Rng) -> HermitianMatrix {
        let g = complex_gaussian_matrix(m, m, rng);
        HermitianMatrix::symmetrize(&g * &g.adjoint())
    }

    /// PSD draw shifted by eps * Id with eps = 1e-6 * trace / m, for the
    /// checks that need strict positive definiteness.
    pub fn random_pd(m: usize, rng: &mut impl Rng) -> HermitianMatrix {
        let psd = random_psd(m, rng);
        let eps = (1e-6 * psd.trace() / m as f64).max(1e-9);
        HermitianMatrix::symmetrize(psd.as_matrix() + &CMatrix::identity(m).scale_re(eps))
    }

    /// G G* + Id: positive definite with the smallest eigenvalue >= 1.
    pub fn random_pd_min1(m: usize, rng: &mut impl Rng) -> HermitianMatrix {
        let psd = random_psd(m, rng);
        HermitianMatrix::symmetrize(psd.as_matrix() + &CMatrix::identity(m))
    }

    pub fn random_nonnegative(m: usize, rng: &mut impl Rng) -> crate::dense::RMatrix {
        crate::dense::RMatrix::from_fn(m, m, |_, _| rng.gen::<f64>())
    }

    /// Invertible M-matrix s Id - B with uniform B and s a comfortable
    /// multiple of rho(B).
    pub fn random_invertible_mmatrix(m: usize, rng: &mut impl Rng) -> Result<crate::dense::RMatrix> {
        let b = random_nonnegative(m, rng);
        let rho = crate::mmatrix::spectral_radius(&b)?;
        let s = rho.max(1e-3) * (1.15 + 0.85 * rng.gen::<f64>());
        Ok(crate::dense::RMatrix::from_fn(m, m, |i, j| {
            if i == j {
                s - b[(i, j)]
            } else {
                -b[(i, j)]
            }
        }))
    }

    /// Symmetric invertible M-matrix, for series-versus-eigendecomposition
    /// agreement checks.
    pub fn random_symmetric_mmatrix(m: usize, rng: &mut impl Rng) -> Result<crate::dense::RMatrix> {
        let raw = random_nonnegative(m, rng);
        let b = crate::dense::RMatrix::from_fn(m, m, |i, j| 0.5 * (raw[(i, j)] + raw[(j, i)]));
        let rho = crate::mmatrix::spectral_radius(&b)?;
        let s = rho.max(1e-3) * (1.15 + 0.85 * rng.gen::<f64>());
        Ok(crate::dense::RMatrix::from_fn(m, m, |i, j| {
            if i == j {
                s - b[(i, j)]
            } else {
                -b[(i, j)]
            }
        }))
    }

    /// Hermitian matrix with a 3-block structure; `zero_13` clears the
    /// corner blocks.
    pub fn random_block_hermitian(
        sizes: (usize, usize, usize),
        zero_13: bool,
        rng: &mut impl Rng,
    ) -> HermitianMatrix {
        let m = sizes.0 + sizes.1 + sizes.2;
        let g = complex_gaussian_matrix(m, m, rng);
        let mut h = HermitianMatrix::symmetrize(g).into_matrix();
        if zero_13 {
            for i in 0..sizes.0 {
                for j in sizes.0 + sizes.1..m {
                    h[(i, j)] = C64::new(0.0, 0.0);
                    h[(j, i)] = C64::new(0.0, 0.0);
                }
            }
        }
        HermitianMatrix::symmetrize(h)
    }

    /// Random subspace: the span of `dim` complex Gaussian vectors.
    pub fn random_subspace(m: usize, dim: usize, rng: &mut impl Rng) -> crate::subspace::Subspace {
        let vectors: Vec<Vec<C64>> = (0..dim)
            .map(|_| (0..m).map(|_| C64::new(gaussian(rng), gaussian(rng))).collect())
            .collect();
        crate::subspace::Subspace::span(m, &vectors, crate::subspace::ORTHO_TOL)
            .expect("gaussian vectors have the right length")
    }

    /// Pair of subspaces spanned by subsets of one random orthonormal frame
    /// (commuting projectors): the subspace analog of a pair of index sets,
    /// where the guaranteed modularity directions apply. Shared frame
    /// vectors produce nontrivial intersections.
    pub fn random_compatible_pair(
        m: usize,
        rng: &mut impl Rng,
    ) -> (crate::subspace::Subspace, crate::subspace::Subspace) {
        let frame = random_subspace(m, m, rng);
        let pick = |rng: &mut dyn FnMut() -> bool| -> Vec<Vec<C64>> {
            (0..m)
                .filter(|_| rng())
                .map(|j| frame.basis_vector(j))
                .collect()
        };
        let u_vecs = pick(&mut || rng.gen::<bool>());
        let v_vecs = pick(&mut || rng.gen::<bool>());
        let u = crate::subspace::Subspace::span(m, &u_vecs, crate::subspace::ORTHO_TOL).unwrap();
        let v = crate::subspace::Subspace::span(m, &v_vecs, crate::subspace::ORTHO_TOL).unwrap();
        (u, v)
    }
}

/// The fixed 3x3 positive definite matrix whose inverse-power defect is
/// exactly 16/35 on I = {0,1}, J = {0,2}.
pub fn inverse_power_example() -> HermitianMatrix {
    HermitianMatrix::from_real_rows(&[
        &[5.0, -12.0, 9.0],
        &[-12.0, 33.0, -24.0],
        &[9.0, -24.0, 19.0],
    ])
    .expect("symmetric by construction")
}

/// The fixed 3x3 positive definite matrix whose t^2/(1+t) defect is exactly
/// 44/1085 on the same index pair.
pub fn operator_convex_example() -> HermitianMatrix {
    HermitianMatrix::from_real_rows(&[
        &[1.0, -2.0, -2.0],
        &[-2.0, 6.0, 4.0],
        &[-2.0, 4.0, 8.0],
    ])
    .expect("symmetric by construction")
}

/// The operator convex (but not primitive-of-monotone) test function
/// t^2 / (1 + t).
pub fn operator_convex_function() -> SpectralFunction {
    SpectralFunction::custom("t^2/(1+t)", -0.999, f64::INFINITY, |t| t * t / (1.0 + t))
}

/// e1 e3* + e3 e1*: the corner-block matrix behind the quadratic identity.
pub fn corner_block_example() -> HermitianMatrix {
    HermitianMatrix::from_real_rows(&[
        &[0.0, 0.0, 1.0],
        &[0.0, 0.0, 0.0],
        &[1.0, 0.0, 0.0],
    ])
    .expect("symmetric by construction")
}

/// Tridiagonal block matrix with scalar off blocks b12 and b23.
pub fn tridiagonal_block_example(b12: f64, b23: f64) -> HermitianMatrix {
    HermitianMatrix::from_real_rows(&[
        &[0.0, b12, 0.0],
        &[b12, 0.0, b23],
        &[0.0, b23, 0.0],
    ])
    .expect("symmetric by construction")
}

/// Index sets I = L1 u L2, J = L2 u L3 for a 3-block partition.
pub fn block_index_pair(sizes: (usize, usize, usize)) -> (IndexSet, IndexSet) {
    let m = sizes.0 + sizes.1 + sizes.2;
    let i: Vec<usize> = (0..sizes.0 + sizes.1).collect();
    let j: Vec<usize> = (sizes.0..m).collect();
    (
        IndexSet::from_indices(m, &i).expect("in range"),
        IndexSet::from_indices(m, &j).expect("in range"),
    )
}

/// tr(B13 B13*) for the 3-block partition.
fn corner_block_weight(a: &HermitianMatrix, sizes: (usize, usize, usize)) -> f64 {
    let m = sizes.0 + sizes.1 + sizes.2;
    let mut acc = 0.0;
    for i in 0..sizes.0 {
        for j in sizes.0 + sizes.1..m {
            acc += a.entry(i, j).norm_sqr();
        }
    }
    acc
}

/// tr(B12* B12 B23 B23*) for the 3-block partition.
fn chain_block_weight(a: &HermitianMatrix, sizes: (usize, usize, usize)) -> f64 {
    let (n1, n2, n3) = sizes;
    let b12 = CMatrix::from_fn(n1, n2, |i, j| a.entry(i, n1 + j));
    let b23 = CMatrix::from_fn(n2, n3, |i, j| a.entry(n1 + i, n1 + n2 + j));
    let left = &b12.adjoint() * &b12;
    let right = &b23 * &b23.adjoint();
    (&left * &right).trace().re
}

#[derive(Clone, Debug, Serialize)]
pub struct ExampleCheck {
    pub name: String,
    pub expected: f64,
    pub computed: f64,
    pub abs_error: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExamplesReport {
    pub checks: Vec<ExampleCheck>,
    pub all_pass: bool,
}

const EXAMPLE_TOL: f64 = 1e-10;

/// Recomputes every fixed counterexample value through the public set
/// function path and compares against the exact rationals.
pub fn run_reference_examples() -> Result<ExamplesReport> {
    let mut checks = Vec::new();
    let mut push = |name: &str, expected: f64, computed: f64| {
        let abs_error = (computed - expected).abs();
        checks.push(ExampleCheck {
            name: name.to_string(),
            expected,
            computed,
            abs_error,
            pass: abs_error <= EXAMPLE_TOL,
        });
    };

    let i = IndexSet::from_indices(3, &[0, 1])?;
    let j = IndexSet::from_indices(3, &[0, 2])?;
    let d = delta(
        &inverse_power_example(),
        &SpectralFunction::Power(-1.0),
        &i,
        &j,
    )?
    .expect_finite("inverse power defect")?;
    push("delta(t^-1) on the inverse-power example", 16.0 / 35.0, d);

    let d = delta(&operator_convex_example(), &operator_convex_function(), &i, &j)?
        .expect_finite("operator convex defect")?;
    push("delta(t^2/(1+t)) on the operator-convex example", 44.0 / 1085.0, d);

    let (bi, bj) = block_index_pair((1, 1, 1));
    let corner = corner_block_example();
    let d = delta(&corner, &SpectralFunction::Power(2.0), &bi, &bj)?
        .expect_finite("quadratic block defect")?;
    push("delta(t^2) on the corner-block example", -2.0, d);

    let tri = tridiagonal_block_example(1.0, 2.0);
    let d3 = delta(&tri, &SpectralFunction::Power(3.0), &bi, &bj)?
        .expect_finite("cubic block defect")?;
    push("delta(t^3) on the tridiagonal example", 0.0, d3);
    let d4 = delta(&tri, &SpectralFunction::Power(4.0), &bi, &bj)?
        .expect_finite("quartic block defect")?;
    push(
        "delta(t^4) on the tridiagonal example",
        -4.0 * chain_block_weight(&tri, (1, 1, 1)),
        d4,
    );

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(ExamplesReport { checks, all_pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockIdentityReport {
    pub samples: usize,
    pub max_quadratic_error: f64,
    pub max_cubic_error: f64,
    pub max_quartic_error: f64,
    pub all_pass: bool,
}

/// On random hermitian block matrices: delta(t^2) = -2 tr(B13 B13*), and
/// with the corner blocks cleared, delta(t^3) = 0 and delta(t^4) =
/// -4 tr(B12* B12 B23 B23*), each to 1e-9 relative.
pub fn block_identities_check(samples: usize, seed: u64) -> Result<BlockIdentityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_q = 0.0f64;
    let mut max_c = 0.0f64;
    let mut max_4 = 0.0f64;
    for _ in 0..samples {
        let sizes = (
            1 + rng.gen::<usize>() % 2,
            1 + rng.gen::<usize>() % 2,
            1 + rng.gen::<usize>() % 2,
        );
        let (i, j) = block_index_pair(sizes);

        let b = ensembles::random_block_hermitian(sizes, false, &mut rng);
        let d2 = delta(&b, &SpectralFunction::Power(2.0), &i, &j)?.expect_finite("t^2 defect")?;
        let rhs = -2.0 * corner_block_weight(&b, sizes);
        max_q = max_q.max((d2 - rhs).abs() / rhs.abs().max(1.0));

        let b0 = ensembles::random_block_hermitian(sizes, true, &mut rng);
        let d3 = delta(&b0, &SpectralFunction::Power(3.0), &i, &j)?.expect_finite("t^3 defect")?;
        max_c = max_c.max(d3.abs() / b0.max_abs().powi(3).max(1.0));
        let d4 = delta(&b0, &SpectralFunction::Power(4.0), &i, &j)?.expect_finite("t^4 defect")?;
        let rhs4 = -4.0 * chain_block_weight(&b0, sizes);
        max_4 = max_4.max((d4 - rhs4).abs() / rhs4.abs().max(1.0));
    }
    let all_pass = max_q <= 1e-9 && max_c <= 1e-9 && max_4 <= 1e-9;
    Ok(BlockIdentityReport {
        samples,
        max_quadratic_error: max_q,
        max_cubic_error: max_c,
        max_quartic_error: max_4,
        all_pass,
    })
}

/// Power regimes with strict counterexample constructions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterexampleRegime {
    /// p = 2 with a nonzero corner block: strictly negative defect.
    NearTwo,
    /// p in (2,3): strictly positive defect from the tridiagonal family.
    TwoThree,
    /// p > 3: strictly negative defect from the tridiagonal family.
    AboveThree,
    /// p < 0: strictly negative defect from the tridiagonal family.
    Negative,
}

impl CounterexampleRegime {
    fn label(&self) -> &'static str {
        match self {
            CounterexampleRegime::NearTwo => "p=2",
            CounterexampleRegime::TwoThree => "2<p<3",
            CounterexampleRegime::AboveThree => "p>3",
            CounterexampleRegime::Negative => "p<0",
        }
    }

    fn exponent(&self) -> f64 {
        match self {
            CounterexampleRegime::NearTwo => 2.0,
            CounterexampleRegime::TwoThree => 2.5,
            CounterexampleRegime::AboveThree => 4.0,
            CounterexampleRegime::Negative => -1.0,
        }
    }

    fn wants_positive(&self) -> bool {
        matches!(self, CounterexampleRegime::TwoThree)
    }
}

/// A concrete matrix, index pair and exponent with a strictly signed defect.
#[derive(Clone, Debug, Serialize)]
pub struct BlockWitness {
    pub matrix: MatrixJson,
    pub i: IndexSet,
    pub j: IndexSet,
    pub p: f64,
    pub delta: f64,
    pub tolerance: f64,
}

impl BlockWitness {
    pub fn matrix_hermitian(&self) -> Result<HermitianMatrix> {
        HermitianMatrix::new(self.matrix.to_matrix("witness")?)
    }
}

fn defect_scale(a: &HermitianMatrix, p: f64, i: &IndexSet, j: &IndexSet) -> Result<f64> {
    let f = SpectralFunction::Power(p);
    let mut scale = 1.0f64;
    for set in [*i, *j, i.union(j), i.intersection(j)] {
        if let ExtendedReal::Finite(w) = spectral_trace(a, &f, &set)? {
            scale = scale.max(w.abs());
        }
    }
    Ok(crate::setfun::DEFAULT_TOL_COEFF * scale)
}

/// Searches Id + s B over a descending grid of s for a defect of the
/// regime's sign with |delta| > 10 tol, starting from canonical blocks and
/// only then trying random ones.
pub fn construct_block_counterexample(
    regime: CounterexampleRegime,
    m: usize,
    seed: u64,
) -> Result<BlockWitness> {
    if m < 3 {
        return Err(Error::InvalidParameter {
            detail: format!("block counterexamples need m >= 3, got {m}"),
        });
    }
    let p = regime.exponent();
    let sizes = (1usize, m - 2, 1usize);
    let (i, j) = block_index_pair(sizes);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let canonical = |which: usize| -> CMatrix {
        let mut b = CMatrix::zeros(m, m);
        match regime {
            CounterexampleRegime::NearTwo => {
                b[(0, m - 1)] = C64::new(1.0, 0.0);
                b[(m - 1, 0)] = C64::new(1.0, 0.0);
            }
            _ => {
                for k in 1..m - 1 {
                    b[(0, k)] = C64::new(1.0, 0.0);
                    b[(k, 0)] = C64::new(1.0, 0.0);
                    b[(k, m - 1)] = C64::new(1.0 + which as f64, 0.0);
                    b[(m - 1, k)] = C64::new(1.0 + which as f64, 0.0);
                }
            }
        }
        b
    };

    let mut candidates: Vec<CMatrix> = vec![canonical(0), canonical(1)];
    for _ in 0..8 {
        let zero_13 = regime != CounterexampleRegime::NearTwo;
        candidates.push(
            ensembles::random_block_hermitian(sizes, zero_13, &mut rng)
                .as_matrix()
                .clone(),
        );
    }

    for b in &candidates {
        let mut s = 0.5f64;
        for _ in 0..20 {
            let a = HermitianMatrix::symmetrize(&CMatrix::identity(m) + &b.scale_re(s));
            // positive definiteness keeps every power regime in domain
            let lambda_min = *a.eig()?.eigenvalues.last().expect("nonempty");
            if lambda_min > 1e-6 {
                let tol = defect_scale(&a, p, &i, &j)?;
                let d = delta(&a, &SpectralFunction::Power(p), &i, &j)?
                    .expect_finite("counterexample defect")?;
                let strict = d.abs() > 10.0 * tol;
                let signed = if regime.wants_positive() { d > 0.0 } else { d < 0.0 };
                if strict && signed {
                    return Ok(BlockWitness {
                        matrix: MatrixJson::from_matrix(a.as_matrix()),
                        i,
                        j,
                        p,
                        delta: d,
                        tolerance: tol,
                    });
                }
            }
            s *= 0.5;
        }
    }
    Err(Error::SearchExhausted {
        regime: regime.label().to_string(),
        m,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeClaim {
    Submodular,
    Supermodular,
    Modular,
    MayViolateSub,
    MayViolateSuper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeStatus {
    /// A guaranteed inequality held over every sample.
    Reproduced,
    /// A strict violation witness was constructed and stored.
    WitnessFound,
    /// No proof backs the claim; the samples simply never violated it.
    ConjecturalTested,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RegimeEvidence {
    Witness(BlockWitness),
    Samples {
        samples: usize,
        sizes: Vec<usize>,
        p_values: Vec<f64>,
        min_delta: f64,
        max_delta: f64,
        violations: usize,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct RegimeRow {
    pub p_range: String,
    pub m_constraint: String,
    pub claim: RegimeClaim,
    pub status: RegimeStatus,
    pub evidence: RegimeEvidence,
}

/// One (m, p) aggregate for external plotting.
#[derive(Clone, Debug, Serialize)]
pub struct ScanRecord {
    pub row: String,
    pub m: usize,
    pub p: f64,
    pub samples: usize,
    pub min_delta: f64,
    pub max_delta: f64,
    pub violations: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Table1Scan {
    pub rows: Vec<RegimeRow>,
    pub detail: Vec<ScanRecord>,
}

struct RegimeScan {
    min_delta: f64,
    max_delta: f64,
    violations: usize,
    records: Vec<ScanRecord>,
}

/// Per-sample classification data: (p, min delta, max delta, violated).
type SampleScan = Vec<(f64, f64, f64, usize)>;

/// Scans `samples` random matrices per size, classifying each against every
/// p in the grid using one shared subset-spectra table per sample.
fn scan_power_regime(
    row: &str,
    sizes: &[usize],
    p_values: &[f64],
    samples: usize,
    positive_definite: bool,
    submodular_claim: bool,
    seed: u64,
) -> Result<RegimeScan> {
    let mut records = Vec::new();
    let mut min_delta = 0.0f64;
    let mut max_delta = 0.0f64;
    let mut violations = 0usize;
    for &m in sizes {
        let per_sample: Vec<Result<SampleScan>> = (0..samples)
            .into_par_iter()
            .map(|idx| {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(seed ^ (m as u64) << 32 ^ idx as u64);
                let a = if positive_definite {
                    ensembles::random_pd(m, &mut rng)
                } else {
                    ensembles::random_psd(m, &mut rng)
                };
                let spectra = SubsetSpectra::compute(&a)?;
                let mut out = Vec::with_capacity(p_values.len());
                for &p in p_values {
                    let w = spectra.traces(&SpectralFunction::Power(p))?;
                    let rep = classify_table(&w, None);
                    let violated = if submodular_claim {
                        !rep.satisfies_submodular()
                    } else {
                        !rep.satisfies_supermodular()
                    };
                    out.push((p, rep.min_delta, rep.max_delta, violated as usize));
                }
                Ok(out)
            })
            .collect();
        for &p in p_values {
            let mut rec = ScanRecord {
                row: row.to_string(),
                m,
                p,
                samples,
                min_delta: 0.0,
                max_delta: 0.0,
                violations: 0,
            };
            for sample in &per_sample {
                let sample = match sample {
                    Ok(s) => s,
                    Err(e) => {
                        return Err(Error::RegimeFailure {
                            detail: format!("row `{row}` m={m}: {e}"),
                        })
                    }
                };
                let &(_, lo, hi, viol) = sample
                    .iter()
                    .find(|(pp, ..)| *pp == p)
                    .expect("every p is scanned");
                rec.min_delta = rec.min_delta.min(lo);
                rec.max_delta = rec.max_delta.max(hi);
                rec.violations += viol;
            }
            min_delta = min_delta.min(rec.min_delta);
            max_delta = max_delta.max(rec.max_delta);
            violations += rec.violations;
            records.push(rec);
        }
    }
    Ok(RegimeScan {
        min_delta,
        max_delta,
        violations,
        records,
    })
}

/// Reproduces the full power-regime summary: the two guaranteed ranges over
/// random PSD matrices of sizes 2..=6, a strict stored witness for every
/// "may violate" row, and the two proof-omitted m = 2 rows checked
/// empirically and flagged conjectural.
///
/// A guaranteed row with any violation, or a witness row whose construction
/// fails, is an error.
pub fn table1_scan(samples: usize, seed: u64) -> Result<Table1Scan> {
    if samples == 0 {
        return Err(Error::InvalidParameter {
            detail: "samples must be at least 1".to_string(),
        });
    }
    let mut rows = Vec::new();
    let mut detail = Vec::new();
    let sizes: Vec<usize> = (2..=6).collect();

    // p = -1, m >= 3: the fixed inverse-power example is a strict positive
    // defect, so supermodularity can fail.
    {
        let a = inverse_power_example();
        let i = IndexSet::from_indices(3, &[0, 1])?;
        let j = IndexSet::from_indices(3, &[0, 2])?;
        let d = delta(&a, &SpectralFunction::Power(-1.0), &i, &j)?
            .expect_finite("fixed witness defect")?;
        let tol = defect_scale(&a, -1.0, &i, &j)?;
        if d <= 10.0 * tol {
            return Err(Error::RegimeFailure {
                detail: "fixed inverse-power witness lost strictness".to_string(),
            });
        }
        rows.push(RegimeRow {
            p_range: "p = -1".to_string(),
            m_constraint: "m >= 3".to_string(),
            claim: RegimeClaim::MayViolateSuper,
            status: RegimeStatus::WitnessFound,
            evidence: RegimeEvidence::Witness(BlockWitness {
                matrix: MatrixJson::from_matrix(a.as_matrix()),
                i,
                j,
                p: -1.0,
                delta: d,
                tolerance: tol,
            }),
        });
    }

    // p < 0, m >= 3: constructed strict submodularity violation.
    let w = construct_block_counterexample(CounterexampleRegime::Negative, 3, seed)?;
    rows.push(RegimeRow {
        p_range: "p < 0".to_string(),
        m_constraint: "m >= 3".to_string(),
        claim: RegimeClaim::MayViolateSub,
        status: RegimeStatus::WitnessFound,
        evidence: RegimeEvidence::Witness(w),
    });

    // p < 0, m = 2: claimed supermodular, proof omitted.
    {
        let scan = scan_power_regime(
            "p<0,m=2",
            &[2],
            &[-2.0, -1.0, -0.5],
            samples,
            true,
            false,
            seed.wrapping_add(1),
        )?;
        detail.extend(scan.records.iter().cloned());
        rows.push(RegimeRow {
            p_range: "p < 0".to_string(),
            m_constraint: "m = 2".to_string(),
            claim: RegimeClaim::Supermodular,
            status: RegimeStatus::ConjecturalTested,
            evidence: RegimeEvidence::Samples {
                samples,
                sizes: vec![2],
                p_values: vec![-2.0, -1.0, -0.5],
                min_delta: scan.min_delta,
                max_delta: scan.max_delta,
                violations: scan.violations,
            },
        });
    }

    // 0 <= p <= 1: guaranteed submodular.
    {
        let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
        let scan = scan_power_regime(
            "0<=p<=1",
            &sizes,
            &grid,
            samples,
            false,
            true,
            seed.wrapping_add(2),
        )?;
        if scan.violations > 0 {
            return Err(Error::RegimeFailure {
                detail: format!(
                    "guaranteed submodular range failed {} time(s); min delta {}",
                    scan.violations, scan.min_delta
                ),
            });
        }
        detail.extend(scan.records.iter().cloned());
        rows.push(RegimeRow {
            p_range: "0 <= p <= 1".to_string(),
            m_constraint: "any m".to_string(),
            claim: RegimeClaim::Submodular,
            status: RegimeStatus::Reproduced,
            evidence: RegimeEvidence::Samples {
                samples,
                sizes: sizes.clone(),
                p_values: grid.to_vec(),
                min_delta: scan.min_delta,
                max_delta: scan.max_delta,
                violations: 0,
            },
        });
    }

    // 1 <= p <= 2: guaranteed supermodular.
    {
        let grid = [1.0, 1.25, 1.5, 1.75, 2.0];
        let scan = scan_power_regime(
            "1<=p<=2",
            &sizes,
            &grid,
            samples,
            false,
            false,
            seed.wrapping_add(3),
        )?;
        if scan.violations > 0 {
            return Err(Error::RegimeFailure {
                detail: format!(
                    "guaranteed supermodular range failed {} time(s); max delta {}",
                    scan.violations, scan.max_delta
                ),
            });
        }
        detail.extend(scan.records.iter().cloned());
        rows.push(RegimeRow {
            p_range: "1 <= p <= 2".to_string(),
            m_constraint: "any m".to_string(),
            claim: RegimeClaim::Supermodular,
            status: RegimeStatus::Reproduced,
            evidence: RegimeEvidence::Samples {
                samples,
                sizes: sizes.clone(),
                p_values: grid.to_vec(),
                min_delta: scan.min_delta,
                max_delta: scan.max_delta,
                violations: 0,
            },
        });
    }

    // p > 2, m = 2: claimed supermodular, proof omitted.
    {
        let grid = [2.5, 3.0, 4.0];
        let scan = scan_power_regime(
            "p>2,m=2",
            &[2],
            &grid,
            samples,
            false,
            false,
            seed.wrapping_add(4),
        )?;
        detail.extend(scan.records.iter().cloned());
        rows.push(RegimeRow {
            p_range: "p > 2".to_string(),
            m_constraint: "m = 2".to_string(),
            claim: RegimeClaim::Supermodular,
            status: RegimeStatus::ConjecturalTested,
            evidence: RegimeEvidence::Samples {
                samples,
                sizes: vec![2],
                p_values: grid.to_vec(),
                min_delta: scan.min_delta,
                max_delta: scan.max_delta,
                violations: scan.violations,
            },
        });
    }

    // p = 2, m >= 3: corner blocks give a strict negative defect.
    let w = construct_block_counterexample(CounterexampleRegime::NearTwo, 3, seed)?;
    rows.push(RegimeRow {
        p_range: "p = 2".to_string(),
        m_constraint: "m >= 3".to_string(),
        claim: RegimeClaim::MayViolateSub,
        status: RegimeStatus::WitnessFound,
        evidence: RegimeEvidence::Witness(w),
    });

    // 2 < p < 3, m >= 3: strict positive defect.
    let w = construct_block_counterexample(CounterexampleRegime::TwoThree, 3, seed)?;
    rows.push(RegimeRow {
        p_range: "2 < p < 3".to_string(),
        m_constraint: "m >= 3".to_string(),
        claim: RegimeClaim::MayViolateSuper,
        status: RegimeStatus::WitnessFound,
        evidence: RegimeEvidence::Witness(w),
    });

    // p > 3, m >= 3: strict negative defect.
    let w = construct_block_counterexample(CounterexampleRegime::AboveThree, 3, seed)?;
    rows.push(RegimeRow {
        p_range: "p > 3".to_string(),
        m_constraint: "m >= 3".to_string(),
        claim: RegimeClaim::MayViolateSub,
        status: RegimeStatus::WitnessFound,
        evidence: RegimeEvidence::Witness(w),
    });

    Ok(Table1Scan { rows, detail })
}

/// Majorization of the disjoint split: the sorted spectra of A[I] and A[J]
/// concatenated are majorized by the spectrum of A[I u J]. Requires
/// disjoint index sets and a PSD matrix.
pub fn majorization_check(a: &HermitianMatrix, i: &IndexSet, j: &IndexSet) -> Result<bool> {
    if !i.is_disjoint_from(j) {
        return Err(Error::NotDisjoint);
    }
    let spectrum = a.eig()?.eigenvalues;
    let lambda_min = *spectrum.last().ok_or(Error::EmptyMatrix)?;
    if lambda_min < -crate::eig::rank_tolerance(&spectrum) {
        return Err(Error::NotPsd {
            index: 0,
            value: lambda_min,
        });
    }
    let mut parts = a.principal_submatrix(i)?.eig()?.eigenvalues;
    parts.extend(a.principal_submatrix(j)?.eig()?.eigenvalues);
    parts.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let joint = a
        .principal_submatrix(&i.union(j))?
        .eig()?
        .eigenvalues;
    debug_assert_eq!(parts.len(), joint.len());
    let mut sum_parts = 0.0;
    let mut sum_joint = 0.0;
    for (x, y) in parts.iter().zip(&joint) {
        sum_parts += x;
        sum_joint += y;
        if sum_parts > sum_joint + 1e-9 {
            return Ok(false);
        }
    }
    Ok((sum_parts - sum_joint).abs() <= 1e-9)
}

/// tr(A+B+C)^p + tr C^p <= tr(A+C)^p + tr(B+C)^p for PSD A, B, C and
/// p in [0, 1].
pub fn rio_inequality_check(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    c: &HermitianMatrix,
    p: f64,
) -> Result<bool> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter {
            detail: format!("the three-matrix inequality needs p in [0,1], got {p}"),
        });
    }
    if a.dim() != b.dim() || a.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim().max(c.dim()),
        });
    }
    for (name, m) in [("first", a), ("second", b), ("third", c)] {
        let spectrum = m.eig()?.eigenvalues;
        let lo = *spectrum.last().ok_or(Error::EmptyMatrix)?;
        if lo < -crate::eig::rank_tolerance(&spectrum) {
            return Err(Error::NotPsd {
                index: 0,
                value: lo,
            });
        }
        let _ = name;
    }
    let f = SpectralFunction::Power(p);
    let tr = |m: &HermitianMatrix| -> Result<f64> {
        crate::specfun::trace_function(m, &f)?.expect_finite("power trace")
    };
    let abc = HermitianMatrix::symmetrize(&(a.as_matrix() + b.as_matrix()) + c.as_matrix());
    let ac = HermitianMatrix::symmetrize(a.as_matrix() + c.as_matrix());
    let bc = HermitianMatrix::symmetrize(b.as_matrix() + c.as_matrix());
    let lhs = tr(&abc)? + tr(c)?;
    let rhs = tr(&ac)? + tr(&bc)?;
    Ok(lhs <= rhs + 1e-9)
}

/// Largest midpoint-convexity violations of A -> tr f(A[I]) over all index
/// sets: `max_mid_minus_avg` <= tol certifies convexity, `max_avg_minus_mid`
/// <= tol certifies concavity.
#[derive(Clone, Debug, Serialize)]
pub struct MidpointGap {
    pub max_mid_minus_avg: f64,
    pub max_avg_minus_mid: f64,
}

pub fn midpoint_convexity_gap(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    f: &SpectralFunction,
) -> Result<MidpointGap> {
    let mid = midpoint(a, b)?;
    let m = a.dim();
    let mut gap = MidpointGap {
        max_mid_minus_avg: f64::NEG_INFINITY,
        max_avg_minus_mid: f64::NEG_INFINITY,
    };
    for i in IndexSet::all(m) {
        let wm = spectral_trace(&mid, f, &i)?.expect_finite("midpoint trace")?;
        let wa = spectral_trace(a, f, &i)?.expect_finite("first trace")?;
        let wb = spectral_trace(b, f, &i)?.expect_finite("second trace")?;
        let avg = 0.5 * (wa + wb);
        gap.max_mid_minus_avg = gap.max_mid_minus_avg.max(wm - avg);
        gap.max_avg_minus_mid = gap.max_avg_minus_mid.max(avg - wm);
    }
    Ok(gap)
}
