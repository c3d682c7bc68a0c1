//! M-matrices A = s Id - B with B entrywise nonnegative and s >= rho(B):
//! recognition, the trace series for tr A^p / tr log A / tr(A log A), and the
//! closed-walk combinatorial oracle for tr B[I]^n.

use serde::Serialize;

use crate::dense::RMatrix;
use crate::eig::eig_hermitian;
use crate::error::{Error, Result};
use crate::indexset::IndexSet;
use crate::setfun::SubsetTable;
use crate::specfun::{ExtendedReal, SpectralFunction};

/// |s - rho| within this multiple of max(1, s) counts as singular.
pub const SINGULAR_REL_TOL: f64 = 1e-10;
/// Maximum number of series terms before the tail certificate gives up.
pub const TERM_CAP: usize = 1_000_000;
/// Splits with rho/s beyond 1 - NEAR_SINGULAR_GAP route through the limit
/// definition instead of the direct series.
pub const NEAR_SINGULAR_GAP: f64 = 1e-6;
/// Refinement cap for the singular limit sequence t_j = s (1 + 2^-j).
pub const LIMIT_STEPS: usize = 40;
const RADIUS_ITER_CAP: usize = 200_000;
const RADIUS_REL_TOL: f64 = 1e-11;

/// The shift/nonnegative-part decomposition A = s Id - B.
#[derive(Clone, Debug, Serialize)]
pub struct MMatrixSplit {
    pub s: f64,
    #[serde(skip)]
    pub b: RMatrix,
    pub rho: f64,
    pub singular: bool,
}

impl MMatrixSplit {
    pub fn dim(&self) -> usize {
        self.b.rows()
    }
}

/// Checks the Z-matrix sign pattern, takes s as the largest diagonal entry
/// (the minimal valid shift, which also maximizes series convergence speed),
/// and certifies s >= rho(B).
pub fn validate_and_split(a: &RMatrix) -> Result<MMatrixSplit> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(MMatrixSplit {
            s: 0.0,
            b: RMatrix::zeros(0, 0),
            rho: 0.0,
            singular: true,
        });
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && a[(i, j)] > 0.0 {
                return Err(Error::PositiveOffDiagonal {
                    row: i,
                    col: j,
                    value: a[(i, j)],
                });
            }
        }
    }
    let s = (0..n).map(|i| a[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
    let b = RMatrix::from_fn(n, n, |i, j| if i == j { s - a[(i, i)] } else { -a[(i, j)] });
    let rho = spectral_radius(&b)?;
    let slack = SINGULAR_REL_TOL * s.abs().max(1.0);
    if s < rho - slack {
        return Err(Error::NotMMatrix { s, rho });
    }
    let singular = (s - rho).abs() <= slack;
    Ok(MMatrixSplit { s, b, rho, singular })
}

/// Perron root of an entrywise nonnegative matrix.
///
/// The matrix is first split into strongly connected components (the spectral
/// radius is the maximum over the diagonal blocks of the Frobenius normal
/// form); each nontrivial block is shifted by a multiple of the identity to
/// make it primitive and then iterated with Collatz-Wielandt bounds as the
/// convergence certificate.
pub fn spectral_radius(b: &RMatrix) -> Result<f64> {
    if !b.is_square() {
        return Err(Error::NotSquare {
            rows: b.rows(),
            cols: b.cols(),
        });
    }
    b.require_nonnegative()?;
    let n = b.rows();
    if n == 0 {
        return Ok(0.0);
    }
    let mut rho = 0.0f64;
    for comp in strongly_connected_components(b) {
        if comp.len() == 1 {
            let i = comp[0];
            rho = rho.max(b[(i, i)]);
        } else {
            let block = b.submatrix(&comp, &comp);
            rho = rho.max(perron_irreducible(&block, b)?);
        }
    }
    Ok(rho)
}

/// SCCs via bitset reachability closure; adequate at desk scale and free of
/// recursion.
fn strongly_connected_components(b: &RMatrix) -> Vec<Vec<usize>> {
    let n = b.rows();
    let words = n.div_ceil(64);
    let mut reach: Vec<Vec<u64>> = vec![vec![0u64; words]; n];
    for i in 0..n {
        reach[i][i / 64] |= 1 << (i % 64);
        for j in 0..n {
            if b[(i, j)] > 0.0 {
                reach[i][j / 64] |= 1 << (j % 64);
            }
        }
    }
    for k in 0..n {
        let row_k = reach[k].clone();
        for row in reach.iter_mut() {
            if row[k / 64] >> (k % 64) & 1 == 1 {
                for (dst, src) in row.iter_mut().zip(&row_k) {
                    *dst |= src;
                }
            }
        }
    }
    let mut component = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        if component[i] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = vec![i];
        component[i] = id;
        for j in i + 1..n {
            if component[j] == usize::MAX
                && reach[i][j / 64] >> (j % 64) & 1 == 1
                && reach[j][i / 64] >> (i % 64) & 1 == 1
            {
                component[j] = id;
                members.push(j);
            }
        }
        comps.push(members);
    }
    comps
}

fn perron_irreducible(c: &RMatrix, original: &RMatrix) -> Result<f64> {
    let n = c.rows();
    let gersh = c.row_sums().into_iter().fold(0.0f64, f64::max);
    if gersh == 0.0 {
        return Ok(0.0);
    }
    // Diagonal shift makes the block primitive; rho(C + eps Id) = rho(C) + eps.
    let eps = 0.1 * gersh;
    let mut x = vec![1.0f64; n];
    let mut lo = 0.0f64;
    let mut hi = gersh + eps;
    for _ in 0..RADIUS_ITER_CAP {
        let mut y = vec![0.0f64; n];
        for i in 0..n {
            let mut acc = eps * x[i];
            for j in 0..n {
                acc += c[(i, j)] * x[j];
            }
            y[i] = acc;
        }
        let mut rmin = f64::INFINITY;
        let mut rmax = 0.0f64;
        for i in 0..n {
            let r = y[i] / x[i];
            rmin = rmin.min(r);
            rmax = rmax.max(r);
        }
        lo = rmin;
        hi = rmax;
        if hi - lo <= RADIUS_REL_TOL * hi.max(1.0) {
            return Ok((0.5 * (lo + hi) - eps).max(0.0));
        }
        let ymax = y.iter().fold(0.0f64, |m, v| m.max(*v));
        for v in &mut y {
            *v /= ymax;
        }
        x = y;
    }
    // Diagnostic only: the hermitian bound rho((B + B^T)/2) >= rho(B).
    let sym = original.to_cmatrix();
    let herm = crate::hermitian::HermitianMatrix::symmetrize(sym);
    let symmetric_bound = herm
        .eig()
        .map(|d| d.eigenvalues.first().copied().unwrap_or(0.0))
        .unwrap_or(f64::NAN);
    Err(Error::RadiusNoConvergence {
        iterations: RADIUS_ITER_CAP,
        lower: lo - eps,
        upper: hi - eps,
        symmetric_bound,
    })
}

/// Running powers B^i with their traces, advanced lazily.
struct PowerTraces<'a> {
    b: &'a RMatrix,
    current: RMatrix,
}

impl<'a> PowerTraces<'a> {
    fn new(b: &'a RMatrix) -> Self {
        Self {
            b,
            current: RMatrix::identity(b.rows()),
        }
    }

    /// Trace of B^i for the next i (starting at i = 0).
    fn next_trace(&mut self) -> f64 {
        let t = self.current.trace();
        self.current = self.current.mul(self.b);
        t
    }
}

fn certify(terms: usize, last_bound: f64, tolerance: f64) -> Error {
    Error::SeriesNoCertificate {
        terms,
        last_bound,
        tolerance,
    }
}

/// tr (s Id - B)^p = s^p sum_i C(p,i) (-s)^{-i} tr B^i, certified by the
/// geometric tail bound m |C(p,i)| (rho/s)^i s^p / (1 - rho/s).
fn series_power_trace(s: f64, b: &RMatrix, rho: f64, p: f64, tol: f64) -> Result<f64> {
    let m = b.rows() as f64;
    if b.rows() == 0 {
        return Ok(0.0);
    }
    let r = rho / s;
    let sp = s.powf(p);
    let mut powers = PowerTraces::new(b);
    let mut coeff = 1.0f64; // C(p, i)
    let mut factor = sp; // s^p (-1/s)^i
    let mut acc = 0.0f64;
    let mut last_bound = f64::INFINITY;
    for i in 0..TERM_CAP {
        let tr_i = powers.next_trace();
        acc += coeff * factor * tr_i;
        let next_coeff = coeff * (p - i as f64) / (i as f64 + 1.0);
        if i as f64 >= p {
            // Coefficient ratio |C(p,j+1)/C(p,j)| on the tail: at most 1 for
            // p >= -1, and at most (i+1-p)/(i+2) for p < -1 (where the
            // magnitudes still grow); the tail is geometric with ratio r*q.
            let q = ((i as f64 + 1.0 - p) / (i as f64 + 2.0)).max(1.0);
            if r * q < 1.0 {
                last_bound =
                    next_coeff.abs() * m * sp.abs() * r.powi(i as i32 + 1) / (1.0 - r * q);
                if last_bound < tol {
                    return Ok(acc);
                }
            }
        }
        coeff = next_coeff;
        factor *= -1.0 / s;
    }
    Err(certify(TERM_CAP, last_bound, tol))
}

/// tr log (s Id - B) = m log s - sum_{i>=1} tr B^i / (i s^i).
fn series_log_trace(s: f64, b: &RMatrix, rho: f64, tol: f64) -> Result<f64> {
    let m = b.rows() as f64;
    if b.rows() == 0 {
        return Ok(0.0);
    }
    let r = rho / s;
    let mut powers = PowerTraces::new(b);
    powers.next_trace(); // discard i = 0
    let mut acc = m * s.ln();
    let mut si = s;
    let mut last_bound = f64::INFINITY;
    for i in 1..TERM_CAP {
        let tr_i = powers.next_trace();
        acc -= tr_i / (i as f64 * si);
        last_bound = m * r.powi(i as i32 + 1) / ((i as f64 + 1.0) * (1.0 - r));
        if last_bound < tol {
            return Ok(acc);
        }
        si *= s;
    }
    Err(certify(TERM_CAP, last_bound, tol))
}

/// tr (A log A) for A = s Id - B = s (Id - X), X = B/s, via
/// (1-x) log(1-x) = -x + sum_{i>=2} x^i / (i (i-1)).
fn series_xlogx_trace(s: f64, b: &RMatrix, rho: f64, tol: f64) -> Result<f64> {
    let m = b.rows() as f64;
    if b.rows() == 0 {
        return Ok(0.0);
    }
    let r = rho / s;
    let mut powers = PowerTraces::new(b);
    powers.next_trace(); // i = 0
    let tr1 = powers.next_trace();
    let mut acc = s.ln() * (s * m - tr1) - tr1;
    let mut si = s; // s^{i-1} at i
    let mut last_bound = f64::INFINITY;
    for i in 2..TERM_CAP {
        si *= s;
        let tr_i = powers.next_trace();
        acc += s * tr_i / (si * i as f64 * (i as f64 - 1.0));
        last_bound = s * m * r.powi(i as i32 + 1) / (i as f64 * (i as f64 + 1.0) * (1.0 - r));
        if last_bound < tol {
            return Ok(acc);
        }
    }
    Err(certify(TERM_CAP, last_bound, tol))
}

fn direct_series(s: f64, b: &RMatrix, rho: f64, f: &SpectralFunction, tol: f64) -> Result<f64> {
    match f {
        SpectralFunction::Power(p) => series_power_trace(s, b, rho, *p, tol),
        SpectralFunction::Log => series_log_trace(s, b, rho, tol),
        SpectralFunction::XLogX => series_xlogx_trace(s, b, rho, tol),
        SpectralFunction::Custom { .. } => Err(Error::InvalidParameter {
            detail: "series traces support power:<p>, log and xlogx only".into(),
        }),
    }
}

/// Evaluates the limit tr f(t Id - B) along t_j = s (1 + 2^-j) until two
/// successive values differ by less than `tol`. A zero shift degenerates
/// the multiplicative sequence, so it falls back to t_j = 2^-j.
fn limit_series(s: f64, b: &RMatrix, rho: f64, f: &SpectralFunction, tol: f64) -> Result<f64> {
    let step = if s > 0.0 { s } else { 1.0 };
    let mut prev: Option<f64> = None;
    let mut last_diff = f64::INFINITY;
    for j in 0..=LIMIT_STEPS {
        let t = s + step * 0.5f64.powi(j as i32);
        let v = direct_series(t, b, rho, f, 0.25 * tol)?;
        if let Some(p) = prev {
            last_diff = (v - p).abs();
            if last_diff < tol {
                return Ok(v);
            }
        }
        prev = Some(v);
    }
    Err(Error::LimitNoConvergence {
        steps: LIMIT_STEPS,
        last_diff,
        tolerance: tol,
    })
}

/// Trace of f applied to the M-matrix split, through the power series.
///
/// Invertible splits with rho/s away from 1 use the direct certified series;
/// near-singular and singular splits route through the limit definition for
/// Power(p >= 0) and XLogX. Singular splits return +inf for Power(p < 0) and
/// -inf for Log.
pub fn series_trace(
    split: &MMatrixSplit,
    f: &SpectralFunction,
    tol: f64,
) -> Result<ExtendedReal> {
    if tol <= 0.0 {
        return Err(Error::InvalidParameter {
            detail: format!("series tolerance must be positive, got {tol}"),
        });
    }
    if split.dim() == 0 {
        return Ok(ExtendedReal::Finite(0.0));
    }
    if split.singular {
        match f {
            SpectralFunction::Power(p) if *p < 0.0 => return Ok(ExtendedReal::PosInf),
            SpectralFunction::Log => return Ok(ExtendedReal::NegInf),
            _ => return Ok(ExtendedReal::Finite(limit_series(
                split.s, &split.b, split.rho, f, tol,
            )?)),
        }
    }
    let ratio = if split.s > 0.0 { split.rho / split.s } else { 0.0 };
    if ratio > 1.0 - NEAR_SINGULAR_GAP {
        return Ok(ExtendedReal::Finite(limit_series(
            split.s, &split.b, split.rho, f, tol,
        )?));
    }
    Ok(ExtendedReal::Finite(direct_series(
        split.s, &split.b, split.rho, f, tol,
    )?))
}

/// w(I) = tr f(A[I]) over all subsets of an M-matrix, each submatrix split
/// afresh (principal submatrices of M-matrices are M-matrices).
pub fn mmatrix_subset_traces(a: &RMatrix, f: &SpectralFunction, tol: f64) -> Result<SubsetTable> {
    let n = a.rows();
    if n > crate::setfun::MAX_CLASSIFY_DIM {
        return Err(Error::DimensionTooLarge {
            dim: n,
            max: crate::setfun::MAX_CLASSIFY_DIM,
        });
    }
    let mut values = Vec::with_capacity(1 << n);
    for set in IndexSet::all(n) {
        if set.is_empty() {
            values.push(ExtendedReal::Finite(0.0));
            continue;
        }
        let idx = set.indices();
        let sub = a.submatrix(&idx, &idx);
        let split = validate_and_split(&sub)?;
        values.push(series_trace(&split, f, tol)?);
    }
    Ok(SubsetTable::new(n, values))
}

/// Sum of the weights of all closed walks of length n inside I; equals
/// tr B[I]^n. Brute-force enumeration, so both n and |I| are capped at 8.
pub fn walk_trace_oracle(b: &RMatrix, i: &IndexSet, n: usize) -> Result<f64> {
    if !b.is_square() {
        return Err(Error::NotSquare {
            rows: b.rows(),
            cols: b.cols(),
        });
    }
    if i.dim() != b.rows() {
        return Err(Error::DimensionMismatch {
            expected: b.rows(),
            got: i.dim(),
        });
    }
    if n == 0 || n > 8 {
        return Err(Error::InvalidParameter {
            detail: format!("walk length must be in 1..=8, got {n}"),
        });
    }
    if i.card() > 8 {
        return Err(Error::DimensionTooLarge {
            dim: i.card(),
            max: 8,
        });
    }
    let verts = i.indices();
    if verts.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0f64;
    // walk = (v_1, ..., v_n) with the closing edge v_n -> v_1
    fn extend(
        b: &RMatrix,
        verts: &[usize],
        first: usize,
        cur: usize,
        depth: usize,
        n: usize,
        weight: f64,
        total: &mut f64,
    ) {
        if depth == n {
            *total += weight * b[(cur, first)];
            return;
        }
        for &v in verts {
            let w = weight * b[(cur, v)];
            if w == 0.0 {
                continue;
            }
            extend(b, verts, first, v, depth + 1, n, w, total);
        }
    }
    for &start in &verts {
        extend(b, &verts, start, start, 1, n, 1.0, &mut total);
    }
    Ok(total)
}

/// tr B[I]^n by direct matrix powering; the cross-check for the walk oracle.
pub fn power_trace(b: &RMatrix, i: &IndexSet, n: usize) -> Result<f64> {
    if i.dim() != b.rows() {
        return Err(Error::DimensionMismatch {
            expected: b.rows(),
            got: i.dim(),
        });
    }
    let idx = i.indices();
    if idx.is_empty() {
        return Ok(0.0);
    }
    let sub = b.submatrix(&idx, &idx);
    let mut p = sub.clone();
    for _ in 1..n {
        p = p.mul(&sub);
    }
    Ok(p.trace())
}

/// Symmetric eigendecomposition reference for symmetric splits; used by the
/// agreement tests.
pub fn eig_trace_symmetric(a: &RMatrix, f: &SpectralFunction) -> Result<ExtendedReal> {
    let c = a.to_cmatrix();
    let dec = eig_hermitian(&c)?;
    crate::specfun::trace_of_spectrum(&dec.eigenvalues, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn split_examples() {
        let a = RMatrix::from_rows(&[&[2.0, -1.0], &[-1.0, 2.0]]);
        let split = validate_and_split(&a).unwrap();
        assert_eq!(split.s, 2.0);
        assert_eq!(split.b[(0, 1)], 1.0);
        assert!((split.rho - 1.0).abs() < 1e-9);
        assert!(!split.singular);

        let id = validate_and_split(&RMatrix::identity(3)).unwrap();
        assert_eq!(id.s, 1.0);
        assert_eq!(id.rho, 0.0);
        assert_eq!(id.b.max_abs(), 0.0);

        let sing = validate_and_split(&RMatrix::from_rows(&[&[1.0, -1.0], &[-1.0, 1.0]])).unwrap();
        assert!(sing.singular);

        let not_z = RMatrix::from_rows(&[&[1.0, 0.5], &[-1.0, 1.0]]);
        assert!(matches!(
            validate_and_split(&not_z),
            Err(Error::PositiveOffDiagonal { row: 0, col: 1, .. })
        ));

        // s fixed at max diagonal but below rho(B): not an M-matrix
        let bad = RMatrix::from_rows(&[&[0.1, -5.0], &[-5.0, 0.1]]);
        assert!(matches!(validate_and_split(&bad), Err(Error::NotMMatrix { .. })));
    }

    #[test]
    fn spectral_radius_examples() {
        let exch = RMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!((spectral_radius(&exch).unwrap() - 1.0).abs() < 1e-9);

        let diag = RMatrix::from_rows(&[&[3.0, 0.0], &[0.0, 2.0]]);
        assert!((spectral_radius(&diag).unwrap() - 3.0).abs() < 1e-10);

        let ones = RMatrix::from_fn(3, 3, |_, _| 1.0);
        assert!((spectral_radius(&ones).unwrap() - 3.0).abs() < 1e-9);

        let nilpotent = RMatrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(spectral_radius(&nilpotent).unwrap().abs() < 1e-12);

        assert!(spectral_radius(&RMatrix::zeros(4, 4)).unwrap() == 0.0);
    }

    #[test]
    fn spectral_radius_matches_symmetric_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..30 {
            let n = 2 + rng.gen::<usize>() % 5;
            let c = RMatrix::from_fn(n, n, |_, _| rng.gen::<f64>());
            let sym = RMatrix::from_fn(n, n, |i, j| 0.5 * (c[(i, j)] + c[(j, i)]));
            let rho = spectral_radius(&sym).unwrap();
            let top = eig_hermitian(&sym.to_cmatrix()).unwrap().eigenvalues[0];
            assert!((rho - top).abs() <= 1e-8 * top.max(1.0), "rho {rho} vs {top}");
        }
    }

    #[test]
    fn series_matches_closed_forms() {
        let a = RMatrix::from_rows(&[&[2.0, -1.0], &[-1.0, 2.0]]);
        let split = validate_and_split(&a).unwrap();
        // eigenvalues 1 and 3 (quadratic-formula oracle)
        let log = series_trace(&split, &SpectralFunction::Log, 1e-12)
            .unwrap()
            .as_f64()
            .unwrap();
        assert!((log - 3.0f64.ln()).abs() < 1e-10);
        let root = series_trace(&split, &SpectralFunction::Power(0.5), 1e-12)
            .unwrap()
            .as_f64()
            .unwrap();
        assert!((root - (1.0 + 3.0f64.sqrt())).abs() < 1e-10, "root = {root}");

        let id = validate_and_split(&RMatrix::identity(3)).unwrap();
        for p in [-1.0, 0.0, 0.5, 2.0] {
            let t = series_trace(&id, &SpectralFunction::Power(p), 1e-12)
                .unwrap()
                .as_f64()
                .unwrap();
            assert!((t - 3.0).abs() < 1e-12, "p = {p}");
        }
    }

    #[test]
    fn series_agrees_with_eigendecomposition_on_symmetric_splits() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..30 {
            let n = 2 + rng.gen::<usize>() % 4;
            let raw = RMatrix::from_fn(n, n, |_, _| rng.gen::<f64>());
            let b = RMatrix::from_fn(n, n, |i, j| 0.5 * (raw[(i, j)] + raw[(j, i)]));
            let rho = spectral_radius(&b).unwrap();
            let s = rho * (1.1 + rng.gen::<f64>());
            let a = RMatrix::from_fn(n, n, |i, j| if i == j { s - b[(i, j)] } else { -b[(i, j)] });
            let split = validate_and_split(&a).unwrap();
            for f in [
                SpectralFunction::Power(-1.0),
                SpectralFunction::Power(0.5),
                SpectralFunction::Power(1.5),
                SpectralFunction::Log,
                SpectralFunction::XLogX,
            ] {
                let series = series_trace(&split, &f, 1e-11).unwrap().as_f64().unwrap();
                let eig = eig_trace_symmetric(&a, &f).unwrap().as_f64().unwrap();
                assert!(
                    (series - eig).abs() <= 1e-8 * eig.abs().max(1.0),
                    "{f}: series {series} vs eig {eig}"
                );
            }
        }
    }

    #[test]
    fn negative_power_series_certificate_stays_sound() {
        // |C(p,i)| grows along the tail for p < -1; compare against the
        // eigendecomposition on a symmetric split
        let b = RMatrix::from_rows(&[&[0.4, 0.3], &[0.3, 0.2]]);
        let rho = spectral_radius(&b).unwrap();
        let s = rho * 1.2;
        let a = RMatrix::from_fn(2, 2, |i, j| if i == j { s - b[(i, j)] } else { -b[(i, j)] });
        let split = validate_and_split(&a).unwrap();
        for p in [-1.0, -2.0, -3.5] {
            let f = SpectralFunction::Power(p);
            let series = series_trace(&split, &f, 1e-11).unwrap().as_f64().unwrap();
            let eig = eig_trace_symmetric(&a, &f).unwrap().as_f64().unwrap();
            assert!(
                (series - eig).abs() <= 1e-9 * eig.abs().max(1.0),
                "p={p}: {series} vs {eig}"
            );
        }
    }

    #[test]
    fn zero_matrix_split_traces() {
        let z = RMatrix::zeros(3, 3);
        let split = validate_and_split(&z).unwrap();
        assert!(split.singular);
        assert_eq!(split.s, 0.0);
        let t = series_trace(&split, &SpectralFunction::Power(1.0), 1e-9)
            .unwrap()
            .as_f64()
            .unwrap();
        assert!(t.abs() < 1e-8, "tr of the zero matrix is 0, got {t}");
        assert_eq!(
            series_trace(&split, &SpectralFunction::Log, 1e-9).unwrap(),
            ExtendedReal::NegInf
        );
    }

    #[test]
    fn singular_split_conventions() {
        let a = RMatrix::from_rows(&[&[1.0, -1.0], &[-1.0, 1.0]]);
        let split = validate_and_split(&a).unwrap();
        assert!(split.singular);
        assert_eq!(
            series_trace(&split, &SpectralFunction::Power(-0.5), 1e-9).unwrap(),
            ExtendedReal::PosInf
        );
        assert_eq!(
            series_trace(&split, &SpectralFunction::Log, 1e-9).unwrap(),
            ExtendedReal::NegInf
        );
        // integer powers terminate, so the limit sequence settles exactly:
        // eigenvalues are 0 and 2.
        let sq = series_trace(&split, &SpectralFunction::Power(2.0), 1e-9)
            .unwrap()
            .as_f64()
            .unwrap();
        assert!((sq - 4.0).abs() < 1e-7, "sq = {sq}");
        // fractional powers certify only at coarse tolerance (the series
        // slows near the singular point); tr A^1/2 = sqrt(2)
        let half = series_trace(&split, &SpectralFunction::Power(0.5), 2e-2)
            .unwrap()
            .as_f64()
            .unwrap();
        assert!((half - 2.0f64.sqrt()).abs() < 0.05, "half = {half}");
    }

    #[test]
    fn walk_oracle_examples() {
        let exch = RMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let full = IndexSet::full(2);
        assert_eq!(walk_trace_oracle(&exch, &full, 2).unwrap(), 2.0);

        let b = RMatrix::from_rows(&[&[0.7, 0.2], &[0.1, 0.4]]);
        let single = IndexSet::singleton(2, 0).unwrap();
        let w = walk_trace_oracle(&b, &single, 3).unwrap();
        assert!((w - 0.7f64.powi(3)).abs() < 1e-15);

        let ones = RMatrix::from_fn(3, 3, |_, _| 1.0);
        assert_eq!(walk_trace_oracle(&ones, &IndexSet::full(3), 3).unwrap(), 27.0);

        // enumeration caps
        let big = RMatrix::zeros(9, 9);
        assert!(walk_trace_oracle(&big, &IndexSet::full(9), 2).is_err());
        assert!(walk_trace_oracle(&ones, &IndexSet::full(3), 9).is_err());
        assert_eq!(walk_trace_oracle(&ones, &IndexSet::empty(3), 2).unwrap(), 0.0);
    }

    #[test]
    fn walk_oracle_equals_matrix_powering() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..25 {
            let m = 1 + rng.gen::<usize>() % 5;
            let b = RMatrix::from_fn(m, m, |_, _| rng.gen::<f64>());
            for set in IndexSet::all(m) {
                for n in 1..=4usize {
                    let walk = walk_trace_oracle(&b, &set, n).unwrap();
                    let pow = power_trace(&b, &set, n).unwrap();
                    assert!(
                        (walk - pow).abs() <= 1e-10 * pow.abs().max(1.0),
                        "walk {walk} vs power {pow}"
                    );
                }
            }
        }
    }

    #[test]
    fn power_trace_inequality_with_equality_at_n_1() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for trial in 0..40 {
            let m = 2 + trial % 5; // sizes 2..=6
            let b = RMatrix::from_fn(m, m, |_, _| rng.gen::<f64>());
            for n in 1..=5usize {
                let traces: Vec<f64> = IndexSet::all(m)
                    .map(|s| power_trace(&b, &s, n).unwrap())
                    .collect();
                for i in IndexSet::all(m) {
                    for j in IndexSet::all(m) {
                        let lhs = traces[i.mask() as usize] + traces[j.mask() as usize];
                        let rhs = traces[i.union(&j).mask() as usize]
                            + traces[i.intersection(&j).mask() as usize];
                        assert!(lhs <= rhs + 1e-9, "n = {n}");
                        if n == 1 {
                            assert!((lhs - rhs).abs() <= 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn modularity_regimes_on_random_invertible_mmatrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..15 {
            let m = 2 + rng.gen::<usize>() % 3; // up to 4
            let b = RMatrix::from_fn(m, m, |_, _| rng.gen::<f64>());
            let rho = spectral_radius(&b).unwrap();
            let s = rho * (1.15 + rng.gen::<f64>());
            let a = RMatrix::from_fn(m, m, |i, j| if i == j { s - b[(i, j)] } else { -b[(i, j)] });
            for (f, submodular) in [
                (SpectralFunction::Power(0.5), true),
                (SpectralFunction::Log, true),
                (SpectralFunction::Power(-1.0), false),
                (SpectralFunction::Power(1.5), false),
                (SpectralFunction::XLogX, false),
            ] {
                let w = mmatrix_subset_traces(&a, &f, 1e-11).unwrap();
                let rep = crate::setfun::classify_table(&w, None);
                if submodular {
                    assert!(rep.satisfies_submodular(), "{f}: {rep:?}");
                } else {
                    assert!(rep.satisfies_supermodular(), "{f}: {rep:?}");
                }
            }
        }
    }
}
