//! Scalar spectral functions f, the extended real line for the trace
//! conventions (tr log of a singular matrix is -inf, tr of a negative power
//! is +inf), and the spectral calculus tr f(A) and f(A).

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dense::CMatrix;
use crate::eig::rank_tolerance;
use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;

/// Real number extended with the two infinities used by the trace
/// conventions. Arithmetic is checked: inf - inf is an error, never a NaN.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    PosInf,
    NegInf,
}

impl ExtendedReal {
    pub fn finite(x: f64) -> Self {
        ExtendedReal::Finite(x)
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(x) => Some(*x),
            _ => None,
        }
    }

    pub fn expect_finite(&self, context: &str) -> Result<f64> {
        self.as_f64().ok_or_else(|| Error::NonFiniteTrace {
            context: context.to_string(),
        })
    }

    pub fn checked_add(self, other: ExtendedReal) -> Result<ExtendedReal> {
        use ExtendedReal::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Ok(Finite(a + b)),
            (PosInf, NegInf) | (NegInf, PosInf) => Err(Error::IndeterminateArithmetic),
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
        }
    }

    pub fn checked_sub(self, other: ExtendedReal) -> Result<ExtendedReal> {
        self.checked_add(other.negate())
    }

    pub fn negate(self) -> ExtendedReal {
        use ExtendedReal::*;
        match self {
            Finite(x) => Finite(-x),
            PosInf => NegInf,
            NegInf => PosInf,
        }
    }

    /// self <= other + tol on the extended line.
    pub fn le_with_tol(&self, other: &ExtendedReal, tol: f64) -> bool {
        use ExtendedReal::*;
        match (self, other) {
            (NegInf, _) => true,
            (_, PosInf) => true,
            (PosInf, _) => false,
            (Finite(_), NegInf) => false,
            (Finite(a), Finite(b)) => *a <= *b + tol,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(x) => write!(f, "{x}"),
            ExtendedReal::PosInf => write!(f, "+inf"),
            ExtendedReal::NegInf => write!(f, "-inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(x) => serializer.serialize_f64(*x),
            ExtendedReal::PosInf => serializer.serialize_str("+inf"),
            ExtendedReal::NegInf => serializer.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Tag(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(x) => Ok(ExtendedReal::Finite(x)),
            Repr::Tag(s) => match s.as_str() {
                "+inf" => Ok(ExtendedReal::PosInf),
                "-inf" => Ok(ExtendedReal::NegInf),
                other => Err(D::Error::custom(format!("not an extended real: {other}"))),
            },
        }
    }
}

/// The scalar function defining a spectral set function I -> tr f(A[I]).
///
/// Domains: Power(p) is defined on all of R when p is a nonnegative integer
/// (polynomial calculus), on [0, inf) for other p >= 0, and on (0, inf) for
/// p < 0. XLogX lives on [0, inf) with 0 log 0 = 0, Log on (0, inf). Custom
/// functions carry an explicit closed interval and are evaluated only inside
/// it.
#[derive(Clone)]
pub enum SpectralFunction {
    Power(f64),
    XLogX,
    Log,
    Custom {
        name: String,
        lo: f64,
        hi: f64,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl SpectralFunction {
    pub fn power(p: f64) -> Self {
        SpectralFunction::Power(p)
    }

    pub fn custom(
        name: impl Into<String>,
        lo: f64,
        hi: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SpectralFunction::Custom {
            name: name.into(),
            lo,
            hi,
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> String {
        match self {
            SpectralFunction::Power(p) => format!("power:{p}"),
            SpectralFunction::XLogX => "xlogx".to_string(),
            SpectralFunction::Log => "log".to_string(),
            SpectralFunction::Custom { name, .. } => format!("custom:{name}"),
        }
    }
}

impl fmt::Debug for SpectralFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl fmt::Display for SpectralFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl Serialize for SpectralFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.name())
    }
}

impl FromStr for SpectralFunction {
    type Err = Error;

    /// Accepts `power:<p>`, `xlogx`, `log`.
    fn from_str(s: &str) -> Result<Self> {
        if let Some(p) = s.strip_prefix("power:") {
            let p: f64 = p.parse().map_err(|_| Error::InvalidParameter {
                detail: format!("bad power exponent in `{s}`"),
            })?;
            return Ok(SpectralFunction::Power(p));
        }
        match s {
            "xlogx" => Ok(SpectralFunction::XLogX),
            "log" => Ok(SpectralFunction::Log),
            _ => Err(Error::InvalidParameter {
                detail: format!("unknown spectral function `{s}` (use power:<p> | xlogx | log)"),
            }),
        }
    }
}

fn is_nonneg_integer(p: f64) -> bool {
    p >= 0.0 && p.fract() == 0.0 && p <= i32::MAX as f64
}

fn real_pow(x: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

/// Sum of f over a spectrum, with the extended-real conventions. The rank
/// tolerance deciding "numerically zero" scales with the spectrum itself.
pub fn trace_of_spectrum(eigenvalues: &[f64], f: &SpectralFunction) -> Result<ExtendedReal> {
    if eigenvalues.is_empty() {
        return Ok(ExtendedReal::Finite(0.0));
    }
    let tol = rank_tolerance(eigenvalues);
    let domain_err = |l: f64| Error::DomainViolation {
        function: f.name(),
        eigenvalue: l,
    };
    match f {
        SpectralFunction::Power(p) => {
            let p = *p;
            if p == 0.0 {
                // tr A^0 = numerical rank, defined for nonnegative spectra.
                let mut rank = 0usize;
                for &l in eigenvalues {
                    if l < -tol {
                        return Err(domain_err(l));
                    }
                    if l.abs() > tol {
                        rank += 1;
                    }
                }
                Ok(ExtendedReal::Finite(rank as f64))
            } else if is_nonneg_integer(p) {
                Ok(ExtendedReal::Finite(
                    eigenvalues.iter().map(|&l| real_pow(l, p)).sum(),
                ))
            } else if p > 0.0 {
                let mut sum = 0.0;
                for &l in eigenvalues {
                    if l < -tol {
                        return Err(domain_err(l));
                    }
                    if l > 0.0 {
                        sum += l.powf(p);
                    }
                }
                Ok(ExtendedReal::Finite(sum))
            } else {
                // p < 0: singular spectra diverge to +inf.
                let mut sum = 0.0;
                for &l in eigenvalues {
                    if l < -tol {
                        return Err(domain_err(l));
                    }
                    if l.abs() <= tol {
                        return Ok(ExtendedReal::PosInf);
                    }
                    sum += real_pow(l, p);
                }
                Ok(ExtendedReal::Finite(sum))
            }
        }
        SpectralFunction::XLogX => {
            let mut sum = 0.0;
            for &l in eigenvalues {
                if l < -tol {
                    return Err(domain_err(l));
                }
                if l > 0.0 {
                    sum += l * l.ln();
                }
            }
            Ok(ExtendedReal::Finite(sum))
        }
        SpectralFunction::Log => {
            let mut sum = 0.0;
            let mut singular = false;
            for &l in eigenvalues {
                if l < -tol {
                    return Err(domain_err(l));
                }
                if l.abs() <= tol {
                    singular = true;
                } else {
                    sum += l.ln();
                }
            }
            if singular {
                Ok(ExtendedReal::NegInf)
            } else {
                Ok(ExtendedReal::Finite(sum))
            }
        }
        SpectralFunction::Custom { lo, hi, f, .. } => {
            let mut sum = 0.0;
            for &l in eigenvalues {
                if l < *lo || l > *hi {
                    return Err(domain_err(l));
                }
                sum += f(l);
            }
            Ok(ExtendedReal::Finite(sum))
        }
    }
}

/// tr f(A) through the eigendecomposition.
pub fn trace_function(a: &HermitianMatrix, f: &SpectralFunction) -> Result<ExtendedReal> {
    if a.dim() == 0 {
        return Ok(ExtendedReal::Finite(0.0));
    }
    let dec = a.eig()?;
    trace_of_spectrum(&dec.eigenvalues, f)
}

/// f(A) = U diag(f(lambda)) U*. Requires every eigenvalue to sit strictly
/// inside the domain of f (rank-tolerant at zero for Power(p >= 0) and
/// XLogX): sentinel values cannot be materialized in a matrix.
pub fn matrix_function(a: &HermitianMatrix, f: &SpectralFunction) -> Result<HermitianMatrix> {
    if a.dim() == 0 {
        return Ok(HermitianMatrix::empty());
    }
    let dec = a.eig()?;
    let tol = rank_tolerance(&dec.eigenvalues);
    let domain_err = |l: f64| Error::DomainViolation {
        function: f.name(),
        eigenvalue: l,
    };
    let mut values = Vec::with_capacity(dec.eigenvalues.len());
    for &l in &dec.eigenvalues {
        let v = match f {
            SpectralFunction::Power(p) => {
                let p = *p;
                if is_nonneg_integer(p) {
                    real_pow(l, p)
                } else if p > 0.0 {
                    if l < -tol {
                        return Err(domain_err(l));
                    }
                    if l <= 0.0 { 0.0 } else { l.powf(p) }
                } else {
                    if l <= tol {
                        return Err(domain_err(l));
                    }
                    real_pow(l, p)
                }
            }
            SpectralFunction::XLogX => {
                if l < -tol {
                    return Err(domain_err(l));
                }
                if l <= 0.0 { 0.0 } else { l * l.ln() }
            }
            SpectralFunction::Log => {
                if l <= tol {
                    return Err(domain_err(l));
                }
                l.ln()
            }
            SpectralFunction::Custom { lo, hi, f, .. } => {
                if l < *lo || l > *hi {
                    return Err(domain_err(l));
                }
                f(l)
            }
        };
        values.push(v);
    }
    Ok(HermitianMatrix::symmetrize(dec.assemble(&values)))
}

/// Average (A + B)/2 of two hermitian matrices of equal dimension.
pub fn midpoint(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<HermitianMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let sum: CMatrix = a.as_matrix() + b.as_matrix();
    Ok(HermitianMatrix::symmetrize(sum.scale_re(0.5)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::C64;

    fn example_matrix() -> HermitianMatrix {
        HermitianMatrix::from_real_rows(&[
            &[5.0, -12.0, 9.0],
            &[-12.0, 33.0, -24.0],
            &[9.0, -24.0, 19.0],
        ])
        .unwrap()
    }

    #[test]
    fn extended_real_arithmetic() {
        use ExtendedReal::*;
        assert_eq!(Finite(1.0).checked_add(Finite(2.0)).unwrap(), Finite(3.0));
        assert_eq!(PosInf.checked_add(Finite(5.0)).unwrap(), PosInf);
        assert_eq!(NegInf.checked_sub(Finite(5.0)).unwrap(), NegInf);
        assert!(PosInf.checked_sub(PosInf).is_err());
        assert!(NegInf.checked_add(PosInf).is_err());
        assert!(NegInf.le_with_tol(&Finite(-1e300), 0.0));
        assert!(!PosInf.le_with_tol(&Finite(1e300), 0.0));
    }

    #[test]
    fn trace_power_examples() {
        let id5 = HermitianMatrix::identity(5);
        for p in [-1.0, 0.0, 0.5, 1.0, 2.0, 3.7] {
            let t = trace_function(&id5, &SpectralFunction::Power(p)).unwrap();
            assert_eq!(t, ExtendedReal::Finite(5.0), "p = {p}");
        }
        // tr A^p = +inf for singular A and p < 0
        let sing = HermitianMatrix::from_diag(&[1.0, 0.0]);
        assert_eq!(
            trace_function(&sing, &SpectralFunction::Power(-1.0)).unwrap(),
            ExtendedReal::PosInf
        );
        // numerical rank at p = 0
        assert_eq!(
            trace_function(&sing, &SpectralFunction::Power(0.0)).unwrap(),
            ExtendedReal::Finite(1.0)
        );
        // trace of the square equals the squared Frobenius norm
        let a = example_matrix();
        let t2 = trace_function(&a, &SpectralFunction::Power(2.0))
            .unwrap()
            .as_f64()
            .unwrap();
        let fro2: f64 = a.as_matrix().fro_norm().powi(2);
        assert!((t2 - fro2).abs() <= 1e-10 * fro2);
    }

    #[test]
    fn trace_log_of_example_is_log_det() {
        // det A_ex = 30 by cofactor expansion.
        let t = trace_function(&example_matrix(), &SpectralFunction::Log)
            .unwrap()
            .as_f64()
            .unwrap();
        assert!((t - 30.0f64.ln()).abs() < 1e-10);
        // log of a singular matrix is -inf
        let sing = HermitianMatrix::from_diag(&[2.0, 0.0]);
        assert_eq!(
            trace_function(&sing, &SpectralFunction::Log).unwrap(),
            ExtendedReal::NegInf
        );
    }

    #[test]
    fn domain_violations_report_the_eigenvalue() {
        let indef = HermitianMatrix::from_diag(&[1.0, -2.0]);
        let err = trace_function(&indef, &SpectralFunction::Power(0.5)).unwrap_err();
        match err {
            Error::DomainViolation { eigenvalue, .. } => assert_eq!(eigenvalue, -2.0),
            other => panic!("unexpected error {other}"),
        }
        // integer powers extend to indefinite spectra
        let t = trace_function(&indef, &SpectralFunction::Power(2.0)).unwrap();
        assert_eq!(t, ExtendedReal::Finite(5.0));
    }

    #[test]
    fn matrix_function_examples() {
        let d = HermitianMatrix::from_diag(&[1.0, 4.0]);
        let root = matrix_function(&d, &SpectralFunction::Power(0.5)).unwrap();
        assert!((root.entry(0, 0).re - 1.0).abs() < 1e-12);
        assert!((root.entry(1, 1).re - 2.0).abs() < 1e-12);

        let xlx = matrix_function(&HermitianMatrix::identity(2), &SpectralFunction::XLogX).unwrap();
        assert!(xlx.max_abs() < 1e-12);

        let a = HermitianMatrix::from_real_rows(&[&[2.0, -1.0], &[-1.0, 2.0]]).unwrap();
        let la = matrix_function(&a, &SpectralFunction::Log).unwrap();
        let eigs = la.eig().unwrap().eigenvalues;
        assert!((eigs[0] - 3.0f64.ln()).abs() < 1e-10);
        assert!(eigs[1].abs() < 1e-10);

        // identity power reproduces the matrix
        let aex = example_matrix();
        let same = matrix_function(&aex, &SpectralFunction::Power(1.0)).unwrap();
        let err = (same.as_matrix() - aex.as_matrix()).max_abs();
        assert!(err <= 1e-10 * aex.max_abs());

        // result commutes with the argument
        let f = matrix_function(&aex, &SpectralFunction::Power(0.5)).unwrap();
        let comm = &(f.as_matrix() * aex.as_matrix()) - &(aex.as_matrix() * f.as_matrix());
        assert!(comm.max_abs() <= 1e-8 * aex.max_abs());
    }

    #[test]
    fn custom_function_respects_declared_domain() {
        let f = SpectralFunction::custom("t^2/(1+t)", -0.999, f64::INFINITY, |t| t * t / (1.0 + t));
        let ok = HermitianMatrix::from_diag(&[1.0, 3.0]);
        let t = trace_function(&ok, &f).unwrap().as_f64().unwrap();
        assert!((t - (0.5 + 2.25)).abs() < 1e-12);
        let bad = HermitianMatrix::from_diag(&[-2.0]);
        assert!(trace_function(&bad, &f).is_err());
    }

    #[test]
    fn empty_matrix_trace_is_zero() {
        let e = HermitianMatrix::empty();
        for f in [
            SpectralFunction::Power(-1.0),
            SpectralFunction::Log,
            SpectralFunction::XLogX,
        ] {
            assert_eq!(trace_function(&e, &f).unwrap(), ExtendedReal::Finite(0.0));
        }
    }

    #[test]
    fn function_strings_parse() {
        assert!(matches!(
            "power:1.5".parse::<SpectralFunction>().unwrap(),
            SpectralFunction::Power(p) if p == 1.5
        ));
        assert!(matches!(
            "xlogx".parse::<SpectralFunction>().unwrap(),
            SpectralFunction::XLogX
        ));
        assert!("cosh".parse::<SpectralFunction>().is_err());
        let _ = C64::new(0.0, 0.0);
    }
}
