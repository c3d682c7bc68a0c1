//! Matrix file formats (JSON and CSV), the machine-readable report envelope,
//! and the 17-significant-digit number serialization used to keep report
//! diffs reproducible across platforms.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dense::{C64, CMatrix, RMatrix};
use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::mmatrix::{validate_and_split, MMatrixSplit};

pub const SCHEMA_VERSION: &str = "1";

/// JSON matrix schema: {"dim": m, "field": "complex"|"real",
/// "entries": [[re, im], ...]} with m*m row-major entries.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub dim: usize,
    pub field: FieldTag,
    pub entries: Vec<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum FieldTag {
    Real,
    Complex,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let field = if m.is_real() {
            FieldTag::Real
        } else {
            FieldTag::Complex
        };
        let entries = m.data().iter().map(|v| [v.re, v.im]).collect();
        Self {
            dim: m.rows(),
            field,
            entries,
        }
    }

    pub fn to_matrix(&self, path: &str) -> Result<CMatrix> {
        if self.entries.len() != self.dim * self.dim {
            return Err(Error::ClassValidation {
                path: path.to_string(),
                message: format!(
                    "expected {} entries for dim {}, found {}",
                    self.dim * self.dim,
                    self.dim,
                    self.entries.len()
                ),
            });
        }
        if let Some(k) = self
            .entries
            .iter()
            .position(|e| !e[0].is_finite() || !e[1].is_finite())
        {
            return Err(Error::ClassValidation {
                path: path.to_string(),
                message: format!(
                    "entry ({},{}) is not finite",
                    k / self.dim.max(1),
                    k % self.dim.max(1)
                ),
            });
        }
        if self.field == FieldTag::Real {
            if let Some(k) = self.entries.iter().position(|e| e[1] != 0.0) {
                return Err(Error::ClassValidation {
                    path: path.to_string(),
                    message: format!(
                        "field is declared real but entry ({},{}) has imaginary part {}",
                        k / self.dim,
                        k % self.dim,
                        self.entries[k][1]
                    ),
                });
            }
        }
        let dim = self.dim;
        Ok(CMatrix::from_fn(dim, dim, |i, j| {
            let e = self.entries[i * dim + j];
            C64::new(e[0], e[1])
        }))
    }
}

/// The class a parsed matrix must validate against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixClass {
    Hermitian,
    General,
    Nonnegative,
    MMatrix,
}

/// A matrix validated against its expected class.
#[derive(Clone, Debug)]
pub enum ParsedMatrix {
    Hermitian(HermitianMatrix),
    General(CMatrix),
    /// Nonnegative and M-matrix classes parse to real storage.
    Real(RMatrix),
}

impl ParsedMatrix {
    pub fn dim(&self) -> usize {
        match self {
            ParsedMatrix::Hermitian(h) => h.dim(),
            ParsedMatrix::General(m) => m.rows(),
            ParsedMatrix::Real(m) => m.rows(),
        }
    }

    pub fn expect_hermitian(self) -> HermitianMatrix {
        match self {
            ParsedMatrix::Hermitian(h) => h,
            _ => unreachable!("parsed with MatrixClass::Hermitian"),
        }
    }

    pub fn expect_general(self) -> CMatrix {
        match self {
            ParsedMatrix::General(m) => m,
            _ => unreachable!("parsed with MatrixClass::General"),
        }
    }

    pub fn expect_real(self) -> RMatrix {
        match self {
            ParsedMatrix::Real(m) => m,
            _ => unreachable!("parsed with a real class"),
        }
    }
}

fn complex_to_real(m: &CMatrix, path: &str) -> Result<RMatrix> {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if m[(i, j)].im != 0.0 {
                return Err(Error::ClassValidation {
                    path: path.to_string(),
                    message: format!(
                        "entry ({i},{j}) has imaginary part {}; a real matrix is required",
                        m[(i, j)].im
                    ),
                });
            }
        }
    }
    Ok(RMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)].re))
}

fn validate_class(m: CMatrix, class: MatrixClass, path: &str) -> Result<ParsedMatrix> {
    match class {
        MatrixClass::General => Ok(ParsedMatrix::General(m)),
        MatrixClass::Hermitian => {
            let h = HermitianMatrix::new(m).map_err(|e| Error::ClassValidation {
                path: path.to_string(),
                message: e.to_string(),
            })?;
            Ok(ParsedMatrix::Hermitian(h))
        }
        MatrixClass::Nonnegative => {
            let r = complex_to_real(&m, path)?;
            r.require_nonnegative().map_err(|e| Error::ClassValidation {
                path: path.to_string(),
                message: e.to_string(),
            })?;
            Ok(ParsedMatrix::Real(r))
        }
        MatrixClass::MMatrix => {
            let r = complex_to_real(&m, path)?;
            validate_and_split(&r).map_err(|e| Error::ClassValidation {
                path: path.to_string(),
                message: e.to_string(),
            })?;
            Ok(ParsedMatrix::Real(r))
        }
    }
}

/// Parses `m` rows of `m` comma-separated reals.
pub fn parse_matrix_csv(text: &str, path: &str) -> Result<CMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for (colno, cell) in trimmed.split(',').enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                path: path.to_string(),
                line: lineno + 1,
                column: colno + 1,
                message: format!("not a number: `{}`", cell.trim()),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    path: path.to_string(),
                    line: lineno + 1,
                    column: colno + 1,
                    message: format!("entry `{}` is not finite", cell.trim()),
                });
            }
            row.push(v);
        }
        rows.push(row);
    }
    let m = rows.len();
    if m == 0 {
        return Err(Error::Parse {
            path: path.to_string(),
            line: 1,
            column: 1,
            message: "empty matrix file".to_string(),
        });
    }
    for (lineno, row) in rows.iter().enumerate() {
        if row.len() != m {
            return Err(Error::Parse {
                path: path.to_string(),
                line: lineno + 1,
                column: row.len(),
                message: format!("expected {m} columns, found {}", row.len()),
            });
        }
    }
    Ok(CMatrix::from_fn(m, m, |i, j| C64::new(rows[i][j], 0.0)))
}

pub fn parse_matrix_json(text: &str, path: &str) -> Result<CMatrix> {
    let parsed: MatrixJson = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: path.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    parsed.to_matrix(path)
}

/// Reads a matrix file (JSON or CSV, decided by extension with a content
/// sniff as fallback) and validates it against the expected class.
pub fn parse_matrix_file(path: &Path, class: MatrixClass) -> Result<ParsedMatrix> {
    let text = std::fs::read_to_string(path)?;
    let name = path.display().to_string();
    let looks_json = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => true,
        Some("csv") => false,
        _ => text.trim_start().starts_with('{'),
    };
    let m = if looks_json {
        parse_matrix_json(&text, &name)?
    } else {
        parse_matrix_csv(&text, &name)?
    };
    validate_class(m, class, &name)
}

pub fn write_matrix_json(m: &CMatrix, path: &Path) -> Result<()> {
    let json = to_json_17(&MatrixJson::from_matrix(m))?;
    let mut file = std::fs::File::create(path)?;
    file.write_all(json.as_bytes())?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Re-split an M-matrix parsed from a file.
pub fn split_from_parsed(m: &RMatrix) -> Result<MMatrixSplit> {
    validate_and_split(m)
}

/// Envelope for every CLI invocation's output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub command: String,
    pub inputs_digest: String,
    pub results: serde_json::Value,
    pub witnesses: Vec<serde_json::Value>,
    pub timings_ms: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(command: impl Into<String>, digest: String, results: serde_json::Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.into(),
            inputs_digest: digest,
            results,
            witnesses: Vec::new(),
            timings_ms: BTreeMap::new(),
        }
    }
}

/// SHA-256 over the given byte chunks, hex-encoded; the digest is stable
/// across platforms for identical inputs.
pub fn digest_inputs<'a>(parts: impl IntoIterator<Item = &'a [u8]>) -> String {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part);
    }
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

/// JSON with every float printed as a decimal with 17 significant digits,
/// which round-trips binary64 exactly.
struct SigDigits17;

impl serde_json::ser::Formatter for SigDigits17 {
    fn write_f64<W: ?Sized + std::io::Write>(
        &mut self,
        writer: &mut W,
        value: f64,
    ) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + std::io::Write>(
        &mut self,
        writer: &mut W,
        value: f32,
    ) -> std::io::Result<()> {
        write!(writer, "{value:e}")
    }
}

pub fn to_json_17<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigits17);
    value.serialize(&mut ser).map_err(|e| Error::Parse {
        path: "<serialize>".to_string(),
        line: 0,
        column: 0,
        message: e.to_string(),
    })?;
    Ok(String::from_utf8(out).expect("serde_json emits utf-8"))
}

pub fn report_to_json(report: &Report) -> Result<String> {
    to_json_17(report)
}

pub fn report_from_json(text: &str) -> Result<Report> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        path: "<report>".to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write;

    fn example_json() -> String {
        let a = CMatrix::from_real_rows(&[
            &[5.0, -12.0, 9.0],
            &[-12.0, 33.0, -24.0],
            &[9.0, -24.0, 19.0],
        ]);
        to_json_17(&MatrixJson::from_matrix(&a)).unwrap()
    }

    #[test]
    fn json_round_trip_of_the_example_matrix() {
        let text = example_json();
        let m = parse_matrix_json(&text, "a.json").unwrap();
        assert_eq!(m[(0, 1)].re, -12.0);
        let h = validate_class(m, MatrixClass::Hermitian, "a.json")
            .unwrap()
            .expect_hermitian();
        assert_eq!(h.max_abs(), 33.0);
    }

    #[test]
    fn csv_identity_parses_as_hermitian() {
        let m = parse_matrix_csv("1,0\n0,1\n", "id.csv").unwrap();
        let h = validate_class(m, MatrixClass::Hermitian, "id.csv")
            .unwrap()
            .expect_hermitian();
        assert_eq!(h.dim(), 2);
        assert_eq!(h.entry(0, 0).re, 1.0);
    }

    #[test]
    fn asymmetric_csv_fails_hermitian_validation() {
        let m = parse_matrix_csv("1, 2\n5, 1\n", "bad.csv").unwrap();
        let err = validate_class(m, MatrixClass::Hermitian, "bad.csv").unwrap_err();
        assert!(matches!(err, Error::ClassValidation { .. }), "{err}");
    }

    #[test]
    fn parse_errors_carry_line_and_column() {
        let err = parse_matrix_csv("1,2\n3,oops\n", "x.csv").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, 2);
            }
            other => panic!("unexpected {other}"),
        }
        let err = parse_matrix_json("{\"dim\": 2", "x.json").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        assert!(parse_matrix_csv("1,nan\ninf,1\n", "n.csv").is_err());
        let json = "{\"dim\":1,\"field\":\"real\",\"entries\":[[1e400,0.0]]}";
        // 1e400 overflows to inf during JSON parsing
        assert!(parse_matrix_json(json, "n.json").is_err());
    }

    #[test]
    fn class_validation_names_the_offending_entry() {
        let m = parse_matrix_csv("1,-2\n-2,1\n", "z.csv").unwrap();
        let err = validate_class(m, MatrixClass::Nonnegative, "z.csv").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(0,1)"), "{msg}");

        let m = parse_matrix_csv("1,2\n2,1\n", "z.csv").unwrap();
        let err = validate_class(m, MatrixClass::MMatrix, "z.csv").unwrap_err();
        assert!(err.to_string().contains("positive"), "{err}");
    }

    #[test]
    fn file_dispatch_by_extension_and_sniff() {
        let dir = tempfile::tempdir().unwrap();
        let json_path = dir.path().join("m.json");
        std::fs::write(&json_path, example_json()).unwrap();
        let parsed = parse_matrix_file(&json_path, MatrixClass::Hermitian).unwrap();
        assert_eq!(parsed.dim(), 3);

        let csv_path = dir.path().join("m.csv");
        std::fs::write(&csv_path, "2,0\n0,2\n").unwrap();
        let parsed = parse_matrix_file(&csv_path, MatrixClass::MMatrix).unwrap();
        assert_eq!(parsed.dim(), 2);

        let odd_path = dir.path().join("matrix.txt");
        let mut f = std::fs::File::create(&odd_path).unwrap();
        writeln!(f, "{}", example_json()).unwrap();
        let parsed = parse_matrix_file(&odd_path, MatrixClass::General).unwrap();
        assert_eq!(parsed.dim(), 3);
    }

    #[test]
    fn csv_and_json_parsers_agree_to_the_last_bit() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = 1 + rng.gen::<usize>() % 4;
            let vals: Vec<f64> = (0..n * n).map(|_| rng.gen::<f64>() * 2e2 - 1e2).collect();
            // both files carry the same 17-significant-digit decimals
            let csv: String = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| format!("{:.16e}", vals[i * n + j]))
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect::<Vec<_>>()
                .join("\n");
            let entries: Vec<String> = vals.iter().map(|v| format!("[{v:.16e},0.0]")).collect();
            let json = format!(
                "{{\"dim\":{n},\"field\":\"real\",\"entries\":[{}]}}",
                entries.join(",")
            );
            let from_csv = parse_matrix_csv(&csv, "a.csv").unwrap();
            let from_json = parse_matrix_json(&json, "a.json").unwrap();
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(
                        from_csv[(i, j)].re.to_bits(),
                        from_json[(i, j)].re.to_bits()
                    );
                }
            }
        }
    }

    #[test]
    fn seventeen_digit_floats_round_trip() {
        let vals = [1.0 / 3.0, 2.0f64.sqrt(), 1e-300, -0.0, 33.0];
        let json = to_json_17(&vals.to_vec()).unwrap();
        let back: Vec<f64> = serde_json::from_str(&json).unwrap();
        for (a, b) in vals.iter().zip(&back) {
            assert_eq!(a.to_bits(), b.to_bits(), "{a} vs {b}");
        }
    }

    #[test]
    fn report_round_trip() {
        let mut r = Report::new(
            "classify",
            digest_inputs([b"abc".as_slice()]),
            serde_json::json!({"verdict": "modular", "min_delta": 0.0}),
        );
        r.timings_ms.insert("total".into(), 1.25);
        r.witnesses.push(serde_json::json!({"i": [0], "j": [1]}));
        let text = report_to_json(&r).unwrap();
        let back = report_from_json(&text).unwrap();
        assert_eq!(back.schema_version, "1");
        assert_eq!(back.command, r.command);
        assert_eq!(back.inputs_digest, r.inputs_digest);
        assert_eq!(back.results, r.results);
        assert_eq!(back.witnesses, r.witnesses);
        assert_eq!(back.timings_ms, r.timings_ms);
    }

    #[test]
    fn digest_is_stable_and_order_sensitive() {
        let d1 = digest_inputs([b"a".as_slice(), b"b".as_slice()]);
        let d2 = digest_inputs([b"a".as_slice(), b"b".as_slice()]);
        let d3 = digest_inputs([b"ab".as_slice()]);
        assert_eq!(d1, d2);
        assert_ne!(d1, d3, "length framing distinguishes concatenations");
        assert_eq!(d1.len(), 64);
    }

    proptest! {
        #[test]
        fn matrix_json_round_trips_bit_exactly(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = 1 + (seed as usize % 4);
            let m = CMatrix::from_fn(n, n, |_, _| {
                C64::new(rng.gen::<f64>() * 2e3 - 1e3, rng.gen::<f64>())
            });
            let text = to_json_17(&MatrixJson::from_matrix(&m)).unwrap();
            let back = parse_matrix_json(&text, "prop.json").unwrap();
            for i in 0..n {
                for j in 0..n {
                    prop_assert_eq!(m[(i, j)].re.to_bits(), back[(i, j)].re.to_bits());
                    prop_assert_eq!(m[(i, j)].im.to_bits(), back[(i, j)].im.to_bits());
                }
            }
        }
    }
}
