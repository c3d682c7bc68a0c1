//! Command-line surface: every subcommand parses its inputs, runs the
//! corresponding library operation, and emits a JSON report to stdout (and
//! optionally to --report). Exit codes: 0 on success, 2 when a checked
//! inequality or reproduction fails, 1 on usage and parse errors.

use std::io::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use specmod::cur::{cur_build, greedy_select, mu_k_exhaustive};
use specmod::error::Error;
use specmod::io::{
    digest_inputs, parse_matrix_file, report_to_json, to_json_17, write_matrix_json, MatrixClass,
    Report,
};
use specmod::mmatrix::{eig_trace_symmetric, series_trace, validate_and_split};
use specmod::setfun::{classify_modularity, is_nondecreasing};
use specmod::specfun::SpectralFunction;
use specmod::subspace::{subspace_delta, Subspace};
use specmod::verify::{
    block_identities_check, ensembles, run_reference_examples, table1_scan, tridiagonal_block_example,
};
use specmod::{HermitianMatrix, IndexSet};

#[derive(Parser)]
#[command(
    name = "specmod",
    about = "Spectral set functions of principal submatrices: modularity classification, \
             M-matrix traces, subspace compressions, and greedy maximal-volume CUR selection",
    version
)]
struct Cli {
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,

    /// Worker threads for the parallel scans (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct MatrixArg {
    /// Matrix file, JSON ({"dim", "field", "entries"}) or CSV.
    #[arg(long)]
    matrix: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Classify I -> tr f(A[I]) as submodular / supermodular / modular /
    /// neither by exhaustive pair enumeration.
    Classify {
        #[command(flatten)]
        matrix: MatrixArg,
        /// Spectral function: power:<p> | xlogx | log.
        #[arg(long)]
        function: String,
        /// Classification tolerance (default: 1e-9 * max(1, |w|_max)).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Check whether I -> tr f(A[I]) is nondecreasing (covering pairs).
    Monotone {
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(long)]
        function: String,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Greedy maximal-volume selection plus the CUR reconstruction and its
    /// entrywise error bound. Exits 2 if the bound fails.
    Cur {
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(short)]
        k: usize,
    },
    /// Exhaustive maximal k x k volume (optionally principal-only).
    MuK {
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(short)]
        k: usize,
        #[arg(long)]
        principal_only: bool,
    },
    /// Trace of f over an M-matrix through the certified power series.
    MmatrixTrace {
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(long)]
        function: String,
        /// Series truncation tolerance.
        #[arg(long, default_value_t = 1e-11)]
        tol: f64,
    },
    /// Sampled subspace-lattice check of the guaranteed modularity
    /// directions on frame-compatible pairs. Exits 2 on violations.
    SubspaceCheck {
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Check a single function instead of the default power:0.5,
        /// power:1.5, power:2 sweep; must have a guaranteed direction.
        #[arg(long)]
        function: Option<String>,
    },
    /// Reproduce the power-regime summary table. Exits 2 if a guaranteed
    /// row fails or a violation witness cannot be constructed.
    Table1 {
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write per-(row, size, exponent) scan data as CSV.
        #[arg(long)]
        emit_csv: Option<PathBuf>,
    },
    /// Recompute every fixed counterexample value and the block trace
    /// identities. Exits 2 on any mismatch.
    ReproducePaper {
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write the fixed example matrices as JSON files.
    ExamplesDump {
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    if cli.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code_for(&e));
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::RegimeFailure { .. } | Error::SearchExhausted { .. } => 2,
        _ => 1,
    }
}

/// Whether the set function of `f` is guaranteed submodular (true) or
/// supermodular (false) on PSD input.
fn guaranteed_direction(f: &SpectralFunction) -> Result<bool, Error> {
    match f {
        SpectralFunction::Power(p) if (0.0..=1.0).contains(p) => Ok(true),
        SpectralFunction::Power(p) if (1.0..=2.0).contains(p) => Ok(false),
        SpectralFunction::Log => Ok(true),
        SpectralFunction::XLogX => Ok(false),
        other => Err(Error::InvalidParameter {
            detail: format!("no guaranteed modularity direction for {other}"),
        }),
    }
}

struct Timings {
    start: Instant,
    parse_ms: f64,
}

impl Timings {
    fn new() -> Self {
        Self {
            start: Instant::now(),
            parse_ms: 0.0,
        }
    }

    fn mark_parsed(&mut self) {
        self.parse_ms = self.start.elapsed().as_secs_f64() * 1e3;
    }

    fn fill(&self, report: &mut Report) {
        let total = self.start.elapsed().as_secs_f64() * 1e3;
        report.timings_ms.insert("parse".into(), self.parse_ms);
        report
            .timings_ms
            .insert("compute".into(), total - self.parse_ms);
        report.timings_ms.insert("total".into(), total);
    }
}

fn digest_of(path: &PathBuf, extra: &str) -> Result<String, Error> {
    let bytes = std::fs::read(path)?;
    Ok(digest_inputs([bytes.as_slice(), extra.as_bytes()]))
}

fn emit(cli: &Cli, mut report: Report, timings: &Timings, exit: i32) -> Result<i32, Error> {
    timings.fill(&mut report);
    let text = report_to_json(&report)?;
    println!("{text}");
    if let Some(path) = &cli.report {
        let mut f = std::fs::File::create(path)?;
        f.write_all(text.as_bytes())?;
        f.write_all(b"\n")?;
    }
    Ok(exit)
}

fn run(cli: &Cli) -> Result<i32, Error> {
    let mut timings = Timings::new();
    match &cli.command {
        Command::Classify {
            matrix,
            function,
            tol,
        } => {
            let f: SpectralFunction = function.parse()?;
            let a = parse_matrix_file(&matrix.matrix, MatrixClass::Hermitian)?.expect_hermitian();
            timings.mark_parsed();
            let rep = classify_modularity(&a, &f, *tol)?;
            let digest = digest_of(&matrix.matrix, &format!("classify:{function}:{tol:?}"))?;
            let mut report = Report::new("classify", digest, serde_json::to_value(&rep).unwrap());
            for w in rep
                .submodularity_violations
                .iter()
                .chain(&rep.supermodularity_violations)
            {
                report.witnesses.push(serde_json::to_value(w).unwrap());
            }
            emit(cli, report, &timings, 0)
        }
        Command::Monotone {
            matrix,
            function,
            tol,
        } => {
            let f: SpectralFunction = function.parse()?;
            let a = parse_matrix_file(&matrix.matrix, MatrixClass::Hermitian)?.expect_hermitian();
            timings.mark_parsed();
            let rep = is_nondecreasing(&a, &f, *tol)?;
            let digest = digest_of(&matrix.matrix, &format!("monotone:{function}:{tol:?}"))?;
            let report = Report::new("monotone", digest, serde_json::to_value(&rep).unwrap());
            emit(cli, report, &timings, 0)
        }
        Command::Cur { matrix, k } => {
            let a = parse_matrix_file(&matrix.matrix, MatrixClass::Hermitian)?.expect_hermitian();
            timings.mark_parsed();
            let selection = greedy_select(&a, *k)?;
            let digest = digest_of(&matrix.matrix, &format!("cur:{k}"))?;
            let (results, ok) = if selection.degenerate {
                (
                    json!({
                        "selection": selection,
                        "cur": Value::Null,
                        "bound_holds": Value::Null,
                        "note": "zero-pivot exit: the matrix has rank below k",
                    }),
                    true,
                )
            } else {
                let cur = cur_build(&a, &selection.indices)?;
                let holds = match cur.bound.as_f64() {
                    Some(b) => cur.achieved_error <= b + 1e-8,
                    None => true,
                };
                (
                    json!({
                        "selection": selection,
                        "cur": cur,
                        "bound_holds": holds,
                    }),
                    holds,
                )
            };
            let report = Report::new("cur", digest, results);
            emit(cli, report, &timings, if ok { 0 } else { 2 })
        }
        Command::MuK {
            matrix,
            k,
            principal_only,
        } => {
            let a = parse_matrix_file(&matrix.matrix, MatrixClass::General)?.expect_general();
            timings.mark_parsed();
            let mu = mu_k_exhaustive(&a, *k, *principal_only)?;
            let digest = digest_of(&matrix.matrix, &format!("mu-k:{k}:{principal_only}"))?;
            let report = Report::new("mu-k", digest, serde_json::to_value(&mu).unwrap());
            emit(cli, report, &timings, 0)
        }
        Command::MmatrixTrace {
            matrix,
            function,
            tol,
        } => {
            let f: SpectralFunction = function.parse()?;
            let m = parse_matrix_file(&matrix.matrix, MatrixClass::MMatrix)?.expect_real();
            timings.mark_parsed();
            let split = validate_and_split(&m)?;
            let value = series_trace(&split, &f, *tol)?;
            // symmetric inputs admit the eigendecomposition cross-check
            let symmetric = (0..m.rows()).all(|i| (0..m.cols()).all(|j| m[(i, j)] == m[(j, i)]));
            let eig_value = if symmetric {
                Some(eig_trace_symmetric(&m, &f)?)
            } else {
                None
            };
            let digest = digest_of(&matrix.matrix, &format!("mmatrix-trace:{function}:{tol}"))?;
            let report = Report::new(
                "mmatrix-trace",
                digest,
                json!({
                    "s": split.s,
                    "rho": split.rho,
                    "singular": split.singular,
                    "value": value,
                    "eig_value": eig_value,
                }),
            );
            emit(cli, report, &timings, 0)
        }
        Command::SubspaceCheck {
            matrix,
            samples,
            seed,
            function,
        } => {
            let a = parse_matrix_file(&matrix.matrix, MatrixClass::Hermitian)?.expect_hermitian();
            // (function, direction): true checks submodularity, false
            // supermodularity
            let checks: Vec<(SpectralFunction, bool)> = match function {
                None => vec![
                    (SpectralFunction::Power(0.5), true),
                    (SpectralFunction::Power(1.5), false),
                    (SpectralFunction::Power(2.0), false),
                ],
                Some(s) => {
                    let f: SpectralFunction = s.parse()?;
                    let submodular = guaranteed_direction(&f)?;
                    vec![(f, submodular)]
                }
            };
            timings.mark_parsed();
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            let m = a.dim();
            let tol = 1e-8 * a.trace().abs().max(1.0);
            let mut violations = 0usize;
            let mut min_delta = 0.0f64;
            let mut max_delta = 0.0f64;
            for _ in 0..*samples {
                let (u, v) = ensembles::random_compatible_pair(m, &mut rng);
                for (f, submodular) in &checks {
                    let d = subspace_delta(&a, f, &u, &v)?;
                    min_delta = min_delta.min(d);
                    max_delta = max_delta.max(d);
                    if *submodular && d < -tol {
                        violations += 1;
                    }
                    if !*submodular && d > tol {
                        violations += 1;
                    }
                }
            }
            // coordinate subspaces must agree with the index-set path
            // (only expressible while subsets fit in a bitmask)
            let coordinate_gap = if m <= specmod::indexset::MAX_DIM {
                let i = IndexSet::singleton(m, 0)?;
                let j = i.complement();
                let d_idx = specmod::setfun::delta(&a, &SpectralFunction::Power(2.0), &i, &j)?
                    .expect_finite("index defect")?;
                let d_sub = subspace_delta(
                    &a,
                    &SpectralFunction::Power(2.0),
                    &Subspace::coordinate(&i),
                    &Subspace::coordinate(&j),
                )?;
                (d_idx - d_sub).abs()
            } else {
                0.0
            };
            let ok = violations == 0 && coordinate_gap <= 1e-9 * a.trace().abs().max(1.0);
            let digest = digest_of(&matrix.matrix, &format!("subspace-check:{samples}:{seed}"))?;
            let report = Report::new(
                "subspace-check",
                digest,
                json!({
                    "samples": samples,
                    "violations": violations,
                    "min_delta": min_delta,
                    "max_delta": max_delta,
                    "coordinate_gap": coordinate_gap,
                }),
            );
            emit(cli, report, &timings, if ok { 0 } else { 2 })
        }
        Command::Table1 {
            samples,
            seed,
            emit_csv,
        } => {
            timings.mark_parsed();
            let scan = table1_scan(*samples, *seed)?;
            if let Some(path) = emit_csv {
                let mut f = std::fs::File::create(path)?;
                writeln!(f, "row,m,p,samples,min_delta,max_delta,violations")?;
                for r in &scan.detail {
                    writeln!(
                        f,
                        "{},{},{},{},{:.16e},{:.16e},{}",
                        r.row, r.m, r.p, r.samples, r.min_delta, r.max_delta, r.violations
                    )?;
                }
            }
            let digest = digest_inputs([format!("table1:{samples}:{seed}").as_bytes()]);
            let report = Report::new("table1", digest, serde_json::to_value(&scan.rows).unwrap());
            emit(cli, report, &timings, 0)
        }
        Command::ReproducePaper { samples, seed } => {
            timings.mark_parsed();
            let examples = run_reference_examples()?;
            let blocks = block_identities_check(*samples, *seed)?;
            let ok = examples.all_pass && blocks.all_pass;
            let digest = digest_inputs([format!("reproduce-paper:{samples}:{seed}").as_bytes()]);
            let report = Report::new(
                "reproduce-paper",
                digest,
                json!({
                    "examples": examples,
                    "block_identities": blocks,
                    "all_pass": ok,
                }),
            );
            emit(cli, report, &timings, if ok { 0 } else { 2 })
        }
        Command::ExamplesDump { out } => {
            timings.mark_parsed();
            std::fs::create_dir_all(out)?;
            let fixtures: [(&str, HermitianMatrix); 4] = [
                ("inverse_power_3x3.json", specmod::verify::inverse_power_example()),
                ("operator_convex_3x3.json", specmod::verify::operator_convex_example()),
                ("corner_block_3x3.json", specmod::verify::corner_block_example()),
                ("tridiagonal_3x3.json", tridiagonal_block_example(1.0, 2.0)),
            ];
            let mut written = Vec::new();
            for (name, matrix) in &fixtures {
                let path = out.join(name);
                write_matrix_json(matrix.as_matrix(), &path)?;
                written.push(path.display().to_string());
            }
            let digest = digest_inputs([to_json_17(&written).unwrap().as_bytes()]);
            let report = Report::new("examples-dump", digest, json!({ "written": written }));
            emit(cli, report, &timings, 0)
        }
    }
}
