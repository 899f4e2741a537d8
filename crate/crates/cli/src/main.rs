//! `almostrep` command-line front end.
//!
//! Exit status: 0 on success, 1 when a hypothesis or check fails (a
//! `reason=<tag>` line goes to stderr), 2 on I/O or malformed input files.

mod rows;

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use almostrep::cocycle::{cocycle_checks, connes_extract, twisted_regular_rep, Cocycle2, ConnesOptions};
use almostrep::group::{abelian_pair_group, cyclic_group, sl2_mod_generators, FiniteGroup, GeneratingSet};
use almostrep::hyperfinite::{check_certificate, find_blocks, FinderOptions, HyperfiniteCertificate};
use almostrep::linalg::{read_matrix, write_matrix, CMat, CVec, Tolerances};
use almostrep::rep::{NormKind, UnitaryRep};
use almostrep::report::{write_report, Record, ReportFormat};
use almostrep::rigidity::{CornerPair, RigidityOptions};
use almostrep::sl2::{scan, CongruenceKind, ScanOptions};
use almostrep::spectral::{almost_gap_check, laplacian_spectrum, sos_consequence_check, SosCertificate};
use almostrep::Error;
use clap::{Parser, Subcommand, ValueEnum};

use rows::{CocycleRow, ConnesRow, DefectRow, HyperfiniteRow, ResidualRow};

/// Largest finite group the `cocycle` subcommand will enumerate.
const MAX_GROUP_ORDER: usize = 4096;

#[derive(Parser, Debug)]
#[command(name = "almostrep", version, about = "Almost representations: defects, spectral gaps, rigidity and cocycles")]
struct Cli {
    /// Unitarity tolerance for matrices read from disk.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    /// Seed for randomized routines.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report path; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "csv")]
    format: ReportFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NormArg {
    Hs,
    Op,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Average,
    Minnorm,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Regular,
    Pline,
    Both,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Relator and pair defects of a representation file.
    Defect {
        #[arg(long)]
        rep: PathBuf,
        /// Word in the generator names, e.g. `a^3`; repeatable.
        #[arg(long = "relator")]
        relators: Vec<String>,
        /// Check all pairs from the Cayley ball of this radius.
        #[arg(long, default_value_t = 1)]
        radius: usize,
        #[arg(long, value_enum, default_value = "hs")]
        norm: NormArg,
    },
    /// Spectral mass of [alpha, lambda - alpha] for the Laplacian image.
    Gap {
        #[arg(long)]
        rep: PathBuf,
        /// Decimal or `p/q`.
        #[arg(long)]
        lambda: String,
        /// Defaults to lambda/4.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
    },
    /// Verifies a sum-of-squares certificate and its spectral consequence.
    SosCheck {
        #[arg(long)]
        rep: PathBuf,
        #[arg(long)]
        cert: PathBuf,
        /// Defect to use; measured when omitted.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Checks or searches for a block subalgebra approximating a tuple.
    Hyperfinite {
        /// Matrix file; repeatable, one per tuple entry.
        #[arg(long = "matrix", required = true)]
        matrices: Vec<PathBuf>,
        #[arg(long, conflicts_with = "find")]
        check: Option<PathBuf>,
        #[arg(long)]
        find: bool,
        #[arg(long, default_value_t = 1e-8)]
        epsilon: f64,
        /// Where to write the certificate found by `--find`.
        #[arg(long)]
        cert_out: Option<PathBuf>,
    },
    /// Approximate intertwiner between two representations in a corner.
    Intertwine {
        #[arg(long)]
        pi: PathBuf,
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        proj: PathBuf,
        #[arg(long, default_value_t = 2)]
        radius: usize,
        #[arg(long, value_enum, default_value = "minnorm")]
        method: Method,
        /// Where to write the intertwiner matrix.
        #[arg(long)]
        xi_out: Option<PathBuf>,
    },
    /// Extracts an almost invariant vector from an almost invariant operator.
    Connes {
        /// Unitary matrix file; repeatable.
        #[arg(long = "unitary")]
        unitaries: Vec<PathBuf>,
        #[arg(long)]
        t: PathBuf,
        /// n x 1 matrix file.
        #[arg(long)]
        witness: PathBuf,
        #[arg(long, default_value_t = 0.125)]
        epsilon: f64,
        #[arg(long)]
        theta0: Option<f64>,
    },
    /// Cocycle identity and commuting-pair obstruction on a finite group.
    Cocycle {
        /// `cyclic:n`, `zn2:n` or `sl2:n`.
        #[arg(long)]
        group: String,
        /// `trivial`, `heisenberg:n`, `coboundary:<file>` or `table:<file>`.
        #[arg(long)]
        cocycle: String,
        /// Also report the defect of the twisted regular representation.
        #[arg(long)]
        twisted: bool,
    },
    /// Defect and distance bounds over congruence representations.
    Sl2Scan {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        nmax: u64,
        #[arg(long, value_enum, default_value = "both")]
        kind: KindArg,
        #[arg(long, default_value_t = 100)]
        search_iters: usize,
        /// Write 0 for wall-clock times so runs are byte-identical.
        #[arg(long)]
        no_timing: bool,
    },
}

#[derive(Debug)]
enum CliError {
    /// Exit 2.
    Input { path: Option<PathBuf>, message: String },
    /// Exit 1.
    Failed { reason: &'static str, message: String },
}

impl CliError {
    fn failed(reason: &'static str, message: impl Into<String>) -> Self {
        CliError::Failed { reason, message: message.into() }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Input { .. } => 2,
            CliError::Failed { .. } => 1,
        }
    }

    fn reason(&self) -> &'static str {
        match self {
            CliError::Input { .. } => "io",
            CliError::Failed { reason, .. } => reason,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input { path: Some(p), message } => write!(f, "{}: {message}", p.display()),
            CliError::Input { path: None, message } => f.write_str(message),
            CliError::Failed { message, .. } => f.write_str(message),
        }
    }
}

/// Library errors raised outside file loading.
impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => CliError::Input { path: None, message: e.to_string() },
            Error::Hypothesis(_) => CliError::failed("hypothesis", e.to_string()),
            _ => CliError::failed("validation", e.to_string()),
        }
    }
}

/// Maps a load failure: unreadable or malformed content exits 2 and names
/// the path; content that parses but violates a requirement exits 1.
fn load<T>(path: &Path, f: impl FnOnce(&Path) -> almostrep::Result<T>) -> Result<T, CliError> {
    f(path).map_err(|e| match e {
        Error::Io(_) | Error::Json(_) | Error::Parse(_) | Error::NonFinite | Error::NotSquare { .. } => {
            CliError::Input { path: Some(path.to_path_buf()), message: e.to_string() }
        }
        other => match CliError::from(other) {
            CliError::Failed { reason, message } => {
                CliError::failed(reason, format!("{}: {message}", path.display()))
            }
            input => input,
        },
    })
}

fn parse_number(text: &str) -> Result<f64, CliError> {
    let bad = || CliError::failed("validation", format!("`{text}` is not a number or p/q fraction"));
    match text.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0.0 {
                return Err(bad());
            }
            Ok(p / q)
        }
        None => text.trim().parse().map_err(|_| bad()),
    }
}

fn parse_group(desc: &str) -> Result<GeneratingSet, CliError> {
    let bad = || CliError::failed("validation", format!("unknown group `{desc}` (cyclic:n | zn2:n | sl2:n)"));
    let (name, n) = desc.split_once(':').ok_or_else(bad)?;
    let n: u64 = n.parse().map_err(|_| bad())?;
    Ok(match name {
        "cyclic" => cyclic_group(n)?,
        "zn2" => abelian_pair_group(n)?,
        "sl2" => sl2_mod_generators(n)?,
        _ => return Err(bad()),
    })
}

fn require_seed(seed: Option<u64>, what: &str) -> Result<u64, CliError> {
    seed.ok_or_else(|| CliError::failed("missing-seed", format!("{what} is randomized; pass --seed")))
}

fn emit<T: Record>(cli: &Cli, rows: &[T]) -> Result<(), CliError> {
    write_report(rows, cli.format, cli.out.as_deref()).map_err(|e| match e {
        Error::Io(io) => CliError::Input { path: cli.out.clone(), message: io.to_string() },
        other => other.into(),
    })
}

fn check_passed(pass: bool, what: &str) -> Result<(), CliError> {
    if pass {
        Ok(())
    } else {
        Err(CliError::failed("check-failed", format!("{what} check failed")))
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if !(cli.tol.is_finite() && cli.tol > 0.0) {
        return Err(CliError::failed("validation", format!("--tol must be positive, got {}", cli.tol)));
    }
    let tol = Tolerances { unitary: cli.tol, ..Tolerances::default() };
    match &cli.command {
        Command::Defect { rep, relators, radius, norm } => {
            let rep = load(rep, |p| UnitaryRep::read(p, &tol))?;
            let words = relators.iter().map(|r| rep.parse_word(r)).collect::<almostrep::Result<Vec<_>>>()?;
            let ball = rep.generating_set().cayley_ball(*radius)?;
            let pairs: Vec<_> =
                ball.iter().flat_map(|g| ball.iter().map(move |h| (g.clone(), h.clone()))).collect();
            let norm = match norm {
                NormArg::Hs => NormKind::Hs,
                NormArg::Op => NormKind::Op,
            };
            let report = rep.defect_report(&words, &pairs, norm)?;
            let mut out: Vec<DefectRow> = report
                .per_relator
                .iter()
                .map(|r| DefectRow { kind: "relator".into(), item: r.relator.clone(), defect: r.defect })
                .collect();
            out.extend(report.pairs_checked.iter().map(|d| DefectRow {
                kind: "pair".into(),
                item: format!("{} {}", d.g, d.h),
                defect: d.defect,
            }));
            out.push(DefectRow { kind: "max".into(), item: String::new(), defect: report.max_defect });
            emit(cli, &out)
        }
        Command::Gap { rep, lambda, alpha, epsilon } => {
            let rep = load(rep, |p| UnitaryRep::read(p, &tol))?;
            let lambda = parse_number(lambda)?;
            let measure = laplacian_spectrum(&rep, &tol)?;
            let report = almost_gap_check(&measure, lambda, alpha.unwrap_or(lambda / 4.0), *epsilon)?;
            emit(cli, std::slice::from_ref(&report))?;
            check_passed(report.pass, "spectral gap")
        }
        Command::SosCheck { rep, cert, epsilon } => {
            let rep = load(rep, |p| UnitaryRep::read(p, &tol))?;
            let cert = load(cert, SosCertificate::read)?;
            let report = sos_consequence_check(&rep, rep.generating_set(), &cert, *epsilon, &tol)?;
            emit(cli, std::slice::from_ref(&report))?;
            check_passed(report.pass, "spectral containment")
        }
        Command::Hyperfinite { matrices, check, find, epsilon, cert_out } => {
            let tuple: Vec<CMat> = matrices.iter().map(|p| load(p, read_matrix)).collect::<Result<_, _>>()?;
            let (mode, cert) = match (check, find) {
                (Some(path), false) => ("check", load(path, |p| HyperfiniteCertificate::read(p, cli.tol))?),
                (None, true) => {
                    let seed = require_seed(cli.seed, "--find")?;
                    let cert = find_blocks(&tuple, &FinderOptions::new(*epsilon, seed))?;
                    if let Some(path) = cert_out {
                        load(path, |p| cert.write(p))?;
                    }
                    ("find", cert)
                }
                _ => return Err(CliError::failed("validation", "pass exactly one of --check or --find")),
            };
            let outcome = check_certificate(&tuple, &cert)?;
            let q = &cert.subalgebra;
            let blocks: Vec<String> = q.blocks().iter().map(|(s, m)| format!("{s}x{m}")).collect();
            let row = HyperfiniteRow {
                mode: mode.into(),
                pass: outcome.pass,
                epsilon_measured: outcome.epsilon_measured,
                d_measured: outcome.d_measured,
                dimension: q.dimension(),
                blocks: blocks.join(";"),
            };
            emit(cli, &[row])?;
            check_passed(outcome.pass, "certificate")
        }
        Command::Intertwine { pi, rho, proj, radius, method, xi_out } => {
            let pi = load(pi, |p| UnitaryRep::read(p, &tol))?;
            let rho = load(rho, |p| UnitaryRep::read(p, &tol))?;
            let proj = load(proj, read_matrix)?;
            let pair = CornerPair::new(&pi, &rho, &proj, tol.herm)?;
            let opts = RigidityOptions { test_radius: *radius, ..RigidityOptions::default() };
            let result = match method {
                Method::Average => pair.averaging_intertwiner(&[], &opts)?,
                Method::Minnorm => pair.bounded_intertwiner(*radius, &opts)?,
            };
            if let Some(path) = xi_out {
                load(path, |p| write_matrix(p, &result.xi))?;
            }
            let mut err = std::io::stderr().lock();
            let summary = [
                ("status", format!("{:?}", result.status).to_lowercase()),
                ("iterations", result.iterations.to_string()),
                ("normalized_distance_to_p", result.normalized_distance_to_p.to_string()),
                ("hs_norm_ratio", result.hs_norm_ratio.to_string()),
                ("op_norm", result.op_norm.to_string()),
                ("delta", result.delta.to_string()),
                ("op_bound", result.op_bound.to_string()),
                ("distance_bound", result.distance_bound.to_string()),
                ("max_residual", result.max_residual().to_string()),
            ];
            for (k, v) in summary {
                let _ = writeln!(err, "{k}: {v}");
            }
            let rows: Vec<ResidualRow> = result
                .residuals
                .iter()
                .map(|r| ResidualRow { element: r.element.clone(), residual: r.value })
                .collect();
            emit(cli, &rows)
        }
        Command::Connes { unitaries, t, witness, epsilon, theta0 } => {
            let us: Vec<CMat> = unitaries.iter().map(|p| load(p, read_matrix)).collect::<Result<_, _>>()?;
            let t = load(t, read_matrix)?;
            let w = load(witness, read_matrix)?;
            if w.ncols() != 1 {
                return Err(CliError::Input {
                    path: Some(witness.clone()),
                    message: format!("witness must be a column, got {}x{}", w.nrows(), w.ncols()),
                });
            }
            let w = CVec::from_column_slice(w.as_slice());
            let mut opts = ConnesOptions { epsilon_claim: *epsilon, ..ConnesOptions::default() };
            if let Some(t0) = theta0 {
                opts.theta0 = *t0;
            }
            let r = connes_extract(&us, &t, &w, &opts, &tol)?;
            let row = ConnesRow {
                lambda1: r.lambda1,
                lambda2: r.lambda2,
                min_overlap: r.min_overlap,
                overlap_bound: r.overlap_bound,
                epsilon_measured: r.epsilon_measured,
                witness_distance: r.witness_distance,
                lambda1_ok: r.lambda1_ok,
                simple_top: r.simple_top,
                overlap_ok: r.overlap_ok,
                pass: r.pass(),
            };
            emit(cli, &[row])?;
            check_passed(r.pass(), "almost invariant vector")
        }
        Command::Cocycle { group, cocycle, twisted } => {
            let gens = parse_group(group)?;
            let g = FiniteGroup::generate(&gens, MAX_GROUP_ORDER)?;
            let c = match cocycle.split_once(':') {
                Some(("coboundary" | "table", path)) => {
                    load(Path::new(path), |_| Cocycle2::from_descriptor(cocycle, gens.kind()))?
                }
                _ => Cocycle2::from_descriptor(cocycle, gens.kind())?,
            };
            let report = cocycle_checks(&c, g.elements())?;
            let twisted_defect = if *twisted { Some(twisted_regular_rep(&g, &c)?.defect(None)?) } else { None };
            let row = CocycleRow {
                group: group.clone(),
                cocycle: cocycle.clone(),
                order: g.order(),
                triples_checked: report.triples_checked,
                max_identity_violation: report.max_identity_violation,
                max_modulus_violation: report.max_modulus_violation,
                non_coboundary: report.non_coboundary,
                twisted_defect,
            };
            emit(cli, &[row])
        }
        Command::Sl2Scan { p, nmax, kind, search_iters, no_timing } => {
            let seed = require_seed(cli.seed, "sl2-scan")?;
            let kinds = match kind {
                KindArg::Regular => vec![CongruenceKind::Regular],
                KindArg::Pline => vec![CongruenceKind::ProjectiveLine],
                KindArg::Both => vec![CongruenceKind::Regular, CongruenceKind::ProjectiveLine],
            };
            let rows = scan(&ScanOptions {
                p: *p,
                nmax: *nmax,
                kinds,
                search_iters: *search_iters,
                seed,
                timing: !no_timing,
            })?;
            emit(cli, &rows)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("reason={}", e.reason());
            ExitCode::from(e.code())
        }
    }
}
