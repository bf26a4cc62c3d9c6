use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pg4q::families::{self, Verdict};
use pg4q::format::FamilyFile;
use pg4q::gf::Field;
use pg4q::pg::Geometry;
use pg4q::quadric::{self, QuadraticForm};
use pg4q::quasi::{self, QuasiCandidate, Strategy};

/// Exact computations with the parabolic quadric Q(4,q), q even.
#[derive(Parser)]
#[command(name = "pg4q", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Incidence spectra of the hyperbolic solids of Q(4,q) with points, lines and planes.
    VerifyLemma1 {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        modulus: Option<u32>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the characterization pipeline on a solid family.
    Characterize {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Write the canonical quadric or one of its solid classes.
    Export {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        what: What,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        modulus: Option<u32>,
    },
    /// Quasi-quadric predicate and search.
    Quasi {
        #[command(subcommand)]
        command: QuasiCommand,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum What {
    Quadric,
    Hyperbolic,
    Elliptic,
    Tangent,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Switching,
    RandomRestart,
}

#[derive(Subcommand)]
enum QuasiCommand {
    /// Check a point file (with nucleus= header) against the definition.
    Check {
        #[arg(long)]
        points: PathBuf,
    },
    /// Exhaustive search at q=2, seeded search at q=4 or 8.
    Search {
        #[arg(long)]
        q: usize,
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        budget: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::Switching)]
        strategy: StrategyArg,
        /// Write each found quasi-quadric as a point file here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

/// Failure that maps to exit code 2.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

fn geometry(q: usize, modulus: Option<u32>) -> Result<Geometry, Usage> {
    Ok(Geometry::new(Field::with_order(q, modulus)?))
}

fn read_file(path: &Path) -> Result<FamilyFile, Usage> {
    let text = fs::read_to_string(path).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
    FamilyFile::parse(&text).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Usage> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn verify_lemma1(q: usize, modulus: Option<u32>, json: Option<PathBuf>) -> Result<ExitCode, Usage> {
    let geom = geometry(q, modulus)?;
    let report = families::verify_lemma1(&geom, &QuadraticForm::canonical_q4())?;
    let show = |name: &str, sp: &pg4q::sets::Spectrum, ok: bool| {
        let vals: Vec<String> = sp.iter().map(|(v, c)| format!("{v}x{c}")).collect();
        println!("{name:<7} {} {}", if ok { "ok  " } else { "FAIL" }, vals.join(" "));
    };
    println!("q={} mod={}", geom.q(), geom.field().modulus());
    show("points", &report.points, report.points_ok && report.point_multiplicities_ok);
    show("lines", &report.lines, report.lines_ok);
    show("planes", &report.planes, report.planes_ok);
    if let Some(path) = json {
        #[derive(Serialize)]
        struct Out<'a> {
            q: usize,
            modulus: u32,
            #[serde(flatten)]
            report: &'a families::Lemma1Spectra,
        }
        write_json(&path, &Out { q: geom.q(), modulus: geom.field().modulus(), report: &report })?;
    }
    Ok(if report.all_ok() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn characterize(family: &Path, json: Option<PathBuf>) -> Result<ExitCode, Usage> {
    let file = read_file(family)?;
    let geom = file.geometry()?;
    let h = file.solid_family(&geom)?;
    let report = families::characterize(&geom, &h)?;
    println!("q={} mod={} |H|={}", report.q, report.modulus, report.family_size);
    println!("verdict: {}", report.verdict.kind());
    for i in report.failed_identities() {
        println!("failed identity {}: {} != {}", i.name, i.lhs, i.rhs);
    }
    for w in report.verdict.witnesses().iter().take(20) {
        println!("witness: {}", serde_json::to_string(w)?);
    }
    if let Some(path) = json {
        write_json(&path, &report)?;
    }
    Ok(match report.verdict {
        Verdict::Quadric { .. } | Verdict::QuasiQuadric { .. } => ExitCode::SUCCESS,
        Verdict::ViolatesI { .. } => ExitCode::from(1),
        Verdict::InternalInconsistency { .. } => ExitCode::from(3),
    })
}

fn export(q: usize, what: What, out: &Path, modulus: Option<u32>) -> Result<ExitCode, Usage> {
    let geom = geometry(q, modulus)?;
    let form = QuadraticForm::canonical_q4();
    let file = match what {
        What::Quadric => {
            let n = geom.point_index(&quadric::nucleus(&geom, &form)?);
            FamilyFile::from_points(&geom, &quadric::zero_set(&geom, &form), Some(n))
        }
        _ => {
            let classes = quadric::classify_all_solids(&geom, &form)?;
            let family = match what {
                What::Hyperbolic => classes.hyperbolic,
                What::Elliptic => classes.elliptic,
                _ => classes.tangent,
            };
            FamilyFile::from_solids(&geom, &family)
        }
    };
    fs::write(out, file.to_text()).map_err(|e| Usage(format!("{}: {e}", out.display())))?;
    println!("wrote {} records to {}", file.records.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn quasi_check(points: &Path) -> Result<ExitCode, Usage> {
    let file = read_file(points)?;
    let geom = file.geometry()?;
    let set = file.point_set(&geom)?;
    let nucleus = file.nucleus.ok_or_else(|| Usage("point file has no nucleus= header".into()))?;
    let cand = QuasiCandidate { points: set, nucleus: geom.canonical_index(&nucleus) };
    match quasi::quasi_quadric_witness(&geom, &cand) {
        None => {
            println!("quasi-quadric with nucleus {nucleus:?}");
            Ok(ExitCode::SUCCESS)
        }
        Some(w) => {
            println!("not a quasi-quadric: {}", serde_json::to_string(&w)?);
            Ok(ExitCode::from(1))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn quasi_search(
    q: usize,
    exhaustive: bool,
    seed: u64,
    budget: usize,
    strategy: StrategyArg,
    out_dir: Option<PathBuf>,
    json: Option<PathBuf>,
) -> Result<ExitCode, Usage> {
    let geom = geometry(q, None)?;
    if q == 2 {
        if !exhaustive {
            return Err(Usage("q=2 search requires --exhaustive".into()));
        }
        let result = quasi::exhaustive_search_q2(&geom)?;
        let fitted = result.survivors.iter().filter(|s| s.form.is_some()).count();
        println!("search space {}", result.search_space);
        println!("survivors {}", result.survivors.len());
        println!("fitted by a non-singular quadric {fitted}");
        let found: Vec<&QuasiCandidate> = result.survivors.iter().map(|s| &s.candidate).collect();
        write_found(&geom, &found, out_dir.as_deref())?;
        if let Some(path) = json {
            write_json(&path, &result)?;
        }
        return Ok(if result.all_fit() { ExitCode::SUCCESS } else { ExitCode::from(1) });
    }
    if exhaustive {
        return Err(Usage("--exhaustive is only available for q=2".into()));
    }
    let strategy = match strategy {
        StrategyArg::Switching => Strategy::Switching,
        StrategyArg::RandomRestart => Strategy::RandomRestart,
    };
    let outcome = quasi::search_quasi(&geom, strategy, seed, budget)?;
    let non_quadric = outcome.found.iter().filter(|f| !f.is_quadric()).count();
    println!("evaluated {}", outcome.evaluated);
    println!("found {} ({} quadric, {} non-quadric)", outcome.found.len(), outcome.found.len() - non_quadric, non_quadric);
    let found: Vec<&QuasiCandidate> = outcome.found.iter().map(|f| &f.candidate).collect();
    write_found(&geom, &found, out_dir.as_deref())?;
    if let Some(path) = json {
        write_json(&path, &outcome)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn write_found(geom: &Geometry, found: &[&QuasiCandidate], dir: Option<&Path>) -> Result<(), Usage> {
    let Some(dir) = dir else { return Ok(()) };
    fs::create_dir_all(dir).map_err(|e| Usage(format!("{}: {e}", dir.display())))?;
    for (i, c) in found.iter().enumerate() {
        let path = dir.join(format!("quasi-{i:04}.txt"));
        let text = FamilyFile::from_points(geom, &c.points, Some(c.nucleus)).to_text();
        fs::write(&path, text).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::VerifyLemma1 { q, modulus, json } => verify_lemma1(q, modulus, json),
        Command::Characterize { family, json } => characterize(&family, json),
        Command::Export { q, what, out, modulus } => export(q, what, &out, modulus),
        Command::Quasi { command } => match command {
            QuasiCommand::Check { points } => quasi_check(&points),
            QuasiCommand::Search { q, exhaustive, seed, budget, strategy, out_dir, json } => {
                quasi_search(q, exhaustive, seed, budget, strategy, out_dir, json)
            }
        },
    };
    result.unwrap_or_else(|Usage(msg)| {
        eprintln!("error: {msg}");
        ExitCode::from(2)
    })
}
