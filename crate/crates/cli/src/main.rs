use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use qfree_core::fixtures::{fixture, run_fixture};
use qfree_core::verifier::gap_surface;
use qfree_core::{
    build_cut, maximality_verdict, reduce, slice_mesh, validate_cut, Error, Gamma, GammaSpec, QFreeSet, QuadraticProblem,
    SampleSet, SimplicialCone, SliceSpec, UnitVector,
};

#[derive(Parser)]
#[command(name = "qfree", version, about = "Maximal quadratic-free sets: verification, cuts, reductions and slices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Sampling {
    /// Sphere sample size (grid points for m = 2, points per family for m >= 3).
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Sampling {
    fn set(&self, m: usize) -> SampleSet {
        match self.samples {
            Some(n) => SampleSet::with_count(m, n, self.seed),
            None => SampleSet::default_for(m, self.seed),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Maximality (and optionally polyhedrality) verdict for a Γ spec.
    Verify {
        spec: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        /// Anchor directions (JSON array of unit vectors) for the polyhedrality check.
        #[arg(long)]
        polyhedral: Option<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Also write the pair-gap surface (m = 2 only).
        #[arg(long)]
        gap_surface: Option<PathBuf>,
        #[arg(long, default_value_t = 256)]
        gap_resolution: usize,
    },
    /// Intersection cut from a simplicial cone, validated before it is written.
    Cut {
        spec: PathBuf,
        cone: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        /// Use these directions as an exact index set instead of sphere samples.
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        validate: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Standard-form map `s ↦ (x, y)` for a quadratic `s^T A s + g^T s + h`.
    Reduce {
        problem: PathBuf,
        #[arg(long)]
        homogenize: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Boundary meshes of C and Q on a 3-dimensional slice.
    Slice {
        spec: PathBuf,
        /// Slice file; defaults to the first three coordinates on [-2, 2]³.
        slice: Option<PathBuf>,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Runs a named example end to end.
    Example {
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the fixture definition instead of running it.
        #[arg(long)]
        fixture: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

enum Status {
    Pass,
    Fail,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    match out {
        Some(p) => write_atomic(p, s.as_bytes()),
        None => {
            std::io::stdout().write_all(s.as_bytes())?;
            Ok(())
        }
    }
}

fn load_gamma(spec: &Path) -> Result<Gamma> {
    let spec: GammaSpec = read_json(spec)?;
    Ok(Gamma::new(spec)?)
}

fn load_set(spec: &Path, index: Option<&Path>, sampling: &Sampling) -> Result<QFreeSet> {
    let gamma = load_gamma(spec)?;
    Ok(match index {
        Some(p) => QFreeSet::exact(gamma, read_json::<Vec<UnitVector>>(p)?)?,
        None => {
            let samples = sampling.set(gamma.m());
            QFreeSet::sampled(gamma, samples)?
        }
    })
}

fn run(cmd: Command) -> Result<Status> {
    match cmd {
        Command::Verify { spec, sampling, polyhedral, out, gap_surface: gap, gap_resolution } => {
            let gamma = load_gamma(&spec)?;
            let samples = sampling.set(gamma.m());
            let mut report = maximality_verdict(&gamma, &samples, sampling.seed)?;
            if let Some(p) = &polyhedral {
                report = report.with_polyhedrality(&gamma, &read_json::<Vec<UnitVector>>(p)?, &samples)?;
            }
            if let Some(p) = &gap {
                emit(&gap_surface(&gamma, gap_resolution)?, Some(p))?;
            }
            emit(&report, out.as_deref())?;
            let ok = report.maximal.passed() && report.polyhedral.as_ref().is_none_or(|p| p.verdict.passed());
            Ok(if ok { Status::Pass } else { Status::Fail })
        }
        Command::Cut { spec, cone, sampling, index, validate, out } => {
            let c = load_set(&spec, index.as_deref(), &sampling)?;
            let cone: SimplicialCone = read_json(&cone)?;
            let cut = build_cut(&c, &cone)?;
            let v = validate_cut(&cut, &cone, validate, sampling.seed);
            if !v.valid {
                eprintln!(
                    "cut rejected: {} violations in {} samples, apex violation {:.3e}",
                    v.violations, v.samples_checked, v.apex_violation
                );
                return Ok(Status::Fail);
            }
            emit(&cut, out.as_deref())?;
            Ok(Status::Pass)
        }
        Command::Reduce { problem, homogenize, out } => {
            let p: QuadraticProblem = read_json(&problem)?;
            let map = reduce(&p, homogenize)?;
            emit(&map, out.as_deref())?;
            Ok(Status::Pass)
        }
        Command::Slice { spec, slice, sampling, index, out } => {
            let c = load_set(&spec, index.as_deref(), &sampling)?;
            let slice = match &slice {
                Some(p) => read_json(p)?,
                None => SliceSpec::default_for(c.n(), c.m())?,
            };
            emit(&slice_mesh(&c, &slice)?, out.as_deref())?;
            Ok(Status::Pass)
        }
        Command::Example { name, seed, fixture: show, out } => {
            let f = fixture(&name)?;
            if show {
                emit(&f, out.as_deref())?;
                return Ok(Status::Pass);
            }
            let o = run_fixture(&f, seed)?;
            emit(&o, out.as_deref())?;
            Ok(if o.matches_expected { Status::Pass } else { Status::Fail })
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("QFREE_THREADS") {
        let n: usize = v.parse().with_context(|| format!("QFREE_THREADS={v:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| run(cli.command)) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(Status::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::NoCut | Error::NotReducible { .. }) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
