//! `biuni`: command-line front end for searches, factorizations, diagnostics,
//! orbit censuses, region grids and the effectiveness benchmark.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use biuni::bench::{run_bench, BenchConfig};
use biuni::factorizer::{
    block2n_decompose, euler_factor, lar_decompose, recursive_decompose, u2_biuni,
    u3_biuni_construct, u3_canonicalize, u4_from_phases, u4_to_phases,
};
use biuni::fourier::{census, CENSUS_TAU};
use biuni::linalg::json::{matrix_to_json, read_unitary, vector_to_json};
use biuni::linalg::{fourier_matrix, haar_random_unitary, TorusVector, UnitaryMatrix, C64};
use biuni::manifold::{full_rank_witness, im_rank, phasing_dim, region_grid, RANK_CUTOFF};
use biuni::projector::{multi_start_search, run_from, SearchConfig, SearchResult};
use biuni::BiuniError;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

/// Input matrices are accepted up to this unitarity residual.
const INPUT_UNITARY_TOL: f64 = 1e-8;
/// `factor` succeeds iff the reconstruction error is at most this.
const RECONSTRUCTION_TOL: f64 = 1e-8;

#[derive(Parser, Debug)]
#[command(
    name = "biuni",
    version,
    about = "Biunimodular vectors of unitary matrices"
)]
struct Cli {
    /// Base seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// JSON on stdout (default for every subcommand).
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// CSV on stdout where a tabular form exists.
    #[arg(long, global = true)]
    csv: bool,
    /// Suppress informational messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct MatrixInput {
    /// Matrix JSON file: {"n", "m", "re", "im"}.
    file: Option<PathBuf>,
    /// Use the n x n Fourier matrix.
    #[arg(long, value_name = "N", conflicts_with_all = ["file", "haar"])]
    fourier: Option<usize>,
    /// Use a Haar-random n x n unitary drawn from --seed.
    #[arg(long, value_name = "N", conflicts_with = "file")]
    haar: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct SearchArgs {
    #[arg(long, default_value_t = 1e-10)]
    delta: f64,
    #[arg(long, default_value_t = 1000)]
    starts: usize,
    #[arg(long, default_value_t = 10_000)]
    iters: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum StartVector {
    Random,
    Ones,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FactorMode {
    Lar,
    Recursive,
    Block2n,
    U3,
    U4,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Multi-start alternating-projection search.
    Search {
        #[command(flatten)]
        input: MatrixInput,
        #[command(flatten)]
        search: SearchArgs,
        /// First start: uniform random or the all-ones vector.
        #[arg(long, value_enum, default_value_t = StartVector::Random)]
        start_vector: StartVector,
    },
    /// Search effectiveness on Haar-random unitaries.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "3,5,10,25")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        matrices: usize,
        #[command(flatten)]
        search: SearchArgs,
        /// Also write bench.json and bench.csv here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Orbit census of biunimodular vectors for the Fourier matrix.
    Census {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1e-7)]
        delta: f64,
        #[arg(long, default_value_t = CENSUS_TAU)]
        tau: f64,
        #[arg(long, default_value_t = 2000)]
        starts: usize,
        #[arg(long, default_value_t = 30_000)]
        iters: usize,
        /// Also write census.json and census.csv here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Factorize a unitary matrix.
    Factor {
        #[command(flatten)]
        input: MatrixInput,
        #[arg(long, value_enum)]
        mode: FactorMode,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Region grid for a 3x3 unitary: regions.csv and region{1,2,3}.pgm.
    Regions {
        #[command(flatten)]
        input: MatrixInput,
        #[arg(long, default_value_t = 512)]
        resolution: usize,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Phasing-manifold dimension and fixed-point rank diagnostics.
    Diag {
        #[command(flatten)]
        input: MatrixInput,
        /// Report the full-rank witness of order N instead of an input matrix.
        #[arg(long, value_name = "N", conflicts_with_all = ["file", "fourier", "haar"])]
        witness: Option<usize>,
        #[command(flatten)]
        search: SearchArgs,
    },
}

enum Failure {
    /// Exit 1.
    Invalid(String),
    /// Exit 2.
    NoConvergence(String),
}

impl From<BiuniError> for Failure {
    fn from(e: BiuniError) -> Self {
        match e {
            BiuniError::SearchFailed(_) => Failure::NoConvergence(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type CliResult = Result<Output, Failure>;

struct Output {
    json: Value,
    csv: Option<String>,
    /// Exit 2 after printing (unconverged search).
    unconverged: bool,
    /// Exit 1 after printing (reconstruction above tolerance).
    inexact: bool,
}

impl Output {
    fn data(json: Value) -> Self {
        Self {
            json,
            csv: None,
            unconverged: false,
            inexact: false,
        }
    }
}

struct Ctx {
    seed: u64,
    quiet: bool,
}

impl Ctx {
    fn info(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_workers() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    let ctx = Ctx {
        seed: cli.seed,
        quiet: cli.quiet,
    };
    match dispatch(&ctx, cli.command) {
        Ok(out) => {
            let text = match (&out.csv, cli.csv) {
                (Some(text), true) => text.clone(),
                _ => serde_json::to_string_pretty(&out.json).expect("json output") + "\n",
            };
            // A closed reader (e.g. `| head`) is not an error.
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            if out.unconverged {
                ExitCode::from(2)
            } else if out.inexact {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::NoConvergence(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn configure_workers() -> Result<(), String> {
    let Ok(raw) = std::env::var("BIUNI_WORKERS") else {
        return Ok(());
    };
    let workers: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("BIUNI_WORKERS must be a positive integer, got {raw:?}"))?;
    if workers == 0 {
        return Err("BIUNI_WORKERS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| e.to_string())
}

fn dispatch(ctx: &Ctx, command: Command) -> CliResult {
    match command {
        Command::Search {
            input,
            search,
            start_vector,
        } => cmd_search(ctx, &input, &search, start_vector),
        Command::Bench {
            dims,
            matrices,
            search,
            out_dir,
        } => cmd_bench(ctx, dims, matrices, &search, out_dir.as_deref()),
        Command::Census {
            n,
            delta,
            tau,
            starts,
            iters,
            out_dir,
        } => cmd_census(
            ctx,
            n,
            &SearchArgs {
                delta,
                starts,
                iters,
            },
            tau,
            out_dir.as_deref(),
        ),
        Command::Factor {
            input,
            mode,
            search,
        } => cmd_factor(ctx, &input, mode, &search),
        Command::Regions {
            input,
            resolution,
            out_dir,
        } => cmd_regions(ctx, &input, resolution, &out_dir),
        Command::Diag {
            input,
            witness,
            search,
        } => cmd_diag(ctx, &input, witness, &search),
    }
}

fn load_matrix(ctx: &Ctx, input: &MatrixInput) -> Result<UnitaryMatrix, Failure> {
    let a = match (&input.file, input.fourier, input.haar) {
        (Some(path), None, None) => read_unitary(path, INPUT_UNITARY_TOL)
            .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?,
        (None, Some(n), None) => fourier_matrix(n)?,
        (None, None, Some(n)) => haar_random_unitary(n, ctx.seed)?,
        _ => {
            return Err(Failure::Invalid(
                "give exactly one of FILE, --fourier N or --haar N".into(),
            ))
        }
    };
    Ok(a)
}

fn search_config(ctx: &Ctx, s: &SearchArgs) -> Result<SearchConfig, Failure> {
    Ok(SearchConfig::new(s.delta, s.iters, s.starts, ctx.seed)?)
}

/// Starts from the ones vector, then continues with the seeded random starts.
fn search_from_ones(a: &UnitaryMatrix, cfg: &SearchConfig) -> Result<SearchResult, BiuniError> {
    let first = run_from(a, &TorusVector::ones(a.n()), cfg)?;
    if first.converged || cfg.max_starts == 1 {
        return Ok(first);
    }
    let rest_cfg = SearchConfig {
        max_starts: cfg.max_starts - 1,
        ..cfg.clone()
    };
    let mut rest = multi_start_search(a, &rest_cfg)?;
    rest.starts_used += 1;
    if !rest.converged && first.residual < rest.residual {
        return Ok(SearchResult {
            starts_used: cfg.max_starts,
            ..first
        });
    }
    Ok(rest)
}

fn cmd_search(ctx: &Ctx, input: &MatrixInput, s: &SearchArgs, start: StartVector) -> CliResult {
    let a = load_matrix(ctx, input)?;
    let cfg = search_config(ctx, s)?;
    let r = match start {
        StartVector::Random => multi_start_search(&a, &cfg)?,
        StartVector::Ones => search_from_ones(&a, &cfg)?,
    };
    if r.converged {
        ctx.info(&format!(
            "converged after {} start(s), residual {:.3e}",
            r.starts_used, r.residual
        ));
    } else {
        eprintln!(
            "no convergence: best residual {:.3e} after {} start(s)",
            r.residual, r.starts_used
        );
    }
    Ok(Output {
        json: r.to_json(),
        csv: None,
        unconverged: !r.converged,
        inexact: false,
    })
}

fn write_file(ctx: &Ctx, path: &Path, contents: &[u8]) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    ctx.info(&format!("wrote {}", path.display()));
    Ok(())
}

fn cmd_bench(
    ctx: &Ctx,
    dims: Vec<usize>,
    matrices: usize,
    s: &SearchArgs,
    out_dir: Option<&Path>,
) -> CliResult {
    let cfg = BenchConfig {
        dims,
        matrices_per_dim: matrices,
        delta: s.delta,
        max_starts: s.starts,
        max_iters: s.iters,
        seed: ctx.seed,
    };
    let report = run_bench(&cfg)?;
    let json = serde_json::to_value(&report).map_err(|e| Failure::Invalid(e.to_string()))?;
    let csv = report.to_csv();
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        write_file(
            ctx,
            &dir.join("bench.json"),
            serde_json::to_string_pretty(&json)
                .expect("json")
                .as_bytes(),
        )?;
        write_file(ctx, &dir.join("bench.csv"), csv.as_bytes())?;
    }
    Ok(Output {
        json,
        csv: Some(csv),
        unconverged: false,
        inexact: false,
    })
}

fn cmd_census(ctx: &Ctx, n: usize, s: &SearchArgs, tau: f64, out_dir: Option<&Path>) -> CliResult {
    if n < 2 {
        return Err(Failure::Invalid(format!("census needs n >= 2, got {n}")));
    }
    let cfg = search_config(ctx, s)?;
    let c = census(n, &cfg, tau)?;
    ctx.info(&format!(
        "n={n}: {} orbit(s), {} vectors, {} of {} runs converged",
        c.orbits.len(),
        c.total_vectors,
        c.converged_runs,
        c.starts_used
    ));
    let json = c.to_json();
    let csv = c.to_csv();
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        write_file(
            ctx,
            &dir.join("census.json"),
            serde_json::to_string_pretty(&json)
                .expect("json")
                .as_bytes(),
        )?;
        write_file(ctx, &dir.join("census.csv"), csv.as_bytes())?;
    }
    Ok(Output {
        json,
        csv: Some(csv),
        unconverged: false,
        inexact: false,
    })
}

/// A biunimodular vector by closed form at orders up to 3, by search above.
fn find_vector(a: &UnitaryMatrix, cfg: &SearchConfig) -> Result<TorusVector, Failure> {
    match a.n() {
        1 => Ok(TorusVector::ones(1)),
        2 => Ok(u2_biuni(a)?.first()),
        3 => Ok(u3_biuni_construct(a)?),
        _ => {
            let r = multi_start_search(a, cfg)?;
            if !r.converged {
                return Err(Failure::NoConvergence(format!(
                    "search failed: best residual {:.3e} after {} start(s)",
                    r.residual, r.starts_used
                )));
            }
            Ok(r.vector)
        }
    }
}

fn complex_json(z: &[C64]) -> Value {
    vector_to_json(z)
}

fn cmd_factor(ctx: &Ctx, input: &MatrixInput, mode: FactorMode, s: &SearchArgs) -> CliResult {
    let a = load_matrix(ctx, input)?;
    let cfg = search_config(ctx, s)?;
    let (mut json, error) = match mode {
        FactorMode::Lar => {
            let v = find_vector(&a, &cfg)?;
            let d = lar_decompose(&a, &v)?;
            let err = d.reconstruct().max_abs_diff(a.matrix());
            let mut j = d.to_json();
            j["vector"] = vector_to_json(&v);
            (j, err)
        }
        FactorMode::Recursive => {
            let d = recursive_decompose(&a, &cfg)?;
            (d.to_json(), d.reconstruction_error)
        }
        FactorMode::Block2n => {
            let d = block2n_decompose(&a)?;
            let err = d.reconstruct()?.matrix().max_abs_diff(a.matrix());
            (d.to_json(), err)
        }
        FactorMode::U3 => {
            let t = u3_canonicalize(&a)?;
            let (ex, ez) = euler_factor(&a)?;
            let err = [t.reconstruct(), ex.reconstruct(), ez.reconstruct()]
                .iter()
                .map(|m| m.max_abs_diff(a.matrix()))
                .fold(0.0, f64::max);
            (json!({ "t_form": t, "euler_x": ex, "euler_z": ez }), err)
        }
        FactorMode::U4 => {
            let [pa, pb, pc, pz] = u4_to_phases(&a)?;
            let back = u4_from_phases(pa, pb, pc, pz)?;
            let err = back.matrix().max_abs_diff(a.matrix());
            (
                json!({ "a": complex_json(&pa), "b": complex_json(&pb), "c": complex_json(&pc), "z": complex_json(&pz) }),
                err,
            )
        }
    };
    json["mode"] = json!(format!("{mode:?}").to_lowercase());
    json["reconstruction_error"] = json!(error);
    let inexact = error.is_nan() || error > RECONSTRUCTION_TOL;
    if inexact {
        eprintln!("reconstruction error {error:.3e} exceeds {RECONSTRUCTION_TOL:e}");
    } else {
        ctx.info(&format!("reconstruction error {error:.3e}"));
    }
    Ok(Output {
        json,
        csv: None,
        unconverged: false,
        inexact,
    })
}

fn cmd_regions(ctx: &Ctx, input: &MatrixInput, resolution: usize, out_dir: &Path) -> CliResult {
    let a = load_matrix(ctx, input)?;
    let grid = region_grid(&a, resolution)?;
    fs::create_dir_all(out_dir)?;
    let mut files = vec![out_dir.join("regions.csv")];
    write_file(ctx, &files[0], grid.to_csv().as_bytes())?;
    for j in 0..grid.regions.len() {
        let path = out_dir.join(format!("region{}.pgm", j + 1));
        write_file(ctx, &path, &grid.to_pgm(j)?)?;
        files.push(path);
    }
    let coverage: Vec<f64> = grid
        .regions
        .iter()
        .map(|g| g.iter().filter(|&&b| b).count() as f64 / g.len() as f64)
        .collect();
    Ok(Output::data(json!({
        "resolution": resolution,
        "covered": grid.uncovered().is_none(),
        "region_fraction": coverage,
        "triple_boundary_clusters": grid.triple_boundary_clusters(),
        "files": files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    })))
}

fn cmd_diag(ctx: &Ctx, input: &MatrixInput, witness: Option<usize>, s: &SearchArgs) -> CliResult {
    if let Some(n) = witness {
        let w = full_rank_witness(n)?;
        let rank = im_rank(&w, RANK_CUTOFF)?;
        return Ok(Output::data(json!({
            "n": n,
            "witness": matrix_to_json(w.matrix()),
            "rank": json!(rank),
        })));
    }
    let a = load_matrix(ctx, input)?;
    let phasing = phasing_dim(&a, RANK_CUTOFF)?;
    let cfg = search_config(ctx, s)?;
    // Rank of the LAR core, when a biunimodular vector is available.
    let rank = match find_vector(&a, &cfg) {
        Ok(v) => {
            let lar = lar_decompose(&a, &v)?;
            json!(im_rank(&lar.core, RANK_CUTOFF)?)
        }
        Err(Failure::NoConvergence(msg)) => {
            ctx.info(&format!(
                "no biunimodular vector found, rank omitted: {msg}"
            ));
            Value::Null
        }
        Err(e) => return Err(e),
    };
    Ok(Output::data(json!({
        "n": a.n(),
        "phasing": json!(phasing),
        "core_rank": rank,
    })))
}
