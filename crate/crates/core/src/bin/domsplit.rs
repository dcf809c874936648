use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;

use domsplit::cocycle::Criterion;
use domsplit::extremal::{ball_volume, ball_volume_qmc, unit_ball_volume, SearchOptions};
use domsplit::lemmas::{run_suite, Suite, SweepOptions, DIM_CAP};
use domsplit::linalg::parse_matrix;
use domsplit::report::{emit_report, ReportFormat};
use domsplit::run::{run_config, RunOutcome};
use domsplit::scenario::{load_config, ScenarioConfig};
use domsplit::snumbers::{self, SNumber};
use domsplit::{Error, Norm};

const CONFIG_DOC: &str = include_str!("../../docs/config.md");
const REPORT_DOC: &str = include_str!("../../docs/report.md");

/// Exit status for command-line usage errors (BSD `EX_USAGE`).
const EXIT_USAGE: u8 = 64;

/// Detect, construct and certify dominated splittings of linear cocycles.
///
/// Exit codes: 0 dominated and verified, 1 error or failed verification,
/// 2 no domination, 64 usage error.
#[derive(Parser, Debug)]
#[command(name = "domsplit", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the discrete pipeline on a scenario file and write a report.
    Analyze(AnalyzeArgs),
    /// Run the continuous-time pipeline on a flow scenario.
    Flow(FlowArgs),
    /// Fuzz the geometric and quantitative lemmas on random instances.
    VerifyLemmas(VerifyArgs),
    /// Evaluate a single s-number or volume oracle.
    Oracle(OracleArgs),
    /// Print the config or report schema documentation.
    Schema {
        #[arg(value_enum, default_value_t = SchemaKind::Config)]
        which: SchemaKind,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Output directory for report files.
    #[arg(long, env = "DOMSPLIT_OUT")]
    out: Option<PathBuf>,
    /// Which report files to write.
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Dominating bundle dimension.
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    config: PathBuf,
    #[command(flatten)]
    common: Common,
    /// Longest product examined.
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long, value_enum)]
    criterion: Option<CriterionArg>,
}

#[derive(Args, Debug)]
struct FlowArgs {
    config: PathBuf,
    #[command(flatten)]
    common: Common,
    /// Discretizations to compare, e.g. `1,2,3`.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    /// End of the continuous-time grid.
    #[arg(long)]
    t_max: Option<f64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: SuiteArg,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest dimension; trials cycle through 2..=dim.
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(2..=DIM_CAP as u64))]
    dim: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Print the full report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, value_enum)]
    what: What,
    /// Row-major matrix, rows separated by `;`, e.g. "3,0;0,1".
    #[arg(long, conflicts_with = "diag")]
    matrix: Option<String>,
    /// Diagonal entries, e.g. 3,2,1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    diag: Option<Vec<f64>>,
    /// Index of the s-number or volume.
    #[arg(long, default_value_t = 1)]
    q: usize,
    /// `euclidean`, `l1`, `linf`, `lp:<p>` or `weighted:<w1>,..`.
    #[arg(long, default_value = "euclidean")]
    norm: String,
    /// Ambient dimension for `ball-volume` when no matrix is given.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Multi-start count for the sphere and Grassmannian searches.
    #[arg(long, default_value_t = 64)]
    starts: usize,
    /// Quasi-Monte-Carlo samples for `ball-volume`.
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Print the result as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CriterionArg {
    Bogo,
    Magic,
    Simple,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Geometry,
    Snumbers,
    Svd,
    Quantitative,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum What {
    Gelfand,
    Kolmogorov,
    Volume,
    BallVolume,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemaKind {
    Config,
    Report,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { EXIT_USAGE } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Command) -> domsplit::Result<u8> {
    match cmd {
        Command::Analyze(a) => analyze(a),
        Command::Flow(a) => flow(a),
        Command::VerifyLemmas(a) => verify(a),
        Command::Oracle(a) => oracle(a),
        Command::Schema { which } => {
            print!(
                "{}",
                match which {
                    SchemaKind::Config => CONFIG_DOC,
                    SchemaKind::Report => REPORT_DOC,
                }
            );
            Ok(0)
        }
    }
}

fn set_jobs(jobs: Option<usize>) -> domsplit::Result<()> {
    if let Some(n) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn apply_common(cfg: &mut ScenarioConfig, c: &Common) {
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(k) = c.k {
        cfg.analysis.k = k;
    }
    if let Some(out) = &c.out {
        cfg.output.dir = Some(out.clone());
    }
}

fn analyze(a: AnalyzeArgs) -> domsplit::Result<u8> {
    set_jobs(a.common.jobs)?;
    let mut cfg = load_config(&a.config)?;
    apply_common(&mut cfg, &a.common);
    if let Some(n) = a.n_max {
        cfg.analysis.n_max = n;
    }
    if let Some(c) = a.criterion {
        cfg.analysis.criterion = match c {
            CriterionArg::Bogo => Criterion::Bogo,
            CriterionArg::Magic => Criterion::Magic,
            CriterionArg::Simple => Criterion::Simple,
        };
    }
    execute(&cfg, a.common.format)
}

fn flow(a: FlowArgs) -> domsplit::Result<u8> {
    set_jobs(a.common.jobs)?;
    let mut cfg = load_config(&a.config)?;
    if !cfg.is_flow() {
        return Err(Error::Precondition(format!("{} is not a flow scenario", a.config.display())));
    }
    apply_common(&mut cfg, &a.common);
    if let Some(m) = a.m {
        cfg.analysis.m_list = m;
    }
    if let Some(t) = a.t_max {
        cfg.analysis.t_max = t;
    }
    execute(&cfg, a.common.format)
}

fn execute(cfg: &ScenarioConfig, format: Format) -> domsplit::Result<u8> {
    cfg.validate()?;
    let outcome = run_config(cfg)?;
    summarize(&outcome);
    if let Some(dir) = &cfg.output.dir {
        let formats: &[ReportFormat] = match format {
            Format::Json => &[ReportFormat::Json],
            Format::Csv => &[ReportFormat::CsvTables],
            Format::Both => &[ReportFormat::Json, ReportFormat::CsvTables],
        };
        let mut files = emit_report(&outcome.bundle, dir, formats)?;
        let echoed = dir.join("config.toml");
        std::fs::write(&echoed, cfg.to_string())?;
        files.push(echoed);
        for f in files {
            println!("wrote {}", f.display());
        }
    }
    Ok(outcome.verdict.exit_code() as u8)
}

fn summarize(o: &RunOutcome) {
    let b = &o.bundle;
    println!("scenario   {}", b.run.scenario);
    println!("config     {}", b.run.config_hash);
    println!("verdict    {:?}", o.verdict);
    for (name, q) in &b.quantities {
        println!("  {name:<26} {:<14.6e} {:?}", q.value, q.provenance);
    }
    for note in &b.status.notes {
        println!("note: {note}");
    }
}

fn verify(a: VerifyArgs) -> domsplit::Result<u8> {
    set_jobs(a.jobs)?;
    let suite = match a.suite {
        SuiteArg::Geometry => Suite::Geometry,
        SuiteArg::Snumbers => Suite::Snumbers,
        SuiteArg::Svd => Suite::Svd,
        SuiteArg::Quantitative => Suite::Quantitative,
    };
    let opts = SweepOptions { trials: a.trials, seed: a.seed, dim: a.dim as usize };
    let report = run_suite(suite, &opts)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("suite {} trials {} seed {} dim {}", suite, opts.trials, opts.seed, opts.dim);
        for c in &report.checks {
            println!(
                "  {:<36} evaluated {:>6} skipped {:>5} violations {:>4} worst margin {:.3e}",
                c.name, c.evaluated, c.skipped, c.violations, c.worst_margin
            );
        }
    }
    if let Some(cx) = &report.counterexample {
        eprintln!(
            "counterexample: check {} trial {} dim {} (minimized to dim {}): lhs {:.12e} > rhs {:.12e}",
            cx.check, cx.trial, cx.dim, cx.minimized_dim, cx.lhs, cx.rhs
        );
    }
    let v = report.violations();
    println!("{} violation{}", v, if v == 1 { "" } else { "s" });
    Ok(if v == 0 { 0 } else { 1 })
}

fn oracle_matrix(a: &OracleArgs) -> domsplit::Result<Option<DMatrix<f64>>> {
    match (&a.matrix, &a.diag) {
        (Some(m), _) => {
            parse_matrix(m).map(Some).ok_or_else(|| Error::Precondition(format!("cannot parse matrix `{m}`")))
        }
        (None, Some(d)) => Ok(Some(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(d)))),
        (None, None) => Ok(None),
    }
}

fn oracle(a: OracleArgs) -> domsplit::Result<u8> {
    set_jobs(a.jobs)?;
    let norm: Norm = a.norm.parse()?;
    let m = oracle_matrix(&a)?;
    if let What::BallVolume = a.what {
        let d = match (&m, a.dim) {
            (_, Some(d)) => d,
            (Some(m), None) => m.nrows(),
            (None, None) => return Err(Error::Precondition("ball-volume needs --dim or a matrix".into())),
        };
        return ball(&norm, d, a.samples, a.json);
    }
    let Some(m) = m else {
        return Err(Error::Precondition("--matrix or --diag is required".into()));
    };
    let opts = SearchOptions { starts: a.starts, seed: a.seed, ..SearchOptions::default() };
    let s = match a.what {
        What::Gelfand => snumbers::gelfand(&m, a.q, &norm, &opts)?,
        What::Kolmogorov => snumbers::kolmogorov(&m, a.q, &norm, &opts)?,
        What::Volume => snumbers::volume_growth(&m, a.q, &norm, &opts)?,
        What::BallVolume => unreachable!(),
    };
    print_snumber(&a, &norm, &s)?;
    Ok(0)
}

fn print_snumber(a: &OracleArgs, norm: &Norm, s: &SNumber) -> domsplit::Result<()> {
    let what = format!("{:?}", a.what).to_lowercase();
    if a.json {
        let v = serde_json::json!({
            "what": what,
            "norm": norm.to_string(),
            "q": s.q,
            "value": s.value,
            "certificate": certificate_rows(s.certificate.basis()),
            "method": format!("{:?}", s.method),
            "tolerance": s.tolerance,
            "seed": s.seed,
        });
        println!("{}", serde_json::to_string_pretty(&v)?);
        return Ok(());
    }
    println!("{what} q={} norm={}", s.q, norm);
    println!("value        {:.12}", s.value);
    println!("method       {:?}", s.method);
    println!("tolerance    {:.1e}", s.tolerance);
    println!("seed         {}", s.seed);
    println!("certificate  (orthonormal basis, one vector per line)");
    for row in certificate_rows(s.certificate.basis()) {
        let parts: Vec<String> = row.iter().map(|x| format!("{x:+.9}")).collect();
        println!("  [{}]", parts.join(", "));
    }
    Ok(())
}

fn certificate_rows(b: &DMatrix<f64>) -> Vec<Vec<f64>> {
    b.column_iter().map(|c| c.iter().copied().collect()).collect()
}

fn ball(norm: &Norm, d: usize, samples: usize, json: bool) -> domsplit::Result<u8> {
    norm.check_dim(d)?;
    let cap = if norm.is_hilbert() { snumbers::EUCLIDEAN_CAP } else { snumbers::GENERAL_CAP };
    if d == 0 || d > cap {
        return Err(Error::DimensionCap { what: "ball-volume", dim: d, cap });
    }
    let id = DMatrix::<f64>::identity(d, d);
    let estimate = ball_volume_qmc(norm, &id, samples);
    // Closed forms or exact polygon areas where the library has them.
    let exact = (d <= 2 || norm.is_hilbert()).then(|| ball_volume(norm, &id, samples));
    let omega = unit_ball_volume(d);
    let tolerance = match exact {
        Some(v) => (estimate - v).abs() / v,
        None => {
            // Binomial standard error of the hit fraction, relative.
            let box_vol = (2.0 * norm.euclidean_bound(d)).powi(d as i32);
            let p = estimate / box_vol;
            ((1.0 - p) / (p * samples as f64)).sqrt()
        }
    };
    if json {
        let v = serde_json::json!({
            "what": "ball-volume",
            "norm": norm.to_string(),
            "dim": d,
            "value": estimate,
            "exact": exact,
            "ratio_to_euclidean_ball": estimate / omega,
            "euclidean_ball_volume": omega,
            "tolerance": tolerance,
            "samples": samples,
            "seed": 0,
        });
        println!("{}", serde_json::to_string_pretty(&v)?);
        return Ok(0);
    }
    println!("ball-volume d={d} norm={norm}");
    println!("value        {estimate:.9}  (quasi-Monte-Carlo, {samples} Halton points)");
    if let Some(v) = exact {
        println!("exact        {v:.9}");
    }
    println!("ratio        {:.9}  (value / volume of the Euclidean unit ball {omega:.9})", estimate / omega);
    println!("tolerance    {tolerance:.3e}  (relative)");
    println!("seed         0  (Halton sequence, deterministic)");
    Ok(0)
}
