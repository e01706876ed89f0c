//! `flr`: simulate, fit, predict, Monte Carlo tables, rate checks and
//! perturbation diagnostics.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use flr_core::estimators::{read_model, write_model};
use flr_core::evaluation::{
    emit_profile, emit_table, rate_fit_results, Estimator, McPlan, TableFormat,
};
use flr_core::io::{read_csv, read_dataset_csv, write_dataset_csv};
use flr_core::simulation::{draw_replication, truth, SimConfig, Spacing};
use flr_core::spectral::perturbation_report;
use flr_core::{compute_moments, mc_run, pca_fit, predict, ridge_fit, Error};

const EXIT_USAGE: u8 = 2;
const EXIT_FORMAT: u8 = 3;
const EXIT_NUMERIC: u8 = 4;
const EXIT_IO: u8 = 5;

#[derive(Debug, Parser)]
#[command(name = "flr", version, about = "Functional linear regression toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a simulated dataset and write it as CSV.
    Simulate(SimulateArgs),
    /// Fit a slope function to a dataset CSV and write a model file.
    Fit(FitArgs),
    /// Predict responses for the X rows of a CSV using a model file.
    Predict(PredictArgs),
    /// Oracle-tuned Monte Carlo table of Bias², Var and MISE.
    McTable(McTableArgs),
    /// Fit the log-log slope of oracle MISE against n.
    RateCheck(RateCheckArgs),
    /// Perturbation-bound report for the true and empirical covariance.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SpacingArg {
    Well,
    Closely,
}

impl From<SpacingArg> for Spacing {
    fn from(s: SpacingArg) -> Self {
        match s {
            SpacingArg::Well => Spacing::WellSpaced,
            SpacingArg::Closely => Spacing::CloselySpaced,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Pca,
    Ridge,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Tsv,
    Text,
}

#[derive(Debug, Args)]
struct DesignArgs {
    #[arg(long, value_enum, default_value = "well")]
    spacing: SpacingArg,
    /// Number of basis terms J.
    #[arg(long = "terms", default_value_t = 50)]
    j_terms: usize,
    /// Grid size p.
    #[arg(long, default_value_t = 50)]
    p: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Largest truncation in the candidate grid 1..=m-max.
    #[arg(long, default_value_t = 20)]
    m_max: usize,
    /// Explicit ridge grid (overrides the default 25 log-spaced values in [1e-6, 1]).
    #[arg(long, value_delimiter = ',')]
    rho_grid: Vec<f64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long = "reps", default_value_t = 200)]
    replications: usize,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    sigma: f64,
    #[arg(long)]
    alpha: f64,
    #[command(flatten)]
    design: DesignArgs,
    /// Replication index (independent stream of the same seed).
    #[arg(long, default_value_t = 0)]
    replication: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct McTableArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    sigma: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    alpha: Vec<f64>,
    #[command(flatten)]
    design: DesignArgs,
    #[command(flatten)]
    grids: GridArgs,
    #[arg(long, value_enum, default_value = "tsv")]
    format: FormatArg,
    /// Also write per-candidate MISE values here.
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RateCheckArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, value_delimiter = ',', default_value = "100,200,400,800")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    #[command(flatten)]
    design: DesignArgs,
    #[command(flatten)]
    grids: GridArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DiagnoseArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    #[arg(long, default_value_t = 10)]
    j_max: usize,
    #[command(flatten)]
    design: DesignArgs,
    #[arg(long, default_value_t = 0)]
    replication: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
    Io(PathBuf, io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Core(Error::Format(_)) => EXIT_FORMAT,
            Failure::Core(_) => EXIT_NUMERIC,
            Failure::Io(..) => EXIT_IO,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) => format!("usage error: {m}"),
            Failure::Core(e) => e.to_string(),
            Failure::Io(p, e) => format!("{}: {e}", p.display()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

/// Writes `contents` to `out` through a temporary file and a rename, or to
/// stdout when no path is given.
fn emit(out: Option<&Path>, contents: &str) -> CliResult<()> {
    let Some(path) = out else {
        return io::stdout()
            .write_all(contents.as_bytes())
            .map_err(|e| Failure::Io(PathBuf::from("<stdout>"), e));
    };
    let name = path
        .file_name()
        .ok_or_else(|| Failure::Usage(format!("`{}` is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let io_err = |e| Failure::Io(path.to_path_buf(), e);
    fs::write(&tmp, contents).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io_err(e)
    })
}

fn sim_config(n: usize, sigma: f64, alpha: f64, design: &DesignArgs) -> CliResult<SimConfig> {
    let config = SimConfig {
        n,
        sigma_eps: sigma,
        alpha,
        spacing: design.spacing.into(),
        j_terms: design.j_terms,
        p: design.p,
        seed: design.seed,
    };
    config.validate()?;
    Ok(config)
}

fn mc_plan(grids: &GridArgs) -> CliResult<McPlan> {
    let mut plan = McPlan::new(grids.replications);
    if grids.m_max == 0 {
        return Err(Error::Parameter("--m-max must be at least 1".into()).into());
    }
    plan.m_grid = (1..=grids.m_max).collect();
    if !grids.rho_grid.is_empty() {
        if grids.rho_grid.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::Parameter("--rho-grid values must be > 0".into()).into());
        }
        plan.rho_grid = grids.rho_grid.clone();
    }
    if grids.replications < 2 {
        return Err(Error::Parameter("--reps must be at least 2".into()).into());
    }
    if grids.threads == Some(0) {
        return Err(Error::Parameter("--threads must be at least 1".into()).into());
    }
    plan.threads = grids.threads;
    Ok(plan)
}

fn simulate(args: SimulateArgs) -> CliResult<()> {
    let config = sim_config(args.n, args.sigma, args.alpha, &args.design)?;
    let t = truth(&config)?;
    let data = draw_replication(&config, &t, args.replication)?;
    emit(args.out.as_deref(), &write_dataset_csv(&data))
}

fn fit(args: FitArgs) -> CliResult<()> {
    enum Choice {
        Pca(usize),
        Ridge(f64),
    }
    let choice = match (args.method, args.m, args.rho) {
        (MethodArg::Pca, Some(m), None) => {
            if m == 0 {
                return Err(Error::Parameter("--m must be at least 1".into()).into());
            }
            Choice::Pca(m)
        }
        (MethodArg::Ridge, None, Some(rho)) => {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(Error::Parameter(format!("--rho must be > 0, got {rho}")).into());
            }
            Choice::Ridge(rho)
        }
        (MethodArg::Pca, _, _) => {
            return Err(Failure::Usage(
                "--method pca takes --m (and not --rho)".into(),
            ))
        }
        (MethodArg::Ridge, _, _) => {
            return Err(Failure::Usage(
                "--method ridge takes --rho (and not --m)".into(),
            ))
        }
    };
    let data = read_dataset_csv(&read_file(&args.data)?)?;
    let moments = compute_moments(&data)?;
    let model = match choice {
        Choice::Pca(m) => pca_fit(&moments, m)?,
        Choice::Ridge(rho) => ridge_fit(&moments, rho)?,
    };
    emit(args.out.as_deref(), &write_model(&model))
}

fn predict_cmd(args: PredictArgs) -> CliResult<()> {
    let model = read_model(&read_file(&args.model)?)?;
    let table = read_csv(&read_file(&args.data)?)?;
    if table.grid != model.slope.grid() {
        return Err(Error::Format(format!(
            "data grid has p={} but the model has p={}",
            table.grid.len(),
            model.slope.grid().len()
        ))
        .into());
    }
    let mut out = String::new();
    for x in &table.x {
        out.push_str(&format!("{:.16e}\n", predict(&model, x)?));
    }
    emit(args.out.as_deref(), &out)
}

fn mc_table(args: McTableArgs) -> CliResult<()> {
    let plan = mc_plan(&args.grids)?;
    let mut configs = Vec::new();
    for &sigma in &args.sigma {
        for &n in &args.n {
            for &alpha in &args.alpha {
                configs.push(sim_config(n, sigma, alpha, &args.design)?);
            }
        }
    }
    let results = configs
        .iter()
        .map(|c| mc_run(c, &plan))
        .collect::<Result<Vec<_>, _>>()?;
    let format = match args.format {
        FormatArg::Tsv => TableFormat::Tsv,
        FormatArg::Text => TableFormat::Text,
    };
    let table = emit_table(&results, format)?;
    for r in &results {
        if !r.excluded_m.is_empty() {
            eprintln!(
                "note: sigma={} n={} alpha={}: truncations {:?} exceeded the usable rank and were excluded",
                r.config.sigma_eps, r.config.n, r.config.alpha, r.excluded_m
            );
        }
    }
    if let Some(path) = &args.profile {
        emit(Some(path), &emit_profile(&results))?;
    }
    emit(args.out.as_deref(), &table)
}

fn rate_check(args: RateCheckArgs) -> CliResult<()> {
    let plan = mc_plan(&args.grids)?;
    if args.n.len() < 3 || args.n.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter(
            "--n needs at least 3 strictly increasing sample sizes".into(),
        )
        .into());
    }
    let configs = args
        .n
        .iter()
        .map(|&n| sim_config(n, args.sigma, args.alpha, &args.design))
        .collect::<CliResult<Vec<_>>>()?;
    let results = configs
        .iter()
        .map(|c| mc_run(c, &plan))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = String::from("estimator\tn\tmise\ttuning\tfitted_slope\ttheoretical_slope\n");
    for which in [Estimator::Pca, Estimator::Ridge] {
        let fit = rate_fit_results(args.beta, &results, which)?;
        for (r, mise) in results.iter().zip(&fit.mise_values) {
            let tuning = match which {
                Estimator::Pca => r.m_star.to_string(),
                Estimator::Ridge => format!("{:.16e}", r.rho_star),
            };
            out.push_str(&format!(
                "{}\t{}\t{:.16e}\t{}\t{:.16e}\t{:.16e}\n",
                which.name(),
                r.config.n,
                mise,
                tuning,
                fit.fitted_slope,
                fit.theoretical_slope
            ));
        }
    }
    emit(args.out.as_deref(), &out)
}

fn diagnose(args: DiagnoseArgs) -> CliResult<()> {
    let config = sim_config(args.n, args.sigma, args.alpha, &args.design)?;
    if args.j_max == 0 || args.j_max >= config.p {
        return Err(Error::Parameter(format!("--j-max must lie in 1..{}", config.p)).into());
    }
    let t = truth(&config)?;
    let data = draw_replication(&config, &t, args.replication)?;
    let moments = compute_moments(&data)?;
    let report = perturbation_report(&t.k_true, moments.k_hat(), args.j_max)?;
    emit(args.out.as_deref(), &report.to_tsv())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::Predict(a) => predict_cmd(a),
        Command::McTable(a) => mc_table(a),
        Command::RateCheck(a) => rate_check(a),
        Command::Diagnose(a) => diagnose(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("flr: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
