//! Monte Carlo harness: integrated squared bias, integrated variance and
//! MISE over replications, oracle tuning, tables and rate fits.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::estimators::{compute_moments, pca_slope, ridge_slope_solve, usable_rank};
use crate::simulation::{draw_replication, truth, SimConfig, Spacing, TruthBundle};

/// Integrated squared bias, integrated variance and MISE of one candidate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateStats {
    pub bias2: f64,
    pub var: f64,
    pub mise: f64,
}

/// Oracle-tuned summary of one simulation configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct McResult {
    pub config: SimConfig,
    pub replications: usize,
    pub m_star: usize,
    pub rho_star: f64,
    pub pca: CandidateStats,
    pub ridge: CandidateStats,
    /// Every admissible truncation, ascending.
    pub pca_profile: Vec<(usize, CandidateStats)>,
    /// Every ridge parameter, ascending.
    pub ridge_profile: Vec<(f64, CandidateStats)>,
    /// Truncations dropped because some replication had too small a rank.
    pub excluded_m: Vec<usize>,
}

/// Candidate grids and execution settings for [`mc_run`].
#[derive(Debug, Clone, PartialEq)]
pub struct McPlan {
    pub replications: usize,
    pub m_grid: Vec<usize>,
    pub rho_grid: Vec<f64>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl McPlan {
    pub fn new(replications: usize) -> Self {
        Self {
            replications,
            m_grid: default_m_grid(),
            rho_grid: default_rho_grid(),
            threads: None,
        }
    }

    fn normalized(&self) -> Result<(Vec<usize>, Vec<f64>)> {
        if self.replications < 2 {
            return Err(Error::Parameter(format!(
                "need at least 2 replications, got {}",
                self.replications
            )));
        }
        if self.threads == Some(0) {
            return Err(Error::Parameter("thread count must be positive".into()));
        }
        let mut m = self.m_grid.clone();
        m.sort_unstable();
        m.dedup();
        if m.is_empty() || m[0] == 0 {
            return Err(Error::Parameter(
                "truncation grid must be nonempty and >= 1".into(),
            ));
        }
        let mut rho = self.rho_grid.clone();
        if rho.is_empty() || rho.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::Parameter(
                "ridge grid must be nonempty and > 0".into(),
            ));
        }
        rho.sort_by(f64::total_cmp);
        rho.dedup();
        Ok((m, rho))
    }
}

/// `1, …, 20`.
pub fn default_m_grid() -> Vec<usize> {
    (1..=20).collect()
}

/// 25 log-spaced values from `1e-6` to `1`.
pub fn default_rho_grid() -> Vec<f64> {
    (0..25)
        .map(|k| 10f64.powf(-6.0 + 0.25 * k as f64))
        .collect()
}

struct Replicate {
    pca: Vec<Option<Vec<f64>>>,
    ridge: Vec<Vec<f64>>,
}

fn replicate(
    config: &SimConfig,
    truth: &TruthBundle,
    r: usize,
    m_grid: &[usize],
    rho_grid: &[f64],
) -> Result<Replicate> {
    let data = draw_replication(config, truth, r as u64)?;
    let moments = compute_moments(&data)?;
    let spectrum = moments.spectrum()?;
    let rank = usable_rank(&spectrum);
    let pca = m_grid
        .iter()
        .map(|&m| {
            if m > rank {
                Ok(None)
            } else {
                pca_slope(&spectrum, moments.g_hat(), m).map(|s| Some(s.into_values()))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let ridge = rho_grid
        .iter()
        .map(|&rho| {
            ridge_slope_solve(moments.k_hat(), moments.g_hat(), rho).map(|s| s.into_values())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Replicate { pca, ridge })
}

fn run_replicates(
    config: &SimConfig,
    truth: &TruthBundle,
    plan_threads: Option<usize>,
    reps: usize,
    m_grid: &[usize],
    rho_grid: &[f64],
) -> Result<Vec<Replicate>> {
    let job = |r: usize| replicate(config, truth, r, m_grid, rho_grid);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let work = || {
            (0..reps)
                .into_par_iter()
                .map(job)
                .collect::<Result<Vec<_>>>()
        };
        match plan_threads {
            Some(t) => rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?
                .install(work),
            None => work(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = plan_threads;
        (0..reps).map(job).collect()
    }
}

/// Summarises estimates of `truth` from `R` replications, reducing in
/// replication order.
pub fn candidate_stats(estimates: &[&[f64]], truth: &[f64]) -> CandidateStats {
    let reps = estimates.len() as f64;
    let p = truth.len() as f64;
    let mut mean = vec![0.0; truth.len()];
    for est in estimates {
        for (acc, v) in mean.iter_mut().zip(est.iter()) {
            *acc += v;
        }
    }
    mean.iter_mut().for_each(|v| *v /= reps);

    let bias2 = mean
        .iter()
        .zip(truth)
        .map(|(m, b)| (m - b) * (m - b))
        .sum::<f64>()
        / p;
    let mut var = 0.0;
    let mut mise = 0.0;
    for est in estimates {
        for ((v, m), b) in est.iter().zip(&mean).zip(truth) {
            var += (v - m) * (v - m);
            mise += (v - b) * (v - b);
        }
    }
    CandidateStats {
        bias2,
        var: var / (reps * p),
        mise: mise / (reps * p),
    }
}

/// Runs `plan.replications` replications of `config` and evaluates every
/// candidate truncation and ridge parameter on the same draws.
pub fn mc_run(config: &SimConfig, plan: &McPlan) -> Result<McResult> {
    let (m_grid, rho_grid) = plan.normalized()?;
    let truth = truth(config)?;
    let reps = run_replicates(
        config,
        &truth,
        plan.threads,
        plan.replications,
        &m_grid,
        &rho_grid,
    )?;
    let b = truth.b_true.values();

    let mut pca_profile = Vec::new();
    let mut excluded_m = Vec::new();
    for (c, &m) in m_grid.iter().enumerate() {
        let ests: Option<Vec<&[f64]>> = reps.iter().map(|r| r.pca[c].as_deref()).collect();
        match ests {
            Some(ests) => pca_profile.push((m, candidate_stats(&ests, b))),
            None => excluded_m.push(m),
        }
    }
    let ridge_profile: Vec<(f64, CandidateStats)> = rho_grid
        .iter()
        .enumerate()
        .map(|(c, &rho)| {
            let ests: Vec<&[f64]> = reps.iter().map(|r| r.ridge[c].as_slice()).collect();
            (rho, candidate_stats(&ests, b))
        })
        .collect();

    let (m_star, pca) = pca_profile
        .iter()
        .fold(
            None::<(usize, CandidateStats)>,
            |best, &(m, s)| match best {
                Some((_, bs)) if bs.mise <= s.mise => best,
                _ => Some((m, s)),
            },
        )
        .ok_or_else(|| Error::Rank {
            requested: m_grid[0],
            max_admissible: 0,
        })?;
    // descending ρ so that ties keep the larger value
    let (rho_star, ridge) = ridge_profile
        .iter()
        .rev()
        .fold(
            None::<(f64, CandidateStats)>,
            |best, &(rho, s)| match best {
                Some((_, bs)) if bs.mise <= s.mise => best,
                _ => Some((rho, s)),
            },
        )
        .expect("ridge grid is nonempty");

    Ok(McResult {
        config: *config,
        replications: plan.replications,
        m_star,
        rho_star,
        pca,
        ridge,
        pca_profile,
        ridge_profile,
        excluded_m,
    })
}

/// MISE-minimising `(m, ρ)`; ties go to the smaller `m` and the larger `ρ`.
pub fn oracle_tune(config: &SimConfig, plan: &McPlan) -> Result<(usize, f64)> {
    let res = mc_run(config, plan)?;
    Ok((res.m_star, res.rho_star))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    Pca,
    Ridge,
}

impl Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::Pca => "pca",
            Estimator::Ridge => "ridge",
        }
    }
}

/// Empirical against theoretical convergence exponent of MISE in `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub alpha: f64,
    pub beta: f64,
    pub sample_sizes: Vec<usize>,
    pub mise_values: Vec<f64>,
    /// Least-squares slope of `log MISE` on `log n`.
    pub fitted_slope: f64,
    /// `-(2β - 1) / (α + 2β)`.
    pub theoretical_slope: f64,
}

impl RateFit {
    /// Growth exponent of the optimal truncation, `m ≍ n^{1/(α+2β)}`.
    pub fn truncation_exponent(&self) -> f64 {
        1.0 / (self.alpha + 2.0 * self.beta)
    }

    /// Decay exponent of the optimal ridge, `ρ ≍ n^{-α/(α+2β)}`.
    pub fn ridge_exponent(&self) -> f64 {
        -self.alpha / (self.alpha + 2.0 * self.beta)
    }
}

pub fn theoretical_slope(alpha: f64, beta: f64) -> f64 {
    -(2.0 * beta - 1.0) / (alpha + 2.0 * beta)
}

pub fn rate_fit(alpha: f64, beta: f64, sample_sizes: &[usize], mise: &[f64]) -> Result<RateFit> {
    if sample_sizes.len() != mise.len() {
        return Err(Error::Dimension(format!(
            "{} sample sizes for {} MISE values",
            sample_sizes.len(),
            mise.len()
        )));
    }
    if sample_sizes.len() < 3 {
        return Err(Error::Parameter(
            "rate fit needs at least 3 sample sizes".into(),
        ));
    }
    if sample_sizes.windows(2).any(|w| w[0] >= w[1]) || sample_sizes[0] == 0 {
        return Err(Error::Parameter(
            "sample sizes must be positive and strictly increasing".into(),
        ));
    }
    if let Some(v) = mise.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Parameter(format!(
            "cannot take the log of MISE = {v}"
        )));
    }
    let xs: Vec<f64> = sample_sizes.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = mise.iter().map(|v| v.ln()).collect();
    let k = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / k;
    let ym = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    Ok(RateFit {
        alpha,
        beta,
        sample_sizes: sample_sizes.to_vec(),
        mise_values: mise.to_vec(),
        fitted_slope: sxy / sxx,
        theoretical_slope: theoretical_slope(alpha, beta),
    })
}

/// Rate fit over oracle-tuned results ordered by `n`.
pub fn rate_fit_results(beta: f64, results: &[McResult], which: Estimator) -> Result<RateFit> {
    let alpha = results
        .first()
        .map(|r| r.config.alpha)
        .ok_or_else(|| Error::Parameter("no results to fit".into()))?;
    let ns: Vec<usize> = results.iter().map(|r| r.config.n).collect();
    let mise: Vec<f64> = results
        .iter()
        .map(|r| match which {
            Estimator::Pca => r.pca.mise,
            Estimator::Ridge => r.ridge.mise,
        })
        .collect();
    rate_fit(alpha, beta, &ns, &mise)
}

/// One line of a results table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub sigma_eps: f64,
    pub n: usize,
    pub alpha: f64,
    pub m: usize,
    pub rho: f64,
    pub bias2_pca: f64,
    pub bias2_ridge: f64,
    pub var_pca: f64,
    pub var_ridge: f64,
    pub mise_pca: f64,
    pub mise_ridge: f64,
}

impl From<&McResult> for TableRow {
    fn from(r: &McResult) -> Self {
        Self {
            sigma_eps: r.config.sigma_eps,
            n: r.config.n,
            alpha: r.config.alpha,
            m: r.m_star,
            rho: r.rho_star,
            bias2_pca: r.pca.bias2,
            bias2_ridge: r.ridge.bias2,
            var_pca: r.pca.var,
            var_ridge: r.ridge.var,
            mise_pca: r.pca.mise,
            mise_ridge: r.ridge.mise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    /// Tab separated, 17 significant digits.
    Tsv,
    /// Aligned columns, 3 decimals.
    Text,
}

pub const TABLE_COLUMNS: [&str; 11] = [
    "sigma_eps",
    "n",
    "alpha",
    "m",
    "rho",
    "bias2_pca",
    "bias2_ridge",
    "var_pca",
    "var_ridge",
    "mise_pca",
    "mise_ridge",
];

pub fn emit_table(results: &[McResult], format: TableFormat) -> Result<String> {
    let spacing: Option<Spacing> = match results.first() {
        None => None,
        Some(first) => {
            let s = first.config.spacing;
            if results.iter().any(|r| r.config.spacing != s) {
                return Err(Error::Parameter("table rows mix spacing designs".into()));
            }
            Some(s)
        }
    };
    let mut out = String::new();
    if let Some(s) = spacing {
        let _ = writeln!(out, "# spacing={s} reps={}", results[0].replications);
    }
    match format {
        TableFormat::Tsv => {
            out.push_str(&TABLE_COLUMNS.join("\t"));
            out.push('\n');
            for row in results.iter().map(TableRow::from) {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{:.16e}\t{:.16e}\t{:.16e}\t{:.16e}\t{:.16e}\t{:.16e}\t{:.16e}",
                    row.sigma_eps,
                    row.n,
                    row.alpha,
                    row.m,
                    row.rho,
                    row.bias2_pca,
                    row.bias2_ridge,
                    row.var_pca,
                    row.var_ridge,
                    row.mise_pca,
                    row.mise_ridge
                );
            }
        }
        TableFormat::Text => {
            let header: Vec<String> = TABLE_COLUMNS.iter().map(|c| format!("{c:>11}")).collect();
            out.push_str(header.join(" ").trim_end());
            out.push('\n');
            for row in results.iter().map(TableRow::from) {
                let _ = writeln!(
                    out,
                    "{:>11.3} {:>11} {:>11.3} {:>11} {:>11.3e} {:>11.3} {:>11.3} {:>11.3} {:>11.3} {:>11.3} {:>11.3}",
                    row.sigma_eps,
                    row.n,
                    row.alpha,
                    row.m,
                    row.rho,
                    row.bias2_pca,
                    row.bias2_ridge,
                    row.var_pca,
                    row.var_ridge,
                    row.mise_pca,
                    row.mise_ridge
                );
            }
        }
    }
    Ok(out)
}

/// Parses either table format back into rows.
pub fn parse_table(text: &str) -> Result<Vec<TableRow>> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split_whitespace().collect();
        if !saw_header {
            if cells != TABLE_COLUMNS {
                return Err(Error::Format(format!("unexpected table header `{line}`")));
            }
            saw_header = true;
            continue;
        }
        if cells.len() != TABLE_COLUMNS.len() {
            return Err(Error::Format(format!(
                "expected {} columns, got {}",
                TABLE_COLUMNS.len(),
                cells.len()
            )));
        }
        let f = |i: usize| crate::estimators::parse_f64(cells[i]);
        let u = |i: usize| {
            cells[i]
                .parse::<usize>()
                .map_err(|_| Error::Format(format!("not an integer: `{}`", cells[i])))
        };
        rows.push(TableRow {
            sigma_eps: f(0)?,
            n: u(1)?,
            alpha: f(2)?,
            m: u(3)?,
            rho: f(4)?,
            bias2_pca: f(5)?,
            bias2_ridge: f(6)?,
            var_pca: f(7)?,
            var_ridge: f(8)?,
            mise_pca: f(9)?,
            mise_ridge: f(10)?,
        });
    }
    if !saw_header {
        return Err(Error::Format("missing table header".into()));
    }
    Ok(rows)
}

/// Per-candidate MISE for every configuration, for plotting.
pub fn emit_profile(results: &[McResult]) -> String {
    let mut out = String::from("sigma_eps\tn\talpha\testimator\tcandidate\tmise\n");
    for r in results {
        let c = &r.config;
        for (m, s) in &r.pca_profile {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\tpca\t{m}\t{:.16e}",
                c.sigma_eps, c.n, c.alpha, s.mise
            );
        }
        for (rho, s) in &r.ridge_profile {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\tridge\t{rho:.16e}\t{:.16e}",
                c.sigma_eps, c.n, c.alpha, s.mise
            );
        }
    }
    out
}
