use flr_core::evaluation::{default_rho_grid, McPlan};
use flr_core::simulation::{draw_replication, truth, SimConfig, Spacing};
use flr_core::spectral::{align_signs, eigendecompose};
use flr_core::{compute_moments, hs_norm, l2_distance_sq, mc_run, pca_fit, ridge_fit, Result};

/// Curves for one simulated sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FitCurves {
    pub t: Vec<f64>,
    pub truth: Vec<f64>,
    pub pca: Vec<f64>,
    pub ridge: Vec<f64>,
    pub ise_pca: f64,
    pub ise_ridge: f64,
    /// Largest admissible truncation for this sample.
    pub rank: usize,
}

pub fn fit_curves(
    spacing: Spacing,
    alpha: f64,
    n: usize,
    sigma: f64,
    seed: u64,
    m: usize,
    rho: f64,
) -> Result<FitCurves> {
    let config = SimConfig::new(n, sigma, alpha, spacing, seed);
    let t = truth(&config)?;
    let data = draw_replication(&config, &t, 0)?;
    let moments = compute_moments(&data)?;
    let rank = moments.usable_rank()?;
    let pca = pca_fit(&moments, m.clamp(1, rank.max(1)))?;
    let ridge = ridge_fit(&moments, rho)?;
    Ok(FitCurves {
        t: t.b_true.grid().points(),
        truth: t.b_true.values().to_vec(),
        ise_pca: l2_distance_sq(&pca.slope, &t.b_true)?,
        ise_ridge: l2_distance_sq(&ridge.slope, &t.b_true)?,
        pca: pca.slope.into_values(),
        ridge: ridge.slope.into_values(),
        rank,
    })
}

/// True against empirical eigenvalues, with the eigenfunction bound terms.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumView {
    pub kappa: Vec<f64>,
    pub kappa_hat: Vec<f64>,
    /// `‖φ_j − φ̂_j‖` after sign alignment.
    pub eigenfunction_dist: Vec<f64>,
    /// `sqrt(8) ‖K̂ − K‖ / δ_j`, the bound on the distance above.
    pub eigenfunction_bound: Vec<f64>,
    pub hs_gap: f64,
}

pub fn spectrum_view(
    spacing: Spacing,
    alpha: f64,
    n: usize,
    seed: u64,
    count: usize,
) -> Result<SpectrumView> {
    let config = SimConfig::new(n, 0.0, alpha, spacing, seed);
    let t = truth(&config)?;
    let data = draw_replication(&config, &t, 0)?;
    let moments = compute_moments(&data)?;
    let reference = eigendecompose(&t.k_true)?;
    let empirical = align_signs((*moments.spectrum()?).clone(), &reference)?;
    let hs_gap = hs_norm(&t.k_true.sub(moments.k_hat())?);
    let count = count.clamp(1, reference.len() - 1);

    let mut view = SpectrumView {
        kappa: reference.eigenvalues()[..count].to_vec(),
        kappa_hat: empirical.eigenvalues()[..count]
            .iter()
            .map(|k| k.max(0.0))
            .collect(),
        eigenfunction_dist: Vec::with_capacity(count),
        eigenfunction_bound: Vec::with_capacity(count),
        hs_gap,
    };
    let mut delta = f64::INFINITY;
    for j in 1..=count {
        delta = delta.min(reference.eigenvalue(j) - reference.eigenvalue(j + 1));
        let d = empirical
            .eigenfunction(j)
            .sub(reference.eigenfunction(j))?
            .norm();
        view.eigenfunction_dist.push(d);
        view.eigenfunction_bound.push(if delta > 0.0 {
            8f64.sqrt() * hs_gap / delta
        } else {
            f64::INFINITY
        });
    }
    Ok(view)
}

/// MISE against the smoothing parameter for both estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct MiseProfile {
    pub m: Vec<f64>,
    pub mise_pca: Vec<f64>,
    pub rho: Vec<f64>,
    pub mise_ridge: Vec<f64>,
    pub m_star: usize,
    pub rho_star: f64,
}

pub fn mise_profile(
    spacing: Spacing,
    alpha: f64,
    n: usize,
    sigma: f64,
    seed: u64,
    reps: usize,
) -> Result<MiseProfile> {
    let config = SimConfig::new(n, sigma, alpha, spacing, seed);
    let plan = McPlan {
        replications: reps,
        m_grid: (1..=20).collect(),
        rho_grid: default_rho_grid(),
        threads: None,
    };
    let res = mc_run(&config, &plan)?;
    Ok(MiseProfile {
        m: res.pca_profile.iter().map(|(m, _)| *m as f64).collect(),
        mise_pca: res.pca_profile.iter().map(|(_, s)| s.mise).collect(),
        rho: res.ridge_profile.iter().map(|(r, _)| *r).collect(),
        mise_ridge: res.ridge_profile.iter().map(|(_, s)| s.mise).collect(),
        m_star: res.m_star,
        rho_star: res.rho_star,
    })
}
