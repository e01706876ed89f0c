//! Data-generating process for the simulation study.
//!
//! `X = Σ_{j ≤ J} γ_j Z_j φ_j` with `Z_j` iid uniform on `[-√3, √3]`,
//! `Y = ∫ b X + ε`, `ε ~ N(0, σ²)`, on the cosine basis `φ_1 ≡ 1`,
//! `φ_{j+1} = √2 cos(jπt)`.
//!
//! Replication `r` draws from ChaCha20 seeded with the master seed on
//! stream `r`. Within a replication the order is: for each observation,
//! `Z_1 … Z_J` then `ε`. Gaussian noise uses the ziggurat sampler from
//! `rand_distr`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::estimators::Dataset;
use crate::grid::{inner_product, Grid, GridFunction, SymmetricKernel};

pub const DEFAULT_J: usize = 50;

/// Eigenvalue design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spacing {
    /// `γ_j = (-1)^{j+1} j^{-α/2}`, so `κ_j = j^{-α}`.
    WellSpaced,
    /// Blocks of five nearly tied eigenvalues.
    CloselySpaced,
}

impl fmt::Display for Spacing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spacing::WellSpaced => "well",
            Spacing::CloselySpaced => "closely",
        })
    }
}

impl FromStr for Spacing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "well" | "well_spaced" | "well-spaced" => Ok(Spacing::WellSpaced),
            "closely" | "closely_spaced" | "closely-spaced" | "close" => Ok(Spacing::CloselySpaced),
            _ => Err(Error::Parameter(format!(
                "unknown spacing `{s}` (expected `well` or `closely`)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub sigma_eps: f64,
    pub alpha: f64,
    pub spacing: Spacing,
    pub j_terms: usize,
    pub p: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(n: usize, sigma_eps: f64, alpha: f64, spacing: Spacing, seed: u64) -> Self {
        Self {
            n,
            sigma_eps,
            alpha,
            spacing,
            j_terms: DEFAULT_J,
            p: crate::grid::DEFAULT_P,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Parameter(format!("n must be >= 2, got {}", self.n)));
        }
        if !(self.sigma_eps >= 0.0 && self.sigma_eps.is_finite()) {
            return Err(Error::Parameter(format!(
                "sigma must be finite and >= 0, got {}",
                self.sigma_eps
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Parameter(format!(
                "alpha must be > 0, got {}",
                self.alpha
            )));
        }
        if self.p < 2 {
            return Err(Error::Parameter(format!("p must be >= 2, got {}", self.p)));
        }
        if self.j_terms == 0 || self.j_terms > self.p {
            return Err(Error::Parameter(format!(
                "J must lie in 1..={} for p = {}, got {}",
                self.p, self.p, self.j_terms
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.p)
    }
}

/// The population quantities behind a [`SimConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct TruthBundle {
    pub b_true: GridFunction,
    pub gamma: Vec<f64>,
    pub k_true: SymmetricKernel,
    /// `γ_j²` sorted nonincreasing.
    pub kappa_sorted: Vec<f64>,
    /// `order[i]` is the (one based) basis index of `kappa_sorted[i]`.
    pub order: Vec<usize>,
    basis: Vec<GridFunction>,
}

impl TruthBundle {
    pub fn basis(&self) -> &[GridFunction] {
        &self.basis
    }
}

/// `φ_j` for `1 ≤ j ≤ p`: `φ_1 ≡ 1`, `φ_{j+1}(t) = √2 cos(jπt)`.
pub fn basis(j: usize, grid: Grid) -> Result<GridFunction> {
    if j == 0 || j > grid.len() {
        return Err(Error::Parameter(format!(
            "basis index must lie in 1..={}, got {j}",
            grid.len()
        )));
    }
    if j == 1 {
        return Ok(GridFunction::constant(grid, 1.0));
    }
    let freq = (j - 1) as f64 * PI;
    Ok(GridFunction::from_fn(grid, |t| {
        2f64.sqrt() * (freq * t).cos()
    }))
}

/// Slope coefficient `b_j`: `b_1 = 0.3`, `b_j = 4 (-1)^{j+1} j^{-2}`.
pub fn slope_coefficient(j: usize) -> f64 {
    if j == 1 {
        0.3
    } else {
        4.0 * alternating(j) / (j * j) as f64
    }
}

/// `b = Σ_{j ≤ J} b_j φ_j`.
pub fn true_slope(grid: Grid, j_terms: usize) -> Result<GridFunction> {
    let mut b = GridFunction::zeros(grid);
    for j in 1..=j_terms {
        b.axpy(slope_coefficient(j), &basis(j, grid)?);
    }
    Ok(b)
}

/// `(-1)^{j+1}`
fn alternating(j: usize) -> f64 {
    if j % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Score standard deviations `γ_1 … γ_J` for the given design.
pub fn gamma_sequence(spacing: Spacing, alpha: f64, j_terms: usize) -> Vec<f64> {
    (1..=j_terms)
        .map(|j| match spacing {
            Spacing::WellSpaced => alternating(j) * (j as f64).powf(-alpha / 2.0),
            Spacing::CloselySpaced => match j {
                1 => 1.0,
                2..=4 => 0.2 * alternating(j) * (1.0 - 0.0001 * j as f64),
                _ => {
                    let block = (j / 5) as f64;
                    let k = (j % 5) as f64;
                    0.2 * alternating(j) * ((5.0 * block).powf(-alpha / 2.0) - 0.0001 * k)
                }
            },
        })
        .collect()
}

pub fn truth(config: &SimConfig) -> Result<TruthBundle> {
    config.validate()?;
    let grid = config.grid()?;
    let basis = (1..=config.j_terms)
        .map(|j| basis(j, grid))
        .collect::<Result<Vec<_>>>()?;
    let gamma = gamma_sequence(config.spacing, config.alpha, config.j_terms);
    let kappa: Vec<f64> = gamma.iter().map(|g| g * g).collect();
    let k_true = SymmetricKernel::from_expansion(&kappa, &basis)?;
    let mut order: Vec<usize> = (1..=config.j_terms).collect();
    order.sort_by(|&a, &b| kappa[b - 1].total_cmp(&kappa[a - 1]).then(a.cmp(&b)));
    let kappa_sorted = order.iter().map(|&j| kappa[j - 1]).collect();
    Ok(TruthBundle {
        b_true: true_slope(grid, config.j_terms)?,
        gamma,
        k_true,
        kappa_sorted,
        order,
        basis,
    })
}

fn score_distribution() -> Uniform<f64> {
    let h = 3f64.sqrt();
    Uniform::new_inclusive(-h, h).expect("finite bounds")
}

/// Generator for replication `r` of a run seeded with `seed`.
pub fn replication_rng(seed: u64, r: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(r);
    rng
}

/// Draws replication `r` given precomputed `truth`.
pub fn draw_replication(config: &SimConfig, truth: &TruthBundle, r: u64) -> Result<Dataset> {
    config.validate()?;
    let grid = truth.b_true.grid();
    let mut rng = replication_rng(config.seed, r);
    let scores = score_distribution();
    let mut x = Vec::with_capacity(config.n);
    let mut y = Vec::with_capacity(config.n);
    let mut z = vec![0.0; config.j_terms];
    for _ in 0..config.n {
        for zj in z.iter_mut() {
            *zj = scores.sample(&mut rng);
        }
        let eps: f64 = StandardNormal.sample(&mut rng);
        let mut xi = GridFunction::zeros(grid);
        for ((zj, gj), phi) in z.iter().zip(&truth.gamma).zip(&truth.basis) {
            xi.axpy(gj * zj, phi);
        }
        y.push(inner_product(&truth.b_true, &xi)? + config.sigma_eps * eps);
        x.push(xi);
    }
    Dataset::new(x, y)
}

/// Replication zero of `config`, with its truth.
pub fn draw_dataset(config: &SimConfig) -> Result<(Dataset, TruthBundle)> {
    let t = truth(config)?;
    Ok((draw_replication(config, &t, 0)?, t))
}
