//! Empirical moments and the two slope estimators.
//!
//! Both estimators solve the empirical version of `K b = g`:
//! the spectral cutoff keeps the leading `m` eigenpairs of `K̂`, the ridge
//! estimator solves `(K̂ + ρ I) b = ĝ`.

use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{inner_product, Grid, GridFunction, SymmetricKernel};
use crate::spectral::{eigendecompose, EigenSystem};

/// `κ̂_j` at or below `USABLE_REL_TOL * κ̂_1` is treated as zero by [`pca_fit`].
pub const USABLE_REL_TOL: f64 = 1e-10;

/// Paired functional predictors and scalar responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    grid: Grid,
    x: Vec<GridFunction>,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(x: Vec<GridFunction>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Dimension(format!(
                "{} predictors for {} responses",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: x.len(),
            });
        }
        let grid = x[0].grid();
        if x.iter().any(|f| f.grid() != grid) {
            return Err(Error::Dimension(
                "predictors sampled on different grids".into(),
            ));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invariant("non-finite response".into()));
        }
        Ok(Self { grid, x, y })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn x(&self) -> &[GridFunction] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Same predictors with `y_i + c`.
    pub fn shift_responses(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            x: self.x.clone(),
            y: self.y.iter().map(|v| v + c).collect(),
        }
    }
}

/// Sample means, `K̂` and `ĝ`. The eigendecomposition of `K̂` is computed on
/// first use and cached.
#[derive(Debug, Clone)]
pub struct CenteredMoments {
    n: usize,
    x_bar: GridFunction,
    y_bar: f64,
    k_hat: SymmetricKernel,
    g_hat: GridFunction,
    spectrum: OnceLock<Arc<EigenSystem>>,
}

impl CenteredMoments {
    /// Builds moments directly from `K̂` and `ĝ` with zero means.
    pub fn from_parts(k_hat: SymmetricKernel, g_hat: GridFunction) -> Result<Self> {
        let grid = k_hat.grid();
        if g_hat.grid() != grid {
            return Err(Error::Dimension("K̂ and ĝ on different grids".into()));
        }
        Ok(Self {
            n: 0,
            x_bar: GridFunction::zeros(grid),
            y_bar: 0.0,
            k_hat,
            g_hat,
            spectrum: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_bar(&self) -> &GridFunction {
        &self.x_bar
    }

    pub fn y_bar(&self) -> f64 {
        self.y_bar
    }

    pub fn k_hat(&self) -> &SymmetricKernel {
        &self.k_hat
    }

    pub fn g_hat(&self) -> &GridFunction {
        &self.g_hat
    }

    pub fn grid(&self) -> Grid {
        self.k_hat.grid()
    }

    pub fn spectrum(&self) -> Result<Arc<EigenSystem>> {
        if let Some(s) = self.spectrum.get() {
            return Ok(Arc::clone(s));
        }
        let s = Arc::new(eigendecompose(&self.k_hat)?);
        Ok(Arc::clone(self.spectrum.get_or_init(|| s)))
    }

    /// Largest `m` accepted by [`pca_fit`].
    pub fn usable_rank(&self) -> Result<usize> {
        Ok(usable_rank(&*self.spectrum()?))
    }

    fn intercept(&self, slope: &GridFunction) -> Result<f64> {
        Ok(self.y_bar - inner_product(slope, &self.x_bar)?)
    }
}

/// Number of leading eigenvalues above both `USABLE_REL_TOL * κ̂_1` and the
/// numerical-null threshold.
pub(crate) fn usable_rank(spectrum: &EigenSystem) -> usize {
    let top = spectrum.eigenvalues().first().copied().unwrap_or(0.0);
    let floor = (USABLE_REL_TOL * top).max(spectrum.null_threshold());
    spectrum
        .eigenvalues()
        .iter()
        .take_while(|&&k| k > floor)
        .count()
}

/// Smoothing method and its parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Pca { m: usize },
    Ridge { rho: f64 },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Pca { .. } => "pca",
            Method::Ridge { .. } => "ridge",
        }
    }
}

/// A fitted slope function with its intercept.
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub slope: GridFunction,
    pub intercept: f64,
    pub method: Method,
    /// Spectrum of `K̂` the fit was built from, absent for models read from disk.
    pub spectrum: Option<Arc<EigenSystem>>,
}

/// Accumulates `K̂` and `ĝ` from centred observations.
pub fn compute_moments(data: &Dataset) -> Result<CenteredMoments> {
    let n = data.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let grid = data.grid();
    let p = grid.len();
    let inv_n = 1.0 / n as f64;

    let mut x_bar = vec![0.0; p];
    for xi in data.x() {
        for (acc, v) in x_bar.iter_mut().zip(xi.values()) {
            *acc += v;
        }
    }
    x_bar.iter_mut().for_each(|v| *v *= inv_n);
    let y_bar = data.y().iter().sum::<f64>() * inv_n;

    let mut k = DMatrix::<f64>::zeros(p, p);
    let mut g = vec![0.0; p];
    let mut centred = vec![0.0; p];
    for (xi, yi) in data.x().iter().zip(data.y()) {
        for ((c, v), m) in centred.iter_mut().zip(xi.values()).zip(&x_bar) {
            *c = v - m;
        }
        let dy = yi - y_bar;
        for u in 0..p {
            g[u] += dy * centred[u];
            let cu = centred[u];
            for v in u..p {
                k[(u, v)] += cu * centred[v];
            }
        }
    }
    for u in 0..p {
        g[u] *= inv_n;
        for v in u..p {
            let val = k[(u, v)] * inv_n;
            k[(u, v)] = val;
            k[(v, u)] = val;
        }
    }

    Ok(CenteredMoments {
        n,
        x_bar: GridFunction::new(grid, x_bar)?,
        y_bar,
        k_hat: SymmetricKernel::new(grid, k)?,
        g_hat: GridFunction::new(grid, g)?,
        spectrum: OnceLock::new(),
    })
}

/// `Σ_{j ≤ m} (ĝ_j / κ̂_j) φ̂_j`; `m` is not range checked against the usable rank.
pub fn pca_slope(spectrum: &EigenSystem, g_hat: &GridFunction, m: usize) -> Result<GridFunction> {
    let mut slope = GridFunction::zeros(spectrum.grid());
    for j in 1..=m {
        let phi = spectrum.eigenfunction(j);
        slope.axpy(inner_product(g_hat, phi)? / spectrum.eigenvalue(j), phi);
    }
    Ok(slope)
}

/// Spectral form of the ridge estimator over all eigenpairs,
/// `Σ_j ĝ_j / (max(κ̂_j, 0) + ρ) φ̂_j`.
pub fn ridge_slope_spectral(
    spectrum: &EigenSystem,
    g_hat: &GridFunction,
    rho: f64,
) -> Result<GridFunction> {
    check_rho(rho)?;
    let mut slope = GridFunction::zeros(spectrum.grid());
    for j in 1..=spectrum.len() {
        let phi = spectrum.eigenfunction(j);
        let coef = inner_product(g_hat, phi)? / (spectrum.clamped_eigenvalue(j) + rho);
        slope.axpy(coef, phi);
    }
    Ok(slope)
}

/// Solves `(K̂ / p + ρ Id) b = ĝ` on the grid.
pub fn ridge_slope_solve(
    k_hat: &SymmetricKernel,
    g_hat: &GridFunction,
    rho: f64,
) -> Result<GridFunction> {
    check_rho(rho)?;
    let grid = k_hat.grid();
    if g_hat.grid() != grid {
        return Err(Error::Dimension("K̂ and ĝ on different grids".into()));
    }
    let p = grid.len();
    let a = k_hat.values() * grid.weight() + DMatrix::<f64>::identity(p, p) * rho;
    let rhs = DVector::from_column_slice(g_hat.values());
    let sol = match a.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => a
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("ridge system is singular".into()))?,
    };
    GridFunction::new(grid, sol.iter().copied().collect())
        .map_err(|_| Error::Numerical("ridge solution is not finite".into()))
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::Parameter(format!(
            "ridge parameter must be > 0, got {rho}"
        )));
    }
    Ok(())
}

/// Spectral-cutoff estimator with truncation `m` (one based, `m ≥ 1`).
pub fn pca_fit(moments: &CenteredMoments, m: usize) -> Result<FittedModel> {
    if m == 0 {
        return Err(Error::Parameter("truncation m must be at least 1".into()));
    }
    let spectrum = moments.spectrum()?;
    let rank = usable_rank(&spectrum);
    if m > rank {
        return Err(Error::Rank {
            requested: m,
            max_admissible: rank,
        });
    }
    let slope = pca_slope(&spectrum, moments.g_hat(), m)?;
    Ok(FittedModel {
        intercept: moments.intercept(&slope)?,
        slope,
        method: Method::Pca { m },
        spectrum: Some(spectrum),
    })
}

/// Tikhonov estimator via the linear solve.
pub fn ridge_fit(moments: &CenteredMoments, rho: f64) -> Result<FittedModel> {
    let slope = ridge_slope_solve(moments.k_hat(), moments.g_hat(), rho)?;
    Ok(FittedModel {
        intercept: moments.intercept(&slope)?,
        slope,
        method: Method::Ridge { rho },
        spectrum: moments.spectrum.get().cloned(),
    })
}

/// `n^{-1} Σ_i (Y_i − ∫ slope · X_i)`.
pub fn estimate_intercept(slope: &GridFunction, data: &Dataset) -> Result<f64> {
    let mut acc = 0.0;
    for (xi, yi) in data.x().iter().zip(data.y()) {
        acc += yi - inner_product(slope, xi)?;
    }
    Ok(acc / data.len() as f64)
}

pub fn predict(model: &FittedModel, x_new: &GridFunction) -> Result<f64> {
    Ok(model.intercept + inner_product(&model.slope, x_new)?)
}

/// Plain-text model file: `key=value` header lines followed by `p` slope
/// values, all with 17 significant digits.
pub fn write_model(model: &FittedModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "method={}", model.method.name());
    match model.method {
        Method::Pca { m } => {
            let _ = writeln!(out, "parameter={m}");
        }
        Method::Ridge { rho } => {
            let _ = writeln!(out, "parameter={rho:.16e}");
        }
    }
    let _ = writeln!(out, "intercept={:.16e}", model.intercept);
    let _ = writeln!(out, "p={}", model.slope.grid().len());
    for v in model.slope.values() {
        let _ = writeln!(out, "{v:.16e}");
    }
    out
}

pub fn read_model(text: &str) -> Result<FittedModel> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let mut header = |key: &str| -> Result<String> {
        let line = lines
            .next()
            .ok_or_else(|| Error::Format(format!("missing `{key}` line")))?;
        line.strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .map(|v| v.trim().to_string())
            .ok_or_else(|| Error::Format(format!("expected `{key}=...`, got `{line}`")))
    };
    let method = header("method")?;
    let parameter = header("parameter")?;
    let intercept = parse_f64(&header("intercept")?)?;
    let p: usize = header("p")?
        .parse()
        .map_err(|_| Error::Format("grid size is not an integer".into()))?;
    let method = match method.as_str() {
        "pca" => Method::Pca {
            m: parameter
                .parse()
                .map_err(|_| Error::Format(format!("bad truncation `{parameter}`")))?,
        },
        "ridge" => Method::Ridge {
            rho: parse_f64(&parameter)?,
        },
        other => return Err(Error::Format(format!("unknown method `{other}`"))),
    };
    let values = lines
        .map(|l| parse_f64(l.trim()))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != p {
        return Err(Error::Format(format!(
            "header says p={p} but {} slope values follow",
            values.len()
        )));
    }
    let grid = Grid::new(p).map_err(|e| Error::Format(e.to_string()))?;
    Ok(FittedModel {
        slope: GridFunction::new(grid, values).map_err(|e| Error::Format(e.to_string()))?,
        intercept,
        method,
        spectrum: None,
    })
}

pub(crate) fn parse_f64(s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::Format(format!("not a number: `{s}`")))?;
    if !v.is_finite() {
        return Err(Error::Format(format!("non-finite number: `{s}`")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::l2_distance_sq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(50).unwrap()
    }

    fn cosine(j: usize) -> GridFunction {
        GridFunction::from_fn(grid(), |t| 2f64.sqrt() * (j as f64 * PI * t).cos())
    }

    fn random_data(rng: &mut impl Rng, n: usize, p: usize) -> Dataset {
        let g = Grid::new(p).unwrap();
        let x = (0..n)
            .map(|_| {
                GridFunction::new(g, (0..p).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
            })
            .collect();
        let y = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        Dataset::new(x, y).unwrap()
    }

    #[test]
    fn dataset_validation() {
        assert!(matches!(
            Dataset::new(vec![cosine(1)], vec![1.0]),
            Err(Error::InsufficientData { needed: 2, got: 1 })
        ));
        assert!(Dataset::new(vec![cosine(1), cosine(2)], vec![1.0]).is_err());
        let other = GridFunction::zeros(Grid::new(3).unwrap());
        assert!(Dataset::new(vec![cosine(1), other], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn identical_predictors_give_zero_moments() {
        let d = Dataset::new(vec![cosine(2); 5], vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let mom = compute_moments(&d).unwrap();
        assert!(mom.k_hat().values().iter().all(|v| v.abs() < 1e-15));
        assert!(mom.g_hat().values().iter().all(|v| v.abs() < 1e-15));
        assert_eq!(mom.usable_rank().unwrap(), 0);
        assert!(matches!(
            pca_fit(&mom, 1),
            Err(Error::Rank {
                max_admissible: 0,
                ..
            })
        ));
    }

    #[test]
    fn two_point_moments_by_hand() {
        let phi = cosine(1);
        let d = Dataset::new(vec![phi.clone(), phi.scaled(-1.0)], vec![1.0, -1.0]).unwrap();
        let mom = compute_moments(&d).unwrap();
        let want = SymmetricKernel::rank_one(&phi, 1.0);
        assert!((mom.k_hat().values() - want.values()).amax() < 1e-14);
        assert!(l2_distance_sq(mom.g_hat(), &phi).unwrap() < 1e-28);
        assert_eq!(mom.y_bar(), 0.0);
        assert_eq!(mom.k_hat().values(), &mom.k_hat().values().transpose());
    }

    #[test]
    fn single_eigenpair_fits() {
        let phi = cosine(1);
        let k = SymmetricKernel::rank_one(&phi, 1.0);
        let mom = CenteredMoments::from_parts(k.clone(), phi.scaled(0.5)).unwrap();
        let fit = pca_fit(&mom, 1).unwrap();
        assert!(l2_distance_sq(&fit.slope, &phi.scaled(0.5)).unwrap() < 1e-24);
        assert!(matches!(
            pca_fit(&mom, 2),
            Err(Error::Rank {
                requested: 2,
                max_admissible: 1
            })
        ));
        assert!(matches!(pca_fit(&mom, 0), Err(Error::Parameter(_))));

        let mom = CenteredMoments::from_parts(k, phi.clone()).unwrap();
        let fit = ridge_fit(&mom, 1.0).unwrap();
        assert!(l2_distance_sq(&fit.slope, &phi.scaled(0.5)).unwrap() < 1e-24);
    }

    #[test]
    fn zero_cross_covariance_gives_zero_slope() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = random_data(&mut rng, 30, 50);
        let mom = compute_moments(&d).unwrap();
        let mom =
            CenteredMoments::from_parts(mom.k_hat().clone(), GridFunction::zeros(grid())).unwrap();
        assert!(pca_fit(&mom, 3)
            .unwrap()
            .slope
            .values()
            .iter()
            .all(|v| *v == 0.0));
        assert!(ridge_fit(&mom, 0.1)
            .unwrap()
            .slope
            .values()
            .iter()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn ridge_rejects_nonpositive_rho() {
        let mom = CenteredMoments::from_parts(SymmetricKernel::zeros(grid()), cosine(1)).unwrap();
        for rho in [0.0, -1.0, f64::NAN] {
            assert!(matches!(ridge_fit(&mom, rho), Err(Error::Parameter(_))));
        }
    }

    #[test]
    fn ridge_tends_to_full_rank_cutoff() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = random_data(&mut rng, 80, 20);
        let mom = compute_moments(&d).unwrap();
        let rank = mom.usable_rank().unwrap();
        assert_eq!(rank, 20);
        let pca = pca_fit(&mom, rank).unwrap();
        let ridge = ridge_fit(&mom, 1e-10).unwrap();
        let rel = l2_distance_sq(&pca.slope, &ridge.slope).unwrap().sqrt() / pca.slope.norm();
        assert!(rel < 1e-6, "{rel}");
    }

    #[test]
    fn intercept_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = random_data(&mut rng, 25, 50);
        let mom = compute_moments(&d).unwrap();
        let fit = ridge_fit(&mom, 0.05).unwrap();
        let direct = estimate_intercept(&fit.slope, &d).unwrap();
        assert!((fit.intercept - direct).abs() < 1e-12);

        let zero = GridFunction::zeros(grid());
        let ybar = d.y().iter().sum::<f64>() / d.len() as f64;
        assert!((estimate_intercept(&zero, &d).unwrap() - ybar).abs() < 1e-15);

        let shifted = estimate_intercept(&fit.slope, &d.shift_responses(2.5)).unwrap();
        assert!((shifted - direct - 2.5).abs() < 1e-12);
    }

    #[test]
    fn prediction() {
        let model = FittedModel {
            slope: cosine(1),
            intercept: 0.0,
            method: Method::Ridge { rho: 1.0 },
            spectrum: None,
        };
        assert!((predict(&model, &cosine(1).scaled(3.0)).unwrap() - 3.0).abs() < 1e-12);
        let flat = FittedModel {
            slope: GridFunction::zeros(grid()),
            intercept: 1.5,
            ..model
        };
        assert_eq!(predict(&flat, &cosine(4)).unwrap(), 1.5);
    }

    #[test]
    fn nesting_adds_one_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = random_data(&mut rng, 40, 50);
        let mom = compute_moments(&d).unwrap();
        let spec = mom.spectrum().unwrap();
        for m in 1..6 {
            let a = pca_fit(&mom, m).unwrap().slope;
            let b = pca_fit(&mom, m + 1).unwrap().slope;
            let phi = spec.eigenfunction(m + 1);
            let coef = inner_product(mom.g_hat(), phi).unwrap() / spec.eigenvalue(m + 1);
            let mut expect = a.clone();
            expect.axpy(coef, phi);
            assert_eq!(b, expect);
        }
    }

    #[test]
    fn monotone_shrinkage() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let d = random_data(&mut rng, 30, 50);
        let mom = compute_moments(&d).unwrap();
        let norms: Vec<f64> = (0..30)
            .map(|k| 10f64.powf(-6.0 + 0.25 * k as f64))
            .map(|rho| ridge_fit(&mom, rho).unwrap().slope.norm())
            .collect();
        assert!(norms.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }

    #[test]
    fn model_file_round_trip() {
        let model = FittedModel {
            slope: GridFunction::from_fn(grid(), |t| (7.0 * t).sin() / 3.0),
            intercept: -0.1,
            method: Method::Ridge { rho: 0.1 },
            spectrum: None,
        };
        let text = write_model(&model);
        assert_eq!(text.lines().count(), 54);
        let back = read_model(&text).unwrap();
        assert_eq!(back.slope, model.slope);
        assert_eq!(back.intercept, model.intercept);
        assert_eq!(back.method, model.method);

        let pca = FittedModel {
            method: Method::Pca { m: 3 },
            ..model
        };
        assert_eq!(
            read_model(&write_model(&pca)).unwrap().method,
            Method::Pca { m: 3 }
        );
        assert!(read_model("method=pca\nparameter=2\nintercept=0\np=3\n1\n2\n").is_err());
        assert!(read_model("method=lasso\nparameter=2\nintercept=0\np=2\n1\n2\n").is_err());
    }

    proptest! {
        #[test]
        fn sign_flips_do_not_change_estimates(seed in any::<u64>(), flips in prop::collection::vec(any::<bool>(), 50)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = random_data(&mut rng, 20, 50);
            let mom = compute_moments(&d).unwrap();
            let spec = mom.spectrum().unwrap();
            let mut flipped = (*spec).clone();
            for (j, f) in flips.iter().enumerate() {
                if *f { flipped.flip(j + 1); }
            }
            let m = 10;
            let a = pca_slope(&spec, mom.g_hat(), m).unwrap();
            let b = pca_slope(&flipped, mom.g_hat(), m).unwrap();
            prop_assert!(l2_distance_sq(&a, &b).unwrap().sqrt() < 1e-12 * (1.0 + a.norm()));
            let a = ridge_slope_spectral(&spec, mom.g_hat(), 0.01).unwrap();
            let b = ridge_slope_spectral(&flipped, mom.g_hat(), 0.01).unwrap();
            prop_assert!(l2_distance_sq(&a, &b).unwrap().sqrt() < 1e-12 * (1.0 + a.norm()));
        }

        #[test]
        fn ridge_paths_agree(seed in any::<u64>(), log_rho in -4.0..0.0f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = random_data(&mut rng, 15, 30);
            let mom = compute_moments(&d).unwrap();
            let rho = 10f64.powf(log_rho);
            let a = ridge_fit(&mom, rho).unwrap().slope;
            let b = ridge_slope_spectral(&mom.spectrum().unwrap(), mom.g_hat(), rho).unwrap();
            prop_assert!(l2_distance_sq(&a, &b).unwrap().sqrt() < 1e-8);
        }
    }
}
