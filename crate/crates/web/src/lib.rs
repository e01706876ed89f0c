//! Browser bindings for the demo page in `www/`.

pub mod demo;

use flr_core::Spacing;
use wasm_bindgen::prelude::*;

fn spacing(name: &str) -> Result<Spacing, JsError> {
    name.parse()
        .map_err(|e: flr_core::Error| JsError::new(&e.to_string()))
}

fn js(e: flr_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Curves(demo::FitCurves);

#[wasm_bindgen]
impl Curves {
    #[wasm_bindgen(getter)]
    pub fn t(&self) -> Vec<f64> {
        self.0.t.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn truth(&self) -> Vec<f64> {
        self.0.truth.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn pca(&self) -> Vec<f64> {
        self.0.pca.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn ridge(&self) -> Vec<f64> {
        self.0.ridge.clone()
    }
    #[wasm_bindgen(getter = isePca)]
    pub fn ise_pca(&self) -> f64 {
        self.0.ise_pca
    }
    #[wasm_bindgen(getter = iseRidge)]
    pub fn ise_ridge(&self) -> f64 {
        self.0.ise_ridge
    }
    #[wasm_bindgen(getter)]
    pub fn rank(&self) -> usize {
        self.0.rank
    }
}

/// Simulates one sample and fits both estimators.
#[wasm_bindgen(js_name = fitCurves)]
#[allow(clippy::too_many_arguments)]
pub fn fit_curves(
    spacing_name: &str,
    alpha: f64,
    n: usize,
    sigma: f64,
    seed: u64,
    m: usize,
    rho: f64,
) -> Result<Curves, JsError> {
    let s = spacing(spacing_name)?;
    demo::fit_curves(s, alpha, n, sigma, seed, m, rho)
        .map(Curves)
        .map_err(js)
}

#[wasm_bindgen]
pub struct Spectrum(demo::SpectrumView);

#[wasm_bindgen]
impl Spectrum {
    #[wasm_bindgen(getter)]
    pub fn kappa(&self) -> Vec<f64> {
        self.0.kappa.clone()
    }
    #[wasm_bindgen(getter = kappaHat)]
    pub fn kappa_hat(&self) -> Vec<f64> {
        self.0.kappa_hat.clone()
    }
    #[wasm_bindgen(getter = eigenfunctionDist)]
    pub fn eigenfunction_dist(&self) -> Vec<f64> {
        self.0.eigenfunction_dist.clone()
    }
    #[wasm_bindgen(getter = eigenfunctionBound)]
    pub fn eigenfunction_bound(&self) -> Vec<f64> {
        self.0.eigenfunction_bound.clone()
    }
    #[wasm_bindgen(getter = hsGap)]
    pub fn hs_gap(&self) -> f64 {
        self.0.hs_gap
    }
}

/// Leading `count` true and empirical eigenvalues for one sample.
#[wasm_bindgen(js_name = spectrumView)]
pub fn spectrum_view(
    spacing_name: &str,
    alpha: f64,
    n: usize,
    seed: u64,
    count: usize,
) -> Result<Spectrum, JsError> {
    let s = spacing(spacing_name)?;
    demo::spectrum_view(s, alpha, n, seed, count)
        .map(Spectrum)
        .map_err(js)
}

#[wasm_bindgen]
pub struct Profile(demo::MiseProfile);

#[wasm_bindgen]
impl Profile {
    #[wasm_bindgen(getter)]
    pub fn m(&self) -> Vec<f64> {
        self.0.m.clone()
    }
    #[wasm_bindgen(getter = misePca)]
    pub fn mise_pca(&self) -> Vec<f64> {
        self.0.mise_pca.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn rho(&self) -> Vec<f64> {
        self.0.rho.clone()
    }
    #[wasm_bindgen(getter = miseRidge)]
    pub fn mise_ridge(&self) -> Vec<f64> {
        self.0.mise_ridge.clone()
    }
    #[wasm_bindgen(getter = mStar)]
    pub fn m_star(&self) -> usize {
        self.0.m_star
    }
    #[wasm_bindgen(getter = rhoStar)]
    pub fn rho_star(&self) -> f64 {
        self.0.rho_star
    }
}

/// Monte Carlo MISE over the default truncation and ridge grids.
#[wasm_bindgen(js_name = miseProfile)]
pub fn mise_profile(
    spacing_name: &str,
    alpha: f64,
    n: usize,
    sigma: f64,
    seed: u64,
    reps: usize,
) -> Result<Profile, JsError> {
    let s = spacing(spacing_name)?;
    demo::mise_profile(s, alpha, n, sigma, seed, reps)
        .map(Profile)
        .map_err(js)
}
