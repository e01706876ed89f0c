//! Functions and kernels on [0,1] sampled at midpoints.
//!
//! Every integral in the crate is the equal-weight midpoint rule on `p`
//! points `t_i = (2i-1)/(2p)`. The cosine basis `sqrt(2) cos(j pi t)` is
//! exactly orthonormal under this rule for `j < p`, so discretisation error
//! never leaks into estimator comparisons.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative tolerance used to accept a kernel as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Default number of grid points.
pub const DEFAULT_P: usize = 50;

/// Midpoint grid of `p` points on [0,1] with equal weights `1/p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    p: usize,
}

impl Grid {
    pub fn new(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::Parameter(format!("grid needs p >= 2, got {p}")));
        }
        Ok(Self { p })
    }

    pub fn len(&self) -> usize {
        self.p
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.p as f64
    }

    /// The `i`-th point, zero based.
    pub fn point(&self, i: usize) -> f64 {
        (2 * i + 1) as f64 / (2 * self.p) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.p).map(|i| self.point(i)).collect()
    }

    fn check_same(&self, other: &Grid) -> Result<()> {
        if self.p != other.p {
            return Err(Error::Dimension(format!(
                "grid sizes differ ({} vs {})",
                self.p, other.p
            )));
        }
        Ok(())
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self { p: DEFAULT_P }
    }
}

/// A real function sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "function has {} values on a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invariant(format!("non-finite value at index {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f` at the grid points.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// `self += c * other`, grids assumed equal by the caller.
    pub(crate) fn axpy(&mut self, c: f64, other: &Self) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    pub(crate) fn negate(&mut self) {
        for v in &mut self.values {
            *v = -*v;
        }
    }

    /// L2 norm under the quadrature rule.
    pub fn norm(&self) -> f64 {
        dot(&self.values, &self.values).sqrt() / (self.grid.len() as f64).sqrt()
    }
}

/// A symmetric function on [0,1]^2 sampled on a product grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricKernel {
    grid: Grid,
    values: DMatrix<f64>,
}

impl SymmetricKernel {
    /// Validates shape, finiteness and symmetry.
    pub fn new(grid: Grid, values: DMatrix<f64>) -> Result<Self> {
        let p = grid.len();
        if values.nrows() != p || values.ncols() != p {
            return Err(Error::Dimension(format!(
                "kernel is {}x{}, grid has {p} points",
                values.nrows(),
                values.ncols()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invariant("kernel has non-finite entries".into()));
        }
        let scale = values.amax();
        for i in 0..p {
            for j in (i + 1)..p {
                if (values[(i, j)] - values[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::Invariant(format!(
                        "kernel not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { grid, values })
    }

    /// Builds a kernel whose symmetry holds by construction; only the upper
    /// triangle (`u <= v`) of `f` is evaluated.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let p = grid.len();
        let mut values = DMatrix::zeros(p, p);
        for i in 0..p {
            for j in i..p {
                let v = f(grid.point(i), grid.point(j));
                values[(i, j)] = v;
                values[(j, i)] = v;
            }
        }
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        let p = grid.len();
        Self {
            grid,
            values: DMatrix::zeros(p, p),
        }
    }

    /// `c * f(u) f(v)`.
    pub fn rank_one(f: &GridFunction, c: f64) -> Self {
        let grid = f.grid();
        let p = grid.len();
        let v = f.values();
        let mut values = DMatrix::zeros(p, p);
        for i in 0..p {
            for j in i..p {
                let x = c * v[i] * v[j];
                values[(i, j)] = x;
                values[(j, i)] = x;
            }
        }
        Self { grid, values }
    }

    /// `Σ_j weights[j] f_j(u) f_j(v)`.
    pub fn from_expansion(weights: &[f64], functions: &[GridFunction]) -> Result<Self> {
        let first = functions
            .first()
            .ok_or_else(|| Error::Dimension("empty expansion".into()))?;
        if weights.len() != functions.len() {
            return Err(Error::Dimension(format!(
                "{} weights for {} functions",
                weights.len(),
                functions.len()
            )));
        }
        let mut out = Self::zeros(first.grid());
        for (w, f) in weights.iter().zip(functions) {
            first.grid().check_same(&f.grid())?;
            out.add_rank_one(f, *w);
        }
        Ok(out)
    }

    pub(crate) fn add_rank_one(&mut self, f: &GridFunction, c: f64) {
        let p = self.grid.len();
        let v = f.values();
        for i in 0..p {
            let ci = c * v[i];
            for (j, vj) in v.iter().enumerate().skip(i) {
                let x = ci * vj;
                self.values[(i, j)] += x;
                if j != i {
                    self.values[(j, i)] += x;
                }
            }
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: &self.values - &other.values,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: &self.values + &other.values,
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: &self.values * c,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Quadrature approximation of `∫ f g`.
pub fn inner_product(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    f.grid.check_same(&g.grid)?;
    Ok(dot(&f.values, &g.values) * f.grid.weight())
}

/// `(M f)(u) = ∫ M(u, v) f(v) dv`.
pub fn apply_kernel(m: &SymmetricKernel, f: &GridFunction) -> Result<GridFunction> {
    m.grid.check_same(&f.grid)?;
    let w = m.grid.weight();
    let p = m.grid.len();
    let values = (0..p)
        .map(|i| {
            let row = m.values.row(i);
            row.iter().zip(&f.values).map(|(a, b)| a * b).sum::<f64>() * w
        })
        .collect();
    Ok(GridFunction {
        grid: f.grid,
        values,
    })
}

/// Hilbert-Schmidt norm `(∬ M^2)^{1/2}`.
pub fn hs_norm(m: &SymmetricKernel) -> f64 {
    m.values.norm() * m.grid.weight()
}

/// `∫ (f - g)^2`.
pub fn l2_distance_sq(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    f.grid.check_same(&g.grid)?;
    let s: f64 = f
        .values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(s * f.grid.weight())
}
