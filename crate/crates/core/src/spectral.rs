//! Eigendecomposition of symmetric integral operators and perturbation
//! diagnostics.
//!
//! The operator `f ↦ ∫ M(·, v) f(v) dv` is represented by the matrix `M / p`.
//! Its eigenvectors are rescaled by `sqrt(p)` so that they have unit norm
//! under the quadrature inner product. Indices `j` in the public API are one
//! based, as in `κ_1 ≥ κ_2 ≥ …`.

use std::fmt::Write as _;

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::grid::{apply_kernel, hs_norm, inner_product, Grid, GridFunction, SymmetricKernel};

/// Eigenvalues below `NULL_REL_TOL * max(κ_1, 1)` are flagged as numerically null.
pub const NULL_REL_TOL: f64 = 1e-12;

/// Eigenvalues closer than `TIE_REL_TOL * κ_1` are treated as tied.
pub const TIE_REL_TOL: f64 = 1e-10;

/// Minimum separation accepted by [`resolvent_identity_residual`].
pub const SEPARATION_TOL: f64 = 1e-8;

/// Eigenpairs sorted by nonincreasing eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    grid: Grid,
    eigenvalues: Vec<f64>,
    eigenfunctions: Vec<GridFunction>,
}

impl EigenSystem {
    /// Assembles a system from parts. Eigenvalues must be sorted
    /// nonincreasing and the eigenfunctions orthonormal to `1e-10`.
    pub fn new(eigenvalues: Vec<f64>, eigenfunctions: Vec<GridFunction>) -> Result<Self> {
        let grid = eigenfunctions
            .first()
            .map(GridFunction::grid)
            .ok_or_else(|| Error::Dimension("empty eigensystem".into()))?;
        if eigenvalues.len() != eigenfunctions.len() {
            return Err(Error::Dimension(format!(
                "{} eigenvalues for {} eigenfunctions",
                eigenvalues.len(),
                eigenfunctions.len()
            )));
        }
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Invariant(
                "eigenvalues not sorted nonincreasing".into(),
            ));
        }
        for (a, fa) in eigenfunctions.iter().enumerate() {
            for (b, fb) in eigenfunctions.iter().enumerate().skip(a) {
                let ip = inner_product(fa, fb)?;
                let target = if a == b { 1.0 } else { 0.0 };
                if (ip - target).abs() > 1e-10 {
                    return Err(Error::Invariant(format!(
                        "eigenfunctions {} and {} not orthonormal ({ip})",
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        Ok(Self {
            grid,
            eigenvalues,
            eigenfunctions,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvalues as computed (not clamped).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenfunctions(&self) -> &[GridFunction] {
        &self.eigenfunctions
    }

    /// `κ_j`, one based.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        self.eigenvalues[j - 1]
    }

    /// `φ_j`, one based.
    pub fn eigenfunction(&self, j: usize) -> &GridFunction {
        &self.eigenfunctions[j - 1]
    }

    /// `κ_j` with negative rounding noise clamped to zero.
    pub fn clamped_eigenvalue(&self, j: usize) -> f64 {
        self.eigenvalues[j - 1].max(0.0)
    }

    pub fn null_threshold(&self) -> f64 {
        NULL_REL_TOL * self.eigenvalues.first().copied().unwrap_or(0.0).max(1.0)
    }

    pub fn is_numerically_null(&self, j: usize) -> bool {
        self.eigenvalues[j - 1] < self.null_threshold()
    }

    /// Generalised Fourier coefficients `⟨f, φ_j⟩` for all `j`.
    pub fn coefficients(&self, f: &GridFunction) -> Result<Vec<f64>> {
        self.eigenfunctions
            .iter()
            .map(|phi| inner_product(f, phi))
            .collect()
    }

    /// `Σ_j κ_j φ_j(u) φ_j(v)`.
    pub fn reconstruct(&self) -> SymmetricKernel {
        let mut k = SymmetricKernel::zeros(self.grid);
        for (kappa, phi) in self.eigenvalues.iter().zip(&self.eigenfunctions) {
            k.add_rank_one(phi, *kappa);
        }
        k
    }

    /// Flips the sign of `φ_j`, one based.
    pub fn flip(&mut self, j: usize) {
        self.eigenfunctions[j - 1].negate();
    }
}

/// All `p` eigenpairs of the integral operator with kernel `m`, sorted
/// descending, with [`canonical_signs`] applied.
pub fn eigendecompose(m: &SymmetricKernel) -> Result<EigenSystem> {
    let grid = m.grid();
    let p = grid.len();
    let a = m.values() * grid.weight();
    let eig = SymmetricEigen::try_new(a, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&x, &y| {
        eig.eigenvalues[y]
            .partial_cmp(&eig.eigenvalues[x])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.cmp(&y))
    });

    let scale = (p as f64).sqrt();
    let eigenvalues = order.iter().map(|&c| eig.eigenvalues[c]).collect();
    let eigenfunctions = order
        .iter()
        .map(|&c| {
            let col = eig.eigenvectors.column(c);
            GridFunction::new(grid, col.iter().map(|v| v * scale).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(canonical_signs(EigenSystem {
        grid,
        eigenvalues,
        eigenfunctions,
    }))
}

/// Flips each eigenfunction so that `⟨φ̂_j, φ_j⟩ ≥ 0` against `reference`.
pub fn align_signs(mut sys: EigenSystem, reference: &EigenSystem) -> Result<EigenSystem> {
    if sys.len() != reference.len() {
        return Err(Error::Dimension(format!(
            "cannot align {} eigenfunctions against {}",
            sys.len(),
            reference.len()
        )));
    }
    for (phi_hat, phi) in sys.eigenfunctions.iter_mut().zip(&reference.eigenfunctions) {
        if inner_product(phi_hat, phi)? < 0.0 {
            phi_hat.negate();
        }
    }
    Ok(sys)
}

/// Makes the entry of largest magnitude of every eigenfunction nonnegative
/// (first such entry on ties).
pub fn canonical_signs(mut sys: EigenSystem) -> EigenSystem {
    for phi in &mut sys.eigenfunctions {
        let mut best = 0;
        let mut best_abs = f64::NEG_INFINITY;
        for (i, v) in phi.values().iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if phi.values()[best] < 0.0 {
            phi.negate();
        }
    }
    sys
}

/// One row of a [`PerturbationReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationRow {
    pub j: usize,
    pub kappa: f64,
    pub lambda: f64,
    /// `min_{k ≤ j} (κ_k − κ_{k+1})`.
    pub delta: f64,
    /// `‖φ_j − ψ_j‖` after sign alignment.
    pub eigenfunction_dist: f64,
    /// `‖K − L‖ − |κ_j − λ_j|`.
    pub slack_eigenvalue: f64,
    /// `sqrt(8) ‖K − L‖ − δ_j ‖φ_j − ψ_j‖`.
    pub slack_eigenfunction: f64,
}

/// Both sides of the Hilbert-Schmidt perturbation bounds for a reference
/// kernel `K` and a perturbed kernel `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    pub hs_gap: f64,
    /// `sup_j |κ_j − λ_j|` over the full discrete spectrum.
    pub max_eigen_gap: f64,
    pub rows: Vec<PerturbationRow>,
}

impl PerturbationReport {
    /// `‖K − L‖ − sup_j |κ_j − λ_j|`.
    pub fn eigenvalue_slack(&self) -> f64 {
        self.hs_gap - self.max_eigen_gap
    }

    pub fn min_eigenfunction_slack(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.slack_eigenfunction)
            .fold(f64::INFINITY, f64::min)
    }

    /// True when both bounds hold with slack at least `-tol`.
    pub fn bounds_hold(&self, tol: f64) -> bool {
        self.eigenvalue_slack() >= -tol
            && self.rows.iter().all(|r| r.slack_eigenvalue >= -tol)
            && self.min_eigenfunction_slack() >= -tol
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# hs_gap={:.16e} max_eigen_gap={:.16e}",
            self.hs_gap, self.max_eigen_gap
        );
        out.push_str(
            "j\tkappa\tlambda\tdelta\teigenfunction_dist\tslack_eigenvalue\tslack_eigenfunction\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{:.16e}\t{:.16e}\t{:.16e}\t{:.16e}\t{:.16e}\t{:.16e}",
                r.j,
                r.kappa,
                r.lambda,
                r.delta,
                r.eigenfunction_dist,
                r.slack_eigenvalue,
                r.slack_eigenfunction
            );
        }
        out
    }
}

/// Evaluates the eigenvalue and eigenfunction perturbation bounds for `j ≤ j_max`.
pub fn perturbation_report(
    k: &SymmetricKernel,
    l: &SymmetricKernel,
    j_max: usize,
) -> Result<PerturbationReport> {
    let hs_gap = hs_norm(&k.sub(l)?);
    let reference = eigendecompose(k)?;
    let perturbed = align_signs(eigendecompose(l)?, &reference)?;
    report_from_systems(&reference, &perturbed, hs_gap, j_max)
}

fn report_from_systems(
    reference: &EigenSystem,
    perturbed: &EigenSystem,
    hs_gap: f64,
    j_max: usize,
) -> Result<PerturbationReport> {
    let p = reference.len();
    if j_max == 0 || j_max >= p {
        return Err(Error::Parameter(format!(
            "j_max must lie in 1..{}, got {j_max}",
            p - 1
        )));
    }
    let kappa = reference.eigenvalues();
    let lambda = perturbed.eigenvalues();
    let max_eigen_gap = kappa
        .iter()
        .zip(lambda)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let mut rows = Vec::with_capacity(j_max);
    let mut delta = f64::INFINITY;
    for j in 1..=j_max {
        delta = delta.min(kappa[j - 1] - kappa[j]);
        let dist = perturbed
            .eigenfunction(j)
            .sub(reference.eigenfunction(j))?
            .norm();
        let gap = (kappa[j - 1] - lambda[j - 1]).abs();
        rows.push(PerturbationRow {
            j,
            kappa: kappa[j - 1],
            lambda: lambda[j - 1],
            delta,
            eigenfunction_dist: dist,
            slack_eigenvalue: hs_gap - gap,
            slack_eigenfunction: 8f64.sqrt() * hs_gap - delta * dist,
        });
    }
    if delta <= TIE_REL_TOL * kappa[0].abs() {
        return Err(Error::DegenerateSpectrum(format!(
            "eigen-gap δ_{j_max} = {delta:e} is not positive"
        )));
    }
    Ok(PerturbationReport {
        hs_gap,
        max_eigen_gap,
        rows,
    })
}

/// Rebuilds `ψ_j − φ_j` from the resolvent expansion
/// `Σ_{k≠j} (λ_j − κ_k)^{-1} φ_k ∫(L − K)ψ_j φ_k + φ_j ∫(ψ_j − φ_j) φ_j`
/// over all discrete eigenpairs and returns the L2 norm of the mismatch.
pub fn resolvent_identity_residual(
    k: &SymmetricKernel,
    l: &SymmetricKernel,
    j: usize,
) -> Result<f64> {
    let reference = eigendecompose(k)?;
    let perturbed = align_signs(eigendecompose(l)?, &reference)?;
    let p = reference.len();
    if j == 0 || j > p {
        return Err(Error::Parameter(format!("j must lie in 1..={p}, got {j}")));
    }
    let lambda_j = perturbed.eigenvalue(j);
    let margin = (1..=p)
        .filter(|&c| c != j)
        .map(|c| (lambda_j - reference.eigenvalue(c)).abs())
        .fold(f64::INFINITY, f64::min);
    if margin < SEPARATION_TOL {
        return Err(Error::DegenerateSpectrum(format!(
            "λ_{j} is within {margin:e} of another reference eigenvalue"
        )));
    }

    let psi = perturbed.eigenfunction(j);
    let phi = reference.eigenfunction(j);
    let diff = psi.sub(phi)?;
    let d_psi = apply_kernel(&l.sub(k)?, psi)?;

    let mut recon = phi.scaled(inner_product(&diff, phi)?);
    for c in (1..=p).filter(|&c| c != j) {
        let phi_c = reference.eigenfunction(c);
        let coef = inner_product(&d_psi, phi_c)? / (lambda_j - reference.eigenvalue(c));
        recon.axpy(coef, phi_c);
    }
    Ok(recon.sub(&diff)?.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::l2_distance_sq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn cosine_basis(grid: Grid, count: usize) -> Vec<GridFunction> {
        (0..count)
            .map(|j| {
                if j == 0 {
                    GridFunction::constant(grid, 1.0)
                } else {
                    GridFunction::from_fn(grid, |t| 2f64.sqrt() * (j as f64 * PI * t).cos())
                }
            })
            .collect()
    }

    fn random_kernel(rng: &mut impl Rng, p: usize) -> SymmetricKernel {
        let a = DMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
        SymmetricKernel::new(Grid::new(p).unwrap(), (&a + a.transpose()) * 0.5).unwrap()
    }

    /// Kernel with prescribed operator eigenvalues and a random orthonormal basis.
    fn kernel_with_spectrum(rng: &mut impl Rng, eigs: &[f64]) -> SymmetricKernel {
        let p = eigs.len();
        let a = DMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
        let q = a.qr().q();
        let grid = Grid::new(p).unwrap();
        let funcs: Vec<_> = (0..p)
            .map(|c| {
                GridFunction::new(
                    grid,
                    q.column(c).iter().map(|v| v * (p as f64).sqrt()).collect(),
                )
                .unwrap()
            })
            .collect();
        SymmetricKernel::from_expansion(eigs, &funcs).unwrap()
    }

    #[test]
    fn zero_kernel_has_zero_spectrum() {
        let sys = eigendecompose(&SymmetricKernel::zeros(Grid::new(8).unwrap())).unwrap();
        assert_eq!(sys.len(), 8);
        assert!(sys.eigenvalues().iter().all(|k| *k == 0.0));
        assert!((1..=8).all(|j| sys.is_numerically_null(j)));
    }

    #[test]
    fn recovers_power_law_spectrum() {
        let grid = Grid::new(50).unwrap();
        let weights: Vec<f64> = (1..=50).map(|j| (j as f64).powi(-2)).collect();
        let k = SymmetricKernel::from_expansion(&weights, &cosine_basis(grid, 50)).unwrap();
        let sys = eigendecompose(&k).unwrap();
        for (got, want) in sys.eigenvalues().iter().zip(&weights) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
    }

    #[test]
    fn closely_spaced_second_eigenvalue() {
        let grid = Grid::new(50).unwrap();
        let g2 = 0.2 * (1.0 - 0.0002);
        let k = SymmetricKernel::from_expansion(&[1.0, g2 * g2], &cosine_basis(grid, 2)).unwrap();
        let sys = eigendecompose(&k).unwrap();
        assert!((sys.eigenvalue(1) - 1.0).abs() < 1e-12);
        assert!((sys.eigenvalue(2) - 0.039_984_001_6).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for p in [3, 10, 40] {
            let m = random_kernel(&mut rng, p);
            let sys = eigendecompose(&m).unwrap();
            let err = hs_norm(&m.sub(&sys.reconstruct()).unwrap());
            assert!(err <= 1e-8 * (1.0 + hs_norm(&m)));

            let f = GridFunction::new(
                m.grid(),
                (0..p).map(|_| rng.random_range(-2.0..2.0)).collect(),
            )
            .unwrap();
            let parseval: f64 = sys.coefficients(&f).unwrap().iter().map(|c| c * c).sum();
            assert!((parseval - inner_product(&f, &f).unwrap()).abs() < 1e-8);
            // orthonormality is re-validated by the checked constructor
            EigenSystem::new(sys.eigenvalues().to_vec(), sys.eigenfunctions().to_vec()).unwrap();
        }
    }

    #[test]
    fn align_flips_negated_function() {
        let grid = Grid::new(20).unwrap();
        let basis = cosine_basis(grid, 3);
        let reference = EigenSystem::new(vec![3.0, 2.0, 1.0], basis.clone()).unwrap();
        assert_eq!(
            align_signs(reference.clone(), &reference).unwrap(),
            reference
        );

        let mut flipped = reference.clone();
        flipped.flip(1);
        let aligned = align_signs(flipped, &reference).unwrap();
        assert_eq!(aligned, reference);

        let short = EigenSystem::new(vec![1.0], vec![basis[0].clone()]).unwrap();
        assert!(matches!(
            align_signs(short, &reference),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn align_after_random_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let k = kernel_with_spectrum(&mut rng, &[5.0, 4.0, 3.0, 2.0, 1.0, 0.5]);
            let noise = random_kernel(&mut rng, 6).scaled(0.05);
            let reference = eigendecompose(&k).unwrap();
            let perturbed = eigendecompose(&k.add(&noise).unwrap()).unwrap();
            let aligned = align_signs(perturbed.clone(), &reference).unwrap();
            assert_eq!(aligned.eigenvalues(), perturbed.eigenvalues());
            for j in 1..=6 {
                let ip =
                    inner_product(aligned.eigenfunction(j), reference.eigenfunction(j)).unwrap();
                assert!(ip >= 0.0);
            }
        }
    }

    #[test]
    fn canonical_sign_of_constants() {
        let grid = Grid::new(5).unwrap();
        let one = GridFunction::constant(grid, 1.0);
        let sys = EigenSystem::new(vec![1.0], vec![one.clone()]).unwrap();
        assert_eq!(canonical_signs(sys.clone()), sys);
        let neg = EigenSystem::new(vec![1.0], vec![one.scaled(-1.0)]).unwrap();
        assert_eq!(canonical_signs(neg), sys);
    }

    #[test]
    fn identical_kernels_have_full_slack() {
        let grid = Grid::new(30).unwrap();
        let weights: Vec<f64> = (1..=30).map(|j| (j as f64).powi(-2)).collect();
        let k = SymmetricKernel::from_expansion(&weights, &cosine_basis(grid, 30)).unwrap();
        let rep = perturbation_report(&k, &k, 10).unwrap();
        assert_eq!(rep.hs_gap, 0.0);
        assert!(rep.max_eigen_gap < 1e-14);
        assert!(rep.rows.iter().all(|r| r.eigenfunction_dist < 1e-10));
        assert!(rep.bounds_hold(1e-8));
        assert_eq!(rep.rows.len(), 10);
        let tsv = rep.to_tsv();
        assert_eq!(tsv.lines().count(), 12);
        assert!(tsv.lines().nth(1).unwrap().starts_with("j\tkappa"));
    }

    #[test]
    fn rank_one_shift_moves_top_eigenvalue() {
        let grid = Grid::new(30).unwrap();
        let basis = cosine_basis(grid, 30);
        let weights: Vec<f64> = (1..=30).map(|j| (j as f64).powi(-2)).collect();
        let k = SymmetricKernel::from_expansion(&weights, &basis).unwrap();
        let c = 0.01;
        let l = k.add(&SymmetricKernel::rank_one(&basis[0], c)).unwrap();
        let rep = perturbation_report(&k, &l, 5).unwrap();
        assert!((rep.max_eigen_gap - c).abs() < 1e-8);
        assert!((rep.hs_gap - c).abs() < 1e-12);
        assert!(rep.bounds_hold(1e-8));
    }

    #[test]
    fn degenerate_reference_is_rejected() {
        let grid = Grid::new(10).unwrap();
        let basis = cosine_basis(grid, 3);
        let k = SymmetricKernel::from_expansion(&[1.0, 1.0, 0.5], &basis).unwrap();
        assert!(matches!(
            perturbation_report(&k, &k, 1),
            Err(Error::DegenerateSpectrum(_))
        ));
        assert!(matches!(
            resolvent_identity_residual(&k, &k, 1),
            Err(Error::DegenerateSpectrum(_))
        ));
    }

    #[test]
    fn resolvent_identity_exact_in_finite_dimensions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = kernel_with_spectrum(
            &mut rng,
            &(1..=20).map(|j| 21.0 - j as f64).collect::<Vec<_>>(),
        );
        assert!(resolvent_identity_residual(&k, &k, 4).unwrap() < 1e-12);
        for _ in 0..5 {
            let l = k.add(&random_kernel(&mut rng, 20).scaled(0.02)).unwrap();
            for j in [1, 7, 20] {
                assert!(resolvent_identity_residual(&k, &l, j).unwrap() <= 1e-6);
            }
        }
    }

    #[test]
    fn pythagoras_for_unit_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let k = kernel_with_spectrum(&mut rng, &[4.0, 3.0, 2.0, 1.0]);
        let l = k.add(&random_kernel(&mut rng, 4).scaled(0.3)).unwrap();
        let a = eigendecompose(&k).unwrap();
        let b = align_signs(eigendecompose(&l).unwrap(), &a).unwrap();
        for j in 1..=4 {
            let lhs = l2_distance_sq(b.eigenfunction(j), a.eigenfunction(j)).unwrap();
            let rhs = 2.0 * (1.0 - inner_product(b.eigenfunction(j), a.eigenfunction(j)).unwrap());
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn canonical_signs_idempotent(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sys = eigendecompose(&random_kernel(&mut rng, 7)).unwrap();
            let once = canonical_signs(sys);
            prop_assert_eq!(canonical_signs(once.clone()), once);
        }

        #[test]
        fn perturbation_bounds_hold(seed in any::<u64>(), scale in 0.0..0.5f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = kernel_with_spectrum(&mut rng, &[3.0, 2.5, 1.0, 0.8, 0.1, 0.05, 0.0, 0.0]);
            let l = k.add(&random_kernel(&mut rng, 8).scaled(scale)).unwrap();
            let rep = perturbation_report(&k, &l, 5).unwrap();
            prop_assert!(rep.bounds_hold(1e-8), "{:?}", rep);
        }

        #[test]
        fn psd_kernels_have_nonnegative_spectrum(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = 12;
            let grid = Grid::new(p).unwrap();
            let mut k = SymmetricKernel::zeros(grid);
            for _ in 0..5 {
                let f = GridFunction::new(grid, (0..p).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
                k.add_rank_one(&f, 0.2);
            }
            let sys = eigendecompose(&k).unwrap();
            let top = sys.eigenvalue(1);
            prop_assert!(sys.eigenvalues().iter().all(|e| *e >= -1e-10 * top));
        }
    }
}
