//! One-dimensional ε-scale Dirichlet problems `−(a(x/ε) u′)′ = f`.
//!
//! Finite volumes on a uniform mesh with the coefficient sampled at cell
//! midpoints; the homogenized problem is solved on the same mesh so that
//! reported differences are homogenization errors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::qpcore::TrigSum;
use crate::tensor::EffectiveTensor;
use crate::{Error, Real, Result};

/// A mesh used for an ε-problem needs cell width at most `ε / MIN_CELLS_PER_EPS`.
pub const MIN_CELLS_PER_EPS: usize = 16;
/// Test functions `sin(kπx)`, `k = 1..=FLUX_MODES`, for the flux pairing.
pub const FLUX_MODES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mesh1D<T> {
    pub a: T,
    pub b: T,
    pub n_cells: usize,
}

impl<T: Real> Mesh1D<T> {
    pub fn new(a: T, b: T, n_cells: usize) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::InvalidArgument("a mesh needs at least two cells".into()));
        }
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidArgument(format!("bad interval ({a}, {b})")));
        }
        Ok(Self { a, b, n_cells })
    }

    pub fn h(&self) -> T {
        (self.b - self.a) / T::of_usize(self.n_cells)
    }

    pub fn node(&self, i: usize) -> T {
        if i == self.n_cells {
            self.b
        } else {
            self.a + T::of_usize(i) * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..=self.n_cells).map(|i| self.node(i)).collect()
    }

    pub fn midpoints(&self) -> Vec<T> {
        let h = self.h();
        (0..self.n_cells).map(|i| self.a + (T::of_usize(i) + T::of(0.5)) * h).collect()
    }

    /// Fails unless the cell width is at most `ε / 16`.
    pub fn check_resolves(&self, eps: T) -> Result<()> {
        if self.h() * T::of_usize(MIN_CELLS_PER_EPS) > eps {
            return Err(Error::Resolution(format!(
                "cell width {} exceeds ε/{MIN_CELLS_PER_EPS} = {}",
                self.h(),
                eps / T::of_usize(MIN_CELLS_PER_EPS)
            )));
        }
        Ok(())
    }
}

/// Mesh choice along an ε schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshPolicy {
    /// Cells per unit of `1/ε` on a unit interval.
    pub cells_per_eps: usize,
    pub min_cells: usize,
}

impl Default for MeshPolicy {
    fn default() -> Self {
        Self { cells_per_eps: 32, min_cells: 64 }
    }
}

impl MeshPolicy {
    pub fn mesh<T: Real>(&self, a: T, b: T, eps: T) -> Result<Mesh1D<T>> {
        let n = (T::of_usize(self.cells_per_eps) * (b - a) / eps).ceil().to_usize().unwrap_or(usize::MAX);
        Mesh1D::new(a, b, n.max(self.min_cells))
    }

    pub fn refined(&self) -> Self {
        Self { cells_per_eps: 2 * self.cells_per_eps, min_cells: 2 * self.min_cells }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution1D<T> {
    pub mesh: Mesh1D<T>,
    /// Nodal values, zero at both ends.
    pub values: Vec<T>,
    /// `a u′` per cell.
    pub flux: Vec<T>,
    /// Coefficient per cell.
    pub coef: Vec<T>,
    /// `Σ h a (u′)²`.
    pub energy: T,
    /// `Σ h f u` over interior nodes.
    pub work: T,
}

impl<T: Real> Solution1D<T> {
    /// `u′` per cell.
    pub fn gradient(&self) -> Vec<T> {
        let h = self.mesh.h();
        self.values.windows(2).map(|w| (w[1] - w[0]) / h).collect()
    }
}

fn thomas<T: Real>(lower: &[T], diag: &[T], upper: &[T], rhs: &[T]) -> Vec<T> {
    let n = diag.len();
    let mut c = vec![T::zero(); n];
    let mut d = vec![T::zero(); n];
    c[0] = upper.first().copied().unwrap_or(T::zero()) / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = upper[i] / m;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / m;
    }
    let mut x = vec![T::zero(); n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Dirichlet solve with per-cell coefficients.
fn solve_cells<T: Real>(coef: Vec<T>, f: &(dyn Fn(T) -> T + Sync), mesh: &Mesh1D<T>) -> Result<Solution1D<T>> {
    if let Some(bad) = coef.iter().find(|c| !(**c > T::zero())) {
        return Err(Error::CoercivityViolation { estimate: bad.as_f64() });
    }
    let h = mesh.h();
    let n = mesh.n_cells;
    let interior = n - 1;
    let diag: Vec<T> = (0..interior).map(|i| (coef[i] + coef[i + 1]) / h).collect();
    let off: Vec<T> = (1..interior).map(|i| -coef[i] / h).collect();
    let rhs: Vec<T> = (1..n).map(|i| h * f(mesh.node(i))).collect();
    let inner = thomas(&off, &diag, &off, &rhs);
    let mut values = vec![T::zero(); n + 1];
    values[1..n].copy_from_slice(&inner);
    let flux: Vec<T> = (0..n).map(|i| coef[i] * (values[i + 1] - values[i]) / h).collect();
    let energy = flux.iter().zip(&coef).map(|(s, a)| h * *s * *s / *a).sum();
    let work = inner.iter().zip(&rhs).map(|(u, r)| *u * *r).sum();
    Ok(Solution1D { mesh: *mesh, values, flux, coef, energy, work })
}

/// `−(a(x/ε) u′)′ = f` with `u = 0` at both ends.
pub fn solve_eps<T: Real>(a: &TrigSum<T>, eps: T, f: &(dyn Fn(T) -> T + Sync), mesh: &Mesh1D<T>) -> Result<Solution1D<T>> {
    if a.dim() != 1 {
        return Err(Error::InvalidArgument(format!("coefficient must be one-dimensional, got d = {}", a.dim())));
    }
    if !(eps > T::zero()) {
        return Err(Error::InvalidArgument(format!("ε = {eps} must be positive")));
    }
    mesh.check_resolves(eps)?;
    let coef = mesh.midpoints().into_iter().map(|x| a.value(&[x / eps])).collect();
    solve_cells(coef, f, mesh)
}

/// `−q u″ = f` with `u = 0` at both ends.
pub fn solve_constant<T: Real>(q: T, f: &(dyn Fn(T) -> T + Sync), mesh: &Mesh1D<T>) -> Result<Solution1D<T>> {
    solve_cells(vec![q; mesh.n_cells], f, mesh)
}

/// The homogenized problem for a `1 × 1` tensor.
pub fn solve_homogenized<T: Real>(q: &EffectiveTensor<T>, f: &(dyn Fn(T) -> T + Sync), mesh: &Mesh1D<T>) -> Result<Solution1D<T>> {
    if q.d != 1 {
        return Err(Error::InvalidArgument(format!("the direct solver is one-dimensional, tensor has d = {}", q.d)));
    }
    solve_constant(q.get(0, 0), f, mesh)
}

/// Trapezoidal `L²` norm of nodal values.
pub fn l2_norm<T: Real>(mesh: &Mesh1D<T>, v: &[T]) -> T {
    let h = mesh.h();
    let n = v.len() - 1;
    let s: T = v.iter().map(|x| *x * *x).sum::<T>() - T::of(0.5) * (v[0] * v[0] + v[n] * v[n]);
    (h * s).sqrt()
}

/// `max_k |Σ h (σ − q u*′) sin(kπ(x − a)/(b − a))|` over the midpoints.
pub fn flux_pairing_error<T: Real>(eps_sol: &Solution1D<T>, hom: &Solution1D<T>) -> T {
    let mesh = &eps_sol.mesh;
    let h = mesh.h();
    let len = mesh.b - mesh.a;
    let mids = mesh.midpoints();
    (1..=FLUX_MODES)
        .map(|k| {
            let w = T::of_usize(k) * T::PI() / len;
            mids.iter()
                .zip(eps_sol.flux.iter().zip(&hom.flux))
                .map(|(x, (s, sh))| h * (*s - *sh) * (w * (*x - mesh.a)).sin())
                .sum::<T>()
                .abs()
        })
        .fold(T::zero(), T::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow<T> {
    pub eps: T,
    pub n_cells: usize,
    /// `‖u^ε − u*‖ / ‖u*‖`.
    pub l2_error: T,
    pub flux_error: T,
}

/// Errors against the homogenized solution along a decreasing ε schedule on
/// `(0, 1)`.
pub fn convergence_report<T: Real>(
    a: &TrigSum<T>,
    q: T,
    f: &(dyn Fn(T) -> T + Sync),
    epsilons: &[T],
    policy: MeshPolicy,
) -> Result<Vec<ConvergenceRow<T>>> {
    if epsilons.is_empty() || epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("ε schedule must be nonempty and strictly decreasing".into()));
    }
    epsilons
        .par_iter()
        .map(|&eps| {
            let mesh = policy.mesh(T::zero(), T::one(), eps)?;
            let u = solve_eps(a, eps, f, &mesh)?;
            let hom = solve_constant(q, f, &mesh)?;
            let diff: Vec<T> = u.values.iter().zip(&hom.values).map(|(x, y)| *x - *y).collect();
            Ok(ConvergenceRow {
                eps,
                n_cells: mesh.n_cells,
                l2_error: l2_norm(&mesh, &diff) / l2_norm(&mesh, &hom.values),
                flux_error: flux_pairing_error(&u, &hom),
            })
        })
        .collect()
}

/// Largest relative change of either error column when the mesh is refined
/// twofold.
pub fn refinement_change<T: Real>(coarse: &[ConvergenceRow<T>], fine: &[ConvergenceRow<T>]) -> T {
    let rel = |x: T, y: T| if x == y { T::zero() } else { (x - y).abs() / x.abs().max(y.abs()) };
    coarse
        .iter()
        .zip(fine)
        .map(|(c, f)| rel(c.l2_error, f.l2_error).max(rel(c.flux_error, f.flux_error)))
        .fold(T::zero(), T::max)
}

/// Whether `values` decrease with at most `allowed` increases.
pub fn decreasing_trend<T: Real>(values: &[T], allowed: usize) -> bool {
    values.windows(2).filter(|w| !(w[1] < w[0])).count() <= allowed
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(_: f64) -> f64 {
        1.0
    }

    #[test]
    fn poisson_is_exact_at_nodes() {
        // the three-point stencil is exact for quadratics
        let mesh = Mesh1D::new(0.0, 1.0, 40).unwrap();
        let a = TrigSum::constant(1, 1.0);
        let u = solve_eps(&a, 0.4, &one, &mesh).unwrap();
        for (x, v) in mesh.nodes().iter().zip(&u.values) {
            assert!((v - x * (1.0 - x) / 2.0).abs() < 1e-14);
        }
        assert_eq!(u.values[0], 0.0);
        assert_eq!(u.values[40], 0.0);
        assert!((u.energy - u.work).abs() < 1e-14);
    }

    #[test]
    fn homogenized_closed_form() {
        let mesh = Mesh1D::new(0.0, 1.0, 50).unwrap();
        let q = 3f64.sqrt();
        let u = solve_constant(q, &one, &mesh).unwrap();
        for (x, v) in mesh.nodes().iter().zip(&u.values) {
            assert!((v - x * (1.0 - x) / (2.0 * q)).abs() < 1e-14);
        }
        for (x, s) in mesh.midpoints().iter().zip(&u.flux) {
            assert!((s - (0.5 - x)).abs() < 1e-13);
        }
    }

    #[test]
    fn oscillating_energy_and_maximum_principle() {
        let a = TrigSum::from_cos_sin(1, &[(vec![0.0], 2.0, 0.0), (vec![1.0], 1.0, 0.0)]).unwrap();
        let mesh = Mesh1D::new(0.0, 1.0, 2000).unwrap();
        let u = solve_eps(&a, 0.01, &|x: f64| 1.0 + x, &mesh).unwrap();
        assert!(u.values.iter().all(|v| *v >= 0.0));
        assert!((u.energy - u.work).abs() < 1e-12 * u.work);
    }

    #[test]
    fn coarse_mesh_rejected() {
        let a = TrigSum::constant(1, 1.0);
        let mesh = Mesh1D::new(0.0, 1.0, 100).unwrap();
        assert!(matches!(solve_eps(&a, 0.1, &one, &mesh), Err(Error::Resolution(_))));
        assert!(Mesh1D::new(0.0, 1.0, 1).is_err());
        let bad = TrigSum::from_cos_sin(1, &[(vec![1.0], 1.0, 0.0)]).unwrap();
        let fine = Mesh1D::new(0.0, 1.0, 4000).unwrap();
        assert!(matches!(solve_eps(&bad, 0.1, &one, &fine), Err(Error::CoercivityViolation { .. })));
    }

    #[test]
    fn constant_report_is_trivial() {
        let a = TrigSum::constant(1, 2.5);
        let rows = convergence_report(&a, 2.5, &one, &[0.25, 0.125], MeshPolicy::default()).unwrap();
        for r in rows {
            assert_eq!(r.l2_error, 0.0);
            assert_eq!(r.flux_error, 0.0);
        }
    }

    #[test]
    fn periodic_report_decreases() {
        let a = TrigSum::from_cos_sin(1, &[(vec![0.0], 2.0, 0.0), (vec![1.0], 1.0, 0.0)]).unwrap();
        let eps: Vec<f64> = (4..8).map(|k| 2f64.powi(-k)).collect();
        let rows = convergence_report(&a, 3f64.sqrt(), &one, &eps, MeshPolicy::default()).unwrap();
        let l2: Vec<f64> = rows.iter().map(|r| r.l2_error).collect();
        let fl: Vec<f64> = rows.iter().map(|r| r.flux_error).collect();
        assert!(decreasing_trend(&l2, 1), "{l2:?}");
        assert!(decreasing_trend(&fl, 1), "{fl:?}");
    }

    #[test]
    fn trend_helper() {
        assert!(decreasing_trend(&[3.0, 2.0, 2.5, 1.0], 1));
        assert!(!decreasing_trend(&[3.0, 4.0, 5.0], 1));
    }
}
