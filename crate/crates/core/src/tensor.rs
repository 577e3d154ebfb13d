//! Effective tensor from both routes and its continuation to `δ → 0`.
//!
//! At matched `(δ, N)` the mean-flux tensor of the cell problems equals half
//! the Hessian of `λ₁^δ` at `η = 0`; the Hessian is taken by central
//! differences at steps `h` and `h/2`, the pair giving a Richardson error
//! estimate.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cell::CellProblem;
use crate::linalg::norm;
use crate::qpcore::{min_sym_eigenvalue, LiftedMedium};
use crate::spectral::{BlochProblem, EigenPair};
use crate::{Error, Real, Result};

/// Bound on `‖∇λ₁^δ(0)‖` accepted by [`gradient_at_zero`].
pub const GRADIENT_TOL: f64 = 1e-8;
/// Default finite-difference step.
pub const DEFAULT_H: f64 = 1e-3;
/// Differences below `CONSTANT_TOL (1 + |q|)` count as zero in continuation.
pub const CONSTANT_TOL: f64 = 1e-13;

/// How a tensor was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Cell,
    Hessian,
    Extrapolated,
}

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Route::Cell => "cell",
            Route::Hessian => "hessian",
            Route::Extrapolated => "extrapolated",
        })
    }
}

impl std::str::FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cell" => Ok(Route::Cell),
            "hessian" => Ok(Route::Hessian),
            "extrapolated" => Ok(Route::Extrapolated),
            _ => Err(Error::InvalidArgument(format!("unknown route {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TensorDiagnostics<T> {
    /// `max |q_kl − q_lk|` before symmetrization.
    pub asymmetry: Option<T>,
    pub gradient_norm: Option<T>,
    /// `(4/3) max |q_h − q_{h/2}|`.
    pub richardson: Option<T>,
    pub h: Option<T>,
    /// `max |q − q_other|` against the other route at the same `(δ, N)`.
    pub cross_route_gap: Option<T>,
    /// `‖q(δ_min) − q*‖∞`.
    pub extrapolation_residual: Option<T>,
    /// Fitted exponent `s` in `q(δ) = q* + c δ^s`, per entry (row-major).
    pub rates: Option<Vec<Option<T>>>,
    /// The smallest-`δ` value was returned without extrapolation.
    pub no_extrapolation: bool,
    pub warnings: Vec<String>,
}

/// Symmetric `d × d` effective tensor with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveTensor<T> {
    pub d: usize,
    /// Row-major entries.
    pub q: Vec<T>,
    pub route: Route,
    /// `0` for an extrapolated tensor.
    pub delta: T,
    pub n: usize,
    pub diagnostics: TensorDiagnostics<T>,
}

impl<T: Real> EffectiveTensor<T> {
    pub fn new(d: usize, q: Vec<T>, route: Route, delta: T, n: usize, diagnostics: TensorDiagnostics<T>) -> Self {
        assert_eq!(q.len(), d * d);
        Self { d, q, route, delta, n, diagnostics }
    }

    pub fn get(&self, k: usize, l: usize) -> T {
        self.q[k * self.d + l]
    }

    pub fn max_abs(&self) -> T {
        self.q.iter().fold(T::zero(), |a, v| a.max(v.abs()))
    }

    /// `max |q_kl − other_kl|`.
    pub fn distance(&self, other: &Self) -> T {
        self.q.iter().zip(&other.q).fold(T::zero(), |a, (x, y)| a.max((*x - *y).abs()))
    }

    pub fn min_eigenvalue(&self) -> T {
        min_sym_eigenvalue(&self.q, self.d)
    }
}

fn unit_stencil<T: Real>(d: usize, pts: &[(usize, T)]) -> Vec<T> {
    let mut eta = vec![T::zero(); d];
    for &(k, v) in pts {
        eta[k] += v;
    }
    eta
}

fn check_step<T: Real>(h: T) -> Result<()> {
    if !(h > T::zero() && h < T::of(0.5)) {
        return Err(Error::InvalidArgument(format!("step h = {h} must lie in (0, 1/2)")));
    }
    Ok(())
}

/// Central-difference gradient `(λ(h e_l) − λ(−h e_l)) / 2h` without the
/// criticality check.
pub fn gradient_estimate<T: Real>(prob: &BlochProblem<'_, T>, h: T, tol: T) -> Result<Vec<T>> {
    check_step(h)?;
    let d = prob.medium().d();
    (0..d)
        .into_par_iter()
        .map(|l| {
            let p = prob.first_eigenpair(&unit_stencil(d, &[(l, h)]), tol)?;
            let m = prob.first_eigenpair(&unit_stencil(d, &[(l, -h)]), tol)?;
            Ok((p.lambda - m.lambda) / (T::of(2.0) * h))
        })
        .collect()
}

/// Gradient of `λ₁^δ` at `η = 0`; fails if its norm exceeds
/// [`GRADIENT_TOL`], since `η = 0` must be a critical point.
pub fn gradient_at_zero<T: Real>(prob: &BlochProblem<'_, T>, h: T, tol: T) -> Result<Vec<T>> {
    let g = gradient_estimate(prob, h, tol)?;
    let nrm = g.iter().map(|v| *v * *v).sum::<T>().sqrt();
    let limit = T::of(GRADIENT_TOL);
    if nrm > limit {
        return Err(Error::CriticalityViolation { norm: nrm.as_f64(), tol: GRADIENT_TOL });
    }
    Ok(g)
}

/// Half the central-difference Hessian of `λ₁^δ` at `step`, plus the gradient
/// from the same stencil.
fn hessian_at<T: Real>(prob: &BlochProblem<'_, T>, step: T, tol: T, lambda0: T) -> Result<(Vec<T>, Vec<T>)> {
    let d = prob.medium().d();
    let two = T::of(2.0);
    let mut points: Vec<Vec<T>> = Vec::new();
    for k in 0..d {
        points.push(unit_stencil(d, &[(k, step)]));
        points.push(unit_stencil(d, &[(k, -step)]));
    }
    for k in 0..d {
        for l in k + 1..d {
            for (a, b) in [(step, step), (step, -step), (-step, step), (-step, -step)] {
                points.push(unit_stencil(d, &[(k, a), (l, b)]));
            }
        }
    }
    let pairs: Vec<EigenPair<T>> = points
        .par_iter()
        .map(|eta| prob.first_eigenpair(eta, tol))
        .collect::<Result<_>>()?;
    if let Some(p) = pairs.iter().find(|p| p.near_degenerate) {
        return Err(Error::DegenerateStencil(format!(
            "first eigenvalue is not simple at η = {:?}; shrink h",
            p.eta.iter().map(|v| v.as_f64()).collect::<Vec<_>>()
        )));
    }
    let lam: Vec<T> = pairs.iter().map(|p| p.lambda).collect();
    let mut q = vec![T::zero(); d * d];
    let mut grad = vec![T::zero(); d];
    for k in 0..d {
        let (p, m) = (lam[2 * k], lam[2 * k + 1]);
        q[k * d + k] = (p + m - two * lambda0) / (step * step) / two;
        grad[k] = (p - m) / (two * step);
    }
    let mut idx = 2 * d;
    for k in 0..d {
        for l in k + 1..d {
            let (pp, pm, mp, mm) = (lam[idx], lam[idx + 1], lam[idx + 2], lam[idx + 3]);
            idx += 4;
            let h2 = (pp - pm - mp + mm) / (T::of(4.0) * step * step);
            q[k * d + l] = h2 / two;
            q[l * d + k] = h2 / two;
        }
    }
    Ok((q, grad))
}

/// Effective tensor as half the Hessian of `λ₁^δ` at `η = 0`.
///
/// Evaluated at `h` with a second pass at `h/2`; the returned tensor is the
/// step-`h` value and `(4/3)|q_h − q_{h/2}|` is its Richardson error estimate.
pub fn hessian_tensor<T: Real>(prob: &BlochProblem<'_, T>, h: T, tol: T) -> Result<EffectiveTensor<T>> {
    check_step(h)?;
    let d = prob.medium().d();
    let zero = prob.first_eigenpair(&vec![T::zero(); d], tol)?;
    if zero.near_degenerate {
        return Err(Error::DegenerateStencil("first eigenvalue is not simple at η = 0".into()));
    }
    let (qh, grad) = hessian_at(prob, h, tol, zero.lambda)?;
    let (qh2, _) = hessian_at(prob, h / T::of(2.0), tol, zero.lambda)?;
    let diff = qh.iter().zip(&qh2).fold(T::zero(), |a, (x, y)| a.max((*x - *y).abs()));
    let gnorm = grad.iter().map(|v| *v * *v).sum::<T>().sqrt();
    let mut warnings = Vec::new();
    if gnorm > T::of(GRADIENT_TOL) {
        warnings.push(format!("gradient at zero has norm {gnorm:e}"));
    }
    Ok(EffectiveTensor::new(
        d,
        qh,
        Route::Hessian,
        prob.delta(),
        prob.lattice().radius(),
        TensorDiagnostics {
            asymmetry: Some(T::zero()),
            gradient_norm: Some(gnorm),
            richardson: Some(T::of(4.0 / 3.0) * diff),
            h: Some(h),
            warnings,
            ..Default::default()
        },
    ))
}

/// Mean-flux tensor at `(δ, N)`.
pub fn cell_tensor<T: Real>(medium: &LiftedMedium<T>, delta: T, n: usize) -> Result<EffectiveTensor<T>> {
    CellProblem::new(medium, delta, n)?.tensor()
}

/// Tensor by either route at `(δ, N)`.
pub fn tensor_at<T: Real>(medium: &LiftedMedium<T>, delta: T, n: usize, route: Route, h: T, tol: T) -> Result<EffectiveTensor<T>> {
    match route {
        Route::Cell => cell_tensor(medium, delta, n),
        Route::Hessian => hessian_tensor(&BlochProblem::new(medium, delta, n)?, h, tol),
        Route::Extrapolated => Err(Error::InvalidArgument("a single δ cannot be extrapolated".into())),
    }
}

/// Both routes at `(δ, N)`, each carrying the cross-route gap.
pub fn cross_validate<T: Real>(
    medium: &LiftedMedium<T>,
    delta: T,
    n: usize,
    h: T,
    tol: T,
) -> Result<(EffectiveTensor<T>, EffectiveTensor<T>)> {
    let (cell, hess) = rayon::join(
        || cell_tensor(medium, delta, n),
        || hessian_tensor(&BlochProblem::new(medium, delta, n)?, h, tol),
    );
    let (mut cell, mut hess) = (cell?, hess?);
    let gap = cell.distance(&hess);
    cell.diagnostics.cross_route_gap = Some(gap);
    hess.diagnostics.cross_route_gap = Some(gap);
    Ok((cell, hess))
}

/// Checks `∂φ₁/∂η_l(0) = i φ₁(0) ψ_l` on the nonzero modes.
///
/// Returns `‖(φ(h e_l) − φ(−h e_l))/2h − i φ̂(0; 0) ψ_l‖ / ‖ψ_l‖` with the
/// constant mode projected out (absolute when `ψ_l = 0`).
pub fn eigvec_derivative_check<T: Real>(prob: &BlochProblem<'_, T>, h: T, l: usize, tol: T) -> Result<T> {
    check_step(h)?;
    let d = prob.medium().d();
    if l >= d {
        return Err(Error::InvalidArgument(format!("direction {l} out of range for d = {d}")));
    }
    let cell = CellProblem::new(prob.medium(), prob.delta(), prob.lattice().radius())?;
    let psi = cell.solve(l)?;
    let zero = prob.first_eigenpair(&vec![T::zero(); d], tol)?;
    let plus = prob.first_eigenpair(&unit_stencil(d, &[(l, h)]), tol)?;
    let minus = prob.first_eigenpair(&unit_stencil(d, &[(l, -h)]), tol)?;
    let z = prob.lattice().zero_index();
    let c0 = zero.phi[z];
    let two_h = T::of(2.0) * h;
    let resid: Vec<Complex<T>> = (0..prob.lattice().len())
        .filter(|&i| i != z)
        .map(|i| {
            let dphi = (plus.phi[i] - minus.phi[i]).unscale(two_h);
            dphi - Complex::new(T::zero(), T::one()) * c0 * psi.psi[i]
        })
        .collect();
    let r = norm(&resid);
    let scale = psi.l2_norm();
    Ok(if scale > T::zero() { r / scale } else { r })
}

/// Outcome of a δ-continuation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Continuation<T> {
    /// Extrapolated (or smallest-δ) tensor.
    pub tensor: EffectiveTensor<T>,
    /// Per-δ tensors in schedule order.
    pub schedule: Vec<EffectiveTensor<T>>,
}

/// Computes the tensor along a strictly decreasing δ schedule and
/// extrapolates to `δ = 0`.
pub fn delta_continuation<T: Real>(
    medium: &LiftedMedium<T>,
    deltas: &[T],
    n: usize,
    route: Route,
    h: T,
    tol: T,
) -> Result<Continuation<T>> {
    check_schedule(deltas)?;
    let schedule: Vec<EffectiveTensor<T>> = deltas
        .par_iter()
        .map(|&delta| tensor_at(medium, delta, n, route, h, tol))
        .collect::<Result<_>>()?;
    let tensor = extrapolate(&schedule)?;
    Ok(Continuation { tensor, schedule })
}

fn check_schedule<T: Real>(deltas: &[T]) -> Result<()> {
    if deltas.is_empty() {
        return Err(Error::InvalidArgument("empty δ schedule".into()));
    }
    if deltas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("δ schedule must be strictly decreasing".into()));
    }
    Ok(())
}

/// Fits `q(δ) = q* + c δ^s` entrywise through the last three schedule
/// points.
///
/// Constant sequences extrapolate exactly. A sign change in successive
/// differences anywhere along the schedule, or fewer than three points,
/// returns the smallest-δ value flagged `no_extrapolation`. Differences that
/// do not shrink toward `δ = 0` are a continuation failure.
pub fn extrapolate<T: Real>(schedule: &[EffectiveTensor<T>]) -> Result<EffectiveTensor<T>> {
    let last = schedule.last().ok_or_else(|| Error::InvalidArgument("empty schedule".into()))?;
    let deltas: Vec<T> = schedule.iter().map(|t| t.delta).collect();
    check_schedule(&deltas)?;
    let d = last.d;
    let mut q = last.q.clone();
    let mut rates = vec![None; d * d];
    let mut residual = T::zero();
    let mut no_extrapolation = false;
    let mut warnings = Vec::new();

    if schedule.len() < 3 {
        no_extrapolation = true;
        warnings.push("fewer than three δ values; returning the smallest-δ tensor".into());
    } else {
        for e in 0..d * d {
            let vals: Vec<T> = schedule.iter().map(|t| t.q[e]).collect();
            match fit_entry(&deltas, &vals)? {
                Fit::Constant => {}
                Fit::NonMonotone => no_extrapolation = true,
                Fit::Power { q_star, rate } => {
                    residual = residual.max((vals[vals.len() - 1] - q_star).abs());
                    q[e] = q_star;
                    rates[e] = Some(rate);
                }
            }
        }
        if no_extrapolation {
            q.clone_from(&last.q);
            rates = vec![None; d * d];
            residual = T::zero();
            warnings.push("non-monotone δ sequence; returning the smallest-δ tensor".into());
        }
    }
    // keep the result exactly symmetric
    for k in 0..d {
        for l in 0..k {
            let v = T::of(0.5) * (q[k * d + l] + q[l * d + k]);
            q[k * d + l] = v;
            q[l * d + k] = v;
        }
    }
    Ok(EffectiveTensor::new(
        d,
        q,
        Route::Extrapolated,
        T::zero(),
        last.n,
        TensorDiagnostics {
            extrapolation_residual: Some(residual),
            rates: Some(rates),
            no_extrapolation,
            warnings,
            ..Default::default()
        },
    ))
}

enum Fit<T> {
    Constant,
    NonMonotone,
    Power { q_star: T, rate: T },
}

fn fit_entry<T: Real>(deltas: &[T], vals: &[T]) -> Result<Fit<T>> {
    let scale = T::one() + vals.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let tiny = T::of(CONSTANT_TOL) * scale;
    let diffs: Vec<T> = vals.windows(2).map(|w| w[0] - w[1]).collect();
    if diffs.iter().all(|x| x.abs() <= tiny) {
        return Ok(Fit::Constant);
    }
    let significant: Vec<T> = diffs.iter().copied().filter(|x| x.abs() > tiny).collect();
    if significant.windows(2).any(|w| w[0].signum() != w[1].signum()) {
        return Ok(Fit::NonMonotone);
    }
    let k = vals.len();
    let (da, db, dc) = (deltas[k - 3], deltas[k - 2], deltas[k - 1]);
    let (d1, d2) = (vals[k - 3] - vals[k - 2], vals[k - 2] - vals[k - 1]);
    if d2.abs() <= tiny {
        // converged within roundoff at the tail
        return Ok(Fit::Constant);
    }
    if d1.abs() <= tiny {
        return Err(Error::ContinuationFailure("differences grow toward δ = 0".into()));
    }
    let target = (d1 / d2).as_f64();
    let (a, b, c) = (da.as_f64(), db.as_f64(), dc.as_f64());
    let g = |s: f64| (a.powf(s) - b.powf(s)) / (b.powf(s) - c.powf(s));
    let floor = (a / b).ln() / (b / c).ln();
    if !(target > floor) {
        return Err(Error::ContinuationFailure(format!(
            "differences do not shrink toward δ = 0 (ratio {target:.3})"
        )));
    }
    let (mut lo, mut hi) = (1e-8f64, 1.0f64);
    while g(hi) < target {
        hi *= 2.0;
        if hi > 64.0 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let coef = d2.as_f64() / (b.powf(s) - c.powf(s));
    let q_star = vals[k - 1].as_f64() - coef * c.powf(s);
    Ok(Fit::Power { q_star: T::of(q_star), rate: T::of(s) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpcore::{QPMatrix, TrigSum, WindingMap};

    fn scalar_medium(parts: &[(Vec<f64>, f64, f64)], rows: Vec<Vec<f64>>) -> LiftedMedium<f64> {
        let a = QPMatrix::scalar(TrigSum::from_cos_sin(1, parts).unwrap());
        LiftedMedium::new(&a, WindingMap::new(rows).unwrap()).unwrap()
    }

    fn periodic_cos() -> LiftedMedium<f64> {
        scalar_medium(&[(vec![0.0], 2.0, 0.0), (vec![1.0], 1.0, 0.0)], vec![vec![1.0]])
    }

    fn scalar_tensor(delta: f64, v: f64) -> EffectiveTensor<f64> {
        EffectiveTensor::new(1, vec![v], Route::Cell, delta, 8, TensorDiagnostics::default())
    }

    #[test]
    fn identity_routes() {
        let m = scalar_medium(&[(vec![0.0], 1.0, 0.0)], vec![vec![1.0], vec![2f64.sqrt()]]);
        let prob = BlochProblem::new(&m, 0.1, 4).unwrap();
        let h = hessian_tensor(&prob, 1e-3, 1e-12).unwrap();
        assert!((h.get(0, 0) - 1.0).abs() < 1e-9);
        let g = gradient_at_zero(&prob, 1e-3, 1e-12).unwrap();
        assert_eq!(g[0], 0.0);
        let c = cell_tensor(&m, 0.1, 4).unwrap();
        assert_eq!(c.get(0, 0), 1.0);
        assert_eq!(eigvec_derivative_check(&prob, 1e-3, 0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn periodic_hessian_matches_oracle() {
        let m = periodic_cos();
        let prob = BlochProblem::new(&m, 1e-4, 16).unwrap();
        let h = hessian_tensor(&prob, 1e-3, 1e-11).unwrap();
        assert!((h.get(0, 0) - 3f64.sqrt()).abs() < 1e-3, "{}", h.get(0, 0));
        let g = gradient_at_zero(&prob, 1e-3, 1e-11).unwrap();
        assert!(g[0].abs() <= 1e-8);
        let r = eigvec_derivative_check(&prob, 1e-3, 0, 1e-11).unwrap();
        assert!(r <= 1e-4, "{r}");
    }

    #[test]
    fn routes_agree_in_two_dimensions() {
        let f = |axis: usize, c: f64| {
            let mut v = vec![0.0, 0.0];
            v[axis] = 1.0;
            TrigSum::from_cos_sin(2, &[(vec![0.0, 0.0], c, 0.0), (v, 1.0, 0.0)]).unwrap()
        };
        let off = TrigSum::from_cos_sin(2, &[(vec![1.0, 1.0], 0.3, 0.0)]).unwrap();
        let a = QPMatrix::new(2, vec![vec![f(0, 3.0), off.clone()], vec![off, f(1, 2.5)]]).unwrap();
        let m = LiftedMedium::new(&a, WindingMap::identity(2)).unwrap();
        let (cell, hess) = cross_validate(&m, 1e-2, 6, 1e-3, 1e-11).unwrap();
        let tol = 1e-6 * (1.0 + cell.max_abs()) + hess.diagnostics.richardson.unwrap();
        assert!(cell.distance(&hess) <= tol, "{:?} vs {:?}", cell.q, hess.q);
        assert!(cell.get(0, 1).abs() > 1e-4);
    }

    #[test]
    fn extrapolation_rules() {
        // q = 2 + 3δ exactly
        let sched: Vec<_> = [1e-1, 1e-2, 1e-3].iter().map(|&d| scalar_tensor(d, 2.0 + 3.0 * d)).collect();
        let q = extrapolate(&sched).unwrap();
        assert!((q.get(0, 0) - 2.0).abs() < 1e-12);
        assert!((q.diagnostics.rates.as_ref().unwrap()[0].unwrap() - 1.0).abs() < 1e-6);
        // non-uniform schedule with q = 1 + δ^0.5
        let sched: Vec<_> = [0.3, 0.05, 0.002].iter().map(|&d: &f64| scalar_tensor(d, 1.0 + d.sqrt())).collect();
        assert!((extrapolate(&sched).unwrap().get(0, 0) - 1.0).abs() < 1e-9);
        // constant
        let sched: Vec<_> = [1e-1, 1e-2, 1e-3].iter().map(|&d| scalar_tensor(d, 2.5)).collect();
        let q = extrapolate(&sched).unwrap();
        assert_eq!(q.get(0, 0), 2.5);
        assert_eq!(q.diagnostics.extrapolation_residual, Some(0.0));
        // sign change
        let sched = vec![scalar_tensor(1e-1, 2.0), scalar_tensor(1e-2, 1.0), scalar_tensor(1e-3, 1.5)];
        let q = extrapolate(&sched).unwrap();
        assert!(q.diagnostics.no_extrapolation);
        assert_eq!(q.get(0, 0), 1.5);
        // growing differences
        let sched = vec![scalar_tensor(1e-1, 1.0), scalar_tensor(1e-2, 0.9), scalar_tensor(1e-3, 0.0)];
        assert!(matches!(extrapolate(&sched), Err(Error::ContinuationFailure(_))));
        // too short
        let q = extrapolate(&[scalar_tensor(1e-1, 1.0), scalar_tensor(1e-2, 0.9)]).unwrap();
        assert!(q.diagnostics.no_extrapolation);
        // not decreasing
        assert!(extrapolate(&[scalar_tensor(1e-2, 1.0), scalar_tensor(1e-1, 0.9)]).is_err());
    }

    #[test]
    fn periodic_continuation() {
        let m = periodic_cos();
        let c = delta_continuation(&m, &[1e-1, 1e-2, 1e-3, 1e-4], 16, Route::Cell, 1e-3, 1e-11).unwrap();
        assert!((c.tensor.get(0, 0) - 3f64.sqrt()).abs() < 1e-4, "{}", c.tensor.get(0, 0));
        assert_eq!(c.schedule.len(), 4);
        for w in c.schedule.windows(2) {
            assert!(w[0].get(0, 0) >= w[1].get(0, 0));
        }
    }

    #[test]
    fn bad_steps() {
        let m = periodic_cos();
        let prob = BlochProblem::new(&m, 0.1, 4).unwrap();
        assert!(hessian_tensor(&prob, 0.0, 1e-10).is_err());
        assert!(hessian_tensor(&prob, 0.6, 1e-10).is_err());
        assert!(eigvec_derivative_check(&prob, 1e-3, 3, 1e-10).is_err());
        assert!(tensor_at(&m, 0.1, 4, Route::Extrapolated, 1e-3, 1e-10).is_err());
        assert_eq!("hessian".parse::<Route>().unwrap(), Route::Hessian);
        assert!("x".parse::<Route>().is_err());
    }
}
