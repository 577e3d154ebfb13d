//! Restricted Bloch waves and the first Bloch coefficient.
//!
//! The wave at scale `ε` is `φ̃(x; ξ) = (2π)^{-d/2} Σ_n φ̂₁(n; εξ) e^{i n·Λx/ε}`,
//! equal to `(2π)^{-d/2}` at `ξ = 0`. The transform of a compactly supported
//! `g` is the trapezoidal quadrature of `g(x) e^{-ix·ξ} conj(φ̃(x; ξ))`; the
//! Fourier reference uses the same grid with the constant wave.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::spectral::{BlochProblem, EigenPair};
use crate::{Error, Real, Result};

/// Minimum grid points per period of the fastest oscillation in the
/// integrand.
pub const POINTS_PER_PERIOD: f64 = 8.0;
/// Default tolerance for boundary values of a compact function.
pub const BOUNDARY_TOL: f64 = 1e-12;
/// Quasimomenta are rounded to this resolution for caching.
pub const ETA_RESOLUTION: f64 = 1e-12;

const CHUNK: usize = 2048;

type Sampler<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;

#[derive(Clone)]
enum Source<T> {
    Analytic(Sampler<T>),
    /// Values on a uniform grid with `cells[k]` cells per axis, last axis
    /// fastest.
    Samples { cells: Vec<usize>, values: Vec<T> },
}

/// A real function supported in the box `[lo, hi]`.
#[derive(Clone)]
pub struct CompactFunction<T> {
    lo: Vec<T>,
    hi: Vec<T>,
    source: Source<T>,
}

impl<T: Real> fmt::Debug for CompactFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.source {
            Source::Analytic(_) => "analytic".to_string(),
            Source::Samples { cells, .. } => format!("samples {cells:?}"),
        };
        f.debug_struct("CompactFunction")
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("source", &kind)
            .finish()
    }
}

fn check_box<T: Real>(lo: &[T], hi: &[T]) -> Result<()> {
    if lo.is_empty() || lo.len() != hi.len() {
        return Err(Error::InvalidArgument("support box needs matching nonempty corners".into()));
    }
    if lo.iter().zip(hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
        return Err(Error::InvalidArgument("support box must satisfy lo < hi".into()));
    }
    Ok(())
}

impl<T: Real> CompactFunction<T> {
    /// Wraps `f` on `[lo, hi]`; boundary values are checked on a 33-point
    /// grid per face.
    pub fn analytic<F>(lo: Vec<T>, hi: Vec<T>, f: F, boundary_tol: T) -> Result<Self>
    where
        F: Fn(&[T]) -> T + Send + Sync + 'static,
    {
        check_box(&lo, &hi)?;
        let g = Self { lo, hi, source: Source::Analytic(Arc::new(f)) };
        let grid = QuadratureGrid::new(g.lo.clone(), g.hi.clone(), vec![32; g.dim()])?;
        g.check_boundary(&grid, boundary_tol)?;
        Ok(g)
    }

    /// Samples on a uniform grid with `cells[k]` cells per axis (`cells[k] + 1`
    /// points), row-major with the last axis fastest.
    pub fn from_samples(lo: Vec<T>, hi: Vec<T>, cells: Vec<usize>, values: Vec<T>, boundary_tol: T) -> Result<Self> {
        check_box(&lo, &hi)?;
        if cells.len() != lo.len() || cells.iter().any(|&c| c < 2) {
            return Err(Error::InvalidArgument("each axis needs at least two cells".into()));
        }
        let count: usize = cells.iter().map(|c| c + 1).product();
        if values.len() != count {
            return Err(Error::MalformedInput(format!("expected {count} samples, got {}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::MalformedInput("non-finite sample".into()));
        }
        let grid = QuadratureGrid::new(lo.clone(), hi.clone(), cells.clone())?;
        let g = Self { lo, hi, source: Source::Samples { cells, values } };
        g.check_boundary(&grid, boundary_tol)?;
        Ok(g)
    }

    /// `e^{-|x|²/2}` truncated to `[-half_width, half_width]^d`.
    pub fn gaussian(d: usize, half_width: T) -> Result<Self> {
        let tol = T::of(BOUNDARY_TOL).max(T::of(2.0) * (-(half_width * half_width) / T::of(2.0)).exp());
        Self::analytic(
            vec![-half_width; d],
            vec![half_width; d],
            |x: &[T]| (-(x.iter().map(|v| *v * *v).sum::<T>()) / T::of(2.0)).exp(),
            tol,
        )
    }

    /// The smooth bump `exp(1 − 1/(1 − |x|²/r²))` on the ball of radius `r`.
    pub fn bump(d: usize, radius: T) -> Result<Self> {
        Self::analytic(
            vec![-radius; d],
            vec![radius; d],
            move |x: &[T]| {
                let s = x.iter().map(|v| *v * *v).sum::<T>() / (radius * radius);
                if s < T::one() {
                    (T::one() - T::one() / (T::one() - s)).exp()
                } else {
                    T::zero()
                }
            },
            T::of(BOUNDARY_TOL),
        )
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn support(&self) -> (&[T], &[T]) {
        (&self.lo, &self.hi)
    }

    /// The native sample grid, if the function is given by samples.
    pub fn native_cells(&self) -> Option<&[usize]> {
        match &self.source {
            Source::Samples { cells, .. } => Some(cells),
            Source::Analytic(_) => None,
        }
    }

    fn value(&self, grid: &QuadratureGrid<T>, flat: usize, x: &[T]) -> T {
        match &self.source {
            Source::Analytic(f) => f(x),
            Source::Samples { values, .. } => {
                debug_assert_eq!(grid.len(), values.len());
                values[flat]
            }
        }
    }

    fn check_boundary(&self, grid: &QuadratureGrid<T>, tol: T) -> Result<()> {
        let d = self.dim();
        let mut idx = vec![0; d];
        let mut x = vec![T::zero(); d];
        let mut worst = T::zero();
        for flat in 0..grid.len() {
            grid.unflatten(flat, &mut idx);
            if (0..d).any(|k| idx[k] == 0 || idx[k] == grid.cells[k]) {
                grid.point(&idx, &mut x);
                worst = worst.max(self.value(grid, flat, &x).abs());
            }
        }
        if worst > tol {
            return Err(Error::MalformedInput(format!(
                "function does not vanish on the support boundary (max {worst:e})"
            )));
        }
        Ok(())
    }
}

/// Tensor-product trapezoid grid on a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
    pub cells: Vec<usize>,
}

impl<T: Real> QuadratureGrid<T> {
    pub fn new(lo: Vec<T>, hi: Vec<T>, cells: Vec<usize>) -> Result<Self> {
        check_box(&lo, &hi)?;
        if cells.len() != lo.len() || cells.contains(&0) {
            return Err(Error::InvalidArgument("grid needs a positive cell count per axis".into()));
        }
        Ok(Self { lo, hi, cells })
    }

    pub fn len(&self) -> usize {
        self.cells.iter().map(|c| c + 1).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, k: usize) -> T {
        (self.hi[k] - self.lo[k]) / T::of_usize(self.cells[k])
    }

    /// Every axis refined by `factor`.
    pub fn refined(&self, factor: usize) -> Self {
        Self { lo: self.lo.clone(), hi: self.hi.clone(), cells: self.cells.iter().map(|c| c * factor.max(1)).collect() }
    }

    fn unflatten(&self, mut flat: usize, idx: &mut [usize]) {
        for k in (0..self.cells.len()).rev() {
            let m = self.cells[k] + 1;
            idx[k] = flat % m;
            flat /= m;
        }
    }

    fn point(&self, idx: &[usize], x: &mut [T]) {
        for k in 0..idx.len() {
            x[k] = if idx[k] == self.cells[k] {
                self.hi[k]
            } else {
                self.lo[k] + T::of_usize(idx[k]) * self.spacing(k)
            };
        }
    }

    fn weight(&self, idx: &[usize]) -> T {
        (0..idx.len()).fold(T::one(), |w, k| {
            let h = self.spacing(k);
            w * if idx[k] == 0 || idx[k] == self.cells[k] { h / T::of(2.0) } else { h }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct CacheKey {
    eta: Vec<i64>,
    delta: u64,
    n: usize,
}

/// Eigenpairs keyed by `(η rounded to 1e-12, δ, N)`; concurrent readers,
/// single writer per insert.
#[derive(Debug, Default)]
pub struct EigenCache<T> {
    map: RwLock<HashMap<CacheKey, Arc<EigenPair<T>>>>,
}

impl<T: Real> EigenCache<T> {
    pub fn new() -> Self {
        Self { map: RwLock::new(HashMap::new()) }
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The eigenpair at `η` rounded to the cache resolution; the solve runs at
    /// the rounded point so the result does not depend on which caller came
    /// first.
    pub fn get_or_compute(&self, problem: &BlochProblem<'_, T>, eta: &[T], tol: T) -> Result<Arc<EigenPair<T>>> {
        let res = ETA_RESOLUTION;
        let key = CacheKey {
            eta: eta.iter().map(|e| (e.as_f64() / res).round() as i64).collect(),
            delta: problem.delta().as_f64().to_bits(),
            n: problem.lattice().radius(),
        };
        if let Some(p) = self.map.read().expect("cache lock").get(&key) {
            return Ok(Arc::clone(p));
        }
        let rounded: Vec<T> = key.eta.iter().map(|&k| T::of(k as f64 * res)).collect();
        let pair = Arc::new(problem.first_eigenpair(&rounded, tol)?);
        let mut map = self.map.write().expect("cache lock");
        Ok(Arc::clone(map.entry(key).or_insert(pair)))
    }
}

/// The restricted first Bloch wave at scale `ε`.
#[derive(Debug)]
pub struct BlochWave<'a, T> {
    problem: BlochProblem<'a, T>,
    epsilon: T,
    tol: T,
    cache: Arc<EigenCache<T>>,
}

/// One row of a Bloch transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformRow<T> {
    pub xi: Vec<T>,
    /// `B₁^{δ,ε} g(ξ)`; zero outside the zone or when `λ₁` is not simple.
    pub value: Complex<T>,
    /// Same quadrature with the constant wave, i.e. the discrete `ĝ(ξ)`.
    pub reference: Complex<T>,
    pub in_zone: bool,
    pub simple: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformTable<T> {
    pub epsilon: T,
    pub grid: QuadratureGrid<T>,
    pub rows: Vec<TransformRow<T>>,
    pub warnings: Vec<String>,
}

impl<T: Real> TransformTable<T> {
    /// `max_ξ |B₁g(ξ) − ĝ(ξ)|`.
    pub fn sup_error(&self) -> T {
        self.rows.iter().fold(T::zero(), |a, r| a.max((r.value - r.reference).norm()))
    }
}

impl<'a, T: Real> BlochWave<'a, T> {
    pub fn new(problem: BlochProblem<'a, T>, epsilon: T, tol: T) -> Result<Self> {
        Self::with_cache(problem, epsilon, tol, Arc::new(EigenCache::new()))
    }

    /// Shares `cache` with other waves over the same problem.
    pub fn with_cache(problem: BlochProblem<'a, T>, epsilon: T, tol: T, cache: Arc<EigenCache<T>>) -> Result<Self> {
        if !(epsilon > T::zero() && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale ε = {epsilon} must be positive")));
        }
        if !(tol > T::zero()) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        Ok(Self { problem, epsilon, tol, cache })
    }

    pub fn problem(&self) -> &BlochProblem<'a, T> {
        &self.problem
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn delta(&self) -> T {
        self.problem.delta()
    }

    pub fn cache(&self) -> &Arc<EigenCache<T>> {
        &self.cache
    }

    fn eta(&self, xi: &[T]) -> Result<Vec<T>> {
        let d = self.problem.medium().d();
        if xi.len() != d {
            return Err(Error::InvalidArgument(format!("ξ has {} components, expected {d}", xi.len())));
        }
        Ok(xi.iter().map(|v| *v * self.epsilon).collect())
    }

    fn in_zone(eta: &[T]) -> bool {
        let half = T::of(0.5);
        eta.iter().all(|e| *e >= -half && *e < half)
    }

    /// Eigenpair at `η = εξ`, cached.
    pub fn eigenpair(&self, xi: &[T]) -> Result<Arc<EigenPair<T>>> {
        let eta = self.eta(xi)?;
        if !Self::in_zone(&eta) {
            return Err(Error::OutOfZone(eta.iter().map(|e| e.as_f64()).collect()));
        }
        self.cache.get_or_compute(&self.problem, &eta, self.tol)
    }

    fn norm_factor(&self) -> T {
        (T::of(2.0) * T::PI()).powf(-T::of_usize(self.problem.medium().d()) / T::of(2.0))
    }

    /// `φ̃(x; ξ)`.
    pub fn eval(&self, x: &[T], xi: &[T]) -> Result<Complex<T>> {
        let pair = self.eigenpair(xi)?;
        let w = self.problem.medium().winding();
        if x.len() != w.d() {
            return Err(Error::InvalidArgument(format!("x has {} components, expected {}", x.len(), w.d())));
        }
        let y: Vec<T> = w.apply(x).into_iter().map(|v| v / self.epsilon).collect();
        Ok(pair.eval(&y).scale(self.norm_factor()))
    }

    /// Largest `|ω_k|` in the integrand along each axis.
    fn max_frequency(&self, xis: &[Vec<T>]) -> Vec<T> {
        let d = self.problem.medium().d();
        let lat = self.problem.lattice();
        (0..d)
            .map(|k| {
                let xi = xis.iter().fold(T::zero(), |a, x| a.max(x[k].abs()));
                let wave = (0..lat.len()).fold(T::zero(), |a, i| a.max(self.problem.frequency(i)[k].abs()));
                xi + wave / self.epsilon
            })
            .collect()
    }

    /// Coarsest grid over the support of `g` with [`POINTS_PER_PERIOD`]
    /// points per period of every oscillation in the integrand.
    pub fn required_grid(&self, g: &CompactFunction<T>, xis: &[Vec<T>]) -> Result<QuadratureGrid<T>> {
        let omega = self.max_frequency(xis);
        let (lo, hi) = g.support();
        let cells = (0..g.dim())
            .map(|k| {
                let hmax = T::of(2.0) * T::PI() / (T::of(POINTS_PER_PERIOD) * omega[k].max(T::epsilon()));
                ((hi[k] - lo[k]) / hmax).ceil().to_usize().unwrap_or(usize::MAX).max(2)
            })
            .collect();
        QuadratureGrid::new(lo.to_vec(), hi.to_vec(), cells)
    }

    fn check_resolution(&self, grid: &QuadratureGrid<T>, xis: &[Vec<T>]) -> Result<()> {
        let omega = self.max_frequency(xis);
        for (k, om) in omega.iter().enumerate() {
            let h = grid.spacing(k);
            if *om * h > T::of(2.0) * T::PI() / T::of(POINTS_PER_PERIOD) {
                return Err(Error::Resolution(format!(
                    "spacing {h} on axis {k} gives fewer than {POINTS_PER_PERIOD} points per period of frequency {om}"
                )));
            }
        }
        Ok(())
    }

    /// `B₁^{δ,ε} g(ξ)` and the Fourier reference at each `ξ`.
    ///
    /// Analytic functions are sampled on [`required_grid`](Self::required_grid);
    /// sampled functions use their own grid, which must be fine enough.
    pub fn transform(&self, g: &CompactFunction<T>, xis: &[Vec<T>]) -> Result<TransformTable<T>> {
        let grid = match g.native_cells() {
            Some(cells) => {
                let (lo, hi) = g.support();
                QuadratureGrid::new(lo.to_vec(), hi.to_vec(), cells.to_vec())?
            }
            None => self.required_grid(g, xis)?,
        };
        self.transform_on(g, xis, &grid)
    }

    /// As [`transform`](Self::transform) on an explicit grid.
    pub fn transform_on(&self, g: &CompactFunction<T>, xis: &[Vec<T>], grid: &QuadratureGrid<T>) -> Result<TransformTable<T>> {
        let d = self.problem.medium().d();
        if g.dim() != d || grid.cells.len() != d {
            return Err(Error::InvalidArgument(format!("function and grid must live in dimension {d}")));
        }
        if let Some(cells) = g.native_cells() {
            if cells != grid.cells.as_slice() {
                return Err(Error::InvalidArgument("sampled functions are integrated on their own grid".into()));
            }
        }
        self.check_resolution(grid, xis)?;

        let mut warnings = Vec::new();
        let mut waves: Vec<Option<Arc<EigenPair<T>>>> = Vec::with_capacity(xis.len());
        let mut flags = Vec::with_capacity(xis.len());
        for xi in xis {
            let eta = self.eta(xi)?;
            if !Self::in_zone(&eta) {
                waves.push(None);
                flags.push((false, true));
                continue;
            }
            let pair = self.cache.get_or_compute(&self.problem, &eta, self.tol)?;
            if pair.near_degenerate {
                warnings.push(format!(
                    "λ₁ not simple at ξ = {:?}; transform set to zero",
                    xi.iter().map(|v| v.as_f64()).collect::<Vec<_>>()
                ));
                waves.push(None);
                flags.push((true, false));
            } else {
                waves.push(Some(pair));
                flags.push((true, true));
            }
        }

        let sums = self.integrate(g, xis, grid, &waves);
        let rows = xis
            .iter()
            .zip(sums)
            .zip(flags)
            .map(|((xi, (value, reference)), (in_zone, simple))| TransformRow {
                xi: xi.clone(),
                value,
                reference,
                in_zone,
                simple,
            })
            .collect();
        Ok(TransformTable { epsilon: self.epsilon, grid: grid.clone(), rows, warnings })
    }

    /// Per-ξ pairs `(Σ w g e^{-ix·ξ} conj φ̃, Σ w g e^{-ix·ξ} c)` with
    /// `c = (2π)^{-d/2}`, summed in fixed chunks for reproducibility.
    fn integrate(
        &self,
        g: &CompactFunction<T>,
        xis: &[Vec<T>],
        grid: &QuadratureGrid<T>,
        waves: &[Option<Arc<EigenPair<T>>>],
    ) -> Vec<(Complex<T>, Complex<T>)> {
        let zero = Complex::new(T::zero(), T::zero());
        let w = self.problem.medium().winding();
        let (d, m) = (w.d(), w.m());
        let lat = self.problem.lattice();
        let radius = lat.radius();
        let modes: Vec<Vec<usize>> =
            lat.modes().map(|n| n.iter().map(|&v| (v + radius as i64) as usize).collect()).collect();
        let any_wave = waves.iter().any(Option::is_some);
        let c = self.norm_factor();
        let total = grid.len();
        let nchunks = total.div_ceil(CHUNK);

        let partials: Vec<Vec<(Complex<T>, Complex<T>)>> = (0..nchunks)
            .into_par_iter()
            .map(|chunk| {
                let mut acc = vec![(zero, zero); xis.len()];
                let mut idx = vec![0; d];
                let mut x = vec![T::zero(); d];
                let mut powers = vec![vec![zero; 2 * radius + 1]; m];
                let mut phasors = vec![zero; modes.len()];
                for flat in chunk * CHUNK..((chunk + 1) * CHUNK).min(total) {
                    grid.unflatten(flat, &mut idx);
                    grid.point(&idx, &mut x);
                    let gw = g.value(grid, flat, &x) * grid.weight(&idx);
                    if gw == T::zero() {
                        continue;
                    }
                    if any_wave {
                        let y = w.apply(&x);
                        for (j, row) in powers.iter_mut().enumerate() {
                            let base = Complex::new(T::zero(), y[j] / self.epsilon).exp();
                            row[radius] = Complex::new(T::one(), T::zero());
                            for s in 1..=radius {
                                row[radius + s] = row[radius + s - 1] * base;
                                row[radius - s] = row[radius - s + 1] * base.conj();
                            }
                        }
                        for (p, mode) in phasors.iter_mut().zip(&modes) {
                            *p = mode.iter().enumerate().fold(Complex::new(T::one(), T::zero()), |a, (j, &o)| a * powers[j][o]);
                        }
                    }
                    for (s, xi) in xis.iter().enumerate() {
                        let phase: T = x.iter().zip(xi).map(|(a, b)| *a * *b).sum();
                        let e = Complex::new(phase.cos(), -phase.sin()).scale(gw * c);
                        acc[s].1 += e;
                        if let Some(pair) = &waves[s] {
                            let wave = pair.phi.iter().zip(&phasors).fold(zero, |a, (f, p)| a + f * p);
                            acc[s].0 += e * wave.conj();
                        }
                    }
                }
                acc
            })
            .collect();

        let mut out = vec![(zero, zero); xis.len()];
        for part in partials {
            for (o, p) in out.iter_mut().zip(part) {
                o.0 += p.0;
                o.1 += p.1;
            }
        }
        out
    }

    /// `√δ (Σ_n ‖n/ε‖⁴ (1 + ‖n/ε‖²)^{-1} |φ̂(n)|²)^{1/2}`, a negative-order
    /// norm of `√δ Δφ̃`.
    pub fn regularization_residual(&self, xi: &[T]) -> Result<T> {
        let pair = self.eigenpair(xi)?;
        let lat = self.problem.lattice();
        let sum = pair
            .phi
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let k2 = lat.mode(i).iter().map(|&v| T::of_i64(v * v)).sum::<T>() / (self.epsilon * self.epsilon);
                k2 * k2 / (T::one() + k2) * c.norm_sqr()
            })
            .sum::<T>();
        Ok(self.problem.delta().sqrt() * sum.sqrt())
    }
}

/// One row of a transform convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow<T> {
    pub epsilon: T,
    pub sup_error: T,
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformConvergence<T> {
    pub rows: Vec<ConvergenceRow<T>>,
    /// Least-squares slope of `log error` against `log ε`; `None` when some
    /// error vanishes.
    pub slope: Option<T>,
    pub tables: Vec<TransformTable<T>>,
}

/// Sup-over-ξ error of the transform against the Fourier reference along a
/// decreasing ε schedule, with the fitted log–log slope.
pub fn transform_convergence<T: Real>(
    g: &CompactFunction<T>,
    problem: &BlochProblem<'_, T>,
    epsilons: &[T],
    xis: &[Vec<T>],
    tol: T,
) -> Result<TransformConvergence<T>> {
    if epsilons.is_empty() || epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("ε schedule must be nonempty and strictly decreasing".into()));
    }
    if xis.is_empty() {
        return Err(Error::InvalidArgument("empty ξ set".into()));
    }
    let cache = Arc::new(EigenCache::new());
    let tables: Vec<TransformTable<T>> = epsilons
        .iter()
        .map(|&eps| BlochWave::with_cache(problem.clone(), eps, tol, Arc::clone(&cache))?.transform(g, xis))
        .collect::<Result<_>>()?;
    let rows: Vec<ConvergenceRow<T>> = tables
        .iter()
        .map(|t| ConvergenceRow { epsilon: t.epsilon, sup_error: t.sup_error(), cells: t.grid.cells.clone() })
        .collect();
    let slope = loglog_slope(&rows.iter().map(|r| (r.epsilon, r.sup_error)).collect::<Vec<_>>());
    Ok(TransformConvergence { rows, slope, tables })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope<T: Real>(points: &[(T, T)]) -> Option<T> {
    if points.len() < 2 || points.iter().any(|(x, y)| !(*x > T::zero() && *y > T::zero())) {
        return None;
    }
    let n = T::of_usize(points.len());
    let lx: Vec<T> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<T> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().copied().sum::<T>() / n;
    let my = ly.iter().copied().sum::<T>() / n;
    let sxx: T = lx.iter().map(|x| (*x - mx) * (*x - mx)).sum();
    let sxy: T = lx.iter().zip(&ly).map(|(x, y)| (*x - mx) * (*y - my)).sum();
    (sxx > T::zero()).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpcore::{LiftedMedium, QPMatrix, TrigSum, WindingMap};

    fn medium(parts: &[(Vec<f64>, f64, f64)], rows: Vec<Vec<f64>>) -> LiftedMedium<f64> {
        let a = QPMatrix::scalar(TrigSum::from_cos_sin(1, parts).unwrap());
        LiftedMedium::new(&a, WindingMap::new(rows).unwrap()).unwrap()
    }

    fn qp() -> LiftedMedium<f64> {
        medium(
            &[(vec![0.0], 3.0, 0.0), (vec![1.0], 0.0, 1.0), (vec![2f64.sqrt()], 0.0, 1.0)],
            vec![vec![1.0], vec![2f64.sqrt()]],
        )
    }

    fn constant() -> LiftedMedium<f64> {
        medium(&[(vec![0.0], 1.0, 0.0)], vec![vec![1.0]])
    }

    #[test]
    fn wave_normalization() {
        let m = qp();
        let bw = BlochWave::new(BlochProblem::new(&m, 1e-2, 4).unwrap(), 0.1, 1e-11).unwrap();
        let c = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        for x in [0.0, 0.37, -2.5] {
            let v = bw.eval(&[x], &[0.0]).unwrap();
            assert!((v - Complex::new(c, 0.0)).norm() < 1e-10, "{v}");
        }
        assert!(matches!(bw.eval(&[0.0], &[6.0]), Err(Error::OutOfZone(_))));
        assert_eq!(bw.regularization_residual(&[0.0]).unwrap(), 0.0);
    }

    #[test]
    fn wave_deviation_is_order_eps_xi() {
        let m = qp();
        let dev = |eps: f64| {
            let bw = BlochWave::new(BlochProblem::new(&m, 1e-2, 6).unwrap(), eps, 1e-11).unwrap();
            let c = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
            (0..41).map(|i| -2.0 + 0.1 * i as f64).fold(0.0f64, |a, x| a.max((bw.eval(&[x], &[1.0]).unwrap() - c).norm()))
        };
        let (d1, d2) = (dev(0.1), dev(0.05));
        assert!(d1 > 0.0 && d2 < 0.6 * d1, "{d1} {d2}");
    }

    #[test]
    fn constant_medium_matches_fourier_exactly() {
        let m = constant();
        let bw = BlochWave::new(BlochProblem::new(&m, 1e-3, 3).unwrap(), 0.25, 1e-11).unwrap();
        let g = CompactFunction::gaussian(1, 8.0).unwrap();
        let xis: Vec<Vec<f64>> = (-2..=2).map(|k| vec![k as f64 * 0.5]).collect();
        let t = bw.transform(&g, &xis).unwrap();
        assert_eq!(t.sup_error(), 0.0);
        // ĝ(ξ) = e^{-ξ²/2} for the unit Gaussian
        for r in &t.rows {
            assert!((r.reference.re - (-r.xi[0] * r.xi[0] / 2.0).exp()).abs() < 1e-12);
            assert!(r.reference.im.abs() < 1e-12);
        }
        assert_eq!(bw.regularization_residual(&[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn out_of_zone_is_zero() {
        let m = qp();
        let bw = BlochWave::new(BlochProblem::new(&m, 1e-2, 3).unwrap(), 0.25, 1e-11).unwrap();
        let g = CompactFunction::bump(1, 2.0).unwrap();
        let t = bw.transform(&g, &[vec![3.0], vec![0.0]]).unwrap();
        assert!(!t.rows[0].in_zone);
        assert_eq!(t.rows[0].value, Complex::new(0.0, 0.0));
        assert!(t.rows[0].reference.norm() > 0.0);
        assert!(t.rows[1].in_zone);
    }

    #[test]
    fn coarse_samples_rejected() {
        let m = qp();
        let bw = BlochWave::new(BlochProblem::new(&m, 1e-2, 3).unwrap(), 0.1, 1e-11).unwrap();
        let cells = 20;
        let vals: Vec<f64> = (0..=cells)
            .map(|i| {
                let x = -4.0 + 8.0 * i as f64 / cells as f64;
                (-x * x / 2.0).exp() - (-8.0f64).exp()
            })
            .collect();
        let g = CompactFunction::from_samples(vec![-4.0], vec![4.0], vec![cells], vals, 1e-12).unwrap();
        assert!(matches!(bw.transform(&g, &[vec![0.5]]), Err(Error::Resolution(_))));
        assert!(CompactFunction::from_samples(vec![-4.0], vec![4.0], vec![2], vec![1.0, 1.0, 1.0], 1e-12).is_err());
        assert!(CompactFunction::<f64>::analytic(vec![0.0], vec![1.0], |_| 1.0, 1e-12).is_err());
    }

    #[test]
    fn quadrature_refinement_is_stable() {
        let m = qp();
        let bw = BlochWave::new(BlochProblem::new(&m, 1e-3, 4).unwrap(), 0.125, 1e-11).unwrap();
        let g = CompactFunction::gaussian(1, 8.0).unwrap();
        let xis = vec![vec![-1.0], vec![0.25], vec![1.0]];
        let grid = bw.required_grid(&g, &xis).unwrap();
        let a = bw.transform_on(&g, &xis, &grid).unwrap();
        let b = bw.transform_on(&g, &xis, &grid.refined(2)).unwrap();
        for (r, s) in a.rows.iter().zip(&b.rows) {
            assert!((r.value - s.value).norm() < 1e-10);
        }
    }

    #[test]
    fn cache_is_shared_and_deterministic() {
        let m = qp();
        let bw = BlochWave::new(BlochProblem::new(&m, 1e-2, 3).unwrap(), 0.1, 1e-11).unwrap();
        let g = CompactFunction::gaussian(1, 8.0).unwrap();
        let xis = vec![vec![1.0], vec![1.0 + 1e-14], vec![-1.0]];
        let t1 = bw.transform(&g, &xis).unwrap();
        assert_eq!(bw.cache().len(), 2);
        let t2 = bw.transform(&g, &xis).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn regularization_residual_bounded_in_delta() {
        let m = qp();
        let vals: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&d| {
                let bw = BlochWave::new(BlochProblem::new(&m, d, 6).unwrap(), 0.125, 1e-11).unwrap();
                bw.regularization_residual(&[1.0]).unwrap()
            })
            .collect();
        assert!(vals.iter().all(|v| v.is_finite() && *v > 0.0));
        assert!(vals.iter().cloned().fold(0.0, f64::max) <= 10.0 * vals[0], "{vals:?}");
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = [0.1, 0.05, 0.025].iter().map(|&e| (e, 3.0 * e)).collect();
        assert!((loglog_slope(&pts).unwrap() - 1.0).abs() < 1e-12);
        assert!(loglog_slope(&[(0.1, 0.0), (0.05, 0.0)]).is_none());
    }
}
