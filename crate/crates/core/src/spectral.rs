//! Fourier–Galerkin discretization of the regularized Bloch problem
//!
//! ```text
//! -(D + iη)·B(D + iη)φ - δΔφ = λφ   on [0, 2π)^M,   D = Λᵀ∇_y,
//! ```
//!
//! and its lowest eigenpair. In the orthonormal exponential basis the matrix
//! entry for modes `m, n` is `(Λᵀm+η)·B̂(m−n)(Λᵀn+η) + δ|n|²[m=n]`; it is
//! banded in lexicographic mode order because `B̂` has finite support.

use num_complex::Complex;
use rayon::prelude::*;

use crate::linalg::{lowest_eigenpairs, norm, BandedHermitian};
use crate::qpcore::{FourierField, LiftedMedium};
use crate::{Error, Real, Result};

/// Relative gap under which the first eigenvalue is treated as degenerate.
pub const GAP_TOL: f64 = 1e-8;
/// Coefficients below this modulus are ignored when fixing the phase.
pub const PHASE_TOL: f64 = 1e-8;
pub const MAX_ITER: usize = 2000;

/// Eigen-solver tolerance on `‖Aφ − λφ‖` used by default.
pub fn default_tol<T: Real>() -> T {
    T::of(1e-10).max(T::of(1e3) * T::epsilon())
}

/// Modes `n ∈ ℤ^M` with `‖n‖∞ ≤ N`, numbered lexicographically:
/// `index(n) = Σ_j (n_j + N)(2N+1)^{M-1-j}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeLattice {
    m: usize,
    n: usize,
}

impl ModeLattice {
    pub fn new(m: usize, n: usize) -> Self {
        assert!(m > 0, "lattice dimension must be positive");
        Self { m, n }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// Truncation radius `N`.
    pub fn radius(&self) -> usize {
        self.n
    }

    fn side(&self) -> usize {
        2 * self.n + 1
    }

    pub fn len(&self) -> usize {
        self.side().pow(self.m as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, mode: &[i64]) -> Option<usize> {
        let (r, s) = (self.n as i64, self.side());
        let mut idx = 0usize;
        for &c in mode {
            if c.abs() > r {
                return None;
            }
            idx = idx * s + (c + r) as usize;
        }
        Some(idx)
    }

    pub fn mode(&self, mut idx: usize) -> Vec<i64> {
        let s = self.side();
        let mut out = vec![0i64; self.m];
        for c in out.iter_mut().rev() {
            *c = (idx % s) as i64 - self.n as i64;
            idx /= s;
        }
        out
    }

    /// Index of `n = 0`.
    pub fn zero_index(&self) -> usize {
        (self.len() - 1) / 2
    }

    /// `index(n + k) - index(n)` for any `n` where both are in range.
    pub fn offset(&self, k: &[i64]) -> i64 {
        let s = self.side() as i64;
        k.iter().fold(0i64, |acc, &c| acc * s + c)
    }

    pub fn modes(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len()).map(|i| self.mode(i))
    }
}

/// Gårding shift `C_* = sup_bound(B̂) · (d + 1)`; independent of `δ` and `η`.
pub fn choose_shift<T: Real>(bhat: &FourierField<T>) -> T {
    bhat.sup_bound() * T::of_usize(bhat.shape().0 + 1)
}

/// Galerkin matrix of `-D·B D - δΔ`-type forms on a set of lattice modes.
///
/// `kvec[i]` is the wave vector attached to row `i` (for the Bloch problem
/// `Λᵀn + η`), `modes[i]` the lattice mode; entry `(i, j)` is
/// `kvec[i]·B̂(mode_i − mode_j) kvec[j] + δ|mode_j|²[i=j]`.
pub(crate) fn galerkin<T: Real>(
    bhat: &FourierField<T>,
    lattice: &ModeLattice,
    kept: &[usize],
    kvec: &[Vec<T>],
    delta: T,
) -> Result<BandedHermitian<T>> {
    let n = kept.len();
    let d = bhat.shape().0;
    // position of each lattice index in `kept`
    let mut pos = vec![usize::MAX; lattice.len()];
    for (i, &k) in kept.iter().enumerate() {
        pos[k] = i;
    }
    let support: Vec<(Vec<i64>, &[Complex<T>])> = bhat.iter().map(|(k, c)| (k.to_vec(), c)).collect();
    let kd = support
        .iter()
        .map(|(k, _)| lattice.offset(k).unsigned_abs() as usize)
        .max()
        .unwrap_or(0);
    let mut a = BandedHermitian::zeros(n, kd);
    let zero = Complex::new(T::zero(), T::zero());
    let bform = |c: &[Complex<T>], u: &[T], v: &[T]| -> Complex<T> {
        let mut s = zero;
        for k in 0..d {
            for l in 0..d {
                s += c[k * d + l] * (u[k] * v[l]);
            }
        }
        s
    };
    for (i, &li) in kept.iter().enumerate() {
        let mi = lattice.mode(li);
        for (k, c) in &support {
            let mj: Vec<i64> = mi.iter().zip(k).map(|(a, b)| a - b).collect();
            let Some(lj) = lattice.index(&mj) else { continue };
            let j = pos[lj];
            if j == usize::MAX || j > i {
                continue;
            }
            let mut v = bform(c, &kvec[i], &kvec[j]);
            if i == j {
                let n2: i64 = mj.iter().map(|x| x * x).sum();
                v.re += delta * T::of_i64(n2);
            } else {
                // the (j, i) entry computed from B̂(−k) must be the conjugate
                let neg: Vec<i64> = k.iter().map(|x| -x).collect();
                let upper = bhat.get(&neg).map_or(zero, |cn| bform(cn, &kvec[j], &kvec[i]));
                let tol = T::of(1e-12) * (T::one() + v.norm());
                if (upper - v.conj()).norm() > tol {
                    return Err(Error::InternalConsistency(format!(
                        "Galerkin matrix is not Hermitian at modes {mi:?}, {mj:?}"
                    )));
                }
            }
            a.set_lower(i, j, v);
        }
    }
    Ok(a)
}

/// Regularized Bloch problem for one medium, `δ` and truncation.
#[derive(Debug, Clone)]
pub struct BlochProblem<'a, T> {
    medium: &'a LiftedMedium<T>,
    delta: T,
    lattice: ModeLattice,
    shift: T,
    /// `Λᵀn` for every lattice mode.
    freqs: Vec<Vec<T>>,
}

impl<'a, T: Real> BlochProblem<'a, T> {
    pub fn new(medium: &'a LiftedMedium<T>, delta: T, n: usize) -> Result<Self> {
        if !(delta > T::zero() && delta < T::one()) {
            return Err(Error::InvalidArgument(format!("delta = {delta} must lie in (0, 1)")));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("truncation radius must be positive".into()));
        }
        let lattice = ModeLattice::new(medium.m(), n);
        let w = medium.winding();
        let freqs = lattice.modes().map(|mode| w.frequency(&mode)).collect();
        Ok(Self {
            medium,
            delta,
            lattice,
            shift: choose_shift(medium.bhat()),
            freqs,
        })
    }

    pub fn medium(&self) -> &'a LiftedMedium<T> {
        self.medium
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn lattice(&self) -> &ModeLattice {
        &self.lattice
    }

    /// The Gårding shift `C_*`.
    pub fn shift(&self) -> T {
        self.shift
    }

    /// `Λᵀn` for the mode at lattice index `i`.
    pub fn frequency(&self, i: usize) -> &[T] {
        &self.freqs[i]
    }

    /// The operator at quasimomentum `eta ∈ [-1/2, 1/2)^d`.
    pub fn operator(&self, eta: &[T]) -> Result<ShiftedOperator<'_, 'a, T>> {
        if eta.len() != self.medium.d() {
            return Err(Error::InvalidArgument(format!(
                "quasimomentum has {} components, expected {}",
                eta.len(),
                self.medium.d()
            )));
        }
        let half = T::of(0.5);
        if eta.iter().any(|e| !(*e >= -half && *e < half)) {
            return Err(Error::OutOfZone(eta.iter().map(|e| e.as_f64()).collect()));
        }
        Ok(ShiftedOperator { problem: self, eta: eta.to_vec(), shift: self.shift })
    }

    pub fn first_eigenpair(&self, eta: &[T], tol: T) -> Result<EigenPair<T>> {
        self.operator(eta)?.first_eigenpair(tol)
    }

    /// `λ₁^δ` and diagnostics at every `eta`, in input order; per-row errors
    /// do not stop the sweep.
    pub fn eigen_sweep(&self, etas: &[Vec<T>], tol: T) -> Vec<Result<SweepRow<T>>> {
        etas.par_iter()
            .map(|eta| {
                self.first_eigenpair(eta, tol).map(|p| SweepRow {
                    eta: eta.clone(),
                    lambda: p.lambda,
                    gap: p.gap,
                    residual: p.residual,
                    near_degenerate: p.near_degenerate,
                })
            })
            .collect()
    }
}

/// `C^δ(η) + C_*` on the lattice.
#[derive(Debug, Clone)]
pub struct ShiftedOperator<'p, 'a, T> {
    problem: &'p BlochProblem<'a, T>,
    eta: Vec<T>,
    shift: T,
}

impl<T: Real> ShiftedOperator<'_, '_, T> {
    pub fn eta(&self) -> &[T] {
        &self.eta
    }

    pub fn shift(&self) -> T {
        self.shift
    }

    /// Galerkin matrix with `shift` added on the diagonal.
    pub fn assemble_with_shift(&self, shift: T) -> Result<BandedHermitian<T>> {
        let p = self.problem;
        let kept: Vec<usize> = (0..p.lattice.len()).collect();
        let kvec: Vec<Vec<T>> = p
            .freqs
            .iter()
            .map(|f| f.iter().zip(&self.eta).map(|(a, b)| *a + *b).collect())
            .collect();
        let mut a = galerkin(p.medium.bhat(), &p.lattice, &kept, &kvec, p.delta)?;
        if shift != T::zero() {
            a.add_diag(shift);
        }
        Ok(a)
    }

    /// The shifted matrix `C^δ(η) + C_*`.
    pub fn assemble(&self) -> Result<BandedHermitian<T>> {
        self.assemble_with_shift(self.shift)
    }

    /// Lowest eigenpair of `C^δ(η)`; the shift is undone.
    ///
    /// The solve runs on the unshifted matrix (positive semidefinite because
    /// `B` is coercive) so that small eigenvalues keep full relative
    /// accuracy; `C_*` serves as the fallback pole.
    pub fn first_eigenpair(&self, tol: T) -> Result<EigenPair<T>> {
        if !(tol > T::zero()) {
            return Err(Error::InvalidArgument("tolerance must be positive".into()));
        }
        let p = self.problem;
        let a = self.assemble_with_shift(T::zero())?;
        let count = a.order().min(2);
        let sol = lowest_eigenpairs(&a, count, tol, MAX_ITER, self.shift)?;
        let lambda = sol.values[0];
        let lambda2 = sol.values.get(1).copied().unwrap_or(T::infinity());
        let gap = lambda2 - lambda;
        let near_degenerate = gap < T::of(GAP_TOL) * (T::one() + lambda2.abs());
        let mut phi = sol.vectors.into_iter().next().expect("one eigenvector");
        let anchor = normalize_phase(&mut phi, p.lattice.zero_index());
        Ok(EigenPair {
            eta: self.eta.clone(),
            delta: p.delta,
            lattice: p.lattice,
            lambda,
            lambda2,
            gap,
            residual: sol.residuals[0],
            near_degenerate,
            phi,
            anchor,
        })
    }
}

/// Scales `phi` to unit norm and rotates its phase so that `phi[zero]` is
/// real nonnegative, or, when that coefficient is negligible, the first
/// significant coefficient is real positive. Returns the anchor index.
pub fn normalize_phase<T: Real>(phi: &mut [Complex<T>], zero: usize) -> usize {
    let nrm = norm(phi);
    if nrm > T::zero() {
        phi.iter_mut().for_each(|c| *c = c.unscale(nrm));
    }
    let tol = T::of(PHASE_TOL);
    let anchor = if phi[zero].norm() > tol {
        zero
    } else {
        phi.iter().position(|c| c.norm() > tol).unwrap_or(zero)
    };
    let c = phi[anchor];
    if c.norm() > T::zero() {
        let rot = c.conj().unscale(c.norm());
        phi.iter_mut().for_each(|v| *v *= rot);
        phi[anchor].im = T::zero();
    }
    anchor
}

/// Lowest regularized Bloch eigenpair `(λ₁^δ(η), φ̂₁^δ(·; η))`.
///
/// `phi` has unit `ℓ²` norm; its phase is fixed at lattice index `anchor`
/// (the zero mode whenever it is significant).
#[derive(Debug, Clone)]
pub struct EigenPair<T> {
    pub eta: Vec<T>,
    pub delta: T,
    pub lattice: ModeLattice,
    pub lambda: T,
    /// Second eigenvalue, `+∞` on a one-mode lattice.
    pub lambda2: T,
    pub gap: T,
    pub residual: T,
    /// Gap below `1e-8 (1 + |λ₂|)`: simplicity is not guaranteed.
    pub near_degenerate: bool,
    pub phi: Vec<Complex<T>>,
    pub anchor: usize,
}

impl<T: Real> EigenPair<T> {
    /// `ℓ²` norm of the coefficients away from `n = 0`.
    pub fn nonconstant_norm(&self) -> T {
        let z = self.lattice.zero_index();
        self.phi
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != z)
            .map(|(_, c)| c.norm_sqr())
            .sum::<T>()
            .sqrt()
    }

    /// `Σ_n φ̂(n) e^{i n·y}` at a torus point.
    pub fn eval(&self, y: &[T]) -> Complex<T> {
        self.phi
            .iter()
            .enumerate()
            .fold(Complex::new(T::zero(), T::zero()), |acc, (i, c)| {
                let phase: T = self.lattice.mode(i).iter().zip(y).map(|(a, b)| T::of_i64(*a) * *b).sum();
                acc + c * Complex::new(phase.cos(), phase.sin())
            })
    }
}

/// One row of an eigenvalue sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub eta: Vec<T>,
    pub lambda: T,
    pub gap: T,
    pub residual: T,
    pub near_degenerate: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigen;
    use crate::qpcore::{QPMatrix, TrigSum, WindingMap};

    fn medium(parts: &[(Vec<f64>, f64, f64)], rows: Vec<Vec<f64>>) -> LiftedMedium<f64> {
        let a = QPMatrix::scalar(TrigSum::from_cos_sin(1, parts).unwrap());
        LiftedMedium::new(&a, WindingMap::new(rows).unwrap()).unwrap()
    }

    fn periodic_cos() -> LiftedMedium<f64> {
        medium(&[(vec![0.0], 2.0, 0.0), (vec![1.0], 1.0, 0.0)], vec![vec![1.0]])
    }

    fn qp() -> LiftedMedium<f64> {
        let r2 = 2f64.sqrt();
        medium(
            &[(vec![0.0], 3.0, 0.0), (vec![1.0], 0.0, 1.0), (vec![r2], 0.0, 1.0)],
            vec![vec![1.0], vec![r2]],
        )
    }

    fn identity_qp() -> LiftedMedium<f64> {
        medium(&[(vec![0.0], 1.0, 0.0)], vec![vec![1.0], vec![2f64.sqrt()]])
    }

    #[test]
    fn lattice_ordering() {
        let l = ModeLattice::new(2, 2);
        assert_eq!(l.len(), 25);
        assert_eq!(l.mode(0), vec![-2, -2]);
        assert_eq!(l.mode(1), vec![-2, -1]);
        assert_eq!(l.zero_index(), 12);
        assert_eq!(l.mode(12), vec![0, 0]);
        for i in 0..l.len() {
            assert_eq!(l.index(&l.mode(i)), Some(i));
        }
        assert_eq!(l.index(&[3, 0]), None);
        assert_eq!(l.offset(&[1, 0]), 5);
        assert_eq!(l.index(&[1, 1]).unwrap() - l.index(&[0, 1]).unwrap(), 5);
    }

    #[test]
    fn assemble_three_mode_example() {
        let m = periodic_cos();
        let prob = BlochProblem::new(&m, 0.1, 1).unwrap();
        let op = prob.operator(&[0.0]).unwrap();
        let a = op.assemble().unwrap().to_dense();
        let cs = op.shift();
        assert!((cs - 6.0).abs() < 1e-15);
        let d: Vec<f64> = (0..3).map(|i| a[i * 3 + i].re).collect();
        assert!((d[0] - (2.0 + 0.1 + cs)).abs() < 1e-14);
        assert!((d[1] - cs).abs() < 1e-14);
        assert!((d[2] - (2.0 + 0.1 + cs)).abs() < 1e-14);
        // entry(m=1, n=0) = 1·b̂(1)·0 = 0; entry(m=1, n=-1) = −b̂(2) = 0
        assert_eq!(a[2 * 3 + 1].norm(), 0.0);
        assert_eq!(a[2 * 3].norm(), 0.0);
    }

    #[test]
    fn assemble_matches_quadrature() {
        // form a[η](e_n, e_m) evaluated by trapezoid quadrature on the torus
        let m = periodic_cos();
        let prob = BlochProblem::new(&m, 0.1, 2).unwrap();
        let eta = 0.2;
        let a = prob.operator(&[eta]).unwrap().assemble_with_shift(0.0).unwrap();
        let q = 64;
        for mi in -2i64..=2 {
            for ni in -2i64..=2 {
                let mut s = Complex::new(0.0, 0.0);
                for j in 0..q {
                    let y = 2.0 * std::f64::consts::PI * j as f64 / q as f64;
                    let b = 2.0 + y.cos();
                    // (D+iη)e_n = i(n+η)e_n
                    let en = Complex::new(0.0, (ni as f64) * y).exp();
                    let em = Complex::new(0.0, (mi as f64) * y).exp();
                    s += b * (ni as f64 + eta) * (mi as f64 + eta) * en * em.conj();
                }
                let mut s = s / q as f64;
                if mi == ni {
                    s += 0.1 * (ni * ni) as f64;
                }
                let i = prob.lattice().index(&[mi]).unwrap();
                let j = prob.lattice().index(&[ni]).unwrap();
                assert!((a.get(i, j) - s).norm() < 1e-13, "({mi},{ni})");
            }
        }
    }

    #[test]
    fn identity_is_diagonal() {
        let m = identity_qp();
        let prob = BlochProblem::new(&m, 0.05, 3).unwrap();
        let op = prob.operator(&[0.1]).unwrap();
        let a = op.assemble().unwrap();
        for i in 0..a.order() {
            let f = prob.frequency(i)[0] + 0.1;
            let n2: i64 = prob.lattice().mode(i).iter().map(|x| x * x).sum();
            assert!((a.diag(i) - (f * f + 0.05 * n2 as f64 + op.shift())).abs() < 1e-12);
            for j in 0..i {
                assert_eq!(a.get(i, j).norm(), 0.0);
            }
        }
    }

    #[test]
    fn identity_eigenpair() {
        let m = identity_qp();
        let prob = BlochProblem::new(&m, 0.05, 8).unwrap();
        let p = prob.first_eigenpair(&[0.1], 1e-12).unwrap();
        assert!((p.lambda - 0.01).abs() < 1e-14);
        assert!(p.nonconstant_norm() < 1e-12);
        assert_eq!(p.anchor, prob.lattice().zero_index());
        assert!((p.phi[p.anchor].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_quasimomentum_kernel() {
        for m in [periodic_cos(), qp()] {
            let prob = BlochProblem::new(&m, 1e-3, 8).unwrap();
            let p = prob.first_eigenpair(&[0.0], 1e-11).unwrap();
            assert!(p.lambda.abs() < 1e-12, "{}", p.lambda);
            assert!(p.nonconstant_norm() < 1e-10);
            assert!(p.residual <= 1e-11);
            assert!(!p.near_degenerate);
        }
    }

    #[test]
    fn harmonic_mean_dispersion() {
        let m = periodic_cos();
        let prob = BlochProblem::new(&m, 1e-3, 16).unwrap();
        let p = prob.first_eigenpair(&[0.05], 1e-11).unwrap();
        let oracle = 1.732_050_807_568_877_2 * 0.05 * 0.05;
        assert!((p.lambda - oracle).abs() < 0.05 * oracle, "{} vs {oracle}", p.lambda);
    }

    #[test]
    fn iterative_matches_dense() {
        let m = qp();
        let prob = BlochProblem::new(&m, 1e-2, 6).unwrap();
        let op = prob.operator(&[0.13]).unwrap();
        let a = op.assemble_with_shift(0.0).unwrap();
        let (vals, _) = hermitian_eigen(&a.to_dense(), a.order());
        let p = op.first_eigenpair(1e-11).unwrap();
        assert!((p.lambda - vals[0]).abs() < 1e-11);
        assert!((p.lambda2 - vals[1]).abs() < 1e-7);
        assert!(p.residual <= 1e-11);
    }

    #[test]
    fn shifted_matrix_is_positive_definite() {
        let m = periodic_cos();
        let prob = BlochProblem::new(&m, 0.5, 8).unwrap();
        for eta in [-0.5, -0.2, 0.0, 0.3, 0.49] {
            let a = prob.operator(&[eta]).unwrap().assemble().unwrap();
            assert!(a.cholesky(0.0).is_ok());
        }
    }

    #[test]
    fn evenness_and_delta_monotonicity() {
        let m = qp();
        let mut prev = f64::NEG_INFINITY;
        for delta in [1e-4, 1e-3, 1e-2, 1e-1] {
            let prob = BlochProblem::new(&m, delta, 8).unwrap();
            let rows = prob.eigen_sweep(&[vec![0.07], vec![-0.07]], 1e-11);
            let (a, b) = (rows[0].as_ref().unwrap(), rows[1].as_ref().unwrap());
            assert!((a.lambda - b.lambda).abs() < 2e-11);
            assert!(a.lambda >= prev - 1e-14);
            prev = a.lambda;
        }
    }

    #[test]
    fn sweep_keeps_order_and_errors() {
        let m = identity_qp();
        let prob = BlochProblem::new(&m, 0.1, 4).unwrap();
        let rows = prob.eigen_sweep(&[vec![0.2], vec![0.7], vec![-0.1], vec![0.0]], 1e-12);
        assert!((rows[0].as_ref().unwrap().lambda - 0.04).abs() < 1e-13);
        assert!(matches!(rows[1], Err(Error::OutOfZone(_))));
        assert!((rows[2].as_ref().unwrap().lambda - 0.01).abs() < 1e-13);
        assert!(rows[3].as_ref().unwrap().lambda.abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_parameters() {
        let m = periodic_cos();
        assert!(BlochProblem::new(&m, 0.0, 4).is_err());
        assert!(BlochProblem::new(&m, 1.0, 4).is_err());
        assert!(BlochProblem::new(&m, 0.1, 0).is_err());
        let prob = BlochProblem::new(&m, 0.1, 4).unwrap();
        assert!(matches!(prob.operator(&[0.5]), Err(Error::OutOfZone(_))));
        assert!(prob.operator(&[0.0, 0.0]).is_err());
        assert!(prob.first_eigenpair(&[0.0], 0.0).is_err());
    }

    #[test]
    fn phase_convention() {
        let mut v = vec![Complex::new(0.0, 0.0), Complex::new(0.0, 2.0), Complex::new(1.0, 1.0)];
        assert_eq!(normalize_phase(&mut v, 0), 1);
        assert!(v[1].im == 0.0 && v[1].re > 0.0);
        assert!((norm(&v) - 1.0f64).abs() < 1e-15);
        let mut w = vec![Complex::new(0.0, -3.0), Complex::new(1.0, 0.0)];
        assert_eq!(normalize_phase(&mut w, 0), 0);
        assert!(w[0].re > 0.0 && w[0].im == 0.0);
    }

    #[test]
    fn f32_eigenpair_smoke() {
        let a = QPMatrix::scalar(TrigSum::<f32>::from_cos_sin(1, &[(vec![0.0], 2.0, 0.0), (vec![1.0], 1.0, 0.0)]).unwrap());
        let m = LiftedMedium::new(&a, WindingMap::identity(1)).unwrap();
        let prob = BlochProblem::new(&m, 1e-2, 8).unwrap();
        let p = prob.first_eigenpair(&[0.1], default_tol()).unwrap();
        assert!((p.lambda - 1.732 * 0.01).abs() < 2e-3, "{}", p.lambda);
    }
}
