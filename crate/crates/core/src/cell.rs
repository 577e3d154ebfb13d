//! Regularized lifted cell problems
//!
//! ```text
//! -D·B Dψ_l - δΔψ_l = D·B e_l   on [0, 2π)^M,   ψ_l zero-mean,
//! ```
//!
//! and the mean-flux tensor `q_kl = ⟨b_kl + e_k·B Dψ_l⟩`.
//!
//! The Galerkin system lives on the nonzero modes of the lattice (deleting
//! `n = 0` fixes the constant), with entries `(Λᵀm)·B̂(m−n)(Λᵀn) + δ|n|²[m=n]`
//! and right side `i(Λᵀm)·B̂(m)e_l`.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{dot, norm, BandCholesky, BandedHermitian};
use crate::qpcore::{LiftedMedium, WindingMap};
use crate::spectral::{galerkin, ModeLattice};
use crate::tensor::{EffectiveTensor, Route, TensorDiagnostics};
use crate::{Error, Real, Result};

/// Tolerance of discretization-level identities (symmetry of `q`, solve
/// residuals).
pub const DISC_TOL: f64 = 1e-8;

/// [`DISC_TOL`], loosened to `1e3 ε_mach` in low precision.
pub fn disc_tol<T: Real>() -> T {
    T::of(DISC_TOL).max(T::of(1e3) * T::epsilon())
}

/// Factored Galerkin system of the cell problem for one `(δ, N)`.
#[derive(Debug, Clone)]
pub struct CellProblem<'a, T> {
    medium: &'a LiftedMedium<T>,
    delta: T,
    lattice: ModeLattice,
    /// Lattice indices of the nonzero modes, in order.
    kept: Vec<usize>,
    matrix: BandedHermitian<T>,
    chol: BandCholesky<T>,
}

impl<'a, T: Real> CellProblem<'a, T> {
    pub fn new(medium: &'a LiftedMedium<T>, delta: T, n: usize) -> Result<Self> {
        if !(delta > T::zero() && delta < T::one()) {
            return Err(Error::InvalidArgument(format!("delta = {delta} must lie in (0, 1)")));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("truncation radius must be positive".into()));
        }
        let lattice = ModeLattice::new(medium.m(), n);
        let zero = lattice.zero_index();
        let kept: Vec<usize> = (0..lattice.len()).filter(|&i| i != zero).collect();
        let w = medium.winding();
        let kvec: Vec<Vec<T>> = kept.iter().map(|&i| w.frequency(&lattice.mode(i))).collect();
        let matrix = galerkin(medium.bhat(), &lattice, &kept, &kvec, delta)?;
        let chol = matrix
            .cholesky(T::zero())
            .map_err(|e| Error::SolverFailure(format!("cell system is singular: {e}")))?;
        Ok(Self { medium, delta, lattice, kept, matrix, chol })
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn lattice(&self) -> &ModeLattice {
        &self.lattice
    }

    /// Right side `i(Λᵀm)·B̂(m)e_l` on the nonzero modes.
    fn rhs(&self, l: usize) -> Vec<Complex<T>> {
        let d = self.medium.d();
        let w = self.medium.winding();
        let b = self.medium.bhat();
        self.kept
            .iter()
            .map(|&i| {
                let mode = self.lattice.mode(i);
                let f = w.frequency(&mode);
                let s = (0..d).fold(Complex::new(T::zero(), T::zero()), |acc, k| acc + b.entry(&mode, k, l) * f[k]);
                Complex::new(-s.im, s.re)
            })
            .collect()
    }

    /// Corrector for direction `l` (zero-based).
    pub fn solve(&self, l: usize) -> Result<Corrector<T>> {
        let d = self.medium.d();
        if l >= d {
            return Err(Error::InvalidArgument(format!("direction {l} out of range for d = {d}")));
        }
        let rhs = self.rhs(l);
        let x = self.chol.solve(&rhs);
        let gx = self.matrix.matvec(&x);
        let res: Vec<Complex<T>> = gx.iter().zip(&rhs).map(|(a, b)| a - b).collect();
        let scale = norm(&rhs);
        let residual = if scale > T::zero() { norm(&res) / scale } else { norm(&res) };
        if !(residual <= disc_tol::<T>()) {
            return Err(Error::SolverFailure(format!("cell solve residual {residual} too large")));
        }

        let w = self.medium.winding();
        let mut d_norm2 = T::zero();
        let mut grad_energy = T::zero();
        for (&i, c) in self.kept.iter().zip(&x) {
            let mode = self.lattice.mode(i);
            let f = w.frequency(&mode);
            let f2: T = f.iter().map(|v| *v * *v).sum();
            let n2: i64 = mode.iter().map(|v| v * v).sum();
            d_norm2 += f2 * c.norm_sqr();
            grad_energy += self.delta * T::of_i64(n2) * c.norm_sqr();
        }
        let total = dot(&x, &gx).re;
        let energy = CorrectorEnergy {
            d_norm2,
            grad_energy,
            b_energy: total - grad_energy,
            work: dot(&x, &rhs).re,
        };
        let bound = self.medium.a_priori_bound();
        if energy.d_norm2 + energy.grad_energy > bound * (T::one() + disc_tol::<T>()) {
            return Err(Error::InternalConsistency(format!(
                "corrector energy {} exceeds the a-priori bound {bound}",
                energy.d_norm2 + energy.grad_energy
            )));
        }

        let mut psi = vec![Complex::new(T::zero(), T::zero()); self.lattice.len()];
        for (&i, c) in self.kept.iter().zip(x) {
            psi[i] = c;
        }
        Ok(Corrector { l, delta: self.delta, lattice: self.lattice, psi, energy, residual, rhs })
    }

    /// All `d` correctors.
    pub fn solve_all(&self) -> Result<Vec<Corrector<T>>> {
        (0..self.medium.d()).into_par_iter().map(|l| self.solve(l)).collect()
    }

    /// Mean-flux tensor from the correctors of this problem.
    pub fn tensor(&self) -> Result<EffectiveTensor<T>> {
        tensor_from_cell(&self.solve_all()?, self.medium)
    }
}

/// Energy record of a corrector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectorEnergy<T> {
    /// `‖Dψ‖²`.
    pub d_norm2: T,
    /// `δ‖∇ψ‖²`.
    pub grad_energy: T,
    /// `⟨B Dψ, Dψ⟩`.
    pub b_energy: T,
    /// `(ψ, rhs)`; equals `b_energy + grad_energy` for an exact solve.
    pub work: T,
}

/// Solution `ψ_l^δ` of a cell problem.
#[derive(Debug, Clone)]
pub struct Corrector<T> {
    /// Zero-based direction index.
    pub l: usize,
    pub delta: T,
    pub lattice: ModeLattice,
    /// Coefficients over the full lattice; the zero mode is exactly 0.
    pub psi: Vec<Complex<T>>,
    pub energy: CorrectorEnergy<T>,
    /// Relative residual of the linear solve.
    pub residual: T,
    rhs: Vec<Complex<T>>,
}

impl<T: Real> Corrector<T> {
    /// `Σ |ψ̂(n)|`, a bound on `sup |ψ|`.
    pub fn l1_norm(&self) -> T {
        self.psi.iter().map(|c| c.norm()).sum()
    }

    pub fn l2_norm(&self) -> T {
        norm(&self.psi)
    }

    /// Coefficients on the nonzero modes, in lattice order.
    fn reduced(&self) -> impl Iterator<Item = &Complex<T>> {
        let z = self.lattice.zero_index();
        self.psi.iter().enumerate().filter(move |(i, _)| *i != z).map(|(_, c)| c)
    }
}

/// `N^l(x) = ψ_l(Λx)`, the corrector along the winding plane.
pub fn evaluate_corrector<T: Real>(c: &Corrector<T>, w: &WindingMap<T>, x: &[T]) -> T {
    let y = w.apply(x);
    c.psi
        .iter()
        .enumerate()
        .filter(|(_, v)| v.norm_sqr() > T::zero())
        .map(|(i, v)| {
            let phase: T = c.lattice.mode(i).iter().zip(&y).map(|(a, b)| T::of_i64(*a) * *b).sum();
            (*v * Complex::new(phase.cos(), phase.sin())).re
        })
        .sum()
}

/// `q_kl = b̂_kl(0) + Σ_n (B̂(−n)e_k)·(iΛᵀn ψ̂_l(n))`, symmetrized; the
/// asymmetry before symmetrization is recorded.
pub fn tensor_from_cell<T: Real>(correctors: &[Corrector<T>], medium: &LiftedMedium<T>) -> Result<EffectiveTensor<T>> {
    let d = medium.d();
    if correctors.len() != d {
        return Err(Error::InvalidArgument(format!("expected {d} correctors, got {}", correctors.len())));
    }
    let (delta, lattice) = (correctors[0].delta, correctors[0].lattice);
    if correctors.iter().any(|c| c.delta != delta || c.lattice != lattice) {
        return Err(Error::InvalidArgument("correctors do not share (delta, N)".into()));
    }
    let mut order: Vec<&Corrector<T>> = correctors.iter().collect();
    order.sort_by_key(|c| c.l);
    if order.iter().enumerate().any(|(i, c)| c.l != i) {
        return Err(Error::InvalidArgument("correctors must cover every direction once".into()));
    }
    let mean = medium.mean();
    let mut raw = vec![Complex::new(T::zero(), T::zero()); d * d];
    for k in 0..d {
        for l in 0..d {
            // Σ (B̂(−n)e_k)·(iΛᵀn ψ̂_l(n)) = −rhs_kᴴ ψ_l
            let s = order[k].rhs.iter().zip(order[l].reduced()).fold(
                Complex::new(T::zero(), T::zero()),
                |acc, (r, p)| acc + r.conj() * p,
            );
            raw[k * d + l] = Complex::new(mean[k * d + l], T::zero()) - s;
        }
    }
    let mut asym = T::zero();
    let mut q = vec![T::zero(); d * d];
    for k in 0..d {
        for l in 0..d {
            asym = asym.max((raw[k * d + l] - raw[l * d + k]).norm()).max(raw[k * d + l].im.abs());
            q[k * d + l] = T::of(0.5) * (raw[k * d + l].re + raw[l * d + k].re);
        }
    }
    let scale = T::one() + q.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    if asym > T::of(10.0) * disc_tol::<T>() * scale {
        return Err(Error::InternalConsistency(format!("cell tensor asymmetry {asym} exceeds tolerance")));
    }
    Ok(EffectiveTensor::new(
        d,
        q,
        Route::Cell,
        delta,
        lattice.radius(),
        TensorDiagnostics { asymmetry: Some(asym), ..Default::default() },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpcore::{QPMatrix, TrigSum};

    fn scalar_medium(parts: &[(Vec<f64>, f64, f64)], rows: Vec<Vec<f64>>) -> LiftedMedium<f64> {
        let a = QPMatrix::scalar(TrigSum::from_cos_sin(1, parts).unwrap());
        LiftedMedium::new(&a, WindingMap::new(rows).unwrap()).unwrap()
    }

    fn periodic_cos() -> LiftedMedium<f64> {
        scalar_medium(&[(vec![0.0], 2.0, 0.0), (vec![1.0], 1.0, 0.0)], vec![vec![1.0]])
    }

    fn qp() -> LiftedMedium<f64> {
        let r2 = 2f64.sqrt();
        scalar_medium(
            &[(vec![0.0], 3.0, 0.0), (vec![1.0], 0.0, 1.0), (vec![r2], 0.0, 1.0)],
            vec![vec![1.0], vec![r2]],
        )
    }

    #[test]
    fn constant_medium_has_zero_corrector() {
        let m = scalar_medium(&[(vec![0.0], 2.5, 0.0)], vec![vec![1.0], vec![2f64.sqrt()]]);
        let cp = CellProblem::new(&m, 1e-2, 6).unwrap();
        let c = cp.solve(0).unwrap();
        assert_eq!(c.l2_norm(), 0.0);
        let q = cp.tensor().unwrap();
        assert_eq!(q.get(0, 0), 2.5);
        assert_eq!(evaluate_corrector(&c, m.winding(), &[1.3]), 0.0);
    }

    #[test]
    fn periodic_flux_is_harmonic_mean() {
        let m = periodic_cos();
        let cp = CellProblem::new(&m, 1e-6, 24).unwrap();
        let c = cp.solve(0).unwrap();
        // flux b(1 + ψ') is nearly constant and equal to √3
        let w = m.winding();
        for &x in &[0.0, 0.9, 2.0, 4.4] {
            let mut dpsi = 0.0;
            for (i, v) in c.psi.iter().enumerate() {
                let n = c.lattice.mode(i)[0] as f64;
                dpsi += (v * Complex::new(0.0, n) * Complex::new(0.0, n * x).exp()).re;
            }
            let flux = (2.0 + x.cos()) * (1.0 + dpsi);
            assert!((flux - 3f64.sqrt()).abs() < 1e-4, "{flux}");
        }
        let q = cp.tensor().unwrap();
        assert!((q.get(0, 0) - 3f64.sqrt()).abs() < 1e-5);
        // ψ is 2π-periodic along x
        let v0 = evaluate_corrector(&c, w, &[0.3]);
        let v1 = evaluate_corrector(&c, w, &[0.3 + 2.0 * std::f64::consts::PI]);
        assert!((v0 - v1).abs() < 1e-12);
    }

    #[test]
    fn qp_energy_record() {
        let m = qp();
        let cp = CellProblem::new(&m, 1e-3, 12).unwrap();
        let c = cp.solve(0).unwrap();
        let e = c.energy;
        assert!((e.b_energy + e.grad_energy - e.work).abs() < 1e-10 * (1.0 + e.work));
        assert!(e.d_norm2 + e.grad_energy <= m.a_priori_bound());
        assert_eq!(c.psi[c.lattice.zero_index()], Complex::new(0.0, 0.0));
        let q = cp.tensor().unwrap();
        assert!(q.get(0, 0) <= 3.0);
        assert!(q.get(0, 0) >= m.alpha());
        // bounded by the ℓ¹ norm of the coefficients
        let bound = c.l1_norm();
        for x in [0.0, 10.0, 123.4, -55.0] {
            assert!(evaluate_corrector(&c, m.winding(), &[x]).abs() <= bound);
        }
    }

    #[test]
    fn decoupled_two_dimensional() {
        let parts = |axis: usize| {
            let mut f = vec![0.0, 0.0];
            f[axis] = 1.0;
            TrigSum::from_cos_sin(2, &[(vec![0.0, 0.0], 2.0, 0.0), (f, 1.0, 0.0)]).unwrap()
        };
        let a = QPMatrix::new(2, vec![vec![parts(0), TrigSum::zero(2)], vec![TrigSum::zero(2), parts(1)]]).unwrap();
        let m = LiftedMedium::new(&a, WindingMap::identity(2)).unwrap();
        let q = CellProblem::new(&m, 1e-6, 12).unwrap().tensor().unwrap();
        assert!((q.get(0, 0) - 3f64.sqrt()).abs() < 1e-5);
        assert!((q.get(1, 1) - 3f64.sqrt()).abs() < 1e-5);
        assert!(q.get(0, 1).abs() < 1e-12);
        assert!(q.diagnostics.asymmetry.unwrap() < 1e-12);
    }

    #[test]
    fn rejects_bad_arguments() {
        let m = periodic_cos();
        assert!(CellProblem::new(&m, 0.0, 4).is_err());
        assert!(CellProblem::new(&m, 0.1, 0).is_err());
        let cp = CellProblem::new(&m, 0.1, 4).unwrap();
        assert!(cp.solve(1).is_err());
        assert!(tensor_from_cell(&[], &m).is_err());
        let c = cp.solve(0).unwrap();
        assert!(tensor_from_cell(&[c.clone(), c], &m).is_err());
    }
}
