use std::collections::BTreeMap;

use num_complex::Complex;
use rayon::prelude::*;

use super::matrix::{min_sym_eigenvalue, QPMatrix};
use super::trigsum::FREQ_TOL;
use super::winding::WindingMap;
use crate::{Error, Real, Result};

/// Search bound on free lattice coordinates when matching frequencies to
/// `Λᵀn` during a lift.
pub const LIFT_SEARCH_BOUND: i64 = 64;

/// Sparse Fourier coefficients of a periodic `rows × cols` matrix field on
/// the torus `[0, 2π)^M`; the scalar variant has `rows = cols = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField<T> {
    m: usize,
    rows: usize,
    cols: usize,
    coeffs: BTreeMap<Vec<i64>, Vec<Complex<T>>>,
}

impl<T: Real> FourierField<T> {
    /// Builds a field and checks `ĉ(-n) = conj ĉ(n)` (a real field) and,
    /// for square fields, entrywise symmetry.
    pub fn new(m: usize, rows: usize, cols: usize, coeffs: BTreeMap<Vec<i64>, Vec<Complex<T>>>) -> Result<Self> {
        for (n, c) in &coeffs {
            if n.len() != m || c.len() != rows * cols {
                return Err(Error::MalformedInput(format!("coefficient at {n:?} has the wrong shape")));
            }
        }
        let f = Self { m, rows, cols, coeffs };
        f.check_real(T::of(1e-12))?;
        Ok(f)
    }

    pub fn scalar(m: usize, coeffs: BTreeMap<Vec<i64>, Complex<T>>) -> Result<Self> {
        Self::new(m, 1, 1, coeffs.into_iter().map(|(n, c)| (n, vec![c])).collect())
    }

    /// Constant `c I` of size `size` on the `M`-torus.
    pub fn constant_identity(m: usize, size: usize, c: T) -> Self {
        let mut v = vec![Complex::new(T::zero(), T::zero()); size * size];
        for k in 0..size {
            v[k * size + k] = Complex::new(c, T::zero());
        }
        let mut coeffs = BTreeMap::new();
        coeffs.insert(vec![0; m], v);
        Self { m, rows: size, cols: size, coeffs }
    }

    fn check_real(&self, tol: T) -> Result<()> {
        let zero = Complex::new(T::zero(), T::zero());
        for (n, c) in &self.coeffs {
            let neg: Vec<i64> = n.iter().map(|v| -v).collect();
            let partner = self.coeffs.get(&neg);
            for (i, ci) in c.iter().enumerate() {
                let pi = partner.map_or(zero, |p| p[i]);
                if (pi - ci.conj()).norm() > tol * (T::one() + ci.norm()) {
                    return Err(Error::InternalConsistency(format!("field is not real at mode {n:?}")));
                }
            }
            if self.rows == self.cols {
                let s = self.rows;
                for k in 0..s {
                    for l in 0..k {
                        if (c[k * s + l] - c[l * s + k]).norm() > tol * (T::one() + c[k * s + l].norm()) {
                            return Err(Error::InternalConsistency(format!("field is not symmetric at mode {n:?}")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Torus dimension `M`.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Coefficient at mode `n`, if stored.
    pub fn get(&self, n: &[i64]) -> Option<&[Complex<T>]> {
        self.coeffs.get(n).map(Vec::as_slice)
    }

    pub fn entry(&self, n: &[i64], k: usize, l: usize) -> Complex<T> {
        self.get(n).map_or(Complex::new(T::zero(), T::zero()), |c| c[k * self.cols + l])
    }

    /// Stored modes and coefficients in lexicographic mode order.
    pub fn iter(&self) -> impl Iterator<Item = (&[i64], &[Complex<T>])> {
        self.coeffs.iter().map(|(n, c)| (n.as_slice(), c.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest `‖n‖∞` over stored modes.
    pub fn radius(&self) -> usize {
        self.coeffs.keys().flatten().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// Mean over the torus: the coefficient at `n = 0`.
    pub fn mean(&self) -> Vec<T> {
        let zero = vec![0; self.m];
        match self.coeffs.get(&zero) {
            Some(c) => c.iter().map(|v| v.re).collect(),
            None => vec![T::zero(); self.rows * self.cols],
        }
    }

    /// `Σ_n ‖ĉ(n)‖_F`, which bounds `sup_y ‖c(y)‖₂`.
    pub fn sup_bound(&self) -> T {
        self.coeffs
            .values()
            .map(|c| c.iter().map(|v| v.norm_sqr()).sum::<T>().sqrt())
            .sum()
    }

    /// `Σ_n ĉ(n) e^{i n·y}`.
    pub fn eval(&self, y: &[T]) -> Vec<Complex<T>> {
        assert_eq!(y.len(), self.m);
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.rows * self.cols];
        for (n, c) in &self.coeffs {
            let phase: T = n.iter().zip(y).map(|(a, b)| T::of_i64(*a) * *b).sum();
            let e = Complex::new(phase.cos(), phase.sin());
            for (o, ci) in out.iter_mut().zip(c) {
                *o += ci * e;
            }
        }
        out
    }

    /// Restriction to the winding plane: the field at `y = Λx`.
    pub fn restrict(&self, w: &WindingMap<T>, x: &[T]) -> Vec<Complex<T>> {
        self.eval(&w.apply(x))
    }
}

/// Lifts `A` to the torus: `B̂(n)_{kl}` is the amplitude of `a_{kl}` at
/// frequency `Λᵀn`.
pub fn lift<T: Real>(a: &QPMatrix<T>, w: &WindingMap<T>) -> Result<FourierField<T>> {
    if a.dim() != w.d() {
        return Err(Error::LiftMismatch(format!(
            "coefficient dimension {} differs from winding dimension {}",
            a.dim(),
            w.d()
        )));
    }
    let s = a.size();
    let zero = Complex::new(T::zero(), T::zero());
    let mut coeffs: BTreeMap<Vec<i64>, Vec<Complex<T>>> = BTreeMap::new();
    for k in 0..s {
        for l in 0..s {
            for t in a.entry(k, l).terms() {
                let n = w.represent(&t.freq, LIFT_SEARCH_BOUND, FREQ_TOL).ok_or_else(|| {
                    Error::LiftMismatch(format!("frequency {:?} is not in the module of Λ", t.freq))
                })?;
                coeffs.entry(n).or_insert_with(|| vec![zero; s * s])[k * s + l] += t.amp;
            }
        }
    }
    if coeffs.is_empty() {
        coeffs.insert(vec![0; w.m()], vec![zero; s * s]);
    }
    FourierField::new(w.m(), s, s, coeffs)
}

/// Grid points per torus axis used for the coercivity bound.
pub fn torus_grid_points(m: usize) -> usize {
    if m <= 3 {
        64
    } else {
        16
    }
}

/// Minimum over a uniform torus grid of the smallest eigenvalue of `B(y)`.
pub fn torus_coercivity<T: Real>(b: &FourierField<T>) -> T {
    let (s, _) = b.shape();
    let m = b.m();
    let g = torus_grid_points(m);
    let total = g.pow(m as u32);
    let step = T::of(2.0) * T::PI() / T::of_usize(g);
    (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut y = vec![T::zero(); m];
            for yj in y.iter_mut() {
                *yj = T::of_usize(idx % g) * step;
                idx /= g;
            }
            let v: Vec<T> = b.eval(&y).iter().map(|c| c.re).collect();
            min_sym_eigenvalue(&v, s)
        })
        .reduce(|| T::max_value(), |a, b| a.min(b))
}

/// Minimum of the smallest eigenvalue of `A(x)` over quasirandom points in
/// a box of side proportional to `samples^{1/d}`.
///
/// `seed` offsets the low-discrepancy sequence. Fails with a coercivity
/// violation if the estimate is not positive.
pub fn coercivity_estimate<T: Real>(a: &QPMatrix<T>, samples: usize, seed: u64) -> Result<T> {
    if samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    let d = a.dim();
    // R_d sequence: powers of the inverse of the unique positive root of x^{d+1} = x + 1
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    let alphas: Vec<f64> = (1..=d).map(|k| phi.powi(-(k as i32)).fract()).collect();
    let periods = ((samples as f64).powf(1.0 / d as f64) / 16.0).ceil().max(1.0);
    let side = 2.0 * std::f64::consts::PI * periods;
    let start = seed.wrapping_mul(0x9E37_79B9) % 1_000_003;
    let est = (0..samples)
        .into_par_iter()
        .map(|i| {
            let k = (start + i as u64 + 1) as f64;
            let x: Vec<T> = alphas.iter().map(|al| T::of(side * (0.5 + k * al).fract())).collect();
            a.min_eigenvalue(&x)
        })
        .reduce(|| T::max_value(), |a, b| a.min(b));
    if !(est > T::zero()) {
        return Err(Error::CoercivityViolation { estimate: est.as_f64() });
    }
    Ok(est)
}

/// A coercive PDE coefficient lifted to the torus, with the constants the
/// solvers need.
#[derive(Debug, Clone)]
pub struct LiftedMedium<T> {
    bhat: FourierField<T>,
    winding: WindingMap<T>,
    alpha: T,
    sup_bound: T,
}

impl<T: Real> LiftedMedium<T> {
    /// Lifts `a`, checks coercivity on the torus grid and that `a` is a
    /// `d × d` coefficient.
    pub fn new(a: &QPMatrix<T>, winding: WindingMap<T>) -> Result<Self> {
        let bhat = lift(a, &winding)?;
        Self::from_field(bhat, winding)
    }

    pub fn from_field(bhat: FourierField<T>, winding: WindingMap<T>) -> Result<Self> {
        if bhat.m() != winding.m() {
            return Err(Error::LiftMismatch(format!(
                "field lives on a {}-torus but Λ has {} rows",
                bhat.m(),
                winding.m()
            )));
        }
        let alpha = torus_coercivity(&bhat);
        if !(alpha > T::zero()) {
            return Err(Error::CoercivityViolation { estimate: alpha.as_f64() });
        }
        if bhat.shape() != (winding.d(), winding.d()) {
            return Err(Error::InvalidArgument(format!(
                "a {}x{} coefficient cannot drive a {}-dimensional operator",
                bhat.shape().0,
                bhat.shape().1,
                winding.d()
            )));
        }
        let sup_bound = bhat.sup_bound();
        Ok(Self { bhat, winding, alpha, sup_bound })
    }

    pub fn bhat(&self) -> &FourierField<T> {
        &self.bhat
    }

    pub fn winding(&self) -> &WindingMap<T> {
        &self.winding
    }

    /// Physical dimension `d`.
    pub fn d(&self) -> usize {
        self.winding.d()
    }

    /// Torus dimension `M`.
    pub fn m(&self) -> usize {
        self.winding.m()
    }

    /// Coercivity constant from the torus grid.
    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// `Σ_n ‖B̂(n)‖_F ≥ sup_y ‖B(y)‖`.
    pub fn sup_bound(&self) -> T {
        self.sup_bound
    }

    /// Gårding shift `C_* = sup_bound · (d + 1)`.
    pub fn garding_shift(&self) -> T {
        self.sup_bound * T::of_usize(self.d() + 1)
    }

    /// Bound on `‖Dψ‖² + δ‖∇ψ‖²` for every cell corrector:
    /// `(S/α)² + S²/α` with `S` the sup bound.
    pub fn a_priori_bound(&self) -> T {
        let s = self.sup_bound;
        (s / self.alpha).powi(2) + s * s / self.alpha
    }

    /// `b̂_{kl}(0)`.
    pub fn mean(&self) -> Vec<T> {
        self.bhat.mean()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpcore::TrigSum;
    use proptest::prelude::*;

    fn qp_scalar() -> (QPMatrix<f64>, WindingMap<f64>) {
        let r2 = 2f64.sqrt();
        let a = TrigSum::from_cos_sin(
            1,
            &[(vec![0.0], 3.0, 0.0), (vec![1.0], 0.0, 1.0), (vec![r2], 0.0, 1.0)],
        )
        .unwrap();
        (QPMatrix::scalar(a), WindingMap::new(vec![vec![1.0], vec![r2]]).unwrap())
    }

    #[test]
    fn lifts_sines() {
        let (a, w) = qp_scalar();
        let b = lift(&a, &w).unwrap();
        let half_i = Complex::new(0.0, -0.5); // 1/(2i)
        assert_eq!(b.entry(&[0, 0], 0, 0), Complex::new(3.0, 0.0));
        assert!((b.entry(&[1, 0], 0, 0) - half_i).norm() < 1e-15);
        assert!((b.entry(&[0, 1], 0, 0) - half_i).norm() < 1e-15);
        assert!((b.entry(&[-1, 0], 0, 0) + half_i).norm() < 1e-15);
        assert!((b.entry(&[0, -1], 0, 0) + half_i).norm() < 1e-15);
        assert_eq!(b.len(), 5);
        assert_eq!(b.radius(), 1);
        assert_eq!(b.mean(), vec![3.0]);
    }

    #[test]
    fn lifts_constant_identity() {
        let a = QPMatrix::<f64>::identity(2);
        let b = lift(&a, &WindingMap::identity(2)).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.mean(), vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn restrict_embedding() {
        let r2 = 2f64.sqrt();
        let g = TrigSum::from_cos_sin(1, &[(vec![1.0], 0.0, 1.0), (vec![r2], 0.0, 1.0)]).unwrap();
        let w = WindingMap::new(vec![vec![1.0], vec![r2]]).unwrap();
        let b = lift(&QPMatrix::scalar(g), &w).unwrap();
        for &x in &[0.0, 0.3, -2.5, 17.0] {
            let v = b.restrict(&w, &[x])[0];
            assert!((v.re - (x.sin() + (r2 * x).sin())).abs() < 1e-13);
        }
        // b(y1, y2) = sin y1 + sin y2 on the torus
        let y = [0.4, 1.1];
        assert!((b.eval(&y)[0].re - (0.4f64.sin() + 1.1f64.sin())).abs() < 1e-14);
    }

    #[test]
    fn lift_rejects_foreign_frequency() {
        let a = QPMatrix::scalar(TrigSum::from_cos_sin(1, &[(vec![3f64.sqrt()], 1.0, 0.0)]).unwrap());
        let w = WindingMap::new(vec![vec![1.0], vec![2f64.sqrt()]]).unwrap();
        assert!(matches!(lift(&a, &w), Err(Error::LiftMismatch(_))));
        let w2 = WindingMap::<f64>::identity(2);
        assert!(matches!(lift(&a, &w2), Err(Error::LiftMismatch(_))));
    }

    #[test]
    fn rejects_complex_field() {
        let mut c = BTreeMap::new();
        c.insert(vec![1], Complex::new(1.0, 0.0));
        assert!(FourierField::<f64>::scalar(1, c).is_err());
    }

    #[test]
    fn coercivity_values() {
        let (a, w) = qp_scalar();
        let est = coercivity_estimate(&a, 100_000, 0).unwrap();
        assert!(est > 1.0 && est < 1.01, "{est}");
        assert_eq!(coercivity_estimate(&QPMatrix::<f64>::identity(1), 10, 3).unwrap(), 1.0);
        let cos = QPMatrix::scalar(TrigSum::from_cos_sin(1, &[(vec![0.0], 2.0, 0.0), (vec![1.0], 1.0, 0.0)]).unwrap());
        let est = coercivity_estimate(&cos, 10_000, 0).unwrap();
        assert!(est > 1.0 && est < 1.001, "{est}");
        let m = LiftedMedium::new(&a, w).unwrap();
        assert!((m.alpha() - 1.0).abs() < 1e-12, "{}", m.alpha());
    }

    #[test]
    fn coercivity_violation() {
        let bad = QPMatrix::scalar(TrigSum::from_cos_sin(1, &[(vec![0.0], 0.5, 0.0), (vec![1.0], 1.0, 0.0)]).unwrap());
        assert!(matches!(coercivity_estimate(&bad, 1000, 0), Err(Error::CoercivityViolation { .. })));
        let lifted = LiftedMedium::new(&bad, WindingMap::identity(1));
        assert!(matches!(lifted, Err(Error::CoercivityViolation { .. })));
        assert!(coercivity_estimate(&bad, 0, 0).is_err());
    }

    #[test]
    fn medium_constants() {
        let cos = QPMatrix::scalar(TrigSum::from_cos_sin(1, &[(vec![0.0], 2.0, 0.0), (vec![1.0], 1.0, 0.0)]).unwrap());
        let m: LiftedMedium<f64> = LiftedMedium::new(&cos, WindingMap::identity(1)).unwrap();
        assert!((m.sup_bound() - 3.0).abs() < 1e-15);
        assert!((m.garding_shift() - 6.0).abs() < 1e-15);
        let id = LiftedMedium::new(&QPMatrix::<f64>::identity(1), WindingMap::identity(1)).unwrap();
        assert!(id.garding_shift() >= 1.0);
        assert_eq!(id.a_priori_bound(), 2.0);
    }

    proptest! {
        #[test]
        fn round_trip_and_reality(x in -200.0f64..200.0, c in 2.5f64..5.0, s1 in -1.0f64..1.0, c2 in -1.0f64..1.0) {
            let r2 = 2f64.sqrt();
            let f = TrigSum::from_cos_sin(
                1,
                &[(vec![0.0], c, 0.0), (vec![1.0], 0.0, s1), (vec![r2], c2, 0.0), (vec![1.0 + r2], 0.3, -0.2)],
            ).unwrap();
            let w = WindingMap::new(vec![vec![1.0], vec![r2]]).unwrap();
            let a = QPMatrix::scalar(f.clone());
            let b = lift(&a, &w).unwrap();
            let v = b.restrict(&w, &[x])[0];
            let direct = f.value(&[x]);
            prop_assert!((v.re - direct).abs() <= 1e-10 * (1.0 + direct.abs()));
            prop_assert!(v.im.abs() <= 1e-12 * (1.0 + v.norm()));
            prop_assert_eq!(b.mean()[0], f.mean().unwrap());
        }
    }
}
