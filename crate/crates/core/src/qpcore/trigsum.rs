use std::cmp::Ordering;

use num_complex::Complex;

use crate::{Error, Real, Result};

/// Absolute tolerance under which two frequencies are the same frequency.
pub const FREQ_TOL: f64 = 1e-9;

pub(crate) fn freq_tol<T: Real>() -> T {
    T::of(FREQ_TOL).max(T::of(16.0) * T::epsilon())
}

pub(crate) fn same_freq<T: Real>(a: &[T], b: &[T]) -> bool {
    let tol = freq_tol::<T>();
    a.iter().zip(b).all(|(x, y)| (*x - *y).abs() <= tol)
}

pub(crate) fn is_zero_freq<T: Real>(a: &[T]) -> bool {
    let tol = freq_tol::<T>();
    a.iter().all(|x| x.abs() <= tol)
}

fn cmp_freq<T: Real>(a: &[T], b: &[T]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

/// One exponential `c · e^{i ξ·x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term<T> {
    pub freq: Vec<T>,
    pub amp: Complex<T>,
}

/// Finite trigonometric sum `Σ c_ξ e^{i ξ·x}` on `ℝ^d`.
///
/// Terms are kept sorted by frequency with duplicates merged. Values built
/// through [`TrigSum::new`] or [`TrigSum::from_cos_sin`] are real-valued:
/// every `(ξ, c)` is matched by `(-ξ, c̄)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigSum<T> {
    dim: usize,
    terms: Vec<Term<T>>,
}

impl<T: Real> TrigSum<T> {
    /// Builds a sum and checks Hermitian symmetry.
    pub fn new(dim: usize, terms: Vec<(Vec<T>, Complex<T>)>) -> Result<Self> {
        let s = Self::raw(dim, terms)?;
        s.check_hermitian()?;
        Ok(s)
    }

    /// Merges duplicate frequencies but skips the symmetry check.
    pub fn raw(dim: usize, terms: Vec<(Vec<T>, Complex<T>)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::MalformedInput("dimension must be positive".into()));
        }
        let mut merged: Vec<Term<T>> = Vec::with_capacity(terms.len());
        for (freq, amp) in terms {
            if freq.len() != dim {
                return Err(Error::MalformedInput(format!(
                    "frequency {freq:?} has length {} but dimension is {dim}",
                    freq.len()
                )));
            }
            if freq.iter().any(|x| !x.is_finite()) || !amp.re.is_finite() || !amp.im.is_finite() {
                return Err(Error::MalformedInput("non-finite term".into()));
            }
            match merged.iter_mut().find(|t| same_freq(&t.freq, &freq)) {
                Some(t) => t.amp += amp,
                None => merged.push(Term { freq, amp }),
            }
        }
        merged.retain(|t| t.amp != Complex::new(T::zero(), T::zero()));
        merged.sort_by(|a, b| cmp_freq(&a.freq, &b.freq));
        Ok(Self { dim, terms: merged })
    }

    /// `Σ a cos(ξ·x) + b sin(ξ·x)` from `(ξ, a, b)` triples.
    pub fn from_cos_sin(dim: usize, parts: &[(Vec<T>, T, T)]) -> Result<Self> {
        let half = T::of(0.5);
        let mut terms = Vec::with_capacity(2 * parts.len());
        for (xi, a, b) in parts {
            if is_zero_freq(xi) {
                terms.push((vec![T::zero(); xi.len()], Complex::new(*a, T::zero())));
            } else {
                terms.push((xi.clone(), Complex::new(*a * half, -*b * half)));
                terms.push((xi.iter().map(|v| -*v).collect(), Complex::new(*a * half, *b * half)));
            }
        }
        Self::new(dim, terms)
    }

    pub fn constant(dim: usize, c: T) -> Self {
        Self::raw(dim, vec![(vec![T::zero(); dim], Complex::new(c, T::zero()))])
            .expect("constant is well formed")
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term<T>] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Amplitude at `xi`, zero if absent.
    pub fn amplitude(&self, xi: &[T]) -> Complex<T> {
        self.terms
            .iter()
            .find(|t| same_freq(&t.freq, xi))
            .map_or(Complex::new(T::zero(), T::zero()), |t| t.amp)
    }

    pub fn frequencies(&self) -> impl Iterator<Item = &[T]> {
        self.terms.iter().map(|t| t.freq.as_slice())
    }

    pub fn check_hermitian(&self) -> Result<()> {
        for t in &self.terms {
            let neg: Vec<T> = t.freq.iter().map(|v| -*v).collect();
            let partner = self.amplitude(&neg);
            let tol = T::of(1e-12) * (T::one() + t.amp.norm());
            if (partner - t.amp.conj()).norm() > tol {
                return Err(Error::MalformedInput(format!(
                    "term at frequency {:?} has no conjugate partner at the negated frequency",
                    t.freq
                )));
            }
        }
        Ok(())
    }

    /// Complex value of the sum at `x`.
    pub fn eval(&self, x: &[T]) -> Complex<T> {
        assert_eq!(x.len(), self.dim);
        self.terms.iter().fold(Complex::new(T::zero(), T::zero()), |acc, t| {
            let phase: T = t.freq.iter().zip(x).map(|(a, b)| *a * *b).sum();
            acc + t.amp * Complex::new(phase.cos(), phase.sin())
        })
    }

    /// Real value at `x`.
    pub fn value(&self, x: &[T]) -> T {
        self.eval(x).re
    }

    /// Mean value: the amplitude at frequency zero.
    pub fn mean(&self) -> Result<T> {
        let c = self.amplitude(&vec![T::zero(); self.dim]);
        if c.im.abs() > T::of(1e-12) * (T::one() + c.norm()) {
            return Err(Error::MalformedInput(format!(
                "zero-frequency amplitude {c} is not real"
            )));
        }
        Ok(c.re)
    }

    /// `Σ |c_ξ|`, a bound on `sup |f|`.
    pub fn l1_norm(&self) -> T {
        self.terms.iter().map(|t| t.amp.norm()).sum()
    }

    /// Same sum up to the frequency tolerance and amplitude tolerance `tol`.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.dim == other.dim
            && self.terms.iter().all(|t| (other.amplitude(&t.freq) - t.amp).norm() <= tol)
            && other.terms.iter().all(|t| (self.amplitude(&t.freq) - t.amp).norm() <= tol)
    }
}
