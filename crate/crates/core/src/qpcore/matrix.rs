use num_complex::Complex;

use super::trigsum::{same_freq, TrigSum};
use crate::linalg::hermitian_eigen;
use crate::{Error, Real, Result};

/// Symmetric matrix of trigonometric sums on `ℝ^dim`.
///
/// For a PDE coefficient `size == dim`; other sizes are accepted so that
/// arbitrary quasiperiodic matrices can be lifted.
#[derive(Debug, Clone, PartialEq)]
pub struct QPMatrix<T> {
    dim: usize,
    size: usize,
    entries: Vec<TrigSum<T>>,
}

impl<T: Real> QPMatrix<T> {
    /// Builds a matrix from rows of entries; checks squareness, dimension and
    /// symmetry.
    pub fn new(dim: usize, rows: Vec<Vec<TrigSum<T>>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::MalformedInput("empty coefficient matrix".into()));
        }
        let mut entries = Vec::with_capacity(size * size);
        for row in rows {
            if row.len() != size {
                return Err(Error::MalformedInput("coefficient matrix is not square".into()));
            }
            for e in row {
                if e.dim() != dim {
                    return Err(Error::MalformedInput(format!(
                        "entry has dimension {} but the matrix has dimension {dim}",
                        e.dim()
                    )));
                }
                e.check_hermitian()?;
                entries.push(e);
            }
        }
        let m = Self { dim, size, entries };
        for k in 0..size {
            for l in 0..k {
                if !m.entry(k, l).approx_eq(m.entry(l, k), T::of(1e-12)) {
                    return Err(Error::MalformedInput(format!("entries ({k},{l}) and ({l},{k}) differ")));
                }
            }
        }
        Ok(m)
    }

    /// Builds a matrix from its upper triangle; absent entries are zero.
    pub fn from_upper(dim: usize, size: usize, upper: Vec<((usize, usize), TrigSum<T>)>) -> Result<Self> {
        let mut rows = vec![vec![TrigSum::zero(dim); size]; size];
        let mut seen = vec![false; size * size];
        for ((k, l), e) in upper {
            let (k, l) = (k.min(l), k.max(l));
            if l >= size {
                return Err(Error::MalformedInput(format!("entry ({k},{l}) outside a {size}x{size} matrix")));
            }
            if std::mem::replace(&mut seen[k * size + l], true) {
                return Err(Error::MalformedInput(format!("entry ({k},{l}) given twice")));
            }
            rows[l][k] = e.clone();
            rows[k][l] = e;
        }
        Self::new(dim, rows)
    }

    /// `a(x) I` for a scalar coefficient on `ℝ^dim`.
    pub fn scalar(a: TrigSum<T>) -> Self {
        let dim = a.dim();
        let mut entries = vec![TrigSum::zero(dim); dim * dim];
        for k in 0..dim {
            entries[k * dim + k] = a.clone();
        }
        Self { dim, size: dim, entries }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(TrigSum::constant(dim, T::one()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entry(&self, k: usize, l: usize) -> &TrigSum<T> {
        &self.entries[k * self.size + l]
    }

    /// Real matrix `A(x)`, row-major.
    pub fn eval(&self, x: &[T]) -> Vec<T> {
        self.entries.iter().map(|e| e.value(x)).collect()
    }

    pub fn mean(&self) -> Result<Vec<T>> {
        self.entries.iter().map(TrigSum::mean).collect()
    }

    /// Distinct frequencies over all entries, in first-seen order.
    pub fn frequencies(&self) -> Vec<Vec<T>> {
        let mut out: Vec<Vec<T>> = Vec::new();
        for e in &self.entries {
            for f in e.frequencies() {
                if !out.iter().any(|g| same_freq(g, f)) {
                    out.push(f.to_vec());
                }
            }
        }
        out
    }

    /// Smallest eigenvalue of `A(x)`.
    pub fn min_eigenvalue(&self, x: &[T]) -> T {
        min_sym_eigenvalue(&self.eval(x), self.size)
    }
}

/// Smallest eigenvalue of a small real symmetric matrix (row-major).
pub(crate) fn min_sym_eigenvalue<T: Real>(a: &[T], n: usize) -> T {
    match n {
        1 => a[0],
        2 => {
            let (p, q, r) = (a[0], T::of(0.5) * (a[1] + a[2]), a[3]);
            let mid = T::of(0.5) * (p + r);
            let rad = (T::of(0.25) * (p - r) * (p - r) + q * q).sqrt();
            mid - rad
        }
        _ => {
            let c: Vec<Complex<T>> = a.iter().map(|&v| Complex::new(v, T::zero())).collect();
            hermitian_eigen(&c, n).0[0]
        }
    }
}
