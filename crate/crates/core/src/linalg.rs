//! Hermitian linear algebra on complex vectors: banded storage, band
//! Cholesky, a dense Jacobi eigensolver and a shift-invert subspace iteration
//! for the lowest eigenpairs of a banded positive semidefinite matrix.

use num_complex::Complex;

use crate::{Error, Real, Result};

pub(crate) fn dot<T: Real>(x: &[Complex<T>], y: &[Complex<T>]) -> Complex<T> {
    x.iter()
        .zip(y)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b)
}

pub(crate) fn norm<T: Real>(x: &[Complex<T>]) -> T {
    x.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt()
}

fn axpy<T: Real>(alpha: Complex<T>, x: &[Complex<T>], y: &mut [Complex<T>]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Hermitian matrix with `kd` sub-diagonals, lower triangle stored row by row.
///
/// Row `i` holds columns `i-kd ..= i` at offsets `kd + j - i`; positions left
/// of column 0 stay zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedHermitian<T> {
    n: usize,
    kd: usize,
    band: Vec<Complex<T>>,
}

impl<T: Real> BandedHermitian<T> {
    pub fn zeros(n: usize, kd: usize) -> Self {
        let kd = kd.min(n.saturating_sub(1));
        Self {
            n,
            kd,
            band: vec![Complex::new(T::zero(), T::zero()); n * (kd + 1)],
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.kd
    }

    #[inline]
    fn pos(&self, i: usize, j: usize) -> usize {
        i * (self.kd + 1) + self.kd + j - i
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        if i >= j {
            if i - j > self.kd {
                Complex::new(T::zero(), T::zero())
            } else {
                self.band[self.pos(i, j)]
            }
        } else {
            self.get(j, i).conj()
        }
    }

    /// Stores entry `(i, j)` with `i >= j`; the upper triangle is implied.
    pub fn set_lower(&mut self, i: usize, j: usize, v: Complex<T>) {
        assert!(i >= j && i - j <= self.kd, "entry ({i}, {j}) outside lower band");
        let p = self.pos(i, j);
        self.band[p] = v;
    }

    pub fn add_diag(&mut self, shift: T) {
        for i in 0..self.n {
            let p = self.pos(i, i);
            self.band[p].re += shift;
        }
    }

    pub fn diag(&self, i: usize) -> T {
        self.band[self.pos(i, i)].re
    }

    pub fn max_abs_diag(&self) -> T {
        (0..self.n).map(|i| self.diag(i).abs()).fold(T::zero(), T::max)
    }

    pub fn matvec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![Complex::new(T::zero(), T::zero()); self.n];
        for i in 0..self.n {
            let j0 = i.saturating_sub(self.kd);
            let row = &self.band[self.pos(i, j0)..=self.pos(i, i)];
            let mut acc = row[i - j0] * x[i];
            for (off, a) in row[..i - j0].iter().enumerate() {
                let j = j0 + off;
                acc += a * x[j];
                y[j] += a.conj() * x[i];
            }
            y[i] += acc;
        }
        y
    }

    /// Full matrix, row-major.
    pub fn to_dense(&self) -> Vec<Complex<T>> {
        let n = self.n;
        let mut a = vec![Complex::new(T::zero(), T::zero()); n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = self.get(i, j);
            }
        }
        a
    }

    /// Factors `A - sigma I = L Lᴴ`. Fails if the shifted matrix is not
    /// numerically positive definite.
    pub fn cholesky(&self, sigma: T) -> Result<BandCholesky<T>> {
        let (n, kd) = (self.n, self.kd);
        let w = kd + 1;
        let mut l = self.band.clone();
        for i in 0..n {
            let p = i * w + kd;
            l[p].re -= sigma;
        }
        for i in 0..n {
            let j0 = i.saturating_sub(kd);
            for j in j0..=i {
                // Σ_{k=j0}^{j-1} L[i][k] conj(L[j][k])
                let ri = i * w + kd - i;
                let rj = j * w + kd - j;
                let mut s = l[ri + j];
                for k in j0..j {
                    s -= l[ri + k] * l[rj + k].conj();
                }
                if j < i {
                    let djj = l[rj + j].re;
                    l[ri + j] = s / djj;
                } else {
                    let d = s.re;
                    if !(d > T::zero()) || !d.is_finite() {
                        return Err(Error::SolverFailure(format!(
                            "matrix not positive definite at pivot {i} (value {d})"
                        )));
                    }
                    l[ri + i] = Complex::new(d.sqrt(), T::zero());
                }
            }
        }
        Ok(BandCholesky { n, kd, l })
    }
}

/// Lower band Cholesky factor of a Hermitian positive definite matrix.
#[derive(Debug, Clone)]
pub struct BandCholesky<T> {
    n: usize,
    kd: usize,
    l: Vec<Complex<T>>,
}

impl<T: Real> BandCholesky<T> {
    #[inline]
    fn at(&self, i: usize, j: usize) -> Complex<T> {
        self.l[i * (self.kd + 1) + self.kd + j - i]
    }

    pub fn solve(&self, b: &[Complex<T>]) -> Vec<Complex<T>> {
        let (n, kd) = (self.n, self.kd);
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for i in 0..n {
            let j0 = i.saturating_sub(kd);
            let mut s = y[i];
            for (k, yk) in y.iter().enumerate().take(i).skip(j0) {
                s -= self.at(i, k) * yk;
            }
            y[i] = s / self.at(i, i).re;
        }
        for i in (0..n).rev() {
            let k1 = (i + kd).min(n - 1);
            let mut s = y[i];
            for k in i + 1..=k1 {
                s -= self.at(k, i).conj() * y[k];
            }
            y[i] = s / self.at(i, i).re;
        }
        y
    }
}

/// Eigen-decomposition of a dense Hermitian matrix (row-major, `n × n`) by
/// cyclic complex Jacobi rotations.
///
/// Returns ascending eigenvalues and the eigenvectors as columns of a
/// row-major `n × n` array.
pub fn hermitian_eigen<T: Real>(a: &[Complex<T>], n: usize) -> (Vec<T>, Vec<Complex<T>>) {
    assert_eq!(a.len(), n * n);
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let mut a = a.to_vec();
    // symmetrize against input noise
    for i in 0..n {
        a[i * n + i] = Complex::new(a[i * n + i].re, T::zero());
        for j in 0..i {
            let v = (a[i * n + j] + a[j * n + i].conj()).scale(T::of(0.5));
            a[i * n + j] = v;
            a[j * n + i] = v.conj();
        }
    }
    let mut v = vec![zero; n * n];
    for i in 0..n {
        v[i * n + i] = one;
    }
    let fro = a.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt();
    let thresh = T::epsilon() * fro;

    for _sweep in 0..100 {
        let off = (0..n)
            .flat_map(|i| (0..i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].norm_sqr())
            .sum::<T>()
            .sqrt();
        if off <= thresh || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let mag = apq.norm();
                if mag <= T::min_positive_value() {
                    continue;
                }
                let phase = apq / mag;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let zeta = (aqq - app) / (T::of(2.0) * mag);
                let t = if zeta >= T::zero() {
                    T::one() / (zeta + (T::one() + zeta * zeta).sqrt())
                } else {
                    -T::one() / (-zeta + (T::one() + zeta * zeta).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                let jpp = Complex::new(c, T::zero());
                let jpq = Complex::new(s, T::zero());
                let jqp = phase.conj().scale(-s);
                let jqq = phase.conj().scale(c);
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * jpp + akq * jqp;
                    a[k * n + q] = akp * jpq + akq * jqq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[q * n + k] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[p * n + q] = zero;
                a[q * n + p] = zero;
                a[p * n + p].im = T::zero();
                a[q * n + q].im = T::zero();
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * jpp + vkq * jqp;
                    v[k * n + q] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.partial_cmp(&a[j * n + j].re).unwrap());
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let mut vecs = vec![zero; n * n];
    for (col, &src) in order.iter().enumerate() {
        for k in 0..n {
            vecs[k * n + col] = v[k * n + src];
        }
    }
    (values, vecs)
}

/// Lowest eigenpairs of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct LowestEigen<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<Complex<T>>>,
    /// `‖A x - θ x‖` for unit `x`.
    pub residuals: Vec<T>,
    pub iterations: usize,
}

/// Below this order the whole matrix goes through [`hermitian_eigen`].
const DENSE_LIMIT: usize = 48;

/// The `count` smallest eigenpairs of a positive semidefinite banded matrix.
///
/// Shift-invert subspace iteration with a Rayleigh–Ritz step on the
/// unshifted matrix, so small eigenvalues keep their relative accuracy. The
/// pole sits just below zero; `fallback_shift` (a positive Gårding-type bound
/// `C` with `A + C` safely definite) is used if that factorization fails.
///
/// The first pair converges to `tol`; the others to `sqrt(tol)`, enough to
/// resolve the spectral gap.
pub fn lowest_eigenpairs<T: Real>(
    a: &BandedHermitian<T>,
    count: usize,
    tol: T,
    max_iter: usize,
    fallback_shift: T,
) -> Result<LowestEigen<T>> {
    let n = a.order();
    if count == 0 || count > n {
        return Err(Error::InvalidArgument(format!(
            "requested {count} eigenpairs of a matrix of order {n}"
        )));
    }
    let scale = T::one() + a.max_abs_diag();
    let floor = T::of(64.0) * T::epsilon() * scale;
    let tol = tol.max(floor);

    if a.bandwidth() == 0 {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a.diag(i).partial_cmp(&a.diag(j)).unwrap_or(std::cmp::Ordering::Equal));
        let zero = Complex::new(T::zero(), T::zero());
        let vectors = order[..count]
            .iter()
            .map(|&i| {
                let mut e = vec![zero; n];
                e[i] = Complex::new(T::one(), T::zero());
                e
            })
            .collect();
        return Ok(LowestEigen {
            values: order[..count].iter().map(|&i| a.diag(i)).collect(),
            vectors,
            residuals: vec![T::zero(); count],
            iterations: 0,
        });
    }

    if n <= DENSE_LIMIT {
        let dense = a.to_dense();
        let (_, vecs) = hermitian_eigen(&dense, n);
        let mut out = LowestEigen {
            values: Vec::with_capacity(count),
            vectors: Vec::with_capacity(count),
            residuals: Vec::with_capacity(count),
            iterations: 1,
        };
        for j in 0..count {
            let x: Vec<_> = (0..n).map(|k| vecs[k * n + j]).collect();
            let mut r = a.matvec(&x);
            // the Rayleigh quotient keeps the relative accuracy of small eigenvalues
            let theta = dot(&x, &r).re / dot(&x, &x).re;
            axpy(Complex::new(-theta, T::zero()), &x, &mut r);
            out.values.push(theta);
            out.residuals.push(norm(&r));
            out.vectors.push(x);
        }
        return Ok(out);
    }

    let tau = T::of(1e-8) * scale;
    let chol = match a.cholesky(-tau) {
        Ok(c) => c,
        Err(_) => a.cholesky(-fallback_shift.max(tau))?,
    };

    let p = n.min(count + 6);
    let mut block = initial_block(a, p);
    let zero = Complex::new(T::zero(), T::zero());
    let loose = tol.sqrt().max(tol);

    for iter in 1..=max_iter {
        let mut y: Vec<Vec<Complex<T>>> = block.iter().map(|x| chol.solve(x)).collect();
        orthonormalize(&mut y);
        let ay: Vec<Vec<Complex<T>>> = y.iter().map(|v| a.matvec(v)).collect();
        let mut h = vec![zero; p * p];
        for i in 0..p {
            for j in 0..p {
                h[i * p + j] = dot(&y[i], &ay[j]);
            }
        }
        let (theta, v) = hermitian_eigen(&h, p);
        let mut x = vec![vec![zero; n]; p];
        let mut ax = vec![vec![zero; n]; p];
        for j in 0..p {
            for i in 0..p {
                let c = v[i * p + j];
                axpy(c, &y[i], &mut x[j]);
                axpy(c, &ay[i], &mut ax[j]);
            }
        }
        let residuals: Vec<T> = (0..count)
            .map(|j| {
                let mut r = ax[j].clone();
                axpy(Complex::new(-theta[j], T::zero()), &x[j], &mut r);
                norm(&r) / norm(&x[j])
            })
            .collect();
        let converged = residuals
            .iter()
            .enumerate()
            .all(|(j, &r)| r <= if j == 0 { tol } else { loose });
        if converged {
            for xj in x.iter_mut().take(count) {
                let s = T::one() / norm(xj);
                xj.iter_mut().for_each(|c| *c = c.scale(s));
            }
            x.truncate(count);
            return Ok(LowestEigen {
                values: theta[..count].to_vec(),
                vectors: x,
                residuals,
                iterations: iter,
            });
        }
        block = x;
    }
    Err(Error::SolverFailure(format!(
        "subspace iteration did not converge in {max_iter} iterations"
    )))
}

/// Unit vectors at the smallest diagonal entries plus one dense vector that
/// touches every mode.
fn initial_block<T: Real>(a: &BandedHermitian<T>, p: usize) -> Vec<Vec<Complex<T>>> {
    let n = a.order();
    let zero = Complex::new(T::zero(), T::zero());
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a.diag(i).partial_cmp(&a.diag(j)).unwrap().then(i.cmp(&j)));
    let mut block = Vec::with_capacity(p);
    for &i in idx.iter().take(p - 1) {
        let mut e = vec![zero; n];
        e[i] = Complex::new(T::one(), T::zero());
        block.push(e);
    }
    let golden = T::of(0.618_033_988_749_894_9);
    let dense = (0..n)
        .map(|i| {
            let t = T::of_usize(i + 1) * golden;
            let w = T::one() / (T::one() + a.diag(i).abs());
            Complex::new(w * (T::one() + (t - t.floor())), w * (t - t.floor() - T::of(0.5)))
        })
        .collect();
    block.push(dense);
    block
}

/// Gram–Schmidt with reorthogonalization; collapsed columns are replaced by
/// deterministic fill vectors.
fn orthonormalize<T: Real>(v: &mut [Vec<Complex<T>>]) {
    let n = v.first().map_or(0, |x| x.len());
    for j in 0..v.len() {
        let mut attempt = 0;
        loop {
            let before = norm(&v[j]);
            for _ in 0..2 {
                for i in 0..j {
                    let (head, tail) = v.split_at_mut(j);
                    let c = dot(&head[i], &tail[0]);
                    axpy(-c, &head[i], &mut tail[0]);
                }
            }
            let after = norm(&v[j]);
            if after > T::of(1e-10) * before && after > T::min_positive_value() {
                let s = T::one() / after;
                v[j].iter_mut().for_each(|c| *c = c.scale(s));
                break;
            }
            attempt += 1;
            assert!(attempt <= n, "cannot complete orthonormal basis");
            v[j] = (0..n)
                .map(|k| {
                    let t = T::of_usize((k + 1) * (j + 3 + attempt)) * T::of(0.754_877_666_246_692_7);
                    Complex::new(t - t.floor() - T::of(0.5), T::zero())
                })
                .collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    /// Banded Hermitian test matrix with a known structure: a shifted
    /// discrete Laplacian with complex off-diagonals.
    fn laplacian(n: usize, kd: usize, shift: f64) -> BandedHermitian<f64> {
        let mut a = BandedHermitian::zeros(n, kd);
        for i in 0..n {
            a.set_lower(i, i, c(2.0 + shift, 0.0));
            if i > 0 {
                a.set_lower(i, i - 1, c(-0.6, 0.8));
            }
        }
        a
    }

    #[test]
    fn matvec_matches_dense() {
        let mut a = BandedHermitian::zeros(7, 2);
        for i in 0..7 {
            a.set_lower(i, i, c(3.0 + i as f64, 0.0));
            for k in 1..=2 {
                if i >= k {
                    a.set_lower(i, i - k, c(0.1 * k as f64, -0.2 * i as f64));
                }
            }
        }
        let x: Vec<C> = (0..7).map(|i| c(i as f64, 1.0 - i as f64)).collect();
        let y = a.matvec(&x);
        let d = a.to_dense();
        for i in 0..7 {
            let yi: C = (0..7).map(|j| d[i * 7 + j] * x[j]).sum();
            assert!((yi - y[i]).norm() < 1e-12);
        }
        assert_eq!(a.get(1, 3), a.get(3, 1).conj());
        assert_eq!(a.get(0, 5), c(0.0, 0.0));
    }

    #[test]
    fn cholesky_solves() {
        let a = laplacian(30, 1, 0.5);
        let b: Vec<C> = (0..30).map(|i| c((i as f64).sin(), (i as f64).cos())).collect();
        let x = a.cholesky(0.0).unwrap().solve(&b);
        let r = a.matvec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).norm() < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = laplacian(10, 1, -1.5);
        assert!(matches!(a.cholesky(0.0), Err(Error::SolverFailure(_))));
    }

    #[test]
    fn jacobi_two_by_two() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let a = vec![c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)];
        let (vals, vecs) = hermitian_eigen(&a, 2);
        assert!((vals[0] - 1.0).abs() < 1e-14);
        assert!((vals[1] - 3.0).abs() < 1e-14);
        // A v = λ v for the first column
        let v = [vecs[0], vecs[2]];
        let av0 = a[0] * v[0] + a[1] * v[1];
        assert!((av0 - v[0] * vals[0]).norm() < 1e-14);
    }

    #[test]
    fn jacobi_f32_smoke() {
        let a: Vec<Complex<f32>> = vec![
            Complex::new(4.0, 0.0),
            Complex::new(1.0, 1.0),
            Complex::new(1.0, -1.0),
            Complex::new(3.0, 0.0),
        ];
        let (vals, _) = hermitian_eigen(&a, 2);
        // 3.5 ± sqrt(0.25 + 2)
        assert!((vals[0] - (3.5 - 1.5)).abs() < 1e-5);
        assert!((vals[1] - (3.5 + 1.5)).abs() < 1e-5);
    }

    #[test]
    fn subspace_matches_dense_oracle() {
        // order above the dense cutoff so the iterative path runs
        let n = 120;
        let mut a = BandedHermitian::zeros(n, 3);
        for i in 0..n {
            let t = i as f64;
            a.set_lower(i, i, c(1.0 + (0.37 * t).sin().powi(2) * 5.0 + 0.01 * t, 0.0));
            for k in 1..=3 {
                if i >= k {
                    a.set_lower(i, i - k, c(0.2 / k as f64, 0.1 * (t * 0.3).cos()));
                }
            }
        }
        let (vals, _) = hermitian_eigen(&a.to_dense(), n);
        let shift = 10.0;
        let got = lowest_eigenpairs(&a, 2, 1e-11, 500, shift).unwrap();
        assert!((got.values[0] - vals[0]).abs() < 1e-10, "{} vs {}", got.values[0], vals[0]);
        assert!((got.values[1] - vals[1]).abs() < 1e-7);
        assert!(got.residuals[0] <= 1e-11);
    }

    #[test]
    fn subspace_handles_singular_psd() {
        // graph Laplacian of a path: smallest eigenvalue exactly 0
        let n = 80;
        let mut a = BandedHermitian::zeros(n, 1);
        for i in 0..n {
            let deg = if i == 0 || i == n - 1 { 1.0 } else { 2.0 };
            a.set_lower(i, i, c(deg, 0.0));
            if i > 0 {
                a.set_lower(i, i - 1, c(-1.0, 0.0));
            }
        }
        let got = lowest_eigenpairs(&a, 2, 1e-12, 2000, 4.0).unwrap();
        assert!(got.values[0].abs() < 1e-12);
        let expected = 2.0 - 2.0 * (std::f64::consts::PI / n as f64).cos();
        assert!((got.values[1] - expected).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_count() {
        let a = laplacian(5, 1, 1.0);
        assert!(lowest_eigenpairs(&a, 0, 1e-10, 10, 1.0).is_err());
        assert!(lowest_eigenpairs(&a, 6, 1e-10, 10, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn jacobi_reconstructs(entries in proptest::collection::vec(-1.0f64..1.0, 32)) {
            let n = 4;
            let mut a = vec![c(0.0, 0.0); n * n];
            let mut it = entries.into_iter();
            for i in 0..n {
                a[i * n + i] = c(it.next().unwrap() * 3.0, 0.0);
                for j in 0..i {
                    let v = c(it.next().unwrap(), it.next().unwrap());
                    a[i * n + j] = v;
                    a[j * n + i] = v.conj();
                }
            }
            let (vals, v) = hermitian_eigen(&a, n);
            for w in vals.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
            // V diag(λ) Vᴴ = A
            for i in 0..n {
                for j in 0..n {
                    let s: C = (0..n).map(|k| v[i * n + k] * vals[k] * v[j * n + k].conj()).sum();
                    prop_assert!((s - a[i * n + j]).norm() < 1e-12);
                }
            }
        }
    }
}
