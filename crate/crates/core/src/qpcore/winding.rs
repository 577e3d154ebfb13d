use std::cmp::Ordering;

use super::trigsum::FREQ_TOL;
use crate::{Error, Real, Result};

/// Default bound `P` for the injectivity scan `Λᵀp ≠ 0`, `‖p‖∞ ≤ P`.
pub const DEFAULT_P_CHECK: usize = 1000;
/// Coefficient bound of the integer-relation search.
pub const DEFAULT_RELATION_BOUND: i64 = 64;
/// Largest number of lattice points an injectivity scan may visit; the bound
/// `P` is lowered to fit and the lowered value is recorded.
pub const INJECTIVITY_BUDGET: u64 = 20_000_000;

/// Winding matrix `Λ` (`M × d`) realizing `a(x) = b(Λx)`.
///
/// Row `j` of `Λ` is the generator frequency `Λᵀe_j ∈ ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindingMap<T> {
    m: usize,
    d: usize,
    lambda: Vec<T>,
    periodic: bool,
    checked_bound: usize,
}

impl<T: Real> WindingMap<T> {
    /// Builds `Λ` from its rows and runs the injectivity scan up to
    /// [`DEFAULT_P_CHECK`].
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        Self::with_check(rows, DEFAULT_P_CHECK)
    }

    pub fn with_check(rows: Vec<Vec<T>>, p_check: usize) -> Result<Self> {
        let m = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if m == 0 || d == 0 {
            return Err(Error::DegenerateWinding("empty winding matrix".into()));
        }
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::DegenerateWinding("winding matrix rows differ in length".into()));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateWinding("non-finite winding matrix entry".into()));
        }
        if m < d {
            return Err(Error::DegenerateWinding(format!("M = {m} is smaller than d = {d}")));
        }
        let lambda: Vec<T> = rows.into_iter().flatten().collect();
        let mut w = Self { m, d, lambda, periodic: false, checked_bound: 0 };
        let solver = PivotSolver::new(&w.rows_f64());
        w.periodic = solver.rank == m;
        w.checked_bound = check_injectivity(&solver, p_check)?;
        Ok(w)
    }

    /// `Λ = I_d`: the coefficient is already `2π`-periodic.
    pub fn identity(d: usize) -> Self {
        let mut lambda = vec![T::zero(); d * d];
        for i in 0..d {
            lambda[i * d + i] = T::one();
        }
        Self { m: d, d, lambda, periodic: true, checked_bound: usize::MAX }
    }

    /// Lifted dimension `M`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Physical dimension `d`.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn lambda(&self, j: usize, k: usize) -> T {
        self.lambda[j * self.d + k]
    }

    /// Generator `Λᵀe_j`.
    pub fn generator(&self, j: usize) -> &[T] {
        &self.lambda[j * self.d..(j + 1) * self.d]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.m).map(|j| self.generator(j).to_vec()).collect()
    }

    /// True when the generators are linearly independent over `ℝ` (so
    /// `M = d` and the lifted operator is elliptic).
    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    /// Largest `P` for which `Λᵀp ≠ 0` was verified on `0 < ‖p‖∞ ≤ P`.
    /// `usize::MAX` means injectivity holds exactly (independent generators).
    pub fn checked_bound(&self) -> usize {
        self.checked_bound
    }

    /// Frequency `Λᵀn`.
    pub fn frequency(&self, n: &[i64]) -> Vec<T> {
        let mut out = vec![T::zero(); self.d];
        for (j, &nj) in n.iter().enumerate() {
            if nj != 0 {
                let c = T::of_i64(nj);
                for (o, g) in out.iter_mut().zip(self.generator(j)) {
                    *o += c * *g;
                }
            }
        }
        out
    }

    /// `Λx ∈ ℝ^M`.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        (0..self.m)
            .map(|j| self.generator(j).iter().zip(x).map(|(a, b)| *a * *b).sum())
            .collect()
    }

    fn rows_f64(&self) -> Vec<Vec<f64>> {
        (0..self.m)
            .map(|j| self.generator(j).iter().map(|v| v.as_f64()).collect())
            .collect()
    }

    /// Integer `n` with `Λᵀn = xi` within `tol`, searching free coordinates
    /// in `[-bound, bound]`.
    pub fn represent(&self, xi: &[T], bound: i64, tol: f64) -> Option<Vec<i64>> {
        let solver = PivotSolver::new(&self.rows_f64());
        let xi: Vec<f64> = xi.iter().map(|v| v.as_f64()).collect();
        let mut found = None;
        solver.for_each_free(bound, |free| {
            if let Some(n) = solver.complete(&xi, free, tol) {
                found = Some(n);
                return true;
            }
            false
        });
        found
    }
}

/// Splits the generators into a pivot set spanning their real span and the
/// remaining free generators; solves for pivot coordinates by least squares.
struct PivotSolver {
    rows: Vec<Vec<f64>>,
    pivots: Vec<usize>,
    free: Vec<usize>,
    /// `r × d` pseudo-inverse of the pivot generators.
    pinv: Vec<Vec<f64>>,
    rank: usize,
    scale: f64,
}

impl PivotSolver {
    fn new(rows: &[Vec<f64>]) -> Self {
        let d = rows.first().map_or(0, Vec::len);
        let scale = rows.iter().flatten().fold(1.0f64, |a, v| a.max(v.abs()));
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let (mut pivots, mut free) = (Vec::new(), Vec::new());
        for (j, r) in rows.iter().enumerate() {
            let mut v = r.clone();
            for b in &basis {
                let c: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nv > 1e-10 * scale && basis.len() < d {
                v.iter_mut().for_each(|x| *x /= nv);
                basis.push(v);
                pivots.push(j);
            } else {
                free.push(j);
            }
        }
        // pinv = (PᵀP)⁻¹ Pᵀ with P the d × r matrix of pivot generators
        let r = pivots.len();
        let mut gram = vec![vec![0.0; r]; r];
        for a in 0..r {
            for b in 0..r {
                gram[a][b] = rows[pivots[a]].iter().zip(&rows[pivots[b]]).map(|(x, y)| x * y).sum();
            }
        }
        let inv = invert(gram);
        let pinv = (0..r)
            .map(|a| {
                (0..d)
                    .map(|k| (0..r).map(|b| inv[a][b] * rows[pivots[b]][k]).sum())
                    .collect()
            })
            .collect();
        Self { rows: rows.to_vec(), pivots, free, pinv, rank: r, scale }
    }

    /// Visits every assignment of the free coordinates in `[-bound, bound]`
    /// until `visit` returns true.
    fn for_each_free(&self, bound: i64, mut visit: impl FnMut(&[i64]) -> bool) {
        let k = self.free.len();
        let mut f = vec![-bound; k];
        loop {
            if visit(&f) {
                return;
            }
            let mut i = 0;
            loop {
                if i == k {
                    return;
                }
                if f[i] < bound {
                    f[i] += 1;
                    break;
                }
                f[i] = -bound;
                i += 1;
            }
        }
    }

    /// Solves the pivot coordinates for `xi - Σ free_j g_j` and returns the
    /// full integer vector when the residual is within `tol`.
    fn complete(&self, xi: &[f64], free: &[i64], tol: f64) -> Option<Vec<i64>> {
        let d = xi.len();
        let mut rhs = xi.to_vec();
        for (&j, &c) in self.free.iter().zip(free) {
            if c != 0 {
                for k in 0..d {
                    rhs[k] -= c as f64 * self.rows[j][k];
                }
            }
        }
        let mut n = vec![0i64; self.rows.len()];
        for (&j, &c) in self.free.iter().zip(free) {
            n[j] = c;
        }
        for (a, &j) in self.pivots.iter().enumerate() {
            let p: f64 = self.pinv[a].iter().zip(&rhs).map(|(x, y)| x * y).sum();
            if !p.is_finite() || p.abs() > 1e15 {
                return None;
            }
            n[j] = p.round() as i64;
        }
        let mut res = xi.to_vec();
        for (j, &c) in n.iter().enumerate() {
            for k in 0..d {
                res[k] -= c as f64 * self.rows[j][k];
            }
        }
        let err = res.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        (err <= tol * self.scale).then_some(n)
    }
}

fn invert(mut a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap_or(Ordering::Equal))
            .unwrap();
        a.swap(c, p);
        inv.swap(c, p);
        let piv = a[c][c];
        for j in 0..n {
            a[c][j] /= piv;
            inv[c][j] /= piv;
        }
        for i in 0..n {
            if i != c {
                let f = a[i][c];
                for j in 0..n {
                    a[i][j] -= f * a[c][j];
                    inv[i][j] -= f * inv[c][j];
                }
            }
        }
    }
    inv
}

/// Scans `0 < ‖p‖∞ ≤ P` for `Λᵀp = 0`; returns the bound actually checked.
fn check_injectivity(solver: &PivotSolver, p_check: usize) -> Result<usize> {
    let k = solver.free.len();
    if k == 0 {
        return Ok(usize::MAX);
    }
    let mut p = p_check as u64;
    while p > 0 && (2 * p + 1).checked_pow(k as u32).is_none_or(|c| c > INJECTIVITY_BUDGET) {
        p -= 1;
    }
    if p < p_check as u64 {
        log::warn!("injectivity scan bound lowered from {p_check} to {p} to fit the search budget");
    }
    let bound = p as i64;
    let zero = vec![0.0; solver.rows[0].len()];
    let mut hit = None;
    solver.for_each_free(bound, |free| {
        if free.iter().all(|&c| c == 0) {
            return false;
        }
        if let Some(n) = solver.complete(&zero, free, FREQ_TOL) {
            if n.iter().all(|c| c.abs() <= bound) {
                hit = Some(n);
                return true;
            }
        }
        false
    });
    match hit {
        Some(n) => Err(Error::DegenerateWinding(format!("Λᵀp = 0 for p = {n:?}"))),
        None => Ok(p as usize),
    }
}

/// Finds a winding matrix whose generators span every input frequency over
/// `ℤ`.
///
/// Frequencies are taken up to sign. A frequency is added to the basis
/// unless a relation `c₀ξ = Σ cⱼbⱼ` with `1 ≤ c₀ ≤ 64`, `|cⱼ| ≤ 64` ties it
/// to the current basis; the rational coordinates are then reduced to a
/// lattice basis by Hermite normal form. Constant input yields `Λ = I_d`.
pub fn detect_module<T: Real>(frequencies: &[Vec<T>], p_check: usize, tol: f64) -> Result<WindingMap<T>> {
    detect_module_bounded(frequencies, p_check, tol, DEFAULT_RELATION_BOUND)
}

pub fn detect_module_bounded<T: Real>(
    frequencies: &[Vec<T>],
    p_check: usize,
    tol: f64,
    relation_bound: i64,
) -> Result<WindingMap<T>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let d = match frequencies.first() {
        Some(f) => f.len(),
        None => return Err(Error::ModuleDetection("no frequencies given".into())),
    };
    if d == 0 || frequencies.iter().any(|f| f.len() != d) {
        return Err(Error::ModuleDetection("frequencies have inconsistent dimensions".into()));
    }
    let mut freqs: Vec<Vec<f64>> = Vec::new();
    for f in frequencies {
        let mut v: Vec<f64> = f.iter().map(|x| x.as_f64()).collect();
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::ModuleDetection("non-finite frequency".into()));
        }
        if v.iter().all(|x| x.abs() <= tol) {
            continue;
        }
        if v.iter().find(|x| x.abs() > tol).is_some_and(|x| *x < 0.0) {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        if !freqs.iter().any(|g| g.iter().zip(&v).all(|(a, b)| (a - b).abs() <= tol)) {
            freqs.push(v);
        }
    }
    if freqs.is_empty() {
        return Ok(WindingMap::identity(d));
    }
    freqs.sort_by(|a, b| {
        let na: f64 = a.iter().map(|x| x * x).sum();
        let nb: f64 = b.iter().map(|x| x * x).sum();
        na.partial_cmp(&nb)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.partial_cmp(b).unwrap_or(Ordering::Equal))
    });

    // rational coordinates (numerators, denominator) of each frequency in the basis
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut coords: Vec<(Vec<i64>, i64)> = Vec::new();
    for xi in &freqs {
        match find_relation(&basis, xi, relation_bound, tol)? {
            Some((num, den)) => coords.push((num, den)),
            None => {
                basis.push(xi.clone());
                let k = basis.len();
                for (num, _) in coords.iter_mut() {
                    num.push(0);
                }
                let mut unit = vec![0; k];
                unit[k - 1] = 1;
                coords.push((unit, 1));
            }
        }
    }

    let k = basis.len();
    let den = coords.iter().fold(1i128, |acc, (_, q)| lcm(acc, *q as i128));
    let lattice: Vec<Vec<i128>> = coords
        .iter()
        .map(|(num, q)| num.iter().map(|&c| c as i128 * (den / *q as i128)).collect())
        .collect();
    let hnf = hermite_rows(lattice, k);
    let rows: Vec<Vec<T>> = hnf
        .iter()
        .map(|h| {
            (0..d)
                .map(|c| {
                    let v: f64 = h.iter().zip(&basis).map(|(hi, b)| *hi as f64 / den as f64 * b[c]).sum();
                    T::of(v)
                })
                .collect()
        })
        .collect();
    WindingMap::with_check(rows, p_check)
}

/// Smallest `c₀ ≥ 1` and integers `cⱼ` with `c₀ξ = Σ cⱼ bⱼ`.
fn find_relation(basis: &[Vec<f64>], xi: &[f64], bound: i64, tol: f64) -> Result<Option<(Vec<i64>, i64)>> {
    if basis.is_empty() {
        return Ok(None);
    }
    let solver = PivotSolver::new(basis);
    let cost = (2 * bound as u64 + 1).checked_pow(solver.free.len() as u32).and_then(|c| c.checked_mul(bound as u64));
    if cost.is_none_or(|c| c > 200_000_000) {
        return Err(Error::ModuleDetection(format!(
            "relation search over {} generators exceeds the search budget",
            basis.len()
        )));
    }
    for c0 in 1..=bound {
        let target: Vec<f64> = xi.iter().map(|v| v * c0 as f64).collect();
        let mut found = None;
        solver.for_each_free(bound, |free| {
            if let Some(n) = solver.complete(&target, free, tol * c0 as f64) {
                found = Some(n);
                return true;
            }
            false
        });
        if let Some(num) = found {
            let g = num.iter().fold(c0, |acc, &c| gcd(acc, c.abs()));
            return Ok(Some((num.into_iter().map(|c| c / g).collect(), c0 / g)));
        }
    }
    Ok(None)
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: i128, b: i128) -> i128 {
    fn g(a: i128, b: i128) -> i128 {
        if b == 0 {
            a.abs()
        } else {
            g(b, a % b)
        }
    }
    a / g(a, b) * b
}

/// Row-style Hermite normal form: a basis of the lattice spanned by `rows`
/// (all of length `k`), upper triangular with positive pivots and reduced
/// entries above each pivot.
fn hermite_rows(mut rows: Vec<Vec<i128>>, k: usize) -> Vec<Vec<i128>> {
    let mut out: Vec<Vec<i128>> = Vec::new();
    for c in 0..k {
        loop {
            rows.retain(|r| r.iter().any(|&v| v != 0));
            let Some(p) = rows
                .iter()
                .enumerate()
                .filter(|(_, r)| r[c] != 0)
                .min_by_key(|(_, r)| r[c].abs())
                .map(|(i, _)| i)
            else {
                break;
            };
            let piv = rows.swap_remove(p);
            let mut done = true;
            for r in rows.iter_mut() {
                let q = r[c].div_euclid(piv[c]);
                if q != 0 {
                    r.iter_mut().zip(&piv).for_each(|(a, b)| *a -= q * b);
                }
                if r[c] != 0 {
                    done = false;
                }
            }
            if done {
                let mut piv = piv;
                if piv[c] < 0 {
                    piv.iter_mut().for_each(|v| *v = -*v);
                }
                out.push(piv);
                break;
            }
            rows.push(piv);
        }
    }
    for i in 0..out.len() {
        let c = (0..k).find(|&c| out[i][c] != 0).unwrap();
        for j in 0..i {
            let q = out[j][c].div_euclid(out[i][c]);
            if q != 0 {
                let (head, tail) = out.split_at_mut(i);
                head[j].iter_mut().zip(&tail[0]).for_each(|(a, b)| *a -= q * b);
            }
        }
    }
    out
}

/// `min |n·β| |n|^τ` over `0 < ‖n‖∞ ≤ n_search`; `+∞` when `β` has fewer
/// than two entries (the small-divisor condition is vacuous).
pub fn kozlov_constant(beta: &[f64], tau: f64, n_search: usize) -> f64 {
    let m = beta.len();
    if m < 2 {
        return f64::INFINITY;
    }
    let b = n_search as i64;
    let mut n = vec![-b; m];
    let mut best = f64::INFINITY;
    loop {
        if n.iter().any(|&c| c != 0) {
            let dot: f64 = n.iter().zip(beta).map(|(c, v)| *c as f64 * v).sum();
            let len = n.iter().map(|&c| (c * c) as f64).sum::<f64>().sqrt();
            let val = dot.abs() * len.powf(tau);
            // exact integer relations should report exactly zero
            let val = if dot.abs() <= 1e-12 * (1.0 + len) { 0.0 } else { val };
            best = best.min(val);
        }
        let mut i = 0;
        loop {
            if i == m {
                return best;
            }
            if n[i] < b {
                n[i] += 1;
                break;
            }
            n[i] = -b;
            i += 1;
        }
    }
}

/// Kozlov small-divisor estimate over the blocks of `Λ`: block `i` collects
/// the nonzero entries of column `i` (the generators acting on `x_i`).
pub fn kozlov_diagnostic<T: Real>(w: &WindingMap<T>, tau: f64, n_search: usize) -> f64 {
    (0..w.d())
        .map(|i| {
            let beta: Vec<f64> = (0..w.m()).map(|j| w.lambda(j, i).as_f64()).filter(|v| *v != 0.0).collect();
            kozlov_constant(&beta, tau, n_search)
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: f64) -> Vec<f64> {
        vec![v]
    }

    #[test]
    fn detects_sqrt2_module() {
        let r2 = 2f64.sqrt();
        let w = detect_module(&[s(1.0), s(-1.0), s(r2), s(-r2)], 1000, 1e-9).unwrap();
        assert_eq!(w.m(), 2);
        assert!((w.lambda(0, 0) - 1.0).abs() < 1e-12);
        assert!((w.lambda(1, 0) - r2).abs() < 1e-12);
        assert!(!w.is_periodic());
        assert_eq!(w.checked_bound(), 1000);
    }

    #[test]
    fn detects_three_generators() {
        let (r2, r3) = (2f64.sqrt(), 3f64.sqrt());
        let w = detect_module(&[s(r3), s(-1.0), s(r2), s(-r3), s(1.0)], 1000, 1e-9).unwrap();
        assert_eq!(w.m(), 3);
        for (j, v) in [1.0, r2, r3].iter().enumerate() {
            assert!((w.lambda(j, 0) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn integer_frequencies_are_periodic() {
        let w = detect_module(&[s(1.0), s(-1.0), s(2.0), s(-2.0)], 1000, 1e-9).unwrap();
        assert_eq!(w.m(), 1);
        assert!(w.is_periodic());
        assert_eq!(w.lambda(0, 0), 1.0);
    }

    #[test]
    fn rational_frequencies_reduce_to_gcd() {
        let w = detect_module(&[s(2.0), s(3.0)], 1000, 1e-9).unwrap();
        assert_eq!(w.m(), 1);
        assert!((w.lambda(0, 0) - 1.0).abs() < 1e-12);
        let w = detect_module(&[s(0.5), s(1.0), s(1.5 * 2f64.sqrt())], 1000, 1e-9).unwrap();
        assert_eq!(w.m(), 2);
        assert!((w.lambda(0, 0) - 0.5).abs() < 1e-12);
        assert!((w.lambda(1, 0) - 1.5 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn mixed_module_generates_inputs() {
        let r2 = 2f64.sqrt();
        let input = [s(1.0 + r2), s(1.0 - r2), s(2.0)];
        let w = detect_module(&input, 200, 1e-9).unwrap();
        assert_eq!(w.m(), 2);
        for f in &input {
            assert!(w.represent(f, 64, 1e-9).is_some(), "{f:?} not generated");
        }
    }

    #[test]
    fn constant_input_gives_identity() {
        let w = detect_module(&[vec![0.0, 0.0]], 10, 1e-9).unwrap();
        assert_eq!((w.m(), w.d()), (2, 2));
        assert!(w.is_periodic());
        assert!(detect_module::<f64>(&[], 10, 1e-9).is_err());
    }

    #[test]
    fn two_dimensional_frequencies() {
        let w = detect_module(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]], 100, 1e-9).unwrap();
        assert_eq!(w.m(), 2);
        assert!(w.is_periodic());
    }

    #[test]
    fn near_rational_ratio_fails_injectivity() {
        let err = detect_module(&[s(1.0), s(1000.0 / 999.0)], 1000, 1e-9).unwrap_err();
        assert!(matches!(err, Error::DegenerateWinding(_)), "{err:?}");
    }

    #[test]
    fn winding_rejects_relations() {
        assert!(matches!(WindingMap::new(vec![s(1.0), s(2.0)]), Err(Error::DegenerateWinding(_))));
        assert!(WindingMap::<f64>::new(vec![]).is_err());
        assert!(WindingMap::new(vec![vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn three_generator_scan_is_budgeted() {
        let w = WindingMap::new(vec![s(1.0), s(2f64.sqrt()), s(3f64.sqrt())]).unwrap();
        assert_eq!(w.checked_bound(), 1000);
        let w = WindingMap::new(vec![s(1.0), s(2f64.sqrt()), s(3f64.sqrt()), s(5f64.sqrt())]).unwrap();
        assert!(w.checked_bound() < 1000 && w.checked_bound() > 100);
    }

    #[test]
    fn represents_and_applies() {
        let r2 = 2f64.sqrt();
        let w = WindingMap::new(vec![s(1.0), s(r2)]).unwrap();
        assert_eq!(w.represent(&[3.0 - 2.0 * r2], 64, 1e-9), Some(vec![3, -2]));
        assert_eq!(w.represent(&[0.5], 64, 1e-9), None);
        assert_eq!(w.apply(&[2.0]), vec![2.0, 2.0 * r2]);
        assert_eq!(w.frequency(&[1, 1]), vec![1.0 + r2]);
    }

    #[test]
    fn kozlov_values() {
        let k = kozlov_constant(&[1.0, 2f64.sqrt()], 2.0, 50);
        assert!((k - 0.828_427_124_746_190_3).abs() < 1e-12, "{k}");
        assert_eq!(kozlov_constant(&[1.0, 2.0], 2.0, 50), 0.0);
        assert_eq!(kozlov_constant(&[1.0], 2.0, 50), f64::INFINITY);
        let w = WindingMap::new(vec![s(1.0), s(2f64.sqrt())]).unwrap();
        assert!((kozlov_diagnostic(&w, 2.0, 50) - k).abs() < 1e-15);
        assert_eq!(kozlov_diagnostic(&WindingMap::<f64>::identity(1), 2.0, 50), f64::INFINITY);
    }

    #[test]
    fn hnf_basis() {
        let h = hermite_rows(vec![vec![4, 6], vec![6, 9], vec![2, 0]], 2);
        // lattice spanned: (2,0), (0,3) and (4,6) = 2(2,0)+2(0,3) -> {(2,0),(0,3)}
        assert_eq!(h, vec![vec![2, 0], vec![0, 3]]);
    }
}
