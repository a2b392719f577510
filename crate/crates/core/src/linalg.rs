//! Complex linear algebra for the Newton solver.
//!
//! Dense partial-pivoting elimination, plus an exact elimination for the
//! cyclic block-bidiagonal matrices produced by multiple shooting. Both pick
//! the largest available pivot in every column, so they perform the same
//! arithmetic up to the order of row updates.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Environment variable holding the worker count of the elimination kernel.
pub const THREADS_ENV: &str = "QPCIRCLE_THREADS";
/// Smallest-to-largest pivot ratio below which a solve is flagged as
/// ill-conditioned.
pub const CONDITION_WARNING_RATIO: f64 = 1e-13;

/// Worker count for row updates, from [`THREADS_ENV`] (default 1).
///
/// Each row is always updated by exactly one worker with the same operation
/// order, so results do not depend on the setting.
pub fn kernel_threads() -> usize {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|n| *n >= 1).unwrap_or(1)
}

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex<T>] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| self.row(i).iter().zip(x).fold(Complex::zero(), |acc, (a, b)| acc + *a * *b)).collect()
    }

    /// Adds `m` into the block whose top-left corner is `(r0, c0)`.
    pub fn add_block(&mut self, r0: usize, c0: usize, m: &CMatrix<T>) {
        for i in 0..m.rows {
            for j in 0..m.cols {
                self[(r0 + i, c0 + j)] += m[(i, j)];
            }
        }
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// Solution of a linear system together with pivot statistics.
#[derive(Clone, Debug)]
pub struct LinearSolution<T> {
    pub x: Vec<Complex<T>>,
    /// Smallest over largest pivot magnitude.
    pub pivot_ratio: T,
}

impl<T: Real> LinearSolution<T> {
    pub fn condition_warning(&self) -> bool {
        self.pivot_ratio < T::lit(CONDITION_WARNING_RATIO)
    }
}

#[derive(Clone, Copy, Debug)]
struct PivotStats<T> {
    min: T,
    max: T,
}

impl<T: Real> PivotStats<T> {
    fn new() -> Self {
        Self { min: T::infinity(), max: T::zero() }
    }

    fn push(&mut self, v: T) {
        self.min = self.min.min(v);
        self.max = self.max.max(v);
    }

    fn ratio(&self) -> T {
        if self.max > T::zero() {
            self.min / self.max
        } else {
            T::one()
        }
    }
}

fn check_pivot<T: Real>(v: T, index: usize) -> Result<()> {
    if v == T::zero() || !v.is_finite() {
        Err(Error::Singular { pivot: index })
    } else {
        Ok(())
    }
}

/// Gaussian elimination with partial pivoting.
pub fn solve_dense<T: Real>(a: &CMatrix<T>, b: &[Complex<T>]) -> Result<LinearSolution<T>> {
    let (x, stats) = dense_kernel(a, b)?;
    Ok(LinearSolution { x, pivot_ratio: stats.ratio() })
}

fn dense_kernel<T: Real>(a: &CMatrix<T>, b: &[Complex<T>]) -> Result<(Vec<Complex<T>>, PivotStats<T>)> {
    let n = a.rows;
    if a.cols != n {
        return Err(Error::LengthMismatch { expected: n, actual: a.cols });
    }
    if b.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: b.len() });
    }
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    let mut stats = PivotStats::new();
    for k in 0..n {
        let (p, pv) = (k..n).map(|i| (i, m[(i, k)].norm())).fold((k, -T::one()), |best, c| if c.1 > best.1 { c } else { best });
        check_pivot(pv, k)?;
        stats.push(pv);
        if p != k {
            for j in 0..n {
                m.data.swap(k * n + j, p * n + j);
            }
            rhs.swap(k, p);
        }
        let inv = m[(k, k)].inv();
        let (top, bottom) = m.data.split_at_mut((k + 1) * n);
        let pivot_row = &top[k * n..(k + 1) * n];
        for (r, row) in bottom.chunks_mut(n).enumerate() {
            let f = row[k] * inv;
            if f.is_zero() {
                continue;
            }
            row[k] = Complex::zero();
            for j in k + 1..n {
                row[j] -= f * pivot_row[j];
            }
            let i = k + 1 + r;
            let t = f * rhs[k];
            rhs[i] -= t;
        }
    }
    let mut x = vec![Complex::zero(); n];
    for k in (0..n).rev() {
        let mut acc = rhs[k];
        for j in k + 1..n {
            acc -= m[(k, j)] * x[j];
        }
        x[k] = acc / m[(k, k)];
    }
    Ok((x, stats))
}

/// Jacobian of a multiple-shooting system.
///
/// Unknowns are `d` components of size `m` followed by one scalar (the
/// unfolding parameter). Rows are one phase row followed by `d` blocks of `m`
/// rows. Block `j` depends on component `j` (`diag[j]`), component `j + 1`
/// cyclically (`next[j]`), and block `d - 1` additionally on the scalar.
#[derive(Clone, Debug)]
pub struct BlockJacobian<T> {
    pub d: usize,
    pub m: usize,
    /// Phase row restricted to component 0.
    pub phase: Vec<Complex<T>>,
    pub diag: Vec<CMatrix<T>>,
    pub next: Vec<CMatrix<T>>,
    /// Scalar column restricted to the rows of block `d - 1`.
    pub scalar: Vec<Complex<T>>,
}

impl<T: Real> BlockJacobian<T> {
    pub fn new(d: usize, m: usize) -> Self {
        Self {
            d,
            m,
            phase: vec![Complex::zero(); m],
            diag: (0..d).map(|_| CMatrix::zeros(m, m)).collect(),
            next: (0..d).map(|_| CMatrix::zeros(m, m)).collect(),
            scalar: vec![Complex::zero(); m],
        }
    }

    pub fn dim(&self) -> usize {
        self.d * self.m + 1
    }

    pub fn to_dense(&self) -> CMatrix<T> {
        let (d, m) = (self.d, self.m);
        let n = self.dim();
        let mut a = CMatrix::zeros(n, n);
        for (j, v) in self.phase.iter().enumerate() {
            a[(0, j)] += *v;
        }
        for b in 0..d {
            let r0 = 1 + b * m;
            a.add_block(r0, b * m, &self.diag[b]);
            a.add_block(r0, ((b + 1) % d) * m, &self.next[b]);
        }
        let r0 = 1 + (d - 1) * m;
        for (i, v) in self.scalar.iter().enumerate() {
            a[(r0 + i, n - 1)] += *v;
        }
        a
    }

    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        self.to_dense().mul_vec(x)
    }

    /// Solves `J x = rhs`, exploiting the cyclic structure when `d > 1`.
    pub fn solve(&self, rhs: &[Complex<T>]) -> Result<LinearSolution<T>> {
        if rhs.len() != self.dim() {
            return Err(Error::LengthMismatch { expected: self.dim(), actual: rhs.len() });
        }
        if self.d == 1 {
            solve_dense(&self.to_dense(), rhs)
        } else {
            solve_structured(self, rhs, kernel_threads())
        }
    }
}

/// A row with nonzeros in a window of the banded columns and in the border.
#[derive(Clone, Debug)]
struct SparseRow<T> {
    lo: usize,
    /// Entries from column `lo` on start at `band[off]`.
    off: usize,
    band: Vec<Complex<T>>,
    border: Vec<Complex<T>>,
    rhs: Complex<T>,
}

impl<T: Real> SparseRow<T> {
    fn new(lo: usize, band: Vec<Complex<T>>, border: Vec<Complex<T>>, rhs: Complex<T>) -> Self {
        Self { lo, off: 0, band, border, rhs }
    }

    fn window(&self) -> &[Complex<T>] {
        &self.band[self.off..]
    }

    fn at(&self, k: usize) -> Complex<T> {
        let w = self.window();
        if k < self.lo || k >= self.lo + w.len() {
            Complex::zero()
        } else {
            w[k - self.lo]
        }
    }

    /// `self -= f * pivot`, where both rows start at the pivot column.
    fn eliminate(&mut self, f: Complex<T>, pivot: &SparseRow<T>) {
        let pw = pivot.window();
        if pw.len() > self.band.len() - self.off {
            self.band.resize(self.off + pw.len(), Complex::zero());
        }
        for (a, p) in self.band[self.off..].iter_mut().zip(pw).skip(1) {
            *a -= f * *p;
        }
        for (a, p) in self.border.iter_mut().zip(&pivot.border) {
            *a -= f * *p;
        }
        self.rhs -= f * pivot.rhs;
        self.advance();
    }

    /// Drops the leading column without elimination (entry already zero).
    fn advance(&mut self) {
        if self.off < self.band.len() {
            self.off += 1;
        }
        self.lo += 1;
    }
}

fn solve_structured<T: Real>(jac: &BlockJacobian<T>, rhs: &[Complex<T>], threads: usize) -> Result<LinearSolution<T>> {
    let (d, m) = (jac.d, jac.m);
    let nb = (d - 1) * m;
    let nborder = m + 1;

    // Assemble sparse rows. Band window of component c is [c m, (c + 1) m).
    let mut rows: Vec<SparseRow<T>> = Vec::with_capacity(d * m + 1);
    rows.push(SparseRow::new(0, jac.phase.clone(), vec![Complex::zero(); nborder], rhs[0]));
    for b in 0..d {
        let nxt = (b + 1) % d;
        for i in 0..m {
            let mut border = vec![Complex::zero(); nborder];
            let (lo, band) = if b + 1 < d - 1 {
                let mut band = jac.diag[b].row(i).to_vec();
                band.extend_from_slice(jac.next[b].row(i));
                (b * m, band)
            } else if b + 1 == d - 1 {
                for (k, v) in jac.next[b].row(i).iter().enumerate() {
                    border[k] += *v;
                }
                (b * m, jac.diag[b].row(i).to_vec())
            } else {
                // Closing block: diag on the border component, next on component 0.
                for (k, v) in jac.diag[b].row(i).iter().enumerate() {
                    border[k] += *v;
                }
                border[m] = jac.scalar[i];
                debug_assert_eq!(nxt, 0);
                (0, jac.next[b].row(i).to_vec())
            };
            rows.push(SparseRow::new(lo, band, border, rhs[1 + b * m + i]));
        }
    }

    let mut stats = PivotStats::new();
    let mut active: Vec<usize> = (0..rows.len()).collect();
    let mut pivots: Vec<SparseRow<T>> = Vec::with_capacity(nb);
    for k in 0..nb {
        // Candidates are active rows whose window starts at k.
        let mut best = None;
        let mut best_v = -T::one();
        for (pos, &r) in active.iter().enumerate() {
            if rows[r].lo == k {
                let v = rows[r].at(k).norm();
                if v > best_v {
                    best_v = v;
                    best = Some(pos);
                }
            }
        }
        let pos = best.ok_or(Error::Singular { pivot: k })?;
        check_pivot(best_v, k)?;
        stats.push(best_v);
        let pr = active.swap_remove(pos);
        let pivot = std::mem::replace(
            &mut rows[pr],
            SparseRow::new(usize::MAX, Vec::new(), Vec::new(), Complex::zero()),
        );
        let inv = pivot.window()[0].inv();
        let targets: Vec<usize> = active.iter().copied().filter(|&r| rows[r].lo == k).collect();
        update_rows(&mut rows, &targets, &pivot, inv, threads);
        pivots.push(pivot);
    }

    // Remaining rows only touch the border.
    debug_assert_eq!(active.len(), nborder);
    let mut dense = CMatrix::zeros(nborder, nborder);
    let mut drhs = Vec::with_capacity(nborder);
    for (i, &r) in active.iter().enumerate() {
        debug_assert!(rows[r].lo >= nb);
        dense.row_mut(i).copy_from_slice(&rows[r].border);
        drhs.push(rows[r].rhs);
    }
    let (tail, tail_stats) = dense_kernel(&dense, &drhs)?;
    stats.push(tail_stats.min);
    stats.push(tail_stats.max);

    let mut x = vec![Complex::zero(); d * m + 1];
    for (c, v) in tail.iter().enumerate() {
        x[nb + c] = *v;
    }
    for k in (0..nb).rev() {
        let p = &pivots[k];
        let mut acc = p.rhs;
        let w = p.window();
        for (j, v) in w.iter().enumerate().skip(1) {
            acc -= *v * x[k + j];
        }
        for (c, v) in p.border.iter().enumerate() {
            acc -= *v * x[nb + c];
        }
        x[k] = acc / w[0];
    }
    Ok(LinearSolution { x, pivot_ratio: stats.ratio() })
}

fn update_rows<T: Real>(rows: &mut [SparseRow<T>], targets: &[usize], pivot: &SparseRow<T>, inv: Complex<T>, threads: usize) {
    let apply = |row: &mut SparseRow<T>| {
        let f = row.window().first().copied().unwrap_or_else(Complex::zero) * inv;
        if f.is_zero() {
            row.advance();
        } else {
            row.eliminate(f, pivot);
        }
    };
    if threads <= 1 || targets.len() < 2 * threads {
        for &r in targets {
            apply(&mut rows[r]);
        }
        return;
    }
    // Hand each worker a disjoint set of mutable rows.
    let mut refs: Vec<&mut SparseRow<T>> = Vec::with_capacity(targets.len());
    let mut sorted = targets.to_vec();
    sorted.sort_unstable();
    let mut rest: &mut [SparseRow<T>] = rows;
    let mut offset = 0;
    for r in sorted {
        let (_, tail) = rest.split_at_mut(r - offset);
        let (head, tail) = tail.split_at_mut(1);
        refs.push(&mut head[0]);
        rest = tail;
        offset = r + 1;
    }
    let chunk = refs.len().div_ceil(threads);
    std::thread::scope(|s| {
        for group in refs.chunks_mut(chunk) {
            s.spawn(|| {
                for row in group.iter_mut() {
                    apply(row);
                }
            });
        }
    });
}
