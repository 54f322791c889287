//! Dense matrices over a [`Scalar`] backend.
//!
//! Sizes here are tiny (mn rarely exceeds 12), so everything is plain
//! Gaussian elimination with partial pivoting. On the exact backend the pivot
//! tests are exact zero tests and every result is exact.

use crate::error::{Error, Result};
use crate::field::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_flat(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "flat data length mismatch");
        Mat { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut T {
        &mut self.data[r * self.cols + c]
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn transpose(&self) -> Mat<T> {
        Mat::from_fn(self.cols, self.rows, |r, c| self.at(c, r).clone())
    }

    pub fn add(&self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat::from_fn(self.rows, self.cols, |r, c| {
            self.at(r, c).clone() + rhs.at(r, c).clone()
        })
    }

    pub fn sub(&self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat::from_fn(self.rows, self.cols, |r, c| {
            self.at(r, c).clone() - rhs.at(r, c).clone()
        })
    }

    pub fn neg(&self) -> Mat<T> {
        Mat::from_fn(self.rows, self.cols, |r, c| -self.at(r, c).clone())
    }

    pub fn scale(&self, s: &T) -> Mat<T> {
        Mat::from_fn(self.rows, self.cols, |r, c| {
            self.at(r, c).clone() * s.clone()
        })
    }

    pub fn mul(&self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in mul");
        let mut out: Mat<T> = Mat::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k).clone();
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let cur = out.at(r, c).clone();
                    *out.at_mut(r, c) = cur + a.clone() * rhs.at(k, c).clone();
                }
            }
        }
        out
    }

    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Mat<T> {
        assert!(r0 + nr <= self.rows && c0 + nc <= self.cols);
        Mat::from_fn(nr, nc, |r, c| self.at(r0 + r, c0 + c).clone())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Mat<T>) {
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols);
        for r in 0..b.rows {
            for c in 0..b.cols {
                *self.at_mut(r0 + r, c0 + c) = b.at(r, c).clone();
            }
        }
    }

    pub fn hstack(parts: &[Mat<T>]) -> Mat<T> {
        assert!(!parts.is_empty());
        let rows = parts[0].rows;
        assert!(parts.iter().all(|p| p.rows == rows));
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut out = Mat::zeros(rows, cols);
        let mut c0 = 0;
        for p in parts {
            out.set_block(0, c0, p);
            c0 += p.cols;
        }
        out
    }

    /// Largest entry magnitude; the scale for relative thresholds.
    pub fn max_mag(&self) -> f64 {
        self.data.iter().map(|v| v.mag()).fold(0.0, f64::max)
    }

    pub fn fro_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|v| {
                let m = v.mag();
                m * m
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Product of column Euclidean norms: the Hadamard bound on |det|.
    pub fn hadamard_bound(&self) -> f64 {
        (0..self.cols)
            .map(|c| {
                (0..self.rows)
                    .map(|r| {
                        let m = self.at(r, c).mag();
                        m * m
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .product()
    }

    /// |det| relative to the Hadamard column-norm bound, evaluated in log
    /// space so large scales cannot overflow. Lies in [0, 1], reaching 1 on
    /// orthogonal columns; this is the scale-invariant singularity measure
    /// used for regularity decisions.
    pub fn det_rel_mag(&self) -> f64 {
        let d = self.det().mag();
        if d == 0.0 {
            return 0.0;
        }
        let mut log_bound = 0.0;
        for c in 0..self.cols {
            let norm = (0..self.rows)
                .map(|r| {
                    let m = self.at(r, c).mag();
                    m * m
                })
                .sum::<f64>()
                .sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            log_bound += norm.ln();
        }
        (d.ln() - log_bound).exp()
    }

    pub fn det(&self) -> T {
        assert!(self.is_square(), "determinant of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = T::one();
        for col in 0..n {
            let Some(p) = pivot_row(&a, col, col) else {
                return T::zero();
            };
            if p != col {
                swap_rows(&mut a, p, col);
                det = -det;
            }
            let pivot = a.at(col, col).clone();
            det = det * pivot.clone();
            let inv = pivot.recip();
            for r in col + 1..n {
                let factor = a.at(r, col).clone() * inv.clone();
                if factor.is_zero() {
                    continue;
                }
                for c in col..n {
                    let v = a.at(r, c).clone() - factor.clone() * a.at(col, c).clone();
                    *a.at_mut(r, c) = v;
                }
            }
        }
        det
    }

    /// Solves `self * X = rhs` for (possibly multi-column) `rhs`.
    pub fn solve(&self, rhs: &Mat<T>) -> Result<Mat<T>> {
        assert!(self.is_square());
        assert_eq!(self.rows, rhs.rows);
        let n = self.rows;
        let p = rhs.cols;
        let mut a = self.clone();
        let mut b = rhs.clone();
        let scale = self.max_mag();
        let floor = pivot_floor::<T>(scale);
        for col in 0..n {
            let piv = pivot_row(&a, col, col).ok_or(Error::SingularMatrix)?;
            if a.at(piv, col).mag() <= floor {
                return Err(Error::SingularMatrix);
            }
            if piv != col {
                swap_rows(&mut a, piv, col);
                swap_rows(&mut b, piv, col);
            }
            let inv = a.at(col, col).clone().recip();
            for r in col + 1..n {
                let factor = a.at(r, col).clone() * inv.clone();
                if factor.is_zero() {
                    continue;
                }
                for c in col..n {
                    let v = a.at(r, c).clone() - factor.clone() * a.at(col, c).clone();
                    *a.at_mut(r, c) = v;
                }
                for c in 0..p {
                    let v = b.at(r, c).clone() - factor.clone() * b.at(col, c).clone();
                    *b.at_mut(r, c) = v;
                }
            }
        }
        let mut x: Mat<T> = Mat::zeros(n, p);
        for c in 0..p {
            for r in (0..n).rev() {
                let mut acc = b.at(r, c).clone();
                for k in r + 1..n {
                    acc = acc - a.at(r, k).clone() * x.at(k, c).clone();
                }
                *x.at_mut(r, c) = acc * a.at(r, r).clone().recip();
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<Mat<T>> {
        self.solve(&Mat::identity(self.rows))
    }

    /// Integer power; negative exponents go through the inverse.
    pub fn pow(&self, e: i64) -> Result<Mat<T>> {
        assert!(self.is_square());
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut out = Mat::identity(self.rows);
        for _ in 0..e.unsigned_abs() {
            out = out.mul(&base);
        }
        Ok(out)
    }

    /// Rank with entries below `reltol * max_mag` treated as zero
    /// (exact zero tests on the exact backend).
    pub fn rank(&self, reltol: f64) -> usize {
        self.row_echelon(reltol * self.max_mag().max(f64::MIN_POSITIVE))
            .1
            .len()
    }

    /// Basis of the right kernel, one column per free variable. The basis is
    /// deterministic: free variable j is set to one, pivot variables are
    /// back-substituted.
    pub fn nullspace(&self, reltol: f64) -> Mat<T> {
        self.nullspace_with_scale(reltol, self.max_mag())
    }

    /// Kernel with the zero cutoff taken relative to an externally supplied
    /// scale. Needed when the matrix itself is a residual (for example a
    /// shifted matrix at an eigenvalue) whose own norm is not the right
    /// yardstick.
    pub fn nullspace_with_scale(&self, reltol: f64, scale: f64) -> Mat<T> {
        let (ech, pivots) = self.row_echelon(reltol * scale.max(f64::MIN_POSITIVE));
        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let free_cols: Vec<usize> = (0..self.cols).filter(|c| !pivot_cols.contains(c)).collect();
        let mut basis = Mat::zeros(self.cols, free_cols.len());
        for (bi, &fc) in free_cols.iter().enumerate() {
            *basis.at_mut(fc, bi) = T::one();
            // Walk pivots bottom-up; row r of the echelon form reads
            // x[pc] = -(sum over later columns) for the current basis vector.
            for &(r, pc) in pivots.iter().rev() {
                let mut acc = T::zero();
                for c in pc + 1..self.cols {
                    if c == fc || pivot_cols.contains(&c) {
                        acc = acc + ech.at(r, c).clone() * basis.at(c, bi).clone();
                    }
                }
                if !acc.is_zero() {
                    *basis.at_mut(pc, bi) = -(acc * ech.at(r, pc).clone().recip());
                }
            }
        }
        basis
    }

    /// Row echelon form together with the (row, col) pivot positions.
    /// `abstol` is the absolute magnitude below which entries count as zero.
    fn row_echelon(&self, abstol: f64) -> (Mat<T>, Vec<(usize, usize)>) {
        let mut a = self.clone();
        let cut = if T::EXACT { 0.0 } else { abstol };
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..a.cols {
            if row >= a.rows {
                break;
            }
            let Some(p) = pivot_row(&a, row, col) else {
                continue;
            };
            let pm = a.at(p, col).mag();
            if if T::EXACT { a.at(p, col).is_zero() } else { pm <= cut } {
                continue;
            }
            if p != row {
                swap_rows(&mut a, p, row);
            }
            let inv = a.at(row, col).clone().recip();
            for r in row + 1..a.rows {
                let factor = a.at(r, col).clone() * inv.clone();
                if factor.is_zero() {
                    continue;
                }
                for c in col..a.cols {
                    let v = a.at(r, c).clone() - factor.clone() * a.at(row, c).clone();
                    *a.at_mut(r, c) = v;
                }
                // Elimination residue below the cut is noise; clearing it
                // keeps later pivot choices honest.
                *a.at_mut(r, col) = T::zero();
            }
            pivots.push((row, col));
            row += 1;
        }
        (a, pivots)
    }
}

/// Row index of the largest-magnitude candidate pivot at or below `start`.
fn pivot_row<T: Scalar>(a: &Mat<T>, start: usize, col: usize) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for r in start..a.rows() {
        let m = a.at(r, col).mag();
        if a.at(r, col).is_zero() {
            continue;
        }
        if best.map_or(true, |(_, bm)| m > bm) {
            best = Some((r, m));
        }
    }
    best.map(|(r, _)| r)
}

fn swap_rows<T: Scalar>(a: &mut Mat<T>, r1: usize, r2: usize) {
    if r1 == r2 {
        return;
    }
    for c in 0..a.cols() {
        let tmp = a.at(r1, c).clone();
        *a.at_mut(r1, c) = a.at(r2, c).clone();
        *a.at_mut(r2, c) = tmp;
    }
}

/// Absolute pivot cutoff for `solve`: structural singularity on the exact
/// backend, a deep relative threshold on the floating one.
fn pivot_floor<T: Scalar>(scale: f64) -> f64 {
    if T::EXACT {
        -1.0 // any nonzero pivot passes
    } else {
        1e-13 * scale.max(f64::MIN_POSITIVE)
    }
}

/// Largest entry magnitude of `a - b`, divided by the larger of the two
/// scales (or absolute when both are tiny). The workhorse test metric.
pub fn rel_dist<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> f64 {
    assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()));
    let scale = a.max_mag().max(b.max_mag());
    let diff = a.sub(b).max_mag();
    if scale <= 1.0 {
        diff
    } else {
        diff / scale
    }
}
