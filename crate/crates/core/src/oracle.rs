//! Independent brute-force implementations used to cross-check the main
//! paths on small instances: the classical plane pentagram map through
//! cross-product line arithmetic, cofactor and fraction-free determinants,
//! Cramer solves, and rank by fraction-free elimination. Nothing here shares
//! pivoting or factorization code with the matrix module.

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::matrix::Mat;
use crate::pentamap::{build_n_matrix, f_column};
use crate::polygon::Chain;

/// Point of the projective plane as a nonzero homogeneous triple.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectivePoint2D<T: Scalar>(pub [T; 3]);

impl<T: Scalar> ProjectivePoint2D<T> {
    pub fn new(x: T, y: T, z: T) -> Result<Self> {
        let p = Self([x, y, z]);
        if p.0.iter().all(Scalar::is_zero) {
            return Err(Error::ZeroInput(0));
        }
        Ok(p)
    }

    /// Representative with the last nonzero coordinate equal to one.
    pub fn normalized(&self) -> Self {
        let i = (0..3).rev().find(|&i| !self.0[i].is_zero()).unwrap();
        let r = self.0[i].recip();
        Self([
            self.0[0].clone() * r.clone(),
            self.0[1].clone() * r.clone(),
            self.0[2].clone() * r,
        ])
    }
}

fn cross<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [
        a[1].clone() * b[2].clone() - a[2].clone() * b[1].clone(),
        a[2].clone() * b[0].clone() - a[0].clone() * b[2].clone(),
        a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone(),
    ]
}

fn triple_mag<T: Scalar>(v: &[T; 3]) -> f64 {
    v.iter().map(Scalar::mag).fold(0.0, f64::max)
}

/// Classical pentagram map on the projective plane: output vertex k is the
/// intersection of the short diagonals (P_k, P_{k+2}) and (P_{k+1}, P_{k+3}),
/// indices mod N, all through homogeneous cross products.
pub fn classical_pentagram_rp2<T: Scalar>(
    points: &[ProjectivePoint2D<T>],
) -> Result<Vec<ProjectivePoint2D<T>>> {
    let big_n = points.len();
    if big_n < 5 {
        return Err(Error::InvalidDims(format!(
            "need at least 5 points, got {big_n}"
        )));
    }
    let at = |k: usize| &points[k % big_n].0;
    (0..big_n)
        .map(|k| {
            let l1 = cross(at(k), at(k + 2));
            let l2 = cross(at(k + 1), at(k + 3));
            let q = cross(&l1, &l2);
            let null = if T::EXACT {
                q.iter().all(Scalar::is_zero)
            } else {
                triple_mag(&q) <= 1e-12 * triple_mag(&l1) * triple_mag(&l2)
            };
            if null {
                return Err(Error::DegenerateDiagonals { index: k });
            }
            Ok(ProjectivePoint2D(q))
        })
        .collect()
}

/// Determinant by first-row cofactor expansion; factorial cost, usable only
/// on small matrices.
fn cofactor_det<T: Scalar>(a: &Mat<T>) -> T {
    let d = a.rows();
    if d == 0 {
        return T::one();
    }
    if d == 1 {
        return a.at(0, 0).clone();
    }
    let mut acc = T::zero();
    for j in 0..d {
        if a.at(0, j).is_zero() {
            continue;
        }
        let minor = Mat::from_fn(d - 1, d - 1, |r, c| {
            a.at(r + 1, if c < j { c } else { c + 1 }).clone()
        });
        let term = a.at(0, j).clone() * cofactor_det(&minor);
        acc = if j % 2 == 0 { acc + term } else { acc - term };
    }
    acc
}

/// Determinant by single-step fraction-free elimination: every division is
/// exact over an exact backend, so no rational normalization is needed.
fn bareiss_det<T: Scalar>(a: &Mat<T>) -> T {
    let d = a.rows();
    if d == 0 {
        return T::one();
    }
    let mut m = a.clone();
    let mut prev = T::one();
    let mut negated = false;
    for k in 0..d - 1 {
        let pivot = (k..d).find(|&r| !m.at(r, k).is_zero());
        let Some(p) = pivot else {
            return T::zero();
        };
        if p != k {
            for j in 0..d {
                let tmp = m.at(k, j).clone();
                *m.at_mut(k, j) = m.at(p, j).clone();
                *m.at_mut(p, j) = tmp;
            }
            negated = !negated;
        }
        for i in k + 1..d {
            for j in k + 1..d {
                let num = m.at(k, k).clone() * m.at(i, j).clone()
                    - m.at(i, k).clone() * m.at(k, j).clone();
                *m.at_mut(i, j) = num / prev.clone();
            }
            *m.at_mut(i, k) = T::zero();
        }
        prev = m.at(k, k).clone();
    }
    let det = m.at(d - 1, d - 1).clone();
    if negated {
        -det
    } else {
        det
    }
}

/// Exact determinant: cofactor expansion up to size six, fraction-free
/// elimination beyond.
pub fn exact_det<T: Scalar>(a: &Mat<T>) -> T {
    assert!(a.is_square());
    if a.rows() <= 6 {
        cofactor_det(a)
    } else {
        bareiss_det(a)
    }
}

/// Rank by fraction-free elimination with exact zero tests.
pub fn exact_rank<T: Scalar>(a: &Mat<T>) -> usize {
    let (rows, cols) = (a.rows(), a.cols());
    let mut m = a.clone();
    let mut prev = T::one();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !m.at(r, c).is_zero()) else {
            continue;
        };
        if p != rank {
            for j in 0..cols {
                let tmp = m.at(rank, j).clone();
                *m.at_mut(rank, j) = m.at(p, j).clone();
                *m.at_mut(p, j) = tmp;
            }
        }
        for i in rank + 1..rows {
            for j in c + 1..cols {
                let num = m.at(rank, c).clone() * m.at(i, j).clone()
                    - m.at(i, c).clone() * m.at(rank, j).clone();
                *m.at_mut(i, j) = num / prev.clone();
            }
            *m.at_mut(i, c) = T::zero();
        }
        prev = m.at(rank, c).clone();
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Exact linear solve by Cramer's rule: component i of the solution is the
/// determinant of A with column i replaced by b, over det A.
pub fn cramer_solve<T: Scalar>(a: &Mat<T>, b: &[T]) -> Result<Vec<T>> {
    assert!(a.is_square());
    assert_eq!(a.rows(), b.len());
    let det = exact_det(a);
    if det.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let inv = det.recip();
    Ok((0..a.cols())
        .map(|i| {
            let ai = Mat::from_fn(a.rows(), a.cols(), |r, c| {
                if c == i {
                    b[r].clone()
                } else {
                    a.at(r, c).clone()
                }
            });
            exact_det(&ai) * inv.clone()
        })
        .collect())
}

/// The image invariants of the map computed column by column through
/// Cramer's rule instead of the factorized solve.
pub fn cramer_map_coefficients<T: Scalar>(chain: &Chain<T>) -> Result<Chain<T>> {
    let (n, m, big_n) = (chain.n, chain.m, chain.big_n);
    let mut a = Vec::with_capacity(big_n);
    for k in 0..big_n {
        let nk = build_n_matrix(chain, k);
        let rhs = f_column(chain, k, m);
        let mut sol = Mat::zeros(m * n, n);
        for j in 0..n {
            let b: Vec<T> = (0..m * n).map(|r| rhs.at(r, j).clone()).collect();
            let col = cramer_solve(&nk, &b)?;
            for (r, v) in col.into_iter().enumerate() {
                *sol.at_mut(r, j) = v;
            }
        }
        a.push((0..m).map(|i| sol.block(i * n, 0, n, n)).collect());
    }
    Chain::new(n, m, big_n, a)
}
