//! Twisted polygons in Gr(n, mn) and their moduli coordinates.
//!
//! A twisted N-gon is stored as lifts `X_0..X_{N-1}` (each mn x n) plus a
//! monodromy `M`; indices outside `0..N` resolve through `X_{k+N} = M X_k`
//! and are never materialized. The frame at k is
//! `rho_k = (X_k | ... | X_{k+m-1})`, regularity means every frame is
//! invertible, and the moduli coordinates are the blocks `a_k^i` solving
//! `X_{k+m} = sum_i X_{k+i} a_k^i`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::matrix::Mat;

#[derive(Clone, Debug)]
pub struct Lift<T> {
    pub n: usize,
    pub m: usize,
    pub big_n: usize,
    pub x: Vec<Mat<T>>,
    pub monodromy: Mat<T>,
}

#[derive(Clone, Debug)]
pub struct Chain<T> {
    pub n: usize,
    pub m: usize,
    pub big_n: usize,
    /// a[k][i] is the coefficient of X_{k+i} in the expansion of X_{k+m}.
    pub a: Vec<Vec<Mat<T>>>,
}

/// Sign relating det Q_k to det a_k^0: the block-column cycling that brings
/// the companion matrix to triangular form contributes (-1)^((m-1)n).
pub fn q_det_sign(n: usize, m: usize) -> i64 {
    if ((m - 1) * n) % 2 == 0 {
        1
    } else {
        -1
    }
}

impl<T: Scalar> Lift<T> {
    pub fn new(n: usize, m: usize, big_n: usize, x: Vec<Mat<T>>, monodromy: Mat<T>) -> Result<Self> {
        if n < 1 || m < 3 || big_n < 1 {
            return Err(Error::InvalidDims(format!(
                "need n >= 1, m >= 3, N >= 1, got n={n}, m={m}, N={big_n}"
            )));
        }
        if x.len() != big_n {
            return Err(Error::InvalidDims(format!(
                "expected {big_n} lift blocks, got {}",
                x.len()
            )));
        }
        let q = m * n;
        for (k, xk) in x.iter().enumerate() {
            if xk.rows() != q || xk.cols() != n {
                return Err(Error::InvalidDims(format!(
                    "lift block {k} is {}x{}, expected {q}x{n}",
                    xk.rows(),
                    xk.cols()
                )));
            }
        }
        if monodromy.rows() != q || monodromy.cols() != q {
            return Err(Error::InvalidDims(format!(
                "monodromy is {}x{}, expected {q}x{q}",
                monodromy.rows(),
                monodromy.cols()
            )));
        }
        Ok(Lift {
            n,
            m,
            big_n,
            x,
            monodromy,
        })
    }

    /// X_k for any index, applying the monodromy as many times as needed.
    pub fn x_at(&self, k: usize) -> Mat<T> {
        let wraps = k / self.big_n;
        let base = self.x[k % self.big_n].clone();
        if wraps == 0 {
            return base;
        }
        let mut m_pow = self.monodromy.clone();
        for _ in 1..wraps {
            m_pow = m_pow.mul(&self.monodromy);
        }
        m_pow.mul(&base)
    }

    /// Frame rho_k = (X_k | X_{k+1} | ... | X_{k+m-1}).
    pub fn rho(&self, k: usize) -> Mat<T> {
        let cols: Vec<Mat<T>> = (k..k + self.m).map(|j| self.x_at(j)).collect();
        Mat::hstack(&cols)
    }

    /// Right action of a closed GL(n) polygon on the lifts; the monodromy
    /// and the underlying Grassmannian polygon are untouched.
    pub fn right_gauged(&self, d: &[Mat<T>]) -> Lift<T> {
        assert_eq!(d.len(), self.big_n);
        let x = self
            .x
            .iter()
            .zip(d)
            .map(|(xk, dk)| xk.mul(dk))
            .collect();
        Lift {
            n: self.n,
            m: self.m,
            big_n: self.big_n,
            x,
            monodromy: self.monodromy.clone(),
        }
    }
}

impl<T: Scalar> Chain<T> {
    pub fn new(n: usize, m: usize, big_n: usize, a: Vec<Vec<Mat<T>>>) -> Result<Self> {
        if n < 1 || m < 3 || big_n < 1 {
            return Err(Error::InvalidDims(format!(
                "need n >= 1, m >= 3, N >= 1, got n={n}, m={m}, N={big_n}"
            )));
        }
        if a.len() != big_n || a.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidDims(format!(
                "expected {big_n} rows of {m} blocks"
            )));
        }
        for row in &a {
            for b in row {
                if b.rows() != n || b.cols() != n {
                    return Err(Error::InvalidDims(format!(
                        "block is {}x{}, expected {n}x{n}",
                        b.rows(),
                        b.cols()
                    )));
                }
            }
        }
        Ok(Chain { n, m, big_n, a })
    }

    /// a_k^i with k reduced mod N.
    pub fn block(&self, k: usize, i: usize) -> &Mat<T> {
        &self.a[k % self.big_n][i]
    }

    /// Companion-block matrix Q_k: identity blocks on the subdiagonal, the
    /// blocks a_k^0..a_k^{m-1} stacked in the last block-column, so that
    /// rho_{k+1} = rho_k Q_k.
    pub fn q(&self, k: usize) -> Mat<T> {
        let (n, m) = (self.n, self.m);
        let mut q = Mat::zeros(m * n, m * n);
        for j in 0..m - 1 {
            q.set_block((j + 1) * n, j * n, &Mat::identity(n));
        }
        for i in 0..m {
            q.set_block(i * n, (m - 1) * n, self.block(k, i));
        }
        q
    }

    /// Q_k Q_{k+1} ... Q_{k+len-1}.
    pub fn q_product(&self, k: usize, len: usize) -> Mat<T> {
        let mut p = Mat::identity(self.m * self.n);
        for j in 0..len {
            p = p.mul(&self.q(k + j));
        }
        p
    }

    /// Monodromy representative Q_0 Q_1 ... Q_{N-1} (the rho_0 = I choice);
    /// only its conjugation class is well-defined.
    pub fn monodromy(&self) -> Mat<T> {
        self.q_product(0, self.big_n)
    }
}

/// Whether every frame determinant clears the relative threshold, together
/// with the raw minimum |det rho_k| over one period.
pub fn is_regular<T: Scalar>(lift: &Lift<T>, reltol: f64) -> (bool, f64) {
    let mut ok = true;
    let mut min_det = f64::INFINITY;
    for k in 0..lift.big_n {
        let rho = lift.rho(k);
        let mag = rho.det().mag();
        min_det = min_det.min(mag);
        let pass = if T::EXACT {
            mag != 0.0
        } else {
            rho.det_rel_mag() > reltol
        };
        ok &= pass;
    }
    (ok, min_det)
}

/// Solves rho_k * col(a_k^0..a_k^{m-1}) = X_{k+m} for every k.
pub fn extract_invariants<T: Scalar>(lift: &Lift<T>, reltol: f64) -> Result<Chain<T>> {
    let (n, m) = (lift.n, lift.m);
    let mut a = Vec::with_capacity(lift.big_n);
    for k in 0..lift.big_n {
        let rho = lift.rho(k);
        let det_mag = rho.det().mag();
        let pass = if T::EXACT {
            det_mag != 0.0
        } else {
            rho.det_rel_mag() > reltol
        };
        if !pass {
            return Err(Error::NotRegular { index: k, det_mag });
        }
        let stacked = rho.solve(&lift.x_at(k + m))?;
        let row: Vec<Mat<T>> = (0..m).map(|i| stacked.block(i * n, 0, n, n)).collect();
        a.push(row);
    }
    Chain::new(n, m, lift.big_n, a)
}

/// Rebuilds a lift from its invariants and a choice of initial frame:
/// X_k is the first block-column of rho_k = rho0 Q_0...Q_{k-1}, and the
/// monodromy is rho0 (Q_0...Q_{N-1}) rho0^{-1}.
pub fn reconstruct_lift<T: Scalar>(chain: &Chain<T>, rho0: &Mat<T>) -> Result<Lift<T>> {
    let (n, m, big_n) = (chain.n, chain.m, chain.big_n);
    let q = m * n;
    if rho0.rows() != q || rho0.cols() != q {
        return Err(Error::InvalidDims(format!(
            "initial frame is {}x{}, expected {q}x{q}",
            rho0.rows(),
            rho0.cols()
        )));
    }
    let singular = if T::EXACT {
        rho0.det().is_zero()
    } else {
        rho0.det_rel_mag() <= 1e-12
    };
    if singular {
        return Err(Error::SingularFrame);
    }
    let mut x = Vec::with_capacity(big_n);
    let mut rho = rho0.clone();
    for k in 0..big_n {
        x.push(rho.block(0, 0, q, n));
        rho = rho.mul(&chain.q(k));
    }
    // rho is now rho0 Q_0...Q_{N-1}
    let monodromy = rho.mul(&rho0.inverse()?);
    Lift::new(n, m, big_n, x, monodromy)
}

/// Draws a random regular lift with unimodular monodromy: random invariant
/// blocks and initial frame, with one block column rescaled so that
/// det(Q_0...Q_{N-1}) is exactly one, then rebuilt through the frame
/// recursion. Deterministic for a fixed RNG state.
pub fn random_regular_lift<T: Scalar, R: Rng + ?Sized>(
    n: usize,
    m: usize,
    big_n: usize,
    rng: &mut R,
    reltol: f64,
) -> Result<Lift<T>> {
    if n < 1 || m < 3 || big_n < m || gcd(big_n, m) != 1 {
        return Err(Error::InvalidDims(format!(
            "need n >= 1, m >= 3, N >= m, gcd(N, m) = 1; got n={n}, m={m}, N={big_n}"
        )));
    }
    let q = m * n;
    for _ in 0..100 {
        let mut a: Vec<Vec<Mat<T>>> = (0..big_n)
            .map(|_| {
                (0..m)
                    .map(|_| Mat::from_fn(n, n, |_, _| T::sample_unit(rng)))
                    .collect()
            })
            .collect();
        let rho0 = Mat::from_fn(q, q, |_, _| T::sample_unit(rng));

        let well_conditioned = |mat: &Mat<T>| {
            if T::EXACT {
                !mat.det().is_zero()
            } else {
                mat.det_rel_mag() > 1e-6
            }
        };
        if !well_conditioned(&rho0) || !a.iter().all(|row| well_conditioned(&row[0])) {
            continue;
        }

        // Condition the draw so frames neither grow nor shrink systematically
        // along the period: window each det a_k^0 into [2^(-n/2), 2^(n/2)]
        // (det rho_k then stays near det rho_0) and damp the higher blocks so
        // column norms stay near one per step. Power-of-two factors keep both
        // backends exact.
        let damp_e = (0.24 / ((m - 1) as f64 * (n * n) as f64)).sqrt().log2().round() as i32;
        let damp = pow2::<T>(damp_e.min(-1));
        for row in a.iter_mut() {
            let d = row[0].det().mag();
            if !d.is_finite() {
                continue;
            }
            let e = ((d.log2() / n as f64).round() as i32).clamp(-4096, 4096);
            row[0] = row[0].scale(&pow2::<T>(-e));
            for block in row.iter_mut().skip(1) {
                *block = block.scale(&damp);
            }
        }

        // det Q_k = sign * det a_k^0; rescale one column of the last a^0 so
        // the product of all det Q_k (hence det M) is exactly one.
        let sign = T::from_i64(q_det_sign(n, m));
        let mut total = T::one();
        for row in &a {
            total = total * sign.clone() * row[0].det();
        }
        let fix = total.recip();
        for r in 0..n {
            let v = a[big_n - 1][0].at(r, 0).clone() * fix.clone();
            *a[big_n - 1][0].at_mut(r, 0) = v;
        }

        let chain = Chain::new(n, m, big_n, a)?;
        let lift = reconstruct_lift(&chain, &rho0)?;
        if is_regular(&lift, reltol).0 {
            return Ok(lift);
        }
    }
    Err(Error::GenerationFailed { attempts: 100 })
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// 2^e as a scalar; exact in both backends.
fn pow2<T: Scalar>(e: i32) -> T {
    let base = if e >= 0 {
        T::from_i64(2)
    } else {
        T::from_i64(2).recip()
    };
    let mut v = T::one();
    for _ in 0..e.unsigned_abs() {
        v = v.clone() * base.clone();
    }
    v
}

/// Largest relative block distance between two chains of equal shape.
pub fn chain_rel_dist<T: Scalar>(lhs: &Chain<T>, rhs: &Chain<T>) -> f64 {
    assert_eq!((lhs.n, lhs.m, lhs.big_n), (rhs.n, rhs.m, rhs.big_n));
    let mut worst = 0.0f64;
    for k in 0..lhs.big_n {
        for i in 0..lhs.m {
            worst = worst.max(crate::matrix::rel_dist(lhs.block(k, i), rhs.block(k, i)));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_EPS;
    use num::complex::Complex64;
    use num::{BigInt, BigRational};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn ratio(p: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(p))
    }

    #[test]
    fn companion_layout_n1_m3() {
        let a = vec![vec![
            Mat::from_rows(vec![vec![c(1.0)]]),
            Mat::from_rows(vec![vec![c(2.0)]]),
            Mat::from_rows(vec![vec![c(3.0)]]),
        ]];
        let chain = Chain::new(1, 3, 1, a).unwrap();
        let q = chain.q(0);
        let expected = Mat::from_rows(vec![
            vec![c(0.0), c(0.0), c(1.0)],
            vec![c(1.0), c(0.0), c(2.0)],
            vec![c(0.0), c(1.0), c(3.0)],
        ]);
        assert_eq!(q, expected);
    }

    #[test]
    fn q_det_sign_matches_direct_determinant() {
        for (n, m) in [(1, 3), (1, 4), (2, 3), (2, 4), (1, 5), (3, 4)] {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let a = vec![(0..m)
                .map(|_| Mat::from_fn(n, n, |_, _| Complex64::sample_unit(&mut rng)))
                .collect::<Vec<_>>()];
            let chain = Chain::new(n, m, 1, a).unwrap();
            let dq = chain.q(0).det();
            let da = chain.block(0, 0).det() * c(q_det_sign(n, m) as f64);
            assert!(
                (dq - da).norm() < 1e-12 * da.norm().max(1.0),
                "sign law failed for n={n}, m={m}"
            );
        }
    }

    #[test]
    fn single_gon_monodromy_is_q0() {
        let a = vec![vec![
            Mat::from_rows(vec![vec![ratio(1)]]),
            Mat::from_rows(vec![vec![ratio(0)]]),
            Mat::from_rows(vec![vec![ratio(0)]]),
        ]];
        let chain = Chain::new(1, 3, 1, a).unwrap();
        assert_eq!(chain.monodromy(), chain.q(0));
    }

    #[test]
    fn cyclic_chain_monodromy_wraps() {
        // a_k = (1, 0, 0) makes Q the cyclic shift with Q^3 = I, so the
        // product of four copies is Q again.
        let row = vec![
            Mat::from_rows(vec![vec![ratio(1)]]),
            Mat::from_rows(vec![vec![ratio(0)]]),
            Mat::from_rows(vec![vec![ratio(0)]]),
        ];
        let chain = Chain::new(1, 3, 4, vec![row; 4]).unwrap();
        assert_eq!(chain.monodromy(), chain.q(0));
    }

    #[test]
    fn reconstruct_expands_unit_invariants() {
        let row = vec![
            Mat::from_rows(vec![vec![ratio(1)]]),
            Mat::from_rows(vec![vec![ratio(1)]]),
            Mat::from_rows(vec![vec![ratio(1)]]),
        ];
        let other = vec![
            Mat::from_rows(vec![vec![ratio(2)]]),
            Mat::from_rows(vec![vec![ratio(1)]]),
            Mat::from_rows(vec![vec![ratio(3)]]),
        ];
        let chain = Chain::new(1, 3, 4, vec![row, other.clone(), other.clone(), other]).unwrap();
        let lift = reconstruct_lift(&chain, &Mat::identity(3)).unwrap();
        assert_eq!(*lift.x[0].at(0, 0), ratio(1));
        assert_eq!(*lift.x[3].at(0, 0), ratio(1));
        assert_eq!(*lift.x[3].at(1, 0), ratio(1));
        assert_eq!(*lift.x[3].at(2, 0), ratio(1));
    }

    #[test]
    fn invariants_round_trip_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let lift = random_regular_lift::<BigRational, _>(2, 3, 5, &mut rng, DEFAULT_EPS).unwrap();
        let chain = extract_invariants(&lift, DEFAULT_EPS).unwrap();
        let rebuilt = reconstruct_lift(&chain, &lift.rho(0)).unwrap();
        for k in 0..5 {
            assert_eq!(lift.x[k], rebuilt.x[k], "lift block {k} differs");
        }
        assert_eq!(lift.monodromy, rebuilt.monodromy);
    }

    #[test]
    fn generator_is_seed_deterministic_and_unimodular() {
        let mut r1 = ChaCha8Rng::seed_from_u64(42);
        let mut r2 = ChaCha8Rng::seed_from_u64(42);
        let l1 = random_regular_lift::<Complex64, _>(1, 3, 5, &mut r1, DEFAULT_EPS).unwrap();
        let l2 = random_regular_lift::<Complex64, _>(1, 3, 5, &mut r2, DEFAULT_EPS).unwrap();
        for k in 0..5 {
            assert_eq!(l1.x[k], l2.x[k]);
        }
        assert!((l1.monodromy.det() - c(1.0)).norm() < 1e-10);
        assert!(is_regular(&l1, DEFAULT_EPS).0);
    }

    #[test]
    fn rational_generator_monodromy_det_is_exactly_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lift = random_regular_lift::<BigRational, _>(2, 4, 7, &mut rng, DEFAULT_EPS).unwrap();
        assert_eq!(lift.monodromy.det(), ratio(1));
        let (ok, min_det) = is_regular(&lift, DEFAULT_EPS);
        assert!(ok);
        assert!(min_det > 0.0);
    }

    #[test]
    fn generator_rejects_non_coprime() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = random_regular_lift::<Complex64, _>(1, 3, 6, &mut rng, DEFAULT_EPS).unwrap_err();
        assert!(matches!(err, Error::InvalidDims(_)));
    }

    #[test]
    fn repeated_lift_column_is_irregular() {
        let e1 = Mat::from_rows(vec![vec![c(1.0)], vec![c(0.0)], vec![c(0.0)]]);
        let e2 = Mat::from_rows(vec![vec![c(0.0)], vec![c(1.0)], vec![c(0.0)]]);
        let lift = Lift::new(
            1,
            3,
            4,
            vec![e1.clone(), e2.clone(), e1.clone(), e2],
            Mat::identity(3),
        )
        .unwrap();
        let (ok, min_det) = is_regular(&lift, DEFAULT_EPS);
        assert!(!ok);
        assert!(min_det < 1e-15);
    }

    #[test]
    fn gauge_action_transforms_invariants_by_conjugation_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lift = random_regular_lift::<Complex64, _>(2, 3, 5, &mut rng, DEFAULT_EPS).unwrap();
        let d: Vec<Mat<Complex64>> = (0..5)
            .map(|_| {
                // diagonal-dominant so inverses stay tame
                let mut g = Mat::from_fn(2, 2, |_, _| Complex64::sample_unit(&mut rng));
                *g.at_mut(0, 0) += c(3.0);
                *g.at_mut(1, 1) += c(3.0);
                g
            })
            .collect();
        let gauged = lift.right_gauged(&d);
        let base = extract_invariants(&lift, DEFAULT_EPS).unwrap();
        let moved = extract_invariants(&gauged, DEFAULT_EPS).unwrap();
        for k in 0..5 {
            for i in 0..3 {
                let expected = d[(k + i) % 5]
                    .inverse()
                    .unwrap()
                    .mul(base.block(k, i))
                    .mul(&d[(k + 3) % 5]);
                assert!(
                    crate::matrix::rel_dist(&expected, moved.block(k, i)) < 1e-9,
                    "gauge rule failed at k={k}, i={i}"
                );
            }
        }
    }
}
