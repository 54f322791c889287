//! Canonical gauge fixing for twisted polygons.
//!
//! A lift is only defined up to a right GL(n) action per vertex. This module
//! pins it down in three stages: a determinant gauge delta_k making every
//! frame unimodular, a conjugation gauge d_k diagonalizing the m-products of
//! the a^0 blocks, and a diagonal gauge q_k chosen so the cumulative products
//! of the a^{m-1} blocks satisfy fixed entry relations. The composite
//! lambda_k = d_k q_k sends X_k to the canonical lift V_k = X_k lambda_k.
//!
//! Everything here runs over complex doubles: the conjugation gauge needs
//! eigenvalues, and fractional powers need a branch choice (always principal
//! here). The residual freedom is a root-of-unity diagonal gauge, so tests
//! compare gauge-invariant observables only.

use num::complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::matrix::Mat;
use crate::polygon::{extract_invariants, gcd, q_det_sign, Chain, Lift};
use crate::{eigen, DEFAULT_EPS};

/// Relative eigenvalue separation below which the conjugation gauge is
/// rejected as non-generic.
pub const SEP_REL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct JordanGauge {
    /// B_r: the m-product of the a^0 blocks starting at r.
    pub b: Vec<Mat<Complex64>>,
    /// Common eigenvalue list, sorted lexicographically by (re, im).
    pub j: Vec<Complex64>,
    /// d_r conjugates B_r into diag(j).
    pub d: Vec<Mat<Complex64>>,
}

#[derive(Clone, Debug)]
pub struct GaugeData {
    /// Z_k = det(X_k..X_{k+m-1})^{-1}, the determinant targets.
    pub z: Vec<Complex64>,
    /// delta_k = det lambda_k solving the cyclic window products.
    pub delta: Vec<Complex64>,
    pub d: Vec<Mat<Complex64>>,
    pub q: Vec<Mat<Complex64>>,
    pub lambda: Vec<Mat<Complex64>>,
}

/// Solves prod_{i=k}^{k+m-1} delta_i = Z_k for all k (indices mod N).
///
/// Taking principal logarithms turns this into a circulant linear system
/// with m ones per row, invertible exactly when gcd(N, m) = 1. The branch
/// choice picks one solution among the root-of-unity family; exponentiating
/// back always reproduces Z exactly.
pub fn solve_delta(z: &[Complex64], m: usize) -> Result<Vec<Complex64>> {
    let big_n = z.len();
    if gcd(big_n, m) != 1 {
        return Err(Error::NotCoprime { n_gon: big_n, m });
    }
    for (k, zk) in z.iter().enumerate() {
        if zk.norm() <= 1e-300 {
            return Err(Error::ZeroInput(k));
        }
    }
    let mut circ: Mat<Complex64> = Mat::zeros(big_n, big_n);
    for k in 0..big_n {
        for jj in 0..m {
            *circ.at_mut(k, (k + jj) % big_n) += Complex64::new(1.0, 0.0);
        }
    }
    let rhs = Mat::from_fn(big_n, 1, |r, _| z[r].ln());
    let logs = circ.solve(&rhs)?;
    Ok((0..big_n).map(|k| logs.at(k, 0).exp()).collect())
}

/// Ordered product of every m-th element starting at r: indices r, r+m,
/// r+2m, ... taken mod N, multiplied left to right. When gcd(N, m) = 1 each
/// index appears exactly once.
pub fn m_product<T: Scalar>(seq: &[Mat<T>], m: usize, r: usize) -> Result<Mat<T>> {
    let big_n = seq.len();
    if gcd(big_n, m) != 1 {
        return Err(Error::NotCoprime { n_gon: big_n, m });
    }
    let mut prod = Mat::identity(seq[0].rows());
    for j in 0..big_n {
        prod = prod.mul(&seq[(r + j * m) % big_n]);
    }
    Ok(prod)
}

/// Finds d_r diagonalizing every m-product B_r of the a^0 blocks.
///
/// The eigenvalue order is fixed once on B_0 (lexicographic by (re, im));
/// every other B_r is conjugate to B_0 along the m-step chain, so its
/// eigenvalues are matched to that list rather than re-sorted. Eigenvector
/// columns are scaled so their largest entry is one, which makes the gauge
/// reproducible and the identity on already-diagonal input.
pub fn jordan_gauge(chain: &Chain<Complex64>) -> Result<JordanGauge> {
    let (n, m, big_n) = (chain.n, chain.m, chain.big_n);
    let a0: Vec<Mat<Complex64>> = (0..big_n).map(|k| chain.block(k, 0).clone()).collect();
    let b: Vec<Mat<Complex64>> = (0..big_n)
        .map(|r| m_product(&a0, m, r))
        .collect::<Result<_>>()?;

    let mut j = eigen::eigenvalues(&b[0]);
    j.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap()
            .then(x.im.partial_cmp(&y.im).unwrap())
    });
    let scale = b[0].max_mag().max(f64::MIN_POSITIVE);
    let sep = SEP_REL * scale;
    for p in 0..n {
        for r in p + 1..n {
            if (j[p] - j[r]).norm() < sep {
                return Err(Error::NonGenericGauge(format!(
                    "eigenvalue separation {:.3e} below threshold {:.3e}",
                    (j[p] - j[r]).norm(),
                    sep
                )));
            }
        }
    }

    let mut d = Vec::with_capacity(big_n);
    for (r, br) in b.iter().enumerate() {
        // Match this block's eigenvalues to the reference list; the blocks
        // are all conjugate, so a bijection within the separation gap must
        // exist.
        let evs = eigen::eigenvalues(br);
        let mut matched = vec![None; n];
        let mut used = vec![false; n];
        for ev in &evs {
            let mut best: Option<(usize, f64)> = None;
            for (slot, jv) in j.iter().enumerate() {
                if used[slot] {
                    continue;
                }
                let dist = (ev - jv).norm();
                if best.map_or(true, |(_, bd)| dist < bd) {
                    best = Some((slot, dist));
                }
            }
            match best {
                Some((slot, dist)) if dist < sep / 2.0 => {
                    used[slot] = true;
                    matched[slot] = Some(*ev);
                }
                _ => {
                    return Err(Error::NonGenericGauge(format!(
                        "eigenvalues of block product {r} do not match the reference list"
                    )));
                }
            }
        }
        let mut dr = Mat::zeros(n, n);
        for (slot, ev) in matched.iter().enumerate() {
            let v = eigen::eigenvector_for(br, ev.unwrap())?;
            dr.set_block(0, slot, &v);
        }
        if dr.det_rel_mag() <= 1e-10 {
            return Err(Error::NonGenericGauge(format!(
                "eigenvector matrix for block product {r} is singular"
            )));
        }
        d.push(dr);
    }
    Ok(JordanGauge { b, j, d })
}

/// Completes the gauge with the diagonal factors q_k.
///
/// With b^k the cumulative product of the conjugated a^{m-1} blocks over one
/// period (starting at k-m+1), the entry relations
/// (q^2/q^1)^2 = b_{2,1}/b_{1,2} and q^{i+1}/q^i = (q^2/q^1) b_{1,2}/b_{i,i+1}
/// fix all ratios, and det q_k = delta_k / det d_k fixes the first entry via
/// a principal n-th root.
pub fn syzygy_gauge(
    chain: &Chain<Complex64>,
    jordan: &JordanGauge,
    delta: &[Complex64],
) -> Result<GaugeData> {
    let (n, m, big_n) = (chain.n, chain.m, chain.big_n);
    assert_eq!(delta.len(), big_n);
    let d_inv: Vec<Mat<Complex64>> = jordan
        .d
        .iter()
        .map(|dk| dk.inverse())
        .collect::<Result<_>>()?;
    // Conjugated last blocks: b_j = d_{j+m-1}^{-1} a_j^{m-1} d_{j+m}.
    let last: Vec<Mat<Complex64>> = (0..big_n)
        .map(|jj| {
            d_inv[(jj + m - 1) % big_n]
                .mul(chain.block(jj, m - 1))
                .mul(&jordan.d[(jj + m) % big_n])
        })
        .collect();

    let mut q = Vec::with_capacity(big_n);
    for k in 0..big_n {
        let start = (k + big_n - ((m - 1) % big_n)) % big_n;
        let mut bk = Mat::identity(n);
        for t in 0..big_n {
            bk = bk.mul(&last[(start + t) % big_n]);
        }
        let scale = bk.max_mag().max(f64::MIN_POSITIVE);
        let need = |v: Complex64, what: &str| -> Result<Complex64> {
            if v.norm() <= DEFAULT_EPS * scale {
                Err(Error::DegenerateSyzygy(format!(
                    "entry {what} of cumulative product {k} vanishes"
                )))
            } else {
                Ok(v)
            }
        };

        // ratios[i] = q^{i+2} / q^{i+1} (zero-based over the n-1 gaps)
        let mut ratios = Vec::with_capacity(n.saturating_sub(1));
        if n >= 2 {
            let b12 = need(*bk.at(0, 1), "(1,2)")?;
            let b21 = need(*bk.at(1, 0), "(2,1)")?;
            let r2 = (b21 / b12).sqrt();
            ratios.push(r2);
            for i in 1..n - 1 {
                let bii = need(*bk.at(i, i + 1), "superdiagonal")?;
                ratios.push(r2 * b12 / bii);
            }
        }
        // Cumulative products give q^i up to the common factor q^1, then the
        // determinant target pins q^1 itself.
        let mut rel = Vec::with_capacity(n);
        let mut acc = Complex64::new(1.0, 0.0);
        rel.push(acc);
        for r in &ratios {
            acc *= r;
            rel.push(acc);
        }
        let rel_prod: Complex64 = rel.iter().product();
        let det_target = delta[k] / jordan.d[k].det();
        let q1 = (det_target / rel_prod).powf(1.0 / n as f64);
        let mut qk = Mat::zeros(n, n);
        for (i, ri) in rel.iter().enumerate() {
            *qk.at_mut(i, i) = q1 * ri;
        }
        q.push(qk);
    }

    let lambda: Vec<Mat<Complex64>> = (0..big_n).map(|k| jordan.d[k].mul(&q[k])).collect();
    // Window products of delta; normalize_lift replaces this with the true
    // Z of the lift it was called on.
    let z = (0..big_n)
        .map(|k| (0..m).map(|i| delta[(k + i) % big_n]).product())
        .collect();
    Ok(GaugeData {
        z,
        delta: delta.to_vec(),
        d: jordan.d.clone(),
        q,
        lambda,
    })
}

/// Invariants transform per gauge rule a_k^i = lambda_{k+i}^{-1} a_k^i
/// lambda_{k+m}; cheaper and sharper than re-extracting from the gauged
/// lift.
fn gauged_chain(raw: &Chain<Complex64>, lambda: &[Mat<Complex64>]) -> Result<Chain<Complex64>> {
    let (n, m, big_n) = (raw.n, raw.m, raw.big_n);
    let lam_inv: Vec<Mat<Complex64>> = lambda.iter().map(|l| l.inverse()).collect::<Result<_>>()?;
    let mut a = Vec::with_capacity(big_n);
    for k in 0..big_n {
        let row: Vec<Mat<Complex64>> = (0..m)
            .map(|i| {
                lam_inv[(k + i) % big_n]
                    .mul(raw.block(k, i))
                    .mul(&lambda[(k + m) % big_n])
            })
            .collect();
        a.push(row);
    }
    Chain::new(n, m, big_n, a)
}

/// Full gauge pipeline: determinant targets, conjugation gauge, diagonal
/// gauge. Returns the canonical lift V_k = X_k lambda_k, its invariant
/// chain, and the gauge that produced it. The monodromy is untouched.
pub fn normalize_lift(
    lift: &Lift<Complex64>,
    eps: f64,
) -> Result<(Lift<Complex64>, Chain<Complex64>, GaugeData)> {
    let (_, m, big_n) = (lift.n, lift.m, lift.big_n);
    let raw = extract_invariants(lift, eps)?;
    let z: Vec<Complex64> = (0..big_n).map(|k| lift.rho(k).det().recip()).collect();
    let delta = solve_delta(&z, m)?;
    let jordan = jordan_gauge(&raw)?;
    let mut gauge = syzygy_gauge(&raw, &jordan, &delta)?;
    gauge.z = z;

    let v = lift.right_gauged(&gauge.lambda);
    let chain = gauged_chain(&raw, &gauge.lambda)?;
    Ok((v, chain, gauge))
}

/// Gauge-fixes a raw invariant chain in place of a lift. The caller fixes
/// the frame convention through frame0_det = det rho_0; every other frame
/// determinant is then the running product of det Q_j = sign * det a_j^0,
/// so the determinant targets come straight from the chain. Sharper than
/// materializing a lift and re-extracting, whose mn-by-mn frames lose rank
/// numerically once the unpinned block determinants drift over a few
/// iterations of the map.
pub fn normalize_chain(
    raw: &Chain<Complex64>,
    frame0_det: Complex64,
) -> Result<(Chain<Complex64>, GaugeData)> {
    let (n, m, big_n) = (raw.n, raw.m, raw.big_n);
    let sign = Complex64::new(q_det_sign(n, m) as f64, 0.0);
    let mut z = Vec::with_capacity(big_n);
    let mut running = frame0_det;
    for k in 0..big_n {
        z.push(running.recip());
        running *= sign * raw.block(k, 0).det();
    }
    let delta = solve_delta(&z, m)?;
    let jordan = jordan_gauge(raw)?;
    let mut gauge = syzygy_gauge(raw, &jordan, &delta)?;
    gauge.z = z;
    let chain = gauged_chain(raw, &gauge.lambda)?;
    Ok((chain, gauge))
}

/// Largest deviation of the cumulative a^{m-1} products from the pinned
/// entry relations: on a normalized chain every superdiagonal entry of the
/// cumulative product equals its (2,1) entry. Returns 0 for n = 1.
pub fn syzygy_residual(chain: &Chain<Complex64>) -> f64 {
    let (n, m, big_n) = (chain.n, chain.m, chain.big_n);
    if n < 2 {
        return 0.0;
    }
    let mut worst = 0.0f64;
    for k in 0..big_n {
        let start = (k + big_n - ((m - 1) % big_n)) % big_n;
        let mut p = Mat::identity(n);
        for t in 0..big_n {
            p = p.mul(chain.block((start + t) % big_n, m - 1));
        }
        let scale = p.max_mag().max(f64::MIN_POSITIVE);
        let anchor = *p.at(1, 0);
        for i in 0..n - 1 {
            worst = worst.max((p.at(i, i + 1) - anchor).norm() / scale);
        }
    }
    worst
}
