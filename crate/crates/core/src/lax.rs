//! Scaling symmetry of the moduli coordinates and the spectral data it
//! produces: homogeneity checks for the unnormalized map, decompositions of
//! the coefficient columns into homogeneous parts, parameter-dependent
//! companion matrices, and the conserved spectral curve.

use num::complex::Complex64;

use crate::eigen::{char_poly, eigenvalues, multiset_deviation};
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::matrix::{rel_dist, Mat};
use crate::normalize::m_product;
use crate::pentamap::{f_column, map_algebraic_unnormalized, map_moduli, p_bar, r_bar};
use crate::polygon::Chain;

/// Scaling exponent of block a^i as an exact fraction (num, den).
/// Even m: degree 1 on odd blocks, 0 on even ones. Odd m = 2s+1:
/// degree -1 + r/s on a^{2r+1} and r/s on a^{2r}.
pub fn scaling_exponent(m: usize, i: usize) -> (i64, i64) {
    assert!(i < m, "block index out of range");
    if m % 2 == 0 {
        ((i % 2) as i64, 1)
    } else {
        let s = (m / 2) as i64;
        let r = (i / 2) as i64;
        if i % 2 == 1 {
            (r - s, s)
        } else {
            (r, s)
        }
    }
}

/// Principal-branch mu^(num/den); exact for integer exponents.
fn frac_pow(mu: Complex64, num: i64, den: i64) -> Complex64 {
    if num == 0 {
        Complex64::new(1.0, 0.0)
    } else if den == 1 {
        mu.powi(num as i32)
    } else {
        ((num as f64 / den as f64) * mu.ln()).exp()
    }
}

/// Rescales every block by mu^(e_i) with the exponents of `scaling_exponent`.
pub fn apply_scaling(chain: &Chain<Complex64>, mu: Complex64) -> Result<Chain<Complex64>> {
    if mu.norm() == 0.0 {
        return Err(Error::ZeroMu);
    }
    let a = (0..chain.big_n)
        .map(|k| {
            (0..chain.m)
                .map(|i| {
                    let (num, den) = scaling_exponent(chain.m, i);
                    chain.block(k, i).scale(&frac_pow(mu, num, den))
                })
                .collect()
        })
        .collect();
    Chain::new(chain.n, chain.m, chain.big_n, a)
}

/// Block downshift: block i of the output is block i-1 of the input.
fn gamma_shift<T: Scalar>(x: &Mat<T>, n: usize) -> Mat<T> {
    let mut out = Mat::zeros(x.rows(), x.cols());
    out.set_block(n, 0, &x.block(0, 0, x.rows() - n, x.cols()));
    out
}

/// The block-downshift matrix with I_n on the subdiagonal blocks.
pub fn gamma<T: Scalar>(n: usize, m: usize) -> Mat<T> {
    let mut g = Mat::zeros(m * n, m * n);
    for j in 0..m - 1 {
        g.set_block((j + 1) * n, j * n, &Mat::identity(n));
    }
    g
}

/// Decomposition of the columns F_l = Q_k..Q_{k+l-1} rbar_{k+l} into
/// homogeneous parts: F splits over even-tagged blocks G_{2l} and odd-tagged
/// blocks Ghat_{2l+1} with coefficient matrices alpha_i^j.
pub struct ColumnDecomposition<T: Scalar> {
    pub base: usize,
    /// f[l] is the column F_{k+l}, l = 0..=m.
    pub f: Vec<Mat<T>>,
    /// gcol[j] is G_j for even j (gcol[0] = rbar_k) and Ghat_j for odd j.
    pub gcol: Vec<Mat<T>>,
    /// alpha[j][i] is alpha_i^j; present exactly when i < j with i + j odd.
    pub alpha: Vec<Vec<Option<Mat<T>>>>,
    pub p_bar: Mat<T>,
    pub gamma: Mat<T>,
}

impl<T: Scalar> ColumnDecomposition<T> {
    /// Largest relative residual of the split F_j = sum_i F_i alpha_i^j + G_j
    /// over j = 1..=m.
    pub fn reconstruction_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 1..self.f.len() {
            let mut rhs = self.gcol[j].clone();
            for i in 0..j {
                if let Some(al) = &self.alpha[j][i] {
                    rhs = rhs.add(&self.f[i].mul(al));
                }
            }
            worst = worst.max(rel_dist(&self.f[j], &rhs));
        }
        worst
    }
}

/// Runs the G/Ghat/alpha recursion at every base index and returns the slice
/// anchored at k. The shift operator moves the base forward by one, wrapping
/// modulo N.
pub fn decompose_columns<T: Scalar>(chain: &Chain<T>, k: usize) -> ColumnDecomposition<T> {
    let (n, m, big_n) = (chain.n, chain.m, chain.big_n);
    let mut gcol: Vec<Vec<Mat<T>>> = (0..big_n).map(|b| vec![r_bar(chain, b)]).collect();
    let mut alpha: Vec<Vec<Vec<Option<Mat<T>>>>> = vec![vec![Vec::new()]; big_n];
    for j in 1..=m {
        let mut next_cols = Vec::with_capacity(big_n);
        let mut next_alpha = Vec::with_capacity(big_n);
        for b in 0..big_n {
            let shifted = (b + 1) % big_n;
            let prev = &gcol[shifted][j - 1];
            let mut row: Vec<Option<Mat<T>>> = vec![None; j];
            let col = if j % 2 == 1 {
                let last = prev.block((m - 1) * n, 0, n, n);
                let col = p_bar(chain, b).mul(&last).add(&gamma_shift(prev, n));
                row[0] = Some(last);
                col
            } else {
                gamma_shift(prev, n)
            };
            for i in 1..j {
                if (i + j) % 2 == 1 {
                    row[i] = alpha[shifted][j - 1][i - 1].clone();
                }
            }
            next_cols.push(col);
            next_alpha.push(row);
        }
        for b in 0..big_n {
            gcol[b].push(next_cols[b].clone());
            alpha[b].push(next_alpha[b].clone());
        }
    }
    let k = k % big_n;
    let f = (0..=m).map(|l| f_column(chain, k, l)).collect();
    ColumnDecomposition {
        base: k,
        f,
        gcol: gcol[k].clone(),
        alpha: alpha[k].clone(),
        p_bar: p_bar(chain, k),
        gamma: gamma(n, m),
    }
}

/// Checks the homogeneity of the unnormalized map: the solved coefficients
/// of the scaled chain must equal mu^(e_i) times those of the original.
/// Returns the largest relative deviation over all blocks.
pub fn degree_check_unnormalized(
    chain: &Chain<Complex64>,
    mu: Complex64,
    eps: f64,
) -> Result<f64> {
    let base = map_algebraic_unnormalized(chain, eps)?;
    let scaled = map_algebraic_unnormalized(&apply_scaling(chain, mu)?, eps)?;
    let mut worst = 0.0f64;
    for k in 0..chain.big_n {
        for i in 0..chain.m {
            let (num, den) = scaling_exponent(chain.m, i);
            let expect = base.block(k, i).scale(&frac_pow(mu, num, den));
            worst = worst.max(rel_dist(scaled.block(k, i), &expect));
        }
    }
    Ok(worst)
}

/// Checks the scaling degree of the normalization gauge: for even m the
/// lambda determinants of the scaled chain shrink by mu^(-n); for odd m they
/// are invariant. Positive real mu keeps principal branches stable. Returns
/// the largest relative deviation of the determinant ratios.
pub fn lambda_degree_check(chain: &Chain<Complex64>, mu: f64, eps: f64) -> Result<f64> {
    let mu_c = Complex64::new(mu, 0.0);
    let (_, gauge) = map_moduli(chain, eps)?;
    let (_, gauge_scaled) = map_moduli(&apply_scaling(chain, mu_c)?, eps)?;
    let target = if chain.m % 2 == 0 {
        mu_c.powi(-(chain.n as i32))
    } else {
        Complex64::new(1.0, 0.0)
    };
    let mut worst = 0.0f64;
    for k in 0..chain.big_n {
        let ratio = gauge_scaled.lambda[k].det() / gauge.lambda[k].det();
        worst = worst.max((ratio - target).norm() / target.norm());
    }
    Ok(worst)
}

/// Largest entry deviation between two equal-length coefficient vectors,
/// relative to their overall magnitude.
pub fn coeff_deviation(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = a
        .iter()
        .chain(b.iter())
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0f64, f64::max)
        / scale
}

/// Gauge-invariant observables of a chain: monodromy char-poly coefficients
/// and the eigenvalue multisets of the cyclic a^0 window products.
fn chain_observables(chain: &Chain<Complex64>) -> Result<(Vec<Complex64>, Vec<Vec<Complex64>>)> {
    let cp = char_poly(&chain.monodromy());
    let a0: Vec<Mat<Complex64>> = (0..chain.big_n).map(|k| chain.block(k, 0).clone()).collect();
    let mut eigs = Vec::with_capacity(chain.big_n);
    for r in 0..chain.big_n {
        eigs.push(eigenvalues(&m_product(&a0, chain.m, r)?));
    }
    Ok((cp, eigs))
}

/// Largest deviation between the gauge-invariant observables of two chains:
/// monodromy char-poly coefficients plus the eigenvalue multisets of every
/// cyclic window product B_r.
pub fn observable_deviation(a: &Chain<Complex64>, b: &Chain<Complex64>) -> Result<f64> {
    let (cp_a, eig_a) = chain_observables(a)?;
    let (cp_b, eig_b) = chain_observables(b)?;
    let mut worst = coeff_deviation(&cp_a, &cp_b);
    for (ea, eb) in eig_a.iter().zip(&eig_b) {
        worst = worst.max(multiset_deviation(ea, eb));
    }
    Ok(worst)
}

/// Compares map-then-scale against scale-then-map through gauge-invariant
/// observables. Positive real mu keeps principal branches stable. Returns
/// the largest relative deviation found.
pub fn scaling_commutation_check(chain: &Chain<Complex64>, mu: f64, eps: f64) -> Result<f64> {
    let mu_c = Complex64::new(mu, 0.0);
    let map_first = apply_scaling(&map_moduli(chain, eps)?.0, mu_c)?;
    let scale_first = map_moduli(&apply_scaling(chain, mu_c)?, eps)?.0;
    observable_deviation(&map_first, &scale_first)
}

/// Companion matrix in the integer-exponent parameter nu. Even m: nu on odd
/// blocks. Odd m = 2s+1: nu^(r-s) on a^{2r+1} and nu^r on a^{2r}, which is
/// the mu-pattern after the substitution nu = mu^(1/s).
pub fn build_q_nu<T: Scalar>(chain: &Chain<T>, k: usize, nu: &T) -> Result<Mat<T>> {
    if nu.is_zero() {
        return Err(Error::ZeroMu);
    }
    let (n, m) = (chain.n, chain.m);
    let mut q = Mat::zeros(m * n, m * n);
    for j in 0..m - 1 {
        q.set_block((j + 1) * n, j * n, &Mat::identity(n));
    }
    for i in 0..m {
        q.set_block(i * n, (m - 1) * n, &chain.block(k, i).scale(&nu_power(nu, nu_exponent(m, i))));
    }
    Ok(q)
}

/// Integer nu-exponent of block a^i. The scaling fractions share the
/// denominator s (1 for even m), so the numerator is the exponent after
/// the substitution nu = mu^(1/s).
pub fn nu_exponent(m: usize, i: usize) -> i64 {
    scaling_exponent(m, i).0
}

fn nu_power<T: Scalar>(nu: &T, e: i64) -> T {
    let base = if e >= 0 { nu.clone() } else { nu.clone().recip() };
    let mut v = T::one();
    for _ in 0..e.unsigned_abs() {
        v = v * base.clone();
    }
    v
}

/// Companion matrix at spectral parameter mu; for odd m the fractional
/// exponents run through the principal root nu = mu^(1/s).
pub fn build_q_mu(chain: &Chain<Complex64>, k: usize, mu: Complex64) -> Result<Mat<Complex64>> {
    if mu.norm() == 0.0 {
        return Err(Error::ZeroMu);
    }
    let nu = if chain.m % 2 == 0 {
        mu
    } else {
        (mu.ln() / (chain.m / 2) as f64).exp()
    };
    build_q_nu(chain, k, &nu)
}

/// The solve matrix at parameter mu: columns Q_k(mu)..Q_{k+j-1}(mu) rbar,
/// with the even-case global mu factor dropped (unscaled rbar there) and the
/// odd-case rbar blocks carrying their own nu powers.
pub fn build_n_mu(chain: &Chain<Complex64>, k: usize, mu: Complex64) -> Result<Mat<Complex64>> {
    if mu.norm() == 0.0 {
        return Err(Error::ZeroMu);
    }
    let (n, m) = (chain.n, chain.m);
    let even = m % 2 == 0;
    let nu = if even { mu } else { (mu.ln() / (m / 2) as f64).exp() };
    let rb = |j: usize| -> Mat<Complex64> {
        let col = r_bar(chain, j);
        if even {
            return col;
        }
        let mut out = Mat::zeros(m * n, n);
        for i in (0..m).step_by(2) {
            let block = col.block(i * n, 0, n, n);
            out.set_block(i * n, 0, &block.scale(&nu_power(&nu, nu_exponent(m, i))));
        }
        out
    };
    let mut cols = Vec::with_capacity(m);
    let mut prod = Mat::identity(m * n);
    for j in 0..m {
        cols.push(prod.mul(&rb(k + j)));
        prod = prod.mul(&build_q_nu(chain, k + j, &nu)?);
    }
    Ok(Mat::hstack(&cols))
}

/// Char-poly coefficients of Q_0(mu)..Q_{N-1}(mu) for each sample mu,
/// lowest degree first, length mn + 1.
pub fn spectral_samples(
    chain: &Chain<Complex64>,
    mus: &[Complex64],
) -> Result<Vec<Vec<Complex64>>> {
    mus.iter()
        .map(|&mu| {
            let mut prod = Mat::identity(chain.m * chain.n);
            for k in 0..chain.big_n {
                prod = prod.mul(&build_q_mu(chain, k, mu)?);
            }
            Ok(char_poly(&prod))
        })
        .collect()
}

/// The conserved curve det(Q_0(nu)..Q_{N-1}(nu) - eta I) as a Laurent
/// polynomial in nu: coeffs[r][j] multiplies nu^(nu_offset + r) eta^j.
/// For odd m the parameter is nu = mu^(1/s); for even m, nu = mu.
pub struct SpectralCurve {
    pub nu_offset: i64,
    pub coeffs: Vec<Vec<Complex64>>,
    /// The unit-circle interpolation grid and its sampled eta-polynomials.
    pub nus: Vec<Complex64>,
    pub eta_polys: Vec<Vec<Complex64>>,
}

impl SpectralCurve {
    /// Evaluates the eta-polynomial coefficient vector at a given nu.
    pub fn eval(&self, nu: Complex64) -> Vec<Complex64> {
        let width = self.coeffs.first().map_or(0, Vec::len);
        let mut out = vec![Complex64::new(0.0, 0.0); width];
        for (r, row) in self.coeffs.iter().enumerate() {
            let p = frac_pow(nu, self.nu_offset + r as i64, 1);
            for (j, c) in row.iter().enumerate() {
                out[j] += c * p;
            }
        }
        out
    }
}

fn sample_grid_polys(
    chain: &Chain<Complex64>,
    nus: &[Complex64],
) -> Result<Vec<Vec<Complex64>>> {
    nus.iter()
        .map(|nu| {
            let mut prod = Mat::identity(chain.m * chain.n);
            for k in 0..chain.big_n {
                prod = prod.mul(&build_q_nu(chain, k, nu)?);
            }
            Ok(char_poly(&prod))
        })
        .collect()
}

/// Interpolates the curve coefficients over a unit-circle grid wide enough
/// for the Laurent degree window, then validates against a held-out sample.
pub fn spectral_curve(chain: &Chain<Complex64>, eps: f64) -> Result<SpectralCurve> {
    let (n, m, big_n) = (chain.n, chain.m, chain.big_n);
    let q = m * n;
    // Every entry of one Q(nu) has nu-degree within [-s, s] (odd) or [0, 1]
    // (even); a determinant term multiplies q entries from N factors.
    let w = if m % 2 == 0 {
        (q * big_n) as i64
    } else {
        (q * big_n * (m / 2)) as i64
    };
    let lo = if m % 2 == 0 { 0 } else { -w };
    let npts = (w - lo + 1) as usize;
    let nus: Vec<Complex64> = (0..npts)
        .map(|t| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t as f64 / npts as f64))
        .collect();
    let eta_polys = sample_grid_polys(chain, &nus)?;
    let width = q + 1;
    let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); width]; npts];
    for (r, row) in coeffs.iter_mut().enumerate() {
        let e = lo + r as i64;
        for (t, poly) in eta_polys.iter().enumerate() {
            // conjugate unit root: exp(-2 pi i e t / npts)
            let angle = -2.0 * std::f64::consts::PI * (e * t as i64) as f64 / npts as f64;
            let weight = Complex64::from_polar(1.0 / npts as f64, angle);
            for (j, c) in poly.iter().enumerate() {
                row[j] += c * weight;
            }
        }
    }
    let gmax = coeffs
        .iter()
        .flatten()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    let keep = |row: &Vec<Complex64>| row.iter().any(|z| z.norm() > 1e-12 * gmax);
    let first = coeffs.iter().position(keep).unwrap_or(0);
    let last = coeffs.iter().rposition(keep).unwrap_or(0);
    let curve = SpectralCurve {
        nu_offset: lo + first as i64,
        coeffs: coeffs[first..=last].to_vec(),
        nus,
        eta_polys,
    };
    // Held-out check at a fixed off-grid angle.
    let probe = Complex64::from_polar(1.0, 0.937188736);
    let direct = sample_grid_polys(chain, &[probe])?.remove(0);
    let fitted = curve.eval(probe);
    let residual = coeff_deviation(&direct, &fitted);
    if residual > eps {
        return Err(Error::InterpolationIllConditioned { residual });
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pentamap::build_n_matrix;
    use crate::polygon::{extract_invariants, random_regular_lift};
    use crate::DEFAULT_EPS;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn regular_chain(n: usize, m: usize, big_n: usize, seed: u64) -> Chain<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lift = random_regular_lift::<Complex64, _>(n, m, big_n, &mut rng, DEFAULT_EPS).unwrap();
        extract_invariants(&lift, DEFAULT_EPS).unwrap()
    }

    fn raw_chain(n: usize, m: usize, big_n: usize, seed: u64) -> Chain<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = (0..big_n)
            .map(|_| {
                (0..m)
                    .map(|_| {
                        Mat::from_fn(n, n, |_, _| {
                            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                        })
                    })
                    .collect()
            })
            .collect();
        Chain::new(n, m, big_n, a).unwrap()
    }

    #[test]
    fn exponents_match_both_parities() {
        assert_eq!(
            (0..4).map(|i| scaling_exponent(4, i)).collect::<Vec<_>>(),
            vec![(0, 1), (1, 1), (0, 1), (1, 1)]
        );
        assert_eq!(
            (0..3).map(|i| scaling_exponent(3, i)).collect::<Vec<_>>(),
            vec![(0, 1), (-1, 1), (1, 1)]
        );
        assert_eq!(
            (0..5).map(|i| scaling_exponent(5, i)).collect::<Vec<_>>(),
            vec![(0, 2), (-2, 2), (1, 2), (-1, 2), (2, 2)]
        );
        assert_eq!(
            (0..5).map(|i| nu_exponent(5, i)).collect::<Vec<_>>(),
            vec![0, -2, 1, -1, 2]
        );
    }

    #[test]
    fn scaling_moves_only_odd_blocks_for_even_m() {
        let chain = raw_chain(2, 4, 5, 3);
        let scaled = apply_scaling(&chain, c(2.0)).unwrap();
        for k in 0..5 {
            for i in 0..4 {
                let want = if i % 2 == 1 {
                    chain.block(k, i).scale(&c(2.0))
                } else {
                    chain.block(k, i).clone()
                };
                assert_eq!(*scaled.block(k, i), want);
            }
        }
    }

    #[test]
    fn scaling_composes_for_positive_mu() {
        let chain = raw_chain(1, 5, 6, 4);
        let twice = apply_scaling(&apply_scaling(&chain, c(1.6)).unwrap(), c(2.5)).unwrap();
        let once = apply_scaling(&chain, c(4.0)).unwrap();
        assert!(crate::polygon::chain_rel_dist(&twice, &once) < 1e-12);
        assert!(matches!(
            apply_scaling(&chain, c(0.0)),
            Err(Error::ZeroMu)
        ));
    }

    #[test]
    fn odd_scaling_exponent_values() {
        // m = 3 (s = 1): a^0 fixed, a^1 divided, a^2 multiplied.
        let chain = raw_chain(1, 3, 4, 5);
        let scaled = apply_scaling(&chain, c(4.0)).unwrap();
        for k in 0..4 {
            assert_eq!(*scaled.block(k, 0), *chain.block(k, 0));
            assert!(rel_dist(scaled.block(k, 1), &chain.block(k, 1).scale(&c(0.25))) < 1e-15);
            assert!(rel_dist(scaled.block(k, 2), &chain.block(k, 2).scale(&c(4.0))) < 1e-15);
        }
    }

    #[test]
    fn base_case_of_decomposition() {
        for (m, seed) in [(4usize, 7u64), (5, 8)] {
            let chain = raw_chain(2, m, 7, seed);
            for k in 0..7 {
                let dec = decompose_columns(&chain, k);
                let rb1 = r_bar(&chain, k + 1);
                let want = p_bar(&chain, k)
                    .mul(chain.block(k + 1, m - 1))
                    .add(&gamma_shift(&rb1, 2));
                assert!(rel_dist(&dec.gcol[1], &want) < 1e-14, "m={m}, k={k}");
                assert_eq!(
                    dec.alpha[1][0].clone().unwrap(),
                    chain.block(k + 1, m - 1).clone()
                );
            }
        }
    }

    #[test]
    fn zero_odd_blocks_kill_all_columns() {
        let mut chain = raw_chain(1, 4, 5, 9);
        for k in 0..5 {
            for i in [1usize, 3] {
                chain.a[k][i] = Mat::zeros(1, 1);
            }
        }
        let dec = decompose_columns(&chain, 0);
        for l in 0..=4 {
            assert_eq!(dec.f[l].max_mag(), 0.0);
            assert_eq!(dec.gcol[l].max_mag(), 0.0);
        }
    }

    #[test]
    fn reconstruction_residual_is_tiny() {
        for (n, m, big_n, seed) in [(2, 4, 5, 11), (1, 3, 5, 12), (2, 5, 7, 13), (1, 6, 7, 14)] {
            let chain = raw_chain(n, m, big_n, seed);
            for k in 0..big_n {
                let dec = decompose_columns(&chain, k);
                assert!(
                    dec.reconstruction_residual() < 1e-10,
                    "n={n} m={m} k={k}: {}",
                    dec.reconstruction_residual()
                );
            }
        }
    }

    #[test]
    fn zero_block_patterns_are_exact() {
        let n = 2;
        let even = raw_chain(n, 6, 7, 15);
        let dec = decompose_columns(&even, 2);
        for j in (1..=5).step_by(2) {
            let last = dec.gcol[j].block((6 - 1) * n, 0, n, n);
            assert_eq!(last.max_mag(), 0.0, "even m: Ghat_{j} last block");
        }
        for j in (2..=6).step_by(2) {
            let first = dec.gcol[j].block(0, 0, n, n);
            assert_eq!(first.max_mag(), 0.0, "even m: G_{j} first block");
        }
        let odd = raw_chain(n, 5, 7, 16);
        let dec = decompose_columns(&odd, 1);
        for j in (1..=5).step_by(2) {
            assert_eq!(dec.gcol[j].block(0, 0, n, n).max_mag(), 0.0);
            assert_eq!(dec.gcol[j].block(4 * n, 0, n, n).max_mag(), 0.0);
        }
        for j in (2..=4).step_by(2) {
            assert_eq!(
                dec.gcol[j].block(0, 0, 2 * n, n).max_mag(),
                0.0,
                "odd m: G_{j} first two blocks"
            );
        }
    }

    #[test]
    fn even_case_blocks_are_degree_one() {
        let chain = raw_chain(2, 4, 5, 17);
        let mu = c(1.7);
        let scaled = apply_scaling(&chain, mu).unwrap();
        let dec = decompose_columns(&chain, 0);
        let dec_s = decompose_columns(&scaled, 0);
        for j in 0..=4 {
            assert!(
                rel_dist(&dec_s.gcol[j], &dec.gcol[j].scale(&mu)) < 1e-10,
                "block {j}"
            );
        }
    }

    #[test]
    fn degree_law_even_and_odd() {
        let even = regular_chain(1, 4, 5, 18);
        assert!(degree_check_unnormalized(&even, c(2.0), DEFAULT_EPS).unwrap() <= 1e-8);
        assert_eq!(degree_check_unnormalized(&even, c(1.0), DEFAULT_EPS).unwrap(), 0.0);
        let odd = regular_chain(1, 3, 5, 19);
        assert!(degree_check_unnormalized(&odd, c(4.0), DEFAULT_EPS).unwrap() <= 1e-8);
        let complex_mu = Complex64::from_polar(1.0, std::f64::consts::PI / 7.0);
        assert!(degree_check_unnormalized(&odd, complex_mu, DEFAULT_EPS).unwrap() <= 1e-8);
    }

    #[test]
    fn lambda_determinant_degrees() {
        let even = regular_chain(1, 4, 5, 20);
        assert!(lambda_degree_check(&even, 2.0, DEFAULT_EPS).unwrap() <= 1e-7);
        assert!(lambda_degree_check(&even, 1.0, DEFAULT_EPS).unwrap() <= 1e-12);
        let odd = regular_chain(1, 3, 5, 21);
        assert!(lambda_degree_check(&odd, 2.0, DEFAULT_EPS).unwrap() <= 1e-7);
    }

    #[test]
    fn map_and_scaling_commute() {
        let even = regular_chain(1, 4, 5, 22);
        assert_eq!(scaling_commutation_check(&even, 1.0, DEFAULT_EPS).unwrap(), 0.0);
        assert!(scaling_commutation_check(&even, 2.0, DEFAULT_EPS).unwrap() <= 1e-6);
        let odd = regular_chain(2, 3, 5, 23);
        assert!(scaling_commutation_check(&odd, 0.5, DEFAULT_EPS).unwrap() <= 1e-6);
    }

    #[test]
    fn q_mu_matches_printed_pattern() {
        let a = (0..5)
            .map(|_| {
                vec![
                    Mat::from_rows(vec![vec![c(1.0)]]),
                    Mat::from_rows(vec![vec![c(2.0)]]),
                    Mat::from_rows(vec![vec![c(3.0)]]),
                    Mat::from_rows(vec![vec![c(4.0)]]),
                ]
            })
            .collect();
        let chain = Chain::new(1, 4, 5, a).unwrap();
        let q = build_q_mu(&chain, 0, c(5.0)).unwrap();
        let last: Vec<f64> = (0..4).map(|r| q.at(r, 3).re).collect();
        assert_eq!(last, vec![1.0, 10.0, 3.0, 20.0]);
        assert!(matches!(build_q_mu(&chain, 0, c(0.0)), Err(Error::ZeroMu)));
    }

    #[test]
    fn parameter_one_reduces_to_plain_matrices() {
        for (m, seed) in [(4usize, 24u64), (5, 25)] {
            let chain = raw_chain(2, m, 7, seed);
            for k in 0..7 {
                assert_eq!(build_q_mu(&chain, k, c(1.0)).unwrap(), chain.q(k));
                assert!(rel_dist(
                    &build_n_mu(&chain, k, c(1.0)).unwrap(),
                    &build_n_matrix(&chain, k)
                ) < 1e-15);
            }
        }
    }

    #[test]
    fn scaled_chain_companion_equals_q_mu() {
        // Exact anchor: the mu-pattern is definitionally the scaled chain.
        for (m, seed) in [(4usize, 26u64), (5, 27)] {
            let chain = raw_chain(2, m, 7, seed);
            let mu = Complex64::new(1.3, 0.4);
            let scaled = apply_scaling(&chain, mu).unwrap();
            let direct: Vec<Complex64> = {
                let mut prod = Mat::identity(2 * m);
                for k in 0..7 {
                    prod = prod.mul(&build_q_mu(&chain, k, mu).unwrap());
                }
                char_poly(&prod)
            };
            let via_scaling = char_poly(&scaled.monodromy());
            assert!(coeff_deviation(&direct, &via_scaling) < 1e-12, "m={m}");
        }
    }

    #[test]
    fn cyclic_chain_spectrum_ignores_mu() {
        let a = (0..4)
            .map(|_| {
                vec![
                    Mat::from_rows(vec![vec![c(1.0)]]),
                    Mat::zeros(1, 1),
                    Mat::zeros(1, 1),
                ]
            })
            .collect();
        let chain = Chain::new(1, 3, 4, a).unwrap();
        let mus = [c(2.0), Complex64::from_polar(1.0, 0.61)];
        let polys = spectral_samples(&chain, &mus).unwrap();
        for poly in polys {
            // det(Q^4 - eta I) with Q^3 = I is 1 - eta^3.
            assert!((poly[0] - c(1.0)).norm() < 1e-12);
            assert!(poly[1].norm() < 1e-12 && poly[2].norm() < 1e-12);
            assert!((poly[3] + c(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn samples_are_conserved_by_the_map() {
        let chain = regular_chain(1, 3, 5, 28);
        let (image, _) = map_moduli(&chain, DEFAULT_EPS).unwrap();
        let mus: Vec<Complex64> = (0..4)
            .map(|t| Complex64::from_polar(1.0, 0.9 + t as f64))
            .collect();
        let before = spectral_samples(&chain, &mus).unwrap();
        let after = spectral_samples(&image, &mus).unwrap();
        for (b, a) in before.iter().zip(&after) {
            assert!(coeff_deviation(b, a) < 1e-6);
        }
    }

    #[test]
    fn curve_interpolation_holds_out() {
        for (n, m, big_n, seed) in [(1usize, 4usize, 5usize, 29u64), (1, 3, 5, 30), (2, 5, 7, 31)] {
            let chain = regular_chain(n, m, big_n, seed);
            let curve = spectral_curve(&chain, 1e-8).unwrap();
            for poly in &curve.eta_polys {
                assert_eq!(poly.len(), m * n + 1);
            }
        }
    }

    #[test]
    fn curve_of_mu_free_chain_is_constant() {
        let mut chain = raw_chain(1, 4, 5, 32);
        for k in 0..5 {
            chain.a[k][1] = Mat::zeros(1, 1);
            chain.a[k][3] = Mat::zeros(1, 1);
        }
        let curve = spectral_curve(&chain, 1e-8).unwrap();
        assert_eq!(curve.nu_offset, 0);
        assert_eq!(curve.coeffs.len(), 1);
    }

    #[test]
    fn curve_coefficients_are_conserved() {
        let chain = regular_chain(1, 3, 5, 33);
        let (image, _) = map_moduli(&chain, DEFAULT_EPS).unwrap();
        let a = spectral_curve(&chain, 1e-8).unwrap();
        let b = spectral_curve(&image, 1e-8).unwrap();
        // Align by absolute nu exponent before comparing.
        let lo = a.nu_offset.min(b.nu_offset);
        let hi = (a.nu_offset + a.coeffs.len() as i64).max(b.nu_offset + b.coeffs.len() as i64);
        let width = a.coeffs[0].len();
        let expand = |curve: &SpectralCurve| {
            let mut rows = vec![vec![Complex64::new(0.0, 0.0); width]; (hi - lo) as usize];
            for (r, row) in curve.coeffs.iter().enumerate() {
                rows[(curve.nu_offset - lo) as usize + r] = row.clone();
            }
            rows
        };
        let ra = expand(&a);
        let rb = expand(&b);
        let flat = |rows: &[Vec<Complex64>]| rows.concat();
        assert!(coeff_deviation(&flat(&ra), &flat(&rb)) < 1e-6);
    }
}
