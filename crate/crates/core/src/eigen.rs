//! Eigendata for small complex matrices.
//!
//! Characteristic polynomials are recovered by evaluating `det(A - eta*I)` on
//! a scaled root-of-unity grid and inverting the DFT; roots come from
//! Durand-Kerner iteration. Inputs are balanced first: products of companion
//! blocks carry entries far larger than their eigenvalues, and the grid
//! radius must track the latter for the low coefficients to survive.

use num::complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::matrix::Mat;

/// Osborne balancing with power-of-two factors: a diagonal similarity that
/// equalizes row and column norms. Exact, and leaves the char poly unchanged.
fn balanced(a: &Mat<Complex64>) -> Mat<Complex64> {
    let d = a.rows();
    let mut b = a.clone();
    for _ in 0..32 {
        let mut moved = false;
        for i in 0..d {
            let (mut r, mut c) = (0.0f64, 0.0f64);
            for j in 0..d {
                if j != i {
                    r += b.at(i, j).norm();
                    c += b.at(j, i).norm();
                }
            }
            if r == 0.0 || c == 0.0 {
                continue;
            }
            let e = ((c / r).log2() / 2.0).round() as i32;
            if e == 0 {
                continue;
            }
            let f = 2.0f64.powi(e);
            for j in 0..d {
                if j != i {
                    *b.at_mut(i, j) *= f;
                    *b.at_mut(j, i) /= f;
                }
            }
            moved = true;
        }
        if !moved {
            break;
        }
    }
    b
}

/// Coefficients `c_0..c_d` of `det(A - eta*I)` as a polynomial in `eta`.
/// The leading coefficient is `(-1)^d` up to rounding.
pub fn char_poly(a: &Mat<Complex64>) -> Vec<Complex64> {
    assert!(a.is_square());
    let d = a.rows();
    if d == 0 {
        return vec![Complex64::new(1.0, 0.0)];
    }
    let a = balanced(a);
    let mm = a.max_mag();
    if mm == 0.0 {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); d + 1];
        coeffs[d] = Complex64::new(if d % 2 == 0 { 1.0 } else { -1.0 }, 0.0);
        return coeffs;
    }
    // The grid radius balances the recovery error across coefficients when it
    // sits at the geometric mean of the eigenvalue magnitudes, |det|^(1/d).
    let npts = d + 1;
    let gmean = a.det().norm().powf(1.0 / d as f64);
    let radius = if gmean.is_finite() && gmean > 0.0 {
        gmean.clamp(mm * 2.0f64.powi(-8), 1.0 + mm)
    } else {
        mm * 2.0f64.powi(-8)
    };
    let omega = Complex64::from_polar(1.0, TAU / npts as f64);
    let values: Vec<Complex64> = (0..npts)
        .map(|t| {
            let eta = omega.powu(t as u32) * radius;
            let mut shifted = a.clone();
            for i in 0..d {
                *shifted.at_mut(i, i) -= eta;
            }
            shifted.det()
        })
        .collect();
    (0..npts)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, v) in values.iter().enumerate() {
                acc += v * omega.powu(((npts - j % npts) * t % npts) as u32);
            }
            acc / (npts as f64) / radius.powi(j as i32)
        })
        .collect()
}

/// All roots of the polynomial `c_0 + c_1 x + ... + c_d x^d`.
/// Degrees one and two are closed-form; higher degrees use Durand-Kerner.
pub fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    // Trim trailing coefficients that are zero relative to the largest.
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut d = coeffs.len().saturating_sub(1);
    while d > 0 && coeffs[d].norm() <= 1e-14 * scale {
        d -= 1;
    }
    match d {
        0 => Vec::new(),
        1 => vec![-coeffs[0] / coeffs[1]],
        2 => {
            let (a, b, c) = (coeffs[2], coeffs[1], coeffs[0]);
            let disc = (b * b - 4.0 * a * c).sqrt();
            // Pick the sign that avoids cancellation in -b -/+ disc.
            let q = if (b + disc).norm() >= (b - disc).norm() {
                -(b + disc) / 2.0
            } else {
                -(b - disc) / 2.0
            };
            if q.norm() == 0.0 {
                vec![Complex64::new(0.0, 0.0), -b / a]
            } else {
                vec![q / a, c / q]
            }
        }
        _ => durand_kerner(&coeffs[..=d]),
    }
}

fn durand_kerner(coeffs: &[Complex64]) -> Vec<Complex64> {
    let d = coeffs.len() - 1;
    let lead = coeffs[d];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    // Cauchy bound on root magnitudes for the monic polynomial.
    let bound = 1.0
        + monic[..d]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..d).map(|k| seed.powu(k as u32 + 1) * bound).collect();
    let eval = |x: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in monic.iter().rev() {
            acc = acc * x + c;
        }
        acc
    };
    for _ in 0..1000 {
        let mut max_step = 0.0f64;
        for k in 0..d {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..d {
                if j != k {
                    denom *= z[k] - z[j];
                }
            }
            let step = eval(z[k]) / denom;
            z[k] -= step;
            max_step = max_step.max(step.norm() / z[k].norm().max(1.0));
        }
        if max_step < 1e-14 {
            break;
        }
    }
    z
}

pub fn eigenvalues(a: &Mat<Complex64>) -> Vec<Complex64> {
    poly_roots(&char_poly(a))
}

/// Unit eigenvector for `lambda`, scaled so its largest-modulus entry is
/// exactly one. The kernel tolerance is widened in steps because `lambda`
/// itself carries root-finding error.
pub fn eigenvector_for(a: &Mat<Complex64>, lambda: Complex64) -> Result<Mat<Complex64>> {
    let n = a.rows();
    let mut shifted = a.clone();
    for i in 0..n {
        *shifted.at_mut(i, i) -= lambda;
    }
    // Cutoffs are relative to the unshifted matrix: the shifted one can be a
    // pure residual whose own norm says nothing.
    let scale = a.max_mag().max(lambda.norm());
    for reltol in [1e-7, 1e-5, 1e-3] {
        let kernel = shifted.nullspace_with_scale(reltol, scale);
        if kernel.cols() >= 1 {
            return Ok(canonical_column(&kernel.block(0, 0, n, 1)));
        }
    }
    Err(Error::NonGenericGauge(format!(
        "no eigenvector found for eigenvalue {lambda}"
    )))
}

/// Rescales a column so its largest-modulus entry becomes exactly one.
pub fn canonical_column(v: &Mat<Complex64>) -> Mat<Complex64> {
    let mut best = 0;
    for r in 1..v.rows() {
        if v.at(r, 0).norm() > v.at(best, 0).norm() {
            best = r;
        }
    }
    let inv = 1.0 / v.at(best, 0);
    let mut out = v.scale(&inv);
    *out.at_mut(best, 0) = Complex64::new(1.0, 0.0);
    out
}

/// Whether two complex multisets match under greedy nearest pairing.
pub fn multiset_close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    for x in a {
        let mut best: Option<(usize, f64)> = None;
        for (j, y) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let dist = (x - y).norm();
            if best.map_or(true, |(_, bd)| dist < bd) {
                best = Some((j, dist));
            }
        }
        match best {
            Some((j, dist)) if dist <= tol => used[j] = true,
            _ => return false,
        }
    }
    true
}

/// Largest greedy-pairing distance between two equal-size multisets,
/// relative to their overall magnitude.
pub fn multiset_deviation(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "multisets must have equal size");
    let scale = a
        .iter()
        .chain(b.iter())
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let mut best: Option<(usize, f64)> = None;
        for (j, y) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let dist = (x - y).norm();
            if best.map_or(true, |(_, bd)| dist < bd) {
                best = Some((j, dist));
            }
        }
        let (j, dist) = best.unwrap();
        used[j] = true;
        worst = worst.max(dist);
    }
    worst / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn char_poly_of_2x2_matches_trace_det() {
        let a = Mat::from_rows(vec![vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(3.0, 0.0), c(4.0, 0.0)]]);
        let p = char_poly(&a);
        // det(A - eta I) = eta^2 - 5 eta - 2
        assert!((p[0] - c(-2.0, 0.0)).norm() < 1e-12);
        assert!((p[1] - c(-5.0, 0.0)).norm() < 1e-12);
        assert!((p[2] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn roots_of_cubic_with_known_zeros() {
        // (x-1)(x-2)(x-3) = x^3 - 6x^2 + 11x - 6
        let p = vec![c(-6.0, 0.0), c(11.0, 0.0), c(-6.0, 0.0), c(1.0, 0.0)];
        let roots = poly_roots(&p);
        assert!(multiset_close(
            &roots,
            &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)],
            1e-9
        ));
    }

    #[test]
    fn quadratic_with_complex_roots() {
        // x^2 + 1
        let roots = poly_roots(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(multiset_close(&roots, &[c(0.0, 1.0), c(0.0, -1.0)], 1e-12));
    }

    #[test]
    fn eigen_pair_reconstructs_action() {
        let a = Mat::from_rows(vec![
            vec![c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(3.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(5.0, 0.0)],
        ]);
        for lambda in eigenvalues(&a) {
            let v = eigenvector_for(&a, lambda).unwrap();
            let av = a.mul(&v);
            let lv = v.scale(&lambda);
            assert!(av.sub(&lv).max_mag() < 1e-8, "eigenpair residual too large");
        }
    }

    #[test]
    fn canonical_column_pins_largest_entry() {
        let v = Mat::from_rows(vec![vec![c(0.0, 2.0)], vec![c(1.0, 0.0)]]);
        let w = canonical_column(&v);
        assert_eq!(*w.at(0, 0), c(1.0, 0.0));
        assert!((w.at(1, 0) - c(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn multiset_rejects_mismatched_values() {
        assert!(!multiset_close(&[c(1.0, 0.0)], &[c(1.1, 0.0)], 1e-3));
        assert!(multiset_close(&[c(1.0, 0.0)], &[c(1.1, 0.0)], 0.2));
    }
}
