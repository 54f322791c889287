//! The Grassmannian pentagram map.
//!
//! Geometric form: the image vertex at k is the intersection of the span of
//! the even-offset lifts X_k, X_{k+2}, ... with the span of the odd-offset
//! lifts (for even m the odd window stops at k+m-1, giving Pi_k and Omega_k;
//! for odd m it runs to k+m, giving Pi_k and Pi_{k+1}). Algebraic form: the
//! same map written on invariant chains through the frame recursion, where
//! the image of the frame rho_k is rho_k N_k with N_k assembled from the
//! columns F_l = Q_k...Q_{k+l-1} rbar_{k+l}.
//!
//! Both forms are kept as independent computation paths so each can check
//! the other.

use num::complex::Complex64;

use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::matrix::Mat;
use crate::normalize::{normalize_chain, GaugeData};
use crate::polygon::{Chain, Lift};

/// The image-direction column rbar_k: for even m the a-blocks with odd index
/// interleaved with zero blocks, for odd m the even-index blocks. In both
/// cases T(V_k) is proportional to rho_k rbar_k.
pub fn r_bar<T: Scalar>(chain: &Chain<T>, k: usize) -> Mat<T> {
    let (n, m) = (chain.n, chain.m);
    let keep_odd = m % 2 == 0;
    let mut col = Mat::zeros(m * n, n);
    for i in 0..m {
        if (i % 2 == 1) == keep_odd {
            col.set_block(i * n, 0, chain.block(k, i));
        }
    }
    col
}

/// Complement of rbar_k: together they rebuild the last block-column of Q_k.
pub fn p_bar<T: Scalar>(chain: &Chain<T>, k: usize) -> Mat<T> {
    let (n, m) = (chain.n, chain.m);
    let keep_odd = m % 2 == 0;
    let mut col = Mat::zeros(m * n, n);
    for i in 0..m {
        if (i % 2 == 1) != keep_odd {
            col.set_block(i * n, 0, chain.block(k, i));
        }
    }
    col
}

/// F column at level l: Q_k Q_{k+1} ... Q_{k+l-1} rbar_{k+l}.
pub fn f_column<T: Scalar>(chain: &Chain<T>, k: usize, level: usize) -> Mat<T> {
    chain.q_product(k, level).mul(&r_bar(chain, k + level))
}

/// N_k = (F_0 | F_1 | ... | F_{m-1}): the matrix carrying the frame rho_k to
/// the image frame rho_k N_k.
pub fn build_n_matrix<T: Scalar>(chain: &Chain<T>, k: usize) -> Mat<T> {
    let cols: Vec<Mat<T>> = (0..chain.m).map(|l| f_column(chain, k, l)).collect();
    Mat::hstack(&cols)
}

/// Basis of the image vertex subspace at k, computed from the kernel of the
/// stacked system [even-offset lifts | odd-offset lifts]. The result spans
/// the intersection of the two spans; its right GL(n) gauge is arbitrary.
pub fn intersect<T: Scalar>(lift: &Lift<T>, k: usize, eps: f64) -> Result<Mat<T>> {
    let (n, m) = (lift.n, lift.m);
    let evens: Vec<Mat<T>> = (0..=m).step_by(2).map(|o| lift.x_at(k + o)).collect();
    let odds: Vec<Mat<T>> = (1..=m).step_by(2).map(|o| lift.x_at(k + o)).collect();
    let a = Mat::hstack(&evens);
    let b = Mat::hstack(&odds);
    let stacked = Mat::hstack(&[a.clone(), b]);
    let kernel = stacked.nullspace(eps);
    if kernel.cols() != n {
        return Err(Error::NonGenericIntersection {
            index: k,
            dim: kernel.cols(),
            expected: n,
        });
    }
    let image = a.mul(&kernel.block(0, 0, a.cols(), n));
    let rank = image.rank(eps);
    if rank != n {
        return Err(Error::NonGenericIntersection {
            index: k,
            dim: rank,
            expected: n,
        });
    }
    Ok(image)
}

/// Applies the map vertex by vertex. The image polygon keeps the exact same
/// monodromy matrix; each image vertex carries an arbitrary right gauge.
pub fn map_geometric<T: Scalar>(lift: &Lift<T>, eps: f64) -> Result<Lift<T>> {
    let x = (0..lift.big_n)
        .map(|k| intersect(lift, k, eps))
        .collect::<Result<Vec<_>>>()?;
    Lift::new(lift.n, lift.m, lift.big_n, x, lift.monodromy.clone())
}

fn check_n_matrix<T: Scalar>(nk: &Mat<T>, k: usize, eps: f64) -> Result<()> {
    let ok = if T::EXACT {
        !nk.det().is_zero()
    } else {
        nk.det_rel_mag() > eps
    };
    if ok {
        Ok(())
    } else {
        Err(Error::SingularN { index: k })
    }
}

/// Image invariants before any normalization: for each k solves
/// N_k c = Q_k...Q_{k+m-1} rbar_{k+m}, the frame-coordinate form of the
/// image chain relation. Returns the image blocks as a chain.
pub fn map_algebraic_unnormalized<T: Scalar>(chain: &Chain<T>, eps: f64) -> Result<Chain<T>> {
    let (n, m, big_n) = (chain.n, chain.m, chain.big_n);
    let mut a = Vec::with_capacity(big_n);
    for k in 0..big_n {
        let nk = build_n_matrix(chain, k);
        check_n_matrix(&nk, k, eps)?;
        let rhs = f_column(chain, k, m);
        let sol = nk.solve(&rhs)?;
        let row: Vec<Mat<T>> = (0..m).map(|i| sol.block(i * n, 0, n, n)).collect();
        a.push(row);
    }
    Chain::new(n, m, big_n, a)
}

/// Materializes the image polygon of the algebraic path with the rho_0 = I
/// convention: vertex k is rho_k rbar_k and the monodromy is Q_0...Q_{N-1}.
pub fn algebraic_image_lift<T: Scalar>(chain: &Chain<T>, eps: f64) -> Result<Lift<T>> {
    let (n, m, big_n) = (chain.n, chain.m, chain.big_n);
    let mut x = Vec::with_capacity(big_n);
    let mut rho = Mat::identity(m * n);
    for k in 0..big_n {
        check_n_matrix(&build_n_matrix(chain, k), k, eps)?;
        x.push(rho.mul(&r_bar(chain, k)));
        rho = rho.mul(&chain.q(k));
    }
    Lift::new(n, m, big_n, x, rho)
}

/// The map on moduli coordinates: the algebraic image chain, gauge-fixed
/// canonically. The image frame at k is rho_k N_k, so under the rho_0 = I
/// input convention det N_0 seeds the determinant targets. Returns the
/// normalized image chain and the gauge that pinned it.
pub fn map_moduli(chain: &Chain<Complex64>, eps: f64) -> Result<(Chain<Complex64>, GaugeData)> {
    let image = map_algebraic_unnormalized(chain, eps)?;
    normalize_chain(&image, build_n_matrix(chain, 0).det())
}
