//! Small dense symmetric solves for the surrogate fit.

use crate::scalar::Scalar;

/// Solves `a x = b` for symmetric positive definite `a` (row-major `d x d`).
/// Returns `None` when a pivot falls below the relative rank tolerance.
pub fn cholesky_solve<T: Scalar>(a: &[T], b: &[T], d: usize) -> Option<Vec<T>> {
    let scale = (0..d).map(|i| a[i * d + i].abs()).fold(T::zero(), T::max);
    let tol = scale * T::rank_tolerance() * T::from_usize_lossy(d.max(1));
    let mut l = vec![T::zero(); d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if s <= tol || s <= T::zero() {
                    return None;
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    let mut y = vec![T::zero(); d];
    for i in 0..d {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * d + k] * y[k];
        }
        y[i] = s / l[i * d + i];
    }
    let mut x = vec![T::zero(); d];
    for i in (0..d).rev() {
        let mut s = y[i];
        for k in i + 1..d {
            s -= l[k * d + i] * x[k];
        }
        x[i] = s / l[i * d + i];
    }
    Some(x)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns eigenvalues
/// and the eigenvectors as columns of a row-major matrix.
pub fn symmetric_eigen<T: Scalar>(a: &[T], d: usize) -> (Vec<T>, Vec<T>) {
    let mut m = a.to_vec();
    let mut v = vec![T::zero(); d * d];
    for i in 0..d {
        v[i * d + i] = T::one();
    }
    for _sweep in 0..100 {
        let off: T = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * d + j] * m[i * d + j])
            .sum();
        let diag: T = (0..d).map(|i| m[i * d + i] * m[i * d + i]).sum();
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = m[p * d + q];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[q * d + q] - m[p * d + p]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..d {
                    let mkp = m[k * d + p];
                    let mkq = m[k * d + q];
                    m[k * d + p] = c * mkp - s * mkq;
                    m[k * d + q] = s * mkp + c * mkq;
                }
                for k in 0..d {
                    let mpk = m[p * d + k];
                    let mqk = m[q * d + k];
                    m[p * d + k] = c * mpk - s * mqk;
                    m[q * d + k] = s * mpk + c * mqk;
                }
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..d).map(|i| m[i * d + i]).collect(), v)
}

/// Minimum-norm solution of the symmetric system `a x = b` through the
/// eigendecomposition, discarding eigenvalues below the rank tolerance.
pub fn pinv_solve<T: Scalar>(a: &[T], b: &[T], d: usize) -> Vec<T> {
    let (vals, vecs) = symmetric_eigen(a, d);
    let top = vals.iter().map(|v| v.abs()).fold(T::zero(), T::max);
    let cut = top * T::rank_tolerance() * T::from_usize_lossy(d.max(1)).sqrt() * T::lit(1e3);
    let mut x = vec![T::zero(); d];
    for (k, &lam) in vals.iter().enumerate() {
        if lam.abs() <= cut || lam == T::zero() {
            continue;
        }
        let proj: T = (0..d).map(|i| vecs[i * d + k] * b[i]).sum();
        let coef = proj / lam;
        for i in 0..d {
            x[i] += coef * vecs[i * d + k];
        }
    }
    x
}
