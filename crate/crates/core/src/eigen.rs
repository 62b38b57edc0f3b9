//! Dense symmetric eigenproblems by cyclic Jacobi rotations.

use crate::error::{Error, Result};
use crate::matrix::Mat;

/// Eigen-decomposition of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: Mat<f64>,
}

/// Cyclic Jacobi; converges quadratically and is accurate to a few ulps
/// relative to `‖A‖` for the small matrices used here.
pub fn symmetric_eigen(a: &Mat<f64>) -> Result<SymEigen> {
    let n = a.rows();
    if !a.is_square() {
        return Err(Error::Dimension("eigenproblem needs a square matrix".into()));
    }
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in 0..i {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::Domain("matrix is not symmetric".into()));
            }
        }
    }
    let mut m = a.symmetric_part();
    let mut v = Mat::<f64>::identity(n);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..i {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = Mat::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymEigen { values, vectors })
}

/// `G^{-1/2}` of a symmetric positive definite matrix.
pub fn inverse_sqrt(g: &Mat<f64>) -> Result<Mat<f64>> {
    let e = symmetric_eigen(g)?;
    let n = g.rows();
    let tol = 1e-14 * g.max_abs();
    if e.values.iter().any(|&l| l <= tol) {
        return Err(Error::NotPositiveDefinite(format!(
            "smallest eigenvalue {:e}",
            e.values.first().copied().unwrap_or(0.0)
        )));
    }
    let d: Vec<f64> = e.values.iter().map(|l| 1.0 / l.sqrt()).collect();
    Ok(Mat::from_fn(n, n, |i, j| {
        (0..n).map(|k| e.vectors[(i, k)] * d[k] * e.vectors[(j, k)]).sum()
    }))
}

/// Largest `λ` with `Mv = λGv`, and a `G`-unit witness `v`.
pub fn generalized_max(m: &Mat<f64>, g: &Mat<f64>) -> Result<(f64, Vec<f64>)> {
    let s = inverse_sqrt(g)?;
    let t = s.matmul(&m.symmetric_part()).matmul(&s).symmetric_part();
    let e = symmetric_eigen(&t)?;
    let n = m.rows();
    let last = n - 1;
    let y: Vec<f64> = (0..n).map(|i| e.vectors[(i, last)]).collect();
    Ok((e.values[last], s.matvec(&y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let a = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = symmetric_eigen(&a).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15);
        assert!((e.values[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn pencil_with_diagonal_gram() {
        let m = Mat::diag(&[-1.0, -3.0]);
        let g = Mat::diag(&[2.0, 1.0]);
        let (l, v) = generalized_max(&m, &g).unwrap();
        assert!((l + 0.5).abs() < 1e-15);
        assert!((g.quad(&v) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn indefinite_gram_rejected() {
        let g = Mat::diag(&[1.0, -1.0]);
        assert!(matches!(inverse_sqrt(&g), Err(Error::NotPositiveDefinite(_))));
    }
}
