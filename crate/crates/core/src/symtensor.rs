//! Component basis for symmetric 2-tensors: `h_ij` with `i ≤ j`.

use serde::{Deserialize, Serialize};

use crate::matrix::Mat;
use crate::scalar::Ring;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymComponentBasis {
    pub n: usize,
    pub pairs: Vec<(usize, usize)>,
}

impl SymComponentBasis {
    pub fn new(n: usize) -> Self {
        let mut pairs = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                pairs.push((i, j));
            }
        }
        SymComponentBasis { n, pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        // rows before a hold n, n−1, …, n−a+1 entries
        a * self.n - a * (a.saturating_sub(1)) / 2 + (b - a)
    }

    pub fn label(&self, p: usize) -> String {
        let (i, j) = self.pairs[p];
        format!("h{}{}", i + 1, j + 1)
    }

    /// Symmetric matrix with the given components.
    pub fn to_matrix<T: Ring>(&self, v: &[T]) -> Mat<T> {
        let mut m = Mat::zeros(self.n, self.n);
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            m[(i, j)] = v[p].clone();
            m[(j, i)] = v[p].clone();
        }
        m
    }

    pub fn from_matrix<T: Ring>(&self, m: &Mat<T>) -> Vec<T> {
        self.pairs.iter().map(|&(i, j)| m[(i, j)].clone()).collect()
    }

    /// The symmetric matrix `E_p` with ones at `(i,j)` and `(j,i)`.
    pub fn unit<T: Ring>(&self, p: usize) -> Mat<T> {
        let mut v = vec![T::zero(); self.len()];
        v[p] = T::one();
        self.to_matrix(&v)
    }

    /// Matrix of the bilinear form `(p, q) ↦ b(E_p, E_q)`.
    pub fn bilinear_matrix<T: Ring>(&self, mut b: impl FnMut(&Mat<T>, &Mat<T>) -> T) -> Mat<T> {
        let units: Vec<Mat<T>> = (0..self.len()).map(|p| self.unit(p)).collect();
        Mat::from_fn(self.len(), self.len(), |p, q| b(&units[p], &units[q]))
    }

    /// Matrix of a linear map on symmetric tensors: column `q` holds the
    /// components of `f(E_q)`.
    pub fn linear_matrix<T: Ring>(&self, mut f: impl FnMut(&Mat<T>) -> Mat<T>) -> Mat<T> {
        let cols: Vec<Vec<T>> = (0..self.len()).map(|q| self.from_matrix(&f(&self.unit(q)))).collect();
        Mat::from_fn(self.len(), self.len(), |p, q| cols[q][p].clone())
    }
}

/// `h^{ij} = g^{ia} h_ab g^{bj}`.
pub fn raise<T: Ring>(ginv: &Mat<T>, h: &Mat<T>) -> Mat<T> {
    ginv.matmul(h).matmul(ginv)
}

/// `⟨h, k⟩ = g^{ia} g^{jb} h_ij k_ab`.
pub fn inner<T: Ring>(ginv: &Mat<T>, h: &Mat<T>, k: &Mat<T>) -> T {
    let hu = raise(ginv, h);
    let mut acc = T::zero();
    for (a, b) in hu.data().iter().zip(k.data()) {
        acc = acc + a.clone() * b.clone();
    }
    acc
}

/// `H = g^{ij} h_ij`.
pub fn trace<T: Ring>(ginv: &Mat<T>, h: &Mat<T>) -> T {
    let mut acc = T::zero();
    for (a, b) in ginv.data().iter().zip(h.data()) {
        acc = acc + a.clone() * b.clone();
    }
    acc
}

/// Gram matrix `G` with `vᵀGv = |h|²`.
pub fn gram<T: Ring>(basis: &SymComponentBasis, ginv: &Mat<T>) -> Mat<T> {
    basis.bilinear_matrix(|a, b| inner(ginv, a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Rational};

    #[test]
    fn index_matches_pairs() {
        for n in 1..6 {
            let b = SymComponentBasis::new(n);
            for (p, &(i, j)) in b.pairs.iter().enumerate() {
                assert_eq!(b.index(i, j), p);
                assert_eq!(b.index(j, i), p);
            }
        }
    }

    #[test]
    fn gram_of_scaled_identity_metric() {
        let b = SymComponentBasis::new(3);
        let ginv: Mat<Rational> = Mat::diag(&[rat(1, 4), rat(1, 4), rat(1, 4)]);
        let g = gram(&b, &ginv);
        let expect: Vec<Rational> =
            b.pairs.iter().map(|&(i, j)| if i == j { rat(1, 16) } else { rat(2, 16) }).collect();
        assert_eq!(g, Mat::diag(&expect));
    }
}
