//! Sparse matrices and restarted GMRES for the nonsymmetric systems produced
//! by the resolvent discretisation.

use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Clone, Debug, Default)]
pub struct Csr {
    pub rows: usize,
    pub cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

/// Row-by-row builder; entries within a row may repeat and are summed.
#[derive(Debug)]
pub struct CsrBuilder {
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
    row: Vec<(usize, f64)>,
}

impl CsrBuilder {
    pub fn new(cols: usize) -> Self {
        CsrBuilder { cols, indptr: vec![0], indices: Vec::new(), values: Vec::new(), row: Vec::new() }
    }

    pub fn push(&mut self, col: usize, v: f64) {
        debug_assert!(col < self.cols);
        if v != 0.0 {
            self.row.push((col, v));
        }
    }

    pub fn finish_row(&mut self) {
        self.row.sort_unstable_by_key(|e| e.0);
        let mut last: Option<usize> = None;
        for &(c, v) in &self.row {
            if last == Some(c) {
                *self.values.last_mut().unwrap() += v;
            } else {
                self.indices.push(c);
                self.values.push(v);
                last = Some(c);
            }
        }
        self.row.clear();
        self.indptr.push(self.indices.len());
    }

    pub fn build(self) -> Csr {
        Csr { rows: self.indptr.len() - 1, cols: self.cols, indptr: self.indptr, indices: self.indices, values: self.values }
    }
}

impl Csr {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate().take(self.rows) {
            let mut acc = 0.0;
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *yr = acc;
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.apply(x, &mut y);
        y
    }

    /// `y = Aᵀ x`.
    pub fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (r, &xr) in x.iter().enumerate().take(self.rows) {
            if xr == 0.0 {
                continue;
            }
            for k in self.indptr[r]..self.indptr[r + 1] {
                y[self.indices[k]] += self.values[k] * xr;
            }
        }
    }

    pub fn mul_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.cols];
        self.apply_transpose(x, &mut y);
        y
    }
}

/// A square linear map.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for Csr {
    fn dim(&self) -> usize {
        self.rows
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        Csr::apply(self, x, y)
    }
}

/// The identity, for unpreconditioned solves.
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GmresOptions {
    pub restart: usize,
    pub max_iter: usize,
    /// Relative residual target `‖b − Ax‖/‖b‖`.
    pub tol: f64,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions { restart: 60, max_iter: 20_000, tol: 1e-10 }
    }
}

#[derive(Clone, Debug)]
pub struct GmresResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Right-preconditioned restarted GMRES: solves `A P y = b`, `x = P y`, so the
/// reported residual is the true one.
pub fn gmres(
    a: &dyn LinearOperator,
    precond: &dyn LinearOperator,
    b: &[f64],
    x0: Option<&[f64]>,
    opts: &GmresOptions,
) -> Result<GmresResult> {
    let n = a.dim();
    if b.len() != n || precond.dim() != n {
        return Err(Error::Dimension(format!("system of size {n}, rhs of size {}", b.len())));
    }
    let bnorm = norm(b);
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    if bnorm == 0.0 {
        return Ok(GmresResult { x: vec![0.0; n], iterations: 0, relative_residual: 0.0 });
    }
    let m = opts.restart.max(1);
    let mut tmp = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut iterations = 0;
    let residual = |x: &[f64], tmp: &mut Vec<f64>| {
        a.apply(x, tmp);
        let r: Vec<f64> = b.iter().zip(tmp.iter()).map(|(bi, ai)| bi - ai).collect();
        r
    };
    let mut r = residual(&x, &mut tmp);
    let mut rel = norm(&r) / bnorm;
    while rel > opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::Solver { iterations, residual: rel });
        }
        let beta = norm(&r);
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|x| x / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            precond.apply(&v[k], &mut tmp);
            a.apply(&tmp, &mut w);
            for (j, vj) in v.iter().enumerate() {
                let hj = dot(&w, vj);
                h[j][k] = hj;
                w.iter_mut().zip(vj).for_each(|(wi, vi)| *wi -= hj * vi);
            }
            // one reorthogonalisation pass keeps long cycles stable
            for (j, vj) in v.iter().enumerate() {
                let c = dot(&w, vj);
                h[j][k] += c;
                w.iter_mut().zip(vj).for_each(|(wi, vi)| *wi -= c * vi);
            }
            let hn = norm(&w);
            h[k + 1][k] = hn;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            if d == 0.0 {
                return Err(Error::Solver { iterations, residual: rel });
            }
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            iterations += 1;
            k_used = k + 1;
            if (g[k + 1].abs() / bnorm) <= opts.tol * 0.5 || hn == 0.0 || iterations >= opts.max_iter {
                break;
            }
            v.push(w.iter().map(|x| x / hn).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        let mut z = vec![0.0; n];
        for (yi, vi) in y.iter().zip(&v) {
            z.iter_mut().zip(vi).for_each(|(zj, vj)| *zj += yi * vj);
        }
        precond.apply(&z, &mut tmp);
        x.iter_mut().zip(&tmp).for_each(|(xi, ti)| *xi += ti);
        let prev = rel;
        r = residual(&x, &mut tmp);
        rel = norm(&r) / bnorm;
        if rel > opts.tol && rel >= prev * (1.0 - 1e-12) {
            return Err(Error::Solver { iterations, residual: rel });
        }
    }
    Ok(GmresResult { x, iterations, relative_residual: rel })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize, lo: f64, d: f64, up: f64) -> Csr {
        let mut b = CsrBuilder::new(n);
        for i in 0..n {
            if i > 0 {
                b.push(i - 1, lo);
            }
            b.push(i, d);
            if i + 1 < n {
                b.push(i + 1, up);
            }
            b.finish_row();
        }
        b.build()
    }

    #[test]
    fn builder_sums_duplicates() {
        let mut b = CsrBuilder::new(3);
        b.push(2, 1.0);
        b.push(0, 2.0);
        b.push(2, 3.0);
        b.finish_row();
        let a = b.build();
        assert_eq!(a.indices, vec![0, 2]);
        assert_eq!(a.values, vec![2.0, 4.0]);
        assert_eq!(a.mul_transpose(&[1.0]), vec![2.0, 0.0, 4.0]);
    }

    #[test]
    fn solves_nonsymmetric_system() {
        let n = 200;
        let a = tridiag(n, -1.3, 3.0, -0.7);
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.1).sin()).collect();
        let b = a.mul(&xs);
        let opts = GmresOptions { restart: 20, ..Default::default() };
        let r = gmres(&a, &Identity(n), &b, None, &opts).unwrap();
        assert!(r.relative_residual <= 1e-10);
        let err = r.x.iter().zip(&xs).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = tridiag(5, 1.0, 4.0, 1.0);
        let r = gmres(&a, &Identity(5), &[0.0; 5], None, &GmresOptions::default()).unwrap();
        assert_eq!(r.x, vec![0.0; 5]);
    }
}
