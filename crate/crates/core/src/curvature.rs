//! Levi-Civita connection and curvature of a left-invariant metric.
//!
//! Conventions, fixed once:
//!
//! * `∇_{F_i} F_j = Σ_k Γ[i][j][k] F_k`;
//! * `R(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_[X,Y]` and `R_ijkl = ⟨R(F_i,F_j)F_k, F_l⟩`,
//!   so the sectional curvature of a plane is `⟨R(X,Y)Y,X⟩ / |X∧Y|²`;
//! * `R_jk = Σ_i ⟨R(F_i,F_j)F_k, φ^i⟩`, which makes `g^{pq} R_ipqj = R_ij`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{LieGeometry, StructureConstants};
use crate::matrix::Mat;
use crate::scalar::{Rational, Scalar};

/// Connection, curvature and Ricci data of a left-invariant metric, all in
/// the fixed frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureData<S = Rational> {
    pub dim: usize,
    /// `Γ[i][j][k]`, flattened.
    pub connection: Vec<S>,
    /// `R_ijkl`, flattened.
    pub riemann: Vec<S>,
    pub ricci: Mat<S>,
    pub scalar: S,
    pub metric: Mat<S>,
    pub metric_inverse: Mat<S>,
}

#[inline]
fn i3(n: usize, i: usize, j: usize, k: usize) -> usize {
    (i * n + j) * n + k
}

#[inline]
fn i4(n: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * n + j) * n + k) * n + l
}

/// Christoffel symbols of a constant frame metric from the Koszul formula
/// `2⟨∇_X Y, Z⟩ = ⟨[X,Y],Z⟩ − ⟨[Y,Z],X⟩ + ⟨[Z,X],Y⟩`.
pub fn levi_civita<S: Scalar>(sc: &StructureConstants<S>, g: &Mat<S>) -> Result<Vec<S>> {
    let n = sc.dim();
    let ginv = g.inverse()?;
    let half = S::from_rational(&crate::scalar::rat(1, 2));
    // lowered[i][j][l] = Σ_m c_ijm g_ml
    let mut low = vec![S::zero(); n * n * n];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let mut acc = S::zero();
                for m in 0..n {
                    acc = acc + sc.get(i, j, m).clone() * g[(m, l)].clone();
                }
                low[i3(n, i, j, l)] = acc;
            }
        }
    }
    let mut koszul = vec![S::zero(); n * n * n];
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                koszul[i3(n, i, j, l)] = half.clone()
                    * (low[i3(n, i, j, l)].clone() - low[i3(n, j, l, i)].clone()
                        + low[i3(n, l, i, j)].clone());
            }
        }
    }
    let mut gamma = vec![S::zero(); n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = S::zero();
                for l in 0..n {
                    acc = acc + koszul[i3(n, i, j, l)].clone() * ginv[(l, k)].clone();
                }
                gamma[i3(n, i, j, k)] = acc;
            }
        }
    }
    Ok(gamma)
}

impl<S: Scalar> CurvatureData<S> {
    /// Full curvature data of the metric `g` on the algebra `sc`.
    pub fn compute(sc: &StructureConstants<S>, g: &Mat<S>) -> Result<Self> {
        let gamma = levi_civita(sc, g)?;
        Self::from_connection(sc, g, gamma)
    }

    /// Curvature from a precomputed connection.
    pub fn from_connection(sc: &StructureConstants<S>, g: &Mat<S>, gamma: Vec<S>) -> Result<Self> {
        let n = sc.dim();
        let ginv = g.inverse()?;
        // R(F_i,F_j)F_k = Σ_p rv[i][j][k][p] F_p
        let mut rv = vec![S::zero(); n * n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for p in 0..n {
                        let mut acc = S::zero();
                        for m in 0..n {
                            acc = acc
                                + gamma[i3(n, j, k, m)].clone() * gamma[i3(n, i, m, p)].clone()
                                - gamma[i3(n, i, k, m)].clone() * gamma[i3(n, j, m, p)].clone()
                                - sc.get(i, j, m).clone() * gamma[i3(n, m, k, p)].clone();
                        }
                        rv[i4(n, i, j, k, p)] = acc;
                    }
                }
            }
        }
        let mut riemann = vec![S::zero(); n * n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut acc = S::zero();
                        for p in 0..n {
                            acc = acc + rv[i4(n, i, j, k, p)].clone() * g[(p, l)].clone();
                        }
                        riemann[i4(n, i, j, k, l)] = acc;
                    }
                }
            }
        }
        let ricci = Mat::from_fn(n, n, |j, k| {
            let mut acc = S::zero();
            for i in 0..n {
                acc = acc + rv[i4(n, i, j, k, i)].clone();
            }
            acc
        });
        let mut scalar = S::zero();
        for i in 0..n {
            for j in 0..n {
                scalar = scalar + ginv[(i, j)].clone() * ricci[(i, j)].clone();
            }
        }
        Ok(CurvatureData {
            dim: n,
            connection: gamma,
            riemann,
            ricci,
            scalar,
            metric: g.clone(),
            metric_inverse: ginv,
        })
    }

    #[inline]
    pub fn gamma(&self, i: usize, j: usize, k: usize) -> &S {
        &self.connection[i3(self.dim, i, j, k)]
    }

    #[inline]
    pub fn rm(&self, i: usize, j: usize, k: usize, l: usize) -> &S {
        &self.riemann[i4(self.dim, i, j, k, l)]
    }

    /// `⟨R(X,Y)Y, X⟩`.
    pub fn sectional_numerator(&self, x: &[S], y: &[S]) -> S {
        let n = self.dim;
        let mut acc = S::zero();
        for i in 0..n {
            for j in 0..n {
                let xy = x[i].clone() * y[j].clone();
                if xy.is_zero() {
                    continue;
                }
                for k in 0..n {
                    for l in 0..n {
                        acc = acc
                            + xy.clone() * y[k].clone() * x[l].clone() * self.rm(i, j, k, l).clone();
                    }
                }
            }
        }
        acc
    }

    /// `R_i^k = R_ij g^{jk}`.
    pub fn ricci_mixed(&self) -> Mat<S> {
        self.ricci.matmul(&self.metric_inverse)
    }

    /// `|Rm|² = R_ijkl R^{ijkl}`.
    pub fn norm_sq(&self) -> S {
        let n = self.dim;
        let gi = &self.metric_inverse;
        // raise one index at a time, cycling the index positions
        let mut t = self.riemann.clone();
        for _ in 0..4 {
            let mut u = vec![S::zero(); t.len()];
            for a in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let mut acc = S::zero();
                            for i in 0..n {
                                acc = acc + gi[(a, i)].clone() * t[i4(n, i, j, k, l)].clone();
                            }
                            // store as [j][k][l][a] so the next pass raises j
                            u[i4(n, j, k, l, a)] = acc;
                        }
                    }
                }
            }
            t = u;
        }
        let mut acc = S::zero();
        for (a, b) in t.iter().zip(&self.riemann) {
            acc = acc + a.clone() * b.clone();
        }
        acc
    }

    pub fn to_f64(&self) -> CurvatureData<f64> {
        CurvatureData {
            dim: self.dim,
            connection: self.connection.iter().map(|v| v.to_f64()).collect(),
            riemann: self.riemann.iter().map(|v| v.to_f64()).collect(),
            ricci: self.ricci.to_f64(),
            scalar: self.scalar.to_f64(),
            metric: self.metric.to_f64(),
            metric_inverse: self.metric_inverse.to_f64(),
        }
    }
}

/// The geometry's curvature in exact arithmetic.
pub fn curvature_of(geom: &LieGeometry) -> Result<CurvatureData<Rational>> {
    CurvatureData::compute(&geom.structure_constants, &geom.frame_metric)
}

/// `(R_ij, R)` of an already computed curvature.
pub fn ricci_and_scalar<S: Scalar>(curv: &CurvatureData<S>) -> (Mat<S>, S) {
    (curv.ricci.clone(), curv.scalar.clone())
}

/// Ricci tensor of `g` on `sc` in floating point, as used by the flow.
pub fn ricci_f64(sc: &StructureConstants<f64>, g: &Mat<f64>) -> Result<Mat<f64>> {
    Ok(CurvatureData::compute(sc, g)?.ricci)
}

/// `⟨(ad X)^* Y, Z⟩ = ⟨Y, [X, Z]⟩`.
pub fn ad_star<S: Scalar>(sc: &StructureConstants<S>, g: &Mat<S>, x: &[S], y: &[S]) -> Result<Vec<S>> {
    let ad = sc.ad_matrix(x);
    let gy = g.matvec(y);
    let lowered = ad.transpose().matvec(&gy);
    Ok(g.inverse()?.matvec(&lowered))
}

/// The closed-form sectional numerator for left-invariant metrics:
/// `¼|(ad X)*Y + (ad Y)*X|² − ⟨(ad X)*X, (ad Y)*Y⟩ − ¾|[X,Y]|²
///  − ½⟨[[X,Y],Y],X⟩ − ½⟨[[Y,X],X],Y⟩`.
pub fn sectional_ad_formula<S: Scalar>(
    sc: &StructureConstants<S>,
    g: &Mat<S>,
    x: &[S],
    y: &[S],
) -> Result<S> {
    let ip = |a: &[S], b: &[S]| -> S {
        let gb = g.matvec(b);
        a.iter().zip(&gb).fold(S::zero(), |acc, (p, q)| acc + p.clone() * q.clone())
    };
    let q = |r: i64, d: i64| S::from_rational(&crate::scalar::rat(r, d));
    let axy = ad_star(sc, g, x, y)?;
    let ayx = ad_star(sc, g, y, x)?;
    let axx = ad_star(sc, g, x, x)?;
    let ayy = ad_star(sc, g, y, y)?;
    let sum: Vec<S> = axy.iter().zip(&ayx).map(|(a, b)| a.clone() + b.clone()).collect();
    let xy = sc.bracket(x, y);
    let yx = sc.bracket(y, x);
    let xyy = sc.bracket(&xy, y);
    let yxx = sc.bracket(&yx, x);
    Ok(q(1, 4) * ip(&sum, &sum) - ip(&axx, &ayy) - q(3, 4) * ip(&xy, &xy)
        - q(1, 2) * ip(&xyy, x)
        - q(1, 2) * ip(&yxx, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn round_sphere_has_unit_sectional_curvature() {
        // so(3) with [e1,e2]=e3 and cyclic, metric 4I: orthonormal brackets
        // [E1,E2] = E3/2, a round sphere with K = 1/16
        let z = rat(0, 1);
        let o = rat(1, 1);
        let sc = StructureConstants::from_brackets(
            3,
            &[
                (0, 1, vec![z.clone(), z.clone(), o.clone()]),
                (1, 2, vec![o.clone(), z.clone(), z.clone()]),
                (2, 0, vec![z.clone(), o.clone(), z.clone()]),
            ],
        )
        .unwrap();
        let g = Mat::diag(&[rat(4, 1), rat(4, 1), rat(4, 1)]);
        let c = CurvatureData::compute(&sc, &g).unwrap();
        let x = vec![o.clone(), z.clone(), z.clone()];
        let y = vec![z.clone(), o.clone(), z.clone()];
        // |X∧Y|² = 16
        assert_eq!(c.sectional_numerator(&x, &y), rat(1, 1));
        assert_eq!(c.scalar, rat(3, 8));
    }

    #[test]
    fn ricci_is_trace_of_riemann() {
        let sc = StructureConstants::from_brackets(3, &[(0, 1, vec![rat(0, 1), rat(0, 1), rat(-2, 1)])])
            .unwrap();
        let g = Mat::diag(&[rat(4, 1), rat(4, 1), rat(4, 1)]);
        let c = CurvatureData::compute(&sc, &g).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = rat(0, 1);
                for p in 0..3 {
                    for q in 0..3 {
                        acc += c.metric_inverse[(p, q)].clone() * c.rm(i, p, q, j).clone();
                    }
                }
                assert_eq!(acc, c.ricci[(i, j)]);
            }
        }
    }
}
