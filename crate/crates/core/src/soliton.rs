//! Soliton vector fields and the structure equation `2Rc + αg + L_X g = 0`.

use serde::{Deserialize, Serialize};

use crate::curvature::{curvature_of, CurvatureData};
use crate::error::{Error, Result};
use crate::expr::ExpPoly;
use crate::field::VectorField;
use crate::geometry::LieGeometry;
use crate::matrix::Mat;
use crate::scalar::{Rational, Ring};

/// A geometry together with a vector field `X` (frame components) and an
/// expansion constant `α`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolitonStructure {
    pub name: String,
    pub geom: LieGeometry,
    /// `X = Σ_i x_frame[i] F_i`.
    pub x_frame: Vec<ExpPoly>,
    #[serde(with = "crate::scalar::rational_string")]
    pub alpha: Rational,
    #[serde(default, with = "optional_rational")]
    pub sol3_gamma: Option<Rational>,
}

mod optional_rational {
    use crate::scalar::{parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(v) => s.serialize_some(&v.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|v| parse_rational(&v).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// `X`, its covariant derivative `∇_i X^j` and divergence `δX = −∇_i X^i`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VectorFieldJet {
    pub components: Vec<ExpPoly>,
    pub gradient: Mat<ExpPoly>,
    pub divergence: ExpPoly,
}

impl VectorFieldJet {
    pub fn gradient_at(&self, x: &[f64]) -> Mat<f64> {
        self.gradient.map(|f| f.eval(x))
    }

    /// `δX` when it is constant.
    pub fn constant_divergence(&self) -> Result<Rational> {
        self.divergence.constant_value().ok_or_else(|| {
            Error::Assembly(format!("divergence {} is not constant", self.divergence))
        })
    }
}

impl SolitonStructure {
    pub fn new(
        name: impl Into<String>,
        geom: LieGeometry,
        x_frame: Vec<ExpPoly>,
        alpha: Rational,
    ) -> Result<Self> {
        if x_frame.len() != geom.dim {
            return Err(Error::Dimension(format!(
                "X has {} components on a {}-dimensional geometry",
                x_frame.len(),
                geom.dim
            )));
        }
        Ok(SolitonStructure { name: name.into(), geom, x_frame, alpha, sol3_gamma: None })
    }

    pub fn dim(&self) -> usize {
        self.geom.dim
    }

    pub fn with_alpha(mut self, alpha: Rational) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn curvature(&self) -> Result<CurvatureData> {
        curvature_of(&self.geom)
    }

    /// `X` in coordinates: `X^a = Σ_i X^i F_i^a`.
    pub fn x_coordinate(&self) -> VectorField {
        let n = self.dim();
        let mut out = VectorField::zero(n);
        for (xi, f) in self.x_frame.iter().zip(&self.geom.frame) {
            out = out.add(&f.scaled(xi));
        }
        out
    }

    /// `∇_i X^j = F_i(X^j) + Σ_k X^k Γ[i][k][j]`.
    pub fn covariant_gradient(&self) -> Result<VectorFieldJet> {
        let curv = self.curvature()?;
        self.covariant_gradient_with(&curv)
    }

    pub fn covariant_gradient_with(&self, curv: &CurvatureData) -> Result<VectorFieldJet> {
        let n = self.dim();
        let gradient = Mat::from_fn(n, n, |i, j| {
            let mut acc = self.geom.frame[i].apply(&self.x_frame[j]);
            for k in 0..n {
                let c = curv.gamma(i, k, j);
                if !num_traits::Zero::is_zero(c) {
                    acc = acc + self.x_frame[k].scale(c);
                }
            }
            acc
        });
        let divergence = -gradient.trace();
        Ok(VectorFieldJet { components: self.x_frame.clone(), gradient, divergence })
    }

    /// `(L_X g)_ij = g_jk ∇_i X^k + g_ik ∇_j X^k`.
    pub fn lie_derivative_metric(&self, jet: &VectorFieldJet) -> Mat<ExpPoly> {
        let g = self.geom.frame_metric.map(|r| ExpPoly::constant(r.clone()));
        let low = jet.gradient.matmul(&g);
        low.add(&low.transpose())
    }

    /// `2Rc + αg + L_X g` as a matrix of coordinate functions.
    pub fn residual_tensor(&self) -> Result<Mat<ExpPoly>> {
        let curv = self.curvature()?;
        let jet = self.covariant_gradient_with(&curv)?;
        let two = Rational::from_integer(2.into());
        let base = curv
            .ricci
            .scaled(&two)
            .add(&self.geom.frame_metric.scaled(&self.alpha))
            .map(|r| ExpPoly::constant(r.clone()));
        Ok(base.add(&self.lie_derivative_metric(&jet)))
    }

    /// Whether the residual vanishes identically as a function.
    pub fn is_exact_soliton(&self) -> Result<bool> {
        Ok(self.residual_tensor()?.data().iter().all(num_traits::Zero::is_zero))
    }

    /// Largest entry of `|2Rc + αg + L_X g|` over the sample points.
    pub fn soliton_residual(&self, points: &[Vec<f64>]) -> Result<f64> {
        if points.is_empty() {
            return Err(Error::Empty("no sample points for the soliton residual".into()));
        }
        let res = self.residual_tensor()?;
        let mut worst: f64 = 0.0;
        for p in points {
            if p.len() != self.dim() {
                return Err(Error::Dimension(format!("sample point of length {}", p.len())));
            }
            for f in res.data() {
                worst = worst.max(f.eval(p).abs());
            }
        }
        Ok(worst)
    }

    /// `dξ(F_i,F_j) = ⟨∇_{F_i}X, F_j⟩ − ⟨∇_{F_j}X, F_i⟩` and whether it is
    /// not identically zero, which rules out a gradient soliton.
    pub fn nongradient_check(&self) -> Result<(Mat<ExpPoly>, bool)> {
        let jet = self.covariant_gradient()?;
        let g = self.geom.frame_metric.map(|r| ExpPoly::constant(r.clone()));
        let low = jet.gradient.matmul(&g);
        let dxi = low.sub(&low.transpose());
        let obstructed = !dxi.data().iter().all(num_traits::Zero::is_zero);
        Ok((dxi, obstructed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::scalar::rat;

    #[test]
    fn nil3_gradient_at_origin() {
        let s = catalog::nil3();
        let jet = s.covariant_gradient().unwrap();
        let m = jet.gradient_at(&[0.0, 0.0, 0.0]);
        assert_eq!(m, Mat::diag(&[-1.0, -1.0, -2.0]));
        assert_eq!(jet.constant_divergence().unwrap(), rat(4, 1));
    }

    #[test]
    fn wrong_alpha_leaves_multiple_of_metric() {
        let s = catalog::nil3().with_alpha(rat(2, 1));
        let pts = crate::sampling::sample_points(3, 5, 10.0, 1);
        assert_eq!(s.soliton_residual(&pts).unwrap(), 4.0);
    }

    #[test]
    fn empty_samples_rejected() {
        assert!(matches!(catalog::nil3().soliton_residual(&[]), Err(Error::Empty(_))));
    }
}
