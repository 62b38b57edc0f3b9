//! The built-in geometries and soliton structures.
//!
//! Names: `nil3`, `sol3`, `nil4`, `abelian<n>` and `gaussian<n>` (e.g.
//! `abelian3`, `gaussian4`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::ExpPoly;
use crate::field::{OneForm, VectorField};
use crate::geometry::{LieGeometry, StructureConstants};
use crate::matrix::Mat;
use crate::scalar::{rat, Rational, Ring};
use crate::soliton::SolitonStructure;
use crate::stability::FormMode;

fn c(n: i64, d: i64) -> ExpPoly {
    ExpPoly::constant(rat(n, d))
}

fn x(i: usize) -> ExpPoly {
    ExpPoly::var(i)
}

fn e(v: Vec<i32>) -> ExpPoly {
    ExpPoly::exp_linear(v)
}

fn z() -> ExpPoly {
    ExpPoly::default()
}

fn ri(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&a| rat(a, 1)).collect()
}

/// The Heisenberg group with `[F_1,F_2] = −2F_3` and metric `4I`.
pub fn nil3_geometry() -> LieGeometry {
    let sc = StructureConstants::from_brackets(3, &[(0, 1, ri(&[0, 0, -2]))]).unwrap();
    let frame = vec![
        VectorField(vec![c(2, 1), z(), z()]),
        VectorField(vec![z(), c(2, 1), x(0).scale(&rat(-2, 1))]),
        VectorField(vec![z(), z(), c(2, 1)]),
    ];
    let coframe = vec![
        OneForm(vec![c(1, 2), z(), z()]),
        OneForm(vec![z(), c(1, 2), z()]),
        OneForm(vec![z(), x(0).scale(&rat(1, 2)), c(1, 2)]),
    ];
    let g = Mat::diag(&ri(&[4, 4, 4]));
    LieGeometry::new("nil3", sc, frame, coframe, g).unwrap()
}

/// Solvable group with `[F_1,F_2] = −2F_3`, `[F_3,F_1] = 2F_2` and metric
/// `diag(4, 8, 8)`.
pub fn sol3_geometry() -> LieGeometry {
    let sc = StructureConstants::from_brackets(
        3,
        &[(0, 1, ri(&[0, 0, -2])), (2, 0, ri(&[0, 2, 0]))],
    )
    .unwrap();
    let two = rat(2, 1);
    let frame = vec![
        VectorField(vec![c(2, 1), z(), z()]),
        VectorField(vec![z(), e(vec![-1]).scale(&two), e(vec![1]).scale(&two)]),
        VectorField(vec![z(), e(vec![-1]).scale(&two), e(vec![1]).scale(&rat(-2, 1))]),
    ];
    let q = rat(1, 4);
    let coframe = vec![
        OneForm(vec![c(1, 2), z(), z()]),
        OneForm(vec![z(), e(vec![1]).scale(&q), e(vec![-1]).scale(&q)]),
        OneForm(vec![z(), e(vec![1]).scale(&q), e(vec![-1]).scale(&rat(-1, 4))]),
    ];
    let g = Mat::diag(&ri(&[4, 8, 8]));
    LieGeometry::new("sol3", sc, frame, coframe, g).unwrap()
}

/// The filiform group with `[F_1,F_4] = F_2`, `[F_2,F_4] = F_3`, orthonormal.
pub fn nil4_geometry() -> LieGeometry {
    let sc = StructureConstants::from_brackets(
        4,
        &[(0, 3, ri(&[0, 1, 0, 0])), (1, 3, ri(&[0, 0, 1, 0]))],
    )
    .unwrap();
    let frame = vec![
        VectorField(vec![c(1, 1), z(), z(), z()]),
        VectorField(vec![z(), c(1, 1), z(), z()]),
        VectorField(vec![z(), z(), c(1, 1), z()]),
        VectorField(vec![z(), x(0), x(1), c(1, 1)]),
    ];
    let coframe = vec![
        OneForm(vec![c(1, 1), z(), z(), z()]),
        OneForm(vec![z(), c(1, 1), z(), -x(0)]),
        OneForm(vec![z(), z(), c(1, 1), -x(1)]),
        OneForm(vec![z(), z(), z(), c(1, 1)]),
    ];
    LieGeometry::new("nil4", sc, frame, coframe, Mat::identity(4)).unwrap()
}

/// Euclidean `ℝⁿ` with the coordinate frame.
pub fn euclidean_geometry(name: &str, n: usize) -> LieGeometry {
    let frame = (0..n)
        .map(|i| VectorField((0..n).map(|j| if i == j { c(1, 1) } else { z() }).collect()))
        .collect();
    let coframe = (0..n)
        .map(|i| OneForm((0..n).map(|j| if i == j { c(1, 1) } else { z() }).collect()))
        .collect();
    LieGeometry::new(name, StructureConstants::zero(n), frame, coframe, Mat::identity(n)).unwrap()
}

/// `X = −½x₁F₁ − ½x₂F₂ − (½x₁x₂ + x₃)F₃`, `α = 3`.
pub fn nil3() -> SolitonStructure {
    let h = rat(-1, 2);
    let xf = vec![x(0).scale(&h), x(1).scale(&h), (x(0) * x(1)).scale(&h) - x(2)];
    SolitonStructure::new("nil3", nil3_geometry(), xf, rat(3, 1)).unwrap()
}

/// The sol³ soliton family, `α = 4`:
/// `X = γ(−F₁ − e^{−x₁}x₃F₂ + e^{−x₁}x₃F₃) + (1−γ)(F₁ − e^{x₁}x₂F₂ − e^{x₁}x₂F₃)`.
pub fn sol3_with_gamma(gamma: Rational) -> SolitonStructure {
    let one_minus = rat(1, 1) - gamma.clone();
    let a = e(vec![-1]) * x(2);
    let b = e(vec![1]) * x(1);
    let xf = vec![
        c(1, 1).scale(&(one_minus.clone() - gamma.clone())),
        -a.scale(&gamma) - b.scale(&one_minus),
        a.scale(&gamma) - b.scale(&one_minus),
    ];
    let mut s = SolitonStructure::new("sol3", sol3_geometry(), xf, rat(4, 1)).unwrap();
    s.sol3_gamma = Some(gamma);
    s
}

pub fn sol3() -> SolitonStructure {
    sol3_with_gamma(rat(1, 2))
}

/// `X = −2x₁F₁ + (−3x₂ + x₁x₄)F₂ + (−4x₃ + x₂x₄)F₃ − x₄F₄`, `α = 3`.
pub fn nil4() -> SolitonStructure {
    let xf = vec![
        x(0).scale(&rat(-2, 1)),
        x(1).scale(&rat(-3, 1)) + x(0) * x(3),
        x(2).scale(&rat(-4, 1)) + x(1) * x(3),
        -x(3),
    ];
    SolitonStructure::new("nil4", nil4_geometry(), xf, rat(3, 1)).unwrap()
}

/// `nil4` with the field halved. This is the field that actually satisfies
/// `2Rc + 3g + L_Xg = 0` for the geometry above; the `nil4` entry keeps the
/// larger field that the stability constants were derived for.
pub fn nil4_half() -> SolitonStructure {
    let s = nil4();
    let xf = s.x_frame.iter().map(|f| f.scale(&rat(1, 2))).collect();
    SolitonStructure::new("nil4-half", nil4_geometry(), xf, rat(3, 1)).unwrap()
}

/// Flat `ℝⁿ` with `X = 0`, `α = 0`.
pub fn abelian(n: usize) -> SolitonStructure {
    let name = format!("abelian{n}");
    SolitonStructure::new(name.clone(), euclidean_geometry(&name, n), vec![z(); n], rat(0, 1))
        .unwrap()
}

/// The Gaussian soliton on `ℝⁿ`: `X = −(α/2)x`, the gradient of `−(α/4)|x|²`.
pub fn gaussian(n: usize, alpha: Rational) -> SolitonStructure {
    let name = format!("gaussian{n}");
    let k = -alpha.clone() / rat(2, 1);
    let xf = (0..n).map(|i| x(i).scale(&k)).collect();
    SolitonStructure::new(name.clone(), euclidean_geometry(&name, n), xf, alpha).unwrap()
}

/// Stability constants claimed for the catalog solitons.
pub fn omega_claimed(name: &str) -> Option<f64> {
    match name {
        "nil3" => Some(0.5),
        "sol3" => Some((5.0 - 17f64.sqrt()) / 2.0),
        "nil4" => Some(0.0057),
        _ => None,
    }
}

/// Which integrated form carries the stability claim.
pub fn default_mode(name: &str) -> FormMode {
    if name == "sol3" {
        FormMode::Koiso
    } else {
        FormMode::Raw
    }
}

/// A catalog soliton with its bookkeeping.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub soliton: SolitonStructure,
    pub omega_claimed: Option<f64>,
    pub mode: FormMode,
}

fn parse_dim(name: &str, prefix: &str) -> Option<usize> {
    let rest = name.strip_prefix(prefix)?;
    let n: usize = rest.strip_prefix('<').and_then(|r| r.strip_suffix('>')).unwrap_or(rest).parse().ok()?;
    (1..=8).contains(&n).then_some(n)
}

/// Soliton structure by catalog name. `gamma` only applies to `sol3`,
/// `alpha` overrides the expansion constant (the Gaussian default is 1).
pub fn soliton_by_name(
    name: &str,
    gamma: Option<Rational>,
    alpha: Option<Rational>,
) -> Result<CatalogEntry> {
    let mut s = match name {
        "nil3" => nil3(),
        "sol3" => sol3_with_gamma(gamma.clone().unwrap_or_else(|| rat(1, 2))),
        "nil4" => nil4(),
        "nil4-half" => nil4_half(),
        _ => {
            if let Some(n) = parse_dim(name, "abelian") {
                abelian(n)
            } else if let Some(n) = parse_dim(name, "gaussian") {
                gaussian(n, alpha.clone().unwrap_or_else(|| rat(1, 1)))
            } else {
                return Err(Error::UnknownGeometry(name.to_string()));
            }
        }
    };
    if gamma.is_some() && name != "sol3" {
        return Err(Error::Domain("gamma only applies to sol3".into()));
    }
    if let Some(a) = alpha {
        s = s.with_alpha(a);
    }
    let key = s.name.clone();
    Ok(CatalogEntry { omega_claimed: omega_claimed(&key), mode: default_mode(&key), soliton: s })
}

pub fn geometry_by_name(name: &str) -> Result<LieGeometry> {
    Ok(soliton_by_name(name, None, None)?.soliton.geom)
}

/// Names of the three nonflat solitons.
pub const SOLITONS: [&str; 3] = ["nil3", "sol3", "nil4"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        for n in ["nil3", "sol3", "nil4", "nil4-half", "abelian3", "gaussian<4>"] {
            assert!(soliton_by_name(n, None, None).is_ok(), "{n}");
        }
        assert!(matches!(geometry_by_name("nil5"), Err(Error::UnknownGeometry(_))));
        assert!(matches!(geometry_by_name("abelian0"), Err(Error::UnknownGeometry(_))));
    }

    #[test]
    fn catalog_geometries_validate() {
        for n in ["nil3", "sol3", "nil4", "abelian2", "gaussian3"] {
            let g = geometry_by_name(n).unwrap();
            let r = g.validate().unwrap();
            assert!(r.is_valid(), "{n}: {r:?}");
            assert!((g.measure_density - 1.0).abs() < 1e-15, "{n}");
        }
    }
}
