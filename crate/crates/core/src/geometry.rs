//! Lie groups encoded by a global frame, its structure constants and a
//! constant frame metric.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::ExpPoly;
use crate::field::{OneForm, VectorField};
use crate::matrix::Mat;
use crate::scalar::{parse_rational, Rational, Ring, Scalar};

/// `[F_i, F_j] = Σ_k c[i][j][k] F_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureConstants<S> {
    dim: usize,
    c: Vec<S>,
}

impl<S: Ring> StructureConstants<S> {
    pub fn zero(dim: usize) -> Self {
        StructureConstants { dim, c: vec![S::zero(); dim * dim * dim] }
    }

    pub fn from_flat(dim: usize, c: Vec<S>) -> Result<Self> {
        if c.len() != dim * dim * dim {
            return Err(Error::Dimension(format!(
                "{} structure constants for dimension {dim}",
                c.len()
            )));
        }
        Ok(StructureConstants { dim, c })
    }

    /// Builds an antisymmetric table from the brackets `[F_i, F_j] = Σ v_k F_k`
    /// for `i < j`; unspecified brackets vanish.
    pub fn from_brackets(dim: usize, brackets: &[(usize, usize, Vec<S>)]) -> Result<Self> {
        let mut sc = StructureConstants::zero(dim);
        for (i, j, v) in brackets {
            if *i >= dim || *j >= dim || v.len() != dim {
                return Err(Error::Dimension(format!("bracket ({i},{j}) out of range")));
            }
            for (k, vk) in v.iter().enumerate() {
                sc.set(*i, *j, k, vk.clone());
                sc.set(*j, *i, k, -vk.clone());
            }
        }
        Ok(sc)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> &S {
        &self.c[(i * self.dim + j) * self.dim + k]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: S) {
        let d = self.dim;
        self.c[(i * d + j) * d + k] = v;
    }

    pub fn flat(&self) -> &[S] {
        &self.c
    }

    pub fn map<T: Ring>(&self, f: impl FnMut(&S) -> T) -> StructureConstants<T> {
        StructureConstants { dim: self.dim, c: self.c.iter().map(f).collect() }
    }

    /// Lie bracket of two algebra elements given by frame components.
    pub fn bracket(&self, x: &[S], y: &[S]) -> Vec<S> {
        let n = self.dim;
        let mut out = vec![S::zero(); n];
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if y[j].is_zero() {
                    continue;
                }
                let xy = x[i].clone() * y[j].clone();
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.get(i, j, k);
                    if !c.is_zero() {
                        *o = o.clone() + xy.clone() * c.clone();
                    }
                }
            }
        }
        out
    }

    /// Matrix of `ad X`: column `j` holds `[X, F_j]`.
    pub fn ad_matrix(&self, x: &[S]) -> Mat<S> {
        let n = self.dim;
        Mat::from_fn(n, n, |k, j| {
            let mut acc = S::zero();
            for (i, xi) in x.iter().enumerate() {
                acc = acc + xi.clone() * self.get(i, j, k).clone();
            }
            acc
        })
    }

    /// Change of basis `F'_a = Σ_i P_ia F_i`.
    pub fn change_basis(&self, p: &Mat<S>) -> Result<Self>
    where
        S: Scalar,
    {
        let n = self.dim;
        let pinv = p.inverse()?;
        let mut out = StructureConstants::zero(n);
        for a in 0..n {
            for b in 0..n {
                let xa: Vec<S> = (0..n).map(|i| p[(i, a)].clone()).collect();
                let xb: Vec<S> = (0..n).map(|i| p[(i, b)].clone()).collect();
                let br = self.bracket(&xa, &xb);
                let coords = pinv.matvec(&br);
                for (c, v) in coords.into_iter().enumerate() {
                    out.set(a, b, c, v);
                }
            }
        }
        Ok(out)
    }

    /// Σ_cyclic [[F_i, F_j], F_k] component `l`.
    pub fn jacobiator(&self, i: usize, j: usize, k: usize, l: usize) -> S {
        let n = self.dim;
        let mut acc = S::zero();
        for m in 0..n {
            acc = acc
                + self.get(i, j, m).clone() * self.get(m, k, l).clone()
                + self.get(j, k, m).clone() * self.get(m, i, l).clone()
                + self.get(k, i, m).clone() * self.get(m, j, l).clone();
        }
        acc
    }

    /// Whether `tr(ad X) = 0` for every `X`.
    pub fn is_unimodular(&self) -> bool {
        let n = self.dim;
        (0..n).all(|i| {
            let mut tr = S::zero();
            for j in 0..n {
                tr = tr + self.get(i, j, j).clone();
            }
            tr.is_zero()
        })
    }
}

/// A homogeneous space given by a global frame of coordinate vector fields.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(into = "GeometryDoc", try_from = "GeometryDoc")]
pub struct LieGeometry {
    pub name: String,
    pub dim: usize,
    pub structure_constants: StructureConstants<Rational>,
    pub frame: Vec<VectorField>,
    pub coframe: Vec<OneForm>,
    pub frame_metric: Mat<Rational>,
    /// `dμ = measure_density · dx_1 ⋯ dx_n`.
    pub measure_density: f64,
}

/// JSON form of [`LieGeometry`], with rationals written as `"p/q"`.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct GeometryDoc {
    name: String,
    dim: usize,
    /// `structure_constants[i][j][k]`.
    structure_constants: Vec<Vec<Vec<String>>>,
    frame: Vec<VectorField>,
    coframe: Vec<OneForm>,
    frame_metric: Vec<Vec<String>>,
    measure_density: f64,
}

impl From<LieGeometry> for GeometryDoc {
    fn from(g: LieGeometry) -> Self {
        let n = g.dim;
        let sc = &g.structure_constants;
        GeometryDoc {
            name: g.name.clone(),
            dim: n,
            structure_constants: (0..n)
                .map(|i| (0..n).map(|j| (0..n).map(|k| sc.get(i, j, k).to_string()).collect()).collect())
                .collect(),
            frame: g.frame.clone(),
            coframe: g.coframe.clone(),
            frame_metric: (0..n)
                .map(|i| (0..n).map(|j| g.frame_metric[(i, j)].to_string()).collect())
                .collect(),
            measure_density: g.measure_density,
        }
    }
}

impl TryFrom<GeometryDoc> for LieGeometry {
    type Error = Error;
    fn try_from(d: GeometryDoc) -> Result<Self> {
        let n = d.dim;
        let shape_err = || Error::Dimension(format!("arrays do not match dimension {n}"));
        if d.structure_constants.len() != n
            || d.structure_constants.iter().any(|r| r.len() != n || r.iter().any(|c| c.len() != n))
            || d.frame_metric.len() != n
            || d.frame_metric.iter().any(|r| r.len() != n)
        {
            return Err(shape_err());
        }
        let mut flat = Vec::with_capacity(n * n * n);
        for plane in &d.structure_constants {
            for row in plane {
                for v in row {
                    flat.push(parse_rational(v)?);
                }
            }
        }
        let mut rows = Vec::with_capacity(n);
        for r in &d.frame_metric {
            rows.push(r.iter().map(|v| parse_rational(v)).collect::<Result<Vec<_>>>()?);
        }
        let g = LieGeometry {
            name: d.name,
            dim: n,
            structure_constants: StructureConstants::from_flat(n, flat)?,
            frame: d.frame,
            coframe: d.coframe,
            frame_metric: Mat::from_rows(&rows)?,
            measure_density: d.measure_density,
        };
        g.check_shapes()?;
        Ok(g)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ViolationKind {
    Antisymmetry,
    Jacobi,
    Duality,
    BracketMismatch,
    MetricNotSymmetric,
    MetricNotPositiveDefinite,
    NonConstantMeasure,
    MeasureMismatch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub indices: Vec<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, indices: Vec<usize>, detail: String) {
        self.violations.push(Violation { kind, indices, detail });
    }
}

/// Checks only the algebraic invariants of a structure-constant table and a
/// metric, so it applies to tables without a coordinate realisation.
pub fn validate_structure<S: Scalar>(
    sc: &StructureConstants<S>,
    metric: &Mat<S>,
) -> Result<ValidationReport> {
    let n = sc.dim();
    if metric.rows() != n || metric.cols() != n {
        return Err(Error::Dimension(format!(
            "metric is {}x{} for a {n}-dimensional algebra",
            metric.rows(),
            metric.cols()
        )));
    }
    let tol = if S::is_exact() { 0.0 } else { 1e-12 };
    let mut report = ValidationReport::default();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let s = sc.get(i, j, k).clone() + sc.get(j, i, k).clone();
                if s.magnitude() > tol {
                    report.push(
                        ViolationKind::Antisymmetry,
                        vec![i, j, k],
                        format!("c[{i}][{j}][{k}] + c[{j}][{i}][{k}] = {:?}", s),
                    );
                }
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in 0..n {
                    let v = sc.jacobiator(i, j, k, l);
                    if v.magnitude() > tol {
                        report.push(
                            ViolationKind::Jacobi,
                            vec![i, j, k, l],
                            format!("cyclic sum of [[F{i},F{j}],F{k}] has component {l} = {v:?}"),
                        );
                    }
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            if (metric[(i, j)].clone() - metric[(j, i)].clone()).magnitude() > tol {
                report.push(ViolationKind::MetricNotSymmetric, vec![i, j], String::new());
            }
        }
    }
    if !metric.is_positive_definite() {
        report.push(ViolationKind::MetricNotPositiveDefinite, vec![], String::new());
    }
    Ok(report)
}

impl LieGeometry {
    /// Assembles a geometry and computes its measure density from the
    /// coframe; fails only on structural (shape) errors.
    pub fn new(
        name: impl Into<String>,
        structure_constants: StructureConstants<Rational>,
        frame: Vec<VectorField>,
        coframe: Vec<OneForm>,
        frame_metric: Mat<Rational>,
    ) -> Result<Self> {
        let dim = structure_constants.dim();
        let mut g = LieGeometry {
            name: name.into(),
            dim,
            structure_constants,
            frame,
            coframe,
            frame_metric,
            measure_density: f64::NAN,
        };
        g.check_shapes()?;
        g.measure_density = g.derived_measure_density().unwrap_or(f64::NAN);
        Ok(g)
    }

    pub fn check_shapes(&self) -> Result<()> {
        let n = self.dim;
        if self.structure_constants.dim() != n {
            return Err(Error::Dimension("structure constants".into()));
        }
        if self.frame.len() != n || self.frame.iter().any(|f| f.dim() != n) {
            return Err(Error::Dimension(format!("frame must hold {n} fields with {n} components")));
        }
        if self.coframe.len() != n || self.coframe.iter().any(|f| f.dim() != n) {
            return Err(Error::Dimension(format!("coframe must hold {n} forms with {n} components")));
        }
        if self.frame_metric.rows() != n || self.frame_metric.cols() != n {
            return Err(Error::Dimension("frame metric".into()));
        }
        Ok(())
    }

    /// `det(φ^i_a)` as a coordinate function.
    pub fn coframe_determinant(&self) -> ExpPoly {
        let n = self.dim;
        let m = Mat::from_fn(n, n, |i, a| self.coframe[i].0[a].clone());
        det_ring(&m)
    }

    /// `√det g · |det φ|`, provided the coframe determinant is constant.
    pub fn derived_measure_density(&self) -> Option<f64> {
        let det_phi = self.coframe_determinant().constant_value()?;
        let det_g = self.frame_metric.determinant();
        Some(det_g.to_f64().sqrt() * det_phi.abs().to_f64())
    }

    /// Full invariant check: the algebraic table plus the coordinate
    /// realisation (duality, brackets, measure).
    pub fn validate(&self) -> Result<ValidationReport> {
        self.check_shapes()?;
        let n = self.dim;
        let mut report = validate_structure(&self.structure_constants, &self.frame_metric)?;
        for i in 0..n {
            for j in 0..n {
                let p = self.coframe[i].pair(&self.frame[j]);
                let expected = if i == j { ExpPoly::int(1) } else { ExpPoly::zero() };
                if p != expected {
                    report.push(
                        ViolationKind::Duality,
                        vec![i, j],
                        format!("φ^{}(F_{}) = {p}", i + 1, j + 1),
                    );
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let br = self.frame[i].bracket(&self.frame[j]);
                let mut expected = VectorField::zero(n);
                for k in 0..n {
                    let c = self.structure_constants.get(i, j, k);
                    if !c.is_zero() {
                        expected = expected.add(&VectorField(
                            self.frame[k].0.iter().map(|f| f.scale(c)).collect(),
                        ));
                    }
                }
                let diff = br.sub(&expected);
                if !diff.is_zero() {
                    report.push(
                        ViolationKind::BracketMismatch,
                        vec![i, j],
                        format!("[F{},F{}] − Σc F = {:?}", i + 1, j + 1, diff.0),
                    );
                }
            }
        }
        match self.derived_measure_density() {
            None => report.push(
                ViolationKind::NonConstantMeasure,
                vec![],
                format!("det φ = {}", self.coframe_determinant()),
            ),
            Some(rho) => {
                if !(rho > 0.0) || (rho - self.measure_density).abs() > 1e-12 * rho {
                    report.push(
                        ViolationKind::MeasureMismatch,
                        vec![],
                        format!("stored {} vs derived {rho}", self.measure_density),
                    );
                }
            }
        }
        Ok(report)
    }

    pub fn metric_f64(&self) -> Mat<f64> {
        self.frame_metric.to_f64()
    }

    /// Coordinate components `g_ab(x) = Σ_ij G_ij φ^i_a(x) φ^j_b(x)` of a
    /// left-invariant metric with frame components `frame_metric`.
    pub fn coordinate_metric(&self, frame_metric: &Mat<f64>, x: &[f64]) -> Mat<f64> {
        let n = self.dim;
        let phi: Vec<Vec<f64>> = self.coframe.iter().map(|f| f.eval(x)).collect();
        Mat::from_fn(n, n, |a, b| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += frame_metric[(i, j)] * phi[i][a] * phi[j][b];
                }
            }
            acc
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: GeometryDoc = serde_json::from_str(s)?;
        LieGeometry::try_from(doc)
    }
}

/// Determinant over a ring by cofactor expansion (small sizes only).
pub fn det_ring<T: Ring>(m: &Mat<T>) -> T {
    let n = m.rows();
    match n {
        0 => T::one(),
        1 => m[(0, 0)].clone(),
        _ => {
            let mut acc = T::zero();
            for j in 0..n {
                if m[(0, j)].is_zero() {
                    continue;
                }
                let minor = Mat::from_fn(n - 1, n - 1, |r, c| {
                    m[(r + 1, if c < j { c } else { c + 1 })].clone()
                });
                let term = m[(0, j)].clone() * det_ring(&minor);
                acc = if j % 2 == 0 { acc + term } else { acc - term };
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn heisenberg() -> StructureConstants<Rational> {
        StructureConstants::from_brackets(3, &[(0, 1, vec![rat(0, 1), rat(0, 1), rat(-2, 1)])])
            .unwrap()
    }

    #[test]
    fn heisenberg_table_is_valid() {
        let r = validate_structure(&heisenberg(), &Mat::diag(&[rat(4, 1), rat(4, 1), rat(4, 1)]))
            .unwrap();
        assert!(r.is_valid(), "{r:?}");
    }

    #[test]
    fn abelian_table_is_valid() {
        let sc = StructureConstants::<Rational>::zero(4);
        assert!(validate_structure(&sc, &Mat::identity(4)).unwrap().is_valid());
    }

    #[test]
    fn one_sided_flip_breaks_antisymmetry() {
        let mut sc = heisenberg();
        sc.set(0, 1, 2, rat(2, 1));
        let r = validate_structure(&sc, &Mat::identity(3)).unwrap();
        assert!(r.has(ViolationKind::Antisymmetry));
        let v = r.violations.iter().find(|v| v.kind == ViolationKind::Antisymmetry).unwrap();
        assert!(v.indices == vec![0, 1, 2] || v.indices == vec![1, 0, 2]);
    }

    #[test]
    fn mismatched_metric_is_a_structural_error() {
        let sc = heisenberg();
        assert!(matches!(
            validate_structure(&sc, &Mat::<Rational>::identity(2)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn indefinite_metric_reported() {
        let r = validate_structure(&heisenberg(), &Mat::diag(&[rat(1, 1), rat(-1, 1), rat(1, 1)]))
            .unwrap();
        assert!(r.has(ViolationKind::MetricNotPositiveDefinite));
    }

    #[test]
    fn jacobi_failure_detected() {
        // [e1,e2]=e3, [e2,e3]=e3 and [e1,e3]=e1 violates Jacobi
        let z = rat(0, 1);
        let o = rat(1, 1);
        let sc = StructureConstants::from_brackets(
            3,
            &[
                (0, 1, vec![z.clone(), z.clone(), o.clone()]),
                (1, 2, vec![z.clone(), z.clone(), o.clone()]),
                (0, 2, vec![o.clone(), z.clone(), z.clone()]),
            ],
        )
        .unwrap();
        assert!(validate_structure(&sc, &Mat::identity(3)).unwrap().has(ViolationKind::Jacobi));
    }
}
