//! Finite-difference resolvent problems `(λ − L)u = f` on a coordinate box.
//!
//! Tensor fields are stored by frame components `u_ij`, `i ≤ j`, at the nodes
//! of a uniform grid with zero Dirichlet data on the outer layer. The weak form
//!
//! `β_λ(u, v) = λ(u, v) + (∇u, ∇v) + (∇_ξ u, v) − (ζu, v)`
//!
//! is discretised with a centred-difference covariant gradient `D`, so that
//! `(∇u, ∇v) = (Dv)ᵀ W (Du)`. The advection term is split into its
//! skew-symmetric part plus `½(δξ u, v)` with `δξ` evaluated exactly; the
//! discrete form therefore satisfies
//! `β_λ(u, u) = (λ)|u|² + |Du|² + ((½δξ − ζ)u, u)` identically, and the
//! Lax–Milgram bounds carry over to the grid without discretisation slack
//! whenever the pointwise coercivity inequality holds at every node.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::omega_claimed;
use crate::curvature::CurvatureData;
use crate::eigen::{generalized_max, symmetric_eigen};
use crate::error::{Error, Result};
use crate::krylov::{gmres, Csr, CsrBuilder, GmresOptions, LinearOperator};
use crate::matrix::Mat;
use crate::sampling::{random_unit, rng};
use crate::scalar::Scalar;
use crate::soliton::SolitonStructure;
use crate::stability::{koiso_curvature_form, StabilityContext};
use crate::symtensor::SymComponentBasis;

/// Uniform tensor-product grid on `[−R, R]ⁿ`, boundary nodes included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub box_radius: f64,
    pub shape: Vec<usize>,
    pub spacing: Vec<f64>,
}

impl Grid {
    pub fn new(dim: usize, points: usize, box_radius: f64) -> Result<Self> {
        if points < 3 {
            return Err(Error::Domain(format!("need at least 3 points per axis, got {points}")));
        }
        if !(box_radius > 0.0) {
            return Err(Error::Domain(format!("box radius must be positive, got {box_radius}")));
        }
        let h = 2.0 * box_radius / (points - 1) as f64;
        Ok(Grid { box_radius, shape: vec![points; dim], spacing: vec![h; dim] })
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn node_count(&self) -> usize {
        self.shape.iter().product()
    }

    /// Volume of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn multi_index(&self, mut node: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = node % self.shape[a];
            node /= self.shape[a];
        }
        idx
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &s)| acc * s + i)
    }

    pub fn coords(&self, node: usize) -> Vec<f64> {
        self.multi_index(node)
            .iter()
            .zip(&self.spacing)
            .map(|(&i, &h)| -self.box_radius + i as f64 * h)
            .collect()
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.multi_index(node).iter().zip(&self.shape).any(|(&i, &s)| i == 0 || i + 1 == s)
    }
}

/// Frame components of a (possibly complex) symmetric 2-tensor field on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridTensorField {
    pub grid: Grid,
    /// Number of independent components per node.
    pub components: usize,
    /// `values[node * components + p]`, real parts.
    pub values: Vec<f64>,
    /// Imaginary parts, absent for real fields.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag: Option<Vec<f64>>,
}

impl GridTensorField {
    pub fn zeros(grid: &Grid, components: usize) -> Self {
        GridTensorField { grid: grid.clone(), components, values: vec![0.0; grid.node_count() * components], imag: None }
    }

    /// Samples `f` at interior nodes; boundary nodes are set to zero.
    pub fn from_fn(grid: &Grid, components: usize, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Self {
        let mut out = Self::zeros(grid, components);
        for node in 0..grid.node_count() {
            if grid.is_boundary(node) {
                continue;
            }
            let v = f(&grid.coords(node));
            out.values[node * components..(node + 1) * components].copy_from_slice(&v[..components]);
        }
        out
    }

    pub fn at(&self, node: usize) -> &[f64] {
        &self.values[node * self.components..(node + 1) * self.components]
    }

    /// Largest absolute value on the boundary layer.
    pub fn boundary_max(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for node in 0..self.grid.node_count() {
            if self.grid.is_boundary(node) {
                for v in self.at(node) {
                    worst = worst.max(v.abs());
                }
                if let Some(im) = &self.imag {
                    for v in &im[node * self.components..(node + 1) * self.components] {
                        worst = worst.max(v.abs());
                    }
                }
            }
        }
        worst
    }

    /// `‖u‖₀` for the component Gram matrix `gram`.
    pub fn norm0(&self, gram: &Mat<f64>) -> f64 {
        let vol = self.grid.cell_volume();
        let mut acc = 0.0;
        for node in 0..self.grid.node_count() {
            acc += gram.quad(self.at(node));
            if let Some(im) = &self.imag {
                acc += gram.quad(&im[node * self.components..(node + 1) * self.components]);
            }
        }
        (acc * vol).sqrt()
    }
}

/// Compactly supported test profile `(1 − (|x − c|/ρ)²)⁴` times a fixed
/// component vector.
pub fn bump_field(grid: &Grid, center: &[f64], radius: f64, components: &[f64]) -> GridTensorField {
    GridTensorField::from_fn(grid, components.len(), |x| {
        let s2: f64 = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / (radius * radius);
        let w = if s2 < 1.0 { (1.0 - s2).powi(4) } else { 0.0 };
        components.iter().map(|c| c * w).collect()
    })
}

/// The default right-hand side: a bump of radius 2 at the origin in the
/// direction of the frame metric.
pub fn default_bump(s: &SolitonStructure, grid: &Grid) -> GridTensorField {
    let b = SymComponentBasis::new(s.dim());
    let g = s.geom.metric_f64();
    let comps = b.from_matrix(&g);
    bump_field(grid, &vec![0.0; s.dim()], 2.0, &comps)
}

/// Data of the cutoff approximants `ξ_k = γ_k(r)X` and `ζ_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffData {
    pub k: usize,
    pub epsilon: f64,
    /// Radial growth constant with `dr(X) ≥ −Cr`.
    pub c: f64,
    pub omega: f64,
}

impl CutoffData {
    pub const DEFAULT_EPSILON: f64 = 0.1;

    pub fn new(k: usize, epsilon: f64, c: f64, omega: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("cutoff index k must be positive".into()));
        }
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::Domain(format!("ε must lie in (0, 1/2), got {epsilon}")));
        }
        let cd = CutoffData { k, epsilon, c, omega };
        if cd.max_slope() > 2.0 + 1e-12 {
            return Err(Error::Domain(format!(
                "a smoothstep profile with ε = {epsilon} has slope {} < −2",
                -cd.max_slope()
            )));
        }
        Ok(cd)
    }

    /// Cutoff for a soliton with its BadTerm constant and the claimed ω.
    pub fn for_soliton(s: &SolitonStructure, k: usize, omega: f64) -> Result<Self> {
        let c = badterm_constant(s, 2000, crate::sampling::DEFAULT_SEED)?.c;
        Self::new(k, Self::DEFAULT_EPSILON, c, omega)
    }

    fn width(&self) -> f64 {
        1.0 - 2.0 * self.epsilon
    }

    fn max_slope(&self) -> f64 {
        1.5 / self.width()
    }

    fn start(&self) -> f64 {
        self.k as f64 - 1.0 + self.epsilon
    }

    /// `γ_k(s)`: 1 below `k − 1 + ε`, 0 above `k − ε`, cubic smoothstep between.
    pub fn gamma(&self, s: f64) -> f64 {
        let t = ((s - self.start()) / self.width()).clamp(0.0, 1.0);
        1.0 - t * t * (3.0 - 2.0 * t)
    }

    pub fn gamma_prime(&self, s: f64) -> f64 {
        let t = (s - self.start()) / self.width();
        if t <= 0.0 || t >= 1.0 {
            0.0
        } else {
            -6.0 * t * (1.0 - t) / self.width()
        }
    }

    /// Whether `r` lies in the inner branch `r < k − 1` of `ζ_k`.
    pub fn inner(&self, r: f64) -> bool {
        r < self.k as f64 - 1.0
    }
}

/// Per-node coefficients of `ξ` and `ζ`.
#[derive(Clone, Debug)]
pub struct NodeCoefficients {
    /// Frame components of `ξ`.
    pub xi: Vec<f64>,
    pub delta_xi: f64,
    /// Matrix of `ζ` on the component basis.
    pub zeta: Mat<f64>,
}

/// Pointwise evaluation of the coefficient fields for a soliton, with or
/// without cutoff.
pub struct Coefficients {
    pub soliton: SolitonStructure,
    pub context: StabilityContext,
    pub cutoff: Option<CutoffData>,
    pub gram: Mat<f64>,
}

impl Coefficients {
    pub fn new(s: &SolitonStructure, cutoff: Option<CutoffData>) -> Result<Self> {
        let context = StabilityContext::new(s)?;
        let gram = context.gram().to_f64();
        Ok(Coefficients { soliton: s.clone(), context, cutoff, gram })
    }

    pub fn at(&self, x: &[f64]) -> NodeCoefficients {
        let s = &self.soliton;
        let xi: Vec<f64> = s.x_frame.iter().map(|f| f.eval(x)).collect();
        let delta = self.context.jet.divergence.eval(x);
        let z = self.context.zeroth_order_symbol(x);
        match &self.cutoff {
            None => NodeCoefficients { xi, delta_xi: delta, zeta: z },
            Some(cd) => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let gam = cd.gamma(r);
                let drx = if r > 0.0 {
                    s.x_coordinate().eval(x).iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / r
                } else {
                    0.0
                };
                let zeta = if cd.inner(r) {
                    z
                } else {
                    z.scaled(&gam).sub(&Mat::identity(z.rows()).scaled(&(cd.c * cd.k as f64 + cd.omega)))
                };
                NodeCoefficients {
                    xi: xi.iter().map(|v| v * gam).collect(),
                    delta_xi: gam * delta - cd.gamma_prime(r) * drx,
                    zeta,
                }
            }
        }
    }

    /// Symmetric matrix of `v ↦ ⟨½(δξ)v − ζv, v⟩`.
    pub fn coercivity_matrix(&self, c: &NodeCoefficients) -> Mat<f64> {
        let gz = self.gram.matmul(&c.zeta);
        self.gram.scaled(&(0.5 * c.delta_xi)).sub(&gz).symmetric_part()
    }

    /// Smallest `⟨½(δξ)v − ζv, v⟩/|v|²` at `x`.
    pub fn coercivity_at(&self, x: &[f64]) -> Result<f64> {
        let c = self.at(x);
        let (l, _) = generalized_max(&self.coercivity_matrix(&c).scaled(&-1.0), &self.gram)?;
        Ok(-l)
    }
}

/// `dr(X) ≥ −Cr` constant.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BadTermReport {
    /// `max(w)` when `X = −Σ w_i x_i ∂_i`.
    pub exact: Option<f64>,
    /// Sphere-sampling estimate refined by projected ascent.
    pub sampled: f64,
    pub c: f64,
}

fn radial_ratio(xc: &crate::field::VectorField, x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    -xc.eval(x).iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / r2
}

/// Maximises `−⟨X(x), x⟩/|x|²` over the unit sphere by sampling followed by
/// projected gradient ascent from the best samples, and checks that the value
/// does not depend on the radius (otherwise no constant `C` exists).
pub fn badterm_constant(s: &SolitonStructure, samples: usize, seed: u64) -> Result<BadTermReport> {
    let n = s.dim();
    let xc = s.x_coordinate();
    let mut r = rng(seed);
    let mut pts: Vec<(f64, Vec<f64>)> = (0..samples.max(1))
        .map(|_| {
            let u = random_unit(&mut r, n);
            (radial_ratio(&xc, &u), u)
        })
        .collect();
    pts.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = f64::NEG_INFINITY;
    for (_, start) in pts.iter().take(8) {
        let mut u = start.clone();
        let mut val = radial_ratio(&xc, &u);
        let mut step = 0.3;
        for _ in 0..2000 {
            let h = 1e-7;
            let grad: Vec<f64> = (0..n)
                .map(|i| {
                    let mut up = u.clone();
                    up[i] += h;
                    let mut dn = u.clone();
                    dn[i] -= h;
                    (radial_ratio(&xc, &up) - radial_ratio(&xc, &dn)) / (2.0 * h)
                })
                .collect();
            let cand: Vec<f64> = u.iter().zip(&grad).map(|(a, g)| a + step * g).collect();
            let nc = cand.iter().map(|v| v * v).sum::<f64>().sqrt();
            let cand: Vec<f64> = cand.iter().map(|v| v / nc).collect();
            let cv = radial_ratio(&xc, &cand);
            if cv > val {
                u = cand;
                val = cv;
                step = (step * 1.5).min(1.0);
            } else {
                step *= 0.5;
                if step < 1e-14 {
                    break;
                }
            }
        }
        // radial invariance: the ratio must be degree-0 homogeneous
        for scale in [0.5, 2.0, 4.0] {
            let y: Vec<f64> = u.iter().map(|v| v * scale).collect();
            let d = (radial_ratio(&xc, &y) - val).abs();
            if d > 1e-9 * (1.0 + val.abs()) {
                return Err(Error::Convergence(format!(
                    "{}: −⟨X, x⟩/|x|² varies with radius along {u:?} (by {d:e}); no linear bound dr(X) ≥ −Cr found",
                    s.name
                )));
            }
        }
        best = best.max(val);
    }
    let exact = xc.diagonal_linear_weights().map(|w| w.iter().map(Scalar::to_f64).fold(f64::NEG_INFINITY, f64::max));
    Ok(BadTermReport { exact, sampled: best, c: exact.unwrap_or(best) })
}

/// Minimum GoodTerm quotient over sampled `(x, v)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GoodTermReport {
    pub min_quotient: f64,
    pub argmin_point: Vec<f64>,
    /// Smallest eigenvalue of the pencil over the sampled points.
    pub min_pencil: f64,
    pub samples: usize,
}

/// `⟨½(δX)v − Zv, v⟩/|v|²` over random points of radius ≤ `radius` and random
/// component vectors `v`.
pub fn goodterm_check(s: &SolitonStructure, samples: usize, radius: f64, seed: u64) -> Result<GoodTermReport> {
    let coeff = Coefficients::new(s, None)?;
    let n = s.dim();
    let m = coeff.gram.rows();
    let mut r = rng(seed);
    let mut min_q = f64::INFINITY;
    let mut min_pencil = f64::INFINITY;
    let mut argmin = vec![0.0; n];
    let pts = crate::sampling::sample_points(n, samples.max(1) / 100 + 1, radius, seed);
    let mats: Vec<Mat<f64>> = pts.iter().map(|x| coeff.coercivity_matrix(&coeff.at(x))).collect();
    for (x, a) in pts.iter().zip(&mats) {
        let (l, _) = generalized_max(&a.scaled(&-1.0), &coeff.gram)?;
        min_pencil = min_pencil.min(-l);
        let _ = x;
    }
    for i in 0..samples {
        let j = i % pts.len();
        let v = random_unit(&mut r, m);
        let q = mats[j].quad(&v) / coeff.gram.quad(&v);
        if q < min_q {
            min_q = q;
            argmin = pts[j].clone();
        }
    }
    Ok(GoodTermReport { min_quotient: min_q, argmin_point: argmin, min_pencil, samples })
}

/// The GoodTerm quotient at `x` along the worst direction of the pencil.
pub fn goodterm_worst_direction(s: &SolitonStructure, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let coeff = Coefficients::new(s, None)?;
    let a = coeff.coercivity_matrix(&coeff.at(x));
    let (l, v) = generalized_max(&a.scaled(&-1.0), &coeff.gram)?;
    let q = a.quad(&v) / coeff.gram.quad(&v);
    debug_assert!((q + l).abs() < 1e-9 * (1.0 + l.abs()));
    Ok((q, v))
}

/// Assembled discrete operators on the interior nodes.
pub struct Discretization {
    pub grid: Grid,
    pub basis: SymComponentBasis,
    pub gram: Mat<f64>,
    /// Interior node → full grid node.
    pub interior: Vec<usize>,
    /// Covariant gradient, rows `(node, a, p)`.
    pub d: Csr,
    /// `∇_ξ`, rows `(node, p)`.
    pub t: Csr,
    /// Block `g^{ab} G_pq` of the gradient inner product.
    pub w: Mat<f64>,
    pub vol: f64,
    pub coefficients: Vec<NodeCoefficients>,
    /// Smallest pointwise coercivity constant over interior nodes.
    pub pointwise_min: f64,
    pub cutoff: Option<CutoffData>,
}

/// Matrix `C_a` with `(∇_a u)_p = F_a(u_p) − (C_a u)_p`.
fn connection_blocks(curv: &CurvatureData<f64>, basis: &SymComponentBasis) -> Vec<Mat<f64>> {
    let n = curv.dim;
    (0..n)
        .map(|a| {
            basis.linear_matrix(|h: &Mat<f64>| {
                Mat::from_fn(n, n, |i, j| {
                    (0..n).map(|k| curv.gamma(a, i, k) * h[(k, j)] + curv.gamma(a, j, k) * h[(i, k)]).sum()
                })
            })
        })
        .collect()
}

impl Discretization {
    pub fn new(s: &SolitonStructure, grid: &Grid, cutoff: Option<CutoffData>) -> Result<Self> {
        let n = s.dim();
        if grid.dim() != n {
            return Err(Error::Dimension(format!("grid has dimension {}, soliton {n}", grid.dim())));
        }
        let coeff = Coefficients::new(s, cutoff.clone())?;
        let curv = coeff.context.curvature.to_f64();
        let basis = SymComponentBasis::new(n);
        let m = basis.len();
        let gram = coeff.gram.clone();
        let ginv = curv.metric_inverse.clone();
        let w = Mat::from_fn(n * m, n * m, |r, c| ginv[(r / m, c / m)] * gram[(r % m, c % m)]);
        let conn = connection_blocks(&curv, &basis);

        let total = grid.node_count();
        let mut map = vec![usize::MAX; total];
        let mut interior = Vec::new();
        for node in 0..total {
            if !grid.is_boundary(node) {
                map[node] = interior.len();
                interior.push(node);
            }
        }
        let nu = interior.len() * m;
        let mut db = CsrBuilder::new(nu);
        let mut tb = CsrBuilder::new(nu);
        let mut coefficients = Vec::with_capacity(interior.len());
        let mut pointwise_min = f64::INFINITY;
        let strides: Vec<usize> = (0..n).map(|mu| grid.shape[mu + 1..].iter().product()).collect();
        let mut row_a: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n * m];
        for (iu, &node) in interior.iter().enumerate() {
            let x = grid.coords(node);
            let nc = coeff.at(&x);
            let a_mat = coeff.coercivity_matrix(&nc);
            let (l, _) = generalized_max(&a_mat.scaled(&-1.0), &gram)?;
            pointwise_min = pointwise_min.min(-l);
            for (a, ca) in conn.iter().enumerate() {
                let fa: Vec<f64> = s.geom.frame[a].0.iter().map(|f| f.eval(&x)).collect();
                for p in 0..m {
                    let row = &mut row_a[a * m + p];
                    row.clear();
                    for (mu, &coef) in fa.iter().enumerate() {
                        if coef == 0.0 {
                            continue;
                        }
                        let c = coef / (2.0 * grid.spacing[mu]);
                        for (sign, nb) in [(1.0, node + strides[mu]), (-1.0, node - strides[mu])] {
                            let j = map[nb];
                            if j != usize::MAX {
                                row.push((j * m + p, sign * c));
                            }
                        }
                    }
                    for q in 0..m {
                        let v = ca[(p, q)];
                        if v != 0.0 {
                            row.push((iu * m + q, -v));
                        }
                    }
                    for &(col, v) in row.iter() {
                        db.push(col, v);
                    }
                    db.finish_row();
                }
            }
            for p in 0..m {
                for (a, &xa) in nc.xi.iter().enumerate() {
                    if xa == 0.0 {
                        continue;
                    }
                    for &(col, v) in &row_a[a * m + p] {
                        tb.push(col, xa * v);
                    }
                }
                tb.finish_row();
            }
            coefficients.push(nc);
        }
        Ok(Discretization {
            grid: grid.clone(),
            basis,
            gram,
            interior,
            d: db.build(),
            t: tb.build(),
            w,
            vol: grid.cell_volume(),
            coefficients,
            pointwise_min,
            cutoff,
        })
    }

    pub fn components(&self) -> usize {
        self.basis.len()
    }

    pub fn unknowns(&self) -> usize {
        self.interior.len() * self.components()
    }

    /// Interior values of a field.
    pub fn restrict(&self, f: &[f64]) -> Vec<f64> {
        let m = self.components();
        let mut out = Vec::with_capacity(self.unknowns());
        for &node in &self.interior {
            out.extend_from_slice(&f[node * m..(node + 1) * m]);
        }
        out
    }

    /// Full-grid values from interior values.
    pub fn extend(&self, u: &[f64]) -> Vec<f64> {
        let m = self.components();
        let mut out = vec![0.0; self.grid.node_count() * m];
        for (iu, &node) in self.interior.iter().enumerate() {
            out[node * m..(node + 1) * m].copy_from_slice(&u[iu * m..(iu + 1) * m]);
        }
        out
    }

    fn block_apply(&self, blk: &Mat<f64>, x: &[f64], y: &mut [f64], scale: f64) {
        let b = blk.rows();
        for (xc, yc) in x.chunks(b).zip(y.chunks_mut(b)) {
            for i in 0..b {
                let mut acc = 0.0;
                for j in 0..b {
                    acc += blk[(i, j)] * xc[j];
                }
                yc[i] = scale * acc;
            }
        }
    }

    /// Mass matrix `M u`.
    pub fn mass(&self, u: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; u.len()];
        self.block_apply(&self.gram, u, &mut y, self.vol);
        y
    }

    /// `‖u‖₀²`.
    pub fn norm0_sq(&self, u: &[f64]) -> f64 {
        dot(u, &self.mass(u))
    }

    /// `‖∇u‖²` of the discrete gradient.
    pub fn grad_sq(&self, u: &[f64]) -> f64 {
        let du = self.d.mul(u);
        let mut wdu = vec![0.0; du.len()];
        self.block_apply(&self.w, &du, &mut wdu, self.vol);
        dot(&du, &wdu)
    }

    /// `(∇_ξ u, u) − ½((δξ)u, u)`, which vanishes for the continuous problem.
    pub fn integration_by_parts_defect(&self, u: &[f64]) -> f64 {
        let tu = self.t.mul(u);
        let m = self.components();
        let adv = dot(&tu, &self.mass(u));
        let mut pot = 0.0;
        for (iu, c) in self.coefficients.iter().enumerate() {
            pot += 0.5 * c.delta_xi * self.gram.quad(&u[iu * m..(iu + 1) * m]) * self.vol;
        }
        adv - pot
    }

    /// `β_λ` for real `λ` as a linear operator.
    pub fn operator(&self, lambda: f64) -> ResolventOperator<'_> {
        let m = self.components();
        let potential = self
            .coefficients
            .iter()
            .map(|c| {
                let gz = self.gram.matmul(&c.zeta);
                self.gram.scaled(&(0.5 * c.delta_xi)).sub(&gz).scaled(&self.vol)
            })
            .collect();
        let _ = m;
        ResolventOperator { disc: self, lambda, potential }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `A = λM + DᵀWD + ½(MT − TᵀM) + P` with `P` the node blocks of
/// `½(δξ)G − Gζ`.
pub struct ResolventOperator<'a> {
    pub disc: &'a Discretization,
    pub lambda: f64,
    potential: Vec<Mat<f64>>,
}

impl ResolventOperator<'_> {
    /// Inverse diagonal blocks of `A` (block Jacobi preconditioner).
    pub fn block_jacobi(&self) -> Result<BlockDiagonal> {
        let d = self.disc;
        let m = d.components();
        let n = d.grid.dim();
        let nodes = d.interior.len();
        let mut blocks: Vec<Mat<f64>> = (0..nodes)
            .map(|i| d.gram.scaled(&(self.lambda * d.vol)).add(&self.potential[i]))
            .collect();
        let wv = d.w.scaled(&d.vol);
        let mg = d.gram.scaled(&d.vol);
        for r in 0..nodes {
            let mut by_col: BTreeMap<usize, Mat<f64>> = BTreeMap::new();
            for lr in 0..n * m {
                let row = r * n * m + lr;
                for k in d.d.indptr[row]..d.d.indptr[row + 1] {
                    let col = d.d.indices[k];
                    let e = by_col.entry(col / m).or_insert_with(|| Mat::zeros(n * m, m));
                    e[(lr, col % m)] += d.d.values[k];
                }
            }
            for (c, sub) in by_col {
                let add = sub.transpose().matmul(&wv).matmul(&sub);
                blocks[c] = blocks[c].add(&add);
            }
            // diagonal block of the skew advection part
            let mut tcc = Mat::zeros(m, m);
            for p in 0..m {
                let row = r * m + p;
                for k in d.t.indptr[row]..d.t.indptr[row + 1] {
                    let col = d.t.indices[k];
                    if col / m == r {
                        tcc[(p, col % m)] += d.t.values[k];
                    }
                }
            }
            let mt = mg.matmul(&tcc);
            blocks[r] = blocks[r].add(&mt.sub(&mt.transpose()).scaled(&0.5));
        }
        let inv = blocks.iter().map(|b| b.inverse()).collect::<Result<Vec<_>>>()?;
        Ok(BlockDiagonal { blocks: inv })
    }
}

impl LinearOperator for ResolventOperator<'_> {
    fn dim(&self) -> usize {
        self.disc.unknowns()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let d = self.disc;
        let m = d.components();
        let du = d.d.mul(x);
        let mut wdu = vec![0.0; du.len()];
        d.block_apply(&d.w, &du, &mut wdu, d.vol);
        d.d.apply_transpose(&wdu, y);
        let mx = d.mass(x);
        let tx = d.t.mul(x);
        let mtx = d.mass(&tx);
        let ttmx = d.t.mul_transpose(&mx);
        for i in 0..y.len() {
            y[i] += self.lambda * mx[i] + 0.5 * (mtx[i] - ttmx[i]);
        }
        for (iu, p) in self.potential.iter().enumerate() {
            let xs = &x[iu * m..(iu + 1) * m];
            for a in 0..m {
                let mut acc = 0.0;
                for b in 0..m {
                    acc += p[(a, b)] * xs[b];
                }
                y[iu * m + a] += acc;
            }
        }
    }
}

/// Block-diagonal linear map.
pub struct BlockDiagonal {
    pub blocks: Vec<Mat<f64>>,
}

impl LinearOperator for BlockDiagonal {
    fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.rows()).sum()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut off = 0;
        for b in &self.blocks {
            let k = b.rows();
            for i in 0..k {
                let mut acc = 0.0;
                for j in 0..k {
                    acc += b[(i, j)] * x[off + j];
                }
                y[off + i] = acc;
            }
            off += k;
        }
    }
}

/// The real form `[[A, −μM], [μM, A]]` of `A + iμM` on `(Re u, Im u)`.
struct ComplexOperator<'a> {
    a: &'a ResolventOperator<'a>,
    mu: f64,
}

impl LinearOperator for ComplexOperator<'_> {
    fn dim(&self) -> usize {
        2 * self.a.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.a.dim();
        let (xr, xi) = x.split_at(n);
        let (yr, yi) = y.split_at_mut(n);
        self.a.apply(xr, yr);
        self.a.apply(xi, yi);
        let mr = self.a.disc.mass(xr);
        let mi = self.a.disc.mass(xi);
        for k in 0..n {
            yr[k] -= self.mu * mi[k];
            yi[k] += self.mu * mr[k];
        }
    }
}

struct DoubledPreconditioner<'a>(&'a BlockDiagonal);

impl LinearOperator for DoubledPreconditioner<'_> {
    fn dim(&self) -> usize {
        2 * self.0.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.0.dim();
        let (xr, xi) = x.split_at(n);
        let (yr, yi) = y.split_at_mut(n);
        self.0.apply(xr, yr);
        self.0.apply(xi, yi);
    }
}

/// Norms and residuals of one resolvent solve.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResolventReport {
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub omega: f64,
    pub norm_f0: f64,
    pub norm_u0: f64,
    pub norm_u1: f64,
    /// `‖f‖₀²/(Re λ + ω)`, the bound for `‖u‖₁²` when `Re λ + ω ≥ 1`.
    pub bound_rhs: f64,
    /// `‖u‖₁²/bound_rhs − 1`; nonpositive means the bound holds.
    pub slack: f64,
    /// `(Re λ + ω)‖u‖₀/‖f‖₀ − 1`.
    pub slack_u0: f64,
    /// Relative residual of the linear solve.
    pub residual: f64,
    /// Largest `|β_λ(u, v) − (f, v)|/(‖v‖₁‖f‖₀)` over the probe test fields.
    pub weak_residual: f64,
    pub iterations: usize,
    /// Smallest pointwise `⟨½(δξ)v − ζv, v⟩/|v|²` on the grid.
    pub pointwise_coercivity: f64,
    pub unknowns: usize,
}

#[derive(Clone, Debug)]
pub struct ResolventSolution {
    pub u: GridTensorField,
    pub report: ResolventReport,
}

/// Real `b = Mf` with the layout used by the complex solve.
fn rhs(disc: &Discretization, f: &GridTensorField) -> (Vec<f64>, Option<Vec<f64>>) {
    let br = disc.mass(&disc.restrict(&f.values));
    let bi = f.imag.as_ref().map(|im| disc.mass(&disc.restrict(im)));
    (br, bi)
}

/// Checks that `Re β_λ(v, v) > 0` on a deterministic family of probe fields.
/// Only needed when the pointwise bound does not already guarantee it.
pub fn coercivity_probe(op: &ResolventOperator, probes: usize, seed: u64) -> Result<f64> {
    let n = op.dim();
    let mut r = rng(seed);
    let mut worst = f64::INFINITY;
    let mut y = vec![0.0; n];
    for k in 0..probes {
        let v: Vec<f64> = if k % 2 == 0 {
            (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()
        } else {
            let mut v = vec![0.0; n];
            v[r.gen_range(0..n)] = 1.0;
            v
        };
        op.apply(&v, &mut y);
        let q = dot(&v, &y) / op.disc.norm0_sq(&v);
        worst = worst.min(q);
    }
    Ok(worst)
}

/// Solves the discrete weak problem `β_λ(u, v) = (f, v)` for all grid `v`.
pub fn assemble_and_solve(
    disc: &Discretization,
    lambda: Complex64,
    omega: f64,
    f: &GridTensorField,
    opts: &GmresOptions,
) -> Result<ResolventSolution> {
    let m = disc.components();
    if f.grid != disc.grid || f.components != m {
        return Err(Error::Dimension("right-hand side lives on a different grid".into()));
    }
    let op = disc.operator(lambda.re);
    if lambda.re + disc.pointwise_min <= 0.0 {
        let q = coercivity_probe(&op, 16, crate::sampling::DEFAULT_SEED)?;
        if q <= 0.0 {
            return Err(Error::NonCoercive(format!(
                "Re β_λ(v, v)/|v|² = {q:e} on a probe field (pointwise bound {} with Re λ = {})",
                disc.pointwise_min, lambda.re
            )));
        }
    }
    let pre = op.block_jacobi()?;
    let (br, bi) = rhs(disc, f);
    let nu = disc.unknowns();
    let (ur, ui, res) = if lambda.im == 0.0 && bi.is_none() {
        let r = gmres(&op, &pre, &br, None, opts)?;
        (r.x, None, (r.iterations, r.relative_residual))
    } else {
        let mut b = br.clone();
        b.extend(bi.clone().unwrap_or_else(|| vec![0.0; nu]));
        let cop = ComplexOperator { a: &op, mu: lambda.im };
        let r = gmres(&cop, &DoubledPreconditioner(&pre), &b, None, opts)?;
        let (a, c) = r.x.split_at(nu);
        (a.to_vec(), Some(c.to_vec()), (r.iterations, r.relative_residual))
    };
    let norm_f0 = f.norm0(&disc.gram);
    let mut n0 = disc.norm0_sq(&ur);
    let mut g1 = disc.grad_sq(&ur);
    if let Some(ui) = &ui {
        n0 += disc.norm0_sq(ui);
        g1 += disc.grad_sq(ui);
    }
    let norm_u0 = n0.sqrt();
    let norm_u1 = (n0 + g1).sqrt();
    let shift = lambda.re + omega;
    let bound_rhs = norm_f0 * norm_f0 / shift;
    let weak_residual = weak_residual(disc, &op, lambda.im, (&ur, ui.as_deref()), (&br, bi.as_deref()), norm_f0);
    let u = GridTensorField {
        grid: disc.grid.clone(),
        components: m,
        values: disc.extend(&ur),
        imag: ui.as_ref().map(|v| disc.extend(v)),
    };
    let report = ResolventReport {
        lambda_re: lambda.re,
        lambda_im: lambda.im,
        omega,
        norm_f0,
        norm_u0,
        norm_u1,
        bound_rhs,
        slack: if bound_rhs > 0.0 { norm_u1 * norm_u1 / bound_rhs - 1.0 } else { 0.0 },
        slack_u0: if norm_f0 > 0.0 { shift * norm_u0 / norm_f0 - 1.0 } else { 0.0 },
        residual: res.1,
        weak_residual,
        iterations: res.0,
        pointwise_coercivity: disc.pointwise_min,
        unknowns: nu,
    };
    Ok(ResolventSolution { u, report })
}

/// Residual of the weak equation against localised test fields (single-node
/// spikes in every component at a few deterministic nodes).
fn weak_residual(
    disc: &Discretization,
    op: &ResolventOperator,
    mu: f64,
    u: (&[f64], Option<&[f64]>),
    b: (&[f64], Option<&[f64]>),
    norm_f0: f64,
) -> f64 {
    if norm_f0 == 0.0 {
        return 0.0;
    }
    let nu = disc.unknowns();
    let mut au = vec![0.0; nu];
    op.apply(u.0, &mut au);
    let mut res_r: Vec<f64> = au.iter().zip(b.0).map(|(a, c)| a - c).collect();
    let mut res_i = vec![0.0; nu];
    if let Some(ui) = u.1 {
        let mut aui = vec![0.0; nu];
        op.apply(ui, &mut aui);
        let mui = disc.mass(ui);
        let mur = disc.mass(u.0);
        for k in 0..nu {
            res_r[k] -= mu * mui[k];
            res_i[k] = aui[k] + mu * mur[k] - b.1.map(|v| v[k]).unwrap_or(0.0);
        }
    }
    let m = disc.components();
    let nodes = disc.interior.len();
    let mut worst: f64 = 0.0;
    for k in 0..8 {
        let node = (k * nodes) / 8 + nodes / 16;
        for p in 0..m {
            let mut v = vec![0.0; nu];
            v[node * m + p] = 1.0;
            let nv = (disc.norm0_sq(&v) + disc.grad_sq(&v)).sqrt();
            let r = res_r[node * m + p].hypot(res_i[node * m + p]);
            worst = worst.max(r / (nv * norm_f0));
        }
    }
    worst
}

/// Backward-Euler decay of `‖u_n‖₀`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayReport {
    pub dtau: f64,
    pub omega: f64,
    pub norms: Vec<f64>,
    pub factors: Vec<f64>,
    /// `1/(1 + ωΔτ)`.
    pub bound_factor: f64,
    pub max_factor: f64,
    /// `−log(max factor)/Δτ`.
    pub decay_rate: f64,
    pub monotone: bool,
}

/// Iterates `u_{n+1} = (I − Δτ L)⁻¹ u_n`, each step a resolvent solve with
/// `λ = 1/Δτ`.
pub fn semigroup_decay_check(
    disc: &Discretization,
    u0: &GridTensorField,
    dtau: f64,
    steps: usize,
    omega: f64,
    opts: &GmresOptions,
) -> Result<DecayReport> {
    if !(dtau > 0.0) {
        return Err(Error::Domain(format!("Δτ must be positive, got {dtau}")));
    }
    let lambda = 1.0 / dtau;
    let op = disc.operator(lambda);
    let pre = op.block_jacobi()?;
    let mut u = disc.restrict(&u0.values);
    let mut norms = vec![disc.norm0_sq(&u).sqrt()];
    let mut factors = Vec::with_capacity(steps);
    for _ in 0..steps {
        let b: Vec<f64> = disc.mass(&u).iter().map(|v| v * lambda).collect();
        let r = gmres(&op, &pre, &b, Some(&u), opts)?;
        u = r.x;
        let nn = disc.norm0_sq(&u).sqrt();
        let prev = *norms.last().unwrap();
        factors.push(if prev > 0.0 { nn / prev } else { 0.0 });
        norms.push(nn);
    }
    let max_factor = factors.iter().cloned().fold(0.0, f64::max);
    Ok(DecayReport {
        dtau,
        omega,
        monotone: norms.windows(2).all(|w| w[1] <= w[0]),
        bound_factor: 1.0 / (1.0 + omega * dtau),
        decay_rate: if max_factor > 0.0 { -max_factor.ln() / dtau } else { f64::INFINITY },
        max_factor,
        norms,
        factors,
    })
}

/// Agreement of two cutoff solutions on `r < radius`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilizationReport {
    pub k1: usize,
    pub k2: usize,
    pub radius: f64,
    /// Largest pointwise `|u_k1 − u_k2|` on `r < radius`.
    pub max_difference: f64,
    /// The same, relative to `max |u_k2|` there.
    pub relative_difference: f64,
}

pub fn cutoff_stabilization(
    s: &SolitonStructure,
    grid: &Grid,
    f: &GridTensorField,
    lambda: f64,
    omega: f64,
    ks: (usize, usize),
    radius: f64,
    opts: &GmresOptions,
) -> Result<StabilizationReport> {
    let mut sols = Vec::new();
    for k in [ks.0, ks.1] {
        let cd = CutoffData::for_soliton(s, k, omega)?;
        let disc = Discretization::new(s, grid, Some(cd))?;
        sols.push(assemble_and_solve(&disc, Complex64::new(lambda, 0.0), omega, f, opts)?);
    }
    let gram = s.geom.metric_f64();
    let b = SymComponentBasis::new(s.dim());
    let gm = crate::symtensor::gram(&b, &gram.inverse()?);
    let m = b.len();
    let (mut diff, mut size) = (0.0f64, 0.0f64);
    for node in 0..grid.node_count() {
        let x = grid.coords(node);
        if x.iter().map(|v| v * v).sum::<f64>().sqrt() >= radius {
            continue;
        }
        let a = &sols[0].u.values[node * m..(node + 1) * m];
        let c = &sols[1].u.values[node * m..(node + 1) * m];
        let d: Vec<f64> = a.iter().zip(c).map(|(p, q)| p - q).collect();
        diff = diff.max(gm.quad(&d).sqrt());
        size = size.max(gm.quad(c).sqrt());
    }
    Ok(StabilizationReport {
        k1: ks.0,
        k2: ks.1,
        radius,
        max_difference: diff,
        relative_difference: if size > 0.0 { diff / size } else { 0.0 },
    })
}

/// Pointwise coercivity of the cutoff coefficients, split by branch of `ζ_k`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoercivityTransferReport {
    pub inner_min: f64,
    pub inner_nodes: usize,
    pub outer_min: f64,
    pub outer_nodes: usize,
}

pub fn coercivity_transfer(s: &SolitonStructure, grid: &Grid, cutoff: &CutoffData) -> Result<CoercivityTransferReport> {
    let coeff = Coefficients::new(s, Some(cutoff.clone()))?;
    let mut rep = CoercivityTransferReport {
        inner_min: f64::INFINITY,
        inner_nodes: 0,
        outer_min: f64::INFINITY,
        outer_nodes: 0,
    };
    for node in 0..grid.node_count() {
        let x = grid.coords(node);
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let q = coeff.coercivity_at(&x)?;
        if cutoff.inner(r) {
            rep.inner_min = rep.inner_min.min(q);
            rep.inner_nodes += 1;
        } else {
            rep.outer_min = rep.outer_min.min(q);
            rep.outer_nodes += 1;
        }
    }
    Ok(rep)
}

/// Terms of the Koiso identity
/// `‖∇h‖² = ‖δh‖² + ½‖T‖² + ∫(R_ijkl h^{il}h^{jk} − R_i^k h_jk h^{ij})`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KoisoReport {
    pub grad_sq: f64,
    pub div_sq: f64,
    pub t_sq: f64,
    pub curvature: f64,
    pub defect: f64,
    pub spacing: f64,
}

/// Evaluates the Koiso identity for the field `h(x)` (frame components as a
/// symmetric matrix) with discrete derivatives on `grid`.
pub fn koiso_identity(s: &SolitonStructure, grid: &Grid, h: impl Fn(&[f64]) -> Mat<f64>) -> Result<KoisoReport> {
    let disc = Discretization::new(s, grid, None)?;
    let n = s.dim();
    let m = disc.components();
    let b = &disc.basis;
    let field = GridTensorField::from_fn(grid, m, |x| b.from_matrix(&h(x)));
    let u = disc.restrict(&field.values);
    let du = disc.d.mul(&u);
    let curv = s.curvature()?;
    let ginv = curv.metric_inverse.to_f64();
    let mut grad_sq = 0.0;
    let mut div_sq = 0.0;
    let mut t_sq = 0.0;
    let mut k_int = 0.0;
    let curv_f = curv.to_f64();
    let _ = curv_f;
    for (iu, &node) in disc.interior.iter().enumerate() {
        // nabla[a] = ∇_a h as a symmetric matrix
        let nabla: Vec<Mat<f64>> =
            (0..n).map(|a| b.to_matrix(&du[(iu * n + a) * m..(iu * n + a + 1) * m])).collect();
        let comp = |i: usize, j: usize, k: usize| nabla[k][(i, j)];
        for a in 0..n {
            for c in 0..n {
                grad_sq += ginv[(a, c)] * crate::symtensor::inner(&ginv, &nabla[a], &nabla[c]);
            }
        }
        let dh: Vec<f64> = (0..n)
            .map(|j| {
                let mut acc = 0.0;
                for i in 0..n {
                    for k in 0..n {
                        acc -= ginv[(i, k)] * comp(k, j, i);
                    }
                }
                acc
            })
            .collect();
        div_sq += ginv.quad(&dh);
        let t = |i: usize, j: usize, k: usize| comp(i, j, k) - comp(j, k, i);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for i2 in 0..n {
                        for j2 in 0..n {
                            for k2 in 0..n {
                                let w = ginv[(i, i2)] * ginv[(j, j2)] * ginv[(k, k2)];
                                if w != 0.0 {
                                    t_sq += w * t(i, j, k) * t(i2, j2, k2);
                                }
                            }
                        }
                    }
                }
            }
        }
        let hx = b.to_matrix(field.at(node));
        k_int += koiso_curvature_form(&curv, &hx);
    }
    let vol = disc.vol;
    let (grad_sq, div_sq, t_sq, curvature) = (grad_sq * vol, div_sq * vol, t_sq * vol, k_int * vol);
    Ok(KoisoReport {
        grad_sq,
        div_sq,
        t_sq,
        curvature,
        defect: grad_sq - div_sq - 0.5 * t_sq - curvature,
        spacing: grid.spacing[0],
    })
}

/// The ω used for the cutoff and bounds: the claimed constant for catalog
/// solitons, otherwise the smallest pointwise coercivity constant at sample
/// points.
pub fn default_omega(s: &SolitonStructure) -> Result<f64> {
    if let Some(w) = omega_claimed(&s.name) {
        return Ok(w);
    }
    let pts = crate::sampling::sample_points(s.dim(), 64, 4.0, crate::sampling::DEFAULT_SEED);
    let coeff = Coefficients::new(s, None)?;
    let mut w = f64::INFINITY;
    for x in &pts {
        w = w.min(coeff.coercivity_at(x)?);
    }
    Ok(w)
}

/// Smallest eigenvalue of a symmetric matrix, for reports.
pub fn min_eigenvalue(a: &Mat<f64>) -> Result<f64> {
    Ok(symmetric_eigen(a)?.values[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{gaussian, nil3};
    use crate::scalar::rat;

    #[test]
    fn grid_indexing_roundtrip() {
        let g = Grid::new(3, 5, 2.0).unwrap();
        for node in [0, 7, 62, 124] {
            assert_eq!(g.linear_index(&g.multi_index(node)), node);
        }
        assert_eq!(g.coords(0), vec![-2.0; 3]);
        assert!(g.is_boundary(0) && !g.is_boundary(62));
    }

    #[test]
    fn cutoff_profile_constraints() {
        let cd = CutoffData::new(4, 0.1, 2.0, 0.5).unwrap();
        assert_eq!(cd.gamma(3.05), 1.0);
        assert_eq!(cd.gamma(3.95), 0.0);
        for i in 0..400 {
            let s = 2.5 + i as f64 * 0.005;
            let d = cd.gamma_prime(s);
            assert!((-2.0..=0.0).contains(&d));
        }
        assert!(CutoffData::new(4, 0.25, 2.0, 0.5).is_err());
    }

    #[test]
    fn zero_rhs_zero_solution() {
        let s = nil3();
        let grid = Grid::new(3, 9, 3.0).unwrap();
        let disc = Discretization::new(&s, &grid, None).unwrap();
        let f = GridTensorField::zeros(&grid, 6);
        let sol = assemble_and_solve(&disc, Complex64::new(1.0, 0.0), 0.5, &f, &GmresOptions::default()).unwrap();
        assert!(sol.u.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn gaussian_goodterm_is_constant() {
        let s = gaussian(3, rat(2, 1));
        let r = goodterm_check(&s, 500, 3.0, 1).unwrap();
        assert!((r.min_quotient - 1.5).abs() < 1e-12, "{r:?}");
    }
}
