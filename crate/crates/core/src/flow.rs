//! Homogeneous Ricci flow `dg/dt = −2Rc(g)` on left-invariant metrics, and
//! the checks that tie it to the soliton structures.

use serde::{Deserialize, Serialize};

use crate::curvature::CurvatureData;
use crate::error::{Error, Result};
use crate::expr::ExpPoly;
use crate::field::{OneForm, VectorField};
use crate::geometry::{LieGeometry, StructureConstants};
use crate::matrix::Mat;
use crate::ode::{dopri5, Dopri5Options, OdeSolution};
use crate::scalar::{rat, Rational, Ring, Scalar};
use crate::soliton::SolitonStructure;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub t: f64,
    pub g: Mat<f64>,
}

/// A dense Ricci-flow trajectory of frame metrics.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub structure_constants: StructureConstants<f64>,
    pub solution: OdeSolution,
}

fn to_mat(n: usize, y: &[f64]) -> Mat<f64> {
    Mat::from_fn(n, n, |i, j| y[i * n + j])
}

/// `−2Rc(g)` for a left-invariant metric.
pub fn ricci_flow_rhs(sc: &StructureConstants<f64>, g: &Mat<f64>) -> Result<Mat<f64>> {
    let c = CurvatureData::compute(sc, &g.symmetric_part())?;
    Ok(c.ricci.symmetric_part().scaled(&-2.0))
}

/// `|Rm(g)|`.
pub fn rm_norm(sc: &StructureConstants<f64>, g: &Mat<f64>) -> Result<f64> {
    let c = CurvatureData::compute(sc, g)?;
    Ok(c.norm_sq().max(0.0).sqrt())
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.structure_constants.dim()
    }

    pub fn t_start(&self) -> f64 {
        self.solution.t_start()
    }

    pub fn t_end(&self) -> f64 {
        self.solution.t_end()
    }

    pub fn metric_at(&self, t: f64) -> Result<Mat<f64>> {
        Ok(to_mat(self.dim(), &self.solution.eval(t)?).symmetric_part())
    }

    /// The accepted integrator states.
    pub fn states(&self) -> Vec<FlowState> {
        let n = self.dim();
        self.solution
            .t
            .iter()
            .zip(&self.solution.y)
            .map(|(&t, y)| FlowState { t, g: to_mat(n, y) })
            .collect()
    }
}

/// Integrates Ricci flow from `g0` at `t0` to `t1`, aborting if the metric
/// stops being positive definite.
pub fn ricci_flow_integrate(
    sc: &StructureConstants<f64>,
    g0: &Mat<f64>,
    t0: f64,
    t1: f64,
    opts: &Dopri5Options,
) -> Result<Trajectory> {
    let n = sc.dim();
    if g0.rows() != n || g0.cols() != n {
        return Err(Error::Dimension(format!("initial metric must be {n}x{n}")));
    }
    if g0.cholesky().is_err() {
        return Err(Error::NotPositiveDefinite("initial metric".into()));
    }
    let y0 = g0.symmetric_part().data().to_vec();
    let solution = dopri5(
        |_, y| Ok(ricci_flow_rhs(sc, &to_mat(n, y))?.data().to_vec()),
        t0,
        &y0,
        t1,
        opts,
        |t, y| {
            to_mat(n, y).cholesky().map(|_| ()).map_err(|_| Error::Integration {
                t,
                reason: format!("metric lost positive definiteness: {:?}", to_mat(n, y)),
            })
        },
    )?;
    Ok(Trajectory { structure_constants: sc.clone(), solution })
}

/// Type-III diagnostic: `t·|Rm(g(t))|` on a logarithmic grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Type3Report {
    pub sup: f64,
    pub argmax: f64,
    pub samples: Vec<(f64, f64)>,
}

impl Type3Report {
    /// `(max − min)/max` of `t|Rm|` over samples with `t ∈ [from, to]`.
    pub fn drift(&self, from: f64, to: f64) -> f64 {
        let vals: Vec<f64> =
            self.samples.iter().filter(|(t, _)| *t >= from && *t <= to).map(|s| s.1).collect();
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        if vals.is_empty() || hi <= 0.0 {
            0.0
        } else {
            (hi - lo) / hi
        }
    }
}

/// Logarithmically spaced times from `a` to `b` inclusive.
pub fn log_grid(a: f64, b: f64, per_decade: usize) -> Vec<f64> {
    let decades = (b / a).log10();
    let m = ((decades * per_decade as f64).ceil() as usize).max(1);
    (0..=m).map(|k| a * 10f64.powf(decades * k as f64 / m as f64)).collect()
}

pub fn type3_diagnostic(traj: &Trajectory, per_decade: usize) -> Result<Type3Report> {
    let (a, b) = (traj.t_start(), traj.t_end());
    if a <= 0.0 || b <= a {
        return Err(Error::Domain(format!("Type-III diagnostic needs 0 < t0 < t1, got [{a}, {b}]")));
    }
    let mut samples = Vec::new();
    let (mut sup, mut argmax) = (0.0, a);
    for t in log_grid(a, b, per_decade) {
        let t = t.min(b);
        let v = t * rm_norm(&traj.structure_constants, &traj.metric_at(t)?)?;
        if v > sup {
            sup = v;
            argmax = t;
        }
        samples.push((t, v));
    }
    Ok(Type3Report { sup, argmax, samples })
}

/// Clock and scaling of a self-similar solution with big-bang time `β`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolitonOrbitConfig {
    pub beta: f64,
    pub alpha: f64,
}

impl SolitonOrbitConfig {
    pub fn new(beta: f64, alpha: f64) -> Result<Self> {
        if !(beta < 0.0) || !(alpha > 0.0) {
            return Err(Error::Domain(format!("need β < 0 < α, got β = {beta}, α = {alpha}")));
        }
        Ok(SolitonOrbitConfig { beta, alpha })
    }

    fn check(&self, t: f64) -> Result<()> {
        if t <= self.beta {
            return Err(Error::Domain(format!("t = {t} is not after the big bang β = {}", self.beta)));
        }
        Ok(())
    }

    /// `σ(t) = α(t − β)`.
    pub fn sigma(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.alpha * (t - self.beta))
    }

    /// `τ(t) = α⁻¹ log(t − β)`.
    pub fn tau(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok((t - self.beta).ln() / self.alpha)
    }

    /// `β/(β − t)`, the base of the closed-form diffeomorphisms.
    pub fn contraction(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.beta / (self.beta - t))
    }
}

/// Exponents `p_i = w_i/α` of `η_t(x)_i = (β/(β−t))^{p_i} x_i` when
/// `X = −Σ w_i x_i ∂_i` in coordinates.
pub fn eta_exponents(s: &SolitonStructure) -> Result<Vec<Rational>> {
    let w = s.x_coordinate().diagonal_linear_weights().ok_or_else(|| {
        Error::Unsupported(format!("{}: X is not diagonal linear in coordinates", s.name))
    })?;
    if s.alpha <= rat(0, 1) {
        return Err(Error::Domain("α must be positive".into()));
    }
    Ok(w.into_iter().map(|v| v / s.alpha.clone()).collect())
}

/// `η_t(x)` in closed form.
pub fn eta_closed_form(exponents: &[Rational], cfg: &SolitonOrbitConfig, t: f64, x: &[f64]) -> Result<Vec<f64>> {
    let s = cfg.contraction(t)?;
    Ok(exponents.iter().zip(x).map(|(p, xi)| s.powf(Scalar::to_f64(p)) * xi).collect())
}

/// Largest deviation between numerically integrated `dη/dt = X(η)/σ(t)`,
/// `η_0 = id`, and the closed form, over seeds and times.
pub fn diffeo_closed_form_check(
    s: &SolitonStructure,
    cfg: &SolitonOrbitConfig,
    seeds: &[Vec<f64>],
    times: &[f64],
) -> Result<f64> {
    let exps = eta_exponents(s)?;
    let xc = s.x_coordinate();
    let t_max = times.iter().cloned().fold(0.0, f64::max);
    for &t in times {
        cfg.check(t)?;
        if t < 0.0 {
            return Err(Error::Domain("times must be nonnegative".into()));
        }
    }
    let opts = Dopri5Options { rtol: 1e-12, atol: 1e-15, ..Default::default() };
    let mut worst: f64 = 0.0;
    for seed in seeds {
        let sol = dopri5(
            |t, y| {
                let sg = cfg.sigma(t)?;
                Ok(xc.eval(y).into_iter().map(|v| v / sg).collect())
            },
            0.0,
            seed,
            t_max,
            &opts,
            |_, _| Ok(()),
        )?;
        for &t in times {
            let num = sol.eval(t)?;
            let exact = eta_closed_form(&exps, cfg, t, seed)?;
            for (a, b) in num.iter().zip(&exact) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    Ok(worst)
}

/// Largest deviation, in coordinate components at the given points, between
/// the Ricci flow started from `ĝ(0) = σ(0)g` and `σ(t)·η_t^* g`, with
/// `β = −1/α` so that `σ(0) = 1`.
pub fn soliton_orbit_check(s: &SolitonStructure, times: &[f64], points: &[Vec<f64>]) -> Result<f64> {
    let alpha = Scalar::to_f64(&s.alpha);
    let cfg = SolitonOrbitConfig::new(-1.0 / alpha, alpha)?;
    let exps = eta_exponents(s)?;
    let g = s.geom.metric_f64();
    let sc = s.geom.structure_constants.map(Scalar::to_f64);
    let t_max = times.iter().cloned().fold(0.0, f64::max);
    let g0 = g.scaled(&cfg.sigma(0.0)?);
    let traj = ricci_flow_integrate(&sc, &g0, 0.0, t_max, &Dopri5Options::default())?;
    let mut worst: f64 = 0.0;
    for &t in times {
        let gt = traj.metric_at(t)?;
        let sig = cfg.sigma(t)?;
        let base = cfg.contraction(t)?;
        let jac: Vec<f64> = exps.iter().map(|p| base.powf(Scalar::to_f64(p))).collect();
        for x in points {
            let lhs = s.geom.coordinate_metric(&gt, x);
            let ex = eta_closed_form(&exps, &cfg, t, x)?;
            let pulled = s.geom.coordinate_metric(&g, &ex);
            for a in 0..s.dim() {
                for b in 0..s.dim() {
                    let rhs = sig * jac[a] * jac[b] * pulled[(a, b)];
                    worst = worst.max((lhs[(a, b)] - rhs).abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Rows `e_i + e_j − e_k` for every nonzero `c_ijk`: the log-scales `ℓ` of
/// diagonal automorphisms `F_i ↦ e^{ℓ_i}F_i` are exactly the kernel.
pub fn automorphism_constraints(sc: &StructureConstants<f64>) -> Vec<Vec<f64>> {
    let n = sc.dim();
    let mut rows = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                if sc.get(i, j, k).abs() > 0.0 {
                    let mut r = vec![0.0; n];
                    r[i] += 1.0;
                    r[j] += 1.0;
                    r[k] -= 1.0;
                    rows.push(r);
                }
            }
        }
    }
    rows
}

/// Distance from `g` to `target` modulo diagonal automorphisms: the part of
/// `log diag g − log diag target` orthogonal to the automorphism directions,
/// combined with the normalised off-diagonal entries of `g`.
pub fn distance_mod_automorphisms(sc: &StructureConstants<f64>, g: &Mat<f64>, target: &Mat<f64>) -> f64 {
    let n = sc.dim();
    let d: Vec<f64> = (0..n).map(|i| g[(i, i)].ln() - target[(i, i)].ln()).collect();
    // orthonormal basis of the constraint row space
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut r in automorphism_constraints(sc) {
        for b in &basis {
            let p: f64 = r.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in r.iter_mut().zip(b) {
                *x -= p * y;
            }
        }
        let nr = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nr > 1e-12 {
            basis.push(r.into_iter().map(|x| x / nr).collect());
        }
    }
    let mut acc: f64 = basis.iter().map(|b| b.iter().zip(&d).map(|(x, y)| x * y).sum::<f64>().powi(2)).sum();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += g[(i, j)].powi(2) / (g[(i, i)] * g[(j, j)]);
            }
        }
    }
    acc.sqrt()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlowdownReport {
    pub s_values: Vec<f64>,
    pub distances: Vec<f64>,
    pub monotone_decreasing: bool,
}

/// For each `s`, compares `g_s(1) = s⁻¹ g(s)` with `target` modulo diagonal
/// automorphisms.
pub fn blowdown_check(traj: &Trajectory, s_values: &[f64], target: &Mat<f64>) -> Result<BlowdownReport> {
    let s_max = s_values.iter().cloned().fold(0.0, f64::max);
    if s_max > traj.t_end() * (1.0 + 1e-12) || s_values.iter().any(|&s| s < traj.t_start()) {
        return Err(Error::Domain(format!(
            "trajectory covers [{}, {}] but blow-down needs t = s for s in {s_values:?}",
            traj.t_start(),
            traj.t_end()
        )));
    }
    let mut distances = Vec::new();
    for &s in s_values {
        let gs = traj.metric_at(s.min(traj.t_end()))?.scaled(&(1.0 / s));
        distances.push(distance_mod_automorphisms(&traj.structure_constants, &gs, target));
    }
    let monotone_decreasing = distances.windows(2).all(|w| w[1] < w[0]);
    Ok(BlowdownReport { s_values: s_values.to_vec(), distances, monotone_decreasing })
}

fn c(n: i64, d: i64) -> ExpPoly {
    ExpPoly::constant(rat(n, d))
}

/// Heisenberg frame `E_1 = ∂x`, `E_2 = ∂y + ½z∂x`, `E_3 = ∂z − ½y∂x`, dual to
/// `θ¹ = dx + ½y dz − ½z dy`, `θ² = dy`, `θ³ = dz`; `[E_2, E_3] = −E_1`.
pub fn heisenberg_limit_geometry() -> LieGeometry {
    let z = ExpPoly::default;
    let half = rat(1, 2);
    let y = ExpPoly::var(1);
    let zz = ExpPoly::var(2);
    let sc = StructureConstants::from_brackets(3, &[(1, 2, vec![rat(-1, 1), rat(0, 1), rat(0, 1)])]).unwrap();
    let frame = vec![
        VectorField(vec![c(1, 1), z(), z()]),
        VectorField(vec![zz.scale(&half), c(1, 1), z()]),
        VectorField(vec![-y.scale(&half), z(), c(1, 1)]),
    ];
    let coframe = vec![
        OneForm(vec![c(1, 1), -zz.scale(&half), y.scale(&half)]),
        OneForm(vec![z(), c(1, 1), z()]),
        OneForm(vec![z(), z(), c(1, 1)]),
    ];
    LieGeometry::new("nil3-limit", sc, frame, coframe, Mat::identity(3)).unwrap()
}

/// Solvable frame `E_1 = e^z∂x + e^{−z}∂y`, `E_2 = ∂z`, `E_3 = e^z∂x − e^{−z}∂y`,
/// with `[E_2, E_1] = E_3` and `[E_2, E_3] = E_1`.
pub fn solvable_limit_geometry() -> LieGeometry {
    let z = ExpPoly::default;
    let ep = ExpPoly::exp_linear(vec![0, 0, 1]);
    let em = ExpPoly::exp_linear(vec![0, 0, -1]);
    let half = rat(1, 2);
    let sc = StructureConstants::from_brackets(
        3,
        &[(1, 0, vec![rat(0, 1), rat(0, 1), rat(1, 1)]), (1, 2, vec![rat(1, 1), rat(0, 1), rat(0, 1)])],
    )
    .unwrap();
    let frame = vec![
        VectorField(vec![ep.clone(), em.clone(), z()]),
        VectorField(vec![z(), z(), c(1, 1)]),
        VectorField(vec![ep.clone(), -em.clone(), z()]),
    ];
    let coframe = vec![
        OneForm(vec![em.scale(&half), ep.scale(&half), z()]),
        OneForm(vec![z(), z(), c(1, 1)]),
        OneForm(vec![em.scale(&half), -ep.scale(&half), z()]),
    ];
    LieGeometry::new("sol3-limit", sc, frame, coframe, Mat::identity(3)).unwrap()
}

/// `g_∞(t) = (1/(3t^{1/3}))θ¹θ¹ + t^{1/3}θ²θ² + t^{1/3}θ³θ³` and its time derivative.
pub fn heisenberg_limit_metric(t: f64) -> (Mat<f64>, Mat<f64>) {
    let c = t.cbrt();
    let g = Mat::diag(&[1.0 / (3.0 * c), c, c]);
    let dc = c / (3.0 * t);
    let dg = Mat::diag(&[-dc / (3.0 * c * c), dc, dc]);
    (g, dg)
}

/// `g_∞(t) = θ¹θ¹ + 4t θ²θ² + θ³θ³` and its time derivative.
pub fn solvable_limit_metric(t: f64) -> (Mat<f64>, Mat<f64>) {
    (Mat::diag(&[1.0, 4.0 * t, 1.0]), Mat::diag(&[0.0, 4.0, 0.0]))
}

/// `max |dg/dt + 2Rc(g)|` for an explicit family of metrics.
pub fn explicit_flow_residual(geom: &LieGeometry, metric: impl Fn(f64) -> (Mat<f64>, Mat<f64>), t: f64) -> Result<f64> {
    let sc = geom.structure_constants.map(Scalar::to_f64);
    let (g, dg) = metric(t);
    let rhs = ricci_flow_rhs(&sc, &g)?;
    Ok(dg.sub(&rhs).max_abs())
}

/// Change of frame `E(t) = F·A(t)` relating the nil³ soliton frame to the
/// limit frame; `A(t)ᵀ g A(t)` equals `diag(t^{−4/3}/9, t^{−2/3}/3, t^{−2/3}/3)`.
pub fn heisenberg_frame_change(t: f64) -> Mat<f64> {
    let a = (t.powf(-2.0 / 3.0) / 12.0).sqrt();
    Mat::from_rows(&[vec![0.0, 0.0, a], vec![0.0, a, 0.0], vec![-2.0 * a * a, 0.0, 0.0]]).unwrap()
}

/// Change of frame for sol³ with `a(t) = (32t)^{−1/2}`; `A(t)ᵀ g A(t)`
/// equals `diag(1/(4t), 1, 1/(4t))`.
pub fn solvable_frame_change(t: f64) -> Mat<f64> {
    let a = (1.0 / (32.0 * t)).sqrt();
    Mat::from_rows(&[vec![0.0, -0.5, 0.0], vec![a, 0.0, 0.0], vec![0.0, 0.0, a]]).unwrap()
}

/// Expresses `[E_a, E_b]` for `E = F·A` in the `E` basis.
pub fn transformed_constants(sc: &StructureConstants<Rational>, a: &Mat<f64>) -> Result<StructureConstants<f64>> {
    sc.map(Scalar::to_f64).change_basis(a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_metric_is_stationary() {
        let sc = StructureConstants::<f64>::zero(3);
        let g0 = Mat::from_rows(&[vec![2.0, 0.5, 0.0], vec![0.5, 1.0, 0.0], vec![0.0, 0.0, 3.0]]).unwrap();
        let tr = ricci_flow_integrate(&sc, &g0, 1.0, 10.0, &Dopri5Options::default()).unwrap();
        assert_eq!(tr.metric_at(7.0).unwrap(), g0);
    }

    #[test]
    fn big_bang_domain() {
        let cfg = SolitonOrbitConfig::new(-1.0, 3.0).unwrap();
        assert!(matches!(cfg.sigma(-2.0), Err(Error::Domain(_))));
        assert!(SolitonOrbitConfig::new(1.0, 3.0).is_err());
        assert_eq!(cfg.sigma(0.0).unwrap(), 3.0);
        assert_eq!(cfg.contraction(3.0).unwrap(), 0.25);
    }

    #[test]
    fn limit_frames_validate() {
        for g in [heisenberg_limit_geometry(), solvable_limit_geometry()] {
            let r = g.validate().unwrap();
            assert!(r.is_valid(), "{}: {r:?}", g.name);
        }
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1.0, 1e6, 4);
        assert_eq!(g.len(), 25);
        assert!((g[24] - 1e6).abs() < 1e-6);
    }
}
