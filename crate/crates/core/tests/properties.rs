//! Invariants that must hold for every input, checked with proptest.

use proptest::prelude::*;
use solitonlab::catalog::{self, omega_claimed};
use solitonlab::flow::ricci_flow_integrate;
use solitonlab::ode::Dopri5Options;
use solitonlab::stability::{optimal_omega, FormMode, StabilityContext};
use solitonlab::{rat, CurvatureData, Mat, Rational, Ring, Scalar, SolitonStructure};

fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| rat(p, q))
}

fn positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..=8, 1i64..=4).prop_map(|(p, q)| rat(p, q))
}

/// `(c·g, X/c, α/c)` is again a soliton when `(g, X, α)` is.
fn rescaled(s: &SolitonStructure, c: &Rational) -> SolitonStructure {
    let mut out = s.clone();
    out.geom.frame_metric = s.geom.frame_metric.scaled(c);
    let inv = rat(1, 1) / c.clone();
    out.x_frame = s.x_frame.iter().map(|f| f.scale(&inv)).collect();
    out.alpha = s.alpha.clone() * inv;
    out
}

fn exact_catalog() -> Vec<(SolitonStructure, FormMode)> {
    vec![
        (catalog::nil3(), FormMode::Raw),
        (catalog::sol3(), FormMode::Koiso),
        (catalog::nil4_half(), FormMode::Raw),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sol3_family_is_exact_for_every_gamma(gamma in small_rational()) {
        prop_assert!(catalog::sol3_with_gamma(gamma).is_exact_soliton().unwrap());
    }

    #[test]
    fn metric_rescaling_keeps_solitons_and_scales_omega(c in positive_rational(), k in 0usize..3) {
        let (s, mode) = &exact_catalog()[k];
        let t = rescaled(s, &c);
        prop_assert!(t.is_exact_soliton().unwrap());
        let w = optimal_omega(&StabilityContext::new(s).unwrap().integrated_form(*mode).unwrap()).unwrap();
        let q = StabilityContext::new(&t).unwrap().integrated_form(*mode).unwrap();
        prop_assert!(q.m.is_symmetric() && q.g.is_symmetric());
        let wt = optimal_omega(&q).unwrap();
        prop_assert!((wt.omega * c.to_f64() - w.omega).abs() < 1e-10, "{} vs {}", wt.omega, w.omega);
    }

    #[test]
    fn curvature_is_natural_under_change_of_basis(
        entries in proptest::collection::vec(-3i64..=3, 16),
        k in 0usize..3,
    ) {
        let s = &exact_catalog()[k].0;
        let sc = &s.geom.structure_constants;
        let g = &s.geom.frame_metric;
        let n = s.dim();
        let p = Mat::from_fn(n, n, |i, j| rat(entries[n * i + j] + if i == j { 7 } else { 0 }, 1));
        prop_assume!(p.determinant() != rat(0, 1));
        let sc2 = sc.change_basis(&p).unwrap();
        let g2 = p.transpose().matmul(g).matmul(&p);
        let a = CurvatureData::compute(sc, g).unwrap();
        let b = CurvatureData::compute(&sc2, &g2).unwrap();
        prop_assert_eq!(&a.scalar, &b.scalar);
        prop_assert_eq!(p.transpose().matmul(&a.ricci).matmul(&p), b.ricci);
    }

    #[test]
    fn integrated_forms_respect_claimed_constants(
        h in proptest::collection::vec(-5i64..=5, 10),
        k in 0usize..3,
    ) {
        let s = [catalog::nil3(), catalog::sol3(), catalog::nil4()][k].clone();
        let mode = catalog::default_mode(&s.name);
        let q = StabilityContext::new(&s).unwrap().integrated_form(mode).unwrap();
        let v: Vec<Rational> = h[..q.m.rows()].iter().map(|&x| rat(x, 1)).collect();
        let omega = omega_claimed(&s.name).unwrap();
        let lhs = q.value(&v).to_f64();
        let norm = q.norm_sq(&v).to_f64();
        prop_assert!(lhs <= -omega * norm + 1e-12 * norm.max(1.0), "{} > {}", lhs, -omega * norm);
    }

    #[test]
    fn ricci_flow_is_scale_equivariant(
        d in proptest::collection::vec(0.3f64..3.0, 3),
        c in 0.5f64..4.0,
        k in 0usize..2,
    ) {
        // g solves the flow  ⇒  t ↦ c·g(t/c) does too
        let sc = [catalog::nil3(), catalog::sol3()][k].geom.structure_constants.map(|v| v.to_f64());
        let g0 = Mat::diag(&d);
        let opts = Dopri5Options { rtol: 1e-11, atol: 1e-13, ..Default::default() };
        let a = ricci_flow_integrate(&sc, &g0, 1.0, 20.0, &opts).unwrap();
        let b = ricci_flow_integrate(&sc, &g0.scaled(&c), c, 20.0 * c, &opts).unwrap();
        for t in [1.5, 4.0, 20.0] {
            let ga = a.metric_at(t).unwrap().scaled(&c);
            let gb = b.metric_at(c * t).unwrap();
            prop_assert!(ga.max_abs_diff(&gb) <= 1e-7 * ga.max_abs(), "t={} {:?} {:?}", t, ga, gb);
        }
    }
}
