//! Refinement behaviour of the finite-difference discretisation.

use solitonlab::krylov::GmresOptions;
use solitonlab::resolvent::{assemble_and_solve, default_bump, Discretization, Grid, GridTensorField};
use solitonlab::{soliton_by_name, Complex64, Mat};

fn bump_tensor(x: &[f64]) -> Mat<f64> {
    let c = [0.3, -0.2, 0.1];
    let s2: f64 = x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / 4.0;
    let w = if s2 < 1.0 { (1.0 - s2).powi(4) } else { 0.0 };
    Mat::from_fn(3, 3, |i, j| w * (1.0 + x[i] * x[j] + 0.1 * (i + j) as f64 * x[(i + j) % 3]))
}

#[test]
fn koiso_identity_defect_is_second_order() {
    for name in ["nil3", "sol3"] {
        let s = soliton_by_name(name, None, None).unwrap().soliton;
        let defect = |n: usize| {
            let grid = Grid::new(3, n, 3.0).unwrap();
            solitonlab::resolvent::koiso_identity(&s, &grid, bump_tensor).unwrap().defect.abs()
        };
        let (coarse, fine) = (defect(17), defect(33));
        // halving the spacing should cut the defect by about four
        assert!(fine < coarse / 3.0, "{name}: {coarse:e} -> {fine:e}");
    }
}

#[test]
fn integration_by_parts_defect_shrinks_under_refinement() {
    let s = soliton_by_name("nil3", None, None).unwrap().soliton;
    let relative = |n: usize| {
        let grid = Grid::new(3, n, 6.0).unwrap();
        let disc = Discretization::new(&s, &grid, None).unwrap();
        let u = disc.restrict(&default_bump(&s, &grid).values);
        disc.integration_by_parts_defect(&u).abs() / disc.norm0_sq(&u)
    };
    let (coarse, fine) = (relative(12), relative(24));
    assert!(fine < coarse / 2.5, "{coarse:e} -> {fine:e}");
}

#[test]
fn complex_resolvent_obeys_l2_bound() {
    let s = soliton_by_name("nil3", None, None).unwrap().soliton;
    let grid = Grid::new(3, 12, 6.0).unwrap();
    let disc = Discretization::new(&s, &grid, None).unwrap();
    let f = default_bump(&s, &grid);
    for lambda in [Complex64::new(1.0, 2.0), Complex64::new(0.2, -5.0)] {
        let sol = assemble_and_solve(&disc, lambda, 0.5, &f, &GmresOptions::default()).unwrap();
        assert!(sol.report.residual < 1e-8);
        assert!(sol.report.slack_u0 <= 0.0, "{lambda}: {:?}", sol.report);
    }
}

#[test]
fn resolvent_is_linear_in_the_right_hand_side() {
    let s = soliton_by_name("sol3", None, None).unwrap().soliton;
    let grid = Grid::new(3, 10, 6.0).unwrap();
    let disc = Discretization::new(&s, &grid, None).unwrap();
    let f = default_bump(&s, &grid);
    let mut f3 = GridTensorField::zeros(&grid, f.components);
    f3.values = f.values.iter().map(|v| 3.0 * v).collect();
    let opts = GmresOptions { tol: 1e-12, ..Default::default() };
    let lambda = Complex64::new(1.0, 0.0);
    let u1 = assemble_and_solve(&disc, lambda, 0.4, &f, &opts).unwrap().u;
    let u3 = assemble_and_solve(&disc, lambda, 0.4, &f3, &opts).unwrap().u;
    let scale = u1.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (a, b) in u1.values.iter().zip(&u3.values) {
        assert!((3.0 * a - b).abs() <= 1e-9 * scale);
    }
}
