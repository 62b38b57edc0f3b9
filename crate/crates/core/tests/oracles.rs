//! Cross-checks of the hand-rolled numerics against nalgebra and closed forms.

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use solitonlab::eigen::{generalized_max, inverse_sqrt, symmetric_eigen};
use solitonlab::krylov::{gmres, CsrBuilder, GmresOptions, Identity};
use solitonlab::ode::{dopri5, Dopri5Options};
use solitonlab::Mat;

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Mat<f64> {
    let a = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    a.add(&a.transpose()).scaled(&0.5)
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Mat<f64> {
    let a = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    a.transpose().matmul(&a).add(&Mat::identity(n).scaled(&0.1))
}

fn to_na(m: &Mat<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

#[test]
fn jacobi_eigenvalues_match_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [2, 3, 6, 10] {
        for _ in 0..20 {
            let a = random_symmetric(&mut rng, n);
            let ours = symmetric_eigen(&a).unwrap();
            let mut theirs: Vec<f64> = to_na(&a).symmetric_eigen().eigenvalues.iter().copied().collect();
            theirs.sort_by(f64::total_cmp);
            for (x, y) in ours.values.iter().zip(&theirs) {
                assert_relative_eq!(x, y, epsilon = 1e-12);
            }
            // A V = V diag(λ)
            let av = a.matmul(&ours.vectors);
            let vl = ours.vectors.matmul(&Mat::diag(&ours.values));
            assert!(av.max_abs_diff(&vl) < 1e-12);
        }
    }
}

#[test]
fn inverse_and_inverse_sqrt_match_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [3, 4, 6] {
        let g = random_spd(&mut rng, n);
        let inv = g.inverse().unwrap();
        let theirs = to_na(&g).try_inverse().unwrap();
        for i in 0..n {
            for j in 0..n {
                assert_relative_eq!(inv[(i, j)], theirs[(i, j)], epsilon = 1e-9, max_relative = 1e-10);
            }
        }
        let s = inverse_sqrt(&g).unwrap();
        let back = s.matmul(&g).matmul(&s);
        assert!(back.max_abs_diff(&Mat::identity(n)) < 1e-10);
    }
}

#[test]
fn generalized_eigenvalue_matches_cholesky_reduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [3, 6, 10] {
        let m = random_symmetric(&mut rng, n);
        let g = random_spd(&mut rng, n);
        let (lmax, v) = generalized_max(&m, &g).unwrap();
        let l = to_na(&g).cholesky().unwrap().l();
        let linv = l.clone().try_inverse().unwrap();
        let reduced = &linv * to_na(&m) * linv.transpose();
        let theirs = reduced.symmetric_eigen().eigenvalues.max();
        assert_relative_eq!(lmax, theirs, epsilon = 1e-10, max_relative = 1e-10);
        assert_relative_eq!(g.quad(&v), 1.0, epsilon = 1e-10);
        assert_relative_eq!(m.quad(&v), lmax, epsilon = 1e-10);
    }
}

#[test]
fn gmres_matches_dense_lu() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 40;
    let dense = Mat::from_fn(n, n, |i, j| {
        if i == j {
            4.0 + rng.gen_range(0.0..1.0)
        } else if rng.gen_bool(0.15) {
            rng.gen_range(-1.0..1.0)
        } else {
            0.0
        }
    });
    let mut b = CsrBuilder::new(n);
    for i in 0..n {
        for j in 0..n {
            if dense[(i, j)] != 0.0 {
                b.push(j, dense[(i, j)]);
            }
        }
        b.finish_row();
    }
    let csr = b.build();
    let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
    let opts = GmresOptions { restart: 10, max_iter: 2000, tol: 1e-13 };
    let ours = gmres(&csr, &Identity(n), &rhs, None, &opts).unwrap();
    let theirs = to_na(&dense).lu().solve(&nalgebra::DVector::from_vec(rhs)).unwrap();
    for (x, y) in ours.x.iter().zip(theirs.iter()) {
        assert_relative_eq!(x, y, epsilon = 1e-11);
    }
}

#[test]
fn dopri5_logistic_and_dense_output() {
    // y' = y(1 − y), y(0) = 0.1
    let exact = |t: f64| 1.0 / (1.0 + 9.0 * (-t).exp());
    let opts = Dopri5Options { rtol: 1e-11, atol: 1e-13, ..Default::default() };
    let sol = dopri5(|_, y| Ok(vec![y[0] * (1.0 - y[0])]), 0.0, &[0.1], 10.0, &opts, |_, _| Ok(())).unwrap();
    for k in 0..=100 {
        let t = 0.1 * k as f64;
        assert_relative_eq!(sol.eval(t).unwrap()[0], exact(t), epsilon = 1e-9);
    }
    assert!(sol.eval(10.5).is_err());
}

#[test]
fn dopri5_linear_system_matches_matrix_exponential() {
    // y' = A y with A = [[0, 1], [−2, −3]]: eigenvalues −1, −2
    let exact = |t: f64| {
        let (e1, e2) = ((-t).exp(), (-2.0 * t).exp());
        [2.0 * e1 - e2, -2.0 * e1 + 2.0 * e2]
    };
    let sol = dopri5(
        |_, y| Ok(vec![y[1], -2.0 * y[0] - 3.0 * y[1]]),
        0.0,
        &[1.0, 0.0],
        5.0,
        &Dopri5Options::default(),
        |_, _| Ok(()),
    )
    .unwrap();
    let y = sol.last();
    let e = exact(5.0);
    assert_relative_eq!(y[0], e[0], epsilon = 1e-10);
    assert_relative_eq!(y[1], e[1], epsilon = 1e-10);
}

#[test]
fn ricci_flow_matches_explicit_heisenberg_solution() {
    use solitonlab::flow::{heisenberg_limit_geometry, heisenberg_limit_metric, ricci_flow_integrate};
    use solitonlab::Scalar;
    let geom = heisenberg_limit_geometry();
    let sc = geom.structure_constants.map(|c| c.to_f64());
    let opts = Dopri5Options { rtol: 1e-12, atol: 1e-14, ..Default::default() };
    let traj = ricci_flow_integrate(&sc, &heisenberg_limit_metric(1.0).0, 1.0, 1e3, &opts).unwrap();
    for t in [2.0, 10.0, 1e3] {
        let (g, _) = heisenberg_limit_metric(t);
        let ours = traj.metric_at(t).unwrap();
        assert!(ours.max_abs_diff(&g) <= 1e-8 * g.max_abs(), "t={t}: {ours:?} vs {g:?}");
    }
}
