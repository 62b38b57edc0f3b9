//! Published reference values for the three catalog solitons, kept verbatim
//! (including a misprinted entry) so checks compare against what was printed
//! rather than against what this crate computes.

use crate::matrix::Mat;
use crate::scalar::{rat, Rational};

/// Printed connection, Ricci tensor and scalar curvature in the soliton frame.
#[derive(Clone, Debug)]
pub struct PrintedCurvature {
    pub name: &'static str,
    /// `connection[i][j]` holds the frame components of `∇_{F_i}F_j`.
    pub connection: Vec<Vec<Vec<Rational>>>,
    pub ricci: Mat<Rational>,
    pub scalar: Option<Rational>,
}

/// Printed soliton data: `δX` and the claimed decay constant.
#[derive(Clone, Debug)]
pub struct PrintedSoliton {
    pub name: &'static str,
    pub alpha: Rational,
    pub divergence: Rational,
    pub badterm: Rational,
}

fn v(n: usize, terms: &[(usize, i64, i64)]) -> Vec<Rational> {
    let mut out = vec![rat(0, 1); n];
    for &(k, p, q) in terms {
        out[k - 1] += rat(p, q);
    }
    out
}

fn diag(entries: &[(i64, i64)]) -> Mat<Rational> {
    let d: Vec<Rational> = entries.iter().map(|&(p, q)| rat(p, q)).collect();
    Mat::diag(&d)
}

pub fn nil3_printed() -> PrintedCurvature {
    let z = v(3, &[]);
    PrintedCurvature {
        name: "nil3",
        connection: vec![
            vec![z.clone(), v(3, &[(3, -1, 1)]), v(3, &[(2, 1, 1)])],
            vec![v(3, &[(3, 1, 1)]), z.clone(), v(3, &[(1, -1, 1)])],
            vec![v(3, &[(2, 1, 1)]), v(3, &[(1, -1, 1)]), z],
        ],
        ricci: diag(&[(-2, 1), (-2, 1), (2, 1)]),
        scalar: Some(rat(-1, 2)),
    }
}

pub fn sol3_printed() -> PrintedCurvature {
    let z = v(3, &[]);
    PrintedCurvature {
        name: "sol3",
        connection: vec![
            vec![z.clone(), z.clone(), z.clone()],
            vec![v(3, &[(3, 2, 1)]), z.clone(), v(3, &[(1, -4, 1)])],
            vec![v(3, &[(2, 2, 1)]), v(3, &[(1, -4, 1)]), z],
        ],
        ricci: diag(&[(-8, 1), (0, 1), (0, 1)]),
        scalar: Some(rat(-2, 1)),
    }
}

/// The printed `Rc₄₄ = 1` is inconsistent with the printed connection, which
/// gives `−1`; it is reproduced here as printed.
pub fn nil4_printed() -> PrintedCurvature {
    let z = v(4, &[]);
    PrintedCurvature {
        name: "nil4",
        connection: vec![
            vec![z.clone(), v(4, &[(4, -1, 2)]), z.clone(), v(4, &[(2, 1, 2)])],
            vec![v(4, &[(4, -1, 2)]), z.clone(), v(4, &[(4, -1, 2)]), v(4, &[(1, 1, 2), (3, 1, 2)])],
            vec![z.clone(), v(4, &[(4, -1, 2)]), z.clone(), v(4, &[(2, 1, 2)])],
            vec![v(4, &[(2, -1, 2)]), v(4, &[(1, 1, 2), (3, -1, 2)]), v(4, &[(2, 1, 2)]), z],
        ],
        ricci: diag(&[(-1, 2), (0, 1), (1, 2), (1, 1)]),
        scalar: None,
    }
}

pub fn printed_curvature() -> Vec<PrintedCurvature> {
    vec![nil3_printed(), sol3_printed(), nil4_printed()]
}

pub fn printed_solitons() -> Vec<PrintedSoliton> {
    vec![
        PrintedSoliton { name: "nil3", alpha: rat(3, 1), divergence: rat(4, 1), badterm: rat(2, 1) },
        PrintedSoliton { name: "sol3", alpha: rat(4, 1), divergence: rat(4, 1), badterm: rat(2, 1) },
        PrintedSoliton { name: "nil4", alpha: rat(3, 1), divergence: rat(10, 1), badterm: rat(4, 1) },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_have_consistent_shapes() {
        for p in printed_curvature() {
            let n = p.ricci.rows();
            assert_eq!(p.connection.len(), n);
            assert!(p.connection.iter().all(|r| r.len() == n && r.iter().all(|c| c.len() == n)));
        }
    }
}
