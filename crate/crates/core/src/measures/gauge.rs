//! Drift gauge for a symmetric stochastic matrix: solve
//! `sum_j a_ij p_ij = t_i - sum_j p_ij t_j`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 64;
const INPUT_TOL: f64 = 1e-12;
/// Condition numbers above this are treated as a reducible chain.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Debug, Serialize)]
pub struct StochasticGauge {
    pub d: usize,
    pub p: Vec<Vec<f64>>,
    pub a: Vec<Vec<f64>>,
    /// Mean-zero solution.
    pub t: Vec<f64>,
    /// Largest row residual of the drift equation.
    pub residual: f64,
    /// 2-norm condition number of the bordered system.
    pub condition: f64,
    /// `delta` used for the bound, given or the least admissible one.
    pub delta: f64,
    /// `max_ij sqrt(p_ij) |t_i - t_j| / delta`.
    pub gauge_constant: f64,
}

fn validate(p: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<usize> {
    let d = p.nrows();
    if d == 0 || d > MAX_DIM || p.ncols() != d || a.nrows() != d || a.ncols() != d {
        return Err(Error::invalid(format!("p and a must be square of the same size in 1..={MAX_DIM}")));
    }
    for i in 0..d {
        let row: f64 = p.row(i).sum();
        if (row - 1.0).abs() > INPUT_TOL {
            return Err(Error::invalid(format!("row {i} of p sums to {row}")));
        }
        for j in 0..d {
            if p[(i, j)] < 0.0 || (p[(i, j)] - p[(j, i)]).abs() > INPUT_TOL {
                return Err(Error::invalid(format!("p is not symmetric non-negative at ({i},{j})")));
            }
            if (a[(i, j)] + a[(j, i)]).abs() > INPUT_TOL {
                return Err(Error::invalid(format!("a is not antisymmetric at ({i},{j})")));
            }
        }
    }
    Ok(d)
}

fn drift(p: &DMatrix<f64>, a: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(p.nrows(), (0..p.nrows()).map(|i| (0..p.ncols()).map(|j| a[(i, j)] * p[(i, j)]).sum()))
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Solves the drift equation on the complement of the constants via the
/// bordered system `[[I - p, 1], [1^T, 0]]`. With `delta` given, checks
/// `|a_ij| <= min(1, delta / sqrt(p_ij))`.
pub fn solve_drift_gauge(p: &DMatrix<f64>, a: &DMatrix<f64>, delta: Option<f64>) -> Result<StochasticGauge> {
    let d = validate(p, a)?;
    let least_delta = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| a[(i, j)].abs() * p[(i, j)].sqrt())
        .fold(0.0, f64::max);
    let delta = match delta {
        Some(dl) => {
            for i in 0..d {
                for j in 0..d {
                    let bound = if p[(i, j)] > 0.0 { 1f64.min(dl / p[(i, j)].sqrt()) } else { 1.0 };
                    if a[(i, j)].abs() > bound + INPUT_TOL {
                        return Err(Error::invalid(format!("|a_{i}{j}| exceeds min(1, delta/sqrt(p_{i}{j}))")));
                    }
                }
            }
            dl
        }
        None => least_delta,
    };
    let b = drift(p, a);
    let mut m = DMatrix::<f64>::zeros(d + 1, d + 1);
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] = if i == j { 1.0 } else { 0.0 } - p[(i, j)];
        }
        m[(i, d)] = 1.0;
        m[(d, i)] = 1.0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::DefectiveChain { condition });
    }
    let mut rhs = DVector::<f64>::zeros(d + 1);
    rhs.rows_mut(0, d).copy_from(&b);
    let sol = m.lu().solve(&rhs).ok_or(Error::DefectiveChain { condition })?;
    let t: DVector<f64> = sol.rows(0, d).into_owned();
    let mean = t.mean();
    let t = t.map(|x| x - mean);
    let pt = p * &t;
    let residual = (0..d).map(|i| (b[i] - (t[i] - pt[i])).abs()).fold(0.0, f64::max);
    let spread = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .map(|(i, j)| p[(i, j)].sqrt() * (t[i] - t[j]).abs())
        .fold(0.0, f64::max);
    let gauge_constant = if delta > 0.0 { spread / delta } else { 0.0 };
    Ok(StochasticGauge {
        d,
        p: to_rows(p),
        a: to_rows(a),
        t: t.iter().copied().collect(),
        residual,
        condition,
        delta,
        gauge_constant,
    })
}

/// `t_i = sum_{k>=2} (u_k . b) u_{k,i} / (1 - lambda_k)` over an orthonormal
/// eigenbasis of `p`, dropping the top eigenvector.
pub fn drift_gauge_eigen(p: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let d = validate(p, a)?;
    let b = drift(p, a);
    let eig = SymmetricEigen::new(p.clone());
    let top = (0..d)
        .max_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]))
        .expect("nonempty");
    let mut t = DVector::<f64>::zeros(d);
    for k in 0..d {
        if k == top {
            continue;
        }
        let gap = 1.0 - eig.eigenvalues[k];
        if gap.abs() < 1e-12 {
            return Err(Error::DefectiveChain { condition: f64::INFINITY });
        }
        let u = eig.eigenvectors.column(k);
        t += u * (u.dot(&b) / gap);
    }
    Ok(t.iter().copied().collect())
}

/// Symmetric stochastic `p = I - L / c` from random positive edge weights,
/// and antisymmetric `a` with `|a_ij| <= min(1, delta / sqrt(p_ij))`.
pub fn random_gauge_instance<R: Rng>(rng: &mut R, d: usize, delta: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut w = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        for j in i + 1..d {
            let x = rng.random_range(0.05..1.0);
            w[(i, j)] = x;
            w[(j, i)] = x;
        }
    }
    let c = (0..d).map(|i| w.row(i).sum()).fold(0.0, f64::max) * rng.random_range(1.05..2.0) + 1e-9;
    let mut p = w / c;
    for i in 0..d {
        let off: f64 = (0..d).filter(|&j| j != i).map(|j| p[(i, j)]).sum();
        p[(i, i)] = 1.0 - off;
    }
    let mut a = DMatrix::<f64>::zeros(d, d);
    for i in 0..d {
        for j in i + 1..d {
            let bound = 1f64.min(delta / p[(i, j)].sqrt());
            let x = rng.random_range(-1.0..=1.0) * bound;
            a[(i, j)] = x;
            a[(j, i)] = -x;
        }
    }
    (p, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn zero_drift() {
        let p = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let g = solve_drift_gauge(&p, &DMatrix::zeros(2, 2), None).unwrap();
        assert!(g.t.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn two_state_example() {
        let p = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 0.2, -0.2, 0.0]);
        let g = solve_drift_gauge(&p, &a, None).unwrap();
        assert!((g.t[0] - 0.1).abs() < 1e-12 && (g.t[1] + 0.1).abs() < 1e-12);
        let e = drift_gauge_eigen(&p, &a).unwrap();
        assert!((e[0] - 0.1).abs() < 1e-12 && (e[1] + 0.1).abs() < 1e-12);
    }

    #[test]
    fn random_instances_match_eigen_formula() {
        let mut rng = seeded(17);
        for _ in 0..50 {
            let d = rng.random_range(2..=6);
            let (p, a) = random_gauge_instance(&mut rng, d, 0.3);
            let g = solve_drift_gauge(&p, &a, Some(0.3)).unwrap();
            assert!(g.residual <= 1e-9);
            let e = drift_gauge_eigen(&p, &a).unwrap();
            assert!(g.t.iter().zip(&e).all(|(x, y)| (x - y).abs() <= 1e-9));
        }
    }

    #[test]
    fn gauge_freedom() {
        let mut rng = seeded(23);
        let (p, a) = random_gauge_instance(&mut rng, 5, 0.5);
        let g = solve_drift_gauge(&p, &a, None).unwrap();
        // Shifting t by a constant leaves the drift equation unchanged.
        let t = DVector::from_vec(g.t.iter().map(|x| x + 3.7).collect());
        let pt = &p * &t;
        let b = drift(&p, &a);
        assert!((0..5).all(|i| (b[i] - (t[i] - pt[i])).abs() < 1e-9));
    }

    #[test]
    fn reducible_chain_is_reported() {
        let p = DMatrix::<f64>::identity(3, 3);
        let a = DMatrix::zeros(3, 3);
        assert!(matches!(solve_drift_gauge(&p, &a, None), Err(Error::DefectiveChain { .. })));
        let bad = DMatrix::from_row_slice(2, 2, &[0.5, 0.4, 0.5, 0.5]);
        assert!(solve_drift_gauge(&bad, &DMatrix::zeros(2, 2), None).is_err());
    }
}
