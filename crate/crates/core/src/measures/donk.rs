//! The three-term bound on the maximal point mass of a product of
//! symmetric measures on an abelian group.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::Rng;
use serde::Serialize;

use super::{convolution_power, convolve, mix, mix_float, FiniteMeasure, Value};
use crate::error::{Error, Result};
use crate::group::GroupOracle;

#[derive(Clone, Debug, Serialize)]
pub struct DonkTriple {
    /// `sup_x mu_1 * ... * mu_n (x)`, exact.
    #[serde(with = "crate::rational::rat_str")]
    pub lhs: BigRational,
    /// `mu^{*n}(0)` with `mu = 1/2 delta + 1/(2n) sum_j mu_j * mu_j`, exact.
    #[serde(with = "crate::rational::rat_str")]
    pub mid: BigRational,
    /// `(mu~_1 * ... * mu~_n)(0)` with
    /// `mu~_j = e^{-1/2} delta + (1 - e^{-1/2}) mu_j * mu_j`.
    pub rhs: f64,
}

/// Slack on the floating-point upper comparison.
pub const RHS_SLACK: f64 = 1e-12;

pub fn donk_bounds(oracle: &GroupOracle, mus: &[FiniteMeasure]) -> Result<DonkTriple> {
    if mus.is_empty() {
        return Err(Error::invalid("at least one measure is required"));
    }
    if !oracle.is_abelian() {
        return Err(Error::NotAbelian);
    }
    for (j, mu) in mus.iter().enumerate() {
        if !mu.is_exact() {
            return Err(Error::ModeMismatch);
        }
        if !mu.is_symmetric(oracle)? {
            return Err(Error::NotSymmetric(format!("measure {}", j + 1)));
        }
    }
    let n = mus.len();
    let id = oracle.identity();
    let delta = FiniteMeasure::delta(id.clone());

    let mut prod = mus[0].clone();
    for mu in &mus[1..] {
        prod = convolve(oracle, &prod, mu)?;
    }
    let lhs = prod.linf().exact().cloned().expect("exact");

    let squares: Vec<FiniteMeasure> = mus.iter().map(|m| convolve(oracle, m, m)).collect::<Result<_>>()?;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let w = BigRational::new(BigInt::one(), BigInt::from(2 * n));
    let mut parts: Vec<(BigRational, &FiniteMeasure)> = vec![(half, &delta)];
    parts.extend(squares.iter().map(|s| (w.clone(), s)));
    let mu = mix(&parts)?;
    let mid = match convolution_power(oracle, &mu, n as u64, usize::MAX)?.mass(&id) {
        Value::Exact(r) => r,
        Value::Float(_) => unreachable!("exact input"),
    };

    let e = (-0.5f64).exp();
    let fdelta = delta.to_float();
    let mut tilde = FiniteMeasure::delta(id.clone()).to_float();
    for s in &squares {
        let t = mix_float(&[(e, &fdelta), (1.0 - e, &s.to_float())])?;
        tilde = convolve(oracle, &tilde, &t)?;
    }
    let rhs = tilde.mass(&id).to_f64();

    let triple = DonkTriple { lhs, mid, rhs };
    if triple.lhs > triple.mid {
        return Err(Error::Assertion(format!("lhs {} exceeds mid {}", triple.lhs, triple.mid)));
    }
    if crate::rational::to_f64(&triple.mid) > triple.rhs + RHS_SLACK {
        return Err(Error::Assertion(format!("mid {} exceeds rhs {}", triple.mid, triple.rhs)));
    }
    Ok(triple)
}

/// `n` random symmetric measures with supports of size at most 5 on `Z`
/// (`modulus = None`) or `Z/q`.
pub fn random_donk_instance<R: Rng>(rng: &mut R, modulus: Option<i64>, n: usize) -> Result<(GroupOracle, Vec<FiniteMeasure>)> {
    let oracle = match modulus {
        None => GroupOracle::lattice(1),
        Some(q) => GroupOracle::cyclic(&[q])?,
    };
    let mus = (0..n)
        .map(|_| {
            let pairs = rng.random_range(1..=2);
            super::random_symmetric_measure(&oracle, rng, pairs, 6)
        })
        .collect::<Result<_>>()?;
    Ok((oracle, mus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupElement;
    use crate::rational::{int, rat};
    use crate::rng::seeded;

    #[test]
    fn coin_instance() {
        let z = GroupOracle::lattice(1);
        let mu = FiniteMeasure::uniform(&[GroupElement::lattice(&[1]), GroupElement::lattice(&[-1])]).unwrap();
        let t = donk_bounds(&z, &[mu]).unwrap();
        assert_eq!(t.lhs, rat(1, 2));
        assert_eq!(t.mid, rat(3, 4));
        assert!((t.rhs - 0.5 * (1.0 + (-0.5f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn delta_instance() {
        let z = GroupOracle::lattice(1);
        let t = donk_bounds(&z, &[FiniteMeasure::delta(z.identity())]).unwrap();
        assert_eq!((t.lhs, t.mid), (int(1), int(1)));
        assert!((t.rhs - 1.0).abs() < 1e-15);
    }

    #[test]
    fn preconditions() {
        let z = GroupOracle::lattice(1);
        let lopsided = FiniteMeasure::uniform(&[GroupElement::lattice(&[1]), GroupElement::lattice(&[0])]).unwrap();
        assert!(matches!(donk_bounds(&z, &[lopsided]), Err(Error::NotSymmetric(_))));
        let d = GroupOracle::dihedral();
        assert_eq!(donk_bounds(&d, &[FiniteMeasure::delta(d.identity())]).unwrap_err(), Error::NotAbelian);
    }

    #[test]
    fn random_chain() {
        let mut rng = seeded(5);
        for i in 0..40 {
            let modulus = if i % 2 == 0 { None } else { Some(rng.random_range(2..=12)) };
            let n = rng.random_range(1..=6);
            let (g, mus) = random_donk_instance(&mut rng, modulus, n).unwrap();
            assert!(mus.iter().all(|m| m.support_len() <= 5));
            donk_bounds(&g, &mus).unwrap();
        }
    }
}
