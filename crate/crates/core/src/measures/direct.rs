//! Hypothesis integral and conclusion ratio for measure growth controlled
//! by a coset nilprogression.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::{convolution_power, FiniteMeasure, Value};
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::nilprog::NormContext;
use crate::rational::{rat_str, ExtRational};

#[derive(Clone, Debug, Serialize)]
pub struct DirectReport {
    pub n: u64,
    /// `sum_g mu(g) ||g||_{HP,X}^2`.
    pub integral: ExtRational,
    /// `n` times the integral: the least admissible `M`.
    pub measured_m: ExtRational,
    pub l2_inv_sq: Value,
    pub hp_size: usize,
    /// `||mu^{*n}||_2^{-2} / |HP|`.
    #[serde(with = "rat_str")]
    pub ratio: BigRational,
}

pub fn direct_theorem_check(
    ctx: &NormContext,
    mu: &FiniteMeasure,
    x: &[GroupElement],
    n: u64,
    cap: usize,
) -> Result<DirectReport> {
    if !mu.is_exact() {
        return Err(Error::ModeMismatch);
    }
    let hp = ctx.progression();
    let oracle = hp.oracle();
    let mut integral = ExtRational::zero();
    for (g, m) in mu.entries() {
        let norm = ctx.norm_hpx(&g, x)?;
        let term = match norm {
            ExtRational::Finite(t) => ExtRational::Finite(&t * &t * m.exact().expect("exact")),
            ExtRational::Infinite => ExtRational::Infinite,
        };
        integral = &integral + &term;
    }
    let measured_m = match &integral {
        ExtRational::Finite(v) => ExtRational::Finite(v * BigRational::from_integer(BigInt::from(n))),
        ExtRational::Infinite => ExtRational::Infinite,
    };
    let power = convolution_power(oracle, mu, n, cap)?;
    let l2 = power.l2_inv_sq();
    let hp_size = hp.enumerate_dilate(&BigRational::one(), cap)?.len();
    let ratio = l2.exact().expect("exact") / BigRational::from_integer(BigInt::from(hp_size));
    debug_assert!(!ratio.is_zero());
    Ok(DirectReport { n, integral, measured_m, l2_inv_sq: l2, hp_size, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupOracle;
    use crate::nilprog::Nilprogression;
    use crate::rational::{int, rat};

    #[test]
    fn delta_measure() {
        let z = GroupOracle::lattice(1);
        let p = Nilprogression::new(z.clone(), vec![GroupElement::lattice(&[1])], vec![int(5)]).unwrap();
        let ctx = NormContext::new(p, int(2), 1000).unwrap();
        let r = direct_theorem_check(&ctx, &FiniteMeasure::delta(z.identity()), &[z.identity()], 10, 1000).unwrap();
        assert_eq!(r.integral, ExtRational::zero());
        assert_eq!(r.ratio, rat(1, 11));
    }

    #[test]
    fn integer_line() {
        let z = GroupOracle::lattice(1);
        let p = Nilprogression::new(z.clone(), vec![GroupElement::lattice(&[1])], vec![int(50)]).unwrap();
        let ctx = NormContext::new(p, int(1), 1000).unwrap();
        let a: Vec<_> = (-5..=5).map(|g| GroupElement::lattice(&[g])).collect();
        let mu = FiniteMeasure::uniform(&a).unwrap();
        let r = direct_theorem_check(&ctx, &mu, &[z.identity()], 100, 100_000).unwrap();
        assert_eq!(r.integral, ExtRational::Finite(rat(110, 27500)));
        assert_eq!(r.measured_m, ExtRational::Finite(rat(2, 5)));
        assert_eq!(r.hp_size, 101);
        let ratio = crate::rational::to_f64(&r.ratio);
        assert!(ratio > 0.5 && ratio < 4.0, "{ratio}");
    }
}
