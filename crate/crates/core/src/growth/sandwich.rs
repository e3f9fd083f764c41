//! Exact containment checks `HP^m ⊆ S^{Cmn} ⊆ X HP^{C^2 m}`.

use num_rational::BigRational;
use num_bigint::BigInt;
use rustc_hash::FxHashSet;
use serde::Serialize;

use super::{base_set, PowerIter};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupOracle};
use crate::nilprog::CosetNilprogression;

#[derive(Clone, Debug, Serialize)]
pub struct SandwichRow {
    pub m: u64,
    pub hp_size: usize,
    pub power_size: usize,
    pub outer_size: usize,
    pub lower_holds: bool,
    pub upper_holds: bool,
    /// Smallest element of `HP^m` missing from the power, if any.
    pub lower_witness: Option<GroupElement>,
    /// Smallest element of the power missing from `X HP^{C^2 m}`, if any.
    pub upper_witness: Option<GroupElement>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub n: u64,
    pub c: u64,
    pub rows: Vec<SandwichRow>,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| r.lower_holds && r.upper_holds)
    }
}

fn first_missing(sub: &FxHashSet<GroupElement>, sup: &FxHashSet<GroupElement>) -> Option<GroupElement> {
    sub.iter().filter(|g| !sup.contains(*g)).min().cloned()
}

/// Materializes both sides for every requested `m` and compares them.
pub fn check_control_sandwich(
    oracle: &GroupOracle,
    a: &[GroupElement],
    hp: &CosetNilprogression,
    x: &[GroupElement],
    n: u64,
    c: u64,
    ms: &[u64],
    cap: usize,
) -> Result<SandwichReport> {
    if n == 0 || c == 0 || ms.contains(&0) {
        return Err(Error::invalid("n, C and m must be positive"));
    }
    let x: Vec<GroupElement> = x.iter().map(|g| oracle.canonicalize(g.clone())).collect::<Result<_>>()?;
    let mut ms = ms.to_vec();
    ms.sort_unstable();
    ms.dedup();
    let mut powers = PowerIter::new(oracle, base_set(oracle, a, true)?, cap);
    let mut rows = Vec::new();
    for &m in &ms {
        let exponent = c.checked_mul(m).and_then(|v| v.checked_mul(n)).ok_or(Error::Overflow("power exponent"))?;
        while powers.exponent() < exponent {
            powers.advance()?;
        }
        let power = powers.current();
        let inner = hp.enumerate_dilate(&BigRational::from_integer(BigInt::from(m)), cap)?;
        let outer_hp = hp.enumerate_dilate(&BigRational::from_integer(BigInt::from(c * c * m)), cap)?;
        let mut outer = FxHashSet::default();
        for xi in &x {
            for g in &outer_hp {
                outer.insert(oracle.mul(xi, g)?);
            }
            if outer.len() > cap {
                return Err(Error::CapExceeded { cap, reached: outer.len() });
            }
        }
        let lower_witness = first_missing(&inner, power);
        let upper_witness = first_missing(power, &outer);
        rows.push(SandwichRow {
            m,
            hp_size: inner.len(),
            power_size: power.len(),
            outer_size: outer.len(),
            lower_holds: lower_witness.is_none(),
            upper_holds: upper_witness.is_none(),
            lower_witness,
            upper_witness,
        });
    }
    Ok(SandwichReport { n, c, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nilprog::Nilprogression;
    use crate::rational::int;

    fn dihedral_setup() -> (GroupOracle, Vec<GroupElement>, CosetNilprogression) {
        let d = GroupOracle::dihedral();
        let a: Vec<_> = (-3..=3).flat_map(|b| [GroupElement::dihedral(1, b), GroupElement::dihedral(-1, b)]).collect();
        let p = Nilprogression::new(d.clone(), vec![GroupElement::dihedral(1, 1)], vec![int(12)]).unwrap();
        (d, a, p.into())
    }

    #[test]
    fn dihedral_sandwich() {
        let (d, a, hp) = dihedral_setup();
        let x = vec![GroupElement::dihedral(1, 0), GroupElement::dihedral(-1, 0)];
        let rep = check_control_sandwich(&d, &a, &hp, &x, 4, 3, &[1, 2, 3], 1_000_000).unwrap();
        assert!(rep.holds(), "{rep:?}");
        let bad = check_control_sandwich(&d, &a, &hp, &x[..1], 4, 3, &[1], 1_000_000).unwrap();
        assert!(!bad.holds());
        let w = bad.rows[0].upper_witness.clone().unwrap();
        assert!(matches!(w, GroupElement::Dihedral { sign: -1, .. }));
    }

    #[test]
    fn progression_against_itself() {
        let z = GroupOracle::lattice(1);
        let p = Nilprogression::new(z.clone(), vec![GroupElement::lattice(&[1])], vec![int(3)]).unwrap();
        let hp: CosetNilprogression = p.into();
        let a: Vec<_> = hp.enumerate_dilate(&int(1), 100).unwrap().into_iter().collect();
        let rep = check_control_sandwich(&z, &a, &hp, &[z.identity()], 1, 1, &[1], 1000).unwrap();
        assert!(rep.holds());
    }
}
