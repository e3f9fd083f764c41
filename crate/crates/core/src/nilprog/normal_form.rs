//! Verification of the three normal-form conditions.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rustc_hash::FxHashMap;
use serde::Serialize;

use super::{budgets, CosetNilprogression, UsageTable};
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::rational::rat_str;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum NormalFormWitness {
    /// `[u_i^s, u_j^t]` outside the prescribed tail progression (1-based indices).
    Commutator { i: usize, j: usize, signs: (i8, i8), commutator: GroupElement },
    /// Two exponent vectors with the same ordered product.
    Collision { first: Vec<i64>, second: Vec<i64>, element: GroupElement },
    Volume {
        size: usize,
        #[serde(with = "rat_str")]
        lower: BigRational,
        #[serde(with = "rat_str")]
        upper: BigRational,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalFormReport {
    #[serde(with = "rat_str")]
    pub c: BigRational,
    pub holds_i: bool,
    pub holds_ii: bool,
    pub holds_iii: bool,
    pub size: usize,
    pub witnesses: Vec<NormalFormWitness>,
}

impl NormalFormReport {
    pub fn holds(&self) -> bool {
        self.holds_i && self.holds_ii && self.holds_iii
    }
}

/// Tests conditions (i)-(iii) for the progression underlying `hp`, working
/// modulo `H` throughout.
pub fn check_normal_form(hp: &CosetNilprogression, c: &BigRational, cap: usize) -> Result<NormalFormReport> {
    if *c <= BigRational::from_integer(0.into()) {
        return Err(Error::invalid("C must be positive"));
    }
    let oracle = hp.oracle();
    let h = hp.subgroup();
    let hopt = (!h.is_trivial()).then_some(h);
    let p = hp.progression();
    let gens = p.generators();
    let lengths = p.lengths();
    let r = gens.len();
    let mut witnesses = Vec::new();

    let inverses: Vec<GroupElement> = gens.iter().map(|g| oracle.inv(g)).collect::<Result<_>>()?;
    let signed = |i: usize, s: i8| if s > 0 { &gens[i] } else { &inverses[i] };
    let mut holds_i = true;
    for j in 0..r {
        let tail = &gens[j + 1..];
        for i in 0..j {
            let scale = c / (&lengths[i] * &lengths[j]);
            let tail_budgets = budgets(&lengths[j + 1..], &scale)?;
            let table = UsageTable::build(oracle, tail, &tail_budgets, hopt, cap)?;
            for (si, sj) in [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)] {
                let comm = oracle.commutator(signed(i, si), signed(j, sj))?;
                let rep = h.reduce(oracle, comm.clone())?;
                if !table.contains(&rep) {
                    holds_i = false;
                    witnesses.push(NormalFormWitness::Commutator { i: i + 1, j: j + 1, signs: (si, sj), commutator: comm });
                }
            }
        }
    }

    let bounds: Vec<i64> = lengths
        .iter()
        .map(|n| {
            let x = n / c;
            x.numer().div_floor(x.denom()).to_i64().ok_or(Error::Overflow("exponent bound"))
        })
        .collect::<Result<_>>()?;
    let total: usize = bounds.iter().try_fold(1usize, |acc, &b| acc.checked_mul(2 * b as usize + 1)).unwrap_or(usize::MAX);
    if total > cap {
        return Err(Error::CapExceeded { cap, reached: total });
    }
    let powers: Vec<Vec<GroupElement>> = (0..r)
        .map(|i| (-bounds[i]..=bounds[i]).map(|n| oracle.pow(&gens[i], n)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let mut seen: FxHashMap<GroupElement, Vec<i64>> = FxHashMap::default();
    let mut holds_ii = true;
    let mut exps: Vec<i64> = bounds.iter().map(|b| -b).collect();
    'outer: loop {
        let mut g = oracle.identity();
        for i in 0..r {
            g = oracle.mul(&g, &powers[i][(exps[i] + bounds[i]) as usize])?;
        }
        let rep = h.reduce(oracle, g)?;
        if let Some(prev) = seen.get(&rep) {
            holds_ii = false;
            witnesses.push(NormalFormWitness::Collision { first: prev.clone(), second: exps.clone(), element: rep });
            break;
        }
        seen.insert(rep, exps.clone());
        for i in (0..r).rev() {
            if exps[i] < bounds[i] {
                exps[i] += 1;
                continue 'outer;
            }
            exps[i] = -bounds[i];
        }
        break;
    }

    let size = hp.enumerate_dilate(&BigRational::one(), cap)?.len();
    let volume: BigInt = lengths
        .iter()
        .map(|n| BigInt::from(2) * n.floor().to_integer() + BigInt::one())
        .product();
    let volume = BigRational::from_integer(volume);
    let lower = &volume / c;
    let upper = &volume * c;
    let s = BigRational::from_integer(size.into());
    let holds_iii = lower <= s && s <= upper;
    if !holds_iii {
        witnesses.push(NormalFormWitness::Volume { size, lower, upper });
    }

    Ok(NormalFormReport { c: c.clone(), holds_i, holds_ii, holds_iii, size, witnesses })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupOracle;
    use crate::nilprog::Nilprogression;
    use crate::rational::int;

    #[test]
    fn abelian_box() {
        let z2 = GroupOracle::lattice(2);
        let p = Nilprogression::new(z2, vec![GroupElement::lattice(&[1, 0]), GroupElement::lattice(&[0, 1])], vec![int(5), int(7)]).unwrap();
        let rep = check_normal_form(&p.into(), &int(1), 1_000_000).unwrap();
        assert!(rep.holds());
        assert_eq!(rep.size, 11 * 15);
    }

    #[test]
    fn improper_line() {
        let z = GroupOracle::lattice(1);
        let p = Nilprogression::new(z, vec![GroupElement::lattice(&[1]), GroupElement::lattice(&[2])], vec![int(4), int(4)]).unwrap();
        let rep = check_normal_form(&p.into(), &int(1), 1_000_000).unwrap();
        assert!(rep.holds_i);
        assert!(!rep.holds_ii);
        let Some(NormalFormWitness::Collision { first, second, element }) =
            rep.witnesses.iter().find(|w| matches!(w, NormalFormWitness::Collision { .. })).cloned()
        else {
            panic!("collision witness expected")
        };
        assert_ne!(first, second);
        assert_eq!(first[0] + 2 * first[1], second[0] + 2 * second[1]);
        assert_eq!(element, GroupElement::lattice(&[first[0] + 2 * first[1]]));
    }

    #[test]
    fn heisenberg_central_progression() {
        let n = 3;
        let h = GroupOracle::heisenberg();
        let gens = vec![GroupElement::heisenberg(1, 0, 0), GroupElement::heisenberg(0, 0, 1), GroupElement::heisenberg(0, 1, 0)];
        let p = Nilprogression::new(h, gens, vec![int(n), int(n), int(n * n * n)]).unwrap();
        assert_eq!(p.class(), 2);
        let rep = check_normal_form(&p.into(), &int(16), 10_000_000).unwrap();
        assert!(rep.holds(), "{rep:?}");
    }
}
