//! The dilation norms `||g||_P`, `||g||_HP` and `||g||_{HP,X}`.

use itertools::Itertools;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rustc_hash::FxHashMap;

use super::CosetNilprogression;
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::rational::{int, ExtRational};

/// Default search radius: norms above it are reported as infinite.
pub const DEFAULT_T_MAX: i64 = 2;

/// Largest `X` accepted by the permutation search.
pub const MAX_X: usize = 8;

/// Precomputed norms of every coset of `H` met by `P^{t_max}`.
///
/// An element with Pareto-minimal usage vectors `u` lies in `P^t` iff some
/// `u_i <= t N_i` for all `i`, so its norm is `min_u max_i u_i / N_i`.
#[derive(Clone, Debug)]
pub struct NormContext {
    hp: CosetNilprogression,
    t_max: BigRational,
    norms: FxHashMap<GroupElement, BigRational>,
}

impl NormContext {
    pub fn new(hp: impl Into<CosetNilprogression>, t_max: BigRational, cap: usize) -> Result<Self> {
        let hp = hp.into();
        let table = hp.usage_table(&t_max, cap)?;
        let lengths = hp.progression().lengths();
        let mut norms = FxHashMap::default();
        for (g, usages) in table.iter() {
            let best = usages
                .iter()
                .map(|u| {
                    u.iter()
                        .zip(lengths)
                        .map(|(&k, n)| BigRational::from_integer(k.into()) / n)
                        .max()
                        .unwrap_or_else(BigRational::zero)
                })
                .min()
                .expect("usage list is nonempty");
            norms.insert(g.clone(), best);
        }
        Ok(NormContext { hp, t_max, norms })
    }

    pub fn t_max(&self) -> &BigRational {
        &self.t_max
    }

    pub fn progression(&self) -> &CosetNilprogression {
        &self.hp
    }

    /// `||g||_HP`; equals `||g||_P` when `H` is trivial.
    pub fn norm_hp(&self, g: &GroupElement) -> Result<ExtRational> {
        let oracle = self.hp.oracle();
        let g = oracle.canonicalize(g.clone())?;
        let rep = self.hp.subgroup().reduce(oracle, g)?;
        Ok(match self.norms.get(&rep) {
            Some(t) => ExtRational::Finite(t.clone()),
            None => ExtRational::Infinite,
        })
    }

    pub fn norm_p(&self, g: &GroupElement) -> Result<ExtRational> {
        if !self.hp.subgroup().is_trivial() {
            return Err(Error::invalid("norm_P requires a trivial subgroup; use norm_hp"));
        }
        self.norm_hp(g)
    }

    /// `min_sigma max_x ||sigma(x)^-1 g x||_HP` over permutations of `X`.
    pub fn norm_hpx(&self, g: &GroupElement, x: &[GroupElement]) -> Result<ExtRational> {
        let oracle = self.hp.oracle();
        if x.len() > MAX_X {
            return Err(Error::invalid(format!("|X| = {} exceeds {MAX_X}", x.len())));
        }
        if !x.iter().any(|e| oracle.is_identity(e)) {
            return Err(Error::invalid("X must contain the identity"));
        }
        let inv: Vec<GroupElement> = x.iter().map(|e| oracle.inv(e)).collect::<Result<_>>()?;
        // cost[i][j] = ||x_j^-1 g x_i||
        let mut cost = vec![Vec::with_capacity(x.len()); x.len()];
        for (i, xi) in x.iter().enumerate() {
            let gx = oracle.mul(g, xi)?;
            for yj in &inv {
                cost[i].push(self.norm_hp(&oracle.mul(yj, &gx)?)?);
            }
        }
        let best = (0..x.len())
            .permutations(x.len())
            .map(|sigma| sigma.iter().enumerate().map(|(i, &j)| cost[i][j].clone()).max().unwrap_or_else(ExtRational::zero))
            .min()
            .unwrap_or_else(ExtRational::zero);
        Ok(best)
    }

    /// Canonical coset representatives with norm at most `t`, sorted.
    pub fn representatives_within(&self, t: &BigRational) -> Vec<GroupElement> {
        let mut v: Vec<GroupElement> = self.norms.iter().filter(|(_, n)| *n <= t).map(|(g, _)| g.clone()).collect();
        v.sort();
        v
    }
}

/// `||g||_HP` by bisection over the grid `{ j / N_i }`, testing membership
/// with a fresh enumeration at every probe.
pub fn norm_by_bisection(
    hp: &CosetNilprogression,
    g: &GroupElement,
    t_max: &BigRational,
    cap: usize,
) -> Result<ExtRational> {
    let oracle = hp.oracle();
    let rep = hp.subgroup().reduce(oracle, oracle.canonicalize(g.clone())?)?;
    let mut grid: Vec<BigRational> = vec![BigRational::zero()];
    for n in hp.progression().lengths() {
        let top = (t_max * n).ceil().to_integer();
        let top = top.to_i64().ok_or(Error::Overflow("norm grid"))?;
        for j in 1..=top {
            let t = int(j) / n;
            if t <= *t_max {
                grid.push(t);
            }
        }
    }
    grid.sort();
    grid.dedup();
    let member = |t: &BigRational| -> Result<bool> { Ok(hp.usage_table(t, cap)?.contains(&rep)) };
    if !member(grid.last().expect("grid has 0"))? {
        return Ok(ExtRational::Infinite);
    }
    let (mut lo, mut hi) = (0usize, grid.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if member(&grid[mid])? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(ExtRational::Finite(grid[lo].clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupOracle;
    use crate::nilprog::Nilprogression;
    use crate::rational::rat;

    fn fin(p: i64, q: i64) -> ExtRational {
        ExtRational::Finite(rat(p, q))
    }

    #[test]
    fn integer_line() {
        let p = Nilprogression::new(GroupOracle::lattice(1), vec![GroupElement::lattice(&[1])], vec![int(10)]).unwrap();
        let ctx = NormContext::new(p.clone(), int(2), 1000).unwrap();
        assert_eq!(ctx.norm_p(&GroupElement::lattice(&[0])).unwrap(), ExtRational::zero());
        assert_eq!(ctx.norm_p(&GroupElement::lattice(&[5])).unwrap(), fin(1, 2));
        assert_eq!(ctx.norm_p(&GroupElement::lattice(&[-5])).unwrap(), fin(1, 2));
        assert_eq!(ctx.norm_p(&GroupElement::lattice(&[21])).unwrap(), ExtRational::Infinite);
        let hp = CosetNilprogression::from(p);
        assert_eq!(norm_by_bisection(&hp, &GroupElement::lattice(&[5]), &int(2), 1000).unwrap(), fin(1, 2));
        assert_eq!(norm_by_bisection(&hp, &GroupElement::lattice(&[7]), &int(2), 1000).unwrap(), fin(7, 10));
    }

    #[test]
    fn dihedral_seminorm() {
        let d = GroupOracle::dihedral();
        let p = Nilprogression::new(d, vec![GroupElement::dihedral(1, 1)], vec![int(10)]).unwrap();
        let ctx = NormContext::new(p, int(3), 10_000).unwrap();
        let x = [GroupElement::dihedral(1, 0), GroupElement::dihedral(-1, 0)];
        assert_eq!(ctx.norm_hpx(&GroupElement::dihedral(-1, 3), &x).unwrap(), fin(3, 10));
        assert_eq!(ctx.norm_hpx(&GroupElement::dihedral(1, 7), &x).unwrap(), fin(7, 10));
        assert_eq!(ctx.norm_hpx(&GroupElement::dihedral(1, 0), &x).unwrap(), ExtRational::zero());
        // Without the reflection in X, reflections are out of reach.
        assert_eq!(ctx.norm_hp(&GroupElement::dihedral(-1, 3)).unwrap(), ExtRational::Infinite);
    }

    #[test]
    fn hpx_rejects_bad_x() {
        let p = Nilprogression::new(GroupOracle::lattice(1), vec![GroupElement::lattice(&[1])], vec![int(3)]).unwrap();
        let ctx = NormContext::new(p, int(1), 100).unwrap();
        let g = GroupElement::lattice(&[1]);
        assert!(ctx.norm_hpx(&g, &[GroupElement::lattice(&[1])]).is_err());
        let big: Vec<_> = (0..9).map(|i| GroupElement::lattice(&[i])).collect();
        assert!(ctx.norm_hpx(&g, &big).is_err());
    }
}
