//! Concentration of signed sums and symmetrized random products, small
//! subgroup search, and growth degrees.

mod degree;

use num_bigint::{BigInt, BigUint};
use rustc_hash::FxHashMap;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupOracle, MAX_CAYLEY_ORDER};
use crate::measures::{convolve, FiniteMeasure, Value};
use crate::nilprog::FiniteSubgroup;
use crate::rational::{rat_str, to_f64};

pub use degree::{bass_guivarch_degree, growth_degree, lattice_degree, mam2_experiment, BassReport, Mam2Report};

#[derive(Clone, Debug, Serialize)]
pub struct Concentration {
    #[serde(with = "rat_str")]
    pub rho: BigRational,
    /// Smallest point carrying the maximal mass.
    pub witness: GroupElement,
}

/// `sup_x P(xi_1 v_1 + ... + xi_n v_n = x)` for independent signs.
pub fn bernoulli_concentration(oracle: &GroupOracle, v: &[GroupElement], cap: usize) -> Result<Concentration> {
    if !oracle.is_abelian() {
        return Err(Error::NotAbelian);
    }
    let mut acc = FiniteMeasure::delta(oracle.identity());
    for g in v {
        let step = FiniteMeasure::uniform(&[g.clone(), oracle.inv(g)?])?;
        acc = convolve(oracle, &acc, &step)?;
        if acc.support_len() > cap {
            return Err(Error::CapExceeded { cap, reached: acc.support_len() });
        }
    }
    let (witness, rho) = acc.argmax();
    let Value::Exact(rho) = rho else { unreachable!("exact measure") };
    Ok(Concentration { rho, witness })
}

/// Uniform measure on the multiset `{A_1^{+-1}, ..., A_n^{+-1}}`.
pub fn symmetrized_measure(oracle: &GroupOracle, a: &[GroupElement]) -> Result<FiniteMeasure> {
    let mut items = Vec::with_capacity(2 * a.len());
    for g in a {
        items.push(g.clone());
        items.push(oracle.inv(g)?);
    }
    FiniteMeasure::uniform(&items)
}

/// `sup_B P(A'_1 ... A'_steps = B)` for i.i.d. `A'_i` uniform on the
/// multiset `{A_1^{+-1}, ..., A_n^{+-1}}`, by counting paths.
pub fn symmetrized_walk_concentration(oracle: &GroupOracle, a: &[GroupElement], steps: u64, cap: usize) -> Result<BigRational> {
    if a.is_empty() {
        return Err(Error::invalid("no elements to walk on"));
    }
    let mut moves: FxHashMap<GroupElement, BigUint> = FxHashMap::default();
    for g in a {
        *moves.entry(g.clone()).or_default() += 1u32;
        *moves.entry(oracle.inv(g)?).or_default() += 1u32;
    }
    let mut paths: FxHashMap<GroupElement, BigUint> = FxHashMap::default();
    paths.insert(oracle.identity(), BigUint::one());
    for _ in 0..steps {
        let mut next: FxHashMap<GroupElement, BigUint> = FxHashMap::default();
        for (g, c) in &paths {
            for (s, w) in &moves {
                *next.entry(oracle.mul(g, s)?).or_default() += c * w;
            }
        }
        if next.len() > cap {
            return Err(Error::CapExceeded { cap, reached: next.len() });
        }
        paths = next;
    }
    let top = paths.into_values().max().expect("nonempty");
    let total = BigUint::from(2 * a.len()).pow(u32::try_from(steps).map_err(|_| Error::Overflow("walk length"))?);
    Ok(BigRational::new(top.into(), total.into()))
}

#[derive(Clone, Debug, Serialize)]
pub struct SubgroupReport {
    pub elements: Vec<GroupElement>,
    pub order: usize,
    /// Generating subset the subgroup was found from.
    pub generators: Vec<GroupElement>,
    pub covered: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubgroupSearch {
    pub found: Option<SubgroupReport>,
    pub candidates: usize,
}

fn coverage(h: &FiniteSubgroup, a: &[GroupElement]) -> usize {
    a.iter().filter(|g| h.contains(g)).count()
}

/// Smallest subgroup of order at most `order_cap` containing at least
/// `fraction_target` of the `A_i`, among closures of the empty set, every
/// subset of at most three distinct `A_i`, and all of them.
pub fn find_small_subgroup(
    oracle: &GroupOracle,
    a: &[GroupElement],
    order_cap: usize,
    fraction_target: f64,
) -> Result<SubgroupSearch> {
    match oracle.order() {
        Some(o) if o <= MAX_CAYLEY_ORDER => {}
        _ => return Err(Error::invalid(format!("subgroup search needs a finite group of order <= {MAX_CAYLEY_ORDER}"))),
    }
    if a.is_empty() {
        return Err(Error::invalid("no elements to cover"));
    }
    let mut distinct: Vec<GroupElement> = a.to_vec();
    distinct.sort();
    distinct.dedup();
    let m = distinct.len();
    let mut subsets: Vec<Vec<usize>> = vec![vec![]];
    for i in 0..m {
        subsets.push(vec![i]);
        for j in i + 1..m {
            subsets.push(vec![i, j]);
            for k in j + 1..m {
                subsets.push(vec![i, j, k]);
            }
        }
    }
    if m > 3 {
        subsets.push((0..m).collect());
    }
    let n = a.len();
    let need = (fraction_target * n as f64 - 1e-9).ceil().max(0.0) as usize;
    let candidates = subsets.len();
    // (order, -covered, elements, generators)
    let best = subsets
        .par_iter()
        .filter_map(|s| {
            let gens: Vec<GroupElement> = s.iter().map(|&i| distinct[i].clone()).collect();
            let h = match FiniteSubgroup::generated_by(oracle, &gens, order_cap) {
                Ok(h) => h,
                Err(Error::CapExceeded { .. }) => return None,
                Err(e) => return Some(Err(e)),
            };
            let covered = coverage(&h, a);
            (covered >= need).then(|| Ok((h.order(), std::cmp::Reverse(covered), h.elements().to_vec(), gens)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .min();
    let found = match best {
        None => None,
        Some((order, _, elements, generators)) => {
            // Re-verify closure and coverage independently of the search.
            let h = FiniteSubgroup::new(oracle, elements)?;
            let covered = coverage(&h, a);
            if h.order() != order || covered < need {
                return Err(Error::Assertion("subgroup verification failed".into()));
            }
            Some(SubgroupReport {
                elements: h.elements().to_vec(),
                order,
                generators,
                covered,
                fraction: covered as f64 / n as f64,
            })
        }
    };
    Ok(SubgroupSearch { found, candidates })
}

#[derive(Clone, Debug, Serialize)]
pub struct MamReport {
    pub n: usize,
    #[serde(with = "rat_str")]
    pub epsilon: BigRational,
    /// `sup_B P(A'_1 ... A'_n = B)`.
    #[serde(with = "rat_str")]
    pub sup: BigRational,
    /// `1 / (epsilon sqrt n)`.
    pub threshold: f64,
    pub hypothesis: bool,
    pub fraction_target: f64,
    pub search: Option<SubgroupSearch>,
    /// `|H| / (epsilon sqrt n)`.
    pub order_constant: Option<f64>,
    /// `(1 - fraction) / epsilon^2`.
    pub outlier_constant: Option<f64>,
}

/// Evaluates `sup > 1/(eps sqrt n)` exactly as `sup^2 eps^2 n > 1`; when it
/// holds, searches for a subgroup covering at least `fraction_target`
/// (default `1 - eps^2`) of the elements.
pub fn mam_experiment(
    oracle: &GroupOracle,
    a: &[GroupElement],
    epsilon: &BigRational,
    fraction_target: Option<f64>,
    order_cap: usize,
    cap: usize,
) -> Result<MamReport> {
    let n = a.len();
    if n < 2 {
        return Err(Error::invalid("at least two elements are required"));
    }
    if !epsilon.is_positive() {
        return Err(Error::invalid("epsilon must be positive"));
    }
    let sup = symmetrized_walk_concentration(oracle, a, n as u64, cap)?;
    let nn = BigRational::from_integer(BigInt::from(n));
    let hypothesis = &sup * &sup * epsilon * epsilon * &nn > BigRational::one();
    let eps = to_f64(epsilon);
    let threshold = 1.0 / (eps * (n as f64).sqrt());
    let fraction_target = fraction_target.unwrap_or(1.0 - eps * eps);
    let (search, order_constant, outlier_constant) = if hypothesis {
        let s = find_small_subgroup(oracle, a, order_cap, fraction_target)?;
        let consts = s.found.as_ref().map(|r| (r.order as f64 / (eps * (n as f64).sqrt()), (1.0 - r.fraction) / (eps * eps)));
        (Some(s), consts.map(|c| c.0), consts.map(|c| c.1))
    } else {
        (None, None, None)
    };
    Ok(MamReport { n, epsilon: epsilon.clone(), sup, threshold, hypothesis, fraction_target, search, order_constant, outlier_constant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::CayleyTable;
    use crate::rational::rat;
    use crate::rng::seeded;
    use rand::Rng;

    fn z(xs: &[i64]) -> Vec<GroupElement> {
        xs.iter().map(|&x| GroupElement::lattice(&[x])).collect()
    }

    #[test]
    fn signed_sums() {
        let g = GroupOracle::lattice(1);
        assert_eq!(bernoulli_concentration(&g, &z(&[1, 1, 1, 1]), 100).unwrap().rho, rat(6, 16));
        assert_eq!(bernoulli_concentration(&g, &z(&[1, 2, 4, 8]), 100).unwrap().rho, rat(1, 16));
        let c = bernoulli_concentration(&g, &z(&[0, 0, 0]), 100).unwrap();
        assert_eq!(c.rho, rat(1, 1));
        assert_eq!(c.witness, GroupElement::lattice(&[0]));
    }

    #[test]
    fn concentration_invariances() {
        let g = GroupOracle::lattice(1);
        let mut rng = seeded(2);
        for _ in 0..20 {
            let mut v: Vec<i64> = (0..6).map(|_| rng.random_range(-5..=5)).collect();
            let base = bernoulli_concentration(&g, &z(&v), 1000).unwrap().rho;
            v[0] = -v[0];
            v.reverse();
            assert_eq!(bernoulli_concentration(&g, &z(&v), 1000).unwrap().rho, base);
        }
    }

    #[test]
    fn walks() {
        let q = GroupOracle::cyclic(&[2]).unwrap();
        assert_eq!(symmetrized_walk_concentration(&q, &[GroupElement::residues(&[1])], 2, 10).unwrap(), rat(1, 1));
        let g = GroupOracle::lattice(1);
        assert_eq!(symmetrized_walk_concentration(&g, &z(&[1, 1, 1, 1]), 4, 100).unwrap(), rat(6, 16));
        assert_eq!(symmetrized_walk_concentration(&g, &z(&[0, 0]), 3, 100).unwrap(), rat(1, 1));
    }

    #[test]
    fn walk_matches_convolution_power() {
        let mut rng = seeded(4);
        let h = GroupOracle::heisenberg();
        for _ in 0..5 {
            let a: Vec<_> = (0..rng.random_range(2..=4)).map(|_| h.sample(&mut rng, 2)).collect();
            let steps = rng.random_range(1..=5);
            let mu = symmetrized_measure(&h, &a).unwrap();
            let p = crate::measures::convolution_power(&h, &mu, steps, 1 << 20).unwrap();
            let walk = symmetrized_walk_concentration(&h, &a, steps, 1 << 20).unwrap();
            assert_eq!(Value::Exact(walk), p.linf());
        }
    }

    fn d8() -> GroupOracle {
        GroupOracle::cayley(CayleyTable::dihedral(8).unwrap())
    }

    #[test]
    fn subgroup_search() {
        let g = d8();
        let r2 = GroupElement::Cayley(2);
        let all_in: Vec<_> = std::iter::repeat_n(r2.clone(), 10).collect();
        let s = find_small_subgroup(&g, &all_in, 16, 1.0).unwrap().found.unwrap();
        assert_eq!((s.order, s.fraction), (4, 1.0));
        let mut planted: Vec<_> = std::iter::repeat_n(r2, 9).collect();
        planted.push(GroupElement::Cayley(8));
        let s = find_small_subgroup(&g, &planted, 16, 0.9).unwrap().found.unwrap();
        assert_eq!(s.order, 4);
        assert!((s.fraction - 0.9).abs() < 1e-12);
        let gens = vec![GroupElement::Cayley(1), GroupElement::Cayley(8)];
        assert!(find_small_subgroup(&g, &gens, 8, 1.0).unwrap().found.is_none());
    }

    #[test]
    fn mam_planted_and_control() {
        let g = d8();
        let mut a: Vec<_> = std::iter::repeat_n(GroupElement::Cayley(2), 58).collect();
        a.extend(std::iter::repeat_n(GroupElement::Cayley(8), 6));
        let r = mam_experiment(&g, &a, &rat(1, 2), None, 512, 10_000).unwrap();
        assert!(r.hypothesis);
        let found = r.search.unwrap().found.unwrap();
        assert_eq!(found.order, 4);
        assert!(found.fraction >= 0.9);

        let big = GroupOracle::cayley(CayleyTable::dihedral(256).unwrap());
        let mut rng = seeded(1);
        let a: Vec<_> = (0..64).map(|_| big.sample(&mut rng, 0)).collect();
        let r = mam_experiment(&big, &a, &rat(1, 2), None, 512, 10_000).unwrap();
        assert!(!r.hypothesis);
        assert!(mam_experiment(&g, &a[..1], &rat(1, 2), None, 16, 100).is_err());
    }
}
