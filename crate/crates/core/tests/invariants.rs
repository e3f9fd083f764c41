use num_rational::BigRational;
use proptest::prelude::*;

use nilgrowth::growth::product_set_series;
use nilgrowth::lo::{symmetrized_measure, symmetrized_walk_concentration};
use nilgrowth::measures::{convolution_power, convolve, FiniteMeasure, Value};
use nilgrowth::nilprog::{norm_by_bisection, NormContext, Nilprogression};
use nilgrowth::rational::{int, rat};
use nilgrowth::{ExtRational, GroupElement, GroupOracle};

const CAP: usize = 1_000_000;

fn heis() -> impl Strategy<Value = GroupElement> {
    (-3i64..=3, -6i64..=6, -3i64..=3).prop_map(|(a, b, c)| GroupElement::heisenberg(a, b, c))
}

fn dihedral() -> impl Strategy<Value = GroupElement> {
    (prop::bool::ANY, -8i64..=8).prop_map(|(s, k)| GroupElement::dihedral(if s { 1 } else { -1 }, k))
}

fn ut4() -> impl Strategy<Value = GroupElement> {
    prop::collection::vec(-2i64..=2, 6).prop_map(|v| GroupElement::int_matrix(4, v).unwrap())
}

fn exact(v: Value) -> BigRational {
    v.exact().expect("exact").clone()
}

fn weighted(elems: Vec<GroupElement>, weights: Vec<u64>) -> FiniteMeasure {
    FiniteMeasure::from_weights(elems.into_iter().zip(weights).collect()).unwrap()
}

fn heisenberg_box() -> Nilprogression {
    let h = GroupOracle::heisenberg();
    let gens = vec![GroupElement::heisenberg(1, 0, 0), GroupElement::heisenberg(0, 0, 1), GroupElement::heisenberg(0, 1, 0)];
    Nilprogression::new(h, gens, vec![int(2), int(2), int(4)]).unwrap()
}

fn group_laws(g: &GroupOracle, x: &GroupElement, y: &GroupElement, z: &GroupElement) -> Result<(), TestCaseError> {
    let xy_z = g.mul(&g.mul(x, y).unwrap(), z).unwrap();
    let x_yz = g.mul(x, &g.mul(y, z).unwrap()).unwrap();
    prop_assert_eq!(xy_z, x_yz);
    prop_assert!(g.is_identity(&g.mul(x, &g.inv(x).unwrap()).unwrap()));
    prop_assert_eq!(g.mul(&g.identity(), x).unwrap(), x.clone());
    // [x,y] = x^-1 y^-1 x y
    let xi = g.inv(x).unwrap();
    let yi = g.inv(y).unwrap();
    prop_assert_eq!(g.commutator(x, y).unwrap(), g.product([&xi, &yi, x, y]).unwrap());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn heisenberg_group_laws(x in heis(), y in heis(), z in heis()) {
        group_laws(&GroupOracle::heisenberg(), &x, &y, &z)?;
    }

    #[test]
    fn dihedral_group_laws(x in dihedral(), y in dihedral(), z in dihedral()) {
        group_laws(&GroupOracle::dihedral(), &x, &y, &z)?;
    }

    #[test]
    fn ut4_group_laws(x in ut4(), y in ut4(), z in ut4()) {
        group_laws(&GroupOracle::int_unitriangular(4).unwrap(), &x, &y, &z)?;
    }

    #[test]
    fn heisenberg_commutators_are_central(x in heis(), y in heis(), z in heis()) {
        let g = GroupOracle::heisenberg();
        let c = g.commutator(&x, &y).unwrap();
        prop_assert_eq!(g.mul(&c, &z).unwrap(), g.mul(&z, &c).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn convolution_is_associative_and_young_holds(
        a in prop::collection::vec((heis(), 1u64..5), 1..4),
        b in prop::collection::vec((heis(), 1u64..5), 1..4),
        c in prop::collection::vec((heis(), 1u64..5), 1..4),
    ) {
        let g = GroupOracle::heisenberg();
        let m = |v: Vec<(GroupElement, u64)>| { let (e, w) = v.into_iter().unzip(); weighted(e, w) };
        let (mu, nu, la) = (m(a), m(b), m(c));
        let left = convolve(&g, &convolve(&g, &mu, &nu).unwrap(), &la).unwrap();
        let right = convolve(&g, &mu, &convolve(&g, &nu, &la).unwrap()).unwrap();
        prop_assert_eq!(left.entries(), right.entries());
        prop_assert_eq!(exact(left.total()), int(1));

        let mn = convolve(&g, &mu, &nu).unwrap();
        prop_assert!(exact(mn.l2_inv_sq()) >= exact(mu.l2_inv_sq()));
        prop_assert!(exact(mn.l2_inv_sq()) >= exact(nu.l2_inv_sq()));
        prop_assert!(exact(mn.linf()) <= exact(mu.linf()));
        prop_assert!(exact(mn.linf()) <= exact(nu.linf()));
    }

    #[test]
    fn walk_concentration_matches_convolution_power(a in prop::collection::vec(heis(), 1..4), steps in 1u64..5) {
        let g = GroupOracle::heisenberg();
        let walk = symmetrized_walk_concentration(&g, &a, steps, CAP).unwrap();
        let power = convolution_power(&g, &symmetrized_measure(&g, &a).unwrap(), steps, CAP).unwrap();
        prop_assert_eq!(walk, exact(power.linf()));
    }

    #[test]
    fn product_sets_grow(a in prop::collection::vec(dihedral(), 1..4), sym in prop::bool::ANY) {
        let g = GroupOracle::dihedral();
        let s = product_set_series(&g, &a, sym, 6, CAP).unwrap();
        prop_assert!(!s.truncated);
        prop_assert_eq!(s.entries.len(), 6);
        if sym {
            // 1 is in the base set, so A^n is contained in A^{n+1}.
            prop_assert!(s.is_nondecreasing());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dilations_are_nested(num in 1i64..8, extra in 1i64..8) {
        let p = heisenberg_box();
        let s = rat(num, 4);
        let t = &s + rat(extra, 4);
        let small = p.enumerate_dilate(&s, CAP).unwrap();
        let large = p.enumerate_dilate(&t, CAP).unwrap();
        prop_assert!(small.is_subset(&large));
        prop_assert!(small.contains(&GroupElement::heisenberg(0, 0, 0)));
    }

    #[test]
    fn norm_axioms(x in heis(), y in heis()) {
        let g = GroupOracle::heisenberg();
        let ctx = NormContext::new(heisenberg_box(), int(2), CAP).unwrap();
        let nx = ctx.norm_p(&x).unwrap();
        let ny = ctx.norm_p(&y).unwrap();
        prop_assert_eq!(ctx.norm_p(&g.identity()).unwrap(), ExtRational::zero());
        prop_assert_eq!(ctx.norm_p(&g.inv(&x).unwrap()).unwrap(), nx.clone());
        let nxy = ctx.norm_p(&g.mul(&x, &y).unwrap()).unwrap();
        let sum = &nx + &ny;
        let beyond = sum.finite().is_none_or(|s| *s > int(2));
        prop_assert!(nxy <= sum || (beyond && nxy == ExtRational::Infinite));
        prop_assert_eq!(nx, norm_by_bisection(ctx.progression(), &x, &int(2), CAP).unwrap());
    }
}
