//! Nilprogressions, coset nilprogressions and their dilates.

mod enumerate;
mod normal_form;
mod norm;

use num_rational::BigRational;
use num_traits::Signed;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupOracle, GroupSpec};
use crate::rational::rat_vec;

pub use enumerate::{budgets, Usage, UsageTable};
pub use norm::{norm_by_bisection, NormContext, DEFAULT_T_MAX, MAX_X};
pub use normal_form::{check_normal_form, NormalFormReport, NormalFormWitness};

/// Default depth for the iterated-commutator nilpotency test.
pub const DEFAULT_DEPTH_CAP: usize = 16;

/// A finite subgroup given by its elements, with canonical coset
/// representatives `min_{h in H} h g`.
#[derive(Clone, Debug)]
pub struct FiniteSubgroup {
    elements: Vec<GroupElement>,
    set: FxHashSet<GroupElement>,
}

impl FiniteSubgroup {
    pub fn trivial(oracle: &GroupOracle) -> Self {
        let id = oracle.identity();
        FiniteSubgroup { set: std::iter::once(id.clone()).collect(), elements: vec![id] }
    }

    /// Validates closure under products and inverses.
    pub fn new(oracle: &GroupOracle, elements: Vec<GroupElement>) -> Result<Self> {
        let mut elements = elements
            .into_iter()
            .map(|g| oracle.canonicalize(g))
            .collect::<Result<Vec<_>>>()?;
        elements.sort();
        elements.dedup();
        let set: FxHashSet<GroupElement> = elements.iter().cloned().collect();
        if !set.contains(&oracle.identity()) {
            return Err(Error::invalid("subgroup must contain the identity"));
        }
        for a in &elements {
            if !set.contains(&oracle.inv(a)?) {
                return Err(Error::invalid(format!("subgroup not closed under inverse at {a}")));
            }
            for b in &elements {
                if !set.contains(&oracle.mul(a, b)?) {
                    return Err(Error::invalid(format!("subgroup not closed at {a} * {b}")));
                }
            }
        }
        Ok(FiniteSubgroup { elements, set })
    }

    /// Closure of a generating set; fails past `cap` elements.
    pub fn generated_by(oracle: &GroupOracle, gens: &[GroupElement], cap: usize) -> Result<Self> {
        let id = oracle.identity();
        let mut set: FxHashSet<GroupElement> = std::iter::once(id.clone()).collect();
        let mut frontier = vec![id];
        while let Some(g) = frontier.pop() {
            for s in gens {
                let x = oracle.mul(&g, s)?;
                if set.insert(x.clone()) {
                    if set.len() > cap {
                        return Err(Error::CapExceeded { cap, reached: set.len() });
                    }
                    frontier.push(x);
                }
            }
        }
        // In a finite group the monoid generated by `gens` is a group.
        let mut elements: Vec<_> = set.iter().cloned().collect();
        elements.sort();
        Ok(FiniteSubgroup { elements, set })
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.set.contains(g)
    }

    /// Canonical representative of the coset `H g`.
    pub fn reduce(&self, oracle: &GroupOracle, g: GroupElement) -> Result<GroupElement> {
        if self.is_trivial() {
            return Ok(g);
        }
        let mut best: Option<GroupElement> = None;
        for h in &self.elements {
            let x = oracle.mul(h, &g)?;
            if best.as_ref().is_none_or(|b| x < *b) {
                best = Some(x);
            }
        }
        Ok(best.expect("subgroup is nonempty"))
    }
}

/// `P(v_1..v_r; N_1..N_r)`: words in `v_i^{+-1}` using each `v_i` at most
/// `N_i` times in total.
#[derive(Clone, Debug)]
pub struct Nilprogression {
    oracle: GroupOracle,
    gens: Vec<GroupElement>,
    lengths: Vec<BigRational>,
    class: usize,
}

impl Nilprogression {
    pub fn new(oracle: GroupOracle, gens: Vec<GroupElement>, lengths: Vec<BigRational>) -> Result<Self> {
        let trivial = FiniteSubgroup::trivial(&oracle);
        Self::with_quotient(oracle, gens, lengths, &trivial, DEFAULT_DEPTH_CAP)
    }

    fn with_quotient(
        oracle: GroupOracle,
        gens: Vec<GroupElement>,
        lengths: Vec<BigRational>,
        h: &FiniteSubgroup,
        depth_cap: usize,
    ) -> Result<Self> {
        if gens.len() != lengths.len() {
            return Err(Error::invalid(format!("{} generators but {} lengths", gens.len(), lengths.len())));
        }
        if let Some(bad) = lengths.iter().find(|n| !n.is_positive()) {
            return Err(Error::invalid(format!("length {bad} is not positive")));
        }
        let gens = gens.into_iter().map(|g| oracle.canonicalize(g)).collect::<Result<Vec<_>>>()?;
        let class = nilpotency_class(&oracle, &gens, h, depth_cap, crate::DEFAULT_STATE_CAP)?;
        Ok(Nilprogression { oracle, gens, lengths, class })
    }

    pub fn oracle(&self) -> &GroupOracle {
        &self.oracle
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.gens
    }

    pub fn lengths(&self) -> &[BigRational] {
        &self.lengths
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }

    /// Nilpotency class of the generated group (modulo `H` for coset
    /// progressions).
    pub fn class(&self) -> usize {
        self.class
    }

    /// The same generators with lengths scaled by `t`.
    pub fn dilate(&self, t: &BigRational) -> Result<Self> {
        if !t.is_positive() {
            return Err(Error::invalid("dilation factor must be positive"));
        }
        Ok(Nilprogression { lengths: self.lengths.iter().map(|n| n * t).collect(), ..self.clone() })
    }

    /// `P^t` as an explicit set.
    pub fn enumerate_dilate(&self, t: &BigRational, cap: usize) -> Result<FxHashSet<GroupElement>> {
        let table = UsageTable::build(&self.oracle, &self.gens, &budgets(&self.lengths, t)?, None, cap)?;
        Ok(table.into_elements())
    }

    pub fn to_spec(&self, group: GroupSpec) -> ProgressionSpec {
        ProgressionSpec { group, generators: self.gens.clone(), lengths: self.lengths.clone(), subgroup: None }
    }
}

/// `HP`: a nilprogression in `N(H)/H` pulled back to `G`.
#[derive(Clone, Debug)]
pub struct CosetNilprogression {
    h: FiniteSubgroup,
    p: Nilprogression,
}

impl CosetNilprogression {
    pub fn new(h: FiniteSubgroup, oracle: GroupOracle, gens: Vec<GroupElement>, lengths: Vec<BigRational>) -> Result<Self> {
        for v in &gens {
            let v = oracle.canonicalize(v.clone())?;
            let vi = oracle.inv(&v)?;
            for x in h.elements() {
                let c = oracle.mul(&oracle.mul(&v, x)?, &vi)?;
                if !h.contains(&c) {
                    return Err(Error::invalid(format!("generator {v} does not normalize H")));
                }
            }
        }
        let p = Nilprogression::with_quotient(oracle, gens, lengths, &h, DEFAULT_DEPTH_CAP)?;
        Ok(CosetNilprogression { h, p })
    }

    pub fn from_progression(p: Nilprogression) -> Self {
        CosetNilprogression { h: FiniteSubgroup::trivial(&p.oracle), p }
    }

    pub fn subgroup(&self) -> &FiniteSubgroup {
        &self.h
    }

    pub fn progression(&self) -> &Nilprogression {
        &self.p
    }

    pub fn oracle(&self) -> &GroupOracle {
        &self.p.oracle
    }

    /// Usage table of `P^t` computed on cosets of `H`.
    pub fn usage_table(&self, t: &BigRational, cap: usize) -> Result<UsageTable> {
        let h = (!self.h.is_trivial()).then_some(&self.h);
        UsageTable::build(&self.p.oracle, &self.p.gens, &budgets(&self.p.lengths, t)?, h, cap)
    }

    /// `H P^t` as an explicit set.
    pub fn enumerate_dilate(&self, t: &BigRational, cap: usize) -> Result<FxHashSet<GroupElement>> {
        let reps = self.usage_table(t, cap)?.into_elements();
        if self.h.is_trivial() {
            return Ok(reps);
        }
        let total = reps.len().saturating_mul(self.h.order());
        if total > cap {
            return Err(Error::CapExceeded { cap, reached: total });
        }
        let mut out = FxHashSet::default();
        for r in &reps {
            for h in self.h.elements() {
                out.insert(self.p.oracle.mul(h, r)?);
            }
        }
        Ok(out)
    }
}

impl From<Nilprogression> for CosetNilprogression {
    fn from(p: Nilprogression) -> Self {
        Self::from_progression(p)
    }
}

/// Smallest `s` such that all left-normed commutators of weight `s + 1` in
/// the generators vanish (modulo `h`).
pub fn nilpotency_class(
    oracle: &GroupOracle,
    gens: &[GroupElement],
    h: &FiniteSubgroup,
    depth_cap: usize,
    cap: usize,
) -> Result<usize> {
    let is_trivial = |g: &GroupElement| h.contains(g);
    let letters: Vec<GroupElement> = gens.iter().filter(|g| !is_trivial(g)).cloned().collect();
    let mut level: FxHashSet<GroupElement> = letters.iter().cloned().collect();
    let mut class = 0;
    while !level.is_empty() {
        class += 1;
        if class > depth_cap {
            return Err(Error::NotNilpotent { depth: depth_cap });
        }
        let mut next = FxHashSet::default();
        for x in &level {
            for y in &letters {
                let c = h.reduce(oracle, oracle.commutator(x, y)?)?;
                if !is_trivial(&c) {
                    next.insert(c);
                    if next.len() > cap {
                        return Err(Error::CapExceeded { cap, reached: next.len() });
                    }
                }
            }
        }
        level = next;
    }
    Ok(class)
}

/// JSON form of a (coset) nilprogression.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProgressionSpec {
    pub group: GroupSpec,
    pub generators: Vec<GroupElement>,
    #[serde(with = "rat_vec")]
    pub lengths: Vec<BigRational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgroup: Option<Vec<GroupElement>>,
}

impl ProgressionSpec {
    pub fn build(&self) -> Result<CosetNilprogression> {
        let oracle = self.group.build()?;
        match &self.subgroup {
            None => Ok(Nilprogression::new(oracle, self.generators.clone(), self.lengths.clone())?.into()),
            Some(h) => {
                let h = FiniteSubgroup::new(&oracle, h.clone())?;
                CosetNilprogression::new(h, oracle, self.generators.clone(), self.lengths.clone())
            }
        }
    }
}

pub(crate) fn require_nonneg(t: &BigRational) -> Result<()> {
    if t.is_negative() {
        Err(Error::invalid("dilation parameter must be non-negative"))
    } else {
        Ok(())
    }
}
