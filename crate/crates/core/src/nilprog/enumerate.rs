//! Budgeted word enumeration with Pareto pruning of usage vectors.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rustc_hash::FxHashMap;
use rustc_hash::FxHashSet;
use smallvec::SmallVec;

use super::{require_nonneg, FiniteSubgroup};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupOracle};

/// Per-generator count of letters `v_i^{+-1}` used by a word.
pub type Usage = SmallVec<[u32; 8]>;

/// `floor(t N_i)` for every length.
pub fn budgets(lengths: &[BigRational], t: &BigRational) -> Result<Vec<u32>> {
    require_nonneg(t)?;
    lengths
        .iter()
        .map(|n| {
            let x = n * t;
            x.numer()
                .div_floor(x.denom())
                .to_u32()
                .ok_or(Error::Overflow("generator budget"))
        })
        .collect()
}

fn dominates(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// Every element reachable within the budgets, each with its Pareto-minimal
/// usage vectors. With a subgroup `H`, elements are coset representatives.
#[derive(Clone, Debug)]
pub struct UsageTable {
    budgets: Vec<u32>,
    entries: FxHashMap<GroupElement, SmallVec<[Usage; 1]>>,
    states: usize,
}

impl UsageTable {
    pub fn build(
        oracle: &GroupOracle,
        gens: &[GroupElement],
        budgets: &[u32],
        h: Option<&FiniteSubgroup>,
        cap: usize,
    ) -> Result<Self> {
        let r = gens.len();
        let mut letters = Vec::with_capacity(2 * r);
        for (i, g) in gens.iter().enumerate() {
            letters.push((i, g.clone()));
            letters.push((i, oracle.inv(g)?));
        }
        let reduce = |g: GroupElement| -> Result<GroupElement> {
            match h {
                Some(h) => h.reduce(oracle, g),
                None => Ok(g),
            }
        };
        let start = reduce(oracle.identity())?;
        let zero: Usage = std::iter::repeat_n(0, r).collect();
        let mut entries: FxHashMap<GroupElement, SmallVec<[Usage; 1]>> = FxHashMap::default();
        entries.insert(start.clone(), smallvec::smallvec![zero.clone()]);
        let mut states = 1usize;
        let mut frontier = vec![(start, zero)];
        // Layers by total usage: anything already stored has total at most
        // that of a new vector, so a new vector never dominates a stored one
        // unless they are equal.
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for (g, u) in &frontier {
                for (i, letter) in &letters {
                    if u[*i] >= budgets[*i] {
                        continue;
                    }
                    let x = reduce(oracle.mul(g, letter)?)?;
                    let mut v = u.clone();
                    v[*i] += 1;
                    let slot = entries.entry(x.clone()).or_default();
                    if slot.iter().any(|w| dominates(w, &v)) {
                        continue;
                    }
                    slot.push(v.clone());
                    states += 1;
                    if states > cap {
                        return Err(Error::CapExceeded { cap, reached: states });
                    }
                    next.push((x, v));
                }
            }
            frontier = next;
        }
        Ok(UsageTable { budgets: budgets.to_vec(), entries, states })
    }

    pub fn budgets(&self) -> &[u32] {
        &self.budgets
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of stored (element, usage) states.
    pub fn states(&self) -> usize {
        self.states
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.entries.contains_key(g)
    }

    pub fn usages(&self, g: &GroupElement) -> Option<&[Usage]> {
        self.entries.get(g).map(|v| v.as_slice())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupElement, &[Usage])> {
        self.entries.iter().map(|(g, u)| (g, u.as_slice()))
    }

    pub fn into_elements(self) -> FxHashSet<GroupElement> {
        self.entries.into_keys().collect()
    }
}
