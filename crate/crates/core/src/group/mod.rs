//! Exact group arithmetic behind a uniform oracle.

mod cayley;
mod element;
pub mod unitri;

use std::sync::Arc;

use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use cayley::{CayleyTable, MAX_CAYLEY_ORDER};
pub use element::{Coords, GroupElement};
pub use unitri::{IntUnitri, RatUnitri, Unitri};

use crate::error::{Error, Result};
use crate::rational::rat;

#[derive(Clone, Debug, PartialEq)]
pub enum Backend {
    /// `Z^rank` under addition.
    Lattice { rank: usize },
    /// `Z/q_1 x ... x Z/q_s`.
    Cyclic { moduli: Vec<i64> },
    /// The infinite dihedral group of maps `x -> ax + b`, `a = +-1`.
    Dihedral,
    /// `UT(size, Z)` with checked 64-bit entries.
    IntUnitriangular { size: usize },
    /// `UT(size, Q)`.
    Unitriangular { size: usize },
    Cayley(Arc<CayleyTable>),
}

/// Group law, identity and inverses for one backend. Cheap to clone and
/// safe to share across threads.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupOracle {
    backend: Backend,
}

impl GroupOracle {
    pub fn new(backend: Backend) -> Result<Self> {
        match &backend {
            Backend::Cyclic { moduli } if moduli.iter().any(|&q| q < 1) => {
                return Err(Error::invalid("cyclic moduli must be positive"))
            }
            Backend::IntUnitriangular { size } | Backend::Unitriangular { size } if !(1..=64).contains(size) => {
                return Err(Error::invalid("matrix size must be in 1..=64"))
            }
            _ => {}
        }
        Ok(GroupOracle { backend })
    }

    pub fn lattice(rank: usize) -> Self {
        GroupOracle { backend: Backend::Lattice { rank } }
    }

    pub fn cyclic(moduli: &[i64]) -> Result<Self> {
        Self::new(Backend::Cyclic { moduli: moduli.to_vec() })
    }

    pub fn dihedral() -> Self {
        GroupOracle { backend: Backend::Dihedral }
    }

    pub fn heisenberg() -> Self {
        GroupOracle { backend: Backend::IntUnitriangular { size: 3 } }
    }

    pub fn int_unitriangular(size: usize) -> Result<Self> {
        Self::new(Backend::IntUnitriangular { size })
    }

    pub fn unitriangular(size: usize) -> Result<Self> {
        Self::new(Backend::Unitriangular { size })
    }

    pub fn cayley(table: CayleyTable) -> Self {
        GroupOracle { backend: Backend::Cayley(Arc::new(table)) }
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn name(&self) -> String {
        match &self.backend {
            Backend::Lattice { rank } => format!("Z^{rank}"),
            Backend::Cyclic { moduli } => {
                moduli.iter().map(|q| format!("Z/{q}")).collect::<Vec<_>>().join(" x ")
            }
            Backend::Dihedral => "Dinf".into(),
            Backend::IntUnitriangular { size } => format!("UT({size},Z)"),
            Backend::Unitriangular { size } => format!("UT({size},Q)"),
            Backend::Cayley(t) => t.name().to_string(),
        }
    }

    pub fn identity(&self) -> GroupElement {
        match &self.backend {
            Backend::Lattice { rank } => GroupElement::Lattice(std::iter::repeat_n(0, *rank).collect()),
            Backend::Cyclic { moduli } => GroupElement::Residues(std::iter::repeat_n(0, moduli.len()).collect()),
            Backend::Dihedral => GroupElement::Dihedral { sign: 1, shift: 0 },
            Backend::IntUnitriangular { size } => GroupElement::IntMatrix(IntUnitri::identity(*size)),
            Backend::Unitriangular { size } => GroupElement::RatMatrix(Box::new(RatUnitri::identity(*size))),
            Backend::Cayley(t) => GroupElement::Cayley(t.identity()),
        }
    }

    fn mismatch(&self, g: &GroupElement) -> Error {
        Error::BackendMismatch { backend: self.name(), element: g.encode() }
    }

    /// Checks that `g` is a canonically encoded element of this group.
    pub fn check(&self, g: &GroupElement) -> Result<()> {
        let ok = match (&self.backend, g) {
            (Backend::Lattice { rank }, GroupElement::Lattice(v)) => v.len() == *rank,
            (Backend::Cyclic { moduli }, GroupElement::Residues(v)) => {
                v.len() == moduli.len() && v.iter().zip(moduli).all(|(x, q)| (0..*q).contains(x))
            }
            (Backend::Dihedral, GroupElement::Dihedral { sign, .. }) => *sign == 1 || *sign == -1,
            (Backend::IntUnitriangular { size }, GroupElement::IntMatrix(m)) => m.size() == *size,
            (Backend::Unitriangular { size }, GroupElement::RatMatrix(m)) => m.size() == *size,
            (Backend::Cayley(t), GroupElement::Cayley(i)) => (*i as usize) < t.order(),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(self.mismatch(g))
        }
    }

    /// Brings a loosely specified element into canonical form (reduces
    /// residues, converts integral rational matrices and vice versa).
    pub fn canonicalize(&self, g: GroupElement) -> Result<GroupElement> {
        let out = match (&self.backend, g) {
            (Backend::Cyclic { moduli }, GroupElement::Residues(v)) if v.len() == moduli.len() => {
                GroupElement::Residues(v.iter().zip(moduli).map(|(x, q)| x.rem_euclid(*q)).collect())
            }
            (Backend::Cyclic { moduli }, GroupElement::Lattice(v)) if v.len() == moduli.len() => {
                GroupElement::Residues(v.iter().zip(moduli).map(|(x, q)| x.rem_euclid(*q)).collect())
            }
            (Backend::Unitriangular { .. }, GroupElement::IntMatrix(m)) => GroupElement::rat_matrix(m.to_rational()),
            (Backend::IntUnitriangular { .. }, GroupElement::RatMatrix(m)) => match m.to_integer() {
                Some(i) => GroupElement::IntMatrix(i),
                None => return Err(Error::NotUnitriangular("non-integral entry for integer backend".into())),
            },
            (_, g) => g,
        };
        self.check(&out)?;
        Ok(out)
    }

    pub fn mul(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        match (&self.backend, g, h) {
            (Backend::Lattice { rank }, GroupElement::Lattice(a), GroupElement::Lattice(b))
                if a.len() == *rank && b.len() == *rank =>
            {
                let mut out = Coords::with_capacity(*rank);
                for (x, y) in a.iter().zip(b) {
                    out.push(x.checked_add(*y).ok_or(Error::Overflow("lattice addition"))?);
                }
                Ok(GroupElement::Lattice(out))
            }
            (Backend::Cyclic { moduli }, GroupElement::Residues(a), GroupElement::Residues(b))
                if a.len() == moduli.len() && b.len() == moduli.len() =>
            {
                Ok(GroupElement::Residues(
                    a.iter().zip(b).zip(moduli).map(|((x, y), q)| (x + y).rem_euclid(*q)).collect(),
                ))
            }
            (
                Backend::Dihedral,
                GroupElement::Dihedral { sign: s1, shift: b1 },
                GroupElement::Dihedral { sign: s2, shift: b2 },
            ) => {
                // (g.h)(x) = g(h(x)) = s1 (s2 x + b2) + b1
                let moved = if *s1 == 1 { *b2 } else { b2.checked_neg().ok_or(Error::Overflow("dihedral"))? };
                let shift = moved.checked_add(*b1).ok_or(Error::Overflow("dihedral composition"))?;
                Ok(GroupElement::Dihedral { sign: s1 * s2, shift })
            }
            (Backend::IntUnitriangular { size }, GroupElement::IntMatrix(a), GroupElement::IntMatrix(b))
                if a.size() == *size && b.size() == *size =>
            {
                a.mul(b).map(GroupElement::IntMatrix).ok_or(Error::Overflow("integer matrix product"))
            }
            (Backend::Unitriangular { size }, GroupElement::RatMatrix(a), GroupElement::RatMatrix(b))
                if a.size() == *size && b.size() == *size =>
            {
                Ok(GroupElement::rat_matrix(a.mul(b).expect("rational arithmetic is total")))
            }
            (Backend::Cayley(t), GroupElement::Cayley(a), GroupElement::Cayley(b))
                if (*a as usize) < t.order() && (*b as usize) < t.order() =>
            {
                Ok(GroupElement::Cayley(t.mul(*a, *b)))
            }
            _ => {
                self.check(g)?;
                Err(self.mismatch(h))
            }
        }
    }

    pub fn inv(&self, g: &GroupElement) -> Result<GroupElement> {
        self.check(g)?;
        Ok(match g {
            GroupElement::Lattice(a) => GroupElement::Lattice(
                a.iter().map(|x| x.checked_neg().ok_or(Error::Overflow("lattice negation"))).collect::<Result<_>>()?,
            ),
            GroupElement::Residues(a) => {
                let Backend::Cyclic { moduli } = &self.backend else { unreachable!() };
                GroupElement::Residues(a.iter().zip(moduli).map(|(x, q)| (-x).rem_euclid(*q)).collect())
            }
            GroupElement::Dihedral { sign, shift } => {
                // inverse of x -> s x + b is x -> s x - s b
                let shift = if *sign == 1 { shift.checked_neg().ok_or(Error::Overflow("dihedral"))? } else { *shift };
                GroupElement::Dihedral { sign: *sign, shift }
            }
            GroupElement::IntMatrix(m) => {
                GroupElement::IntMatrix(m.inv().ok_or(Error::Overflow("integer matrix inverse"))?)
            }
            GroupElement::RatMatrix(m) => GroupElement::rat_matrix(m.inv().expect("rational arithmetic is total")),
            GroupElement::Cayley(i) => {
                let Backend::Cayley(t) = &self.backend else { unreachable!() };
                GroupElement::Cayley(t.inv(*i))
            }
        })
    }

    /// `[g, h] = g^-1 h^-1 g h`, so that `gh = hg[g,h]`.
    pub fn commutator(&self, g: &GroupElement, h: &GroupElement) -> Result<GroupElement> {
        let gi = self.inv(g)?;
        let hi = self.inv(h)?;
        let x = self.mul(&gi, &hi)?;
        let x = self.mul(&x, g)?;
        self.mul(&x, h)
    }

    pub fn pow(&self, g: &GroupElement, n: i64) -> Result<GroupElement> {
        let base = if n < 0 { self.inv(g)? } else { g.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = self.identity();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &sq)?;
            }
            e >>= 1;
            if e > 0 {
                sq = self.mul(&sq, &sq)?;
            }
        }
        Ok(acc)
    }

    pub fn product<'a>(&self, elems: impl IntoIterator<Item = &'a GroupElement>) -> Result<GroupElement> {
        let mut acc = self.identity();
        for g in elems {
            acc = self.mul(&acc, g)?;
        }
        Ok(acc)
    }

    pub fn is_identity(&self, g: &GroupElement) -> bool {
        *g == self.identity()
    }

    /// Whether the whole ambient group is abelian.
    pub fn is_abelian(&self) -> bool {
        match &self.backend {
            Backend::Lattice { .. } | Backend::Cyclic { .. } => true,
            Backend::Dihedral => false,
            Backend::IntUnitriangular { size } | Backend::Unitriangular { size } => *size <= 2,
            Backend::Cayley(t) => t.is_abelian(),
        }
    }

    pub fn is_matrix(&self) -> bool {
        matches!(self.backend, Backend::IntUnitriangular { .. } | Backend::Unitriangular { .. })
    }

    /// Order of the ambient group when finite.
    pub fn order(&self) -> Option<usize> {
        match &self.backend {
            Backend::Cyclic { moduli } => moduli.iter().try_fold(1usize, |acc, &q| acc.checked_mul(q as usize)),
            Backend::Cayley(t) => Some(t.order()),
            Backend::Lattice { rank: 0 } => Some(1),
            _ => None,
        }
    }

    /// Every element of a finite ambient group, in canonical order.
    pub fn elements(&self) -> Option<Vec<GroupElement>> {
        match &self.backend {
            Backend::Cayley(t) => Some((0..t.order() as u32).map(GroupElement::Cayley).collect()),
            Backend::Cyclic { moduli } => {
                let mut out = vec![Coords::new()];
                for &q in moduli {
                    out = out
                        .into_iter()
                        .flat_map(|v| {
                            (0..q).map(move |x| {
                                let mut w = v.clone();
                                w.push(x);
                                w
                            })
                        })
                        .collect();
                }
                Some(out.into_iter().map(GroupElement::Residues).collect())
            }
            _ => None,
        }
    }

    /// Rational matrix view of a matrix-backend element.
    pub fn as_rational_matrix(&self, g: &GroupElement) -> Result<RatUnitri> {
        match g {
            GroupElement::IntMatrix(m) => Ok(m.to_rational()),
            GroupElement::RatMatrix(m) => Ok((**m).clone()),
            _ => Err(Error::NotUnitriangular(g.encode())),
        }
    }

    /// Matrix-backend element from a rational unitriangular matrix.
    pub fn from_rational_matrix(&self, m: RatUnitri) -> Result<GroupElement> {
        self.canonicalize(GroupElement::rat_matrix(m))
    }

    /// Uniform-ish random element with coordinates bounded by `radius`.
    pub fn sample<R: Rng>(&self, rng: &mut R, radius: i64) -> GroupElement {
        let r = radius.max(0);
        match &self.backend {
            Backend::Lattice { rank } => GroupElement::Lattice((0..*rank).map(|_| rng.random_range(-r..=r)).collect()),
            Backend::Cyclic { moduli } => GroupElement::Residues(moduli.iter().map(|&q| rng.random_range(0..q)).collect()),
            Backend::Dihedral => GroupElement::Dihedral {
                sign: if rng.random_bool(0.5) { 1 } else { -1 },
                shift: rng.random_range(-r..=r),
            },
            Backend::IntUnitriangular { size } => {
                let n = unitri::upper_len(*size);
                GroupElement::IntMatrix(
                    IntUnitri::from_upper(*size, (0..n).map(|_| rng.random_range(-r..=r)).collect()).expect("size"),
                )
            }
            Backend::Unitriangular { size } => {
                let n = unitri::upper_len(*size);
                let entries: Vec<BigRational> =
                    (0..n).map(|_| rat(rng.random_range(-r..=r), rng.random_range(1..=3))).collect();
                GroupElement::rat_matrix(RatUnitri::from_upper(*size, entries).expect("size"))
            }
            Backend::Cayley(t) => GroupElement::Cayley(rng.random_range(0..t.order() as u32)),
        }
    }
}

/// JSON description of a group, as used by configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    Lattice { rank: usize },
    Cyclic { moduli: Vec<i64> },
    Dihedral,
    Heisenberg,
    IntUnitriangular { size: usize },
    Unitriangular { size: usize },
    CyclicTable { n: usize },
    DihedralTable { n: usize },
    Cayley { name: String, table: Vec<Vec<u32>> },
}

impl GroupSpec {
    pub fn build(&self) -> Result<GroupOracle> {
        match self {
            GroupSpec::Lattice { rank } => Ok(GroupOracle::lattice(*rank)),
            GroupSpec::Cyclic { moduli } => GroupOracle::cyclic(moduli),
            GroupSpec::Dihedral => Ok(GroupOracle::dihedral()),
            GroupSpec::Heisenberg => Ok(GroupOracle::heisenberg()),
            GroupSpec::IntUnitriangular { size } => GroupOracle::int_unitriangular(*size),
            GroupSpec::Unitriangular { size } => GroupOracle::unitriangular(*size),
            GroupSpec::CyclicTable { n } => Ok(GroupOracle::cayley(CayleyTable::cyclic(*n)?)),
            GroupSpec::DihedralTable { n } => Ok(GroupOracle::cayley(CayleyTable::dihedral(*n)?)),
            GroupSpec::Cayley { name, table } => Ok(GroupOracle::cayley(CayleyTable::from_rows(name.clone(), table.clone())?)),
        }
    }
}
