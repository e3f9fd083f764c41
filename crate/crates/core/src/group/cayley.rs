//! Finite groups given by explicit multiplication tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest order accepted for a Cayley table.
pub const MAX_CAYLEY_ORDER: usize = 512;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CayleyTable {
    order: u32,
    identity: u32,
    table: Vec<u32>,
    inverse: Vec<u32>,
    name: String,
}

impl CayleyTable {
    /// Validates closure, identity, inverses and associativity.
    pub fn from_rows(name: impl Into<String>, rows: Vec<Vec<u32>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || n > MAX_CAYLEY_ORDER {
            return Err(Error::invalid(format!("Cayley table order {n} outside 1..={MAX_CAYLEY_ORDER}")));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("Cayley table is not square"));
        }
        if rows.iter().flatten().any(|&x| x as usize >= n) {
            return Err(Error::invalid("Cayley table entry out of range"));
        }
        let table: Vec<u32> = rows.into_iter().flatten().collect();
        let t = |a: usize, b: usize| table[a * n + b] as usize;
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| t(e, x) == x && t(x, e) == x))
            .ok_or_else(|| Error::invalid("Cayley table has no identity"))?;
        let mut inverse = Vec::with_capacity(n);
        for a in 0..n {
            let b = (0..n)
                .find(|&b| t(a, b) == identity && t(b, a) == identity)
                .ok_or_else(|| Error::invalid(format!("element {a} has no inverse")))?;
            inverse.push(b as u32);
        }
        for a in 0..n {
            for b in 0..n {
                let ab = t(a, b);
                for c in 0..n {
                    if t(ab, c) != t(a, t(b, c)) {
                        return Err(Error::invalid(format!("associativity fails at ({a},{b},{c})")));
                    }
                }
            }
        }
        Ok(CayleyTable {
            order: n as u32,
            identity: identity as u32,
            table,
            inverse,
            name: name.into(),
        })
    }

    fn from_law(name: String, n: usize, law: impl Fn(usize, usize) -> usize, inv: impl Fn(usize) -> usize, identity: usize) -> Result<Self> {
        if n == 0 || n > MAX_CAYLEY_ORDER {
            return Err(Error::invalid(format!("Cayley table order {n} outside 1..={MAX_CAYLEY_ORDER}")));
        }
        let mut table = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                table.push(law(a, b) as u32);
            }
        }
        Ok(CayleyTable {
            order: n as u32,
            identity: identity as u32,
            table,
            inverse: (0..n).map(|a| inv(a) as u32).collect(),
            name,
        })
    }

    /// Cyclic group of order `n`; element `k` is the residue `k`.
    pub fn cyclic(n: usize) -> Result<Self> {
        Self::from_law(format!("Z/{n}"), n, |a, b| (a + b) % n.max(1), |a| (n - a) % n.max(1), 0)
    }

    /// Dihedral group of order `2n` acting on `Z/n`: index `s*n + k` is the
    /// map `x -> (-1)^s x + k`, and products are compositions.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("dihedral table needs n >= 1"));
        }
        let decode = move |x: usize| (x / n, x % n);
        let law = move |a: usize, b: usize| {
            let (sa, ka) = decode(a);
            let (sb, kb) = decode(b);
            let moved = if sa == 1 { (n - kb) % n } else { kb };
            ((sa ^ sb) * n) + (moved + ka) % n
        };
        let inv = move |a: usize| {
            let (s, k) = decode(a);
            if s == 1 {
                a
            } else {
                (n - k) % n
            }
        };
        Self::from_law(format!("D{}", 2 * n), 2 * n, law, inv, 0)
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn identity(&self) -> u32 {
        self.identity
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.table[a as usize * self.order as usize + b as usize]
    }

    #[inline]
    pub fn inv(&self, a: u32) -> u32 {
        self.inverse[a as usize]
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..a).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.table.chunks(self.order as usize).map(|r| r.to_vec()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dihedral_table_is_a_group() {
        let d = CayleyTable::dihedral(8).unwrap();
        let checked = CayleyTable::from_rows("check", d.rows()).unwrap();
        assert_eq!(checked.identity(), 0);
        assert_eq!(checked.order(), 16);
        assert!(!d.is_abelian());
        // reflections are involutions
        for k in 0..8 {
            assert_eq!(d.inv(8 + k), 8 + k);
        }
        // rotation r^2 has order 4
        let r2 = 2;
        let mut x = 0;
        for _ in 0..4 {
            x = d.mul(x, r2);
        }
        assert_eq!(x, 0);
    }

    #[test]
    fn rejects_non_groups() {
        assert!(CayleyTable::from_rows("bad", vec![vec![0, 1], vec![1, 1]]).is_err());
        assert!(CayleyTable::from_rows("bad", vec![vec![0, 1]]).is_err());
        assert!(CayleyTable::cyclic(513).is_err());
    }
}
