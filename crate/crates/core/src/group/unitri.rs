//! Unitriangular matrices stored by their strictly-upper entries.
//!
//! Entry `(i, j)` with `i < j` lives at row-major offset
//! `i*k - i*(i+1)/2 + (j - i - 1)`; the unit diagonal is implicit.

use num_rational::BigRational;
use num_traits::{One, Zero};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Scalars usable as unitriangular entries. Integer arithmetic is checked.
pub trait Scalar: Clone + PartialEq {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn neg(&self) -> Option<Self>;
}

impl Scalar for i64 {
    fn zero() -> Self {
        0
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn add(&self, o: &Self) -> Option<Self> {
        self.checked_add(*o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn neg(&self) -> Option<Self> {
        self.checked_neg()
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn neg(&self) -> Option<Self> {
        Some(-self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Unitri<T> {
    size: u8,
    upper: SmallVec<[T; 6]>,
}

pub type IntUnitri = Unitri<i64>;
pub type RatUnitri = Unitri<BigRational>;

#[inline]
fn offset(k: usize, i: usize, j: usize) -> usize {
    i * k - i * (i + 1) / 2 + (j - i - 1)
}

pub fn upper_len(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// Size `k` with `k(k-1)/2 == len`, if one exists.
pub fn size_from_len(len: usize) -> Option<usize> {
    (1..=64).find(|&k| upper_len(k) == len)
}

impl<T: Scalar> Unitri<T> {
    pub fn identity(k: usize) -> Self {
        assert!((1..=64).contains(&k), "matrix size out of range");
        Unitri {
            size: k as u8,
            upper: (0..upper_len(k)).map(|_| T::zero()).collect(),
        }
    }

    pub fn from_upper(k: usize, upper: Vec<T>) -> Result<Self> {
        if !(1..=64).contains(&k) || upper.len() != upper_len(k) {
            return Err(Error::invalid(format!(
                "unitriangular size {k} needs {} upper entries, got {}",
                upper_len(k),
                upper.len()
            )));
        }
        Ok(Unitri {
            size: k as u8,
            upper: upper.into_iter().collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.size as usize
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    /// Entry `(i, j)` for `i < j`.
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.upper[offset(self.size(), i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let k = self.size();
        self.upper[offset(k, i, j)] = v;
    }

    pub fn is_identity(&self) -> bool {
        self.upper.iter().all(|x| x.is_zero())
    }

    pub fn mul(&self, other: &Self) -> Option<Self> {
        let k = self.size();
        debug_assert_eq!(k, other.size());
        let mut out = Self::identity(k);
        for i in 0..k {
            for j in (i + 1)..k {
                let mut acc = self.get(i, j).add(other.get(i, j))?;
                for l in (i + 1)..j {
                    let a = self.get(i, l);
                    let b = other.get(l, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.mul(b)?)?;
                    }
                }
                out.set(i, j, acc);
            }
        }
        Some(out)
    }

    /// Inverse by back-substitution: `x_ij = -a_ij - sum_{i<l<j} a_il x_lj`.
    pub fn inv(&self) -> Option<Self> {
        let k = self.size();
        let mut out = Self::identity(k);
        for j in 0..k {
            for i in (0..j).rev() {
                let mut acc = self.get(i, j).clone();
                for l in (i + 1)..j {
                    let a = self.get(i, l);
                    let x = out.get(l, j);
                    if !a.is_zero() && !x.is_zero() {
                        acc = acc.add(&a.mul(x)?)?;
                    }
                }
                out.set(i, j, acc.neg()?);
            }
        }
        Some(out)
    }
}

impl IntUnitri {
    pub fn to_rational(&self) -> RatUnitri {
        Unitri {
            size: self.size,
            upper: self.upper.iter().map(|&x| BigRational::from_integer(x.into())).collect(),
        }
    }
}

impl RatUnitri {
    /// Integer form when every entry is integral.
    pub fn to_integer(&self) -> Option<IntUnitri> {
        let mut upper = SmallVec::new();
        for x in &self.upper {
            if !x.denom().is_one() {
                return None;
            }
            upper.push(i64::try_from(x.numer()).ok()?);
        }
        Some(Unitri { size: self.size, upper })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h(a: i64, b: i64, c: i64) -> IntUnitri {
        IntUnitri::from_upper(3, vec![a, b, c]).unwrap()
    }

    #[test]
    fn heisenberg_coordinates() {
        // (a,b,c)(a',b',c') = (a+a', b+b'+ac', c+c')
        assert_eq!(h(1, 0, 0).mul(&h(0, 0, 1)).unwrap(), h(1, 1, 1));
        assert_eq!(h(2, 5, -1).mul(&h(3, 1, 4)).unwrap(), h(5, 14, 3));
        let g = h(2, 5, -1);
        assert!(g.mul(&g.inv().unwrap()).unwrap().is_identity());
    }

    #[test]
    fn overflow_is_reported() {
        let g = h(i64::MAX, 0, 0);
        assert!(g.mul(&h(1, 0, 0)).is_none());
    }

    #[test]
    fn offsets_cover_upper_triangle() {
        let k = 5;
        let mut seen = vec![false; upper_len(k)];
        for i in 0..k {
            for j in (i + 1)..k {
                seen[offset(k, i, j)] = true;
            }
        }
        assert!(seen.into_iter().all(|x| x));
        assert_eq!(size_from_len(6), Some(4));
        assert_eq!(size_from_len(5), None);
    }
}
