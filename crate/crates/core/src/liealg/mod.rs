//! Nilpotent Lie machinery over unitriangular rational matrices.

pub mod linalg;
mod table;
mod word;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::unitri::{upper_len, RatUnitri};
use crate::group::{GroupElement, GroupOracle};
use crate::rational::rat_vec;

pub use table::{alpha_coeffs, enumerate_words, AlphaMatrix, WordTable};
pub use word::{eval_word, weight, CommutatorWord};

/// Strictly upper triangular `k x k` rational matrix, stored row-major
/// like [`RatUnitri`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NilMatrix {
    k: usize,
    #[serde(with = "rat_vec")]
    upper: Vec<BigRational>,
}

fn offset(k: usize, i: usize, j: usize) -> usize {
    i * k - i * (i + 1) / 2 + (j - i - 1)
}

impl NilMatrix {
    pub fn zero(k: usize) -> Self {
        NilMatrix { k, upper: vec![BigRational::zero(); upper_len(k)] }
    }

    pub fn from_upper(k: usize, upper: Vec<BigRational>) -> Result<Self> {
        if upper.len() != upper_len(k) {
            return Err(Error::invalid(format!("{} entries do not fit a strictly upper {k}x{k} matrix", upper.len())));
        }
        Ok(NilMatrix { k, upper })
    }

    /// Elementary matrix `E_{ij}` with 1-based indices, `i < j`.
    pub fn elementary(k: usize, i: usize, j: usize) -> Self {
        assert!(1 <= i && i < j && j <= k, "E_{i}{j} is not strictly upper in size {k}");
        let mut m = Self::zero(k);
        m.upper[offset(k, i - 1, j - 1)] = BigRational::one();
        m
    }

    pub fn size(&self) -> usize {
        self.k
    }

    pub fn upper(&self) -> &[BigRational] {
        &self.upper
    }

    /// Entry at 0-based `(i, j)`; zero on and below the diagonal.
    pub fn get(&self, i: usize, j: usize) -> BigRational {
        if j > i {
            self.upper[offset(self.k, i, j)].clone()
        } else {
            BigRational::zero()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.upper.iter().all(Zero::is_zero)
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.k, other.k, "matrix sizes differ");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        NilMatrix { k: self.k, upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check(other);
        NilMatrix { k: self.k, upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a - b).collect() }
    }

    pub fn neg(&self) -> Self {
        NilMatrix { k: self.k, upper: self.upper.iter().map(|a| -a).collect() }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        NilMatrix { k: self.k, upper: self.upper.iter().map(|a| a * c).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        let k = self.k;
        let mut out = Self::zero(k);
        for i in 0..k {
            for j in i + 2..k {
                let mut s = BigRational::zero();
                for l in i + 1..j {
                    let a = &self.upper[offset(k, i, l)];
                    if a.is_zero() {
                        continue;
                    }
                    s += a * &other.upper[offset(k, l, j)];
                }
                out.upper[offset(k, i, j)] = s;
            }
        }
        out
    }

    /// Matrix commutator `XY - YX`.
    pub fn bracket(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// `I + X`.
    pub fn to_unitri(&self) -> RatUnitri {
        RatUnitri::from_upper(self.k, self.upper.clone()).expect("same layout")
    }

    /// `g - I`.
    pub fn from_unitri(g: &RatUnitri) -> Self {
        NilMatrix { k: g.size(), upper: g.upper().to_vec() }
    }
}

impl fmt::Display for NilMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in 0..self.k {
            for j in i + 1..self.k {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                if !first {
                    f.write_str(" + ")?;
                }
                first = false;
                if a.is_one() {
                    write!(f, "E{}{}", i + 1, j + 1)?;
                } else {
                    write!(f, "({a})E{}{}", i + 1, j + 1)?;
                }
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

fn factorial(j: usize) -> BigRational {
    BigRational::from_integer((1..=j).map(BigInt::from).product())
}

/// `exp X = sum_{j<k} X^j / j!` as a unitriangular matrix.
pub fn exp_unitri(x: &NilMatrix) -> RatUnitri {
    let mut sum = x.clone();
    let mut power = x.clone();
    for j in 2..x.k.max(2) {
        power = power.mul(x);
        if power.is_zero() {
            break;
        }
        sum = sum.add(&power.scale(&factorial(j).recip()));
    }
    sum.to_unitri()
}

/// `log g = sum_{j>=1} (-1)^{j+1} (g - I)^j / j`.
pub fn log_unitri(g: &RatUnitri) -> NilMatrix {
    let y = NilMatrix::from_unitri(g);
    let mut sum = y.clone();
    let mut power = y.clone();
    for j in 2..g.size().max(2) {
        power = power.mul(&y);
        if power.is_zero() {
            break;
        }
        let c = BigRational::new(if j % 2 == 0 { -1 } else { 1 }.into(), (j as i64).into());
        sum = sum.add(&power.scale(&c));
    }
    sum
}

/// `exp X` as an element of `UT(k, Q)`.
pub fn mat_exp(x: &NilMatrix) -> GroupElement {
    GroupElement::rat_matrix(exp_unitri(x))
}

/// `log g` for an element of a matrix backend.
pub fn mat_log(g: &GroupElement) -> Result<NilMatrix> {
    match g {
        GroupElement::IntMatrix(m) => Ok(log_unitri(&m.to_rational())),
        GroupElement::RatMatrix(m) => Ok(log_unitri(m)),
        other => Err(Error::NotUnitriangular(other.encode())),
    }
}

/// `log` of each generator, checking they share one matrix size.
pub fn logs_of(oracle: &GroupOracle, gens: &[GroupElement]) -> Result<Vec<NilMatrix>> {
    if !oracle.is_matrix() {
        return Err(Error::NotUnitriangular(oracle.name()));
    }
    gens.iter()
        .map(|g| {
            oracle.check(g)?;
            mat_log(g)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use proptest::prelude::*;

    fn e(i: usize, j: usize) -> NilMatrix {
        NilMatrix::elementary(3, i, j)
    }

    #[test]
    fn worked_exponentials() {
        assert!(exp_unitri(&NilMatrix::zero(3)).is_identity());
        assert_eq!(NilMatrix::from_unitri(&exp_unitri(&e(1, 2))), e(1, 2));
        let x = e(1, 2).add(&e(2, 3));
        let expected = x.add(&e(1, 3).scale(&rat(1, 2)));
        assert_eq!(NilMatrix::from_unitri(&exp_unitri(&x)), expected);
    }

    #[test]
    fn worked_logarithms() {
        assert!(log_unitri(&RatUnitri::identity(3)).is_zero());
        let g = e(1, 2).add(&e(2, 3)).add(&e(1, 3)).to_unitri();
        assert_eq!(log_unitri(&g), e(1, 2).add(&e(2, 3)).add(&e(1, 3).scale(&rat(1, 2))));
    }

    #[test]
    fn matrix_bracket_satisfies_jacobi() {
        let a = NilMatrix::from_upper(4, (1..=6).map(|i| rat(i, 2)).collect()).unwrap();
        let b = NilMatrix::from_upper(4, (1..=6).map(|i| rat(7 - i, 3)).collect()).unwrap();
        let c = NilMatrix::from_upper(4, vec![rat(1, 1), rat(-2, 1), rat(0, 1), rat(5, 7), rat(1, 1), rat(3, 1)]).unwrap();
        let j = a.bracket(&b.bracket(&c)).add(&b.bracket(&c.bracket(&a))).add(&c.bracket(&a.bracket(&b)));
        assert!(j.is_zero());
    }

    fn nil_matrix(k: usize) -> impl Strategy<Value = NilMatrix> {
        prop::collection::vec((-1_000_000i64..=1_000_000, 1i64..=1_000_000), upper_len(k))
            .prop_map(move |v| NilMatrix::from_upper(k, v.into_iter().map(|(p, q)| rat(p, q)).collect()).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(250))]
        #[test]
        fn exp_log_roundtrip(x in (2usize..=5).prop_flat_map(nil_matrix)) {
            let g = exp_unitri(&x);
            prop_assert_eq!(log_unitri(&g), x.clone());
            prop_assert_eq!(exp_unitri(&log_unitri(&g)), g);
        }

        #[test]
        fn jacobi_on_random_triples(
            (a, b, c) in (3usize..=5).prop_flat_map(|k| (nil_matrix(k), nil_matrix(k), nil_matrix(k)))
        ) {
            let j = a.bracket(&b.bracket(&c)).add(&b.bracket(&c.bracket(&a))).add(&c.bracket(&a.bracket(&b)));
            prop_assert!(j.is_zero());
        }
    }
}
