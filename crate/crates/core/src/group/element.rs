use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use super::unitri::{size_from_len, IntUnitri, RatUnitri};
use crate::error::{Error, Result};
use crate::rational::{format_rational, RatInput};

pub type Coords = SmallVec<[i64; 4]>;

/// A group element in the canonical encoding of its backend.
///
/// Two elements of the same backend are equal iff their encodings are
/// identical: lattice vectors and residues (reduced into `[0, q)`) are
/// stored verbatim, dihedral maps `x -> sign*x + shift` as their pair,
/// unitriangular matrices by their strictly-upper entries, and Cayley
/// elements by table index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    Lattice(Coords),
    Residues(Coords),
    Dihedral { sign: i8, shift: i64 },
    IntMatrix(IntUnitri),
    RatMatrix(Box<RatUnitri>),
    Cayley(u32),
}

impl GroupElement {
    pub fn lattice(v: &[i64]) -> Self {
        GroupElement::Lattice(v.iter().copied().collect())
    }

    pub fn residues(v: &[i64]) -> Self {
        GroupElement::Residues(v.iter().copied().collect())
    }

    pub fn dihedral(sign: i8, shift: i64) -> Self {
        assert!(sign == 1 || sign == -1, "dihedral sign must be +-1");
        GroupElement::Dihedral { sign, shift }
    }

    /// Heisenberg element `[[1,a,b],[0,1,c],[0,0,1]]`.
    pub fn heisenberg(a: i64, b: i64, c: i64) -> Self {
        GroupElement::IntMatrix(IntUnitri::from_upper(3, vec![a, b, c]).expect("size 3"))
    }

    pub fn int_matrix(k: usize, upper: Vec<i64>) -> Result<Self> {
        Ok(GroupElement::IntMatrix(IntUnitri::from_upper(k, upper)?))
    }

    pub fn rat_matrix(m: RatUnitri) -> Self {
        GroupElement::RatMatrix(Box::new(m))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("element serializes")
    }

    /// Compact single-line JSON, used inside CSV cells.
    pub fn encode(&self) -> String {
        serde_json::to_string(self).expect("element serializes")
    }

    pub fn decode(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("element {s:?}: {e}")))
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum Repr {
    Lattice(Vec<i64>),
    Residues(Vec<i64>),
    Dihedral([i64; 2]),
    IntMatrix(Vec<i64>),
    Matrix(Vec<String>),
    Cayley(u32),
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum ReprIn {
    Lattice(Vec<i64>),
    Residues(Vec<i64>),
    Dihedral([i64; 2]),
    IntMatrix(Vec<i64>),
    Matrix(Vec<RatInput>),
    Cayley(u32),
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self {
            GroupElement::Lattice(v) => Repr::Lattice(v.to_vec()),
            GroupElement::Residues(v) => Repr::Residues(v.to_vec()),
            GroupElement::Dihedral { sign, shift } => Repr::Dihedral([*sign as i64, *shift]),
            GroupElement::IntMatrix(m) => Repr::IntMatrix(m.upper().to_vec()),
            GroupElement::RatMatrix(m) => Repr::Matrix(m.upper().iter().map(format_rational).collect()),
            GroupElement::Cayley(i) => Repr::Cayley(*i),
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = ReprIn::deserialize(d)?;
        Ok(match repr {
            ReprIn::Lattice(v) => GroupElement::lattice(&v),
            ReprIn::Residues(v) => GroupElement::residues(&v),
            ReprIn::Dihedral([sign, shift]) => {
                if sign != 1 && sign != -1 {
                    return Err(D::Error::custom("dihedral sign must be 1 or -1"));
                }
                GroupElement::Dihedral { sign: sign as i8, shift }
            }
            ReprIn::IntMatrix(v) => {
                let k = size_from_len(v.len()).ok_or_else(|| D::Error::custom("bad upper-entry count"))?;
                GroupElement::IntMatrix(IntUnitri::from_upper(k, v).map_err(D::Error::custom)?)
            }
            ReprIn::Matrix(v) => {
                let k = size_from_len(v.len()).ok_or_else(|| D::Error::custom("bad upper-entry count"))?;
                let entries: Vec<BigRational> = v
                    .into_iter()
                    .map(|x| x.into_rational())
                    .collect::<Result<_>>()
                    .map_err(D::Error::custom)?;
                GroupElement::rat_matrix(RatUnitri::from_upper(k, entries).map_err(D::Error::custom)?)
            }
            ReprIn::Cayley(i) => GroupElement::Cayley(i),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn encodings_are_backend_tagged() {
        assert_eq!(GroupElement::lattice(&[2, -3]).encode(), r#"{"lattice":[2,-3]}"#);
        assert_eq!(GroupElement::dihedral(-1, 4).encode(), r#"{"dihedral":[-1,4]}"#);
        assert_eq!(GroupElement::heisenberg(1, 2, 3).encode(), r#"{"int_matrix":[1,2,3]}"#);
        let m = RatUnitri::from_upper(3, vec![rat(1, 1), rat(1, 2), rat(0, 1)]).unwrap();
        let g = GroupElement::rat_matrix(m);
        assert_eq!(g.encode(), r#"{"matrix":["1","1/2","0"]}"#);
        for e in [g, GroupElement::Cayley(7), GroupElement::residues(&[0, 5])] {
            assert_eq!(GroupElement::decode(&e.encode()).unwrap(), e);
        }
    }

    #[test]
    fn decode_rejects_garbage() {
        assert!(GroupElement::decode(r#"{"dihedral":[2,0]}"#).is_err());
        assert!(GroupElement::decode(r#"{"int_matrix":[1,2]}"#).is_err());
        assert!(GroupElement::decode(r#"{"quaternion":1}"#).is_err());
    }
}
