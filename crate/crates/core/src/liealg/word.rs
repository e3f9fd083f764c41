//! Formal commutator words over generator indices.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::One;

use super::{exp_unitri, log_unitri, NilMatrix};
use crate::error::{Error, Result};

/// A bracket expression in generators `1..r` and their inverses.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CommutatorWord {
    /// Generator index, 1-based.
    Leaf { gen: usize, inv: bool },
    Bracket { left: Box<CommutatorWord>, right: Box<CommutatorWord>, inv: bool },
}

impl CommutatorWord {
    pub fn leaf(gen: usize) -> Self {
        CommutatorWord::Leaf { gen, inv: false }
    }

    pub fn bracket(left: CommutatorWord, right: CommutatorWord) -> Self {
        CommutatorWord::Bracket { left: Box::new(left), right: Box::new(right), inv: false }
    }

    pub fn inverse(&self) -> Self {
        match self {
            CommutatorWord::Leaf { gen, inv } => CommutatorWord::Leaf { gen: *gen, inv: !inv },
            CommutatorWord::Bracket { left, right, inv } => {
                CommutatorWord::Bracket { left: left.clone(), right: right.clone(), inv: !inv }
            }
        }
    }

    pub fn is_inverted(&self) -> bool {
        match self {
            CommutatorWord::Leaf { inv, .. } | CommutatorWord::Bracket { inv, .. } => *inv,
        }
    }

    /// Number of leaves `|w|`.
    pub fn len(&self) -> usize {
        match self {
            CommutatorWord::Leaf { .. } => 1,
            CommutatorWord::Bracket { left, right, .. } => left.len() + right.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Generator indices of the leaves, left to right.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            CommutatorWord::Leaf { gen, .. } => out.push(*gen),
            CommutatorWord::Bracket { left, right, .. } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
        }
    }

    pub fn max_generator(&self) -> usize {
        self.leaves().into_iter().max().unwrap_or(0)
    }
}

impl fmt::Display for CommutatorWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inv = match self {
            CommutatorWord::Leaf { gen, inv } => {
                write!(f, "{gen}")?;
                *inv
            }
            CommutatorWord::Bracket { left, right, inv } => {
                write!(f, "[{left},{right}]")?;
                *inv
            }
        };
        if inv {
            f.write_str("^-1")?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Parse(format!("commutator word at byte {}: {msg}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.s.get(self.pos) == Some(&c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn word(&mut self) -> Result<CommutatorWord> {
        self.skip_ws();
        let mut w = if self.eat(b'[') {
            let left = self.word()?;
            if !self.eat(b',') {
                return Err(self.err("expected ','"));
            }
            let right = self.word()?;
            if !self.eat(b']') {
                return Err(self.err("expected ']'"));
            }
            CommutatorWord::bracket(left, right)
        } else {
            let start = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.err("expected generator index or '['"));
            }
            let gen: usize = std::str::from_utf8(&self.s[start..self.pos])
                .expect("ascii digits")
                .parse()
                .map_err(|_| self.err("index too large"))?;
            if gen == 0 {
                return Err(self.err("generator indices start at 1"));
            }
            CommutatorWord::leaf(gen)
        };
        while self.eat(b'^') {
            if !(self.eat(b'-') && self.eat(b'1')) {
                return Err(self.err("only ^-1 is allowed"));
            }
            w = w.inverse();
        }
        Ok(w)
    }
}

impl FromStr for CommutatorWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { s: s.as_bytes(), pos: 0 };
        let w = p.word()?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(w)
    }
}

/// `X_w`: leaves map to `+-X_i`, brackets to `log [exp X_u, exp X_v]`, and
/// inversion negates.
pub fn eval_word(w: &CommutatorWord, gens: &[NilMatrix]) -> Result<NilMatrix> {
    let x = match w {
        CommutatorWord::Leaf { gen, .. } => gens
            .get(gen.wrapping_sub(1))
            .cloned()
            .ok_or_else(|| Error::invalid(format!("generator {gen} out of range 1..={}", gens.len())))?,
        CommutatorWord::Bracket { left, right, .. } => {
            let a = exp_unitri(&eval_word(left, gens)?);
            let b = exp_unitri(&eval_word(right, gens)?);
            let ai = a.inv().expect("rational inverse");
            let bi = b.inv().expect("rational inverse");
            let c = ai.mul(&bi).and_then(|x| x.mul(&a)).and_then(|x| x.mul(&b)).expect("rational product");
            log_unitri(&c)
        }
    };
    Ok(if w.is_inverted() { x.neg() } else { x })
}

/// `N^w`: the product of `N_i` over the leaves.
pub fn weight(w: &CommutatorWord, lengths: &[BigRational]) -> Result<BigRational> {
    w.leaves().into_iter().try_fold(BigRational::one(), |acc, i| {
        lengths
            .get(i.wrapping_sub(1))
            .map(|n| acc * n)
            .ok_or_else(|| Error::invalid(format!("generator {i} out of range 1..={}", lengths.len())))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use proptest::prelude::*;

    fn heis() -> Vec<NilMatrix> {
        vec![NilMatrix::elementary(3, 1, 2), NilMatrix::elementary(3, 2, 3)]
    }

    #[test]
    fn parse_and_print() {
        let s = "[[1,2^-1],[1^-1,3]]^-1";
        let w: CommutatorWord = s.parse().unwrap();
        assert_eq!(w.to_string(), s);
        assert_eq!(w.len(), 4);
        assert_eq!(w.leaves(), vec![1, 2, 1, 3]);
        assert!("[1,2".parse::<CommutatorWord>().is_err());
        assert!("0".parse::<CommutatorWord>().is_err());
        assert!("1^2".parse::<CommutatorWord>().is_err());
    }

    #[test]
    fn weights() {
        let w: CommutatorWord = "[[1,2^-1],[1^-1,3]]^-1".parse().unwrap();
        let n = [int(2), int(3), int(5)];
        assert_eq!(weight(&w, &n).unwrap(), int(2 * 2 * 3 * 5));
        assert_eq!(weight(&CommutatorWord::leaf(2), &n).unwrap(), int(3));
        assert!(weight(&CommutatorWord::leaf(4), &n).is_err());
    }

    #[test]
    fn heisenberg_words() {
        let g = heis();
        let w: CommutatorWord = "[1,2]".parse().unwrap();
        assert_eq!(eval_word(&w, &g).unwrap(), NilMatrix::elementary(3, 1, 3));
        assert_eq!(eval_word(&"2^-1".parse().unwrap(), &g).unwrap(), g[1].neg());
        assert!(eval_word(&"[[1,2],1]".parse().unwrap(), &g).unwrap().is_zero());
        assert_eq!(eval_word(&"[1,2]^-1".parse().unwrap(), &g).unwrap(), NilMatrix::elementary(3, 1, 3).neg());
    }

    fn arb_word() -> impl Strategy<Value = CommutatorWord> {
        let leaf = (1usize..=3, any::<bool>()).prop_map(|(gen, inv)| CommutatorWord::Leaf { gen, inv });
        leaf.prop_recursive(3, 8, 2, |inner| {
            (inner.clone(), inner, any::<bool>()).prop_map(|(l, r, inv)| CommutatorWord::Bracket {
                left: Box::new(l),
                right: Box::new(r),
                inv,
            })
        })
    }

    proptest! {
        #[test]
        fn weight_is_homogeneous_and_sign_blind(w in arb_word(), a in 1i64..20, b in 1i64..20, c in 1i64..20) {
            let n = [int(a), int(b), int(c)];
            let n2: Vec<_> = n.iter().map(|x| x * int(2)).collect();
            let base = weight(&w, &n).unwrap();
            prop_assert_eq!(weight(&w, &n2).unwrap(), &base * int(1 << w.len()));
            prop_assert_eq!(weight(&w.inverse(), &n).unwrap(), base);
        }

        #[test]
        fn text_roundtrip(w in arb_word()) {
            prop_assert_eq!(w.to_string().parse::<CommutatorWord>().unwrap(), w);
        }

        #[test]
        fn inverse_negates(w in arb_word()) {
            let g = vec![NilMatrix::elementary(4, 1, 2), NilMatrix::elementary(4, 2, 3), NilMatrix::elementary(4, 3, 4)];
            prop_assert_eq!(eval_word(&w.inverse(), &g).unwrap(), eval_word(&w, &g).unwrap().neg());
        }
    }
}
