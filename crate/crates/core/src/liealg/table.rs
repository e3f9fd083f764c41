//! Enumeration of nonvanishing commutator words and their coefficients.

use std::cmp::Ordering;

use num_rational::BigRational;
use rustc_hash::FxHashSet;
use serde::Serialize;

use super::linalg::{kernel_vector, solve, Vector};
use super::{eval_word, weight, CommutatorWord, NilMatrix};
use crate::error::{Error, Result};
use crate::rational::format_rational;

/// Words `w_1..w_k` in non-decreasing length, generators first, with their
/// `X_w`, weights `N^w` and lengths `|w|`.
#[derive(Clone, Debug)]
pub struct WordTable {
    pub rank: usize,
    pub words: Vec<CommutatorWord>,
    pub x: Vec<NilMatrix>,
    pub weights: Vec<BigRational>,
    pub lengths: Vec<usize>,
}

#[derive(Serialize)]
struct WordRow {
    word: String,
    length: usize,
    weight: String,
    x: Vec<String>,
}

impl WordTable {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn position(&self, word: &str) -> Option<usize> {
        self.words.iter().position(|w| w.to_string() == word)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<WordRow> = (0..self.len())
            .map(|i| WordRow {
                word: self.words[i].to_string(),
                length: self.lengths[i],
                weight: format_rational(&self.weights[i]),
                x: self.x[i].upper().iter().map(format_rational).collect(),
            })
            .collect();
        serde_json::json!({ "rank": self.rank, "words": rows })
    }
}

/// Orientation of `[a, b]` versus `[b, a]`: smaller leaf sequence first,
/// ties broken by text.
fn oriented(a: &CommutatorWord, b: &CommutatorWord) -> CommutatorWord {
    let ab: Vec<usize> = a.leaves().into_iter().chain(b.leaves()).collect();
    let ba: Vec<usize> = b.leaves().into_iter().chain(a.leaves()).collect();
    let keep = match ab.cmp(&ba) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.to_string() <= b.to_string(),
    };
    if keep {
        CommutatorWord::bracket(a.clone(), b.clone())
    } else {
        CommutatorWord::bracket(b.clone(), a.clone())
    }
}

/// Every positive canonical word with `X_w != 0`, built level by level from
/// shorter nonvanishing words.
pub fn enumerate_words(gens: &[NilMatrix], lengths: &[BigRational]) -> Result<WordTable> {
    if gens.len() != lengths.len() {
        return Err(Error::invalid("one length per generator is required"));
    }
    let Some(k) = gens.first().map(NilMatrix::size) else {
        return Ok(WordTable { rank: 0, words: vec![], x: vec![], weights: vec![], lengths: vec![] });
    };
    if gens.iter().any(|g| g.size() != k) {
        return Err(Error::invalid("generators have different matrix sizes"));
    }
    let mut words: Vec<CommutatorWord> = (1..=gens.len()).map(CommutatorWord::leaf).collect();
    let mut x: Vec<NilMatrix> = gens.to_vec();
    let mut by_len: Vec<Vec<usize>> = vec![vec![], (0..gens.len()).collect()];
    // Brackets of total length >= k vanish in UT(k).
    for len in 2..k.max(2) {
        let mut seen: FxHashSet<String> = FxHashSet::default();
        let mut level = Vec::new();
        for a_len in 1..=len / 2 {
            let b_len = len - a_len;
            for &ia in &by_len[a_len] {
                for &ib in &by_len[b_len] {
                    if ia == ib || (a_len == b_len && ib < ia) {
                        continue;
                    }
                    let w = oriented(&words[ia], &words[ib]);
                    if !seen.insert(w.to_string()) {
                        continue;
                    }
                    let xw = eval_word(&w, gens)?;
                    if !xw.is_zero() {
                        level.push((w, xw));
                    }
                }
            }
        }
        if level.is_empty() {
            break;
        }
        let mut ids = Vec::with_capacity(level.len());
        for (w, xw) in level {
            ids.push(words.len());
            words.push(w);
            x.push(xw);
        }
        by_len.push(ids);
    }
    let weights = words.iter().map(|w| weight(w, lengths)).collect::<Result<_>>()?;
    let lens = words.iter().map(CommutatorWord::len).collect();
    Ok(WordTable { rank: gens.len(), words, x, weights, lengths: lens })
}

/// `alpha[i][j]` with `X_{w_i} = sum_j alpha[i][j] X_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaMatrix {
    pub rows: Vec<Vector>,
}

impl AlphaMatrix {
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(format_rational).collect()).collect();
        serde_json::json!(rows)
    }
}

pub fn alpha_coeffs(table: &WordTable) -> Result<AlphaMatrix> {
    let r = table.rank;
    let basis: Vec<Vector> = table.x[..r].iter().map(|m| m.upper().to_vec()).collect();
    if let Some(c) = kernel_vector(&basis) {
        return Err(Error::DependentGenerators { certificate: c.iter().map(format_rational).collect() });
    }
    let rows = table
        .words
        .iter()
        .zip(&table.x)
        .map(|(w, xw)| solve(&basis, xw.upper()).ok_or_else(|| Error::NotInSpan { word: w.to_string() }))
        .collect::<Result<_>>()?;
    Ok(AlphaMatrix { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn e(k: usize, i: usize, j: usize) -> NilMatrix {
        NilMatrix::elementary(k, i, j)
    }

    fn names(t: &WordTable) -> Vec<String> {
        t.words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn heisenberg_table() {
        let t = enumerate_words(&[e(3, 1, 2), e(3, 2, 3)], &[int(4), int(4)]).unwrap();
        assert_eq!(names(&t), vec!["1", "2", "[1,2]"]);
        assert_eq!(t.lengths, vec![1, 1, 2]);
        assert_eq!(t.weights[2], int(16));
        // The pair does not span the centre.
        assert!(matches!(alpha_coeffs(&t), Err(Error::NotInSpan { .. })));
    }

    #[test]
    fn heisenberg_three_generators() {
        let t = enumerate_words(&[e(3, 1, 2), e(3, 2, 3), e(3, 1, 3)], &[int(2), int(2), int(8)]).unwrap();
        assert_eq!(names(&t), vec!["1", "2", "3", "[1,2]"]);
        let a = alpha_coeffs(&t).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a.rows[i][j], int((i == j) as i64));
            }
        }
        assert_eq!(a.rows[3], vec![int(0), int(0), int(1)]);
    }

    #[test]
    fn abelian_table() {
        let t = enumerate_words(&[e(3, 1, 3), e(3, 1, 2)], &[int(1), int(1)]).unwrap();
        // E13 and E12 commute.
        assert_eq!(names(&t), vec!["1", "2"]);
    }

    #[test]
    fn ut4_table() {
        let t = enumerate_words(&[e(4, 1, 2), e(4, 2, 3), e(4, 3, 4)], &[int(1), int(1), int(1)]).unwrap();
        let n = names(&t);
        for w in ["[1,2]", "[2,3]", "[[1,2],3]", "[1,[2,3]]"] {
            assert!(n.contains(&w.to_string()), "{w} missing from {n:?}");
        }
        assert!(!n.contains(&"[1,3]".to_string()));
        assert!(t.x.iter().all(|x| !x.is_zero()));
    }

    #[test]
    fn dependent_generators_certificate() {
        let t = enumerate_words(&[e(3, 1, 2), e(3, 1, 2).scale(&int(2))], &[int(1), int(1)]).unwrap();
        match alpha_coeffs(&t) {
            Err(Error::DependentGenerators { certificate }) => assert_eq!(certificate.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
