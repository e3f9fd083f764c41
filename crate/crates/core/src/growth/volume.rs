//! The volume polynomial `V(m)` and its tropical profile.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use serde::Serialize;

use super::profile::PiecewiseLinearProfile;
use crate::error::{Error, Result};
use crate::liealg::linalg::{det, Echelon};
use crate::liealg::{alpha_coeffs, enumerate_words, AlphaMatrix, NilMatrix, WordTable};
use crate::rational::{format_rational, ln_rational};

/// `sum_t c_t m^{d_t}` with positive coefficients and distinct degrees,
/// sorted by degree.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthPolynomial {
    terms: Vec<(BigRational, u32)>,
}

impl GrowthPolynomial {
    pub fn new(terms: impl IntoIterator<Item = (BigRational, u32)>) -> Result<Self> {
        let mut collected: Vec<(BigRational, u32)> = Vec::new();
        for (c, d) in terms {
            if c.is_negative() {
                return Err(Error::invalid("coefficients must be non-negative"));
            }
            match collected.iter_mut().find(|t| t.1 == d) {
                Some(t) => t.0 += c,
                None => collected.push((c, d)),
            }
        }
        collected.retain(|t| !t.0.is_zero());
        if collected.is_empty() {
            return Err(Error::invalid("polynomial has no nonzero term"));
        }
        collected.sort_by_key(|t| t.1);
        Ok(GrowthPolynomial { terms: collected })
    }

    pub fn terms(&self) -> &[(BigRational, u32)] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms.last().map_or(0, |t| t.1)
    }

    pub fn eval(&self, m: &BigRational) -> BigRational {
        self.terms.iter().map(|(c, d)| c * Pow::pow(m, *d)).sum()
    }

    pub fn eval_f64(&self, m: f64) -> f64 {
        self.log_eval(m.ln()).exp()
    }

    /// `log V(e^x)`, computed stably.
    pub fn log_eval(&self, x: f64) -> f64 {
        let logs: Vec<f64> = self.terms.iter().map(|(c, d)| ln_rational(c) + *d as f64 * x).collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln()
    }
}

impl fmt::Display for GrowthPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (c, d)) in self.terms.iter().rev().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}*m^{d}", format_rational(c))?;
        }
        Ok(())
    }
}

/// `V(m) = sum_S |det alpha_S| prod_{i in S} N^{w_i} m^{sum |w_i|}` over
/// `r`-subsets `S` of the word table.
pub fn predict_volume_polynomial(table: &WordTable, alpha: &AlphaMatrix) -> Result<GrowthPolynomial> {
    let r = table.rank;
    let k = table.len();
    if k < r || alpha.rows.len() != k {
        return Err(Error::invalid("alpha matrix does not match the word table"));
    }
    let mut terms = Vec::new();
    let mut chosen = Vec::with_capacity(r);
    subsets(table, alpha, 0, &mut chosen, &Echelon::new(), &mut terms);
    if r == 0 {
        terms.push((BigRational::one(), 0));
    }
    GrowthPolynomial::new(terms)
}

fn subsets(
    table: &WordTable,
    alpha: &AlphaMatrix,
    start: usize,
    chosen: &mut Vec<usize>,
    span: &Echelon,
    terms: &mut Vec<(BigRational, u32)>,
) {
    let r = table.rank;
    if chosen.len() == r {
        if r == 0 {
            return;
        }
        let rows: Vec<_> = chosen.iter().map(|&i| alpha.rows[i].clone()).collect();
        let d = det(&rows).abs();
        let w: BigRational = chosen.iter().map(|&i| table.weights[i].clone()).product();
        let deg: usize = chosen.iter().map(|&i| table.lengths[i]).sum();
        terms.push((d * w, deg as u32));
        return;
    }
    let need = r - chosen.len();
    for i in start..=table.len().saturating_sub(need) {
        let mut next = span.clone();
        // Dependent rows give a zero determinant; prune early.
        if !next.insert(&alpha.rows[i]) {
            continue;
        }
        chosen.push(i);
        subsets(table, alpha, i + 1, chosen, &next, terms);
        chosen.pop();
    }
}

/// Word table, coefficients and `V(m)` from Lie generators and lengths.
pub fn volume_polynomial(gens: &[NilMatrix], lengths: &[BigRational]) -> Result<(WordTable, AlphaMatrix, GrowthPolynomial)> {
    let table = enumerate_words(gens, lengths)?;
    let alpha = alpha_coeffs(&table)?;
    let v = predict_volume_polynomial(&table, &alpha)?;
    Ok((table, alpha, v))
}

/// `ln(ratio) / denom` for a positive rational and positive integer.
#[derive(Clone, Debug, Serialize)]
pub struct LogRatio {
    #[serde(with = "crate::rational::rat_str")]
    pub ratio: BigRational,
    pub denom: u32,
}

impl LogRatio {
    pub fn new(ratio: BigRational, denom: u32) -> Self {
        assert!(ratio.is_positive() && denom > 0, "log ratio needs positive arguments");
        LogRatio { ratio, denom }
    }

    /// `ln(p) / 1` for integer `p`.
    pub fn log_of(p: i64) -> Self {
        Self::new(BigRational::from_integer(BigInt::from(p)), 1)
    }

    pub fn to_f64(&self) -> f64 {
        ln_rational(&self.ratio) / self.denom as f64
    }
}

impl Ord for LogRatio {
    /// `ln a / p` vs `ln b / q` compares `a^q` with `b^p`.
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = Pow::pow(&self.ratio, other.denom);
        let rhs = Pow::pow(&other.ratio, self.denom);
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for LogRatio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for LogRatio {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for LogRatio {}

impl fmt::Display for LogRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom == 1 {
            write!(f, "log({})", format_rational(&self.ratio))
        } else {
            write!(f, "log({})/{}", format_rational(&self.ratio), self.denom)
        }
    }
}

/// `f(x) = max_t (log c_t + d_t x) - max_t log c_t` with exact breakpoints.
#[derive(Clone, Debug, Serialize)]
pub struct TropicalProfile {
    pub profile: PiecewiseLinearProfile,
    /// Breakpoints after zero, exactly.
    pub breakpoints: Vec<LogRatio>,
    /// `max_t log c_t`, the value of the envelope at zero.
    pub offset: f64,
}

/// Upper envelope of the lines `log c_t + d_t x` on `x >= 0`.
pub fn tropicalize(v: &GrowthPolynomial) -> TropicalProfile {
    let terms = v.terms();
    // Active term at 0: largest coefficient, ties to the larger degree.
    let mut cur = (0..terms.len())
        .max_by(|&a, &b| terms[a].0.cmp(&terms[b].0).then(terms[a].1.cmp(&terms[b].1)))
        .expect("nonempty polynomial");
    let offset = ln_rational(&terms[cur].0);
    let mut slopes = vec![terms[cur].1];
    let mut exact = Vec::new();
    let mut last: Option<LogRatio> = None;
    loop {
        let (c0, d0) = &terms[cur];
        let mut best: Option<(LogRatio, usize)> = None;
        for (t, (c, d)) in terms.iter().enumerate() {
            if d <= d0 {
                continue;
            }
            // log c0 + d0 x = log c + d x at x = log(c0 / c) / (d - d0); a
            // nonpositive crossing means the term already dominates at 0,
            // which the choice of the starting term excludes.
            let ratio = c0 / c;
            if ratio <= BigRational::one() {
                continue;
            }
            let x = LogRatio::new(ratio, d - d0);
            if let Some(l) = &last {
                if x < *l {
                    continue;
                }
            }
            let better = match &best {
                None => true,
                Some((bx, bt)) => x < *bx || (x == *bx && terms[t].1 > terms[*bt].1),
            };
            if better {
                best = Some((x, t));
            }
        }
        match best {
            Some((x, t)) => {
                exact.push(x.clone());
                slopes.push(terms[t].1);
                last = Some(x);
                cur = t;
            }
            None => break,
        }
    }
    let mut breaks = vec![0.0];
    breaks.extend(exact.iter().map(LogRatio::to_f64));
    let profile = PiecewiseLinearProfile::new(breaks, slopes).expect("envelope is a valid profile");
    TropicalProfile { profile, breakpoints: exact, offset }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn heis_gens() -> Vec<NilMatrix> {
        vec![NilMatrix::elementary(3, 1, 2), NilMatrix::elementary(3, 2, 3), NilMatrix::elementary(3, 1, 3)]
    }

    #[test]
    fn heisenberg_polynomial_and_profile() {
        for n in [2i64, 3, 4] {
            let (_, _, v) = volume_polynomial(&heis_gens(), &[int(n), int(n), int(n * n * n)]).unwrap();
            assert_eq!(v.terms(), &[(int(n.pow(5)), 3), (int(n.pow(4)), 4)]);
            let t = tropicalize(&v);
            assert_eq!(t.profile.slopes, vec![3, 4]);
            assert_eq!(t.breakpoints, vec![LogRatio::log_of(n)]);
            let ln = (n as f64).ln();
            assert!((t.profile.eval(ln + 1.0) - (4.0 * (ln + 1.0) - ln)).abs() < 1e-12);
        }
    }

    #[test]
    fn abelian_polynomial() {
        let g = vec![NilMatrix::elementary(3, 1, 2), NilMatrix::elementary(3, 1, 3)];
        let (_, _, v) = volume_polynomial(&g, &[int(5), int(7)]).unwrap();
        assert_eq!(v.terms(), &[(int(35), 2)]);
        let t = tropicalize(&v);
        assert_eq!(t.profile.slopes, vec![2]);
        assert!(t.breakpoints.is_empty());
    }

    #[test]
    fn ut4_malcev_degrees() {
        let k = 4;
        let e = |i, j| NilMatrix::elementary(k, i, j);
        let gens = vec![e(1, 2), e(2, 3), e(3, 4), e(1, 3), e(2, 4), e(1, 4)];
        let n = int(3);
        let n2 = &n * &n;
        let lengths = vec![n.clone(), n.clone(), n.clone(), n2.clone(), n2, &n * &n * &n];
        let (_, _, v) = volume_polynomial(&gens, &lengths).unwrap();
        let degs: Vec<u32> = v.terms().iter().map(|t| t.1).collect();
        assert_eq!(*degs.first().unwrap(), 6);
        assert_eq!(v.degree(), 10);
    }

    #[test]
    fn log_ratio_order() {
        assert!(LogRatio::log_of(2) < LogRatio::log_of(3));
        assert_eq!(LogRatio::new(int(4), 2), LogRatio::log_of(2));
        assert!(LogRatio::new(rat(9, 1), 2) > LogRatio::log_of(2));
    }

    proptest! {
        #[test]
        fn envelope_bound(terms in prop::collection::vec((1i64..100_000, 0u32..8), 1..6)) {
            let v = GrowthPolynomial::new(terms.into_iter().map(|(c, d)| (int(c), d))).unwrap();
            let t = tropicalize(&v);
            let k = v.terms().len() as f64;
            for i in 0..=100 {
                let x = i as f64 / 10.0;
                let gap = v.log_eval(x) - (t.profile.eval(x) + t.offset);
                prop_assert!(gap >= -1e-9 && gap <= k.ln() + 1e-9, "x={x} gap={gap}");
            }
            prop_assert!(t.profile.slopes.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
