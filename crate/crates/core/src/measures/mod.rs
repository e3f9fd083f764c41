//! Finitely supported probability measures and their convolution powers.

mod direct;
mod donk;
mod gauge;

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupOracle};
use crate::rational::{biguint_ratio, format_rational, to_f64, RatInput};

pub use direct::{direct_theorem_check, DirectReport};
pub use donk::{donk_bounds, random_donk_instance, DonkTriple, RHS_SLACK};
pub use gauge::{drift_gauge_eigen, random_gauge_instance, solve_drift_gauge, StochasticGauge};

const FLOAT_TOTAL_TOL: f64 = 1e-12;

/// Masses either as exact weights over a shared denominator or as doubles.
#[derive(Clone, Debug, PartialEq)]
enum Masses {
    Exact { weights: FxHashMap<GroupElement, BigUint>, denom: BigUint },
    Float(FxHashMap<GroupElement, f64>),
}

/// A finitely supported probability measure.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMeasure {
    masses: Masses,
}

/// A functional evaluated exactly or in double precision.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Float(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => to_f64(r),
            Value::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Value::Exact(r) => Some(r),
            Value::Float(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => f.write_str(&format_rational(r)),
            Value::Float(x) => write!(f, "{x:e}"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Exact(r) => s.serialize_str(&format_rational(r)),
            Value::Float(x) => s.serialize_f64(*x),
        }
    }
}

fn ratio_of(num: &BigUint, den: &BigUint) -> BigRational {
    biguint_ratio(num, den)
}

impl FiniteMeasure {
    pub fn delta(g: GroupElement) -> Self {
        let mut weights = FxHashMap::default();
        weights.insert(g, BigUint::one());
        FiniteMeasure { masses: Masses::Exact { weights, denom: BigUint::one() } }
    }

    /// Uniform measure on a multiset: repeated elements get repeated mass.
    pub fn uniform(elements: &[GroupElement]) -> Result<Self> {
        Self::from_weights(elements.iter().map(|g| (g.clone(), 1u64)).collect())
    }

    /// Normalizes positive integer weights.
    pub fn from_weights(items: Vec<(GroupElement, u64)>) -> Result<Self> {
        let mut weights: FxHashMap<GroupElement, BigUint> = FxHashMap::default();
        let mut denom = BigUint::zero();
        for (g, w) in items {
            if w == 0 {
                return Err(Error::invalid("weights must be positive"));
            }
            *weights.entry(g).or_default() += w;
            denom += w;
        }
        if weights.is_empty() {
            return Err(Error::invalid("measure has empty support"));
        }
        Ok(Self::exact_reduced(weights, denom))
    }

    pub fn from_rationals(items: Vec<(GroupElement, BigRational)>) -> Result<Self> {
        let mut lcm = BigInt::one();
        for (_, m) in &items {
            if *m <= BigRational::zero() {
                return Err(Error::invalid("masses must be positive"));
            }
            lcm = lcm.lcm(m.denom());
        }
        let mut weights: FxHashMap<GroupElement, BigUint> = FxHashMap::default();
        let mut total = BigUint::zero();
        for (g, m) in items {
            let w = (m.numer() * (&lcm / m.denom())).to_biguint().expect("positive");
            total += &w;
            *weights.entry(g).or_default() += w;
        }
        let denom = lcm.to_biguint().expect("positive");
        if total != denom {
            return Err(Error::invalid(format!("total mass is {}, not 1", format_rational(&ratio_of(&total, &denom)))));
        }
        if weights.is_empty() {
            return Err(Error::invalid("measure has empty support"));
        }
        Ok(Self::exact_reduced(weights, denom))
    }

    pub fn from_floats(items: Vec<(GroupElement, f64)>) -> Result<Self> {
        let mut map: FxHashMap<GroupElement, f64> = FxHashMap::default();
        let mut total = 0.0;
        for (g, m) in items {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::invalid("masses must be positive and finite"));
            }
            *map.entry(g).or_default() += m;
            total += m;
        }
        if map.is_empty() || (total - 1.0).abs() > FLOAT_TOTAL_TOL {
            return Err(Error::invalid(format!("total mass is {total}, not 1")));
        }
        Ok(FiniteMeasure { masses: Masses::Float(map) })
    }

    fn exact_reduced(weights: FxHashMap<GroupElement, BigUint>, denom: BigUint) -> Self {
        let g = weights.values().fold(denom.clone(), |acc, w| acc.gcd(w));
        if g.is_one() {
            return FiniteMeasure { masses: Masses::Exact { weights, denom } };
        }
        let weights = weights.into_iter().map(|(k, w)| (k, w / &g)).collect();
        FiniteMeasure { masses: Masses::Exact { weights, denom: denom / g } }
    }

    /// Same measure with double-precision masses.
    pub fn to_float(&self) -> Self {
        match &self.masses {
            Masses::Float(_) => self.clone(),
            Masses::Exact { weights, denom } => FiniteMeasure {
                masses: Masses::Float(weights.iter().map(|(g, w)| (g.clone(), to_f64(&ratio_of(w, denom)))).collect()),
            },
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.masses, Masses::Exact { .. })
    }

    pub fn support_len(&self) -> usize {
        match &self.masses {
            Masses::Exact { weights, .. } => weights.len(),
            Masses::Float(m) => m.len(),
        }
    }

    /// Support in canonical order.
    pub fn support(&self) -> Vec<GroupElement> {
        let mut v: Vec<GroupElement> = match &self.masses {
            Masses::Exact { weights, .. } => weights.keys().cloned().collect(),
            Masses::Float(m) => m.keys().cloned().collect(),
        };
        v.sort();
        v
    }

    pub fn mass(&self, g: &GroupElement) -> Value {
        match &self.masses {
            Masses::Exact { weights, denom } => {
                Value::Exact(weights.get(g).map_or_else(BigRational::zero, |w| ratio_of(w, denom)))
            }
            Masses::Float(m) => Value::Float(m.get(g).copied().unwrap_or(0.0)),
        }
    }

    pub fn total(&self) -> Value {
        match &self.masses {
            Masses::Exact { weights, denom } => Value::Exact(ratio_of(&weights.values().sum(), denom)),
            Masses::Float(m) => Value::Float(self.sorted_floats(m).iter().map(|x| x.1).sum()),
        }
    }

    fn sorted_floats(&self, m: &FxHashMap<GroupElement, f64>) -> Vec<(GroupElement, f64)> {
        let mut v: Vec<(GroupElement, f64)> = m.iter().map(|(g, x)| (g.clone(), *x)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    /// `(element, mass)` pairs in canonical order.
    pub fn entries(&self) -> Vec<(GroupElement, Value)> {
        self.support().into_iter().map(|g| {
            let m = self.mass(&g);
            (g, m)
        }).collect()
    }

    /// `x -> mu(x^-1)`.
    pub fn reflect(&self, oracle: &GroupOracle) -> Result<Self> {
        Ok(FiniteMeasure {
            masses: match &self.masses {
                Masses::Exact { weights, denom } => Masses::Exact {
                    weights: weights.iter().map(|(g, w)| Ok((oracle.inv(g)?, w.clone()))).collect::<Result<_>>()?,
                    denom: denom.clone(),
                },
                Masses::Float(m) => Masses::Float(m.iter().map(|(g, w)| Ok((oracle.inv(g)?, *w))).collect::<Result<_>>()?),
            },
        })
    }

    /// Exact symmetry `mu(x) = mu(x^-1)`; float masses compared bitwise.
    pub fn is_symmetric(&self, oracle: &GroupOracle) -> Result<bool> {
        Ok(self.reflect(oracle)? == *self)
    }

    /// `(sum_x mu(x)^2)^-1`.
    pub fn l2_inv_sq(&self) -> Value {
        match &self.masses {
            Masses::Exact { weights, denom } => {
                let s: BigUint = weights.values().map(|w| w * w).sum();
                Value::Exact(ratio_of(&(denom * denom), &s))
            }
            Masses::Float(m) => Value::Float(1.0 / self.sorted_floats(m).iter().map(|x| x.1 * x.1).sum::<f64>()),
        }
    }

    pub fn linf(&self) -> Value {
        match &self.masses {
            Masses::Exact { weights, denom } => {
                Value::Exact(ratio_of(weights.values().max().expect("nonempty support"), denom))
            }
            Masses::Float(m) => Value::Float(m.values().cloned().fold(0.0, f64::max)),
        }
    }

    /// Largest mass together with the smallest element carrying it.
    pub fn argmax(&self) -> (GroupElement, Value) {
        let entries = self.entries();
        let best = entries.iter().map(|e| e.1.to_f64()).fold(f64::NEG_INFINITY, f64::max);
        let top = self.linf();
        entries
            .into_iter()
            .find(|(_, m)| match (m, &top) {
                (Value::Exact(a), Value::Exact(b)) => a == b,
                _ => m.to_f64() == best,
            })
            .expect("nonempty support")
    }

    /// `(1 - s) delta_1 + s mu` for exact `s` in `[0, 1]`.
    pub fn lazy(&self, oracle: &GroupOracle, s: &BigRational) -> Result<Self> {
        let one = BigRational::one();
        if *s < BigRational::zero() || *s > one {
            return Err(Error::invalid("laziness must lie in [0, 1]"));
        }
        let delta = FiniteMeasure::delta(oracle.identity());
        mix(&[(one - s, &delta), (s.clone(), self)])
    }
}

/// Exact convex combination `sum_i c_i mu_i`.
pub fn mix(parts: &[(BigRational, &FiniteMeasure)]) -> Result<FiniteMeasure> {
    let mut items: Vec<(GroupElement, BigRational)> = Vec::new();
    for (c, mu) in parts {
        if c.is_zero() {
            continue;
        }
        if !mu.is_exact() {
            return Err(Error::ModeMismatch);
        }
        for (g, m) in mu.entries() {
            items.push((g, c * m.exact().expect("exact")));
        }
    }
    let mut merged: FxHashMap<GroupElement, BigRational> = FxHashMap::default();
    for (g, m) in items {
        *merged.entry(g).or_insert_with(BigRational::zero) += m;
    }
    FiniteMeasure::from_rationals(merged.into_iter().collect())
}

/// Double-precision convex combination.
pub fn mix_float(parts: &[(f64, &FiniteMeasure)]) -> Result<FiniteMeasure> {
    let mut merged: FxHashMap<GroupElement, f64> = FxHashMap::default();
    for (c, mu) in parts {
        if *c == 0.0 {
            continue;
        }
        for (g, m) in mu.entries() {
            *merged.entry(g).or_default() += c * m.to_f64();
        }
    }
    let mut items: Vec<_> = merged.into_iter().collect();
    items.sort_by(|a, b| a.0.cmp(&b.0));
    FiniteMeasure::from_floats(items)
}

const PAR_THRESHOLD: usize = 4096;

/// `mu * nu (x) = sum_y mu(y) nu(y^-1 x)`.
pub fn convolve(oracle: &GroupOracle, mu: &FiniteMeasure, nu: &FiniteMeasure) -> Result<FiniteMeasure> {
    match (&mu.masses, &nu.masses) {
        (Masses::Exact { weights: a, denom: da }, Masses::Exact { weights: b, denom: db }) => {
            let a: Vec<(&GroupElement, &BigUint)> = a.iter().collect();
            let b: Vec<(&GroupElement, &BigUint)> = b.iter().collect();
            let partial = |chunk: &[(&GroupElement, &BigUint)]| -> Result<FxHashMap<GroupElement, BigUint>> {
                let mut out: FxHashMap<GroupElement, BigUint> = FxHashMap::default();
                for (g, wg) in chunk {
                    for (h, wh) in &b {
                        *out.entry(oracle.mul(g, h)?).or_default() += *wg * *wh;
                    }
                }
                Ok(out)
            };
            let weights = if a.len() * b.len() < PAR_THRESHOLD {
                partial(&a)?
            } else {
                a.par_chunks(64.max(a.len() / 64)).map(partial).try_reduce(FxHashMap::default, |mut x, y| {
                    for (k, v) in y {
                        *x.entry(k).or_default() += v;
                    }
                    Ok(x)
                })?
            };
            Ok(FiniteMeasure::exact_reduced(weights, da * db))
        }
        (Masses::Float(a), Masses::Float(b)) => {
            // Fixed summation order keeps results bit-reproducible.
            let a = mu.sorted_floats(a);
            let b = nu.sorted_floats(b);
            let mut out: FxHashMap<GroupElement, f64> = FxHashMap::default();
            for (g, wg) in &a {
                for (h, wh) in &b {
                    *out.entry(oracle.mul(g, h)?).or_default() += wg * wh;
                }
            }
            Ok(FiniteMeasure { masses: Masses::Float(out) })
        }
        _ => Err(Error::ModeMismatch),
    }
}

/// `mu^{*n}` by repeated single convolution.
pub fn convolution_power(oracle: &GroupOracle, mu: &FiniteMeasure, n: u64, cap: usize) -> Result<FiniteMeasure> {
    let mut acc = FiniteMeasure::delta(oracle.identity());
    if !mu.is_exact() {
        acc = acc.to_float();
    }
    for _ in 0..n {
        acc = convolve(oracle, &acc, mu)?;
        if acc.support_len() > cap {
            return Err(Error::CapExceeded { cap, reached: acc.support_len() });
        }
    }
    Ok(acc)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvolutionRow {
    pub n: u64,
    pub l2_inv_sq: Value,
    pub linf: Value,
    pub support: usize,
}

/// `||mu^{*n}||_2^{-2}` and `||mu^{*n}||_inf` for `n = 1..=n_max`; the first
/// must be non-decreasing and this is checked.
pub fn convolution_growth_series(oracle: &GroupOracle, mu: &FiniteMeasure, n_max: u64, cap: usize) -> Result<Vec<ConvolutionRow>> {
    let mut rows: Vec<ConvolutionRow> = Vec::new();
    let mut acc = mu.clone();
    for n in 1..=n_max {
        if n > 1 {
            acc = convolve(oracle, &acc, mu)?;
        }
        if acc.support_len() > cap {
            return Err(Error::CapExceeded { cap, reached: acc.support_len() });
        }
        let row = ConvolutionRow { n, l2_inv_sq: acc.l2_inv_sq(), linf: acc.linf(), support: acc.support_len() };
        if let Some(prev) = rows.last() {
            let ok = match (&prev.l2_inv_sq, &row.l2_inv_sq) {
                (Value::Exact(a), Value::Exact(b)) => a <= b,
                (a, b) => a.to_f64() <= b.to_f64() * (1.0 + 1e-12),
            };
            if !ok {
                return Err(Error::Assertion(format!("l2 inverse square decreased at n = {n}")));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Random symmetric measure: `pairs` elements drawn with coordinates up to
/// `radius`, each given with its inverse and a shared random weight, plus
/// the identity with probability one half.
pub fn random_symmetric_measure<R: Rng>(oracle: &GroupOracle, rng: &mut R, pairs: usize, radius: i64) -> Result<FiniteMeasure> {
    let mut items = Vec::new();
    for _ in 0..pairs {
        let g = oracle.sample(rng, radius);
        let w = rng.random_range(1..=6u64);
        let gi = oracle.inv(&g)?;
        items.push((g, w));
        items.push((gi, w));
    }
    if pairs == 0 || rng.random_bool(0.5) {
        items.push((oracle.identity(), rng.random_range(1..=6u64)));
    }
    FiniteMeasure::from_weights(items)
}

/// JSON form: `[[element, "p/q"], ...]` or decimal masses.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeasureSpec(pub Vec<(GroupElement, MassInput)>);

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MassInput {
    Float(f64),
    Text(String),
}

impl MeasureSpec {
    pub fn from_measure(mu: &FiniteMeasure) -> Self {
        MeasureSpec(
            mu.entries()
                .into_iter()
                .map(|(g, m)| {
                    let mass = match m {
                        Value::Exact(r) => MassInput::Text(format_rational(&r)),
                        Value::Float(x) => MassInput::Float(x),
                    };
                    (g, mass)
                })
                .collect(),
        )
    }

    pub fn build(&self, oracle: &GroupOracle) -> Result<FiniteMeasure> {
        let all_text = self.0.iter().all(|(_, m)| matches!(m, MassInput::Text(_)));
        if all_text {
            let items = self
                .0
                .iter()
                .map(|(g, m)| {
                    let MassInput::Text(s) = m else { unreachable!() };
                    Ok((oracle.canonicalize(g.clone())?, RatInput::Str(s.clone()).into_rational()?))
                })
                .collect::<Result<_>>()?;
            FiniteMeasure::from_rationals(items)
        } else {
            let items = self
                .0
                .iter()
                .map(|(g, m)| {
                    let x = match m {
                        MassInput::Float(x) => *x,
                        MassInput::Text(s) => s.parse::<f64>().map_err(|e| Error::Parse(format!("mass {s:?}: {e}")))?,
                    };
                    Ok((oracle.canonicalize(g.clone())?, x))
                })
                .collect::<Result<_>>()?;
            FiniteMeasure::from_floats(items)
        }
    }
}
