//! Product-set growth, the volume polynomial and piecewise-linear profiles.

mod profile;
mod sandwich;
mod volume;

use num_bigint::BigUint;
use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupOracle};

pub use profile::{fit_points, fit_profile, FitResult, PiecewiseLinearProfile};
pub use sandwich::{check_control_sandwich, SandwichReport, SandwichRow};
pub use volume::{predict_volume_polynomial, tropicalize, volume_polynomial, GrowthPolynomial, LogRatio, TropicalProfile};

/// `(n, |A^n|)` pairs in increasing `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthSeries {
    pub label: String,
    pub entries: Vec<(u64, u64)>,
    /// Set when enumeration stopped at the state cap.
    #[serde(default)]
    pub truncated: bool,
}

impl GrowthSeries {
    pub fn new(label: impl Into<String>, entries: Vec<(u64, u64)>) -> Self {
        GrowthSeries { label: label.into(), entries, truncated: false }
    }

    pub fn get(&self, n: u64) -> Option<u64> {
        self.entries.iter().find(|(k, _)| *k == n).map(|(_, c)| *c)
    }

    pub fn require(&self, n: u64) -> Result<u64> {
        self.get(n).ok_or(Error::MissingIndex(n))
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[0].1 <= w[1].1)
    }
}

/// `A`, or `A ∪ {1} ∪ A^-1` when `symmetrize` is set, deduplicated and sorted.
pub fn base_set(oracle: &GroupOracle, a: &[GroupElement], symmetrize: bool) -> Result<Vec<GroupElement>> {
    let mut out: Vec<GroupElement> = a.iter().map(|g| oracle.canonicalize(g.clone())).collect::<Result<_>>()?;
    if symmetrize {
        out.push(oracle.identity());
        for g in a {
            out.push(oracle.inv(g)?);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Successive powers `A, A^2, ...` of a finite set.
pub struct PowerIter<'a> {
    oracle: &'a GroupOracle,
    base: Vec<GroupElement>,
    contains_identity: bool,
    current: FxHashSet<GroupElement>,
    frontier: Vec<GroupElement>,
    n: u64,
    cap: usize,
}

impl<'a> PowerIter<'a> {
    pub fn new(oracle: &'a GroupOracle, base: Vec<GroupElement>, cap: usize) -> Self {
        let contains_identity = base.contains(&oracle.identity());
        PowerIter { oracle, base, contains_identity, current: FxHashSet::default(), frontier: Vec::new(), n: 0, cap }
    }

    /// Exponent of the set returned by the last call to `advance`.
    pub fn exponent(&self) -> u64 {
        self.n
    }

    pub fn current(&self) -> &FxHashSet<GroupElement> {
        &self.current
    }

    /// Moves to the next power. With `1 ∈ A` only the newest layer is
    /// multiplied: `A^{n+1} = A^n ∪ (A^n \ A^{n-1}) A`.
    pub fn advance(&mut self) -> Result<&FxHashSet<GroupElement>> {
        if self.n == 0 {
            self.current = self.base.iter().cloned().collect();
            self.frontier = self.base.clone();
            self.n = 1;
            return Ok(&self.current);
        }
        let source: Vec<GroupElement> = if self.contains_identity {
            std::mem::take(&mut self.frontier)
        } else {
            let mut v: Vec<_> = self.current.iter().cloned().collect();
            v.sort();
            v
        };
        let oracle = self.oracle;
        let base = &self.base;
        let current = &self.current;
        let keep_old = self.contains_identity;
        let chunks: Vec<Vec<GroupElement>> = source
            .par_chunks(1024)
            .map(|chunk| -> Result<Vec<GroupElement>> {
                let mut out = Vec::new();
                for x in chunk {
                    for a in base {
                        let y = oracle.mul(x, a)?;
                        if !keep_old || !current.contains(&y) {
                            out.push(y);
                        }
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let mut next = if keep_old { std::mem::take(&mut self.current) } else { FxHashSet::default() };
        let mut frontier = Vec::new();
        for y in chunks.into_iter().flatten() {
            if next.contains(&y) {
                continue;
            }
            next.insert(y.clone());
            frontier.push(y);
            if next.len() > self.cap {
                self.current = next;
                return Err(Error::CapExceeded { cap: self.cap, reached: self.current.len() });
            }
        }
        self.current = next;
        self.frontier = frontier;
        self.n += 1;
        Ok(&self.current)
    }
}

/// `|A^n|` (or of the symmetrized set) for `n = 1..=n_max`. Hitting the cap
/// returns the series so far with `truncated` set.
pub fn product_set_series(
    oracle: &GroupOracle,
    a: &[GroupElement],
    symmetrize: bool,
    n_max: u64,
    cap: usize,
) -> Result<GrowthSeries> {
    let base = base_set(oracle, a, symmetrize)?;
    let mut it = PowerIter::new(oracle, base, cap);
    let mut entries = Vec::new();
    let mut truncated = false;
    for _ in 0..n_max {
        match it.advance() {
            Ok(s) => {
                let len = s.len() as u64;
                entries.push((it.exponent(), len));
            }
            Err(Error::CapExceeded { .. }) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let label = if symmetrize { "symmetrized" } else { "plain" };
    Ok(GrowthSeries { label: label.into(), entries, truncated })
}

/// `|mA|` for `A = prod_i [-w_i, w_i]` inside `prod_i Z/q_i`.
pub fn box_series(half_widths: &[u64], moduli: &[u64], ms: &[u64]) -> Result<GrowthSeries> {
    if half_widths.len() != moduli.len() {
        return Err(Error::invalid("one modulus per side is required"));
    }
    let entries = ms
        .iter()
        .map(|&m| {
            let card = half_widths
                .iter()
                .zip(moduli)
                .try_fold(1u64, |acc, (&w, &q)| acc.checked_mul((2 * w * m + 1).min(q)))
                .ok_or(Error::Overflow("box cardinality"))?;
            Ok((m, card))
        })
        .collect::<Result<_>>()?;
    Ok(GrowthSeries::new("box", entries))
}

/// The example set `{-N..N} x {-N^2..N^2}` in `(Z/N^3)^2`.
pub fn abelian_example_series(n: u64, ms: &[u64]) -> Result<GrowthSeries> {
    let mut s = box_series(&[n, n * n], &[n * n * n, n * n * n], ms)?;
    s.label = format!("abelian N={n}");
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolynomialGrowthCheck {
    pub holds: bool,
    /// `n^d |A| / |A^n|`.
    pub margin: f64,
}

/// Exact test of `|A^n| <= n^d |A|`.
pub fn polynomial_growth_check(series: &GrowthSeries, n: u64, d: u32) -> Result<PolynomialGrowthCheck> {
    let a1 = BigUint::from(series.require(1)?);
    let an = BigUint::from(series.require(n)?);
    let bound = BigUint::from(n).pow(d) * &a1;
    let margin = crate::rational::to_f64(&crate::rational::biguint_ratio(&bound, &an));
    Ok(PolynomialGrowthCheck { holds: an <= bound, margin })
}

/// Smallest `C` with `|A^{km}| <= C^k |A^m|` over all pairs in the series.
pub fn stability_constant(series: &GrowthSeries) -> Result<f64> {
    if series.entries.len() < 3 {
        return Err(Error::invalid("stability constant needs at least three entries"));
    }
    let mut c: f64 = 1.0;
    for &(m, am) in &series.entries {
        for &(km, akm) in &series.entries {
            if m == 0 || km <= m || km % m != 0 {
                continue;
            }
            let k = (km / m) as f64;
            c = c.max((akm as f64 / am as f64).powf(1.0 / k));
        }
    }
    Ok(c)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::invalid("slope needs two points"));
    }
    let pts: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("abscissae coincide"));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_growth() {
        let z = GroupOracle::lattice(1);
        let a: Vec<_> = [-1, 0, 1].iter().map(|&x| GroupElement::lattice(&[x])).collect();
        let s = product_set_series(&z, &a, false, 10, 1000).unwrap();
        assert_eq!(s.entries, (1..=10).map(|m| (m, 2 * m + 1)).collect::<Vec<_>>());
        assert!(polynomial_growth_check(&s, 10, 2).unwrap().holds);
        let c = stability_constant(&s).unwrap();
        assert!(c <= 3.0 && c > 1.0);
    }

    #[test]
    fn identity_free_base_uses_full_products() {
        let z = GroupOracle::lattice(1);
        let a = vec![GroupElement::lattice(&[1]), GroupElement::lattice(&[3])];
        let s = product_set_series(&z, &a, false, 4, 1000).unwrap();
        // {k + 3(n-k)}: n+1 values
        assert_eq!(s.entries, vec![(1, 2), (2, 3), (3, 4), (4, 5)]);
        let sym = product_set_series(&z, &a, true, 4, 1000).unwrap();
        assert!(sym.entries.iter().zip(&s.entries).all(|(a, b)| a.1 >= b.1));
    }

    #[test]
    fn heisenberg_box_size() {
        let h = GroupOracle::heisenberg();
        let mut a = Vec::new();
        for x in -2..=2 {
            for y in -8..=8 {
                for z in -2..=2 {
                    a.push(GroupElement::heisenberg(x, y, z));
                }
            }
        }
        let s = product_set_series(&h, &a, false, 2, 1_000_000).unwrap();
        assert_eq!(s.entries[0], (1, 425));
    }

    #[test]
    fn cap_truncates() {
        let z = GroupOracle::lattice(2);
        let a = vec![GroupElement::lattice(&[1, 0]), GroupElement::lattice(&[0, 1])];
        let s = product_set_series(&z, &a, true, 50, 200).unwrap();
        assert!(s.truncated);
        assert!(!s.entries.is_empty() && s.entries.len() < 50);
    }

    #[test]
    fn growth_checks() {
        let exp = GrowthSeries::new("exp", (1..=20).map(|n| (n, 3u64.pow(n as u32))).collect());
        assert!(!polynomial_growth_check(&exp, 20, 5).unwrap().holds);
        assert!(matches!(polynomial_growth_check(&exp, 21, 5), Err(Error::MissingIndex(21))));
        let flat = GrowthSeries::new("flat", (1..=5).map(|n| (n, 7)).collect());
        assert_eq!(stability_constant(&flat).unwrap(), 1.0);
    }

    #[test]
    fn abelian_closed_form() {
        let s = abelian_example_series(4, &[1, 2, 4, 8]).unwrap();
        let expected: Vec<u64> = [1u64, 2, 4, 8].iter().map(|m| (8 * m + 1).min(64) * (32 * m + 1).min(64)).collect();
        assert_eq!(s.entries.iter().map(|e| e.1).collect::<Vec<_>>(), expected);
    }
}
