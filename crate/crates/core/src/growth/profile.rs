//! Piecewise-linear log-log profiles and their sup-norm fitting.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::GrowthSeries;
use crate::error::{Error, Result};

const TIE: f64 = 1e-9;

/// Continuous `f` with `f(0) = 0` and slope `slopes[i]` on
/// `[breakpoints[i], breakpoints[i+1])`; the last piece is unbounded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearProfile {
    pub breakpoints: Vec<f64>,
    pub slopes: Vec<u32>,
}

impl PiecewiseLinearProfile {
    pub fn new(breakpoints: Vec<f64>, slopes: Vec<u32>) -> Result<Self> {
        if slopes.is_empty() || breakpoints.len() != slopes.len() {
            return Err(Error::invalid("need one breakpoint per piece"));
        }
        if breakpoints[0] != 0.0 {
            return Err(Error::invalid("first breakpoint must be 0"));
        }
        if !breakpoints.windows(2).all(|w| w[0] < w[1]) || breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("breakpoints must be finite and strictly increasing"));
        }
        Ok(PiecewiseLinearProfile { breakpoints, slopes })
    }

    pub fn pieces(&self) -> usize {
        self.slopes.len()
    }

    /// Breakpoints after zero.
    pub fn interior_breakpoints(&self) -> &[f64] {
        &self.breakpoints[1..]
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut y = 0.0;
        for i in 0..self.slopes.len() {
            let lo = self.breakpoints[i];
            if x <= lo {
                break;
            }
            let hi = self.breakpoints.get(i + 1).copied().unwrap_or(f64::INFINITY);
            y += self.slopes[i] as f64 * (x.min(hi) - lo);
        }
        y
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub profile: PiecewiseLinearProfile,
    pub deviation: f64,
    /// `(x, y)` samples that were fitted.
    pub points: Vec<(f64, f64)>,
}

struct Search<'a> {
    xs: &'a [f64],
    ys: &'a [f64],
    best: f64,
    best_breaks: Vec<usize>,
}

impl Search<'_> {
    /// Places piece `i` starting at sample `j` where `f = fj`.
    fn place(&mut self, slopes: &[u32], i: usize, j: usize, fj: f64, dev: f64, breaks: &mut Vec<usize>) {
        let s = slopes[i] as f64;
        let last = self.xs.len() - 1;
        let mut running = dev;
        if i + 1 == slopes.len() {
            for k in j + 1..=last {
                running = running.max((self.ys[k] - fj - s * (self.xs[k] - self.xs[j])).abs());
                if running >= self.best - TIE {
                    return;
                }
            }
            self.best = running;
            self.best_breaks = breaks.clone();
            return;
        }
        let remaining = slopes.len() - i - 1;
        for k in j + 1..=last.saturating_sub(remaining) {
            let fk = fj + s * (self.xs[k] - self.xs[j]);
            running = running.max((self.ys[k] - fk).abs());
            if running >= self.best - TIE {
                return;
            }
            breaks.push(k);
            self.place(slopes, i + 1, k, fk, running, breaks);
            breaks.pop();
        }
    }
}

/// Minimizes `max_j |y_j - f(x_j)|` over integer slopes in `0..=max_slope`,
/// at most `max_pieces` pieces and breakpoints on the sample abscissae.
/// Ties go to fewer pieces, then the lexicographically smallest slopes, then
/// the earliest breakpoints.
pub fn fit_points(points: &[(f64, f64)], max_pieces: usize, max_slope: u32) -> Result<FitResult> {
    if max_pieces == 0 {
        return Err(Error::invalid("at least one piece is required"));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.is_empty() || pts[0].0 != 0.0 {
        return Err(Error::invalid("samples must include x = 0"));
    }
    if pts.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::invalid("duplicate abscissae"));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let mut search = Search { xs: &xs, ys: &ys, best: f64::INFINITY, best_breaks: vec![] };
    let mut best_slopes: Vec<u32> = vec![];
    let dev0 = ys[0].abs();
    let max_pieces = max_pieces.min(xs.len().saturating_sub(1).max(1));
    for p in 1..=max_pieces {
        for slopes in (0..p).map(|_| 0..=max_slope).multi_cartesian_product() {
            if slopes.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            let before = search.best;
            if xs.len() == 1 {
                if dev0 < search.best - TIE {
                    search.best = dev0;
                    search.best_breaks.clear();
                    best_slopes = slopes.clone();
                }
                continue;
            }
            let mut breaks = Vec::new();
            search.place(&slopes, 0, 0, 0.0, dev0, &mut breaks);
            if search.best < before {
                best_slopes = slopes;
            }
        }
    }
    if best_slopes.is_empty() {
        return Err(Error::invalid("no feasible profile"));
    }
    let mut breakpoints = vec![0.0];
    breakpoints.extend(search.best_breaks.iter().map(|&k| xs[k]));
    let profile = PiecewiseLinearProfile::new(breakpoints, best_slopes)?;
    Ok(FitResult { profile, deviation: search.best, points: pts })
}

/// Fits `log |A^{mn}| - log |A^n|` against `log m` over every `m` with `mn`
/// in the series.
pub fn fit_profile(series: &GrowthSeries, n: u64, max_pieces: usize, max_slope: u32) -> Result<FitResult> {
    let base = series.require(n)? as f64;
    let points: Vec<(f64, f64)> = series
        .entries
        .iter()
        .filter(|(k, _)| *k >= n && k % n == 0)
        .map(|&(k, c)| (((k / n) as f64).ln(), (c as f64).ln() - base.ln()))
        .collect();
    fit_points(&points, max_pieces, max_slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eval_is_continuous() {
        let f = PiecewiseLinearProfile::new(vec![0.0, 1.0, 3.0], vec![2, 1, 0]).unwrap();
        assert_eq!(f.eval(0.0), 0.0);
        assert_eq!(f.eval(1.0), 2.0);
        assert_eq!(f.eval(2.0), 3.0);
        assert_eq!(f.eval(10.0), 4.0);
        assert!(PiecewiseLinearProfile::new(vec![0.5], vec![1]).is_err());
        assert!(PiecewiseLinearProfile::new(vec![0.0, 0.0], vec![1, 2]).is_err());
    }

    #[test]
    fn linear_interval_series() {
        let s = GrowthSeries::new("int", (1..=32).map(|m| (m, 2 * m + 1)).collect());
        let fit = fit_profile(&s, 1, 1, 4).unwrap();
        assert_eq!(fit.profile.slopes, vec![1]);
        assert!(fit.deviation <= 3f64.ln());
    }

    #[test]
    fn ties_prefer_fewer_pieces() {
        let pts: Vec<(f64, f64)> = (0..6).map(|i| (i as f64, 2.0 * i as f64)).collect();
        let fit = fit_points(&pts, 3, 4).unwrap();
        assert_eq!(fit.profile.slopes, vec![2]);
        assert_eq!(fit.deviation, 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_points(&[(1.0, 0.0)], 2, 2).is_err());
        assert!(fit_points(&[(0.0, 0.0)], 0, 2).is_err());
        let s = GrowthSeries::new("s", vec![(1, 3)]);
        assert!(fit_profile(&s, 2, 1, 1).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn exact_profiles_roundtrip(
            slopes in prop::collection::vec(0u32..5, 1..4),
            cuts in prop::collection::btree_set(1usize..11, 0..3),
        ) {
            let xs: Vec<f64> = (0..12).map(|i| i as f64 * 0.5).collect();
            let cuts: Vec<usize> = cuts.into_iter().take(slopes.len() - 1).collect();
            let slopes = &slopes[..cuts.len() + 1];
            let mut bps = vec![0.0];
            bps.extend(cuts.iter().map(|&c| xs[c]));
            let f = PiecewiseLinearProfile::new(bps, slopes.to_vec()).unwrap();
            let pts: Vec<(f64, f64)> = xs.iter().map(|&x| (x, f.eval(x))).collect();
            let fit = fit_points(&pts, 3, 4).unwrap();
            prop_assert!(fit.deviation < 1e-9);
            for &(x, y) in &pts {
                prop_assert!((fit.profile.eval(x) - y).abs() < 1e-9);
            }
        }
    }
}
