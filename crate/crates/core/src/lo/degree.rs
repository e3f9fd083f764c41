//! Bass-Guivarc'h degrees and the decay experiment for return
//! probabilities.

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Backend, GroupElement, GroupOracle};
use crate::growth::loglog_slope;
use crate::liealg::linalg::{Echelon, Vector};
use crate::liealg::{logs_of, NilMatrix};
use crate::measures::{convolve, FiniteMeasure, Value};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BassReport {
    /// `dim L_j` for `j = 1, 2, ...` down to the last nonzero term.
    pub dims: Vec<usize>,
    pub degree: usize,
}

fn span_of(vs: &[NilMatrix]) -> (Echelon, Vec<NilMatrix>) {
    let mut e = Echelon::new();
    let mut basis = Vec::new();
    for v in vs {
        if e.insert(v.upper()) {
            basis.push(v.clone());
        }
    }
    (e, basis)
}

fn k_of(gens: &[NilMatrix]) -> Result<usize> {
    let k = gens.first().map_or(0, NilMatrix::size);
    if gens.iter().any(|g| g.size() != k) {
        return Err(Error::NotUnitriangular("generators of different sizes".into()));
    }
    Ok(k)
}

/// `sum_j j (dim L_j - dim L_{j+1})` for the lower central series of the
/// rational Lie algebra generated by `gens`.
pub fn bass_guivarch_degree(gens: &[NilMatrix]) -> Result<BassReport> {
    k_of(gens)?;
    // Lie closure of the span of the generators.
    let (mut span, mut basis) = span_of(gens);
    let mut i = 0;
    while i < basis.len() {
        for j in 0..i {
            let c = basis[i].bracket(&basis[j]);
            if span.insert(c.upper()) {
                basis.push(c);
            }
        }
        i += 1;
    }
    let algebra = basis;
    let mut dims = Vec::new();
    let mut current = algebra.clone();
    while !current.is_empty() {
        dims.push(current.len());
        let brackets: Vec<NilMatrix> = algebra.iter().flat_map(|x| current.iter().map(move |y| x.bracket(y))).collect();
        current = span_of(&brackets).1;
    }
    let degree = dims
        .iter()
        .enumerate()
        .map(|(j, &d)| (j + 1) * (d - dims.get(j + 1).copied().unwrap_or(0)))
        .sum();
    Ok(BassReport { dims, degree })
}

/// Rank of the span of lattice vectors, the growth degree of the subgroup
/// they generate.
pub fn lattice_degree(gens: &[GroupElement]) -> Result<usize> {
    let vs: Vec<Vector> = gens
        .iter()
        .map(|g| match g {
            GroupElement::Lattice(v) => Ok(v.iter().map(|&x| BigRational::from_integer(x.into())).collect()),
            other => Err(Error::invalid(format!("{other} is not a lattice vector"))),
        })
        .collect::<Result<_>>()?;
    Ok(crate::liealg::linalg::rank(&vs))
}

/// Growth degree of the group generated by `gens`, where it is computable.
pub fn growth_degree(oracle: &GroupOracle, gens: &[GroupElement]) -> Result<Option<usize>> {
    match oracle.backend() {
        Backend::Lattice { .. } => lattice_degree(gens).map(Some),
        Backend::IntUnitriangular { .. } | Backend::Unitriangular { .. } => {
            let logs = logs_of(oracle, gens)?;
            let nonzero: Vec<NilMatrix> = logs.into_iter().filter(|x| !x.is_zero()).collect();
            if nonzero.is_empty() {
                return Ok(Some(0));
            }
            bass_guivarch_degree(&nonzero).map(|r| Some(r.degree))
        }
        Backend::Cyclic { .. } | Backend::Cayley(_) => Ok(Some(0)),
        Backend::Dihedral => {
            let translation = gens.iter().any(|g| matches!(g, GroupElement::Dihedral { sign: 1, shift } if *shift != 0));
            let two_reflections = {
                let r: Vec<i64> = gens.iter().filter_map(|g| match g {
                    GroupElement::Dihedral { sign: -1, shift } => Some(*shift),
                    _ => None,
                }).collect();
                r.iter().any(|s| *s != r[0])
            };
            Ok(Some(usize::from(translation || two_reflections)))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Mam2Report {
    pub n: u64,
    pub d: f64,
    pub epsilon: f64,
    pub linf: Value,
    /// `n^{-(d + 1 - epsilon)/2}`.
    pub threshold: f64,
    pub hypothesis: bool,
    /// Growth degree of the group generated by the support.
    pub degree: Option<usize>,
    /// `degree <= d` when the hypothesis holds.
    pub consistent: Option<bool>,
    /// `(k, ||mu^{*k}||_inf)` for `k = 1..=n`.
    pub decay: Vec<(u64, f64)>,
    /// Least-squares log-log slope of the decay over the second half.
    pub decay_slope: Option<f64>,
}

pub fn mam2_experiment(
    oracle: &GroupOracle,
    mu: &FiniteMeasure,
    d: f64,
    epsilon: f64,
    n: u64,
    cap: usize,
) -> Result<Mam2Report> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    if !mu.is_symmetric(oracle)? {
        return Err(Error::NotSymmetric("step measure".into()));
    }
    let mut acc = mu.clone();
    let mut decay = Vec::with_capacity(n as usize);
    for k in 1..=n {
        if k > 1 {
            acc = convolve(oracle, &acc, mu)?;
        }
        if acc.support_len() > cap {
            return Err(Error::CapExceeded { cap, reached: acc.support_len() });
        }
        decay.push((k, acc.linf().to_f64()));
    }
    let linf = acc.linf();
    let threshold = (n as f64).powf(-(d + 1.0 - epsilon) / 2.0);
    let hypothesis = linf.to_f64() >= threshold;
    let degree = growth_degree(oracle, &mu.support())?;
    let consistent = degree.map(|deg| !hypothesis || deg as f64 <= d);
    let tail: Vec<(f64, f64)> = decay
        .iter()
        .filter(|(k, _)| *k * 2 > n)
        .map(|&(k, p)| (k as f64, p))
        .collect();
    let decay_slope = loglog_slope(&tail).ok();
    Ok(Mam2Report { n, d, epsilon, linf, threshold, hypothesis, degree, consistent, decay, decay_slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::unitri::RatUnitri;
    use crate::liealg::{log_unitri, exp_unitri};
    use crate::rational::rat;
    use crate::rng::seeded;
    use rand::Rng;

    fn e(k: usize, i: usize, j: usize) -> NilMatrix {
        NilMatrix::elementary(k, i, j)
    }

    #[test]
    fn worked_degrees() {
        for d in 1..=4 {
            let gens: Vec<_> = (2..=d + 1).map(|j| e(d + 1, 1, j)).collect();
            assert_eq!(bass_guivarch_degree(&gens).unwrap().degree, d);
        }
        let h = bass_guivarch_degree(&[e(3, 1, 2), e(3, 2, 3)]).unwrap();
        assert_eq!((h.dims.clone(), h.degree), (vec![3, 1], 4));
        let u = bass_guivarch_degree(&[e(4, 1, 2), e(4, 2, 3), e(4, 3, 4)]).unwrap();
        assert_eq!((u.dims.clone(), u.degree), (vec![6, 3, 1], 10));
    }

    #[test]
    fn conjugation_invariance() {
        let mut rng = seeded(9);
        for _ in 0..20 {
            let k = 4;
            let c = RatUnitri::from_upper(k, (0..6).map(|_| rat(rng.random_range(-5..=5), rng.random_range(1..=3))).collect()).unwrap();
            let ci = c.inv().unwrap();
            let gens: Vec<NilMatrix> = (0..rng.random_range(1..=3))
                .map(|_| NilMatrix::from_upper(k, (0..6).map(|_| rat(rng.random_range(-3..=3), 1)).collect()).unwrap())
                .collect();
            let conj: Vec<NilMatrix> = gens
                .iter()
                .map(|x| log_unitri(&c.mul(&exp_unitri(x)).unwrap().mul(&ci).unwrap()))
                .collect();
            assert_eq!(bass_guivarch_degree(&gens).unwrap(), bass_guivarch_degree(&conj).unwrap());
        }
    }

    #[test]
    fn lazy_walk_on_integers() {
        let z = GroupOracle::lattice(1);
        let mu = FiniteMeasure::from_weights(vec![
            (GroupElement::lattice(&[-1]), 1),
            (GroupElement::lattice(&[0]), 2),
            (GroupElement::lattice(&[1]), 1),
        ])
        .unwrap();
        let r = mam2_experiment(&z, &mu, 1.0, 0.5, 100, 10_000).unwrap();
        assert!(r.hypothesis);
        assert_eq!(r.degree, Some(1));
        assert_eq!(r.consistent, Some(true));
        assert!((r.decay_slope.unwrap() + 0.5).abs() < 0.05);
        let delta = FiniteMeasure::delta(z.identity());
        let r = mam2_experiment(&z, &delta, 0.0, 0.5, 10, 100).unwrap();
        assert_eq!((r.linf.to_f64(), r.degree), (1.0, Some(0)));
    }
}
