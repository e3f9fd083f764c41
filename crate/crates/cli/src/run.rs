//! Executes scenarios and collects their typed reports.

use nalgebra::DMatrix;
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use nilgrowth::group::unitri::RatUnitri;
use nilgrowth::group::Backend;
use nilgrowth::growth::{
    abelian_example_series, box_series, check_control_sandwich, fit_profile, loglog_slope, polynomial_growth_check,
    product_set_series, stability_constant, tropicalize, volume_polynomial, FitResult, GrowthSeries,
    PolynomialGrowthCheck, SandwichReport,
};
use nilgrowth::liealg::logs_of;
use nilgrowth::lo::{
    bass_guivarch_degree, bernoulli_concentration, growth_degree, mam2_experiment, mam_experiment,
    symmetrized_measure, symmetrized_walk_concentration, Mam2Report, MamReport,
};
use nilgrowth::measures::{
    convolution_growth_series, convolution_power, direct_theorem_check, donk_bounds, drift_gauge_eigen,
    random_donk_instance, random_gauge_instance, random_symmetric_measure, solve_drift_gauge, ConvolutionRow,
    DirectReport, FiniteMeasure, StochasticGauge, Value,
};
use nilgrowth::nilprog::{check_normal_form, NormContext, NormalFormReport};
use nilgrowth::rational::{format_rational, rat_str, to_f64};
use nilgrowth::{Error, ExtRational, GroupElement, GroupOracle, Result};

use crate::config::*;

/// Command-line overrides applied on top of a scenario config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub cap: Option<usize>,
    pub trials: Option<usize>,
}

/// Header plus rows of an artifact CSV.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(headers: &[&str]) -> Self {
        Table { headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct PlotSeries {
    pub series: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum Report {
    Grow(GrowReport),
    Profile(ProfileReport),
    Norm(NormReport),
    MeasureGrow(MeasureGrowReport),
    Donk(DonkReport),
    Gauge(GaugeReport),
    Lo(LoReport),
    Mam(MamReport),
    Mam2(Mam2Report),
    Bass(BassOutcome),
    Sandwich(SandwichReport),
}

/// Everything a scenario run produces.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub table: Table,
    pub plot: Vec<PlotSeries>,
    /// A state cap cut the computation short.
    pub truncated: bool,
}

struct Ctx {
    seed: Option<u64>,
    cap: usize,
    trials: Option<usize>,
}

impl Ctx {
    fn rng(&self) -> Result<ChaCha8Rng> {
        self.seed.map(nilgrowth::rng::seeded).ok_or_else(|| Error::invalid("randomized scenario needs a seed"))
    }

    fn trials(&self, configured: usize) -> usize {
        self.trials.unwrap_or(configured)
    }
}

pub fn effective_seed(cfg: &ScenarioConfig, ov: &Overrides) -> Option<u64> {
    ov.seed.or(cfg.seed)
}

pub fn run_scenario(cfg: &ScenarioConfig, ov: &Overrides) -> Result<Outcome> {
    let ctx = Ctx {
        seed: effective_seed(cfg, ov),
        cap: ov.cap.or(cfg.cap).unwrap_or(nilgrowth::DEFAULT_STATE_CAP),
        trials: ov.trials,
    };
    if cfg.scenario.is_randomized() && ctx.seed.is_none() {
        return Err(Error::invalid(format!("scenario {:?} is randomized and needs a seed", cfg.name)));
    }
    match &cfg.scenario {
        Scenario::Grow(c) => run_grow(c, &ctx),
        Scenario::Profile(c) => run_profile(c, &ctx),
        Scenario::Norm(c) => run_norm(c, &ctx),
        Scenario::MeasureGrow(c) => run_measure_grow(c, &ctx),
        Scenario::Donk(c) => run_donk(c, &ctx),
        Scenario::Gauge(c) => run_gauge(c, &ctx),
        Scenario::Lo(c) => run_lo(c, &ctx),
        Scenario::Mam(c) => run_mam(c, &ctx),
        Scenario::Mam2(c) => run_mam2(c, &ctx),
        Scenario::Bass(c) => run_bass(c),
        Scenario::Sandwich(c) => run_sandwich(c, &ctx),
    }
}

fn indices(spec: &IndexSpec) -> Result<Vec<u64>> {
    spec.values().map_err(Error::Invalid)
}

fn element_from_coords(oracle: &GroupOracle, v: &[i64]) -> Result<Option<GroupElement>> {
    let g = match oracle.backend() {
        Backend::Lattice { .. } => GroupElement::lattice(v),
        Backend::Cyclic { .. } => GroupElement::residues(v),
        Backend::Dihedral => match v {
            [s, b] if s.abs() == 1 => GroupElement::dihedral(*s as i8, *b),
            [_, _] => return Ok(None),
            _ => return Err(Error::invalid("dihedral boxes have two coordinates")),
        },
        Backend::IntUnitriangular { size } => GroupElement::int_matrix(*size, v.to_vec())?,
        Backend::Unitriangular { size } => GroupElement::rat_matrix(RatUnitri::from_upper(
            *size,
            v.iter().map(|&x| BigRational::from_integer(x.into())).collect(),
        )?),
        Backend::Cayley(_) => match v {
            [i] => GroupElement::Cayley(u32::try_from(*i).map_err(|_| Error::invalid("negative table index"))?),
            _ => return Err(Error::invalid("table boxes have one coordinate")),
        },
    };
    Ok(Some(oracle.canonicalize(g)?))
}

fn build_set(oracle: &GroupOracle, spec: &SetSpec, ctx: &Ctx) -> Result<Vec<GroupElement>> {
    let out = match spec {
        SetSpec::Elements(v) => v.iter().map(|g| oracle.canonicalize(g.clone())).collect::<Result<_>>()?,
        SetSpec::Counts(v) => {
            let mut out = Vec::new();
            for (k, g) in v {
                let g = oracle.canonicalize(g.clone())?;
                out.extend(std::iter::repeat_n(g, *k));
            }
            out
        }
        SetSpec::Random { count, radius } => {
            let mut rng = ctx.rng()?;
            (0..*count).map(|_| oracle.sample(&mut rng, *radius)).collect()
        }
        SetSpec::Box(ranges) => {
            if ranges.iter().any(|[lo, hi]| lo > hi) {
                return Err(Error::invalid("empty coordinate range"));
            }
            let total = ranges.iter().try_fold(1usize, |acc, [lo, hi]| acc.checked_mul((hi - lo + 1) as usize));
            match total {
                Some(t) if t <= ctx.cap => {}
                _ => return Err(Error::CapExceeded { cap: ctx.cap, reached: total.unwrap_or(usize::MAX) }),
            }
            let mut out = Vec::new();
            let mut cur: Vec<i64> = ranges.iter().map(|r| r[0]).collect();
            'odometer: loop {
                if let Some(g) = element_from_coords(oracle, &cur)? {
                    out.push(g);
                }
                for i in (0..cur.len()).rev() {
                    if cur[i] < ranges[i][1] {
                        cur[i] += 1;
                        continue 'odometer;
                    }
                    cur[i] = ranges[i][0];
                }
                break;
            }
            out
        }
    };
    if out.is_empty() {
        return Err(Error::invalid("element set is empty"));
    }
    Ok(out)
}

fn restrict(series: &mut GrowthSeries, ms: &[u64]) {
    series.entries.retain(|(m, _)| ms.binary_search(m).is_ok());
}

fn ln(x: u64) -> f64 {
    (x as f64).ln()
}

fn fit(series: &GrowthSeries, f: &Option<FitConfig>) -> Result<Option<FitResult>> {
    f.as_ref().map(|f| fit_profile(series, f.base, f.max_pieces, f.max_slope)).transpose()
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowReport {
    pub series: GrowthSeries,
    pub fit: Option<FitResult>,
    pub loglog_slope: Option<f64>,
    pub polynomial_check: Option<PolynomialGrowthCheck>,
    pub stability_constant: Option<f64>,
}

fn series_plot(series: &GrowthSeries, fit: &Option<(FitResult, u64)>) -> Vec<PlotSeries> {
    let mut plot = vec![PlotSeries {
        series: "log_size".into(),
        points: series.entries.iter().map(|&(m, s)| (m as f64, ln(s))).collect(),
    }];
    if let Some((f, base)) = fit {
        if let Some(b) = series.get(*base) {
            plot.push(PlotSeries {
                series: "fit".into(),
                points: series
                    .entries
                    .iter()
                    .filter(|(m, _)| m % base == 0)
                    .map(|&(m, _)| (m as f64, ln(b) + f.profile.eval(ln(m / base))))
                    .collect(),
            });
        }
    }
    plot
}

fn lenient<T>(truncated: bool, r: Result<Option<T>>) -> Result<Option<T>> {
    if truncated {
        Ok(r.ok().flatten())
    } else {
        r
    }
}

fn run_grow(c: &GrowConfig, ctx: &Ctx) -> Result<Outcome> {
    let ms = indices(&c.m)?;
    let series = match (&c.closed_form, &c.set) {
        (Some(ClosedForm::AbelianExample { n }), None) => abelian_example_series(*n, &ms)?,
        (Some(ClosedForm::Box { half_widths, moduli }), None) => box_series(half_widths, moduli, &ms)?,
        (None, Some(set)) => {
            let group = c.group.as_ref().ok_or_else(|| Error::invalid("an element set needs a group"))?;
            let oracle = group.build()?;
            let a = build_set(&oracle, set, ctx)?;
            let mut s = product_set_series(&oracle, &a, c.symmetrize, *ms.last().expect("nonempty"), ctx.cap)?;
            restrict(&mut s, &ms);
            s
        }
        _ => return Err(Error::invalid("give exactly one of `set` and `closed_form`")),
    };
    // A truncated series may be too short for the derived statistics; keep what is computable.
    let fit_result = lenient(series.truncated, fit(&series, &c.fit))?;
    let loglog = lenient(series.truncated, 
        c.loglog_window
            .map(|[lo, hi]| {
                let pts: Vec<(f64, f64)> = series
                    .entries
                    .iter()
                    .filter(|(m, _)| (lo..=hi).contains(m))
                    .map(|&(m, s)| (m as f64, s as f64))
                    .collect();
                loglog_slope(&pts)
            })
            .transpose(),
    )?;
    let poly = lenient(series.truncated, c.polynomial_check.as_ref().map(|p| polynomial_growth_check(&series, p.n, p.d)).transpose())?;
    let stability = stability_constant(&series).ok();

    let mut table = Table::new(&["m", "size", "log_m", "log_size"]);
    for &(m, s) in &series.entries {
        table.push(vec![m.to_string(), s.to_string(), ln(m).to_string(), ln(s).to_string()]);
    }
    let plot = series_plot(&series, &fit_result.clone().zip(c.fit.as_ref().map(|f| f.base)));
    let truncated = series.truncated;
    Ok(Outcome {
        report: Report::Grow(GrowReport {
            series,
            fit: fit_result,
            loglog_slope: loglog,
            polynomial_check: poly,
            stability_constant: stability,
        }),
        table,
        plot,
        truncated,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Empirical {
    pub series: GrowthSeries,
    pub fit: Option<FitResult>,
    /// `(m, |A^m| / V(m))`.
    pub ratios: Vec<(u64, f64)>,
    /// Largest factor by which the ratio departs from its value at the
    /// smallest `m`.
    pub ratio_band: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileReport {
    pub words: serde_json::Value,
    pub alpha: serde_json::Value,
    pub volume_polynomial: String,
    /// `(degree, coefficient)`.
    pub terms: Vec<(u32, String)>,
    pub slopes: Vec<u32>,
    /// Exact breakpoints after zero.
    pub breakpoints: Vec<String>,
    pub breakpoints_f64: Vec<f64>,
    pub offset: f64,
    pub empirical: Option<Empirical>,
}

fn run_profile(c: &ProfileConfig, ctx: &Ctx) -> Result<Outcome> {
    let oracle = c.group.build()?;
    let logs = logs_of(&oracle, &c.generators)?;
    let (words, alpha, v) = volume_polynomial(&logs, &c.lengths)?;
    let trop = tropicalize(&v);
    let f_pred = |m: u64| trop.offset + trop.profile.eval(ln(m));
    let mut plot = Vec::new();
    let (empirical, table) = match &c.empirical {
        Some(e) => {
            let ms = indices(&e.m)?;
            let a = build_set(&oracle, &e.set, ctx)?;
            let mut series = product_set_series(&oracle, &a, e.symmetrize, *ms.last().expect("nonempty"), ctx.cap)?;
            restrict(&mut series, &ms);
            let fit_result = fit(&series, &e.fit)?;
            let mut table = Table::new(&["m", "size", "volume", "ratio", "log_size", "f_pred"]);
            let mut ratios = Vec::new();
            for &(m, s) in &series.entries {
                let vm = v.eval(&BigRational::from_integer(m.into()));
                let r = s as f64 / to_f64(&vm);
                ratios.push((m, r));
                table.push(vec![
                    m.to_string(),
                    s.to_string(),
                    format_rational(&vm),
                    r.to_string(),
                    ln(s).to_string(),
                    f_pred(m).to_string(),
                ]);
            }
            let ratio_band = match ratios.first() {
                Some(&(_, r1)) => ratios.iter().map(|&(_, r)| (r / r1).max(r1 / r)).fold(1.0, f64::max),
                None => 1.0,
            };
            plot.push(PlotSeries { series: "log_size".into(), points: series.entries.iter().map(|&(m, s)| (m as f64, ln(s))).collect() });
            plot.push(PlotSeries { series: "f_pred".into(), points: series.entries.iter().map(|&(m, _)| (m as f64, f_pred(m))).collect() });
            (Some(Empirical { series, fit: fit_result, ratios, ratio_band }), table)
        }
        None => {
            let mut table = Table::new(&["piece", "start", "start_f64", "slope"]);
            for (i, &slope) in trop.profile.slopes.iter().enumerate() {
                let (start, start_f) = match i {
                    0 => ("0".to_string(), 0.0),
                    _ => (trop.breakpoints[i - 1].to_string(), trop.breakpoints[i - 1].to_f64()),
                };
                table.push(vec![i.to_string(), start, start_f.to_string(), slope.to_string()]);
            }
            (None, table)
        }
    };
    let truncated = empirical.as_ref().is_some_and(|e| e.series.truncated);
    let report = ProfileReport {
        words: words.to_json(),
        alpha: alpha.to_json(),
        volume_polynomial: v.to_string(),
        terms: v.terms().iter().map(|(c, d)| (*d, format_rational(c))).collect(),
        slopes: trop.profile.slopes.clone(),
        breakpoints: trop.breakpoints.iter().map(ToString::to_string).collect(),
        breakpoints_f64: trop.breakpoints.iter().map(|b| b.to_f64()).collect(),
        offset: trop.offset,
        empirical,
    };
    Ok(Outcome { report: Report::Profile(report), table, plot, truncated })
}

#[derive(Clone, Debug, Serialize)]
pub struct NormRow {
    pub element: GroupElement,
    pub p: Option<ExtRational>,
    pub hp: ExtRational,
    pub hpx: Option<ExtRational>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct AxiomSummary {
    pub norm: String,
    pub pairs: usize,
    pub identity_zero: bool,
    pub inverse_failures: usize,
    pub triangle_failures: usize,
    /// Pairs where `gh` lies beyond the enumerated radius.
    pub beyond_radius: usize,
    pub first_failure: Option<String>,
}

impl AxiomSummary {
    pub fn holds(&self) -> bool {
        self.identity_zero && self.inverse_failures == 0 && self.triangle_failures == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NormReport {
    #[serde(with = "rat_str")]
    pub t_max: BigRational,
    pub rows: Vec<NormRow>,
    pub axioms: Vec<AxiomSummary>,
    pub normal_form: Option<NormalFormReport>,
}

fn random_word<R: Rng>(oracle: &GroupOracle, alphabet: &[GroupElement], max_len: usize, rng: &mut R) -> Result<GroupElement> {
    let len = rng.random_range(0..=max_len);
    let mut g = oracle.identity();
    for _ in 0..len {
        g = oracle.mul(&g, &alphabet[rng.random_range(0..alphabet.len())])?;
    }
    Ok(g)
}

fn check_axioms(
    name: &str,
    oracle: &GroupOracle,
    pairs: &[(GroupElement, GroupElement)],
    t_max: &BigRational,
    norm: impl Fn(&GroupElement) -> Result<ExtRational>,
) -> Result<AxiomSummary> {
    let mut s = AxiomSummary {
        norm: name.into(),
        pairs: pairs.len(),
        identity_zero: norm(&oracle.identity())? == ExtRational::zero(),
        ..Default::default()
    };
    let radius = ExtRational::Finite(t_max.clone());
    for (g, h) in pairs {
        let (ng, nh) = (norm(g)?, norm(h)?);
        if norm(&oracle.inv(g)?)? != ng {
            s.inverse_failures += 1;
            s.first_failure.get_or_insert_with(|| format!("inverse at {g}"));
        }
        let ngh = norm(&oracle.mul(g, h)?)?;
        let sum = &ng + &nh;
        if ngh == ExtRational::Infinite && sum > radius {
            s.beyond_radius += 1;
        } else if ngh > sum {
            s.triangle_failures += 1;
            s.first_failure.get_or_insert_with(|| format!("triangle at ({g}, {h})"));
        }
    }
    Ok(s)
}

fn run_norm(c: &NormConfig, ctx: &Ctx) -> Result<Outcome> {
    let hp = c.progression.build()?;
    let oracle = hp.oracle().clone();
    let gens = hp.progression().generators().to_vec();
    let h_elems = hp.subgroup().elements().to_vec();
    let trivial = hp.subgroup().is_trivial();
    let norms = NormContext::new(hp, c.t_max.clone(), ctx.cap)?;
    let x = c.x.clone();

    let elements = c.elements.as_ref().map(|s| build_set(&oracle, s, ctx)).transpose()?.unwrap_or_default();
    let mut rows = Vec::with_capacity(elements.len());
    let mut table = Table::new(&["element", "norm_p", "norm_hp", "norm_hpx"]);
    let show = |v: &Option<ExtRational>| v.as_ref().map_or(String::new(), ToString::to_string);
    for g in elements {
        let p = if trivial { Some(norms.norm_p(&g)?) } else { None };
        let hpn = norms.norm_hp(&g)?;
        let hpx = x.as_ref().map(|x| norms.norm_hpx(&g, x)).transpose()?;
        table.push(vec![g.encode(), show(&p), hpn.to_string(), show(&hpx)]);
        rows.push(NormRow { element: g, p, hp: hpn, hpx });
    }

    let mut axioms = Vec::new();
    if let Some(rp) = &c.random_pairs {
        let mut rng = ctx.rng()?;
        let mut alphabet = gens.clone();
        for g in &gens {
            alphabet.push(oracle.inv(g)?);
        }
        alphabet.extend(x.iter().flatten().cloned());
        alphabet.extend(h_elems);
        let pairs = (0..ctx.trials(rp.pairs))
            .map(|_| Ok((random_word(&oracle, &alphabet, rp.word_length, &mut rng)?, random_word(&oracle, &alphabet, rp.word_length, &mut rng)?)))
            .collect::<Result<Vec<_>>>()?;
        if trivial {
            axioms.push(check_axioms("p", &oracle, &pairs, &c.t_max, |g| norms.norm_p(g))?);
        }
        axioms.push(check_axioms("hp", &oracle, &pairs, &c.t_max, |g| norms.norm_hp(g))?);
        if let Some(x) = &x {
            axioms.push(check_axioms("hpx", &oracle, &pairs, &c.t_max, |g| norms.norm_hpx(g, x))?);
        }
    }
    let normal_form = c.normal_form.as_ref().map(|cc| check_normal_form(norms.progression(), cc, ctx.cap)).transpose()?;

    let mut plot = Vec::new();
    if !rows.is_empty() && rows.iter().all(|r| shift_of(&r.element).is_some()) {
        plot.push(PlotSeries {
            series: "norm_hp".into(),
            points: rows.iter().filter_map(|r| Some((shift_of(&r.element)?, r.hp.to_f64()))).collect(),
        });
    }
    Ok(Outcome {
        report: Report::Norm(NormReport { t_max: c.t_max.clone(), rows, axioms, normal_form }),
        table,
        plot,
        truncated: false,
    })
}

/// One-dimensional coordinate used as the plot axis for norm tables.
fn shift_of(g: &GroupElement) -> Option<f64> {
    match g {
        GroupElement::Lattice(v) | GroupElement::Residues(v) if v.len() == 1 => Some(v[0] as f64),
        GroupElement::Dihedral { shift, .. } => Some(*shift as f64),
        _ => None,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureTrial {
    pub trial: usize,
    pub support: usize,
    pub rows: Vec<ConvolutionRow>,
    pub nondecreasing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureGrowReport {
    pub trials: Vec<MeasureTrial>,
    pub direct: Option<DirectReport>,
}

fn run_measure_grow(c: &MeasureGrowConfig, ctx: &Ctx) -> Result<Outcome> {
    let oracle = c.group.build()?;
    let mut measures = Vec::new();
    if let Some(m) = &c.measure {
        measures.push(m.build(&oracle)?);
    }
    if let Some(r) = &c.random {
        let mut rng = ctx.rng()?;
        for _ in 0..ctx.trials(r.trials) {
            measures.push(random_symmetric_measure(&oracle, &mut rng, r.pairs, r.radius)?);
        }
    }
    if measures.is_empty() {
        return Err(Error::invalid("give `measure` or `random`"));
    }
    if c.float {
        measures = measures.iter().map(FiniteMeasure::to_float).collect();
    }
    let mut trials = Vec::new();
    let mut table = Table::new(&["trial", "n", "l2_inv_sq", "linf", "support"]);
    let mut plot = Vec::new();
    for (i, mu) in measures.iter().enumerate() {
        let rows = convolution_growth_series(&oracle, mu, c.n_max, ctx.cap)?;
        let nondecreasing = rows.windows(2).all(|w| ge(&w[1].l2_inv_sq, &w[0].l2_inv_sq));
        for r in &rows {
            table.push(vec![i.to_string(), r.n.to_string(), value_str(&r.l2_inv_sq), value_str(&r.linf), r.support.to_string()]);
        }
        plot.push(PlotSeries { series: format!("l2_inv_sq/{i}"), points: rows.iter().map(|r| (r.n as f64, r.l2_inv_sq.to_f64())).collect() });
        plot.push(PlotSeries { series: format!("log_linf/{i}"), points: rows.iter().map(|r| (r.n as f64, r.linf.to_f64().ln())).collect() });
        trials.push(MeasureTrial { trial: i, support: mu.support_len(), rows, nondecreasing });
    }
    let direct = match &c.direct {
        Some(d) => {
            let mu = c.measure.as_ref().ok_or_else(|| Error::invalid("the direct check needs an explicit `measure`"))?;
            let hp = d.progression.build()?;
            let mu = mu.build(hp.oracle())?;
            let norms = NormContext::new(hp, d.t_max.clone(), ctx.cap)?;
            Some(direct_theorem_check(&norms, &mu, &d.x, d.n, ctx.cap)?)
        }
        None => None,
    };
    Ok(Outcome { report: Report::MeasureGrow(MeasureGrowReport { trials, direct }), table, plot, truncated: false })
}

fn ge(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Exact(x), Value::Exact(y)) => x >= y,
        _ => a.to_f64() >= b.to_f64(),
    }
}

fn value_str(v: &Value) -> String {
    match v {
        Value::Exact(r) => format_rational(r),
        Value::Float(x) => x.to_string(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DonkRow {
    pub trial: usize,
    pub group: String,
    pub supports: Vec<usize>,
    #[serde(with = "rat_str")]
    pub lhs: BigRational,
    #[serde(with = "rat_str")]
    pub mid: BigRational,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DonkReport {
    pub rows: Vec<DonkRow>,
}

fn run_donk(c: &DonkConfig, ctx: &Ctx) -> Result<Outcome> {
    let mut instances: Vec<(GroupOracle, Vec<FiniteMeasure>)> = Vec::new();
    for inst in &c.instances {
        let oracle = inst.group.build()?;
        let mus = inst.measures.iter().map(|m| m.build(&oracle)).collect::<Result<_>>()?;
        instances.push((oracle, mus));
    }
    if let Some(r) = &c.random {
        if r.moduli.is_empty() || r.n_max == 0 {
            return Err(Error::invalid("random instances need moduli and n_max >= 1"));
        }
        let mut rng = ctx.rng()?;
        for i in 0..ctx.trials(r.trials) {
            let n = rng.random_range(1..=r.n_max);
            instances.push(random_donk_instance(&mut rng, r.moduli[i % r.moduli.len()], n)?);
        }
    }
    let mut rows = Vec::new();
    let mut table = Table::new(&["trial", "group", "n", "lhs", "mid", "rhs", "holds"]);
    for (i, (oracle, mus)) in instances.iter().enumerate() {
        let t = donk_bounds(oracle, mus)?;
        let holds = t.lhs <= t.mid && to_f64(&t.mid) <= t.rhs + nilgrowth::measures::RHS_SLACK;
        let row = DonkRow {
            trial: i,
            group: oracle.name(),
            supports: mus.iter().map(FiniteMeasure::support_len).collect(),
            lhs: t.lhs,
            mid: t.mid,
            rhs: t.rhs,
            holds,
        };
        table.push(vec![
            i.to_string(),
            row.group.clone(),
            mus.len().to_string(),
            format_rational(&row.lhs),
            format_rational(&row.mid),
            row.rhs.to_string(),
            holds.to_string(),
        ]);
        rows.push(row);
    }
    Ok(Outcome { report: Report::Donk(DonkReport { rows }), table, plot: Vec::new(), truncated: false })
}

#[derive(Clone, Debug, Serialize)]
pub struct GaugeRow {
    pub trial: usize,
    pub gauge: StochasticGauge,
    /// Largest difference from the eigen-expansion solution.
    pub eigen_diff: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GaugeReport {
    pub rows: Vec<GaugeRow>,
}

fn matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::invalid("matrix must be square"));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

fn run_gauge(c: &GaugeConfig, ctx: &Ctx) -> Result<Outcome> {
    let mut instances = Vec::new();
    for inst in &c.instances {
        instances.push((matrix(&inst.p)?, matrix(&inst.a)?, inst.delta));
    }
    if let Some(r) = &c.random {
        if r.d_max < 2 {
            return Err(Error::invalid("d_max must be at least 2"));
        }
        let mut rng = ctx.rng()?;
        for _ in 0..ctx.trials(r.trials) {
            let d = rng.random_range(2..=r.d_max);
            let (p, a) = random_gauge_instance(&mut rng, d, r.delta);
            instances.push((p, a, Some(r.delta)));
        }
    }
    let mut rows = Vec::new();
    let mut table = Table::new(&["trial", "d", "residual", "eigen_diff", "condition", "gauge_constant", "t"]);
    for (i, (p, a, delta)) in instances.iter().enumerate() {
        let gauge = solve_drift_gauge(p, a, *delta)?;
        let eigen = drift_gauge_eigen(p, a)?;
        let eigen_diff = gauge.t.iter().zip(&eigen).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let t: Vec<String> = gauge.t.iter().map(ToString::to_string).collect();
        table.push(vec![
            i.to_string(),
            gauge.d.to_string(),
            gauge.residual.to_string(),
            eigen_diff.to_string(),
            gauge.condition.to_string(),
            gauge.gauge_constant.to_string(),
            t.join(";"),
        ]);
        rows.push(GaugeRow { trial: i, gauge, eigen_diff });
    }
    Ok(Outcome { report: Report::Gauge(GaugeReport { rows }), table, plot: Vec::new(), truncated: false })
}

#[derive(Clone, Debug, Serialize)]
pub struct RhoRow {
    pub vector: Vec<GroupElement>,
    #[serde(with = "rat_str")]
    pub rho: BigRational,
    pub witness: GroupElement,
}

#[derive(Clone, Debug, Serialize)]
pub struct WalkRow {
    pub trial: usize,
    pub elements: Vec<GroupElement>,
    pub steps: u64,
    #[serde(with = "rat_str")]
    pub walk: BigRational,
    pub convolution: Value,
    pub equal: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LoReport {
    pub rho: Vec<RhoRow>,
    pub walks: Vec<WalkRow>,
}

fn run_lo(c: &LoConfig, ctx: &Ctx) -> Result<Outcome> {
    let oracle = c.group.build()?;
    let mut table = Table::new(&["check", "index", "input", "steps", "value", "convolution", "equal"]);
    let mut rho = Vec::new();
    for (i, v) in c.vectors.iter().enumerate() {
        let v: Vec<GroupElement> = v.iter().map(|g| oracle.canonicalize(g.clone())).collect::<Result<_>>()?;
        let r = bernoulli_concentration(&oracle, &v, ctx.cap)?;
        table.push(vec!["rho".into(), i.to_string(), encode_all(&v), String::new(), format_rational(&r.rho), String::new(), String::new()]);
        rho.push(RhoRow { vector: v, rho: r.rho, witness: r.witness });
    }
    let mut walks = Vec::new();
    if let Some(w) = &c.walks {
        if w.size_max == 0 || w.steps_max == 0 {
            return Err(Error::invalid("walks need size_max and steps_max >= 1"));
        }
        let mut rng = ctx.rng()?;
        for i in 0..ctx.trials(w.trials) {
            let size = rng.random_range(1..=w.size_max);
            let a: Vec<GroupElement> = (0..size).map(|_| oracle.sample(&mut rng, w.radius)).collect();
            let steps = rng.random_range(1..=w.steps_max);
            let walk = symmetrized_walk_concentration(&oracle, &a, steps, ctx.cap)?;
            let conv = convolution_power(&oracle, &symmetrized_measure(&oracle, &a)?, steps, ctx.cap)?.linf();
            let equal = conv.exact() == Some(&walk);
            table.push(vec![
                "walk".into(),
                i.to_string(),
                encode_all(&a),
                steps.to_string(),
                format_rational(&walk),
                value_str(&conv),
                equal.to_string(),
            ]);
            walks.push(WalkRow { trial: i, elements: a, steps, walk, convolution: conv, equal });
        }
    }
    Ok(Outcome { report: Report::Lo(LoReport { rho, walks }), table, plot: Vec::new(), truncated: false })
}

fn encode_all(v: &[GroupElement]) -> String {
    serde_json::to_string(v).expect("elements serialize")
}

fn run_mam(c: &MamConfig, ctx: &Ctx) -> Result<Outcome> {
    let oracle = c.group.build()?;
    let a = build_set(&oracle, &c.set, ctx)?;
    let r = mam_experiment(&oracle, &a, &c.epsilon, c.fraction_target, c.order_cap, ctx.cap)?;
    let mut table = Table::new(&["n", "sup", "threshold", "hypothesis", "order", "fraction"]);
    let found = r.search.as_ref().and_then(|s| s.found.as_ref());
    table.push(vec![
        r.n.to_string(),
        format_rational(&r.sup),
        r.threshold.to_string(),
        r.hypothesis.to_string(),
        found.map_or(String::new(), |f| f.order.to_string()),
        found.map_or(String::new(), |f| f.fraction.to_string()),
    ]);
    Ok(Outcome { report: Report::Mam(r), table, plot: Vec::new(), truncated: false })
}

fn run_mam2(c: &Mam2Config, ctx: &Ctx) -> Result<Outcome> {
    let oracle = c.group.build()?;
    let mut mu = c.measure.build(&oracle)?;
    if c.float {
        mu = mu.to_float();
    }
    let r = mam2_experiment(&oracle, &mu, c.d, c.epsilon, c.n, ctx.cap)?;
    let mut table = Table::new(&["n", "linf", "threshold"]);
    for &(k, p) in &r.decay {
        table.push(vec![k.to_string(), p.to_string(), (k as f64).powf(-(c.d + 1.0 - c.epsilon) / 2.0).to_string()]);
    }
    let plot = vec![PlotSeries { series: "log_linf".into(), points: r.decay.iter().map(|&(k, p)| (k as f64, p.ln())).collect() }];
    Ok(Outcome { report: Report::Mam2(r), table, plot, truncated: false })
}

#[derive(Clone, Debug, Serialize)]
pub struct BassOutcome {
    pub group: String,
    pub degree: usize,
    /// `dim L_j` of the lower central series, for matrix groups.
    pub dims: Option<Vec<usize>>,
    pub volume_degree: Option<u32>,
    pub terminal_slope: Option<u32>,
}

fn run_bass(c: &BassConfig) -> Result<Outcome> {
    let oracle = c.group.build()?;
    let gens: Vec<GroupElement> = c.generators.iter().map(|g| oracle.canonicalize(g.clone())).collect::<Result<_>>()?;
    let (degree, dims) = if oracle.is_matrix() {
        let logs: Vec<_> = logs_of(&oracle, &gens)?.into_iter().filter(|x| !x.is_zero()).collect();
        if logs.is_empty() {
            (0, Some(Vec::new()))
        } else {
            let r = bass_guivarch_degree(&logs)?;
            (r.degree, Some(r.dims))
        }
    } else {
        (growth_degree(&oracle, &gens)?.unwrap_or(0), None)
    };
    let (volume_degree, terminal_slope) = match &c.lengths {
        Some(lengths) => {
            let (_, _, v) = volume_polynomial(&logs_of(&oracle, &gens)?, lengths)?;
            let trop = tropicalize(&v);
            (Some(v.degree()), trop.profile.slopes.last().copied())
        }
        None => (None, None),
    };
    let mut table = Table::new(&["group", "degree", "dims", "volume_degree", "terminal_slope"]);
    let opt = |x: Option<u32>| x.map_or(String::new(), |v| v.to_string());
    table.push(vec![
        oracle.name(),
        degree.to_string(),
        dims.as_ref().map_or(String::new(), |d| d.iter().map(ToString::to_string).collect::<Vec<_>>().join(";")),
        opt(volume_degree),
        opt(terminal_slope),
    ]);
    Ok(Outcome {
        report: Report::Bass(BassOutcome { group: oracle.name(), degree, dims, volume_degree, terminal_slope }),
        table,
        plot: Vec::new(),
        truncated: false,
    })
}

fn run_sandwich(c: &SandwichConfig, ctx: &Ctx) -> Result<Outcome> {
    let hp = c.progression.build()?;
    let oracle = hp.oracle().clone();
    let a = build_set(&oracle, &c.set, ctx)?;
    let ms = indices(&c.m)?;
    let r = check_control_sandwich(&oracle, &a, &hp, &c.x, c.n, c.c, &ms, ctx.cap)?;
    let mut table =
        Table::new(&["m", "hp_size", "power_size", "outer_size", "lower_holds", "upper_holds", "lower_witness", "upper_witness"]);
    let w = |g: &Option<GroupElement>| g.as_ref().map_or(String::new(), GroupElement::encode);
    for row in &r.rows {
        table.push(vec![
            row.m.to_string(),
            row.hp_size.to_string(),
            row.power_size.to_string(),
            row.outer_size.to_string(),
            row.lower_holds.to_string(),
            row.upper_holds.to_string(),
            w(&row.lower_witness),
            w(&row.upper_witness),
        ]);
    }
    Ok(Outcome { report: Report::Sandwich(r), table, plot: Vec::new(), truncated: false })
}
