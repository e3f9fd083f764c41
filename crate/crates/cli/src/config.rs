//! Scenario configuration files.

use std::path::Path;

use num_rational::BigRational;
use serde::Deserialize;

use nilgrowth::group::GroupSpec;
use nilgrowth::measures::MeasureSpec;
use nilgrowth::nilprog::ProgressionSpec;
use nilgrowth::rational::{rat_str, rat_vec};
use nilgrowth::GroupElement;

use crate::error::CliError;

/// One named scenario.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Cap on enumerated states, overriding the library default.
    #[serde(default)]
    pub cap: Option<usize>,
    pub scenario: Scenario,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    Grow(GrowConfig),
    Profile(ProfileConfig),
    Norm(NormConfig),
    MeasureGrow(MeasureGrowConfig),
    Donk(DonkConfig),
    Gauge(GaugeConfig),
    Lo(LoConfig),
    Mam(MamConfig),
    Mam2(Mam2Config),
    Bass(BassConfig),
    Sandwich(SandwichConfig),
}

impl Scenario {
    pub fn kind(&self) -> &'static str {
        match self {
            Scenario::Grow(_) => "grow",
            Scenario::Profile(_) => "profile",
            Scenario::Norm(_) => "norm",
            Scenario::MeasureGrow(_) => "measure-grow",
            Scenario::Donk(_) => "donk",
            Scenario::Gauge(_) => "gauge",
            Scenario::Lo(_) => "lo",
            Scenario::Mam(_) => "mam",
            Scenario::Mam2(_) => "mam2",
            Scenario::Bass(_) => "bass",
            Scenario::Sandwich(_) => "sandwich",
        }
    }

    /// Whether the scenario draws random numbers.
    pub fn is_randomized(&self) -> bool {
        match self {
            Scenario::Grow(c) => c.set.as_ref().is_some_and(SetSpec::is_random),
            Scenario::Profile(c) => c.empirical.as_ref().is_some_and(|e| e.set.is_random()),
            Scenario::Norm(c) => c.random_pairs.is_some() || c.elements.as_ref().is_some_and(SetSpec::is_random),
            Scenario::MeasureGrow(c) => c.random.is_some(),
            Scenario::Donk(c) => c.random.is_some(),
            Scenario::Gauge(c) => c.random.is_some(),
            Scenario::Lo(c) => c.walks.is_some(),
            Scenario::Mam(c) => c.set.is_random(),
            Scenario::Mam2(_) | Scenario::Bass(_) => false,
            Scenario::Sandwich(c) => c.set.is_random(),
        }
    }
}

/// A finite list (or multiset) of group elements.
#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Elements(Vec<GroupElement>),
    /// Every element whose encoding coordinates lie in the given inclusive
    /// ranges. For the dihedral backend the coordinates are (sign, shift).
    Box(Vec<[i64; 2]>),
    /// Multiset given by multiplicities.
    Counts(Vec<(usize, GroupElement)>),
    /// `count` draws from the backend sampler.
    Random { count: usize, radius: i64 },
}

impl SetSpec {
    pub fn is_random(&self) -> bool {
        matches!(self, SetSpec::Random { .. })
    }
}

/// A set of positive indices.
#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum IndexSpec {
    List(Vec<u64>),
    /// Inclusive range.
    Range([u64; 2]),
    /// Rounded `from * 2^(k / per_doubling)` up to `to`, deduplicated.
    Geometric { from: u64, to: u64, per_doubling: u32 },
}

impl IndexSpec {
    pub fn values(&self) -> Result<Vec<u64>, String> {
        let mut v = match self {
            IndexSpec::List(v) => v.clone(),
            IndexSpec::Range([a, b]) => (*a..=*b).collect(),
            IndexSpec::Geometric { from, to, per_doubling } => {
                if *from == 0 || *per_doubling == 0 {
                    return Err("geometric grid needs from >= 1 and per_doubling >= 1".into());
                }
                let mut out = Vec::new();
                for k in 0.. {
                    let x = (*from as f64 * 2f64.powf(k as f64 / *per_doubling as f64)).round() as u64;
                    if x > *to {
                        break;
                    }
                    out.push(x);
                }
                out
            }
        };
        v.sort_unstable();
        v.dedup();
        if v.is_empty() || v[0] == 0 {
            return Err("index set must be nonempty and positive".into());
        }
        Ok(v)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    #[serde(default = "default_pieces")]
    pub max_pieces: usize,
    #[serde(default = "default_slope")]
    pub max_slope: u32,
    /// Base exponent `n` in `log |A^{mn}| - log |A^n|`.
    #[serde(default = "one")]
    pub base: u64,
}

fn default_pieces() -> usize {
    3
}

fn default_slope() -> u32 {
    6
}

fn one() -> u64 {
    1
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ClosedForm {
    /// `{-N..N} x {-N^2..N^2}` in `(Z/N^3)^2`.
    AbelianExample { n: u64 },
    Box { half_widths: Vec<u64>, moduli: Vec<u64> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyCheckConfig {
    pub n: u64,
    pub d: u32,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowConfig {
    #[serde(default)]
    pub group: Option<GroupSpec>,
    #[serde(default)]
    pub set: Option<SetSpec>,
    #[serde(default)]
    pub symmetrize: bool,
    #[serde(default)]
    pub closed_form: Option<ClosedForm>,
    pub m: IndexSpec,
    #[serde(default)]
    pub fit: Option<FitConfig>,
    /// Inclusive window `[lo, hi]` for the log-log slope.
    #[serde(default)]
    pub loglog_window: Option<[u64; 2]>,
    #[serde(default)]
    pub polynomial_check: Option<PolyCheckConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmpiricalConfig {
    pub set: SetSpec,
    #[serde(default)]
    pub symmetrize: bool,
    pub m: IndexSpec,
    #[serde(default)]
    pub fit: Option<FitConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub group: GroupSpec,
    pub generators: Vec<GroupElement>,
    #[serde(with = "rat_vec")]
    pub lengths: Vec<BigRational>,
    #[serde(default)]
    pub empirical: Option<EmpiricalConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomPairs {
    pub pairs: usize,
    /// Pairs are random words of at most this length in the generators,
    /// their inverses, the elements of `x` and the subgroup.
    pub word_length: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormConfig {
    pub progression: ProgressionSpec,
    #[serde(default)]
    pub x: Option<Vec<GroupElement>>,
    #[serde(default = "default_t_max", with = "rat_str")]
    pub t_max: BigRational,
    #[serde(default)]
    pub elements: Option<SetSpec>,
    #[serde(default)]
    pub random_pairs: Option<RandomPairs>,
    /// Constant `C` for a normal-form check of the progression.
    #[serde(default, with = "opt_rat")]
    pub normal_form: Option<BigRational>,
}

fn default_t_max() -> BigRational {
    BigRational::from_integer(2.into())
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomMeasures {
    pub trials: usize,
    /// Number of `{g, g^-1}` pairs in each support.
    pub pairs: usize,
    pub radius: i64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectConfig {
    pub progression: ProgressionSpec,
    pub x: Vec<GroupElement>,
    pub n: u64,
    #[serde(default = "default_t_max", with = "rat_str")]
    pub t_max: BigRational,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureGrowConfig {
    pub group: GroupSpec,
    #[serde(default)]
    pub measure: Option<MeasureSpec>,
    #[serde(default)]
    pub random: Option<RandomMeasures>,
    pub n_max: u64,
    /// Convolve in floating point instead of exact arithmetic.
    #[serde(default)]
    pub float: bool,
    #[serde(default)]
    pub direct: Option<DirectConfig>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DonkInstance {
    pub group: GroupSpec,
    pub measures: Vec<MeasureSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomDonk {
    pub trials: usize,
    pub n_max: usize,
    /// Moduli cycled through by trial; `null` stands for `Z`.
    pub moduli: Vec<Option<i64>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DonkConfig {
    #[serde(default)]
    pub instances: Vec<DonkInstance>,
    #[serde(default)]
    pub random: Option<RandomDonk>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeInstance {
    pub p: Vec<Vec<f64>>,
    pub a: Vec<Vec<f64>>,
    #[serde(default)]
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomGauge {
    pub trials: usize,
    pub d_max: usize,
    pub delta: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeConfig {
    #[serde(default)]
    pub instances: Vec<GaugeInstance>,
    #[serde(default)]
    pub random: Option<RandomGauge>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomWalks {
    pub trials: usize,
    pub size_max: usize,
    pub steps_max: u64,
    pub radius: i64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoConfig {
    pub group: GroupSpec,
    #[serde(default)]
    pub vectors: Vec<Vec<GroupElement>>,
    /// Cross-checks the symmetrized walk against convolution powers.
    #[serde(default)]
    pub walks: Option<RandomWalks>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MamConfig {
    pub group: GroupSpec,
    pub set: SetSpec,
    #[serde(with = "rat_str")]
    pub epsilon: BigRational,
    #[serde(default)]
    pub fraction_target: Option<f64>,
    #[serde(default = "default_order_cap")]
    pub order_cap: usize,
}

fn default_order_cap() -> usize {
    512
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mam2Config {
    pub group: GroupSpec,
    pub measure: MeasureSpec,
    pub d: f64,
    pub epsilon: f64,
    pub n: u64,
    #[serde(default)]
    pub float: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BassConfig {
    pub group: GroupSpec,
    pub generators: Vec<GroupElement>,
    /// When given, the volume polynomial degree is reported alongside.
    #[serde(default, with = "opt_rat_vec")]
    pub lengths: Option<Vec<BigRational>>,
}

mod opt_rat {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer};

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigRational>, D::Error> {
        #[derive(Deserialize)]
        struct W(#[serde(with = "nilgrowth::rational::rat_str")] BigRational);
        Ok(Option::<W>::deserialize(d)?.map(|w| w.0))
    }
}

mod opt_rat_vec {
    use num_rational::BigRational;
    use serde::{Deserialize, Deserializer};

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<BigRational>>, D::Error> {
        #[derive(Deserialize)]
        struct W(#[serde(with = "nilgrowth::rational::rat_vec")] Vec<BigRational>);
        Ok(Option::<W>::deserialize(d)?.map(|w| w.0))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandwichConfig {
    pub progression: ProgressionSpec,
    pub set: SetSpec,
    pub x: Vec<GroupElement>,
    pub n: u64,
    pub c: u64,
    pub m: IndexSpec,
}

/// Reads a config file holding one scenario object or a nonempty array of
/// them.
pub fn load(path: &Path) -> Result<Vec<ScenarioConfig>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text).map_err(|msg| CliError::Config { path: path.display().to_string(), msg })
}

pub fn parse(text: &str) -> Result<Vec<ScenarioConfig>, String> {
    if text.trim().is_empty() {
        return Err("empty config".into());
    }
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let configs: Vec<ScenarioConfig> = match value {
        serde_json::Value::Array(_) => serde_json::from_value(value).map_err(|e| e.to_string())?,
        serde_json::Value::Object(ref m) if m.is_empty() => return Err("empty config".into()),
        _ => vec![serde_json::from_value(value).map_err(|e| e.to_string())?],
    };
    if configs.is_empty() {
        return Err("config holds no scenarios".into());
    }
    for c in &configs {
        if c.name.is_empty() || !c.name.chars().all(|ch| ch.is_ascii_alphanumeric() || "_-.".contains(ch)) {
            return Err(format!("scenario name {:?} must be nonempty and use only [A-Za-z0-9_.-]", c.name));
        }
    }
    Ok(configs)
}
