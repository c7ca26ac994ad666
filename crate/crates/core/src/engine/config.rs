use std::fmt;
use std::str::FromStr;

use crate::domain::SliceSpec;
use crate::error::{Error, Result};
use crate::ordering::JkTargetPolicy;
use crate::ranking::BoundaryRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Jk,
    ModJk,
    Ranking,
    RankingWindowed,
}

impl Protocol {
    pub fn is_ordering(self) -> bool {
        matches!(self, Protocol::Jk | Protocol::ModJk)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    CyclonVariant,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Concurrency {
    None,
    Half,
    Full,
}

/// Whether view payloads are refreshed to the neighbors' current state
/// after each view update, or keep the copies made during shuffles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ViewFreshness {
    /// Fresh without concurrency, shuffle copies otherwise.
    #[default]
    Auto,
    Fresh,
    Snapshot,
}

impl ViewFreshness {
    pub fn refresh(self, concurrency: Concurrency) -> bool {
        match self {
            ViewFreshness::Auto => concurrency == Concurrency::None,
            ViewFreshness::Fresh => true,
            ViewFreshness::Snapshot => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChurnMode {
    None,
    /// One event per cycle during the first `burst_cycles` cycles.
    Burst,
    /// One event every `regular_period` cycles.
    Regular,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChurnSchedule {
    pub mode: ChurnMode,
    /// Fraction of the population replaced per event.
    pub rate: f64,
    pub burst_cycles: u64,
    pub regular_period: u64,
    /// Probability that a leaver is the lowest-attribute node rather than a
    /// uniformly random one.
    pub correlation: f64,
}

impl Default for ChurnSchedule {
    fn default() -> Self {
        Self {
            mode: ChurnMode::None,
            rate: 0.001,
            burst_cycles: 200,
            regular_period: 10,
            correlation: 1.0,
        }
    }
}

impl ChurnSchedule {
    pub fn burst() -> Self {
        Self {
            mode: ChurnMode::Burst,
            ..Self::default()
        }
    }

    pub fn regular() -> Self {
        Self {
            mode: ChurnMode::Regular,
            ..Self::default()
        }
    }

    pub fn is_event(&self, cycle: u64) -> bool {
        match self.mode {
            ChurnMode::None => false,
            ChurnMode::Burst => cycle >= 1 && cycle <= self.burst_cycles,
            ChurnMode::Regular => cycle >= 1 && cycle.is_multiple_of(self.regular_period),
        }
    }

    /// `ceil(rate * n)`, robust to the rounding of `rate`.
    pub fn replaced(&self, n: usize) -> usize {
        let exact = self.rate * n as f64;
        let nearest = exact.round();
        if (exact - nearest).abs() < 1e-9 {
            nearest as usize
        } else {
            exact.ceil() as usize
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttributeDistribution {
    /// Distinct integers drawn uniformly from `[low, high)`.
    Uniform { low: u64, high: u64 },
    /// Distinct integers `floor(X)` with `X` exponential of the given mean.
    Exponential { mean: f64 },
}

impl Default for AttributeDistribution {
    fn default() -> Self {
        AttributeDistribution::Uniform {
            low: 0,
            high: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub n: usize,
    pub view_size: usize,
    pub slices: SliceSpec,
    pub protocol: Protocol,
    pub sampler: Sampler,
    pub concurrency: Concurrency,
    pub churn: ChurnSchedule,
    pub cycles: u64,
    pub seed: u64,
    pub attributes: AttributeDistribution,
    pub jk_target: JkTargetPolicy,
    /// Send to a random neighbor when no neighbor is misplaced.
    pub idle_send: bool,
    pub view_freshness: ViewFreshness,
    pub boundary_rule: BoundaryRule,
    /// Window capacity for `RankingWindowed`; `None` means `20 * view_size`.
    pub window: Option<usize>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            n: 1000,
            view_size: 20,
            slices: SliceSpec::equal_width(10).expect("valid"),
            protocol: Protocol::ModJk,
            sampler: Sampler::CyclonVariant,
            concurrency: Concurrency::None,
            churn: ChurnSchedule::default(),
            cycles: 500,
            seed: 1,
            attributes: AttributeDistribution::default(),
            jk_target: JkTargetPolicy::default(),
            idle_send: false,
            view_freshness: ViewFreshness::Auto,
            boundary_rule: BoundaryRule::default(),
            window: None,
        }
    }
}

/// Keys accepted by [`SimulationConfig::set`].
pub const CONFIG_KEYS: &[&str] = &[
    "n",
    "view_size",
    "slices",
    "boundaries",
    "protocol",
    "sampler",
    "concurrency",
    "churn",
    "churn_rate",
    "burst_cycles",
    "regular_period",
    "churn_correlation",
    "cycles",
    "seed",
    "attributes",
    "jk_target",
    "idle_send",
    "view_freshness",
    "boundary_rule",
    "window",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("{key}: cannot parse {value:?}")))
}

impl SimulationConfig {
    pub fn window_capacity(&self) -> usize {
        self.window.unwrap_or(20 * self.view_size)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.view_size < 1 {
            return bad("view_size must be at least 1".into());
        }
        if self.n <= self.view_size {
            return bad(format!(
                "n ({}) must exceed view_size ({})",
                self.n, self.view_size
            ));
        }
        if self.cycles < 1 {
            return bad("cycles must be at least 1".into());
        }
        let churn = &self.churn;
        if !(0.0..1.0).contains(&churn.rate) {
            return bad(format!("churn_rate {} outside [0, 1)", churn.rate));
        }
        if !(0.0..=1.0).contains(&churn.correlation) {
            return bad(format!(
                "churn_correlation {} outside [0, 1]",
                churn.correlation
            ));
        }
        if churn.mode == ChurnMode::Regular && churn.regular_period == 0 {
            return bad("regular_period must be at least 1".into());
        }
        if self.window == Some(0) {
            return bad("window must be at least 1".into());
        }
        match self.attributes {
            AttributeDistribution::Uniform { low, high } => {
                if high <= low || high - low < 2 * self.n as u64 {
                    return bad(format!(
                        "attribute range [{low}, {high}) too small for {} distinct values",
                        self.n
                    ));
                }
            }
            AttributeDistribution::Exponential { mean } => {
                if mean.is_nan() || mean < self.n as f64 {
                    return bad(format!("exponential mean {mean} must be at least n"));
                }
            }
        }
        Ok(())
    }

    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "n" => self.n = parse(key, v)?,
            "view_size" | "c" => self.view_size = parse(key, v)?,
            "slices" => self.slices = SliceSpec::equal_width(parse(key, v)?)?,
            "boundaries" => {
                let bounds = v
                    .split(',')
                    .map(|b| parse::<f64>(key, b))
                    .collect::<Result<Vec<_>>>()?;
                self.slices = SliceSpec::new(bounds)?;
            }
            "protocol" => self.protocol = v.parse()?,
            "sampler" => self.sampler = v.parse()?,
            "concurrency" => self.concurrency = v.parse()?,
            "churn" => self.churn.mode = v.parse()?,
            "churn_rate" => self.churn.rate = parse(key, v)?,
            "burst_cycles" => self.churn.burst_cycles = parse(key, v)?,
            "regular_period" => self.churn.regular_period = parse(key, v)?,
            "churn_correlation" => self.churn.correlation = parse(key, v)?,
            "cycles" => self.cycles = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "attributes" => self.attributes = v.parse()?,
            "jk_target" => {
                self.jk_target = match v {
                    "misplaced" => JkTargetPolicy::AmongMisplaced,
                    "any" => JkTargetPolicy::AnyNeighbor,
                    _ => return Err(Error::InvalidConfig(format!("jk_target: unknown {v:?}"))),
                }
            }
            "idle_send" => self.idle_send = parse(key, v)?,
            "view_freshness" => self.view_freshness = v.parse()?,
            "boundary_rule" => {
                self.boundary_rule = match v {
                    "neighbor" => BoundaryRule::PerNeighbor,
                    "own" => BoundaryRule::OwnBoundary,
                    _ => {
                        return Err(Error::InvalidConfig(format!(
                            "boundary_rule: unknown {v:?}"
                        )))
                    }
                }
            }
            "window" => {
                self.window = match v {
                    "default" => None,
                    _ => Some(parse(key, v)?),
                }
            }
            other => return Err(Error::InvalidConfig(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Every field as `(key, value)`, in a form [`set`](Self::set) accepts.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let slices = if self.slices.is_equal_width() {
            ("slices", self.slices.count().to_string())
        } else {
            let b: Vec<String> = self.slices.bounds().iter().map(f64::to_string).collect();
            ("boundaries", b.join(","))
        };
        vec![
            ("n", self.n.to_string()),
            ("view_size", self.view_size.to_string()),
            slices,
            ("protocol", self.protocol.to_string()),
            ("sampler", self.sampler.to_string()),
            ("concurrency", self.concurrency.to_string()),
            ("churn", self.churn.mode.to_string()),
            ("churn_rate", self.churn.rate.to_string()),
            ("burst_cycles", self.churn.burst_cycles.to_string()),
            ("regular_period", self.churn.regular_period.to_string()),
            ("churn_correlation", self.churn.correlation.to_string()),
            ("cycles", self.cycles.to_string()),
            ("seed", self.seed.to_string()),
            ("attributes", self.attributes.to_string()),
            (
                "jk_target",
                match self.jk_target {
                    JkTargetPolicy::AmongMisplaced => "misplaced",
                    JkTargetPolicy::AnyNeighbor => "any",
                }
                .to_string(),
            ),
            ("idle_send", self.idle_send.to_string()),
            ("view_freshness", self.view_freshness.to_string()),
            (
                "boundary_rule",
                match self.boundary_rule {
                    BoundaryRule::PerNeighbor => "neighbor",
                    BoundaryRule::OwnBoundary => "own",
                }
                .to_string(),
            ),
            (
                "window",
                self.window
                    .map_or_else(|| "default".to_string(), |w| w.to_string()),
            ),
        ]
    }
}

macro_rules! text_enum {
    ($ty:ident, $what:literal, $($variant:ident => $text:literal),+ $(,)?) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($ty::$variant => $text),+ })
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $($text => Ok($ty::$variant),)+
                    other => Err(Error::InvalidConfig(format!(concat!("unknown ", $what, " {:?}"), other))),
                }
            }
        }
    };
}

text_enum!(Protocol, "protocol", Jk => "jk", ModJk => "modjk", Ranking => "ranking", RankingWindowed => "ranking_windowed");
text_enum!(Sampler, "sampler", CyclonVariant => "cyclon", Uniform => "uniform");
text_enum!(Concurrency, "concurrency", None => "none", Half => "half", Full => "full");
text_enum!(ViewFreshness, "view freshness", Auto => "auto", Fresh => "fresh", Snapshot => "snapshot");
text_enum!(ChurnMode, "churn mode", None => "none", Burst => "burst", Regular => "regular");

impl fmt::Display for AttributeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeDistribution::Uniform { low, high } => write!(f, "uniform:{low}:{high}"),
            AttributeDistribution::Exponential { mean } => write!(f, "exponential:{mean}"),
        }
    }
}

impl FromStr for AttributeDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["uniform", low, high] => Ok(AttributeDistribution::Uniform {
                low: parse("attributes", low)?,
                high: parse("attributes", high)?,
            }),
            ["exponential", mean] => Ok(AttributeDistribution::Exponential {
                mean: parse("attributes", mean)?,
            }),
            _ => Err(Error::InvalidConfig(format!(
                "attributes: unknown distribution {s:?}"
            ))),
        }
    }
}
