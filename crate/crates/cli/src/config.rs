use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    SfCdf,
    SfSample,
    Gumbel1d,
    GumbelMd,
    PolysimCrosscheck,
    CoveringCrosscheck,
    RegimesTable,
    AppendixVerify,
    VolumeRatio,
}

impl Kind {
    pub const ALL: [Kind; 9] = [
        Kind::SfCdf,
        Kind::SfSample,
        Kind::Gumbel1d,
        Kind::GumbelMd,
        Kind::PolysimCrosscheck,
        Kind::CoveringCrosscheck,
        Kind::RegimesTable,
        Kind::AppendixVerify,
        Kind::VolumeRatio,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Kind::SfCdf => "sf-cdf",
            Kind::SfSample => "sf-sample",
            Kind::Gumbel1d => "gumbel-1d",
            Kind::GumbelMd => "gumbel-md",
            Kind::PolysimCrosscheck => "polysim-crosscheck",
            Kind::CoveringCrosscheck => "covering-crosscheck",
            Kind::RegimesTable => "regimes-table",
            Kind::AppendixVerify => "appendix-verify",
            Kind::VolumeRatio => "volume-ratio",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// L(d) = c·d^a·(ln d)^b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLog {
    pub c: f64,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
}

impl PowerLog {
    pub fn eval(&self, d: f64) -> f64 {
        self.c * d.powf(self.a) * d.ln().powf(self.b)
    }
}

/// How L = ln(λκ_d) is obtained for each dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Intensity {
    /// Fixed L at every dimension.
    Explicit { l: f64 },
    /// Fixed mean count λκ_d.
    MeanCount { mean: f64 },
    Subcritical(PowerLog),
    /// L(d) = x·d + y.
    Critical {
        x: f64,
        #[serde(default)]
        y: f64,
    },
    Supercritical(PowerLog),
    /// λκ_d = (d/(2x))^{d/2}, the volume-ratio critical scaling.
    VolumeCritical { x: f64 },
}

impl Intensity {
    pub fn l_at(&self, d: f64) -> f64 {
        match *self {
            Intensity::Explicit { l } => l,
            Intensity::MeanCount { mean } => mean.ln(),
            Intensity::Subcritical(f) | Intensity::Supercritical(f) => f.eval(d),
            Intensity::Critical { x, y } => x * d + y,
            Intensity::VolumeCritical { x } => 0.5 * d * (d / (2.0 * x)).ln(),
        }
    }

    /// Whether the regime follows from a recipe in d rather than a fixed value.
    pub fn is_recipe(&self) -> bool {
        !matches!(self, Intensity::Explicit { .. } | Intensity::MeanCount { .. })
    }
}

fn default_m() -> u32 {
    2
}

fn default_reps() -> usize {
    10_000
}

fn default_dirs() -> usize {
    32
}

fn default_w() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    /// Dimension ladder; a single dimension is a ladder of length one.
    pub d: Vec<u64>,
    pub intensity: Intensity,
    #[serde(default = "default_m")]
    pub m: u32,
    #[serde(default)]
    pub tau: Vec<f64>,
    /// Levels r for sf-cdf and covering-crosscheck; sf-cdf defaults to 101 points on [0,1].
    #[serde(default)]
    pub r: Vec<f64>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    /// Directions per cloud for volume-ratio.
    #[serde(default = "default_dirs")]
    pub dirs: usize,
    /// Radius inflation w for appendix-verify.
    #[serde(default = "default_w")]
    pub w: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<String>,
}

fn bad(field: &str, msg: impl Into<String>) -> CliError {
    CliError::Config { field: field.to_string(), msg: msg.into() }
}

impl ExperimentConfig {
    pub fn new(kind: Kind, d: Vec<u64>, intensity: Intensity) -> Self {
        ExperimentConfig {
            kind,
            d,
            intensity,
            m: default_m(),
            tau: Vec::new(),
            r: Vec::new(),
            reps: default_reps(),
            dirs: default_dirs(),
            w: default_w(),
            seed: 0,
            out: None,
        }
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| bad("config", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.reps == 0 {
            return Err(bad("reps", "replication count must be at least 1"));
        }
        if self.dirs == 0 {
            return Err(bad("dirs", "direction count must be at least 1"));
        }
        if !(self.w > 0.0 && self.w.is_finite()) {
            return Err(bad("w", "w must be positive"));
        }
        if self.d.is_empty() {
            return Err(bad("d", "at least one dimension is required"));
        }
        if self.d.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("d", "dimension ladder must be strictly increasing"));
        }
        if self.d[0] < 2 {
            return Err(bad("d", "dimensions must be at least 2"));
        }
        if self.m < 2 {
            return Err(bad("m", "m must be at least 2"));
        }
        if self.r.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(bad("r", "levels must lie in [0,1]"));
        }
        if self.tau.iter().any(|t| !t.is_finite()) {
            return Err(bad("tau", "tau values must be finite"));
        }
        match self.intensity {
            Intensity::MeanCount { mean } if !(mean > 0.0) => {
                return Err(bad("intensity", "mean count must be positive"))
            }
            Intensity::Critical { x, .. } | Intensity::VolumeCritical { x } if !(x > 0.0) => {
                return Err(bad("intensity", "critical x must be positive"))
            }
            _ => {}
        }
        for &d in &self.d {
            if !self.intensity.l_at(d as f64).is_finite() {
                return Err(bad("intensity", format!("L is not finite at d = {d}")));
            }
        }
        Ok(())
    }
}
