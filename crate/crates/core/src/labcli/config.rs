use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use super::LabError;
use crate::polyfun::MAX_FACTORIAL_ORDER;
use crate::riemann::TagRule;
use crate::tentmap::DEFAULT_DEPTH;

/// Which part of `[-1, 1]` an experiment integrates over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Interval {
    /// `[-1, 1]`
    Full,
    /// `[0, 1]`
    Positive,
    /// `[-1, 0]`
    Negative,
}

impl Interval {
    pub fn bounds(self) -> (f64, f64) {
        match self {
            Interval::Full => (-1.0, 1.0),
            Interval::Positive => (0.0, 1.0),
            Interval::Negative => (-1.0, 0.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Interval::Full => "full",
            Interval::Positive => "positive",
            Interval::Negative => "negative",
        }
    }
}

/// Parameters shared by all experiment commands.
///
/// Loaded from a TOML file (every key optional) and then overridden by flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub xres: usize,
    pub tres: usize,
    pub samples: usize,
    pub schedule: Vec<usize>,
    pub tags: String,
    pub seed: u64,
    pub depth: usize,
    pub tol: f64,
    pub interval: Interval,
    pub a: f64,
    pub c: f64,
    pub b: f64,
    pub n: usize,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            xres: 200,
            tres: 100,
            samples: 65,
            schedule: (1..=10).map(|k| 1 << k).collect(),
            tags: "midpoint".to_string(),
            seed: 0,
            depth: DEFAULT_DEPTH,
            tol: 1e-3,
            interval: Interval::Positive,
            a: 0.25,
            c: 0.5,
            b: 1.0,
            n: 1 << 12,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, LabError> {
        toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = fs::read_to_string(path).map_err(|source| LabError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        ExperimentConfig::from_toml_str(&text)
    }

    /// Config file (if any) with flag overrides applied, then validated.
    pub fn resolve(flags: &Overrides) -> Result<Self, LabError> {
        let mut cfg = match &flags.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        flags.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn tag_rule(&self) -> Result<TagRule, LabError> {
        TagRule::parse_with_seed(&self.tags, self.seed).map_err(LabError::from)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let fail = |msg: String| Err(LabError::Config(msg));
        if self.xres < 2 || self.tres < 2 {
            return fail(format!("xres and tres must be >= 2, got {} and {}", self.xres, self.tres));
        }
        if self.samples < 2 {
            return fail(format!("samples must be >= 2, got {}", self.samples));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return fail(format!("tol must be positive, got {}", self.tol));
        }
        if self.depth == 0 || self.depth > MAX_FACTORIAL_ORDER {
            return fail(format!("depth must be in 1..={MAX_FACTORIAL_ORDER}, got {}", self.depth));
        }
        if self.schedule.is_empty() || self.schedule[0] == 0 {
            return fail("schedule must be nonempty with positive entries".to_string());
        }
        if self.schedule.windows(2).any(|w| w[1] <= w[0]) {
            return fail("schedule must be strictly increasing".to_string());
        }
        if self.n == 0 {
            return fail("n must be positive".to_string());
        }
        self.tag_rule()?;
        Ok(())
    }
}

/// Command-line flags; each one overrides the matching config key.
#[derive(Args, Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    /// TOML config file; flags take precedence over its keys
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of x subintervals on [-1, 1] for the surface grid
    #[arg(long)]
    pub xres: Option<usize>,
    /// Number of t subintervals on [0, 1] for the surface grid
    #[arg(long)]
    pub tres: Option<usize>,
    /// Points per sampled graph in frame files
    #[arg(long)]
    pub samples: Option<usize>,
    /// Comma-separated resolutions N
    #[arg(long, value_delimiter = ',')]
    pub schedule: Option<Vec<usize>>,
    /// Tag rule: left, right, midpoint or random
    #[arg(long)]
    pub tags: Option<String>,
    /// Seed for the random tag rule
    #[arg(long)]
    pub seed: Option<u64>,
    /// Truncation depth of the general construction
    #[arg(long)]
    pub depth: Option<usize>,
    /// Tolerance for Cauchy and additivity verdicts
    #[arg(long)]
    pub tol: Option<f64>,
    /// Integration interval for frames and converge
    #[arg(long, value_enum)]
    pub interval: Option<Interval>,
    /// Left endpoint for chasles
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Split point for chasles
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Right endpoint for chasles
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Half-interval resolution for chasles
    #[arg(long)]
    pub n: Option<usize>,
    /// Output file (or directory for frames)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { cfg.$field = v.clone(); })*
            };
        }
        take!(xres, tres, samples, schedule, tags, seed, depth, tol, interval, a, c, b, n);
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn toml_then_flags() {
        let cfg = ExperimentConfig::from_toml_str(
            "xres = 8\ntres = 4\nschedule = [2, 4, 8]\ntags = \"random\"\nseed = 9\ninterval = \"full\"\n",
        )
        .unwrap();
        assert_eq!(cfg.xres, 8);
        assert_eq!(cfg.interval, Interval::Full);
        assert_eq!(cfg.tag_rule().unwrap(), TagRule::Random(9));
        let mut cfg2 = cfg.clone();
        Overrides {
            xres: Some(16),
            schedule: Some(vec![1, 3]),
            ..Default::default()
        }
        .apply(&mut cfg2);
        assert_eq!(cfg2.xres, 16);
        assert_eq!(cfg2.tres, 4);
        assert_eq!(cfg2.schedule, vec![1, 3]);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ExperimentConfig::from_toml_str("bogus = 1").is_err());
        let bad = [
            ExperimentConfig { xres: 1, ..Default::default() },
            ExperimentConfig { tol: 0.0, ..Default::default() },
            ExperimentConfig { depth: 171, ..Default::default() },
            ExperimentConfig { schedule: vec![4, 2], ..Default::default() },
            ExperimentConfig { schedule: vec![], ..Default::default() },
            ExperimentConfig { tags: "upper".into(), ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }
}
