//! Named experiment configurations and their JSON file form.

use std::path::Path;

use cyclewalk::{UnitaryMatrix, VariantKind, WalkSpec, C64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_EVAL_EVERY: u64 = 100;
pub const DEFAULT_NOISE_STD: f64 = 0.01;

/// What each sample is trained towards.
#[derive(Clone, Debug, PartialEq)]
pub enum TargetKind {
    Qft,
    /// A fresh Haar unitary per sample.
    HaarUnitary,
    /// A fresh 2-outcome POVM per sample, cut from a Haar unitary on `C^2 ⊗ C^n`.
    HaarPovm,
    Custom(UnitaryMatrix),
}

impl TargetKind {
    pub fn name(&self) -> &'static str {
        match self {
            TargetKind::Qft => "qft",
            TargetKind::HaarUnitary => "haar-unitary",
            TargetKind::HaarPovm => "haar-povm",
            TargetKind::Custom(_) => "custom",
        }
    }
}

/// Whether the random site phases are drawn once per run or once per sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TablePolicy {
    Shared,
    Independent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPreset {
    pub name: String,
    pub spec: WalkSpec,
    pub target: TargetKind,
    pub steps: usize,
    pub eta: f64,
    pub samples: usize,
    pub variant: VariantKind,
    pub phases: TablePolicy,
    pub noise_std: f64,
    pub max_updates: u64,
    pub eval_every: u64,
    pub stop_distance: f64,
    pub seed: u64,
}

/// Update budget used when a config omits `max_updates`.
pub fn default_budget(sites: usize) -> u64 {
    if sites <= 3 {
        50_000
    } else {
        200_000
    }
}

pub const PRESET_NAMES: &[&str] = &[
    "qft-n2",
    "qft-n3",
    "qft-n4",
    "qft-n5",
    "haar-u4-T<k>",
    "overpara-T<k>",
    "large-n20",
    "fixed-phase",
    "xrotation",
    "phase-fail",
    "noisy-axis",
    "correlated",
    "povm-n4",
];

impl ExperimentPreset {
    fn base(
        name: &str,
        n: usize,
        target: TargetKind,
        steps: usize,
        eta: f64,
        samples: usize,
    ) -> Self {
        Self {
            name: name.to_string(),
            spec: WalkSpec::cycle(n).expect("preset site counts are valid"),
            target,
            steps,
            eta,
            samples,
            variant: VariantKind::Full,
            phases: TablePolicy::Shared,
            noise_std: DEFAULT_NOISE_STD,
            max_updates: default_budget(n),
            eval_every: DEFAULT_EVAL_EVERY,
            stop_distance: 0.0,
            seed: DEFAULT_SEED,
        }
    }

    fn with_variant(mut self, variant: VariantKind, phases: TablePolicy) -> Self {
        self.variant = variant;
        self.phases = phases;
        self
    }

    /// Looks up a built-in preset.
    pub fn named(name: &str) -> Result<Self> {
        let layered = |prefix: &str| -> Option<usize> {
            name.strip_prefix(prefix)
                .and_then(|k| k.parse().ok())
                .filter(|&k: &usize| k >= 1)
        };
        let preset = match name {
            "qft-n2" | "qft-n3" | "qft-n4" | "qft-n5" => {
                let n: usize = name[5..].parse().expect("matched above");
                let samples = if n <= 3 { 200 } else { 50 };
                Self::base(name, n, TargetKind::Qft, 2 * n * n, 0.05, samples)
            }
            "large-n20" => Self::base(name, 20, TargetKind::Qft, 500, 0.05, 10),
            "fixed-phase" => Self::base(name, 2, TargetKind::HaarUnitary, 20, 0.05, 200)
                .with_variant(VariantKind::FixedPhase, TablePolicy::Independent),
            "xrotation" => Self::base(name, 2, TargetKind::HaarUnitary, 20, 0.05, 200)
                .with_variant(VariantKind::XRotation, TablePolicy::Shared),
            "phase-fail" => Self::base(name, 2, TargetKind::HaarUnitary, 20, 0.05, 200)
                .with_variant(VariantKind::XRotation, TablePolicy::Independent),
            "noisy-axis" => Self::base(name, 2, TargetKind::Qft, 20, 0.1, 100)
                .with_variant(VariantKind::NoisyAxis, TablePolicy::Shared),
            "correlated" => Self::base(name, 2, TargetKind::HaarUnitary, 20, 0.05, 200)
                .with_variant(VariantKind::Correlated, TablePolicy::Shared),
            "povm-n4" => Self::base(name, 4, TargetKind::HaarPovm, 20, 0.01, 150),
            _ => {
                if let Some(steps) = layered("haar-u4-T") {
                    Self::base(name, 2, TargetKind::HaarUnitary, steps, 0.05, 200)
                } else if let Some(steps) = layered("overpara-T") {
                    Self::base(name, 2, TargetKind::Qft, steps, 0.01, 200)
                } else {
                    return Err(CliError::Validation(format!(
                        "unknown preset `{name}`; known presets: {}",
                        PRESET_NAMES.join(", ")
                    )));
                }
            }
        };
        Ok(preset)
    }

    pub fn from_config_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        let config: PresetConfig = serde_json::from_str(&text).map_err(CliError::parse(path))?;
        config.into_preset()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CliError::Validation(msg));
        if self.samples == 0 {
            return fail("sample count must be positive".into());
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return fail(format!("learning rate must be positive, got {}", self.eta));
        }
        if self.max_updates == 0 || self.eval_every == 0 {
            return fail("max_updates and eval_every must be positive".into());
        }
        if !(self.stop_distance.is_finite() && self.stop_distance >= 0.0) {
            return fail(format!(
                "stop distance must be non-negative, got {}",
                self.stop_distance
            ));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return fail(format!(
                "noise std must be non-negative, got {}",
                self.noise_std
            ));
        }
        if let TargetKind::Custom(v) = &self.target {
            if v.dim() != self.spec.dim() {
                return fail(format!(
                    "custom target is {0}×{0}, walk needs {1}×{1}",
                    v.dim(),
                    self.spec.dim()
                ));
            }
        }
        Ok(())
    }
}

/// JSON form of [`ExperimentPreset`]; unknown keys are rejected.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetConfig {
    pub name: String,
    pub n: usize,
    #[serde(default)]
    pub delta0: i64,
    #[serde(default = "one")]
    pub delta1: i64,
    pub target: TargetConfig,
    pub steps: usize,
    pub eta: f64,
    pub samples: usize,
    #[serde(default = "full")]
    pub variant: String,
    #[serde(default = "shared")]
    pub phases: TablePolicy,
    #[serde(default = "noise_std")]
    pub noise_std: f64,
    pub max_updates: Option<u64>,
    #[serde(default = "eval_every")]
    pub eval_every: u64,
    #[serde(default)]
    pub stop_distance: f64,
    #[serde(default = "seed")]
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetConfig {
    Qft,
    HaarUnitary,
    HaarPovm,
    /// Row-major `[re, im]` pairs.
    Custom(Vec<Vec<[f64; 2]>>),
}

fn one() -> i64 {
    1
}
fn full() -> String {
    VariantKind::Full.name().to_string()
}
fn shared() -> TablePolicy {
    TablePolicy::Shared
}
fn noise_std() -> f64 {
    DEFAULT_NOISE_STD
}
fn eval_every() -> u64 {
    DEFAULT_EVAL_EVERY
}
fn seed() -> u64 {
    DEFAULT_SEED
}

impl PresetConfig {
    pub fn into_preset(self) -> Result<ExperimentPreset> {
        let spec = WalkSpec::new(self.n, self.delta0, self.delta1)?;
        let variant: VariantKind = self.variant.parse()?;
        let target = match self.target {
            TargetConfig::Qft => TargetKind::Qft,
            TargetConfig::HaarUnitary => TargetKind::HaarUnitary,
            TargetConfig::HaarPovm => TargetKind::HaarPovm,
            TargetConfig::Custom(rows) => {
                let dim = rows.len();
                if rows.iter().any(|r| r.len() != dim) {
                    return Err(CliError::Validation("custom target must be square".into()));
                }
                let entries: Vec<C64> = rows
                    .iter()
                    .flatten()
                    .map(|&[re, im]| C64::new(re, im))
                    .collect();
                TargetKind::Custom(UnitaryMatrix::from_row_major(dim, &entries)?)
            }
        };
        let preset = ExperimentPreset {
            name: self.name,
            max_updates: self.max_updates.unwrap_or_else(|| default_budget(self.n)),
            spec,
            target,
            steps: self.steps,
            eta: self.eta,
            samples: self.samples,
            variant,
            phases: self.phases,
            noise_std: self.noise_std,
            eval_every: self.eval_every,
            stop_distance: self.stop_distance,
            seed: self.seed,
        };
        preset.validate()?;
        Ok(preset)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qft_presets_follow_the_layer_rule() {
        for (name, n, samples) in [
            ("qft-n2", 2, 200),
            ("qft-n3", 3, 200),
            ("qft-n4", 4, 50),
            ("qft-n5", 5, 50),
        ] {
            let p = ExperimentPreset::named(name).unwrap();
            assert_eq!(p.spec.sites(), n);
            assert_eq!(p.steps, 2 * n * n);
            assert_eq!(p.samples, samples);
            assert_eq!(p.eta, 0.05);
            assert_eq!(p.max_updates, if n <= 3 { 50_000 } else { 200_000 });
        }
    }

    #[test]
    fn layered_presets_parse_their_depth() {
        let p = ExperimentPreset::named("haar-u4-T4").unwrap();
        assert_eq!(
            (p.steps, p.samples, p.target.name()),
            (4, 200, "haar-unitary")
        );
        let p = ExperimentPreset::named("overpara-T10").unwrap();
        assert_eq!((p.steps, p.eta), (10, 0.01));
        assert!(ExperimentPreset::named("haar-u4-T0").is_err());
        assert!(ExperimentPreset::named("haar-u4-Tx").is_err());
    }

    #[test]
    fn every_listed_preset_resolves() {
        for name in PRESET_NAMES {
            let name = name.replace("<k>", "3");
            let p = ExperimentPreset::named(&name).unwrap();
            p.validate().unwrap();
        }
        assert!(matches!(
            ExperimentPreset::named("nope"),
            Err(CliError::Validation(_))
        ));
    }

    #[test]
    fn config_defaults_and_rejections() {
        let ok = r#"{"name":"c","n":2,"target":"qft","steps":3,"eta":0.05,"samples":2}"#;
        let p = serde_json::from_str::<PresetConfig>(ok)
            .unwrap()
            .into_preset()
            .unwrap();
        assert_eq!((p.spec.delta0(), p.spec.delta1()), (0, 1));
        assert_eq!(p.max_updates, 50_000);
        assert_eq!(p.variant, VariantKind::Full);

        let unknown =
            r#"{"name":"c","n":2,"target":"qft","steps":3,"eta":0.05,"samples":2,"colour":1}"#;
        assert!(serde_json::from_str::<PresetConfig>(unknown).is_err());

        let custom = r#"{"name":"c","n":1,"delta0":0,"delta1":1,"target":{"custom":[[[0,0],[1,0]],[[1,0],[0,0]]]},"steps":1,"eta":0.1,"samples":1}"#;
        let p = serde_json::from_str::<PresetConfig>(custom)
            .unwrap()
            .into_preset();
        // A single site is too small for a cycle.
        assert!(p.is_err());

        let bad_variant = r#"{"name":"c","n":2,"target":"qft","steps":3,"eta":0.05,"samples":2,"variant":"spiral"}"#;
        assert!(serde_json::from_str::<PresetConfig>(bad_variant)
            .unwrap()
            .into_preset()
            .is_err());
    }
}
