//! Experiment configuration: schema, presets, overrides and validation.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::data::{BatchPlan, DippingParams, MnistParams, PeakingParams, Sampling, SourceSpec};
use crate::error::{Error, Result};
use crate::stats::{alpha_for_run_budget, check_alpha, clamp_alpha};
use crate::wrappers::{LambdaSelect, LearnerKind, LearnerSettings};

fn default_folds() -> usize {
    5
}

fn default_test_size() -> usize {
    10_000
}

fn default_runs() -> usize {
    25
}

fn default_name() -> String {
    "experiment".into()
}

fn default_learners() -> Vec<LearnerKind> {
    LearnerKind::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub seed: u64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    /// Rows in each run's synthetic test set. MNIST uses the official test
    /// files instead.
    #[serde(default = "default_test_size")]
    pub test_size: usize,
    #[serde(default = "default_learners")]
    pub learners: Vec<LearnerKind>,
    /// Significance level of MT_HT.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Alternative to `alpha`: desired probability that a whole MT_HT run is
    /// monotone, converted to a per-round level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone_confidence: Option<f64>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    /// Ridge penalty of the base learner.
    #[serde(default)]
    pub lambda: f64,
    /// Candidate penalties of LAMBDA_S; defaults depend on the source.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    pub plan: BatchPlan,
    pub source: SourceSpec,
}

/// Named configurations.
pub const PRESETS: [&str; 4] = ["first-experiment", "table1-peaking", "table1-dipping", "table1-mnist"];

impl ExperimentConfig {
    pub fn preset(name: &str) -> Option<Self> {
        let benchmark = |name: &str, source: SourceSpec| ExperimentConfig {
            name: name.into(),
            seed: 2020,
            runs: default_runs(),
            test_size: default_test_size(),
            learners: default_learners(),
            alpha: Some(0.05),
            monotone_confidence: None,
            folds: 5,
            lambda: 0.0,
            lambda_grid: None,
            out_dir: None,
            plan: BatchPlan {
                rounds: 150,
                train_per_round: 10,
                val_per_round: 40,
                sampling: Sampling::Stratified,
                append_validation: true,
            },
            source,
        };
        match name {
            "first-experiment" => Some(ExperimentConfig {
                learners: vec![LearnerKind::Standard, LearnerKind::MtSimple, LearnerKind::MtHt],
                plan: BatchPlan {
                    rounds: 150,
                    train_per_round: 4,
                    val_per_round: 16,
                    sampling: Sampling::Stratified,
                    append_validation: false,
                },
                ..benchmark(name, SourceSpec::Peaking(PeakingParams::new(200)))
            }),
            "table1-peaking" => Some(benchmark(name, SourceSpec::Peaking(PeakingParams::new(500)))),
            "table1-dipping" => Some(benchmark(name, SourceSpec::Dipping(DippingParams::default()))),
            "table1-mnist" => Some(ExperimentConfig {
                plan: BatchPlan {
                    rounds: 40,
                    train_per_round: 5,
                    val_per_round: 20,
                    sampling: Sampling::Random,
                    append_validation: true,
                },
                ..benchmark(name, SourceSpec::Mnist(MnistParams::default()))
            }),
            _ => None,
        }
    }

    /// Reads a TOML file, or expands a preset name when no such file exists,
    /// then applies `key=value` overrides.
    pub fn load(path_or_preset: &str, overrides: &[String]) -> Result<Self> {
        let path = Path::new(path_or_preset);
        let base: Value = if path.exists() {
            let text = std::fs::read_to_string(path)?;
            let table: toml::Table =
                toml::from_str(&text).map_err(|e| Error::config(path_or_preset, e.message().to_string()))?;
            serde_json::to_value(table)?
        } else if let Some(preset) = Self::preset(path_or_preset) {
            serde_json::to_value(preset)?
        } else {
            return Err(Error::config(
                path_or_preset,
                format!("no such file and not a preset (presets: {})", PRESETS.join(", ")),
            ));
        };
        Self::from_value(base, overrides)
    }

    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| Error::config("<config>", e.message().to_string()))?;
        Self::from_value(serde_json::to_value(table)?, overrides)
    }

    fn from_value(mut value: Value, overrides: &[String]) -> Result<Self> {
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let config: Self = serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            let reason = e.inner().to_string();
            let key = match named_field(&reason) {
                Some(field) if path == "." => field,
                Some(field) if path == field || path.ends_with(&format!(".{field}")) => path,
                Some(field) => format!("{path}.{field}"),
                None => path,
            };
            Error::config(key, reason)
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidArgument(e.to_string()))
    }

    /// Checks every cross-field constraint, naming the offending key.
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::config("runs", "must be at least 1"));
        }
        if self.test_size == 0 {
            return Err(Error::config("test_size", "must be at least 1"));
        }
        if self.learners.is_empty() {
            return Err(Error::config("learners", "select at least one learner"));
        }
        let distinct: BTreeSet<_> = self.learners.iter().collect();
        if distinct.len() != self.learners.len() {
            return Err(Error::config("learners", "learners must be distinct"));
        }
        self.plan.validate()?;
        self.source.validate()?;
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::config("lambda", "must be finite and nonnegative"));
        }
        if self.alpha.is_some() && self.monotone_confidence.is_some() {
            return Err(Error::config("alpha", "give either alpha or monotone_confidence, not both"));
        }
        if let Some(alpha) = self.alpha {
            check_alpha(alpha).map_err(|e| Error::config("alpha", e.to_string()))?;
        }
        if let Some(beta) = self.monotone_confidence {
            if !(beta > 0.0 && beta < 1.0) {
                return Err(Error::config("monotone_confidence", "must lie in (0, 1)"));
            }
        }
        if self.has(LearnerKind::MtHt) && self.alpha.is_none() && self.monotone_confidence.is_none() {
            return Err(Error::config("alpha", "required when MT_HT is selected"));
        }
        if self.plan.val_per_round == 0 {
            if let Some(k) = self.learners.iter().find(|k| k.needs_validation()) {
                return Err(Error::config(
                    "plan.val_per_round",
                    format!("{k} needs a nonempty validation split"),
                ));
            }
        }
        if self.has(LearnerKind::MtCv) {
            if self.folds < 2 {
                return Err(Error::config("folds", "need at least 2 folds"));
            }
            if self.folds > self.plan.batch_size() {
                return Err(Error::config(
                    "folds",
                    format!("{} folds cannot all receive rows from batches of {}", self.folds, self.plan.batch_size()),
                ));
            }
        }
        if self.has(LearnerKind::LambdaS) {
            let grid = self.lambda_grid();
            if grid.is_empty() || grid.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
                return Err(Error::config("lambda_grid", "must be a nonempty list of nonnegative penalties"));
            }
        }
        if let SourceSpec::Mnist(_) = self.source {
            if self.plan.rounds * self.plan.batch_size() > 60_000 {
                return Err(Error::config("plan", "MNIST batches exceed the 60000-row training pool"));
            }
        }
        Ok(())
    }

    pub fn has(&self, kind: LearnerKind) -> bool {
        self.learners.contains(&kind)
    }

    pub fn lambda_grid(&self) -> Vec<f64> {
        match (&self.lambda_grid, &self.source) {
            (Some(grid), _) => grid.clone(),
            (None, SourceSpec::Mnist(_)) => LambdaSelect::log_grid(-3.0, 3.0, 1.0),
            (None, _) => LambdaSelect::log_grid(-5.0, 5.0, 0.5),
        }
    }

    /// The per-round level of MT_HT, converting `monotone_confidence` when
    /// that is given. Levels above ½ are clamped with a warning.
    pub fn effective_alpha(&self) -> Result<Option<f64>> {
        match (self.alpha, self.monotone_confidence) {
            (Some(alpha), _) => Ok(Some(alpha)),
            (None, Some(beta)) => {
                let (alpha, clamped) = clamp_alpha(alpha_for_run_budget(beta, self.plan.rounds)?);
                if clamped {
                    log::warn!("monotone_confidence {beta} over {} rounds needs alpha > 0.5; using 0.5", self.plan.rounds);
                }
                Ok(Some(alpha))
            }
            (None, None) => Ok(None),
        }
    }

    pub fn learner_settings(&self, n_features: usize, class_count: usize) -> Result<LearnerSettings> {
        Ok(LearnerSettings {
            n_features,
            class_count,
            append_validation: self.plan.append_validation,
            lambda: self.lambda,
            alpha: self.effective_alpha()?,
            folds: self.folds,
            lambda_grid: self.lambda_grid(),
        })
    }

    /// Training rows seen by the standard learner after each round.
    pub fn training_sizes(&self) -> Vec<usize> {
        let per_round = if self.plan.append_validation {
            self.plan.batch_size()
        } else {
            self.plan.train_per_round
        };
        (1..=self.plan.rounds).map(|i| i * per_round).collect()
    }
}

fn named_field(message: &str) -> Option<String> {
    let rest = message
        .strip_prefix("unknown field `")
        .or_else(|| message.strip_prefix("missing field `"))?;
    Some(rest[..rest.find('`')?].to_string())
}

/// Applies `a.b.c=value`, parsing `value` as a TOML literal and falling back
/// to a bare string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(assignment, "override must look like key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    if key.is_empty() {
        return Err(Error::config(assignment, "empty key"));
    }
    let parsed = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .map(serde_json::to_value)
        .transpose()?
        .unwrap_or_else(|| Value::String(raw.to_string()));

    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        let map = node
            .as_object_mut()
            .ok_or_else(|| Error::config(key, format!("`{part}` is not inside a table")))?;
        node = map
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    node.as_object_mut()
        .ok_or_else(|| Error::config(key, "parent is not a table"))?
        .insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        for name in PRESETS {
            let p = ExperimentConfig::preset(name).unwrap();
            p.validate().unwrap();
            let text = p.to_toml().unwrap();
            assert_eq!(ExperimentConfig::from_toml_str(&text, &[]).unwrap(), p, "{name}");
        }
        let p = ExperimentConfig::preset("table1-peaking").unwrap();
        assert_eq!((p.plan.train_per_round, p.plan.val_per_round, p.plan.rounds), (10, 40, 150));
        assert_eq!(p.lambda_grid().len(), 21);
        assert_eq!(ExperimentConfig::preset("table1-mnist").unwrap().lambda_grid().len(), 7);
    }

    #[test]
    fn overrides_apply() {
        let c = ExperimentConfig::load("table1-dipping", &["runs=2".into(), "plan.rounds=7".into()]).unwrap();
        assert_eq!((c.runs, c.plan.rounds), (2, 7));
        let c = ExperimentConfig::load("table1-peaking", &["learners=[\"SL\",\"MT_CV\"]".into()]).unwrap();
        assert_eq!(c.learners, vec![LearnerKind::Standard, LearnerKind::MtCv]);
    }

    fn key_of(e: Error) -> String {
        match e {
            Error::Config { key, .. } => key,
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn errors_name_the_key() {
        let missing_alpha = ExperimentConfig::load("table1-peaking", &["alpha=0".into()]).unwrap_err();
        assert_eq!(key_of(missing_alpha), "alpha");

        let text = ExperimentConfig::preset("table1-peaking").unwrap().to_toml().unwrap();
        let text = text.replace("alpha = 0.05\n", "");
        assert_eq!(key_of(ExperimentConfig::from_toml_str(&text, &[]).unwrap_err()), "alpha");

        let e = ExperimentConfig::load("table1-peaking", &["plan.val_per_round=0".into()]).unwrap_err();
        assert_eq!(key_of(e), "plan.val_per_round");
        let e = ExperimentConfig::load("table1-peaking", &["plan.rounds=\"many\"".into()]).unwrap_err();
        assert_eq!(key_of(e), "plan.rounds");
        let e = ExperimentConfig::load("table1-peaking", &["bogus=1".into()]).unwrap_err();
        assert_eq!(key_of(e), "bogus");
        let e = ExperimentConfig::load("table1-peaking", &["plan.bogus=1".into()]).unwrap_err();
        assert_eq!(key_of(e), "plan.bogus");
        let e = ExperimentConfig::load("table1-peaking", &["folds=51".into()]).unwrap_err();
        assert_eq!(key_of(e), "folds");
    }

    #[test]
    fn confidence_converts_to_alpha() {
        let c = ExperimentConfig::load(
            "table1-peaking",
            &["alpha=0.05".into()],
        )
        .unwrap();
        assert_eq!(c.effective_alpha().unwrap(), Some(0.05));
        let mut c = c;
        c.alpha = None;
        c.monotone_confidence = Some(0.05);
        c.validate().unwrap();
        assert!((c.effective_alpha().unwrap().unwrap() - 0.019773438164508446).abs() < 1e-15);
        c.plan.rounds = 1;
        assert_eq!(c.effective_alpha().unwrap(), Some(0.5));
    }
}
