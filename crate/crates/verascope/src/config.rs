//! One TOML file drives a whole run: detector roster, calibration,
//! decision threshold, coordination scan, intent training, identity
//! linking, fold counts, and the synthetic generator. Every key has a
//! default, so an empty file is a valid config and partial files only
//! override what they name. `RunConfig::default().to_toml()` prints the
//! full schema with its defaults.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::aggregator::CalibrationSettings;
use crate::base_models::{
    AffectFlow, AffectFlowHyper, Detector, PublisherCredibility, UserCredibility,
};
use crate::coordination::intent::IntentHyper;
use crate::coordination::ScanSettings;
use crate::corpus::synth::SynthConfig;
use crate::crossplatform::LinkThresholds;
use crate::error::{Error, Result};
use crate::harness::PipelineSettings;

/// Detector roster. `enabled` fixes aggregation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelsConfig {
    pub enabled: Vec<String>,
    pub affect_flow: AffectFlowHyper,
}

impl Default for ModelsConfig {
    fn default() -> Self {
        Self {
            enabled: vec![
                "affect_flow".to_owned(),
                "publisher_credibility".to_owned(),
                "user_credibility".to_owned(),
            ],
            affect_flow: AffectFlowHyper::default(),
        }
    }
}

/// Verdict threshold and the window fractions at which calibration
/// snapshots are taken.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecisionConfig {
    pub tau: f64,
    pub snapshot_fractions: Vec<f64>,
}

impl Default for DecisionConfig {
    fn default() -> Self {
        let p = PipelineSettings::default();
        Self {
            tau: p.tau,
            snapshot_fractions: p.snapshot_fractions,
        }
    }
}

/// Cross-validation shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FoldsConfig {
    pub k: usize,
    pub seed: u64,
}

impl Default for FoldsConfig {
    fn default() -> Self {
        Self { k: 10, seed: 0 }
    }
}

/// Everything a run needs, grouped by stage.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub models: ModelsConfig,
    pub calibration: CalibrationSettings,
    pub decision: DecisionConfig,
    pub coordination: ScanSettings,
    pub intent: IntentHyper,
    pub linking: LinkThresholds,
    pub folds: FoldsConfig,
    pub synth: SynthConfig,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_toml(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    /// Parses TOML. Unknown top-level keys are rejected so a typo'd
    /// section fails loudly instead of silently using defaults.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string().trim().to_owned()))
    }

    pub fn to_toml(&self) -> String {
        // Only fails on unserializable shapes (e.g. non-string map keys),
        // which none of the sections contain.
        toml::to_string_pretty(self).expect("config serializes to TOML")
    }

    pub fn pipeline_settings(&self) -> PipelineSettings {
        PipelineSettings {
            calibration: self.calibration.clone(),
            tau: self.decision.tau,
            snapshot_fractions: self.decision.snapshot_fractions.clone(),
        }
    }

    /// Instantiates the enabled detectors in roster order. `seed`
    /// overrides the affect-flow hyperparameter seed when given, so one
    /// run-level seed can steer every stage.
    pub fn build_models(&self, seed: Option<u64>) -> Result<Vec<Box<dyn Detector>>> {
        if self.models.enabled.is_empty() {
            return Err(Error::InvalidConfig(
                "models.enabled must name at least one detector".to_owned(),
            ));
        }
        let mut out: Vec<Box<dyn Detector>> = Vec::new();
        for id in &self.models.enabled {
            match id.as_str() {
                "affect_flow" => {
                    let hyper = AffectFlowHyper {
                        seed: seed.unwrap_or(self.models.affect_flow.seed),
                        ..self.models.affect_flow.clone()
                    };
                    out.push(Box::new(AffectFlow::new(hyper)));
                }
                "publisher_credibility" => out.push(Box::new(PublisherCredibility::default())),
                "user_credibility" => out.push(Box::new(UserCredibility::default())),
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown detector `{other}` in models.enabled"
                    )))
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_toml() {
        let config = RunConfig::default();
        let text = config.to_toml();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(back, config);
    }

    #[test]
    fn empty_file_is_all_defaults() {
        let config = RunConfig::from_toml("").unwrap();
        assert_eq!(config, RunConfig::default());
    }

    #[test]
    fn partial_file_overrides_only_named_keys() {
        let text = "[decision]\ntau = 0.35\n\n[folds]\nk = 5\n\n[synth]\nn_docs = 60\n";
        let config = RunConfig::from_toml(text).unwrap();
        assert_eq!(config.decision.tau, 0.35);
        assert_eq!(config.folds.k, 5);
        assert_eq!(config.synth.n_docs, 60);
        assert_eq!(config.folds.seed, 0);
        assert_eq!(config.calibration, CalibrationSettings::default());
        assert_eq!(
            config.decision.snapshot_fractions,
            DecisionConfig::default().snapshot_fractions
        );
    }

    #[test]
    fn unknown_section_is_rejected() {
        let err = RunConfig::from_toml("[linkign]\nname_similarity = 0.9\n").unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)), "{err}");
    }

    #[test]
    fn build_models_follows_roster_order() {
        let mut config = RunConfig::default();
        let models = config.build_models(None).unwrap();
        let ids: Vec<&str> = models.iter().map(|m| m.model_id()).collect();
        assert_eq!(
            ids,
            ["affect_flow", "publisher_credibility", "user_credibility"]
        );

        config.models.enabled = vec!["user_credibility".to_owned()];
        let models = config.build_models(None).unwrap();
        assert_eq!(models.len(), 1);
        assert_eq!(models[0].model_id(), "user_credibility");
    }

    #[test]
    fn build_models_rejects_unknown_and_empty_rosters() {
        let mut config = RunConfig::default();
        config.models.enabled = vec!["affect_flw".to_owned()];
        assert!(matches!(
            config.build_models(None),
            Err(Error::InvalidConfig(_))
        ));
        config.models.enabled = vec![];
        assert!(matches!(
            config.build_models(None),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn default_toml_names_every_section() {
        let text = RunConfig::default().to_toml();
        for section in [
            "[models]",
            "[calibration]",
            "[decision]",
            "[coordination]",
            "[intent]",
            "[linking]",
            "[folds]",
            "[synth]",
        ] {
            assert!(text.contains(section), "missing {section} in:\n{text}");
        }
    }

    #[test]
    fn from_path_reports_missing_file_as_io() {
        let err = RunConfig::from_path(Path::new("/nonexistent/run.toml")).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }
}
