//! Run configuration. Precedence: command-line flag, then config file, then default.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use varspeech_core::domain::{EntityKind, FieldSpec};
use varspeech_core::generation::ProviderMode;
use varspeech_core::providers::{fnv1a, ProviderProfile};
use varspeech_core::validation::ValidationMode;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationSection {
    pub num_values: Option<usize>,
    pub target_per_pair: Option<usize>,
    pub max_rounds: Option<usize>,
    pub variations: Option<Vec<String>>,
    pub validation: Option<ValidationMode>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub batch_size: Option<usize>,
    pub iterations: Option<usize>,
    pub pool_size: Option<usize>,
    pub mutation_count: Option<usize>,
    pub base_instruction: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub mode: Option<ProviderMode>,
    pub output_dir: Option<PathBuf>,
    pub parallelism: Option<usize>,
    pub kind: Option<String>,
    /// Field specs overriding the built-in ones, matched by kind.
    pub fields: Vec<FieldSpec>,
    /// Extra variation types merged into the built-in registry.
    pub taxonomy: Option<PathBuf>,
    pub split: Option<[f64; 3]>,
    pub generation: GenerationSection,
    pub optimizer: OptimizerSection,
    pub profiles: Vec<ProviderProfile>,
    pub chat_profile: Option<String>,
    pub embed_profile: Option<String>,
}

impl RunConfig {
    /// TOML first; JSON if the file ends in `.json` or TOML parsing fails.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let config: RunConfig = if is_json {
            serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        } else {
            match toml::from_str(&text) {
                Ok(c) => c,
                Err(toml_err) => serde_json::from_str(&text)
                    .map_err(|_| CliError::Data(format!("{}: {toml_err}", path.display())))?,
            }
        };
        config.check()?;
        Ok(config)
    }

    fn check(&self) -> Result<(), CliError> {
        for name in [&self.chat_profile, &self.embed_profile].into_iter().flatten() {
            if !self.profiles.iter().any(|p| &p.name == name) {
                return Err(CliError::Usage(format!("profile `{name}` is not defined")));
            }
        }
        for spec in &self.fields {
            spec.validate().map_err(|e| CliError::Data(e.to_string()))?;
        }
        Ok(())
    }

    pub fn spec_for(&self, kind: &EntityKind) -> Result<FieldSpec, CliError> {
        self.fields
            .iter()
            .find(|f| &f.kind == kind)
            .cloned()
            .or_else(|| FieldSpec::builtin(kind))
            .ok_or_else(|| CliError::Usage(format!("no field spec for kind `{kind}`; add one under [[fields]]")))
    }

    fn profile(&self, name: &Option<String>, mode: ProviderMode) -> Result<ProviderProfile, CliError> {
        match (mode, name) {
            (ProviderMode::Mock, _) => Ok(ProviderProfile::mock("mock")),
            (ProviderMode::Live, None) => Err(CliError::Usage("live mode needs a provider profile".into())),
            (ProviderMode::Live, Some(n)) => self
                .profiles
                .iter()
                .find(|p| &p.name == n)
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("profile `{n}` is not defined"))),
        }
    }

    pub fn chat_profile(&self, mode: ProviderMode) -> Result<ProviderProfile, CliError> {
        self.profile(&self.chat_profile, mode)
    }

    pub fn embed_profile(&self, mode: ProviderMode) -> Result<ProviderProfile, CliError> {
        self.profile(&self.embed_profile.clone().or_else(|| self.chat_profile.clone()), mode)
    }

    /// Hex SHA-256 of the effective configuration as JSON.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).unwrap_or_default();
        Sha256::digest(json).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Seed for one module, derived from the global seed and a fixed label.
pub fn sub_seed(seed: u64, label: &str) -> u64 {
    fnv1a(&[&seed.to_string(), label])
}
