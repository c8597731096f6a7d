//! Single-file toolkit configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{ConventionSpec, NamingConvention, SynthOptions};
use crate::exec::Execution;
use crate::inference::InferenceConfig;
use crate::prompts::{FewShotAllocation, Language, PromptResources};
use crate::transforms::TransformPolicy;

/// Environment variable naming the configuration file.
pub const CONFIG_ENV: &str = "RAPIDKIT_CONFIG";

/// Everything a run depends on. Every field has a default; unknown keys are
/// rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToolkitConfig {
    pub convention: ConventionSpec,
    pub policy: TransformPolicy,
    pub inference: InferenceConfig,
    pub corpus_paths: Vec<PathBuf>,
    pub language: Language,
    pub seed: u64,
    pub synthesis: SynthOptions,
    pub few_shot: FewShotAllocation,
    pub execution: Execution,
    /// Directory with `en.txt` / `de.txt` overriding the built-in prompt
    /// resources.
    pub prompt_resources: Option<PathBuf>,
}

impl Default for ToolkitConfig {
    fn default() -> Self {
        Self {
            convention: ConventionSpec::default(),
            policy: TransformPolicy::default(),
            inference: InferenceConfig::default(),
            corpus_paths: Vec::new(),
            language: Language::En,
            seed: 7,
            synthesis: SynthOptions::default(),
            few_shot: FewShotAllocation::default(),
            execution: Execution::Parallel,
            prompt_resources: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ToolkitConfigError {
    #[error("{path}: {message}")]
    Read { path: String, message: String },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl ToolkitConfig {
    pub fn from_json(text: &str, origin: &str) -> Result<Self, ToolkitConfigError> {
        let config: Self = serde_json::from_str(text)
            .map_err(|e| ToolkitConfigError::Parse { path: origin.to_string(), message: e.to_string() })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ToolkitConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ToolkitConfigError::Read { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_json(&text, &path.display().to_string())
    }

    /// Loads the explicit path, else the file named by [`CONFIG_ENV`], else
    /// the defaults.
    pub fn resolve(explicit: Option<&Path>) -> Result<Self, ToolkitConfigError> {
        match explicit {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }

    pub fn validate(&self) -> Result<(), ToolkitConfigError> {
        NamingConvention::new(self.convention.clone()).map_err(|e| ToolkitConfigError::Invalid(e.to_string()))?;
        self.policy.validate().map_err(|e| ToolkitConfigError::Invalid(e.to_string()))?;
        self.inference.validate().map_err(|e| ToolkitConfigError::Invalid(e.to_string()))?;
        if let Some(dir) = &self.prompt_resources {
            for lang in Language::ALL {
                PromptResources::from_file(&dir.join(format!("{lang}.txt")), lang)
                    .map_err(|e| ToolkitConfigError::Invalid(e.to_string()))?;
            }
        }
        Ok(())
    }

    pub fn naming_convention(&self) -> NamingConvention {
        NamingConvention::new(self.convention.clone()).expect("validated configuration")
    }

    pub fn resources(&self, language: Language) -> Result<PromptResources, ToolkitConfigError> {
        match &self.prompt_resources {
            Some(dir) => PromptResources::from_file(&dir.join(format!("{language}.txt")), language)
                .map_err(|e| ToolkitConfigError::Invalid(e.to_string())),
            None => Ok(PromptResources::builtin(language)),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_and_unknown_keys_fail() {
        let c = ToolkitConfig::default();
        c.validate().unwrap();
        assert_eq!(ToolkitConfig::from_json(&c.to_json(), "x").unwrap(), c);
        let partial = ToolkitConfig::from_json(r#"{"seed": 3, "inference": {"samples_per_input": 5}}"#, "x").unwrap();
        assert_eq!((partial.seed, partial.inference.samples_per_input, partial.inference.top_k), (3, 5, 40));
        assert!(matches!(ToolkitConfig::from_json(r#"{"sede": 3}"#, "x"), Err(ToolkitConfigError::Parse { .. })));
        assert!(matches!(
            ToolkitConfig::from_json(r#"{"inference": {"samples_per_input": 0}}"#, "x"),
            Err(ToolkitConfigError::Invalid(_))
        ));
        assert!(matches!(
            ToolkitConfig::from_json(r#"{"convention": {"position": ["p{bogus}"]}}"#, "x"),
            Err(ToolkitConfigError::Invalid(_))
        ));
    }
}
