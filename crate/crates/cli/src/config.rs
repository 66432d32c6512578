//! The shared run configuration file (TOML). Unknown keys anywhere in the
//! file are rejected, so typos fail fast instead of silently falling back
//! to defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use vaxner_core::llm::{BackendConfig, GenerationParams, PromptStyle, PromptTemplate};
use vaxner_core::{Error, Result};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub paths: PathsSection,
    pub backend: BackendConfig,
    pub generation: GenerationParams,
    pub prompt: PromptSection,
    pub split: SplitSection,
    pub ensemble: EnsembleSection,
    pub filter: FilterSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsSection {
    /// Prediction cache file used by `predict`.
    pub cache: Option<PathBuf>,
    /// Directory for machine-readable report records; per-command
    /// `--records` flags take precedence.
    pub reports: Option<PathBuf>,
}

/// Template selection: either a built-in by name, or an inline template
/// (style + body + optional role preamble).
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PromptSection {
    pub template: Option<String>,
    pub style: Option<String>,
    pub body: Option<String>,
    pub role_preamble: Option<String>,
}

impl PromptSection {
    pub fn resolve(&self) -> Result<PromptTemplate> {
        match (&self.template, &self.body) {
            (Some(name), None) => PromptTemplate::builtin(name),
            (None, Some(body)) => {
                let style: PromptStyle = self
                    .style
                    .as_deref()
                    .ok_or_else(|| {
                        Error::Config("inline [prompt] needs a style (split or merged)".into())
                    })?
                    .parse()?;
                PromptTemplate::new(style, self.role_preamble.clone(), body.clone())
            }
            (Some(_), Some(_)) => Err(Error::Config(
                "[prompt] sets both a built-in template and an inline body; pick one".into(),
            )),
            (None, None) => Err(Error::Config(
                "[prompt] selects no template; set template = \"<built-in>\" or an inline body"
                    .into(),
            )),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitSection {
    /// "train:val:test", e.g. "8:1:1".
    pub ratios: Option<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSection {
    pub mode: Option<String>,
    pub threshold: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterSection {
    /// Path to the filter-rules TOML file.
    pub rules: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<RunConfig> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let raw = std::fs::read_to_string(path)?;
        toml::from_str(&raw).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}
