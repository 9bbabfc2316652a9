use std::path::Path;

use anyhow::{bail, Context};
use wyckit::rlip::RoundConfig;

/// Round settings from a TOML file whose top-level keys are the
/// `RoundConfig` fields, or the defaults without a file.
pub fn load(path: Option<&Path>) -> anyhow::Result<RoundConfig> {
    let Some(path) = path else {
        return Ok(RoundConfig::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Files named by the configuration must exist; tolerances must be positive.
pub fn check_files(config: &RoundConfig) -> anyhow::Result<()> {
    config.validate().map_err(anyhow::Error::msg)?;
    if !config.hull.is_file() {
        bail!("hull file {} does not exist", config.hull.display());
    }
    if let Some(c) = &config.novelty_corpus {
        if !c.is_file() {
            bail!("novelty corpus {} does not exist", c.display());
        }
    }
    Ok(())
}
