use serde::{Deserialize, Serialize};

use crate::thermo::StabilityLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseStatus {
    Ok,
    LexicalError,
    SemanticError,
}

/// One generation and everything learned about it during a round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sample {
    pub id: u64,
    pub prompt: String,
    /// Group number named in the prompt, `None` for the unconditional one.
    pub target_sg: Option<u16>,
    pub text: String,
    pub temperature: f64,
    /// Sampler requests spent on this prompt, the final one included.
    pub attempts: u32,
    pub parse_status: ParseStatus,
    pub parse_error: Option<String>,
    /// Canonical Wyckoff text of the parsed record.
    pub record: Option<String>,
    pub structurally_valid: Option<bool>,
    pub compositionally_valid: Option<bool>,
    pub detected_sg: Option<u16>,
    pub energy_per_atom: Option<f64>,
    pub e_hull: Option<f64>,
    pub stability: Option<StabilityLabel>,
    /// Id of the first sample (lowest id) structurally equal to this one.
    pub unique_class: Option<u64>,
    pub novel: Option<bool>,
}

impl Sample {
    pub fn new(id: u64, prompt: String, target_sg: Option<u16>, temperature: f64) -> Self {
        Sample {
            id,
            prompt,
            target_sg,
            text: String::new(),
            temperature,
            attempts: 0,
            parse_status: ParseStatus::LexicalError,
            parse_error: None,
            record: None,
            structurally_valid: None,
            compositionally_valid: None,
            detected_sg: None,
            energy_per_atom: None,
            e_hull: None,
            stability: None,
            unique_class: None,
            novel: None,
        }
    }

    pub fn is_parsed(&self) -> bool {
        self.parse_status == ParseStatus::Ok
    }

    pub fn is_unique(&self) -> bool {
        self.unique_class == Some(self.id)
    }

    pub fn is_novel(&self) -> bool {
        self.novel == Some(true)
    }
}
