use thiserror::Error;

use crate::symcore::SpaceGroupDb;

const FIRST: &str = "Below is a description of a bulk material.";
const REST: &str = "Generate a description of the lengths and angles of the lattice vectors and then the element type and coordinates for each atom within the lattice:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    Unconditional,
    Spacegroup,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompt {
    pub kind: PromptKind,
    pub spacegroup: Option<u16>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("space group {0} does not exist")]
    InvalidSpacegroup(i64),
    #[error("a space-group prompt needs a group number")]
    MissingSpacegroup,
    #[error("an unconditional prompt takes no group number")]
    UnexpectedSpacegroup,
}

pub fn render_prompt(kind: PromptKind, spacegroup: Option<i64>) -> Result<Prompt, PromptError> {
    match (kind, spacegroup) {
        (PromptKind::Unconditional, None) => {
            Ok(Prompt { kind, spacegroup: None, text: format!("{FIRST} {REST}") })
        }
        (PromptKind::Unconditional, Some(_)) => Err(PromptError::UnexpectedSpacegroup),
        (PromptKind::Spacegroup, None) => Err(PromptError::MissingSpacegroup),
        (PromptKind::Spacegroup, Some(n)) => {
            let group = SpaceGroupDb::standard().group(n).map_err(|_| PromptError::InvalidSpacegroup(n))?;
            Ok(Prompt {
                kind,
                spacegroup: Some(group.number),
                text: format!("{FIRST} The spacegroup number is {}. {REST}", group.number),
            })
        }
    }
}
