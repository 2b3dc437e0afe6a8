use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Entity category attached to gazetteer records and graph nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "UPPERCASE")]
pub enum EntityType {
    /// Politician.
    Pol,
    /// Company director / businessperson.
    Dir,
    /// Bureaucrat.
    Bur,
    /// Organization or company.
    Org,
    Person,
    #[default]
    Unknown,
}

impl EntityType {
    pub const ALL: [EntityType; 6] = [
        EntityType::Pol,
        EntityType::Dir,
        EntityType::Bur,
        EntityType::Org,
        EntityType::Person,
        EntityType::Unknown,
    ];

    /// Everything but organizations counts as a person-like node.
    pub fn is_person_kind(self) -> bool {
        self != EntityType::Org
    }

    /// Position in [`EntityType::ALL`], used for scalar encoding.
    pub fn ordinal(self) -> usize {
        EntityType::ALL.iter().position(|t| *t == self).unwrap()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EntityType::Pol => "POL",
            EntityType::Dir => "DIR",
            EntityType::Bur => "BUR",
            EntityType::Org => "ORG",
            EntityType::Person => "PERSON",
            EntityType::Unknown => "UNKNOWN",
        }
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "POL" => Ok(EntityType::Pol),
            "DIR" => Ok(EntityType::Dir),
            "BUR" => Ok(EntityType::Bur),
            "ORG" => Ok(EntityType::Org),
            "PERSON" | "PER" => Ok(EntityType::Person),
            "" | "_" | "UNKNOWN" => Ok(EntityType::Unknown),
            other => Err(format!("unknown entity type `{other}`")),
        }
    }
}
