//! The relation schema and relation instances.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::entity::EntityType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RelationKind {
    #[serde(rename = "is_vendor_of")]
    IsVendorOf,
    #[serde(rename = "is_version_of")]
    IsVersionOf,
    #[serde(rename = "CVE_of_vuln")]
    CveOfVuln,
    #[serde(rename = "MS_of_SW")]
    MsOfSw,
    #[serde(rename = "MS_of_vuln")]
    MsOfVuln,
    #[serde(rename = "vuln_of_SW")]
    VulnOfSw,
    #[serde(rename = "symbol_of")]
    SymbolOf,
    #[serde(rename = "not_version_of")]
    NotVersionOf,
}

impl RelationKind {
    pub const ALL: [RelationKind; 8] = [
        RelationKind::IsVendorOf,
        RelationKind::IsVersionOf,
        RelationKind::CveOfVuln,
        RelationKind::MsOfSw,
        RelationKind::MsOfVuln,
        RelationKind::VulnOfSw,
        RelationKind::SymbolOf,
        RelationKind::NotVersionOf,
    ];

    /// 1-based row in the schema table.
    pub fn index(self) -> usize {
        self as usize + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            RelationKind::IsVendorOf => "is_vendor_of",
            RelationKind::IsVersionOf => "is_version_of",
            RelationKind::CveOfVuln => "CVE_of_vuln",
            RelationKind::MsOfSw => "MS_of_SW",
            RelationKind::MsOfVuln => "MS_of_vuln",
            RelationKind::VulnOfSw => "vuln_of_SW",
            RelationKind::SymbolOf => "symbol_of",
            RelationKind::NotVersionOf => "not_version_of",
        }
    }

    pub fn subject_type(self) -> EntityType {
        match self {
            RelationKind::IsVendorOf => EntityType::SwVendor,
            RelationKind::IsVersionOf | RelationKind::NotVersionOf => EntityType::SwVersion,
            RelationKind::CveOfVuln => EntityType::CveId,
            RelationKind::MsOfSw | RelationKind::MsOfVuln => EntityType::MsId,
            RelationKind::VulnOfSw => EntityType::VulnTerm,
            RelationKind::SymbolOf => EntityType::SwSymbol,
        }
    }

    pub fn object_type(self) -> EntityType {
        match self {
            RelationKind::CveOfVuln | RelationKind::MsOfVuln => EntityType::VulnTerm,
            _ => EntityType::SwProduct,
        }
    }

    /// The relation whose nominations contradict this one's, if any.
    pub fn rival(self) -> Option<RelationKind> {
        match self {
            RelationKind::IsVersionOf => Some(RelationKind::NotVersionOf),
            RelationKind::NotVersionOf => Some(RelationKind::IsVersionOf),
            _ => None,
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RelationKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelationKind::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown relation {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationProvenance {
    Seed,
    Bootstrap,
    User,
}

/// Identity of a relation instance: relation plus case-folded entity keys.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RelationKey {
    pub relation: RelationKind,
    pub subject: String,
    pub object: String,
}

impl RelationKey {
    pub fn new(relation: RelationKind, subject: &str, object: &str) -> Self {
        RelationKey { relation, subject: subject.to_lowercase(), object: object.to_lowercase() }
    }

    /// Stable key used in answer files.
    pub fn candidate_key(&self) -> String {
        format!("rel:{}:{}:{}", self.relation.name(), self.subject, self.object)
    }
}

impl fmt::Display for RelationKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.relation, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationInstance {
    pub relation: RelationKind,
    pub subject: String,
    pub object: String,
    pub provenance: RelationProvenance,
}

impl RelationInstance {
    pub fn new(relation: RelationKind, subject: impl Into<String>, object: impl Into<String>, provenance: RelationProvenance) -> Self {
        RelationInstance { relation, subject: subject.into(), object: object.into(), provenance }
    }

    pub fn key(&self) -> RelationKey {
        RelationKey::new(self.relation, &self.subject, &self.object)
    }
}

impl fmt::Display for RelationInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.relation, self.object)
    }
}

/// On-disk form of a relation: seed, gold and extracted files share it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationRecord {
    pub relation: RelationKind,
    pub subject: String,
    pub object: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<RelationProvenance>,
}

impl RelationRecord {
    pub fn into_instance(self, default: RelationProvenance) -> RelationInstance {
        RelationInstance::new(self.relation, self.subject, self.object, self.provenance.unwrap_or(default))
    }
}

impl From<&RelationInstance> for RelationRecord {
    fn from(r: &RelationInstance) -> Self {
        RelationRecord {
            relation: r.relation,
            subject: r.subject.clone(),
            object: r.object.clone(),
            provenance: Some(r.provenance),
        }
    }
}
