use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrueSystem {
    pub id: String,
    /// Raw ids the system is reported under; includes `id` itself.
    pub aliases: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub host: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub party: Option<String>,
    #[serde(default)]
    pub attrs: BTreeMap<String, String>,
    #[serde(default)]
    pub middleware: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrueHost {
    pub id: String,
    pub aliases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TrueFlow {
    pub sender: String,
    pub receiver: String,
    pub interface: String,
    #[serde(default)]
    pub attrs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TrueIFlow {
    pub sender: String,
    pub receiver: String,
    pub middleware: String,
    pub uri: String,
}

/// The landscape facts were generated from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub systems: Vec<TrueSystem>,
    #[serde(default)]
    pub hosts: Vec<TrueHost>,
    #[serde(default)]
    pub parties: Vec<String>,
    pub flows: Vec<TrueFlow>,
    #[serde(default)]
    pub iflows: Vec<TrueIFlow>,
}

impl GroundTruth {
    /// Unordered system pairs with at least one flow.
    pub fn groups(&self) -> BTreeSet<(String, String)> {
        self.flows
            .iter()
            .map(|f| {
                if f.sender <= f.receiver {
                    (f.sender.clone(), f.receiver.clone())
                } else {
                    (f.receiver.clone(), f.sender.clone())
                }
            })
            .collect()
    }

    /// True system id -> raw ids.
    pub fn alias_map(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        self.systems
            .iter()
            .map(|s| (s.id.as_str(), s.aliases.iter().map(String::as_str).collect()))
            .collect()
    }

    /// Raw id -> true system id.
    pub fn resolver(&self) -> BTreeMap<&str, &str> {
        self.systems
            .iter()
            .flat_map(|s| s.aliases.iter().map(move |a| (a.as_str(), s.id.as_str())))
            .collect()
    }

    /// Alias sets must not overlap.
    pub fn aliases_disjoint(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.systems
            .iter()
            .flat_map(|s| &s.aliases)
            .chain(self.hosts.iter().flat_map(|h| &h.aliases))
            .all(|a| seen.insert(a))
    }

    pub fn system_attr_count(&self) -> usize {
        self.systems.iter().map(|s| s.attrs.len()).sum()
    }

    pub fn flow_attr_count(&self) -> usize {
        self.flows.iter().map(|f| f.attrs.len()).sum()
    }

    /// Union of two landscapes with disjoint ids.
    pub fn merged(&self, other: &GroundTruth) -> GroundTruth {
        let mut out = self.clone();
        out.systems.extend(other.systems.iter().cloned());
        out.hosts.extend(other.hosts.iter().cloned());
        out.parties.extend(other.parties.iter().cloned());
        out.flows.extend(other.flows.iter().cloned());
        out.iflows.extend(other.iflows.iter().cloned());
        out
    }
}
