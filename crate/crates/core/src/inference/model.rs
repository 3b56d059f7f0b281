//! Reconstructed integration network.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Incoming,
    Outgoing,
}

/// An incoming or outgoing call configuration of one (canonical) system.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CallEndpoint {
    pub config_uri: String,
    pub owner: String,
    pub direction: Direction,
    pub protocol: Option<String>,
    pub message_type: Option<String>,
    pub interface: Option<String>,
    pub linked: bool,
}

impl CallEndpoint {
    /// Interface name when known, else the configuration itself.
    pub fn flow_key(&self) -> &str {
        self.interface.as_deref().unwrap_or(&self.config_uri)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Evidence {
    /// Outgoing configuration naming its receiver (system or host).
    OutgoingMatch,
    /// Incoming configuration naming its sender.
    IncomingMatch,
    /// Unlinked outgoing and incoming configurations with compatible
    /// protocol and message type.
    GraphMerge,
    /// A `msg_flow_disc` record.
    Declared,
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Evidence::OutgoingMatch => "outgoing-match",
            Evidence::IncomingMatch => "incoming-match",
            Evidence::GraphMerge => "graph-merge",
            Evidence::Declared => "declared",
        })
    }
}

/// A directed message flow between two canonical systems.
///
/// `interface` identifies the flow within its sender/receiver pair: the
/// interface attribute of the configuration that produced it, else the
/// configuration or flow uri.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MessageFlowEdge {
    pub sender: String,
    pub receiver: String,
    pub interface: String,
    pub via: BTreeSet<String>,
    pub evidence: BTreeSet<Evidence>,
    pub attrs: BTreeMap<String, String>,
}

impl MessageFlowEdge {
    pub fn new(sender: &str, receiver: &str, interface: &str, via: &str, evidence: Evidence) -> Self {
        MessageFlowEdge {
            sender: sender.to_string(),
            receiver: receiver.to_string(),
            interface: interface.to_string(),
            via: BTreeSet::from([via.to_string()]),
            evidence: BTreeSet::from([evidence]),
            attrs: BTreeMap::new(),
        }
    }

    pub fn key(&self) -> (&str, &str, &str) {
        (&self.sender, &self.receiver, &self.interface)
    }

    /// Unordered endpoint pair, smaller id first.
    pub fn pair(&self) -> (&str, &str) {
        if self.sender <= self.receiver {
            (&self.sender, &self.receiver)
        } else {
            (&self.receiver, &self.sender)
        }
    }
}

/// All flows between one unordered pair of systems.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopLevelConnection {
    pub pair: (String, String),
    pub flows: Vec<MessageFlowEdge>,
}

impl TopLevelConnection {
    pub fn label(&self) -> String {
        format!("{}<->{}", self.pair.0, self.pair.1)
    }
}

/// A host-level flow whose receiving host could not be resolved to exactly
/// one system.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HostFlow {
    pub sender: String,
    pub sender_host: String,
    pub receiver_host: String,
    pub config_uri: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IFlow {
    pub sender: String,
    pub receiver: String,
    pub middleware: String,
    pub uri: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemNode {
    pub id: String,
    pub members: Vec<String>,
    pub uris: Vec<String>,
    /// Canonical hosts any member runs on. More than one is reported.
    pub hosts: Vec<String>,
    pub attrs: BTreeMap<String, String>,
}

impl SystemNode {
    pub fn party(&self) -> Option<&str> {
        self.attrs.get("party").map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HostNode {
    pub id: String,
    pub members: Vec<String>,
    pub uris: Vec<String>,
    pub attrs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyNode {
    pub id: String,
    pub uris: Vec<String>,
    pub systems: Vec<String>,
    pub attrs: BTreeMap<String, String>,
}

/// Anomalies found while assembling the network. None of them abort the
/// pipeline.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Inconsistency {
    ConflictingConfigOwner {
        config_uri: String,
        owners: Vec<String>,
        chosen: String,
    },
    SelfFlowSuppressed {
        system: String,
        interface: String,
        evidence: Evidence,
    },
    DanglingReference {
        predicate: String,
        config_uri: String,
    },
    AmbiguousHostFlow {
        sender_host: String,
        receiver_host: String,
        config_uri: String,
        candidates: Vec<String>,
    },
    MultipleHosts {
        system: String,
        hosts: Vec<String>,
    },
    AttributeConflict {
        entity: String,
        key: String,
        values: Vec<String>,
        chosen: String,
    },
}

impl fmt::Display for Inconsistency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inconsistency::ConflictingConfigOwner {
                config_uri,
                owners,
                chosen,
            } => write!(
                f,
                "configuration {config_uri} claimed by {}; kept {chosen}",
                owners.join(", ")
            ),
            Inconsistency::SelfFlowSuppressed {
                system,
                interface,
                evidence,
            } => write!(f, "self flow {system} -> {system} over {interface} ({evidence}) dropped"),
            Inconsistency::DanglingReference {
                predicate,
                config_uri,
            } => write!(f, "{predicate} names unknown configuration {config_uri}"),
            Inconsistency::AmbiguousHostFlow {
                sender_host,
                receiver_host,
                config_uri,
                candidates,
            } => write!(
                f,
                "host flow {sender_host} -> {receiver_host} via {config_uri} kept at host level \
                 ({} candidate receivers)",
                candidates.len()
            ),
            Inconsistency::MultipleHosts { system, hosts } => {
                write!(f, "system {system} runs on several hosts: {}", hosts.join(", "))
            }
            Inconsistency::AttributeConflict {
                entity,
                key,
                values,
                chosen,
            } => write!(
                f,
                "{entity}.{key} has values {}; kept {chosen}",
                values.join(", ")
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkGraph {
    pub systems: Vec<SystemNode>,
    pub hosts: Vec<HostNode>,
    pub parties: Vec<PartyNode>,
    pub groups: Vec<TopLevelConnection>,
    pub iflows: Vec<IFlow>,
    pub host_flows: Vec<HostFlow>,
    pub unlinked: Vec<CallEndpoint>,
    pub inconsistencies: Vec<Inconsistency>,
}

impl NetworkGraph {
    pub fn flows(&self) -> impl Iterator<Item = &MessageFlowEdge> {
        self.groups.iter().flat_map(|g| g.flows.iter())
    }

    pub fn flow_count(&self) -> usize {
        self.groups.iter().map(|g| g.flows.len()).sum()
    }

    pub fn system(&self, id: &str) -> Option<&SystemNode> {
        self.systems.iter().find(|s| s.id == id)
    }

    /// The group joining `a` and `b`, in either order.
    pub fn group(&self, a: &str, b: &str) -> Option<&TopLevelConnection> {
        let pair = if a <= b { (a, b) } else { (b, a) };
        self.groups
            .iter()
            .find(|g| (g.pair.0.as_str(), g.pair.1.as_str()) == pair)
    }

    /// The system node containing raw id `member`.
    pub fn system_of(&self, member: &str) -> Option<&SystemNode> {
        self.systems
            .iter()
            .find(|s| s.members.iter().any(|m| m == member))
    }
}
