use std::collections::{BTreeMap, BTreeSet};

use crate::ast::{Fact, Program, Value};
use crate::engine::{self, FactStore, Origin};
use crate::schema::{Catalog, OriginClass, Role};

use super::model::*;
use super::partition::{EntityKind, Partition};

/// System and host equivalence classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partitions {
    pub systems: Partition,
    pub hosts: Partition,
}

impl Partitions {
    pub fn canon_sys<'a>(&'a self, id: &'a str) -> &'a str {
        self.systems.canon(id)
    }

    pub fn canon_host<'a>(&'a self, id: &'a str) -> &'a str {
        self.hosts.canon(id)
    }
}

/// Decides whether an unmatched outgoing and incoming configuration describe
/// the same flow.
pub type Compatibility = fn(&CallEndpoint, &CallEndpoint) -> bool;

/// Protocol and message type both present and equal.
pub fn strict_compatibility(out: &CallEndpoint, inc: &CallEndpoint) -> bool {
    matches!((&out.protocol, &inc.protocol), (Some(a), Some(b)) if a == b)
        && matches!((&out.message_type, &inc.message_type), (Some(a), Some(b)) if a == b)
}

fn text(v: &Value) -> String {
    match v {
        Value::Str(s) => s.clone(),
        Value::Int(i) => i.to_string(),
    }
}

/// Current facts of `predicate`, sorted by arguments.
fn current<'s>(store: &'s FactStore, predicate: &str) -> impl Iterator<Item = &'s Fact> {
    store
        .current_facts_of(predicate)
        .into_iter()
        .map(|s| &s.fact)
}

/// Two-column string relation.
fn pairs<'s>(store: &'s FactStore, predicate: &str) -> impl Iterator<Item = (&'s str, &'s str)> {
    current(store, predicate).filter_map(|f| Some((f.str_arg(0)?, f.str_arg(1)?)))
}

fn triples<'s>(
    store: &'s FactStore,
    predicate: &str,
) -> impl Iterator<Item = (&'s str, &'s str, &'s str)> {
    current(store, predicate).filter_map(|f| Some((f.str_arg(0)?, f.str_arg(1)?, f.str_arg(2)?)))
}

/// Every id in a system (resp. host) position of a current discovered fact.
fn role_domain(store: &FactStore, catalog: &Catalog, role: Role) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for spec in catalog.specs() {
        if spec.origin_class != OriginClass::Discovered {
            continue;
        }
        let positions: Vec<usize> = (0..spec.arity())
            .filter(|&i| spec.arg_roles[i] == role)
            .collect();
        if positions.is_empty() {
            continue;
        }
        for f in current(store, &spec.name) {
            for &i in &positions {
                if let Some(s) = f.str_arg(i) {
                    out.insert(s.to_string());
                }
            }
        }
    }
    out
}

pub fn step1_equivalences(store: &FactStore) -> Partitions {
    let catalog = Catalog::nim();
    let owned = |(a, b): (&str, &str)| (a.to_string(), b.to_string());
    let systems = Partition::build(
        EntityKind::System,
        role_domain(store, &catalog, Role::SysId),
        pairs(store, "same_sys").map(owned),
    );
    let hosts = Partition::build(
        EntityKind::Host,
        role_domain(store, &catalog, Role::HostId),
        pairs(store, "same_host").map(owned),
    );
    Partitions { systems, hosts }
}

/// Configuration attributes: config -> key -> (value, from user).
type ConfAttrs = BTreeMap<String, BTreeMap<String, Vec<(String, bool)>>>;

fn attribute_table(store: &FactStore, predicate: &str) -> ConfAttrs {
    let mut out: ConfAttrs = BTreeMap::new();
    for stored in store.current_facts_of(predicate) {
        let f = &stored.fact;
        let (Some(id), Some(key), Some(v)) = (f.str_arg(0), f.str_arg(1), f.args.get(2)) else {
            continue;
        };
        out.entry(id.to_string())
            .or_default()
            .entry(key.to_string())
            .or_default()
            .push((text(v), stored.origin == Origin::User));
    }
    out
}

/// Picks one value per key: user-asserted first, else the smallest. Several
/// distinct values are reported against `entity`.
fn resolve_attrs<'a>(
    entity: &str,
    sources: impl IntoIterator<Item = &'a BTreeMap<String, Vec<(String, bool)>>>,
    report: &mut Vec<Inconsistency>,
) -> BTreeMap<String, String> {
    let mut merged: BTreeMap<&str, Vec<&(String, bool)>> = BTreeMap::new();
    for src in sources {
        for (k, vs) in src {
            merged.entry(k).or_default().extend(vs);
        }
    }
    let mut out = BTreeMap::new();
    for (key, vs) in merged {
        let values: BTreeSet<&str> = vs.iter().map(|(v, _)| v.as_str()).collect();
        let chosen = vs
            .iter()
            .filter(|(_, user)| *user)
            .map(|(v, _)| v.as_str())
            .min()
            .or_else(|| values.iter().next().copied())
            .expect("attribute has a value")
            .to_string();
        if values.len() > 1 {
            report.push(Inconsistency::AttributeConflict {
                entity: entity.to_string(),
                key: key.to_string(),
                values: values.iter().map(|v| v.to_string()).collect(),
                chosen: chosen.clone(),
            });
        }
        out.insert(key.to_string(), chosen);
    }
    out
}

fn single_attr(attrs: Option<&BTreeMap<String, Vec<(String, bool)>>>, key: &str) -> Option<String> {
    let vs = attrs?.get(key)?;
    vs.iter()
        .filter(|(_, user)| *user)
        .map(|(v, _)| v)
        .min()
        .or_else(|| vs.iter().map(|(v, _)| v).min())
        .cloned()
}

/// One endpoint per (direction, configuration), owner canonicalized.
pub fn step2_endpoints(
    store: &FactStore,
    parts: &Partitions,
) -> (Vec<CallEndpoint>, Vec<Inconsistency>) {
    let conf = attribute_table(store, "conf_attr_disc");
    let mut owners: BTreeMap<(Direction, &str), BTreeSet<&str>> = BTreeMap::new();
    for (dir, pred) in [
        (Direction::Outgoing, "outgoing_disc"),
        (Direction::Incoming, "incoming_disc"),
    ] {
        for (sys, cfg) in pairs(store, pred) {
            owners
                .entry((dir, cfg))
                .or_default()
                .insert(parts.canon_sys(sys));
        }
    }
    let mut report = Vec::new();
    let endpoints = owners
        .into_iter()
        .map(|((direction, cfg), set)| {
            let owner = set.iter().next().expect("config has an owner").to_string();
            if set.len() > 1 {
                report.push(Inconsistency::ConflictingConfigOwner {
                    config_uri: cfg.to_string(),
                    owners: set.iter().map(|s| s.to_string()).collect(),
                    chosen: owner.clone(),
                });
            }
            let attrs = conf.get(cfg);
            CallEndpoint {
                config_uri: cfg.to_string(),
                owner,
                direction,
                protocol: single_attr(attrs, "protocol"),
                message_type: single_attr(attrs, "message_type"),
                interface: single_attr(attrs, "interface"),
                linked: false,
            }
        })
        .collect();
    (endpoints, report)
}

fn endpoint_index(endpoints: &[CallEndpoint], direction: Direction) -> BTreeMap<&str, &CallEndpoint> {
    endpoints
        .iter()
        .filter(|e| e.direction == direction)
        .map(|e| (e.config_uri.as_str(), e))
        .collect()
}

/// Output of the outgoing-configuration step.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OutgoingFlows {
    pub edges: Vec<MessageFlowEdge>,
    pub host_flows: Vec<HostFlow>,
    pub report: Vec<Inconsistency>,
}

fn push_edge(
    edges: &mut Vec<MessageFlowEdge>,
    report: &mut Vec<Inconsistency>,
    edge: MessageFlowEdge,
) {
    if edge.sender == edge.receiver {
        report.push(Inconsistency::SelfFlowSuppressed {
            system: edge.sender,
            interface: edge.interface,
            evidence: *edge.evidence.iter().next().expect("edge has evidence"),
        });
    } else {
        edges.push(edge);
    }
}

fn dangling(
    store: &FactStore,
    predicate: &str,
    known: &BTreeMap<&str, &CallEndpoint>,
    report: &mut Vec<Inconsistency>,
) {
    let missing: BTreeSet<&str> = pairs(store, predicate)
        .map(|(cfg, _)| cfg)
        .filter(|cfg| !known.contains_key(cfg))
        .collect();
    report.extend(missing.into_iter().map(|cfg| Inconsistency::DanglingReference {
        predicate: predicate.to_string(),
        config_uri: cfg.to_string(),
    }));
}

/// Canonical systems per canonical host.
fn systems_by_host(store: &FactStore, parts: &Partitions) -> BTreeMap<String, BTreeSet<String>> {
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (sys, host) in pairs(store, "runs_on_disc") {
        out.entry(parts.canon_host(host).to_string())
            .or_default()
            .insert(parts.canon_sys(sys).to_string());
    }
    out
}

pub fn step3_flows_outgoing(
    store: &FactStore,
    parts: &Partitions,
    endpoints: &[CallEndpoint],
) -> OutgoingFlows {
    let outgoing = endpoint_index(endpoints, Direction::Outgoing);
    let mut res = OutgoingFlows::default();
    for (snd, rcv, cfg) in triples(store, "msg_flow_out") {
        let (sender, key) = match outgoing.get(cfg) {
            Some(e) => (e.owner.as_str(), e.flow_key()),
            None => (parts.canon_sys(snd), cfg),
        };
        let edge = MessageFlowEdge::new(sender, parts.canon_sys(rcv), key, cfg, Evidence::OutgoingMatch);
        push_edge(&mut res.edges, &mut res.report, edge);
    }

    let hosted = systems_by_host(store, parts);
    let mut host_flows = BTreeSet::new();
    let mut ambiguous = BTreeSet::new();
    for (hs, hr, cfg) in triples(store, "msg_flow_host_out") {
        let Some(e) = outgoing.get(cfg) else { continue };
        let receiver_host = parts.canon_host(hr);
        let candidates = hosted.get(receiver_host);
        match candidates {
            Some(c) if c.len() == 1 => {
                let rcv = c.iter().next().expect("one candidate");
                let edge =
                    MessageFlowEdge::new(&e.owner, rcv, e.flow_key(), cfg, Evidence::OutgoingMatch);
                push_edge(&mut res.edges, &mut res.report, edge);
            }
            _ => {
                let candidates: Vec<String> = candidates.into_iter().flatten().cloned().collect();
                host_flows.insert(HostFlow {
                    sender: e.owner.clone(),
                    sender_host: parts.canon_host(hs).to_string(),
                    receiver_host: receiver_host.to_string(),
                    config_uri: cfg.to_string(),
                });
                ambiguous.insert(Inconsistency::AmbiguousHostFlow {
                    sender_host: parts.canon_host(hs).to_string(),
                    receiver_host: receiver_host.to_string(),
                    config_uri: cfg.to_string(),
                    candidates,
                });
            }
        }
    }
    res.host_flows = host_flows.into_iter().collect();
    res.report.extend(ambiguous);
    dangling(store, "recv_disc", &outgoing, &mut res.report);
    dangling(store, "recv_host_disc", &outgoing, &mut res.report);
    res
}

pub fn step4_flows_incoming(
    store: &FactStore,
    parts: &Partitions,
    endpoints: &[CallEndpoint],
) -> (Vec<MessageFlowEdge>, Vec<Inconsistency>) {
    let incoming = endpoint_index(endpoints, Direction::Incoming);
    let mut edges = Vec::new();
    let mut report = Vec::new();
    for (snd, rcv, cfg) in triples(store, "msg_flow_in") {
        let (receiver, key) = match incoming.get(cfg) {
            Some(e) => (e.owner.as_str(), e.flow_key()),
            None => (parts.canon_sys(rcv), cfg),
        };
        let edge = MessageFlowEdge::new(parts.canon_sys(snd), receiver, key, cfg, Evidence::IncomingMatch);
        push_edge(&mut edges, &mut report, edge);
    }
    dangling(store, "send_disc", &incoming, &mut report);
    (edges, report)
}

/// Edges from `msg_flow_disc` records, keyed by the flow uri. A record whose
/// two ids are literally equal is an explicit self flow and kept.
pub fn declared_flows(
    store: &FactStore,
    parts: &Partitions,
) -> (Vec<MessageFlowEdge>, Vec<Inconsistency>) {
    let attrs = attribute_table(store, "attr_disc");
    let mut edges = Vec::new();
    let mut report = Vec::new();
    for (snd, rcv, uri) in triples(store, "msg_flow_disc") {
        let mut edge = MessageFlowEdge::new(
            parts.canon_sys(snd),
            parts.canon_sys(rcv),
            uri,
            uri,
            Evidence::Declared,
        );
        edge.attrs = attrs
            .get(uri)
            .map(|a| resolve_attrs(uri, [a], &mut report))
            .unwrap_or_default();
        if snd == rcv {
            edges.push(edge);
        } else {
            push_edge(&mut edges, &mut report, edge);
        }
    }
    (edges, report)
}

fn add_edge(merged: &mut BTreeMap<(String, String, String), MessageFlowEdge>, edge: MessageFlowEdge) {
    let key = (edge.sender.clone(), edge.receiver.clone(), edge.interface.clone());
    match merged.get_mut(&key) {
        Some(e) => {
            e.via.extend(edge.via);
            e.evidence.extend(edge.evidence);
            for (k, v) in edge.attrs {
                e.attrs.entry(k).or_insert(v);
            }
        }
        None => {
            merged.insert(key, edge);
        }
    }
}

/// Unifies duplicate edges, adds graph-merge edges between unmatched
/// configurations and marks endpoints used by some edge as linked.
pub fn step5_merge(
    endpoints: &[CallEndpoint],
    flows: impl IntoIterator<Item = MessageFlowEdge>,
    compatible: Compatibility,
) -> (Vec<MessageFlowEdge>, Vec<CallEndpoint>) {
    let mut merged: BTreeMap<(String, String, String), MessageFlowEdge> = BTreeMap::new();
    for edge in flows {
        add_edge(&mut merged, edge);
    }

    let used: BTreeSet<String> = merged.values().flat_map(|e| e.via.iter().cloned()).collect();
    let unmatched = |dir: Direction| -> Vec<&CallEndpoint> {
        endpoints
            .iter()
            .filter(|e| e.direction == dir && !used.contains(&e.config_uri))
            .collect()
    };
    let (outs, ins) = (unmatched(Direction::Outgoing), unmatched(Direction::Incoming));
    let mut extra = Vec::new();
    for o in &outs {
        for i in &ins {
            if o.owner != i.owner && compatible(o, i) {
                let key = o.interface.as_deref().or(i.interface.as_deref()).unwrap_or(&o.config_uri);
                let mut edge = MessageFlowEdge::new(&o.owner, &i.owner, key, &o.config_uri, Evidence::GraphMerge);
                edge.via.insert(i.config_uri.clone());
                extra.push(edge);
            }
        }
    }
    for edge in extra {
        add_edge(&mut merged, edge);
    }

    let used: BTreeSet<&str> = merged
        .values()
        .flat_map(|e| e.via.iter().map(String::as_str))
        .collect();
    let unlinked = endpoints
        .iter()
        .filter(|e| !used.contains(e.config_uri.as_str()))
        .cloned()
        .collect();
    (merged.into_values().collect(), unlinked)
}

/// Attaches configuration attributes (other than the matching keys) to the
/// edges that use those configurations.
fn attach_config_attrs(store: &FactStore, edges: &mut [MessageFlowEdge], report: &mut Vec<Inconsistency>) {
    let conf = attribute_table(store, "conf_attr_disc");
    for e in edges {
        let sources: Vec<_> = e.via.iter().filter_map(|c| conf.get(c)).collect();
        if sources.is_empty() {
            continue;
        }
        let label = format!("{}->{}:{}", e.sender, e.receiver, e.interface);
        for (k, v) in resolve_attrs(&label, sources, report) {
            e.attrs.entry(k).or_insert(v);
        }
    }
}

/// Evaluates `program` over the canonicalized `msg_flow_disc` relation and
/// keeps the `iflow` tuples whose three systems are distinct.
pub fn step6_iflows(store: &FactStore, parts: &Partitions, program: &Program) -> Vec<IFlow> {
    let canonical: Vec<Fact> = triples(store, "msg_flow_disc")
        .map(|(s, r, u)| Fact::strs("msg_flow_disc", &[parts.canon_sys(s), parts.canon_sys(r), u]))
        .collect();
    let evaluated = engine::evaluate(program, &FactStore::from_facts(canonical))
        .expect("program was stratified before");
    let out: BTreeSet<IFlow> = current(&evaluated, "iflow")
        .filter_map(|f| {
            let (snd, rcv, mw, uri) = (f.str_arg(0)?, f.str_arg(1)?, f.str_arg(2)?, f.str_arg(3)?);
            (snd != rcv && snd != mw && rcv != mw).then(|| IFlow {
                sender: snd.to_string(),
                receiver: rcv.to_string(),
                middleware: mw.to_string(),
                uri: uri.to_string(),
            })
        })
        .collect();
    out.into_iter().collect()
}

pub fn group_top_level(flows: impl IntoIterator<Item = MessageFlowEdge>) -> Vec<TopLevelConnection> {
    let mut groups: BTreeMap<(String, String), Vec<MessageFlowEdge>> = BTreeMap::new();
    for f in flows {
        let (a, b) = f.pair();
        groups.entry((a.to_string(), b.to_string())).or_default().push(f);
    }
    groups
        .into_iter()
        .map(|(pair, mut flows)| {
            flows.sort();
            TopLevelConnection { pair, flows }
        })
        .collect()
}

fn uris_by_id<'s>(store: &'s FactStore, predicate: &str) -> BTreeMap<&'s str, BTreeSet<&'s str>> {
    let mut out: BTreeMap<&'s str, BTreeSet<&'s str>> = BTreeMap::new();
    for (id, uri) in pairs(store, predicate) {
        out.entry(id).or_default().insert(uri);
    }
    out
}

fn collect_uris(index: &BTreeMap<&str, BTreeSet<&str>>, members: &[&str]) -> Vec<String> {
    let set: BTreeSet<&str> = members
        .iter()
        .filter_map(|m| index.get(m))
        .flatten()
        .copied()
        .collect();
    set.into_iter().map(str::to_string).collect()
}

/// Everything the assembly step needs besides the store.
#[derive(Debug, Clone, Default)]
pub struct StepOutputs {
    pub flows: Vec<MessageFlowEdge>,
    pub unlinked: Vec<CallEndpoint>,
    pub host_flows: Vec<HostFlow>,
    pub iflows: Vec<IFlow>,
    pub report: Vec<Inconsistency>,
}

pub fn build_network(store: &FactStore, parts: &Partitions, steps: StepOutputs) -> NetworkGraph {
    let mut report = steps.report;
    let attrs = attribute_table(store, "attr_disc");
    let host_of: BTreeMap<&str, BTreeSet<&str>> = {
        let mut m: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for (sys, host) in pairs(store, "runs_on_disc") {
            m.entry(parts.canon_sys(sys)).or_default().insert(parts.canon_host(host));
        }
        m
    };
    let system_uris = uris_by_id(store, "system_disc");
    let host_uris = uris_by_id(store, "host_disc");

    let systems: Vec<SystemNode> = parts
        .systems
        .classes()
        .into_iter()
        .map(|(id, members)| {
            let hosts: Vec<String> = host_of
                .get(id)
                .into_iter()
                .flatten()
                .map(|h| h.to_string())
                .collect();
            if hosts.len() > 1 {
                report.push(Inconsistency::MultipleHosts {
                    system: id.to_string(),
                    hosts: hosts.clone(),
                });
            }
            SystemNode {
                id: id.to_string(),
                uris: collect_uris(&system_uris, &members),
                attrs: resolve_attrs(id, members.iter().filter_map(|m| attrs.get(*m)), &mut report),
                members: members.into_iter().map(str::to_string).collect(),
                hosts,
            }
        })
        .collect();

    let hosts = parts
        .hosts
        .classes()
        .into_iter()
        .map(|(id, members)| HostNode {
            id: id.to_string(),
            uris: collect_uris(&host_uris, &members),
            attrs: resolve_attrs(id, members.iter().filter_map(|m| attrs.get(*m)), &mut report),
            members: members.into_iter().map(str::to_string).collect(),
        })
        .collect();

    let party_uris = uris_by_id(store, "party_disc");
    let parties = party_uris
        .keys()
        .map(|&id| PartyNode {
            id: id.to_string(),
            uris: collect_uris(&party_uris, &[id]),
            systems: systems
                .iter()
                .filter(|s| s.party() == Some(id))
                .map(|s| s.id.clone())
                .collect(),
            attrs: resolve_attrs(id, attrs.get(id), &mut report),
        })
        .collect();

    let mut flows = steps.flows;
    attach_config_attrs(store, &mut flows, &mut report);
    report.sort();
    report.dedup();
    NetworkGraph {
        systems,
        hosts,
        parties,
        groups: group_top_level(flows),
        iflows: steps.iflows,
        host_flows: steps.host_flows,
        unlinked: steps.unlinked,
        inconsistencies: report,
    }
}
