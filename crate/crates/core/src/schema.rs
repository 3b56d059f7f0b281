//! Predicate catalog for network-mining raw facts: arities, argument roles,
//! discovered/user variants and fact validation.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::ast::{Fact, Value};
use crate::engine::{FactStore, Origin};

pub const DISC_SUFFIX: &str = "_disc";
pub const USER_SUFFIX: &str = "_user";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    SysId,
    HostId,
    PartyId,
    ConfigUri,
    Uri,
    /// Identifier of any entity kind (system, host, party, config).
    AnyId,
    Key,
    Value,
}

impl Role {
    fn requires_string(self) -> bool {
        !matches!(self, Role::Value)
    }

    pub fn label(self) -> &'static str {
        match self {
            Role::SysId => "sys_id",
            Role::HostId => "host_id",
            Role::PartyId => "party_id",
            Role::ConfigUri => "config_uri",
            Role::Uri => "uri",
            Role::AnyId => "any_id",
            Role::Key => "key",
            Role::Value => "value",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OriginClass {
    Discovered,
    User,
    Derived,
}

impl fmt::Display for OriginClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OriginClass::Discovered => "discovered",
            OriginClass::User => "user",
            OriginClass::Derived => "derived",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateSpec {
    pub name: String,
    pub arg_roles: Vec<Role>,
    pub origin_class: OriginClass,
}

impl PredicateSpec {
    pub fn arity(&self) -> usize {
        self.arg_roles.len()
    }

    pub fn signature(&self) -> String {
        format!("{}/{}", self.name, self.arity())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Catalog {
    specs: BTreeMap<String, PredicateSpec>,
}

/// Raw-fact stems; each gets a `_disc` and a `_user` predicate.
const BASE_STEMS: &[(&str, &[Role])] = &[
    ("host", &[Role::HostId, Role::Uri]),
    ("system", &[Role::SysId, Role::Uri]),
    ("same_host", &[Role::HostId, Role::HostId]),
    ("same_sys", &[Role::SysId, Role::SysId]),
    ("runs_on", &[Role::SysId, Role::HostId]),
    ("incoming", &[Role::SysId, Role::ConfigUri]),
    ("outgoing", &[Role::SysId, Role::ConfigUri]),
    ("recv", &[Role::ConfigUri, Role::SysId]),
    ("recv_host", &[Role::ConfigUri, Role::HostId]),
    ("send", &[Role::ConfigUri, Role::SysId]),
    ("msg_flow", &[Role::SysId, Role::SysId, Role::Uri]),
    ("party", &[Role::PartyId, Role::Uri]),
    ("attr", &[Role::AnyId, Role::Key, Role::Value]),
    ("conf_attr", &[Role::ConfigUri, Role::Key, Role::Value]),
];

/// Relations computed by the bundled rules.
const DERIVED: &[(&str, &[Role])] = &[
    ("same_sys", &[Role::SysId, Role::SysId]),
    ("same_host", &[Role::HostId, Role::HostId]),
    ("msg_flow", &[Role::SysId, Role::SysId]),
    ("msg_flow_host", &[Role::HostId, Role::HostId]),
    ("msg_flow_out", &[Role::SysId, Role::SysId, Role::ConfigUri]),
    ("msg_flow_host_out", &[Role::HostId, Role::HostId, Role::ConfigUri]),
    ("msg_flow_in", &[Role::SysId, Role::SysId, Role::ConfigUri]),
    ("iflow", &[Role::SysId, Role::SysId, Role::SysId, Role::Uri]),
];

impl Catalog {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The built-in network integration catalog.
    pub fn nim() -> Self {
        let mut c = Catalog::empty();
        for (stem, roles) in BASE_STEMS {
            for (suffix, class) in [
                (DISC_SUFFIX, OriginClass::Discovered),
                (USER_SUFFIX, OriginClass::User),
            ] {
                c.insert(PredicateSpec {
                    name: format!("{stem}{suffix}"),
                    arg_roles: roles.to_vec(),
                    origin_class: class,
                });
            }
        }
        for (name, roles) in DERIVED {
            c.insert(PredicateSpec {
                name: name.to_string(),
                arg_roles: roles.to_vec(),
                origin_class: OriginClass::Derived,
            });
        }
        c
    }

    pub fn insert(&mut self, spec: PredicateSpec) {
        self.specs.insert(spec.name.clone(), spec);
    }

    pub fn get(&self, name: &str) -> Option<&PredicateSpec> {
        self.specs.get(name)
    }

    pub fn specs(&self) -> impl Iterator<Item = &PredicateSpec> {
        self.specs.values()
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    /// One line per predicate, sorted by name:
    /// `name/arity(role, ...) origin`.
    pub fn as_declarations(&self) -> String {
        let mut out = String::new();
        for s in self.specs.values() {
            let roles: Vec<&str> = s.arg_roles.iter().map(|r| r.label()).collect();
            out.push_str(&format!(
                "{}({}) {}\n",
                s.signature(),
                roles.join(", "),
                s.origin_class
            ));
        }
        out
    }

    /// Markdown table variant of [`as_declarations`](Self::as_declarations).
    pub fn as_markdown(&self) -> String {
        if self.specs.is_empty() {
            return String::new();
        }
        let mut out = String::from("| predicate | arguments | origin |\n|---|---|---|\n");
        for s in self.specs.values() {
            let roles: Vec<&str> = s.arg_roles.iter().map(|r| r.label()).collect();
            out.push_str(&format!(
                "| `{}` | {} | {} |\n",
                s.signature(),
                roles.join(", "),
                s.origin_class
            ));
        }
        out
    }
}

pub fn catalog_as_declarations(catalog: &Catalog) -> String {
    catalog.as_declarations()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    UnknownPredicate,
    WrongArity { expected: usize, found: usize },
    NonStringArgument { position: usize, role: Role },
    /// Input asserts a relation that only rules may compute.
    DerivedPredicate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactViolation {
    /// Position of the fact in the validated list.
    pub index: usize,
    pub fact: Fact,
    pub kind: ViolationKind,
}

impl fmt::Display for FactViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "fact #{} `{}`: ", self.index, self.fact)?;
        match &self.kind {
            ViolationKind::UnknownPredicate => write!(f, "unknown predicate"),
            ViolationKind::WrongArity { expected, found } => {
                write!(f, "expected {expected} arguments, found {found}")
            }
            ViolationKind::NonStringArgument { position, role } => {
                write!(f, "argument {position} ({role}) must be a string")
            }
            ViolationKind::DerivedPredicate => write!(f, "derived relation cannot be asserted"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub valid: Vec<Fact>,
    pub violations: Vec<FactViolation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_facts(catalog: &Catalog, facts: &[Fact]) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (index, fact) in facts.iter().enumerate() {
        let kind = match catalog.get(&fact.predicate) {
            None => Some(ViolationKind::UnknownPredicate),
            Some(spec) if spec.origin_class == OriginClass::Derived => {
                Some(ViolationKind::DerivedPredicate)
            }
            Some(spec) if spec.arity() != fact.args.len() => Some(ViolationKind::WrongArity {
                expected: spec.arity(),
                found: fact.args.len(),
            }),
            Some(spec) => spec
                .arg_roles
                .iter()
                .zip(&fact.args)
                .enumerate()
                .find(|(_, (role, v))| role.requires_string() && !matches!(v, Value::Str(_)))
                .map(|(position, (role, _))| ViolationKind::NonStringArgument {
                    position,
                    role: *role,
                }),
        };
        match kind {
            Some(kind) => report.violations.push(FactViolation {
                index,
                fact: fact.clone(),
                kind,
            }),
            None => report.valid.push(fact.clone()),
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("user predicate `{0}` has no discovered counterpart in the catalog")]
    UnknownUserStem(String),
}

/// `stem_user` -> `stem_disc`, if the fact is a user fact with a catalogued stem.
fn lifted(catalog: &Catalog, fact: &Fact) -> Result<Option<Fact>, SchemaError> {
    let Some(stem) = fact.predicate.strip_suffix(USER_SUFFIX) else {
        return Ok(None);
    };
    let disc = format!("{stem}{DISC_SUFFIX}");
    match catalog.get(&disc) {
        Some(spec) if spec.origin_class == OriginClass::Discovered => {
            Ok(Some(Fact::new(disc, fact.args.clone())))
        }
        _ => Err(SchemaError::UnknownUserStem(fact.predicate.clone())),
    }
}

/// Returns `facts` followed by a `_disc`-shaped copy of every `_user` fact
/// that is not already present, so rules written over discovered relations
/// also see user knowledge.
pub fn lift_user_facts(catalog: &Catalog, facts: &[Fact]) -> Result<Vec<Fact>, SchemaError> {
    let mut seen: HashSet<&Fact> = facts.iter().collect();
    let mut extra = Vec::new();
    for f in facts {
        if let Some(l) = lifted(catalog, f)? {
            extra.push(l);
        }
    }
    let mut out = facts.to_vec();
    for l in &extra {
        if seen.insert(l) {
            out.push(l.clone());
        }
    }
    Ok(out)
}

/// Splits raw input into the discovered snapshot and the user snapshot
/// (user facts plus their discovered-shaped lifts).
pub fn split_origins(catalog: &Catalog, facts: &[Fact]) -> Result<(Vec<Fact>, Vec<Fact>), SchemaError> {
    let mut discovered = Vec::new();
    let mut user = Vec::new();
    for f in facts {
        match lifted(catalog, f)? {
            Some(l) => {
                user.push(f.clone());
                user.push(l);
            }
            None => discovered.push(f.clone()),
        }
    }
    Ok((discovered, user))
}

/// Builds a store from raw input: discovered facts as one snapshot, then
/// user facts (with lifts) as a user snapshot.
pub fn load_store(catalog: &Catalog, facts: &[Fact]) -> Result<FactStore, SchemaError> {
    let (discovered, user) = split_origins(catalog, facts)?;
    let mut store = FactStore::new();
    store
        .ingest_snapshot(&discovered, Origin::Discovered)
        .expect("discovered snapshot");
    if !user.is_empty() {
        store
            .ingest_snapshot(&user, Origin::User)
            .expect("user snapshot");
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_contains_required_relations() {
        let c = Catalog::nim();
        for (name, arity) in [
            ("host_disc", 2),
            ("system_disc", 2),
            ("same_host_disc", 2),
            ("same_sys_disc", 2),
            ("runs_on_disc", 2),
            ("incoming_disc", 2),
            ("outgoing_disc", 2),
            ("recv_disc", 2),
            ("recv_host_disc", 2),
            ("send_disc", 2),
            ("msg_flow_disc", 3),
            ("party_disc", 2),
            ("attr_disc", 3),
            ("conf_attr_disc", 3),
        ] {
            let disc = c.get(name).unwrap_or_else(|| panic!("{name} missing"));
            assert_eq!(disc.arity(), arity, "{name}");
            let user = c.get(&name.replace("_disc", "_user")).unwrap();
            assert_eq!(user.arg_roles, disc.arg_roles);
            assert_eq!(user.origin_class, OriginClass::User);
        }
        assert_eq!(c.get("runs_on_disc").unwrap().arg_roles, vec![Role::SysId, Role::HostId]);
    }

    #[test]
    fn suffix_matches_origin_class() {
        for s in Catalog::nim().specs() {
            match s.origin_class {
                OriginClass::Discovered => assert!(s.name.ends_with(DISC_SUFFIX)),
                OriginClass::User => assert!(s.name.ends_with(USER_SUFFIX)),
                OriginClass::Derived => {
                    assert!(!s.name.ends_with(DISC_SUFFIX) && !s.name.ends_with(USER_SUFFIX))
                }
            }
        }
    }

    #[test]
    fn validation_cases() {
        let c = Catalog::nim();
        let facts = vec![
            Fact::strs("host_disc", &["h1", "uri:h1"]),
            Fact::strs("runs_on_disc", &["s1"]),
            Fact::strs("frobnicate", &["x", "y"]),
            Fact::new("system_disc", vec![Value::Int(3), Value::str("u")]),
            Fact::new("attr_disc", vec![Value::str("s"), Value::str("port"), Value::Int(80)]),
            Fact::strs("same_sys", &["a", "b"]),
        ];
        let r = validate_facts(&c, &facts);
        assert_eq!(r.valid, vec![facts[0].clone(), facts[4].clone()]);
        let kinds: Vec<_> = r.violations.iter().map(|v| (v.index, v.kind.clone())).collect();
        assert_eq!(
            kinds,
            vec![
                (1, ViolationKind::WrongArity { expected: 2, found: 1 }),
                (2, ViolationKind::UnknownPredicate),
                (
                    3,
                    ViolationKind::NonStringArgument {
                        position: 0,
                        role: Role::SysId
                    }
                ),
                (5, ViolationKind::DerivedPredicate),
            ]
        );
    }

    #[test]
    fn user_fact_lift() {
        let c = Catalog::nim();
        let input = vec![Fact::strs("runs_on_user", &["SY1", "CS1"])];
        let out = lift_user_facts(&c, &input).unwrap();
        assert_eq!(
            out,
            vec![
                Fact::strs("runs_on_user", &["SY1", "CS1"]),
                Fact::strs("runs_on_disc", &["SY1", "CS1"]),
            ]
        );
        assert_eq!(lift_user_facts(&c, &out).unwrap(), out);
    }

    #[test]
    fn lift_is_identity_without_user_facts() {
        let c = Catalog::nim();
        let input = vec![
            Fact::strs("host_disc", &["h", "u"]),
            Fact::strs("host_disc", &["h", "u"]),
        ];
        assert_eq!(lift_user_facts(&c, &input).unwrap(), input);
    }

    #[test]
    fn user_stem_must_exist() {
        let c = Catalog::nim();
        let e = lift_user_facts(&c, &[Fact::strs("retired_user", &["s"])]).unwrap_err();
        assert_eq!(e, SchemaError::UnknownUserStem("retired_user".into()));
    }

    #[test]
    fn lifted_fact_has_user_origin() {
        let c = Catalog::nim();
        let s = load_store(
            &c,
            &[
                Fact::strs("system_disc", &["SY1", "u"]),
                Fact::strs("runs_on_user", &["SY1", "CS1"]),
            ],
        )
        .unwrap();
        let f = s.stored(&Fact::strs("runs_on_disc", &["SY1", "CS1"])).unwrap();
        assert_eq!(f.origin, Origin::User);
        assert_eq!(
            s.stored(&Fact::strs("system_disc", &["SY1", "u"])).unwrap().origin,
            Origin::Discovered
        );
    }

    #[test]
    fn declarations() {
        let c = Catalog::nim();
        let text = c.as_declarations();
        assert!(text.contains("msg_flow_disc/3"));
        assert!(text.contains("recv_host_disc/2(config_uri, host_id) discovered"));
        assert_eq!(Catalog::empty().as_declarations(), "");
        let mut one = Catalog::empty();
        one.insert(c.get("host_disc").unwrap().clone());
        assert_eq!(one.as_declarations().lines().count(), 1);
        assert!(c.as_markdown().starts_with("| predicate |"));
    }
}
