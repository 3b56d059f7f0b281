//! Indexed set of ground facts with snapshot epochs, origins and
//! derivation supports.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ast::{Fact, Literal, Term, Value};
use crate::engine::EngineError;

/// Dense identity of a stored fact. Ids are assigned in insertion order and
/// are only renumbered when facts are removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FactId(pub(crate) u32);

impl FactId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Discovered,
    User,
    Derived,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::Discovered => "discovered",
            Origin::User => "user",
            Origin::Derived => "derived",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoredFact {
    pub fact: Fact,
    pub epoch: u64,
    pub origin: Origin,
    pub outdated: bool,
    /// One witnessing derivation (positive premises). Empty for base facts.
    pub supports: Vec<FactId>,
}

#[derive(Debug, Clone, Default)]
struct Relation {
    ids: Vec<FactId>,
    /// `index[pos][value]` lists ids (ascending) whose argument `pos` is `value`.
    index: Vec<HashMap<Value, Vec<FactId>>>,
}

impl Relation {
    fn add(&mut self, id: FactId, fact: &Fact) {
        self.ids.push(id);
        if self.index.len() < fact.args.len() {
            self.index.resize_with(fact.args.len(), HashMap::new);
        }
        for (pos, v) in fact.args.iter().enumerate() {
            self.index[pos].entry(v.clone()).or_default().push(id);
        }
    }
}

/// Variable bindings produced by [`FactStore::query`].
pub type Substitution = BTreeMap<String, Value>;

#[derive(Debug, Clone, Default)]
pub struct FactStore {
    facts: Vec<StoredFact>,
    lookup: HashMap<Fact, FactId>,
    relations: HashMap<String, Relation>,
    current_epoch: u64,
}

impl PartialEq for FactStore {
    fn eq(&self, other: &Self) -> bool {
        self.current_epoch == other.current_epoch && self.facts == other.facts
    }
}

impl FactStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// A store holding `facts` as one discovered snapshot.
    pub fn from_facts(facts: impl IntoIterator<Item = Fact>) -> Self {
        let mut s = Self::new();
        let facts: Vec<Fact> = facts.into_iter().collect();
        s.ingest_snapshot(&facts, Origin::Discovered)
            .expect("discovered origin is a valid snapshot origin");
        s
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn current_epoch(&self) -> u64 {
        self.current_epoch
    }

    pub fn get(&self, id: FactId) -> &StoredFact {
        &self.facts[id.index()]
    }

    pub fn id_of(&self, fact: &Fact) -> Option<FactId> {
        self.lookup.get(fact).copied()
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.lookup.contains_key(fact)
    }

    pub fn stored(&self, fact: &Fact) -> Option<&StoredFact> {
        self.id_of(fact).map(|id| self.get(id))
    }

    pub fn iter(&self) -> impl Iterator<Item = (FactId, &StoredFact)> {
        self.facts
            .iter()
            .enumerate()
            .map(|(i, f)| (FactId(i as u32), f))
    }

    /// Ids of every fact of `predicate`, ascending.
    pub fn ids_of(&self, predicate: &str) -> &[FactId] {
        self.relations
            .get(predicate)
            .map(|r| r.ids.as_slice())
            .unwrap_or(&[])
    }

    /// Ids of facts of `predicate` whose argument `pos` equals `value`, ascending.
    pub fn lookup(&self, predicate: &str, pos: usize, value: &Value) -> &[FactId] {
        self.relations
            .get(predicate)
            .and_then(|r| r.index.get(pos))
            .and_then(|ix| ix.get(value))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn predicates(&self) -> impl Iterator<Item = &str> {
        self.relations.keys().map(String::as_str)
    }

    pub fn has_outdated(&self) -> bool {
        self.facts.iter().any(|f| f.outdated)
    }

    /// Facts matching `keep`, sorted by (predicate, args).
    pub fn sorted_facts(&self, keep: impl Fn(&StoredFact) -> bool) -> Vec<Fact> {
        let mut out: Vec<Fact> = self
            .facts
            .iter()
            .filter(|f| keep(f))
            .map(|f| f.fact.clone())
            .collect();
        out.sort();
        out
    }

    /// Non-outdated facts of one predicate, sorted.
    pub fn current_facts_of(&self, predicate: &str) -> Vec<&StoredFact> {
        let mut out: Vec<&StoredFact> = self
            .ids_of(predicate)
            .iter()
            .map(|&id| self.get(id))
            .filter(|f| !f.outdated)
            .collect();
        out.sort_by(|a, b| a.fact.args.cmp(&b.fact.args));
        out
    }

    pub fn derived_facts(&self) -> Vec<Fact> {
        self.sorted_facts(|f| f.origin == Origin::Derived)
    }

    fn push(&mut self, stored: StoredFact) -> FactId {
        let id = FactId(u32::try_from(self.facts.len()).expect("fact store exceeds u32 ids"));
        self.relations
            .entry(stored.fact.predicate.clone())
            .or_default()
            .add(id, &stored.fact);
        self.lookup.insert(stored.fact.clone(), id);
        self.facts.push(stored);
        id
    }

    /// Inserts a derived fact unless the literal is already stored.
    pub(crate) fn insert_derived(&mut self, fact: Fact, supports: Vec<FactId>) -> Option<FactId> {
        if self.lookup.contains_key(&fact) {
            return None;
        }
        let epoch = self.current_epoch;
        Some(self.push(StoredFact {
            fact,
            epoch,
            origin: Origin::Derived,
            outdated: false,
            supports,
        }))
    }

    pub(crate) fn stored_mut(&mut self, id: FactId) -> &mut StoredFact {
        &mut self.facts[id.index()]
    }

    /// Records one discovery (or user) snapshot.
    ///
    /// The epoch advances; every listed fact is inserted or refreshed; base
    /// facts of the same origin whose predicate occurs in the snapshot but
    /// which are missing from it are marked outdated. Re-asserting a fact of
    /// another origin keeps the stronger origin (user over discovered over
    /// derived).
    pub fn ingest_snapshot(&mut self, facts: &[Fact], origin: Origin) -> Result<(), EngineError> {
        if origin == Origin::Derived {
            return Err(EngineError::DerivedSnapshot);
        }
        self.current_epoch += 1;
        let epoch = self.current_epoch;
        let mut present = HashSet::new();
        let mut scope = HashSet::new();
        for fact in facts {
            scope.insert(fact.predicate.as_str());
            let id = match self.lookup.get(fact) {
                Some(&id) => {
                    let stored = &mut self.facts[id.index()];
                    stored.epoch = epoch;
                    stored.outdated = false;
                    if stored.origin == Origin::Derived {
                        stored.origin = origin;
                        stored.supports.clear();
                    } else if origin == Origin::User {
                        stored.origin = Origin::User;
                    }
                    id
                }
                None => self.push(StoredFact {
                    fact: fact.clone(),
                    epoch,
                    origin,
                    outdated: false,
                    supports: Vec::new(),
                }),
            };
            present.insert(id);
        }
        for pred in scope {
            let ids = self.relations[pred].ids.clone();
            for id in ids {
                let stored = &mut self.facts[id.index()];
                if stored.origin == origin && !present.contains(&id) {
                    stored.outdated = true;
                }
            }
        }
        Ok(())
    }

    /// Like [`ingest_snapshot`](Self::ingest_snapshot) for parsed literals,
    /// rejecting anything that is not a ground positive literal.
    pub fn ingest_literals(&mut self, lits: &[Literal], origin: Origin) -> Result<(), EngineError> {
        let facts = lits
            .iter()
            .map(|l| l.to_fact().ok_or_else(|| EngineError::NonGround(l.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        self.ingest_snapshot(&facts, origin)
    }

    /// Copy of the store restricted to facts for which `keep` holds, with
    /// ids renumbered and supports remapped. Supports pointing at dropped
    /// facts are discarded.
    pub(crate) fn retain(&self, keep: impl Fn(FactId, &StoredFact) -> bool) -> FactStore {
        let mut out = FactStore {
            current_epoch: self.current_epoch,
            ..FactStore::default()
        };
        let mut remap: HashMap<FactId, FactId> = HashMap::new();
        for (id, f) in self.iter() {
            if keep(id, f) {
                let new_id = out.push(StoredFact {
                    supports: Vec::new(),
                    ..f.clone()
                });
                remap.insert(id, new_id);
            }
        }
        for (old, new) in &remap {
            let supports = self.facts[old.index()]
                .supports
                .iter()
                .filter_map(|s| remap.get(s).copied())
                .collect();
            out.facts[new.index()].supports = supports;
        }
        out
    }

    /// Base facts only; derived facts are dropped.
    pub fn without_derived(&self) -> FactStore {
        self.retain(|_, f| f.origin != Origin::Derived)
    }

    /// Removes outdated facts that no current derived fact depends on.
    ///
    /// Liveness flows from every non-outdated derived fact through its
    /// supports, transitively. Outdated facts outside that closure are
    /// dropped; non-outdated facts are never removed.
    pub fn collect_unreferenced(&self) -> FactStore {
        let mut live = vec![false; self.facts.len()];
        let mut stack: Vec<FactId> = self
            .iter()
            .filter(|(_, f)| f.origin == Origin::Derived && !f.outdated)
            .map(|(id, _)| id)
            .collect();
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut live[id.index()], true) {
                continue;
            }
            stack.extend(self.facts[id.index()].supports.iter().copied());
        }
        self.retain(|id, f| !f.outdated || live[id.index()])
    }

    /// Substitutions θ such that θ(pattern) is a stored, non-outdated fact,
    /// ordered by the matched argument tuple.
    pub fn query(&self, pattern: &Literal) -> Vec<Substitution> {
        let bound = pattern.args.iter().enumerate().find_map(|(i, t)| match t {
            Term::Const(c) => Some((i, c)),
            Term::Var(_) => None,
        });
        let candidates = match bound {
            Some((pos, value)) => self.lookup(&pattern.predicate, pos, value),
            None => self.ids_of(&pattern.predicate),
        };
        self.collect_matches(pattern, candidates.iter().copied())
    }

    /// [`query`](Self::query) by a full scan of the store, without indexes.
    pub fn query_by_scan(&self, pattern: &Literal) -> Vec<Substitution> {
        self.collect_matches(pattern, self.iter().map(|(id, _)| id))
    }

    fn collect_matches(
        &self,
        pattern: &Literal,
        ids: impl Iterator<Item = FactId>,
    ) -> Vec<Substitution> {
        let mut hits: Vec<(&[Value], Substitution)> = ids
            .map(|id| self.get(id))
            .filter(|f| !f.outdated && f.fact.predicate == pattern.predicate)
            .filter_map(|f| match_pattern(pattern, &f.fact).map(|s| (f.fact.args.as_slice(), s)))
            .collect();
        hits.sort_by(|a, b| a.0.cmp(b.0));
        hits.into_iter().map(|(_, s)| s).collect()
    }
}

fn match_pattern(pattern: &Literal, fact: &Fact) -> Option<Substitution> {
    if pattern.args.len() != fact.args.len() {
        return None;
    }
    let mut theta = Substitution::new();
    for (t, v) in pattern.args.iter().zip(&fact.args) {
        match t {
            Term::Const(c) if c != v => return None,
            Term::Const(_) => {}
            Term::Var(name) => match theta.get(name) {
                Some(prev) if prev != v => return None,
                Some(_) => {}
                None => {
                    theta.insert(name.clone(), v.clone());
                }
            },
        }
    }
    Some(theta)
}
