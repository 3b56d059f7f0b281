//! Bottom-up fixpoint evaluation of stratified programs.
//!
//! Both evaluators work stratum by stratum against the same [`FactStore`].
//! Rule firings of one iteration read an immutable view of the store and
//! return their conclusions privately; the conclusions are merged in rule
//! order at the iteration barrier, so parallel and sequential runs produce
//! the same store.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use crate::ast::{Fact, Literal, Rule, Term, Value};
use crate::engine::store::{FactId, FactStore, Origin};
use crate::engine::strata::StratifiedProgram;

#[derive(Debug, Clone)]
enum Slot {
    Var(usize),
    Const(Value),
}

#[derive(Debug, Clone)]
struct Atom {
    predicate: String,
    args: Vec<Slot>,
}

#[derive(Debug, Clone)]
struct CompiledRule {
    head: Atom,
    positive: Vec<Atom>,
    negative: Vec<Atom>,
    var_count: usize,
}

impl CompiledRule {
    fn compile(rule: &Rule) -> Self {
        fn atom<'r>(lit: &'r Literal, vars: &mut HashMap<&'r str, usize>) -> Atom {
            Atom {
                predicate: lit.predicate.clone(),
                args: lit
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Const(c) => Slot::Const(c.clone()),
                        Term::Var(v) => {
                            let n = vars.len();
                            Slot::Var(*vars.entry(v.as_str()).or_insert(n))
                        }
                    })
                    .collect(),
            }
        }
        let mut vars: HashMap<&str, usize> = HashMap::new();
        // Positive literals first, in body order, so every variable is bound
        // before a negated literal or the head is instantiated.
        let positive: Vec<Atom> = rule
            .body
            .iter()
            .filter(|l| !l.is_negative())
            .map(|l| atom(l, &mut vars))
            .collect();
        let negative = rule
            .body
            .iter()
            .filter(|l| l.is_negative())
            .map(|l| atom(l, &mut vars))
            .collect();
        let head = atom(&rule.head, &mut vars);
        CompiledRule {
            head,
            positive,
            negative,
            var_count: vars.len(),
        }
    }
}

/// Which stored facts a positive body atom may match.
#[derive(Debug, Clone, Copy)]
enum Source<'a> {
    /// Ids in `[lo, hi)`.
    Range(u32, u32),
    /// An explicit ascending id list.
    List(&'a [FactId]),
}

type Conclusion = (Fact, Vec<FactId>);

struct Join<'a> {
    store: &'a FactStore,
    rule: &'a CompiledRule,
    sources: Vec<Source<'a>>,
    bindings: Vec<Option<Value>>,
    witness: Vec<FactId>,
    out: Vec<Conclusion>,
}

fn instantiate(atom: &Atom, bindings: &[Option<Value>]) -> Fact {
    Fact {
        predicate: atom.predicate.clone(),
        args: atom
            .args
            .iter()
            .map(|s| match s {
                Slot::Const(c) => c.clone(),
                Slot::Var(v) => bindings[*v].clone().expect("safe rule binds every variable"),
            })
            .collect(),
    }
}

fn in_range(ids: &[FactId], lo: u32, hi: u32) -> &[FactId] {
    let a = ids.partition_point(|id| id.0 < lo);
    let b = ids.partition_point(|id| id.0 < hi);
    &ids[a..b]
}

impl<'a> Join<'a> {
    fn run(store: &'a FactStore, rule: &'a CompiledRule, sources: Vec<Source<'a>>) -> Vec<Conclusion> {
        let mut j = Join {
            store,
            rule,
            sources,
            bindings: vec![None; rule.var_count],
            witness: Vec::with_capacity(rule.positive.len()),
            out: Vec::new(),
        };
        j.step(0);
        j.out
    }

    fn step(&mut self, depth: usize) {
        if depth == self.rule.positive.len() {
            self.emit();
            return;
        }
        let atom = &self.rule.positive[depth];
        let candidates: &[FactId] = match self.sources[depth] {
            Source::List(ids) => ids,
            Source::Range(lo, hi) => {
                let bound = atom.args.iter().enumerate().find_map(|(i, s)| match s {
                    Slot::Const(c) => Some((i, c)),
                    Slot::Var(v) => self.bindings[*v].as_ref().map(|c| (i, c)),
                });
                let ids = match bound {
                    Some((pos, v)) => self.store.lookup(&atom.predicate, pos, v),
                    None => self.store.ids_of(&atom.predicate),
                };
                in_range(ids, lo, hi)
            }
        };
        let mut newly_bound: Vec<usize> = Vec::with_capacity(atom.args.len());
        for &id in candidates {
            let fact = &self.store.get(id).fact;
            if fact.predicate != atom.predicate || fact.args.len() != atom.args.len() {
                continue;
            }
            let mut ok = true;
            for (slot, v) in atom.args.iter().zip(&fact.args) {
                match slot {
                    Slot::Const(c) => {
                        if c != v {
                            ok = false;
                            break;
                        }
                    }
                    Slot::Var(i) => match &self.bindings[*i] {
                        Some(b) => {
                            if b != v {
                                ok = false;
                                break;
                            }
                        }
                        None => {
                            self.bindings[*i] = Some(v.clone());
                            newly_bound.push(*i);
                        }
                    },
                }
            }
            if ok {
                self.witness.push(id);
                self.step(depth + 1);
                self.witness.pop();
            }
            for i in newly_bound.drain(..) {
                self.bindings[i] = None;
            }
        }
    }

    fn emit(&mut self) {
        for neg in &self.rule.negative {
            if self.store.contains(&instantiate(neg, &self.bindings)) {
                return;
            }
        }
        let head = instantiate(&self.rule.head, &self.bindings);
        self.out.push((head, self.witness.clone()));
    }
}

fn end_of(store: &FactStore) -> u32 {
    store.len() as u32
}

/// Merges conclusions in order; returns how many facts were new.
fn merge(store: &mut FactStore, batches: Vec<Vec<Conclusion>>) -> usize {
    let mut added = 0;
    for (fact, supports) in batches.into_iter().flatten() {
        if store.insert_derived(fact, supports).is_some() {
            added += 1;
        }
    }
    added
}

/// Naive fixpoint: every iteration re-fires every rule of the stratum
/// against every fact until nothing new appears.
pub fn evaluate_naive(program: &StratifiedProgram, store: &FactStore) -> FactStore {
    let mut store = store.without_derived();
    for stratum in &program.strata {
        let rules: Vec<CompiledRule> = stratum.iter().map(CompiledRule::compile).collect();
        loop {
            let end = end_of(&store);
            let snapshot = &store;
            let batches: Vec<Vec<Conclusion>> = rules
                .par_iter()
                .map(|r| Join::run(snapshot, r, vec![Source::Range(0, end); r.positive.len()]))
                .collect();
            if merge(&mut store, batches) == 0 {
                break;
            }
        }
    }
    refresh_currency(&program_rules(program), &mut store);
    store
}

/// Semi-naive fixpoint: after a first full round, each rule is re-fired
/// once per recursive body atom with that atom restricted to the facts
/// derived in the previous round.
pub fn evaluate_seminaive(program: &StratifiedProgram, store: &FactStore) -> FactStore {
    let mut store = store.without_derived();
    for stratum in &program.strata {
        let rules: Vec<CompiledRule> = stratum.iter().map(CompiledRule::compile).collect();
        let local: HashSet<&str> = rules.iter().map(|r| r.head.predicate.as_str()).collect();

        let end = end_of(&store);
        let snapshot = &store;
        let batches: Vec<Vec<Conclusion>> = rules
            .par_iter()
            .map(|r| Join::run(snapshot, r, vec![Source::Range(0, end); r.positive.len()]))
            .collect();
        merge(&mut store, batches);

        // (rule, delta position) pairs worth re-firing.
        let variants: Vec<(usize, usize)> = rules
            .iter()
            .enumerate()
            .flat_map(|(ri, r)| {
                let local = &local;
                r.positive
                    .iter()
                    .enumerate()
                    .filter(move |(_, a)| local.contains(a.predicate.as_str()))
                    .map(move |(pi, _)| (ri, pi))
            })
            .collect();

        let mut delta_start = end;
        loop {
            let delta_end = end_of(&store);
            if delta_start == delta_end {
                break;
            }
            let snapshot = &store;
            let batches: Vec<Vec<Conclusion>> = variants
                .par_iter()
                .map(|&(ri, pi)| {
                    let r = &rules[ri];
                    let sources = r
                        .positive
                        .iter()
                        .enumerate()
                        .map(|(j, a)| {
                            if j == pi {
                                Source::Range(delta_start, delta_end)
                            } else if j < pi && local.contains(a.predicate.as_str()) {
                                Source::Range(0, delta_start)
                            } else {
                                Source::Range(0, delta_end)
                            }
                        })
                        .collect();
                    Join::run(snapshot, r, sources)
                })
                .collect();
            merge(&mut store, batches);
            delta_start = delta_end;
        }
    }
    refresh_currency(&program_rules(program), &mut store);
    store
}

fn program_rules(program: &StratifiedProgram) -> Vec<CompiledRule> {
    program.rules().map(CompiledRule::compile).collect()
}

/// Marks derived facts outdated unless some derivation of them has at least
/// one non-outdated premise, and re-points their supports at such a
/// derivation. A no-op when no base fact is outdated.
fn refresh_currency(rules: &[CompiledRule], store: &mut FactStore) {
    if !store.has_outdated() {
        return;
    }
    let n = store.len();
    let mut current: Vec<bool> = store.iter().map(|(_, f)| !f.outdated).collect();
    let derived: Vec<bool> = store.iter().map(|(_, f)| f.origin == Origin::Derived).collect();
    for (i, d) in derived.iter().enumerate() {
        if *d {
            current[i] = false;
        }
    }
    let mut delta: HashMap<String, Vec<FactId>> = HashMap::new();
    for (id, f) in store.iter() {
        if current[id.index()] {
            delta.entry(f.fact.predicate.clone()).or_default().push(id);
        }
    }
    let mut updates: Vec<(FactId, Vec<FactId>)> = Vec::new();
    while !delta.is_empty() {
        let mut next: HashMap<String, Vec<FactId>> = HashMap::new();
        for rule in rules {
            for (pi, atom) in rule.positive.iter().enumerate() {
                let Some(ids) = delta.get(&atom.predicate) else {
                    continue;
                };
                let sources = (0..rule.positive.len())
                    .map(|j| {
                        if j == pi {
                            Source::List(ids)
                        } else {
                            Source::Range(0, n as u32)
                        }
                    })
                    .collect();
                for (head, witness) in Join::run(store, rule, sources) {
                    let Some(hid) = store.id_of(&head) else {
                        continue;
                    };
                    if derived[hid.index()] && !current[hid.index()] {
                        current[hid.index()] = true;
                        updates.push((hid, witness));
                        next.entry(head.predicate).or_default().push(hid);
                    }
                }
            }
        }
        for ids in next.values_mut() {
            ids.sort();
        }
        delta = next;
    }
    for (id, supports) in updates {
        store.stored_mut(id).supports = supports;
    }
    for i in 0..n {
        if derived[i] {
            store.stored_mut(FactId(i as u32)).outdated = !current[i];
        }
    }
}
