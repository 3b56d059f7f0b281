//! Random program generation and reference implementations shared by the
//! property and acceptance suites.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use nimlog::ast::{Fact, Literal, Program, Rule, Term, Value};
use nimlog::engine::{evaluate_naive, evaluate_seminaive, stratify, FactStore};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Case {
    pub program: Program,
    pub facts: Vec<Fact>,
    /// Predicate -> level; negation only targets strictly lower levels.
    pub levels: BTreeMap<String, usize>,
}

fn value(rng: &mut ChaCha8Rng) -> Value {
    if rng.gen_bool(0.5) {
        Value::Int(rng.gen_range(0..4))
    } else {
        Value::str(["a", "b", "c"][rng.gen_range(0..3)])
    }
}

/// A random stratified program over at most 6 predicates with at most 200
/// base facts.
pub fn random_case(seed: u64, allow_negation: bool) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_preds = rng.gen_range(2..=6);
    let n_base = rng.gen_range(1..n_preds);
    let preds: Vec<(String, usize)> = (0..n_preds)
        .map(|i| (format!("p{i}"), rng.gen_range(1..=3)))
        .collect();
    let mut levels = BTreeMap::new();
    for (i, (name, _)) in preds.iter().enumerate() {
        let level = if i < n_base { 0 } else { rng.gen_range(1..=3) };
        levels.insert(name.clone(), level);
    }

    let n_facts = rng.gen_range(0..=200);
    let facts: Vec<Fact> = (0..n_facts)
        .map(|_| {
            let (name, arity) = &preds[rng.gen_range(0..n_base)];
            Fact::new(name.clone(), (0..*arity).map(|_| value(&mut rng)).collect())
        })
        .collect();

    let vars = ["x", "y", "z", "w"];
    let mut rules = Vec::new();
    for (name, arity) in &preds[n_base..] {
        let level = levels[name];
        for _ in 0..rng.gen_range(1..=3) {
            let mut body = Vec::new();
            let positive: Vec<&(String, usize)> =
                preds.iter().filter(|(p, _)| levels[p] <= level).collect();
            for _ in 0..rng.gen_range(1..=3) {
                let (p, a) = positive.choose(&mut rng).unwrap();
                let args = (0..*a)
                    .map(|_| {
                        if rng.gen_bool(0.15) {
                            Term::Const(value(&mut rng))
                        } else {
                            Term::var(*vars.choose(&mut rng).unwrap())
                        }
                    })
                    .collect();
                body.push(Literal::positive(p.clone(), args));
            }
            let bound: Vec<String> = body
                .iter()
                .flat_map(|l| l.variables().map(str::to_string).collect::<Vec<_>>())
                .collect();
            let lower: Vec<&(String, usize)> =
                preds.iter().filter(|(p, _)| levels[p] < level).collect();
            if allow_negation && !bound.is_empty() && !lower.is_empty() && rng.gen_bool(0.4) {
                let (p, a) = lower.choose(&mut rng).unwrap();
                let args = (0..*a)
                    .map(|_| Term::var(bound.choose(&mut rng).unwrap().clone()))
                    .collect();
                body.push(Literal::negative(p.clone(), args));
            }
            let head_args = (0..*arity)
                .map(|_| {
                    if bound.is_empty() || rng.gen_bool(0.1) {
                        Term::Const(value(&mut rng))
                    } else {
                        Term::var(bound.choose(&mut rng).unwrap().clone())
                    }
                })
                .collect();
            rules.push(Rule::new(Literal::positive(name.clone(), head_args), body));
        }
    }
    Case {
        program: Program::new(rules, Vec::new()),
        facts,
        levels,
    }
}

/// Every (non-outdated) fact after evaluation, sorted.
pub fn all_facts(store: &FactStore) -> Vec<Fact> {
    store.sorted_facts(|f| !f.outdated)
}

pub fn run_engine(case: &Case, naive: bool) -> Vec<Fact> {
    let strat = stratify(&case.program).expect("generated programs are stratified");
    let store = FactStore::from_facts(case.facts.clone());
    let out = if naive {
        evaluate_naive(&strat, &store)
    } else {
        evaluate_seminaive(&strat, &store)
    };
    all_facts(&out)
}

type Binding = BTreeMap<String, Value>;

fn ground(lit: &Literal, b: &Binding) -> Fact {
    Fact::new(
        lit.predicate.clone(),
        lit.args
            .iter()
            .map(|t| match t {
                Term::Const(v) => v.clone(),
                Term::Var(v) => b[v].clone(),
            })
            .collect(),
    )
}

/// Textbook evaluation: level by level, every rule under every assignment
/// of its variables over the active domain, until nothing changes.
pub fn reference_eval(case: &Case) -> Vec<Fact> {
    let mut domain: BTreeSet<Value> = case.facts.iter().flat_map(|f| f.args.clone()).collect();
    for r in &case.program.rules {
        for lit in std::iter::once(&r.head).chain(&r.body) {
            for t in &lit.args {
                if let Term::Const(v) = t {
                    domain.insert(v.clone());
                }
            }
        }
    }
    let domain: Vec<Value> = domain.into_iter().collect();
    let mut known: BTreeSet<Fact> = case.facts.iter().cloned().collect();
    let max_level = case.levels.values().copied().max().unwrap_or(0);
    for level in 1..=max_level {
        let rules: Vec<&Rule> = case
            .program
            .rules
            .iter()
            .filter(|r| case.levels[&r.head.predicate] == level)
            .collect();
        loop {
            let mut new = Vec::new();
            for r in &rules {
                let vars: Vec<String> = r
                    .body
                    .iter()
                    .flat_map(|l| l.variables().map(str::to_string).collect::<Vec<_>>())
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect();
                if !vars.is_empty() && domain.is_empty() {
                    continue;
                }
                let mut idx = vec![0usize; vars.len()];
                loop {
                    let b: Binding = vars
                        .iter()
                        .cloned()
                        .zip(idx.iter().map(|&i| domain[i].clone()))
                        .collect();
                    let holds = r.body.iter().all(|l| {
                        let f = ground(l, &b);
                        known.contains(&f) != l.is_negative()
                    });
                    if holds {
                        let f = ground(&r.head, &b);
                        if !known.contains(&f) {
                            new.push(f);
                        }
                    }
                    // next assignment
                    let mut k = 0;
                    while k < idx.len() {
                        idx[k] += 1;
                        if idx[k] < domain.len() {
                            break;
                        }
                        idx[k] = 0;
                        k += 1;
                    }
                    if k == idx.len() {
                        break;
                    }
                }
            }
            if new.is_empty() {
                break;
            }
            known.extend(new);
        }
    }
    known.into_iter().collect()
}

/// Classes of the symmetric-transitive closure of `pairs` over `ids`, by
/// repeated relaxation on a boolean matrix.
pub fn brute_force_classes(ids: &[String], pairs: &[(String, String)]) -> BTreeSet<BTreeSet<String>> {
    let n = ids.len();
    let pos: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut m = vec![vec![false; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = true;
    }
    for (a, b) in pairs {
        let (i, j) = (pos[a.as_str()], pos[b.as_str()]);
        m[i][j] = true;
        m[j][i] = true;
    }
    for k in 0..n {
        let via = m[k].clone();
        for row in m.iter_mut().filter(|r| r[k]) {
            for (cell, &reach) in row.iter_mut().zip(&via) {
                *cell |= reach;
            }
        }
    }
    (0..n)
        .map(|i| (0..n).filter(|&j| m[i][j]).map(|j| ids[j].clone()).collect())
        .collect()
}

/// A random equivalence-witness graph on at most 50 ids.
pub fn random_same_graph(seed: u64) -> (Vec<String>, Vec<(String, String)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=50);
    let ids: Vec<String> = (0..n).map(|i| format!("id{i:02}")).collect();
    let m = rng.gen_range(0..=n + n / 2);
    let pairs = (0..m)
        .map(|_| {
            (
                ids.choose(&mut rng).unwrap().clone(),
                ids.choose(&mut rng).unwrap().clone(),
            )
        })
        .collect();
    (ids, pairs)
}
