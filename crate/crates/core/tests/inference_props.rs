mod common;

use std::collections::{BTreeMap, BTreeSet};

use nimlog::ast::Fact;
use nimlog::engine::{evaluate, FactStore};
use nimlog::inference::{run_pipeline, step1_equivalences, NetworkGraph, RuleSet};
use nimlog::schema::{load_store, Catalog};
use nimlog::sim::{generate, score, Category, GroundTruth, ScenarioConfig};
use proptest::prelude::*;

fn pipeline(facts: &[Fact]) -> NetworkGraph {
    run_pipeline(&load_store(&Catalog::nim(), facts).unwrap())
}

fn scenario() -> impl Strategy<Value = ScenarioConfig> {
    (0..10usize, 0..6usize, 0..3usize, 0.0..=1.0f64, any::<u64>(), 0..20usize).prop_map(
        |(systems, hosts, mw, dup, seed, flows)| {
            let total = systems + mw;
            ScenarioConfig {
                n_systems: systems,
                n_hosts: hosts,
                n_middlewares: mw,
                n_flows: if total >= 2 { flows.min(total * total) } else { 0 },
                duplication_rate: dup,
                rng_seed: seed,
                ..ScenarioConfig::default()
            }
        },
    )
}

/// Flow triples mapped to true ids, so graphs with different
/// representatives can be compared.
fn true_flows(g: &NetworkGraph, truth: &GroundTruth) -> BTreeSet<(String, String, String)> {
    let resolve = truth.resolver();
    let node_true: BTreeMap<&str, &str> = g
        .systems
        .iter()
        .map(|s| (s.id.as_str(), resolve[s.members[0].as_str()]))
        .collect();
    g.flows()
        .map(|f| {
            (
                node_true[f.sender.as_str()].to_string(),
                node_true[f.receiver.as_str()].to_string(),
                f.interface.clone(),
            )
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_equals_closure(seed in any::<u64>()) {
        let (ids, pairs) = common::random_same_graph(seed);
        let mut facts: Vec<Fact> = ids.iter().map(|i| Fact::strs("system_disc", &[i, "u"])).collect();
        facts.extend(pairs.iter().map(|(a, b)| Fact::strs("same_sys_disc", &[a, b])));
        let store = evaluate(&RuleSet::bundled().program().unwrap(), &FactStore::from_facts(facts)).unwrap();
        let p = step1_equivalences(&store);
        let want = common::brute_force_classes(&ids, &pairs);
        let got: BTreeSet<BTreeSet<String>> = p.systems.classes().into_values()
            .map(|m| m.into_iter().map(str::to_string).collect()).collect();
        prop_assert_eq!(got, want);
        for id in &ids {
            let c = p.systems.canon(id);
            prop_assert_eq!(p.systems.canon(c), c);
        }
    }

    #[test]
    fn graph_invariants(config in scenario()) {
        let (facts, truth) = generate(&config).unwrap();
        let g = pipeline(&facts);

        let ids: BTreeSet<&str> = g.systems.iter().map(|s| s.id.as_str()).collect();
        let mut seen = BTreeSet::new();
        let mut total = 0;
        for grp in &g.groups {
            prop_assert!(seen.insert(grp.pair.clone()));
            for f in &grp.flows {
                total += 1;
                let (a, b) = f.pair();
                prop_assert_eq!((a, b), (grp.pair.0.as_str(), grp.pair.1.as_str()));
                prop_assert!(ids.contains(f.sender.as_str()) && ids.contains(f.receiver.as_str()));
                prop_assert!(!f.evidence.is_empty());
                prop_assert!(f.sender != f.receiver);
            }
        }
        prop_assert_eq!(total, g.flow_count());
        prop_assert_eq!(total, truth.flows.len());

        let declared: BTreeSet<(String, String, String)> = facts.iter()
            .filter(|f| f.predicate == "msg_flow_disc")
            .map(|f| {
                let c = |i: usize| g.system_of(f.str_arg(i).unwrap()).unwrap().id.clone();
                (c(0), c(1), f.str_arg(2).unwrap().to_string())
            })
            .collect();
        for i in &g.iflows {
            prop_assert!(declared.contains(&(i.sender.clone(), i.middleware.clone(), i.uri.clone())));
            prop_assert!(declared.contains(&(i.middleware.clone(), i.receiver.clone(), i.uri.clone())));
        }
        prop_assert_eq!(g.iflows.len(), truth.iflows.len());
        prop_assert_eq!(&g, &pipeline(&facts));
    }

    #[test]
    fn renaming_within_classes_is_invariant(config in scenario(), pick in any::<u64>()) {
        let (facts, truth) = generate(&config).unwrap();
        // Rewrite every alias of each true system to one chosen alias.
        let target: BTreeMap<&str, &str> = truth.systems.iter().flat_map(|s| {
            let chosen = s.aliases[(pick as usize) % s.aliases.len()].as_str();
            s.aliases.iter().map(move |a| (a.as_str(), chosen))
        }).collect();
        let renamed: Vec<Fact> = facts.iter().map(|f| {
            let mut f = f.clone();
            for v in &mut f.args {
                if let Some(s) = v.as_str() {
                    if let Some(t) = target.get(s) {
                        *v = (*t).into();
                    }
                }
            }
            f
        }).collect();
        let mut collapsed = truth.clone();
        for s in &mut collapsed.systems {
            s.aliases = vec![target[s.aliases[0].as_str()].to_string()];
        }
        let a = pipeline(&facts);
        let b = pipeline(&renamed);
        prop_assert_eq!(a.systems.len(), b.systems.len());
        prop_assert_eq!(a.groups.len(), b.groups.len());
        prop_assert_eq!(true_flows(&a, &truth), true_flows(&b, &collapsed));
    }

    #[test]
    fn user_knowledge_only_adds(config in scenario(), extra in prop::collection::vec((0..12usize, 0..12usize), 0..6)) {
        let (facts, truth) = generate(&config).unwrap();
        let before = pipeline(&facts);
        let ids: Vec<&str> = truth.systems.iter().map(|s| s.id.as_str()).collect();
        let mut more = facts.clone();
        for (i, (a, b)) in extra.iter().enumerate() {
            if ids.len() >= 2 {
                let (a, b) = (ids[a % ids.len()], ids[b % ids.len()]);
                if a != b {
                    more.push(Fact::strs("msg_flow_user", &[a, b, &format!("user_if_{i}")]));
                }
            }
            more.push(Fact::strs("system_user", &[&format!("user_sys_{i}"), "urn:user"]));
        }
        let after = pipeline(&more);
        let members = |g: &NetworkGraph| -> BTreeSet<String> {
            g.systems.iter().flat_map(|s| s.members.clone()).collect()
        };
        prop_assert!(members(&before).is_subset(&members(&after)));
        let resolve = |g: &NetworkGraph| -> BTreeSet<(String, String, String)> {
            g.flows().map(|f| {
                let m = |id: &str| g.system(id).unwrap().members.clone();
                (m(&f.sender).join(","), m(&f.receiver).join(","), f.interface.clone())
            }).collect()
        };
        prop_assert!(resolve(&before).is_subset(&resolve(&after)));
    }
}

#[test]
fn merge_never_drops_step_edges() {
    // Step-5 merge output must contain every (sender, receiver, key) the
    // earlier steps produced.
    for seed in 0..40 {
        let config = ScenarioConfig {
            n_systems: 8,
            n_hosts: 4,
            n_middlewares: 1,
            n_flows: 20,
            duplication_rate: 0.5,
            rng_seed: seed,
            ..ScenarioConfig::default()
        };
        let (facts, truth) = generate(&config).unwrap();
        let r = score(&pipeline(&facts), &truth);
        assert!(r.row(Category::Flows).is_perfect(), "seed {seed}\n{r}");
    }
}
