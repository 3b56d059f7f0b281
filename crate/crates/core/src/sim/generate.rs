use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::Fact;

use super::truth::*;

fn default_attrs() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n_systems: usize,
    pub n_hosts: usize,
    pub n_middlewares: usize,
    pub n_flows: usize,
    /// Probability that a system (or host) is reported under extra ids.
    pub duplication_rate: f64,
    /// Probability that a descriptive attribute fact is dropped.
    pub attr_loss_rate: f64,
    pub rng_seed: u64,
    #[serde(default = "default_attrs")]
    pub attrs_per_system: usize,
    #[serde(default = "default_attrs")]
    pub attrs_per_flow: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_systems: 0,
            n_hosts: 0,
            n_middlewares: 0,
            n_flows: 0,
            duplication_rate: 0.0,
            attr_loss_rate: 0.0,
            rng_seed: 0,
            attrs_per_system: default_attrs(),
            attrs_per_flow: default_attrs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("{name} must be within [0, 1]")]
    RateOutOfRange { name: &'static str },
    #[error("{flows} flows need at least two systems")]
    TooFewSystems { flows: usize },
    #[error("{flows} flows exceed {systems}^2 for {systems} systems")]
    TooManyFlows { flows: usize, systems: usize },
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        for (name, r) in [
            ("duplication_rate", self.duplication_rate),
            ("attr_loss_rate", self.attr_loss_rate),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return Err(ScenarioError::RateOutOfRange { name });
            }
        }
        let systems = self.n_systems + self.n_middlewares;
        if self.n_flows > 0 && systems < 2 {
            return Err(ScenarioError::TooFewSystems {
                flows: self.n_flows,
            });
        }
        if self.n_flows > systems.saturating_mul(systems) {
            return Err(ScenarioError::TooManyFlows {
                flows: self.n_flows,
                systems,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    OutgoingRecv,
    HostLevel,
    IncomingSend,
    BothSides,
    GraphMerge,
    Declared,
}

const PROTOCOLS: &[&str] = &["SOAP", "IDoc", "RFC", "HTTP"];
const DOMAINS: &[&str] = &["SLD", "CMDB"];

struct Gen {
    rng: ChaCha8Rng,
    loss: f64,
    facts: Vec<Fact>,
    cfg_seq: usize,
}

impl Gen {
    fn emit(&mut self, pred: &str, args: &[&str]) {
        self.facts.push(Fact::strs(pred, args));
    }

    /// Emits a descriptive attribute unless it is lost.
    fn emit_attr(&mut self, pred: &str, id: &str, key: &str, value: &str) {
        if !self.rng.gen_bool(self.loss) {
            self.emit(pred, &[id, key, value]);
        }
    }

    fn pick<'a>(&mut self, xs: &'a [String]) -> &'a str {
        xs.choose(&mut self.rng).expect("non-empty alias list")
    }

    fn config(&mut self, dir: &str) -> String {
        self.cfg_seq += 1;
        format!("cfg:{dir}:{:04}", self.cfg_seq)
    }

    fn attrs(&mut self, prefix: &str, n: usize) -> BTreeMap<String, String> {
        (0..n)
            .map(|k| (format!("{prefix}{k}"), format!("v{}", self.rng.gen_range(0..1000))))
            .collect()
    }

    /// Extra ids for `id` (maybe none) witnessed by a same-fact chain.
    fn aliases(&mut self, id: &str, rate: f64, same_pred: &str) -> Vec<String> {
        let mut out = vec![id.to_string()];
        if self.rng.gen_bool(rate) {
            let extra = self.rng.gen_range(1..=DOMAINS.len());
            out.extend(DOMAINS[..extra].iter().map(|d| format!("{d}:{id}")));
        }
        let mut chain = out.clone();
        chain.shuffle(&mut self.rng);
        for w in chain.windows(2) {
            let (a, b) = if self.rng.gen_bool(0.5) {
                (&w[0], &w[1])
            } else {
                (&w[1], &w[0])
            };
            self.facts.push(Fact::strs(same_pred, &[a, b]));
        }
        out
    }
}

/// Generates raw facts for a random landscape plus the landscape itself.
pub fn generate(config: &ScenarioConfig) -> Result<(Vec<Fact>, GroundTruth), ScenarioError> {
    config.validate()?;
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(config.rng_seed),
        loss: config.attr_loss_rate,
        facts: Vec::new(),
        cfg_seq: 0,
    };
    let mut truth = GroundTruth::default();

    for i in 0..config.n_hosts {
        let id = format!("host{i:03}");
        let aliases = g.aliases(&id, config.duplication_rate, "same_host_disc");
        for a in &aliases {
            g.emit("host_disc", &[a, &format!("dns://{a}")]);
        }
        truth.hosts.push(TrueHost { id, aliases });
    }

    let ids: Vec<(String, bool)> = (0..config.n_systems)
        .map(|i| (format!("SYS_{i:04}"), false))
        .chain((0..config.n_middlewares).map(|i| (format!("MW_{i:02}"), true)))
        .collect();
    for (id, middleware) in ids {
        let aliases = g.aliases(&id, config.duplication_rate, "same_sys_disc");
        let host = (config.n_hosts > 0).then(|| g.rng.gen_range(0..config.n_hosts));
        for a in &aliases {
            g.emit("system_disc", &[a, &format!("urn:{a}")]);
            if let Some(h) = host {
                let h_alias = g.pick(&truth.hosts[h].aliases).to_string();
                g.emit("runs_on_disc", &[a, &h_alias]);
            }
        }
        let attrs = g.attrs("attr", config.attrs_per_system);
        for (k, v) in &attrs {
            let a = g.pick(&aliases).to_string();
            g.emit_attr("attr_disc", &a, k, v);
        }
        truth.systems.push(TrueSystem {
            id,
            aliases,
            host: host.map(|h| truth.hosts[h].id.clone()),
            party: None,
            attrs,
            middleware,
        });
    }

    let mut occupancy: BTreeMap<&str, usize> = BTreeMap::new();
    for s in &truth.systems {
        if let Some(h) = &s.host {
            *occupancy.entry(h).or_default() += 1;
        }
    }
    let sole_on_host: Vec<bool> = truth
        .systems
        .iter()
        .map(|s| s.host.as_deref().is_some_and(|h| occupancy[h] == 1))
        .collect();
    let host_aliases: BTreeMap<String, Vec<String>> = truth
        .hosts
        .iter()
        .map(|h| (h.id.clone(), h.aliases.clone()))
        .collect();

    let regular: Vec<usize> = (0..truth.systems.len())
        .filter(|&i| !truth.systems[i].middleware)
        .collect();
    let mw: Vec<usize> = (0..truth.systems.len())
        .filter(|&i| truth.systems[i].middleware)
        .collect();

    let mut flows: Vec<TrueFlow> = Vec::new();
    let mut iflows = Vec::new();
    let mut seq = 0usize;
    while flows.len() < config.n_flows {
        seq += 1;
        let remaining = config.n_flows - flows.len();
        let mediated = !mw.is_empty()
            && regular.len() >= 2
            && remaining >= 2
            && (iflows.is_empty() || g.rng.gen_bool(0.2));
        if mediated {
            let pair: Vec<usize> = regular.choose_multiple(&mut g.rng, 2).copied().collect();
            let m = *mw.choose(&mut g.rng).expect("middleware exists");
            let (s, r, m) = (&truth.systems[pair[0]], &truth.systems[pair[1]], &truth.systems[m]);
            let uri = format!("IFLOW_{seq:04}");
            let attrs = g.attrs("fattr", config.attrs_per_flow);
            let (sa, ma1, ma2, ra) = (
                g.pick(&s.aliases).to_string(),
                g.pick(&m.aliases).to_string(),
                g.pick(&m.aliases).to_string(),
                g.pick(&r.aliases).to_string(),
            );
            g.emit("msg_flow_disc", &[&sa, &ma1, &uri]);
            g.emit("msg_flow_disc", &[&ma2, &ra, &uri]);
            for (k, v) in &attrs {
                g.emit_attr("attr_disc", &uri, k, v);
            }
            for (a, b) in [(s, m), (m, r)] {
                flows.push(TrueFlow {
                    sender: a.id.clone(),
                    receiver: b.id.clone(),
                    interface: uri.clone(),
                    attrs: attrs.clone(),
                });
            }
            iflows.push(TrueIFlow {
                sender: s.id.clone(),
                receiver: r.id.clone(),
                middleware: m.id.clone(),
                uri,
            });
            continue;
        }

        let n = truth.systems.len();
        let si = g.rng.gen_range(0..n);
        let ri = (si + g.rng.gen_range(1..n)) % n;
        let (s, r) = (&truth.systems[si], &truth.systems[ri]);
        let interface = format!("IF_{seq:04}");
        let mut modes = vec![
            Mode::OutgoingRecv,
            Mode::IncomingSend,
            Mode::BothSides,
            Mode::GraphMerge,
            Mode::Declared,
        ];
        if s.host.is_some() && sole_on_host[ri] {
            modes.push(Mode::HostLevel);
        }
        let mode = *modes.choose(&mut g.rng).expect("modes");
        let attrs = g.attrs("fattr", config.attrs_per_flow);
        // Where the descriptive attributes go: a configuration or the flow uri.
        let attr_target = match mode {
            Mode::Declared => {
                let (a, b) = (g.pick(&s.aliases).to_string(), g.pick(&r.aliases).to_string());
                g.emit("msg_flow_disc", &[&a, &b, &interface]);
                ("attr_disc", interface.clone())
            }
            Mode::OutgoingRecv | Mode::HostLevel | Mode::BothSides => {
                let oc = g.config("out");
                let a = g.pick(&s.aliases).to_string();
                g.emit("outgoing_disc", &[&a, &oc]);
                g.emit("conf_attr_disc", &[&oc, "interface", &interface]);
                if mode == Mode::HostLevel {
                    let h = r.host.as_ref().expect("eligible receiver has a host");
                    let ha = g.pick(&host_aliases[h]).to_string();
                    g.emit("recv_host_disc", &[&oc, &ha]);
                } else {
                    let b = g.pick(&r.aliases).to_string();
                    g.emit("recv_disc", &[&oc, &b]);
                }
                if mode == Mode::BothSides {
                    let ic = g.config("in");
                    let (a, b) = (g.pick(&s.aliases).to_string(), g.pick(&r.aliases).to_string());
                    g.emit("incoming_disc", &[&b, &ic]);
                    g.emit("send_disc", &[&ic, &a]);
                    g.emit("conf_attr_disc", &[&ic, "interface", &interface]);
                }
                ("conf_attr_disc", oc)
            }
            Mode::IncomingSend => {
                let ic = g.config("in");
                let (a, b) = (g.pick(&s.aliases).to_string(), g.pick(&r.aliases).to_string());
                g.emit("incoming_disc", &[&b, &ic]);
                g.emit("send_disc", &[&ic, &a]);
                g.emit("conf_attr_disc", &[&ic, "interface", &interface]);
                ("conf_attr_disc", ic)
            }
            Mode::GraphMerge => {
                let (oc, ic) = (g.config("out"), g.config("in"));
                let (a, b) = (g.pick(&s.aliases).to_string(), g.pick(&r.aliases).to_string());
                let proto = *PROTOCOLS.choose(&mut g.rng).expect("protocols");
                let mt = format!("MT_{seq:04}");
                g.emit("outgoing_disc", &[&a, &oc]);
                g.emit("incoming_disc", &[&b, &ic]);
                for c in [&oc, &ic] {
                    g.emit("conf_attr_disc", &[c, "protocol", proto]);
                    g.emit("conf_attr_disc", &[c, "message_type", &mt]);
                    g.emit("conf_attr_disc", &[c, "interface", &interface]);
                }
                ("conf_attr_disc", oc)
            }
        };
        for (k, v) in &attrs {
            g.emit_attr(attr_target.0, &attr_target.1, k, v);
        }
        flows.push(TrueFlow {
            sender: s.id.clone(),
            receiver: r.id.clone(),
            interface,
            attrs,
        });
    }
    flows.sort();
    iflows.sort();
    truth.flows = flows;
    truth.iflows = iflows;
    Ok((g.facts, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(systems: usize, mw: usize, flows: usize, dup: f64, seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            n_systems: systems,
            n_hosts: systems.div_ceil(2),
            n_middlewares: mw,
            n_flows: flows,
            duplication_rate: dup,
            rng_seed: seed,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn empty_config_is_empty() {
        let (facts, truth) = generate(&ScenarioConfig::default()).unwrap();
        assert!(facts.is_empty());
        assert_eq!(truth, GroundTruth::default());
    }

    #[test]
    fn middleware_shape() {
        let (_, truth) = generate(&cfg(2, 1, 2, 0.0, 3)).unwrap();
        assert_eq!(truth.systems.len(), 3);
        assert_eq!(truth.flows.len(), 2);
        assert_eq!(truth.iflows.len(), 1);
        let i = &truth.iflows[0];
        assert_eq!(i.middleware, "MW_00");
        assert!(truth.flows.iter().any(|f| f.sender == i.sender && f.receiver == "MW_00"));
        assert!(truth.flows.iter().any(|f| f.sender == "MW_00" && f.receiver == i.receiver));
    }

    #[test]
    fn deterministic() {
        let c = cfg(8, 2, 12, 0.5, 42);
        assert_eq!(generate(&c).unwrap(), generate(&c).unwrap());
        let other = ScenarioConfig { rng_seed: 43, ..c.clone() };
        assert_ne!(generate(&c).unwrap().0, generate(&other).unwrap().0);
    }

    #[test]
    fn aliases_stay_disjoint_and_chained() {
        let (facts, truth) = generate(&cfg(30, 2, 20, 1.0, 9)).unwrap();
        assert!(truth.aliases_disjoint());
        let chains = facts.iter().filter(|f| f.predicate == "same_sys_disc").count();
        let expected: usize = truth.systems.iter().map(|s| s.aliases.len() - 1).sum();
        assert_eq!(chains, expected);
    }

    #[test]
    fn infeasible_configs() {
        assert!(matches!(
            generate(&cfg(1, 0, 1, 0.0, 0)),
            Err(ScenarioError::TooFewSystems { .. })
        ));
        assert!(matches!(
            generate(&cfg(2, 0, 5, 0.0, 0)),
            Err(ScenarioError::TooManyFlows { .. })
        ));
        assert!(matches!(
            generate(&cfg(2, 0, 1, 1.5, 0)),
            Err(ScenarioError::RateOutOfRange { .. })
        ));
    }
}
