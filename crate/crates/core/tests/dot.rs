use std::collections::BTreeSet;

use nimlog::ast::Fact;
use nimlog::export::to_dot;
use nimlog::inference::run_pipeline;
use nimlog::schema::{load_store, Catalog};
use nimlog::sim::{build_paper_fixtures, generate, ScenarioConfig};
use proptest::prelude::*;

#[derive(Debug, PartialEq, Clone)]
enum Tok {
    Id(String),
    Sym(&'static str),
}

fn lex(src: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let mut it = src.chars().peekable();
    while let Some(&c) = it.peek() {
        match c {
            c if c.is_whitespace() => {
                it.next();
            }
            '{' | '}' | '[' | ']' | '=' | ';' | ',' => {
                it.next();
                out.push(Tok::Sym(match c {
                    '{' => "{",
                    '}' => "}",
                    '[' => "[",
                    ']' => "]",
                    '=' => "=",
                    ';' => ";",
                    _ => ",",
                }));
            }
            '-' => {
                it.next();
                if it.next() != Some('>') {
                    return Err("expected ->".into());
                }
                out.push(Tok::Sym("->"));
            }
            '"' => {
                it.next();
                let mut s = String::new();
                loop {
                    match it.next() {
                        None => return Err("unterminated string".into()),
                        Some('"') => break,
                        Some('\\') => match it.next() {
                            Some(e) => {
                                s.push('\\');
                                s.push(e);
                            }
                            None => return Err("dangling escape".into()),
                        },
                        Some('\n') => return Err("raw newline in string".into()),
                        Some(ch) => s.push(ch),
                    }
                }
                out.push(Tok::Id(s));
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut s = String::new();
                while let Some(&ch) = it.peek() {
                    if ch.is_ascii_alphanumeric() || ch == '_' || ch == '.' {
                        s.push(ch);
                        it.next();
                    } else {
                        break;
                    }
                }
                out.push(Tok::Id(s));
            }
            other => return Err(format!("unexpected {other:?}")),
        }
    }
    Ok(out)
}

type Parsed = (BTreeSet<String>, Vec<(String, String)>);

/// Checks the subset of DOT the exporter emits and returns
/// (declared nodes, edge endpoints).
fn check(src: &str) -> Result<Parsed, String> {
    let toks = lex(src)?;
    let mut i = 0;
    let next = |i: &mut usize| -> Result<Tok, String> {
        let t = toks.get(*i).cloned().ok_or("unexpected end")?;
        *i += 1;
        Ok(t)
    };
    let id = |t: Tok| match t {
        Tok::Id(s) => Ok(s),
        t => Err(format!("expected id, got {t:?}")),
    };
    if next(&mut i)? != Tok::Id("digraph".into()) {
        return Err("missing digraph".into());
    }
    id(next(&mut i)?)?;
    if next(&mut i)? != Tok::Sym("{") {
        return Err("missing {".into());
    }
    let mut nodes = BTreeSet::new();
    let mut edges = Vec::new();
    loop {
        let t = next(&mut i)?;
        if t == Tok::Sym("}") {
            break;
        }
        let first = id(t)?;
        let mut stmt_edge = None;
        match toks.get(i) {
            Some(Tok::Sym("=")) => {
                i += 1;
                id(next(&mut i)?)?;
            }
            Some(Tok::Sym("->")) => {
                i += 1;
                stmt_edge = Some((first.clone(), id(next(&mut i)?)?));
            }
            _ => {
                if first != "node" && first != "edge" && first != "graph" {
                    nodes.insert(first.clone());
                }
            }
        }
        if toks.get(i) == Some(&Tok::Sym("[")) {
            i += 1;
            loop {
                id(next(&mut i)?)?;
                if next(&mut i)? != Tok::Sym("=") {
                    return Err("expected = in attribute".into());
                }
                id(next(&mut i)?)?;
                match next(&mut i)? {
                    Tok::Sym(",") => continue,
                    Tok::Sym("]") => break,
                    t => return Err(format!("bad attribute list at {t:?}")),
                }
            }
        }
        if next(&mut i)? != Tok::Sym(";") {
            return Err(format!("missing ; after {first}"));
        }
        edges.extend(stmt_edge);
    }
    if i != toks.len() {
        return Err("trailing tokens".into());
    }
    Ok((nodes, edges))
}

fn assert_valid(dot: &str) {
    let (nodes, edges) = check(dot).unwrap_or_else(|e| panic!("{e}\n{dot}"));
    for (a, b) in edges {
        assert!(nodes.contains(&a) && nodes.contains(&b), "undeclared {a} -> {b}\n{dot}");
    }
}

#[test]
fn fixture_graphs_are_valid_dot() {
    let fx = build_paper_fixtures();
    for f in [&fx.hxp, &fx.h73] {
        let store = load_store(&Catalog::nim(), &f.facts).unwrap();
        assert_valid(&to_dot(&run_pipeline(&store)));
    }
}

#[test]
fn awkward_names_are_escaped() {
    let odd = ["quote\"d", "back\\slash", "new\nline", "brace{}", "semi;colon"];
    let mut facts = Vec::new();
    for (i, n) in odd.iter().enumerate() {
        facts.push(Fact::strs("system_disc", &[n, "u"]));
        facts.push(Fact::strs("attr_disc", &[n, "name", &format!("label \"{i}\"")]));
    }
    for w in odd.windows(2) {
        facts.push(Fact::strs("msg_flow_disc", &[w[0], w[1], "if\"x\"\n"]));
    }
    let store = load_store(&Catalog::nim(), &facts).unwrap();
    let g = run_pipeline(&store);
    assert_eq!(g.systems.len(), odd.len());
    assert_valid(&to_dot(&g));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn simulated_graphs_are_valid_dot(systems in 0..15usize, flows in 0..30usize, seed in any::<u64>()) {
        let config = ScenarioConfig {
            n_systems: systems,
            n_hosts: systems.div_ceil(2),
            n_middlewares: 1,
            n_flows: flows.min((systems + 1) * systems),
            duplication_rate: 0.3,
            rng_seed: seed,
            ..ScenarioConfig::default()
        };
        let (facts, _) = generate(&config).unwrap();
        let store = load_store(&Catalog::nim(), &facts).unwrap();
        assert_valid(&to_dot(&run_pipeline(&store)));
    }
}
