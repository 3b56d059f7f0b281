//! Abstract syntax for Datalog programs: terms, literals, rules, ground facts.
//!
//! The textual form is the one used throughout the rule files shipped with
//! this crate:
//!
//! ```text
//! % comment
//! same_sys(?a, ?b) :- same_sys_disc(?a, ?b).
//! alive(?s) :- system_disc(?s, ?u), not retired_user(?s).
//! host_disc("h1", "uri:h1").
//! ```

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A constant value. Strings and signed integers are the whole domain.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Str(String),
}

impl Value {
    pub fn str(s: impl Into<String>) -> Self {
        Value::Str(s.into())
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            Value::Int(_) => None,
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Str(s)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Str(s) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\t' => f.write_str("\\t")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Variable name without the leading `?`.
    Var(String),
    Const(Value),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(v: impl Into<Value>) -> Self {
        Term::Const(v.into())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(c) => c.fmt(f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub predicate: String,
    pub args: Vec<Term>,
    pub polarity: Polarity,
}

impl Literal {
    pub fn positive(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Literal {
            predicate: predicate.into(),
            args,
            polarity: Polarity::Positive,
        }
    }

    pub fn negative(predicate: impl Into<String>, args: Vec<Term>) -> Self {
        Literal {
            predicate: predicate.into(),
            args,
            polarity: Polarity::Negative,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.polarity == Polarity::Negative
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }

    /// Converts a ground positive literal into a [`Fact`].
    pub fn to_fact(&self) -> Option<Fact> {
        if self.is_negative() {
            return None;
        }
        let args = self
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => Some(c.clone()),
                Term::Var(_) => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Fact {
            predicate: self.predicate.clone(),
            args,
        })
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_negative() {
            f.write_str("not ")?;
        }
        write_atom(f, &self.predicate, &self.args)
    }
}

fn write_atom<T: fmt::Display>(f: &mut fmt::Formatter<'_>, pred: &str, args: &[T]) -> fmt::Result {
    f.write_str(pred)?;
    if args.is_empty() {
        return Ok(());
    }
    f.write_str("(")?;
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        a.fmt(f)?;
    }
    f.write_str(")")
}

/// A ground positive atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fact {
    pub predicate: String,
    pub args: Vec<Value>,
}

impl Fact {
    pub fn new(predicate: impl Into<String>, args: Vec<Value>) -> Self {
        Fact {
            predicate: predicate.into(),
            args,
        }
    }

    /// Shorthand for facts whose arguments are all strings.
    pub fn strs(predicate: impl Into<String>, args: &[&str]) -> Self {
        Fact::new(predicate, args.iter().map(|a| Value::str(*a)).collect())
    }

    pub fn to_literal(&self) -> Literal {
        Literal::positive(
            self.predicate.clone(),
            self.args.iter().cloned().map(Term::Const).collect(),
        )
    }

    pub fn str_arg(&self, i: usize) -> Option<&str> {
        self.args.get(i).and_then(Value::as_str)
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_atom(f, &self.predicate, &self.args)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rule {
    pub head: Literal,
    pub body: Vec<Literal>,
}

impl Rule {
    pub fn new(head: Literal, body: Vec<Literal>) -> Self {
        Rule { head, body }
    }

    /// Variables bound by some positive body literal.
    pub fn positive_variables(&self) -> BTreeSet<&str> {
        self.body
            .iter()
            .filter(|l| !l.is_negative())
            .flat_map(Literal::variables)
            .collect()
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} :-", self.head)?;
        for (i, lit) in self.body.iter().enumerate() {
            let sep = if i + 1 == self.body.len() { "." } else { "," };
            write!(f, "\n    {lit}{sep}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub facts: Vec<Fact>,
}

impl Program {
    pub fn new(rules: Vec<Rule>, facts: Vec<Fact>) -> Self {
        let mut p = Program { rules, facts };
        p.dedup_rules();
        p
    }

    /// Drops structurally identical rules, keeping the first occurrence.
    pub fn dedup_rules(&mut self) {
        let mut seen = BTreeSet::new();
        self.rules.retain(|r| seen.insert(r.clone()));
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty() && self.facts.is_empty()
    }

    /// Concatenates several programs, re-deduplicating rules.
    pub fn merge(programs: impl IntoIterator<Item = Program>) -> Program {
        let mut rules = Vec::new();
        let mut facts = Vec::new();
        for p in programs {
            rules.extend(p.rules);
            facts.extend(p.facts);
        }
        Program::new(rules, facts)
    }

    /// Every predicate name mentioned in a rule head or body, or a fact.
    pub fn predicates(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        for r in &self.rules {
            out.insert(r.head.predicate.as_str());
            for l in &r.body {
                out.insert(l.predicate.as_str());
            }
        }
        for f in &self.facts {
            out.insert(f.predicate.as_str());
        }
        out
    }
}

/// Renders a program in the textual format; the output re-parses to an
/// identical `Program`.
pub fn format_program(program: &Program) -> String {
    let mut out = String::new();
    for r in &program.rules {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    if !program.rules.is_empty() && !program.facts.is_empty() {
        out.push('\n');
    }
    out.push_str(&format_facts(&program.facts));
    out
}

/// One fact per line, terminated with `.`.
pub fn format_facts<'a>(facts: impl IntoIterator<Item = &'a Fact>) -> String {
    let mut out = String::new();
    for f in facts {
        out.push_str(&f.to_string());
        out.push_str(".\n");
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// Head variable not bound by any positive body literal.
    UnboundHead,
    /// Variable of a negated literal not bound by any positive body literal.
    UnboundNegation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SafetyViolation {
    pub rule_index: usize,
    pub variable: String,
    pub kind: ViolationKind,
}

impl fmt::Display for SafetyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ViolationKind::UnboundHead => "head variable",
            ViolationKind::UnboundNegation => "variable in negated literal",
        };
        write!(
            f,
            "rule {}: {what} ?{} does not occur in a positive body literal",
            self.rule_index, self.variable
        )
    }
}

/// Lists every range-restriction violation; empty means the program is safe.
pub fn check_safety(program: &Program) -> Vec<SafetyViolation> {
    let mut out = Vec::new();
    for (rule_index, rule) in program.rules.iter().enumerate() {
        let bound = rule.positive_variables();
        let mut reported = BTreeSet::new();
        for v in rule.head.variables() {
            if !bound.contains(v) && reported.insert(v) {
                out.push(SafetyViolation {
                    rule_index,
                    variable: v.to_string(),
                    kind: ViolationKind::UnboundHead,
                });
            }
        }
        for lit in rule.body.iter().filter(|l| l.is_negative()) {
            for v in lit.variables() {
                if !bound.contains(v) && reported.insert(v) {
                    out.push(SafetyViolation {
                        rule_index,
                        variable: v.to_string(),
                        kind: ViolationKind::UnboundNegation,
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    #[test]
    fn value_escaping() {
        assert_eq!(Value::str("a\"b\\c").to_string(), r#""a\"b\\c""#);
        assert_eq!(Value::Int(-3).to_string(), "-3");
    }

    #[test]
    fn unbound_head_variable() {
        let p = parse_program("p(?x) :- q(?y).").unwrap();
        let v = check_safety(&p);
        assert_eq!(
            v,
            vec![SafetyViolation {
                rule_index: 0,
                variable: "x".into(),
                kind: ViolationKind::UnboundHead
            }]
        );
    }

    #[test]
    fn unbound_negated_variable() {
        let p = parse_program("p(?x) :- q(?x), not r(?z).").unwrap();
        let v = check_safety(&p);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].variable, "z");
        assert_eq!(v[0].kind, ViolationKind::UnboundNegation);
    }

    #[test]
    fn empty_program_formats_to_empty_text() {
        assert_eq!(format_program(&Program::default()), "");
    }

    #[test]
    fn dedup_keeps_first() {
        let p = parse_program("p(?x) :- q(?x). r(?x) :- q(?x). p(?x) :- q(?x).").unwrap();
        assert_eq!(p.rules.len(), 2);
        assert_eq!(p.rules[0].head.predicate, "p");
        assert_eq!(p.rules[1].head.predicate, "r");
    }
}
