//! Recursive-descent parser for `.dl` programs and `.facts` files.

use thiserror::Error;

use crate::ast::{Fact, Literal, Polarity, Program, Rule, Term, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Str(String),
    Int(i64),
    LParen,
    RParen,
    Comma,
    Dot,
    Turnstile,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Var(v) => format!("variable `?{v}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::Int(i) => format!("integer `{i}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Turnstile => "`:-`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(source: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = source.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else if c.is_some() {
                column += 1;
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let err = |message: String| ParseError {
            line: l,
            column: col,
            message,
        };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '%' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump!();
            }
            continue;
        }
        let tok = match c {
            '(' => {
                bump!();
                Tok::LParen
            }
            ')' => {
                bump!();
                Tok::RParen
            }
            ',' => {
                bump!();
                Tok::Comma
            }
            '.' => {
                bump!();
                Tok::Dot
            }
            ':' => {
                bump!();
                if chars.peek() == Some(&'-') {
                    bump!();
                    Tok::Turnstile
                } else {
                    return Err(err("expected `:-`".into()));
                }
            }
            '?' => {
                bump!();
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_ident_char(c) {
                        break;
                    }
                    name.push(c);
                    bump!();
                }
                if name.is_empty() {
                    return Err(err("expected variable name after `?`".into()));
                }
                Tok::Var(name)
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match bump!() {
                        None => return Err(err("unterminated string literal".into())),
                        Some('"') => break,
                        Some('\\') => match bump!() {
                            Some('"') => s.push('"'),
                            Some('\\') => s.push('\\'),
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some(other) => {
                                return Err(err(format!("unknown escape `\\{other}` in string")))
                            }
                            None => return Err(err("unterminated string literal".into())),
                        },
                        Some(c) => s.push(c),
                    }
                }
                Tok::Str(s)
            }
            c if c == '-' || c.is_ascii_digit() => {
                let mut s = String::new();
                s.push(c);
                bump!();
                while let Some(&c) = chars.peek() {
                    if !c.is_ascii_digit() {
                        break;
                    }
                    s.push(c);
                    bump!();
                }
                if s == "-" {
                    return Err(err("expected digits after `-`".into()));
                }
                let v = s
                    .parse::<i64>()
                    .map_err(|_| err(format!("integer `{s}` out of range")))?;
                Tok::Int(v)
            }
            c if c.is_alphabetic() => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if !is_ident_char(c) {
                        break;
                    }
                    s.push(c);
                    bump!();
                }
                Tok::Ident(s)
            }
            other => return Err(err(format!("unexpected character `{other}`"))),
        };
        out.push(Spanned {
            tok,
            line: l,
            column: col,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

/// A parsed top-level clause.
enum Clause {
    Fact(Literal),
    Rule(Rule),
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, at: &Spanned, message: impl Into<String>) -> ParseError {
        ParseError {
            line: at.line,
            column: at.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        let t = self.next();
        if t.tok == want {
            Ok(())
        } else {
            Err(self.error_at(&t, format!("expected {what}, found {}", t.tok.describe())))
        }
    }

    fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let mut polarity = Polarity::Positive;
        if matches!(&self.peek().tok, Tok::Ident(s) if s == "not")
            && matches!(self.peek2(), Tok::Ident(_))
        {
            self.next();
            polarity = Polarity::Negative;
        }
        let t = self.next();
        let predicate = match t.tok {
            Tok::Ident(ref s) => {
                if !s.starts_with(|c: char| c.is_ascii_lowercase()) {
                    return Err(self.error_at(
                        &t,
                        format!("predicate `{s}` must start with a lowercase letter"),
                    ));
                }
                s.clone()
            }
            ref other => {
                return Err(self.error_at(
                    &t,
                    format!("expected predicate name, found {}", other.describe()),
                ))
            }
        };
        let mut args = Vec::new();
        if self.peek().tok == Tok::LParen {
            self.next();
            if self.peek().tok != Tok::RParen {
                loop {
                    args.push(self.term()?);
                    if self.peek().tok == Tok::Comma {
                        self.next();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen, "`)` or `,`")?;
        }
        Ok(Literal {
            predicate,
            args,
            polarity,
        })
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Var(v) => Ok(Term::Var(v)),
            Tok::Str(s) => Ok(Term::Const(Value::Str(s))),
            Tok::Int(i) => Ok(Term::Const(Value::Int(i))),
            ref other => Err(self.error_at(
                &t,
                format!(
                    "expected term (variable, quoted string or integer), found {}",
                    other.describe()
                ),
            )),
        }
    }

    fn clause(&mut self) -> Result<(Clause, Spanned), ParseError> {
        let start = self.peek().clone();
        let head = self.literal()?;
        let t = self.next();
        match t.tok {
            Tok::Dot => {
                if head.is_negative() {
                    return Err(self.error_at(&start, "negated literal cannot be a fact"));
                }
                Ok((Clause::Fact(head), start))
            }
            Tok::Turnstile => {
                if head.is_negative() {
                    return Err(self.error_at(&start, "rule head cannot be negated"));
                }
                let mut body = vec![self.literal()?];
                loop {
                    let t = self.next();
                    match t.tok {
                        Tok::Comma => body.push(self.literal()?),
                        Tok::Dot => break,
                        ref other => {
                            return Err(self.error_at(
                                &t,
                                format!("expected `,` or `.`, found {}", other.describe()),
                            ))
                        }
                    }
                }
                Ok((Clause::Rule(Rule::new(head, body)), start))
            }
            ref other => Err(self.error_at(
                &t,
                format!("expected `.` or `:-`, found {}", other.describe()),
            )),
        }
    }
}

fn ground(lit: Literal, at: &Spanned) -> Result<Fact, ParseError> {
    lit.to_fact().ok_or_else(|| ParseError {
        line: at.line,
        column: at.column,
        message: format!("non-ground fact `{lit}`"),
    })
}

/// Parses a program of interleaved rules and facts. Rule order is kept and
/// structural duplicates are dropped.
pub fn parse_program(source: &str) -> Result<Program, ParseError> {
    let mut p = Parser {
        toks: lex(source)?,
        pos: 0,
    };
    let mut rules = Vec::new();
    let mut facts = Vec::new();
    while !p.at_eof() {
        match p.clause()? {
            (Clause::Rule(r), _) => rules.push(r),
            (Clause::Fact(f), at) => facts.push(ground(f, &at)?),
        }
    }
    Ok(Program::new(rules, facts))
}

/// Parses a file that may only contain ground facts, in file order.
pub fn parse_fact_file(source: &str) -> Result<Vec<Fact>, ParseError> {
    let mut p = Parser {
        toks: lex(source)?,
        pos: 0,
    };
    let mut facts = Vec::new();
    while !p.at_eof() {
        match p.clause()? {
            (Clause::Rule(_), at) => {
                return Err(p.error_at(&at, "rules are not allowed in a fact file"))
            }
            (Clause::Fact(f), at) => facts.push(ground(f, &at)?),
        }
    }
    Ok(facts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn message_flow_rule() {
        let p = parse_program("msg_flow(?s, ?r) :- outgoing_disc(?s, ?C), recv_disc(?C, ?r).")
            .unwrap();
        assert_eq!(p.rules.len(), 1);
        assert!(p.facts.is_empty());
        let r = &p.rules[0];
        assert_eq!(r.head.predicate, "msg_flow");
        assert_eq!(r.head.arity(), 2);
        assert_eq!(r.body.len(), 2);
        assert!(r.body.iter().all(|l| !l.is_negative()));
        assert_eq!(r.body[1].args[0], Term::var("C"));
    }

    #[test]
    fn empty_source() {
        let p = parse_program("").unwrap();
        assert!(p.rules.is_empty() && p.facts.is_empty());
        let p = parse_program("  % only a comment\n\n").unwrap();
        assert!(p.is_empty());
    }

    #[test]
    fn single_ground_fact() {
        let p = parse_program("host_disc(\"h1\", \"uri:a\").").unwrap();
        assert_eq!(p.facts, vec![Fact::strs("host_disc", &["h1", "uri:a"])]);
    }

    #[test]
    fn fact_file_strips_comments() {
        let f = parse_fact_file("same_sys_disc(\"a\",\"b\"). % dup").unwrap();
        assert_eq!(f, vec![Fact::strs("same_sys_disc", &["a", "b"])]);
    }

    #[test]
    fn fact_file_rejects_variables() {
        let e = parse_fact_file("p(?x).").unwrap_err();
        assert!(e.message.contains("non-ground"), "{e}");
        assert_eq!((e.line, e.column), (1, 1));
    }

    #[test]
    fn fact_file_rejects_rules() {
        let e = parse_fact_file("p(\"a\").\nq(?x) :- p(?x).").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn negated_head_rejected() {
        let e = parse_program("not p(?x) :- q(?x).").unwrap_err();
        assert!(e.message.contains("head"), "{e}");
        let e = parse_program("not p(\"a\").").unwrap_err();
        assert!(e.message.contains("fact"), "{e}");
    }

    #[test]
    fn negated_body_literal() {
        let p = parse_program("alive(?s) :- system_disc(?s, ?u), not retired_user(?s).").unwrap();
        assert!(p.rules[0].body[1].is_negative());
        assert_eq!(p.rules[0].body[1].predicate, "retired_user");
    }

    #[test]
    fn error_positions() {
        let e = parse_program("p(?x) :- q(?x)\nr(?y).").unwrap_err();
        assert_eq!((e.line, e.column), (2, 1));
        assert!(e.message.contains("expected `,` or `.`"), "{e}");
        let e = parse_program("p(x).").unwrap_err();
        assert_eq!((e.line, e.column), (1, 3));
        let e = parse_program("P(\"a\").").unwrap_err();
        assert!(e.message.contains("lowercase"));
        let e = parse_program("p(\"a).").unwrap_err();
        assert!(e.message.contains("unterminated"));
    }

    #[test]
    fn integers_and_escapes() {
        let f = parse_fact_file("n(-12, 7, \"q\\\"x\").").unwrap();
        assert_eq!(
            f[0].args,
            vec![Value::Int(-12), Value::Int(7), Value::str("q\"x")]
        );
    }

    #[test]
    fn zero_arity_and_not_as_predicate() {
        let p = parse_program("go :- ready. not(\"a\").").unwrap();
        assert_eq!(p.rules[0].head.arity(), 0);
        assert_eq!(p.facts[0].predicate, "not");
    }
}
