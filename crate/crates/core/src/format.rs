//! Plain-text system documents. One directive per line, `#` starts a comment
//! line, vertices are numbered from 1:
//!
//! ```text
//! n 5
//! e 1 2
//! l 4
//! rule 1 anti 1
//! rule 4 count {0,2}
//! rule 5 subsets [{},{1},{1,4}]
//! init ++-+-
//! ```
//!
//! `n` must come before anything that names a vertex. Vertices without a
//! `rule` line default to majority over their own degree. Parsing and
//! rendering round-trip.

use std::fmt::Write as _;

use thiserror::Error;

use crate::engine::{EngineError, State, SystemConfig};
use crate::graph::{Graph, GraphError};
use crate::rules::{majority_rule, CountSet, Rule, RuleError, SubsetSystem};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct FormatError {
    pub line: usize,
    pub kind: FormatErrorKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatErrorKind {
    #[error("expected `n <count>` before this directive")]
    MissingVertexCount,
    #[error("`n` given twice")]
    DuplicateVertexCount,
    #[error("unknown directive {0:?}")]
    UnknownDirective(String),
    #[error("malformed arguments: {0}")]
    BadArguments(String),
    #[error("vertex {0} out of range 1..={1}")]
    VertexRange(usize, usize),
    #[error("rule for vertex {0} given twice")]
    DuplicateRule(usize),
    #[error("edge between {0} and {1} given twice")]
    DuplicateEdge(usize, usize),
    #[error("edge pairs vertex {0} with itself; use `l {0}` for a loop")]
    SelfEdge(usize),
    #[error("loop at {0} given twice")]
    DuplicateLoop(usize),
    #[error(transparent)]
    Graph(GraphError),
    #[error(transparent)]
    Rule(RuleError),
    #[error(transparent)]
    Engine(EngineError),
}

fn fail(line: usize, kind: FormatErrorKind) -> FormatError {
    FormatError { line, kind }
}

fn bad(line: usize, msg: impl Into<String>) -> FormatError {
    fail(line, FormatErrorKind::BadArguments(msg.into()))
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SystemDocument {
    pub config: SystemConfig,
    /// Initial states in file order; may be empty.
    pub inits: Vec<State>,
}

fn parse_vertex(tok: &str, n: usize, line: usize) -> Result<usize, FormatError> {
    let v: usize = tok
        .parse()
        .map_err(|_| bad(line, format!("{tok:?} is not a vertex number")))?;
    if v == 0 || v > n {
        return Err(fail(line, FormatErrorKind::VertexRange(v, n)));
    }
    Ok(v - 1)
}

fn parse_count_list(body: &str, line: usize) -> Result<Vec<u32>, FormatError> {
    let inner = body
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| bad(line, "count set must be braced, like {0,2,3}"))?;
    let inner = inner.trim();
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse()
                .map_err(|_| bad(line, format!("{:?} is not a count", tok.trim())))
        })
        .collect()
}

fn parse_subset_family(body: &str, n: usize, line: usize) -> Result<Vec<u32>, FormatError> {
    let inner = body
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| bad(line, "subset family must be bracketed, like [{},{2}]"))?;
    let mut masks = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for ch in inner.chars() {
        match ch {
            '{' => {
                depth += 1;
                cur.push(ch);
            }
            '}' => {
                if depth == 0 {
                    return Err(bad(line, "unbalanced braces in subset family"));
                }
                depth -= 1;
                cur.push(ch);
            }
            ',' if depth == 0 => {}
            _ => cur.push(ch),
        }
        if depth == 0 && !cur.trim().is_empty() {
            let sub = cur.trim().to_string();
            cur.clear();
            let verts = parse_count_list(&sub, line)?;
            let mut mask = 0u32;
            for v in verts {
                let v = parse_vertex(&v.to_string(), n, line)?;
                mask |= 1 << v;
            }
            masks.push(mask);
        }
    }
    if depth != 0 || !cur.trim().is_empty() {
        return Err(bad(line, "unbalanced braces in subset family"));
    }
    Ok(masks)
}

fn parse_rule_spec(rest: &[&str], n: usize, line: usize) -> Result<Rule, FormatError> {
    match rest {
        ["thr", r] => {
            let r = r
                .parse()
                .map_err(|_| bad(line, format!("{r:?} is not a threshold")))?;
            Ok(Rule::Threshold(r))
        }
        ["anti", r] => {
            let r = r
                .parse()
                .map_err(|_| bad(line, format!("{r:?} is not a threshold")))?;
            Ok(Rule::AntiThreshold(r))
        }
        ["count", body] => {
            let counts = parse_count_list(body, line)?;
            let cs =
                CountSet::from_counts(counts).map_err(|e| fail(line, FormatErrorKind::Rule(e)))?;
            Ok(Rule::CountSet(cs))
        }
        ["subsets", body] => {
            let masks = parse_subset_family(body, n, line)?;
            Ok(Rule::SubsetSystem(SubsetSystem::new(masks)))
        }
        _ => Err(bad(
            line,
            "rule spec must be `thr R`, `anti R`, `count {..}`, or `subsets [..]`",
        )),
    }
}

pub fn parse_system(text: &str) -> Result<SystemDocument, FormatError> {
    let mut n: Option<(usize, usize)> = None; // (count, declaring line)
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut loops: Vec<usize> = Vec::new();
    let mut rules: Vec<Option<Rule>> = Vec::new();
    let mut inits: Vec<(String, usize)> = Vec::new();
    let mut last_line = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let need_n = |n: &Option<(usize, usize)>| {
            n.map(|(c, _)| c)
                .ok_or_else(|| fail(lineno, FormatErrorKind::MissingVertexCount))
        };
        match toks.as_slice() {
            ["n", count] => {
                if n.is_some() {
                    return Err(fail(lineno, FormatErrorKind::DuplicateVertexCount));
                }
                let c: usize = count
                    .parse()
                    .map_err(|_| bad(lineno, format!("{count:?} is not a vertex count")))?;
                n = Some((c, lineno));
                rules = vec![None; c];
            }
            ["e", a, b] => {
                let c = need_n(&n)?;
                let a = parse_vertex(a, c, lineno)?;
                let b = parse_vertex(b, c, lineno)?;
                if a == b {
                    return Err(fail(lineno, FormatErrorKind::SelfEdge(a + 1)));
                }
                if edges
                    .iter()
                    .any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a))
                {
                    return Err(fail(
                        lineno,
                        FormatErrorKind::DuplicateEdge(a.min(b) + 1, a.max(b) + 1),
                    ));
                }
                edges.push((a, b));
            }
            ["l", v] => {
                let c = need_n(&n)?;
                let v = parse_vertex(v, c, lineno)?;
                if loops.contains(&v) {
                    return Err(fail(lineno, FormatErrorKind::DuplicateLoop(v + 1)));
                }
                loops.push(v);
            }
            ["rule", v, rest @ ..] => {
                let c = need_n(&n)?;
                let v = parse_vertex(v, c, lineno)?;
                if rules[v].is_some() {
                    return Err(fail(lineno, FormatErrorKind::DuplicateRule(v + 1)));
                }
                rules[v] = Some(parse_rule_spec(rest, c, lineno)?);
            }
            ["init", s] => {
                need_n(&n)?;
                inits.push((s.to_string(), lineno));
            }
            [dir, ..] => {
                return Err(fail(
                    lineno,
                    FormatErrorKind::UnknownDirective(dir.to_string()),
                ));
            }
            [] => unreachable!("blank lines were skipped"),
        }
    }

    let (count, n_line) =
        n.ok_or_else(|| fail(last_line.max(1), FormatErrorKind::MissingVertexCount))?;
    let graph =
        Graph::build(count, &edges, &loops).map_err(|e| fail(n_line, FormatErrorKind::Graph(e)))?;
    let rules: Vec<Rule> = rules
        .into_iter()
        .enumerate()
        .map(|(v, r)| r.unwrap_or_else(|| majority_rule(graph.degree(v))))
        .collect();
    let config =
        SystemConfig::new(graph, rules).map_err(|e| fail(n_line, FormatErrorKind::Engine(e)))?;
    let mut states = Vec::with_capacity(inits.len());
    for (s, lineno) in inits {
        states.push(State::parse(&s, count).map_err(|e| fail(lineno, FormatErrorKind::Engine(e)))?);
    }
    Ok(SystemDocument {
        config,
        inits: states,
    })
}

fn render_rule(rule: &Rule, out: &mut String) {
    match rule {
        Rule::Threshold(r) => {
            let _ = write!(out, "thr {r}");
        }
        Rule::AntiThreshold(r) => {
            let _ = write!(out, "anti {r}");
        }
        Rule::CountSet(cs) => {
            let counts: Vec<String> = cs.counts().map(|c| c.to_string()).collect();
            let _ = write!(out, "count {{{}}}", counts.join(","));
        }
        Rule::SubsetSystem(ss) => {
            let subsets: Vec<String> = ss
                .subsets()
                .iter()
                .map(|&mask| {
                    let verts: Vec<String> = (0..32)
                        .filter(|&v| mask >> v & 1 == 1)
                        .map(|v| (v + 1).to_string())
                        .collect();
                    format!("{{{}}}", verts.join(","))
                })
                .collect();
            let _ = write!(out, "subsets [{}]", subsets.join(","));
        }
    }
}

/// Renders a document that [`parse_system`] maps back to the same config and
/// initial states. Every rule is written out, defaults included.
pub fn render_system(cfg: &SystemConfig, inits: &[State]) -> String {
    let n = cfg.n();
    let mut out = String::new();
    let _ = writeln!(out, "n {n}");
    for (a, b) in cfg.graph().edges() {
        let _ = writeln!(out, "e {} {}", a + 1, b + 1);
    }
    for v in cfg.graph().loop_vertices() {
        let _ = writeln!(out, "l {}", v + 1);
    }
    for v in 0..n {
        let _ = write!(out, "rule {} ", v + 1);
        render_rule(cfg.rule(v), &mut out);
        out.push('\n');
    }
    for s in inits {
        let _ = writeln!(out, "init {}", s.render(n));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph;
    use crate::rules::minority_rule;

    #[test]
    fn parses_the_one_edge_contrarian() {
        let doc = parse_system("n 2\ne 1 2\nrule 1 anti 1\nrule 2 thr 1\ninit ++\n").unwrap();
        let want = SystemConfig::new(
            graph::single_edge(),
            vec![minority_rule(1), majority_rule(1)],
        )
        .unwrap();
        assert_eq!(doc.config, want);
        assert_eq!(doc.inits, vec![State(0b11)]);
    }

    #[test]
    fn missing_rules_default_to_majority() {
        let doc = parse_system("n 3\ne 1 2\ne 2 3\nrule 1 count {0}\n").unwrap();
        assert_eq!(doc.config.rule(1), &Rule::Threshold(2));
        assert_eq!(doc.config.rule(2), &Rule::Threshold(1));
    }

    #[test]
    fn comments_and_blanks_are_skipped() {
        let doc = parse_system("# header\n\nn 2\n  # indented comment\ne 1 2\n").unwrap();
        assert_eq!(doc.config.n(), 2);
    }

    #[test]
    fn subset_rule_round_trips_through_text() {
        let text = "n 3\ne 1 2\ne 1 3\nl 2\nrule 1 subsets [{},{2},{2,3}]\nrule 2 thr 1\nrule 3 thr 2\ninit +-+\n";
        let doc = parse_system(text).unwrap();
        let rendered = render_system(&doc.config, &doc.inits);
        let again = parse_system(&rendered).unwrap();
        assert_eq!(again.config, doc.config);
        assert_eq!(again.inits, doc.inits);
    }

    #[test]
    fn render_parse_round_trip_over_generated_systems() {
        for k in 2..=4 {
            let g = graph::gk(k).unwrap();
            let cfg = SystemConfig::all_majority(g);
            let inits = vec![State(0b111), State(0)];
            let doc = parse_system(&render_system(&cfg, &inits)).unwrap();
            assert_eq!(doc.config, cfg);
            assert_eq!(doc.inits, inits);
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_system("n 2\ne 1 3\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.kind, FormatErrorKind::VertexRange(3, 2));

        let err = parse_system("e 1 2\n").unwrap_err();
        assert_eq!(err.line, 1);
        assert_eq!(err.kind, FormatErrorKind::MissingVertexCount);

        let err = parse_system("n 2\nrule 1 thr 1\nrule 1 thr 0\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert_eq!(err.kind, FormatErrorKind::DuplicateRule(1));

        let err = parse_system("n 2\nfoo 1\n").unwrap_err();
        assert_eq!(err.line, 2);

        let err = parse_system("n 2\ne 1 2\ninit +++\n").unwrap_err();
        assert_eq!(err.line, 3);
    }

    #[test]
    fn duplicate_edges_are_reported_at_the_offending_line() {
        let err = parse_system("n 2\ne 1 2\ne 2 1\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert_eq!(err.kind, FormatErrorKind::DuplicateEdge(1, 2));

        let err = parse_system("n 3\ne 2 2\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(err.kind, FormatErrorKind::SelfEdge(2));

        let err = parse_system("n 3\nl 3\nl 3\n").unwrap_err();
        assert_eq!(err.line, 3);
        assert_eq!(err.kind, FormatErrorKind::DuplicateLoop(3));
    }
}
