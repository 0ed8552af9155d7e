//! Line-oriented text formats for traces and walks.
//!
//! A trace document:
//!
//! ```text
//! ledger-trace v1
//! delta 1/1
//! node a
//! node b
//! edge a b
//! init a 3
//! tick 0 a b 1
//! tick 1 empty
//! ```
//!
//! One directive per line. Blank lines are ignored and `#` starts a comment
//! that runs to the end of the line. Nodes must be declared before they are
//! referenced, and ticks must be numbered `0, 1, 2, ...` with no gaps or
//! repeats. [`emit_trace`] writes the canonical form, which [`parse_trace`]
//! reads back to an equal [`Trace`].
//!
//! A walk document is one bitstring per line, optionally preceded by a
//! `# d=<n>` header.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::graph::{NodeId, RecognitionGraph};
use crate::ledger::{Event, LedgerState, Quantum, Trace};
use crate::scheduler::{HypercubeVertex, Walk, MAX_DIM};

pub const HEADER: &str = "ledger-trace";
pub const VERSION: &str = "v1";

/// Stable machine-readable error codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    InvalidUtf8,
    MissingHeader,
    UnsupportedVersion,
    UnknownDirective,
    Arity,
    BadInteger,
    BadDelta,
    NonPositiveDelta,
    NonReducedDelta,
    DuplicateDelta,
    MissingDelta,
    DuplicateNode,
    UnknownNode,
    SelfLoop,
    DuplicateEdge,
    UnknownEdge,
    DuplicateInit,
    DuplicateTick,
    TickOutOfOrder,
    ZeroMagnitude,
    BadBits,
    InconsistentWidth,
    BadDimension,
    MissingDimension,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::InvalidUtf8 => "E-UTF8",
            ErrorCode::MissingHeader => "E-HEADER",
            ErrorCode::UnsupportedVersion => "E-VERSION",
            ErrorCode::UnknownDirective => "E-DIRECTIVE",
            ErrorCode::Arity => "E-ARITY",
            ErrorCode::BadInteger => "E-INTEGER",
            ErrorCode::BadDelta => "E-DELTA-SYNTAX",
            ErrorCode::NonPositiveDelta => "E-DELTA-NONPOSITIVE",
            ErrorCode::NonReducedDelta => "E-DELTA-NONREDUCED",
            ErrorCode::DuplicateDelta => "E-DELTA-DUPLICATE",
            ErrorCode::MissingDelta => "E-DELTA-MISSING",
            ErrorCode::DuplicateNode => "E-NODE-DUPLICATE",
            ErrorCode::UnknownNode => "E-NODE-UNKNOWN",
            ErrorCode::SelfLoop => "E-SELF-LOOP",
            ErrorCode::DuplicateEdge => "E-EDGE-DUPLICATE",
            ErrorCode::UnknownEdge => "E-EDGE-UNKNOWN",
            ErrorCode::DuplicateInit => "E-INIT-DUPLICATE",
            ErrorCode::DuplicateTick => "E-TICK-DUPLICATE",
            ErrorCode::TickOutOfOrder => "E-TICK-ORDER",
            ErrorCode::ZeroMagnitude => "E-ZERO-MAGNITUDE",
            ErrorCode::BadBits => "E-BITS",
            ErrorCode::InconsistentWidth => "E-WIDTH",
            ErrorCode::BadDimension => "E-DIMENSION",
            ErrorCode::MissingDimension => "E-DIMENSION-MISSING",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A parse failure at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {code}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub code: ErrorCode,
    pub message: String,
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
    /// Column just past the last character, for errors about missing tokens.
    end: usize,
}

impl Line<'_> {
    fn err(&self, column: usize, code: ErrorCode, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.number,
            column,
            code,
            message: message.into(),
        }
    }

    fn at(&self, tok: Token<'_>, code: ErrorCode, message: impl Into<String>) -> ParseError {
        self.err(tok.column, code, message)
    }

    fn expect_arity(&self, counts: &[usize], usage: &str) -> Result<(), ParseError> {
        if counts.contains(&self.tokens.len()) {
            return Ok(());
        }
        let column = self
            .tokens
            .get(counts.iter().copied().max().unwrap_or(0))
            .map_or(self.end, |t| t.column);
        Err(self.err(column, ErrorCode::Arity, format!("expected `{usage}`")))
    }
}

fn decode(text: &[u8]) -> Result<&str, ParseError> {
    std::str::from_utf8(text).map_err(|e| {
        let good = &text[..e.valid_up_to()];
        let line = good.iter().filter(|&&b| b == b'\n').count() + 1;
        let line_start = good.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
        let column = std::str::from_utf8(&good[line_start..]).map_or(1, |s| s.chars().count() + 1);
        ParseError {
            line,
            column,
            code: ErrorCode::InvalidUtf8,
            message: "input is not valid UTF-8".into(),
        }
    })
}

/// Splits text into non-empty, comment-stripped lines of tokens with
/// 1-based character columns.
fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut start: Option<(usize, usize)> = None;
        let mut chars = 0usize;
        for (byte, ch) in content.char_indices() {
            chars += 1;
            if ch.is_whitespace() {
                if let Some((b, c)) = start.take() {
                    tokens.push(Token {
                        text: &content[b..byte],
                        column: c,
                    });
                }
            } else if start.is_none() {
                start = Some((byte, chars));
            }
        }
        if let Some((b, c)) = start {
            tokens.push(Token {
                text: &content[b..],
                column: c,
            });
        }
        (!tokens.is_empty()).then(|| Line {
            number: i + 1,
            tokens,
            end: chars + 1,
        })
    })
}

fn parse_int<T: std::str::FromStr>(
    line: &Line<'_>,
    tok: Token<'_>,
    what: &str,
) -> Result<T, ParseError> {
    tok.text.parse().map_err(|_| {
        line.at(
            tok,
            ErrorCode::BadInteger,
            format!("{what} `{}` is not an integer in range", tok.text),
        )
    })
}

/// Parses a trace document.
pub fn parse_trace(text: &[u8]) -> Result<Trace, ParseError> {
    let text = decode(text)?;
    let mut lines = lines(text);

    let header = lines.next().ok_or(ParseError {
        line: 1,
        column: 1,
        code: ErrorCode::MissingHeader,
        message: format!("expected `{HEADER} {VERSION}`"),
    })?;
    if header.tokens[0].text != HEADER {
        return Err(header.at(
            header.tokens[0],
            ErrorCode::MissingHeader,
            format!("expected `{HEADER} {VERSION}`"),
        ));
    }
    header.expect_arity(&[2], &format!("{HEADER} {VERSION}"))?;
    if header.tokens[1].text != VERSION {
        return Err(header.at(
            header.tokens[1],
            ErrorCode::UnsupportedVersion,
            format!("unsupported version `{}`", header.tokens[1].text),
        ));
    }

    let mut quantum: Option<Quantum> = None;
    let mut nodes: BTreeSet<NodeId> = BTreeSet::new();
    let mut edges: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    let mut init: BTreeMap<NodeId, i64> = BTreeMap::new();
    let mut events: Vec<Event> = Vec::new();
    let mut last_line = header.number;

    for line in lines {
        last_line = line.number;
        let head = line.tokens[0];
        let node_ref = |tok: Token<'_>| -> Result<NodeId, ParseError> {
            let id = NodeId::from(tok.text);
            if nodes.contains(&id) {
                Ok(id)
            } else {
                Err(line.at(
                    tok,
                    ErrorCode::UnknownNode,
                    format!("node `{}` is not declared", tok.text),
                ))
            }
        };
        match head.text {
            "delta" => {
                line.expect_arity(&[2], "delta <p>/<q>")?;
                let tok = line.tokens[1];
                if quantum.is_some() {
                    return Err(line.at(head, ErrorCode::DuplicateDelta, "delta declared twice"));
                }
                quantum = Some(parse_delta(&line, tok)?);
            }
            "node" => {
                line.expect_arity(&[2], "node <id>")?;
                let tok = line.tokens[1];
                if !nodes.insert(NodeId::from(tok.text)) {
                    return Err(line.at(
                        tok,
                        ErrorCode::DuplicateNode,
                        format!("node `{}` declared twice", tok.text),
                    ));
                }
            }
            "edge" => {
                line.expect_arity(&[3], "edge <u> <v>")?;
                let (tu, tv) = (line.tokens[1], line.tokens[2]);
                let u = node_ref(tu)?;
                let v = node_ref(tv)?;
                if u == v {
                    return Err(line.at(tv, ErrorCode::SelfLoop, format!("self-loop on `{u}`")));
                }
                let key = if u < v { (u, v) } else { (v, u) };
                if !edges.insert(key) {
                    return Err(line.at(
                        head,
                        ErrorCode::DuplicateEdge,
                        format!("edge {} {} declared twice", tu.text, tv.text),
                    ));
                }
            }
            "init" => {
                line.expect_arity(&[3], "init <node> <k>")?;
                let node = node_ref(line.tokens[1])?;
                let k: i64 = parse_int(&line, line.tokens[2], "balance")?;
                if init.insert(node, k).is_some() {
                    return Err(line.at(
                        line.tokens[1],
                        ErrorCode::DuplicateInit,
                        "initial balance given twice",
                    ));
                }
            }
            "tick" => {
                line.expect_arity(&[3, 5], "tick <t> empty | tick <t> <u> <v> <k>")?;
                let ttok = line.tokens[1];
                let t: u64 = parse_int(&line, ttok, "tick")?;
                let expected = events.len() as u64;
                if t < expected {
                    return Err(line.at(
                        ttok,
                        ErrorCode::DuplicateTick,
                        format!("tick {t} already has an event"),
                    ));
                }
                if t > expected {
                    return Err(line.at(
                        ttok,
                        ErrorCode::TickOutOfOrder,
                        format!("expected tick {expected}, found {t}"),
                    ));
                }
                if line.tokens.len() == 3 {
                    let tok = line.tokens[2];
                    if tok.text != "empty" {
                        return Err(line.at(
                            tok,
                            ErrorCode::Arity,
                            "expected `empty` or `<u> <v> <k>`",
                        ));
                    }
                    events.push(Event::Empty);
                } else {
                    let (tu, tv, tk) = (line.tokens[2], line.tokens[3], line.tokens[4]);
                    let u = node_ref(tu)?;
                    let v = node_ref(tv)?;
                    if u == v {
                        return Err(line.at(
                            tv,
                            ErrorCode::SelfLoop,
                            format!("self-loop on `{u}`"),
                        ));
                    }
                    let key = if u < v {
                        (u.clone(), v.clone())
                    } else {
                        (v.clone(), u.clone())
                    };
                    if !edges.contains(&key) {
                        return Err(line.at(
                            tu,
                            ErrorCode::UnknownEdge,
                            format!("edge {u} {v} is not declared"),
                        ));
                    }
                    let k: i64 = parse_int(&line, tk, "magnitude")?;
                    if k == 0 {
                        return Err(line.at(
                            tk,
                            ErrorCode::ZeroMagnitude,
                            "posting magnitude must be nonzero",
                        ));
                    }
                    events.push(Event::post(u, v, k));
                }
            }
            other => {
                return Err(line.at(
                    head,
                    ErrorCode::UnknownDirective,
                    format!("unknown directive `{other}`"),
                ));
            }
        }
    }

    let quantum = quantum.ok_or(ParseError {
        line: last_line,
        column: 1,
        code: ErrorCode::MissingDelta,
        message: "no `delta` directive".into(),
    })?;
    let graph =
        RecognitionGraph::build(nodes, edges).expect("declarations validated while parsing");
    let initial = LedgerState::with_balances(&graph, quantum, init)
        .expect("init nodes validated while parsing");
    Ok(Trace::new(graph, initial, events).expect("events validated while parsing"))
}

fn parse_delta(line: &Line<'_>, tok: Token<'_>) -> Result<Quantum, ParseError> {
    let syntax = || {
        line.at(
            tok,
            ErrorCode::BadDelta,
            format!("delta `{}` is not of the form p/q", tok.text),
        )
    };
    let (p, q) = tok.text.split_once('/').ok_or_else(syntax)?;
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let signed = |s: &str| s.strip_prefix('-').is_some_and(digits);
    if signed(p) || signed(q) {
        return Err(line.at(tok, ErrorCode::NonPositiveDelta, "delta must be positive"));
    }
    if !digits(p) || !digits(q) {
        return Err(syntax());
    }
    let (p, q): (u64, u64) = match (p.parse(), q.parse()) {
        (Ok(p), Ok(q)) => (p, q),
        _ => return Err(line.at(tok, ErrorCode::BadDelta, "delta components exceed 64 bits")),
    };
    if p == 0 || q == 0 {
        return Err(line.at(tok, ErrorCode::NonPositiveDelta, "delta must be positive"));
    }
    Quantum::new(p, q).map_err(|_| {
        line.at(
            tok,
            ErrorCode::NonReducedDelta,
            format!("delta {p}/{q} is not in lowest terms"),
        )
    })
}

/// Canonical text of a trace: header, delta, nodes, edges, nonzero initial
/// balances, then ticks; single spaces and a trailing newline.
pub fn emit_trace(trace: &Trace) -> String {
    let mut out = String::new();
    let g = trace.graph();
    writeln!(out, "{HEADER} {VERSION}").unwrap();
    writeln!(out, "delta {}", trace.quantum()).unwrap();
    for node in g.nodes() {
        writeln!(out, "node {node}").unwrap();
    }
    for (u, v) in g.undirected_edges() {
        writeln!(out, "edge {u} {v}").unwrap();
    }
    for (node, k) in trace.initial().balances() {
        if k != 0 {
            writeln!(out, "init {node} {k}").unwrap();
        }
    }
    for (t, event) in trace.events().iter().enumerate() {
        match event {
            Event::Empty => writeln!(out, "tick {t} empty").unwrap(),
            Event::Post {
                from,
                to,
                magnitude,
            } => writeln!(out, "tick {t} {from} {to} {magnitude}").unwrap(),
        }
    }
    out
}

/// Parses a walk document: optional `# d=<n>` header, then one bitstring per
/// line. Without a header the first vertex fixes the dimension.
pub fn parse_walk(text: &[u8]) -> Result<Walk, ParseError> {
    let text = decode(text)?;
    let mut dim: Option<u32> = None;
    let mut vertices = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let trimmed = raw.trim_start();
        let indent = raw[..raw.len() - trimmed.len()].chars().count();
        if let Some(comment) = trimmed.strip_prefix('#') {
            let body = comment.trim();
            if let Some(value) = body.strip_prefix("d=") {
                let column = indent + 1 + comment.find("d=").unwrap_or(0) + 1;
                let err = |msg: String| ParseError {
                    line: number,
                    column,
                    code: ErrorCode::BadDimension,
                    message: msg,
                };
                if dim.is_some() || !vertices.is_empty() {
                    return Err(err("dimension header must come first and only once".into()));
                }
                let d: u32 = value
                    .trim()
                    .parse()
                    .map_err(|_| err(format!("bad dimension `{value}`")))?;
                if !(1..=MAX_DIM).contains(&d) {
                    return Err(err(format!("dimension {d} outside 1..={MAX_DIM}")));
                }
                dim = Some(d);
            }
            continue;
        }
        let Some(line) = lines(raw).next() else {
            continue;
        };
        let line = Line { number, ..line };
        line.expect_arity(&[1], "<bits>")?;
        let tok = line.tokens[0];
        if !tok.text.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(line.at(
                tok,
                ErrorCode::BadBits,
                format!("`{}` is not a bitstring", tok.text),
            ));
        }
        let width = tok.text.len();
        let d = *dim.get_or_insert(width.min(u32::MAX as usize) as u32);
        if width != d as usize {
            return Err(line.at(
                tok,
                ErrorCode::InconsistentWidth,
                format!("expected {d} bits, found {width}"),
            ));
        }
        let v = HypercubeVertex::parse(tok.text)
            .map_err(|e| line.at(tok, ErrorCode::BadDimension, e.to_string()))?;
        vertices.push(v);
    }
    let dim = dim.ok_or(ParseError {
        line: 1,
        column: 1,
        code: ErrorCode::MissingDimension,
        message: "empty walk without a `# d=<n>` header".into(),
    })?;
    Ok(Walk::new(dim, vertices))
}

/// Walk document with a `# d=<n>` header.
pub fn emit_walk(walk: &Walk) -> String {
    let mut out = format!("# d={}\n", walk.dim);
    for v in &walk.vertices {
        writeln!(out, "{v}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE_ONE: &str = "ledger-trace v1\n\
        delta 1/1\n\
        node a\nnode b\nnode c\nnode d\n\
        edge a b\nedge a c\nedge a d\nedge b c\nedge c d\n";

    fn err(text: &str) -> ParseError {
        parse_trace(text.as_bytes()).unwrap_err()
    }

    #[test]
    fn single_tick() {
        let t = parse_trace(format!("{EXAMPLE_ONE}tick 0 a b 1\n").as_bytes()).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.events()[0], Event::post("a", "b", 1));
        assert_eq!(t.graph().directed_edge_count(), 10);
    }

    #[test]
    fn header_and_delta_only() {
        let t = parse_trace(b"ledger-trace v1\ndelta 1/2\n").unwrap();
        assert!(t.is_empty());
        assert_eq!(t.graph().node_count(), 0);
        assert_eq!(t.quantum(), Quantum::new(1, 2).unwrap());
        assert_eq!(emit_trace(&t), "ledger-trace v1\ndelta 1/2\n");
    }

    #[test]
    fn duplicate_tick_points_at_second_line() {
        let text = format!("{EXAMPLE_ONE}tick 0 a b 1\ntick 0 c d 1\n");
        let e = err(&text);
        assert_eq!(e.code, ErrorCode::DuplicateTick);
        assert_eq!((e.line, e.column), (13, 6));
    }

    #[test]
    fn distinct_codes() {
        let cases: &[(&str, ErrorCode)] = &[
            ("", ErrorCode::MissingHeader),
            ("ledger-trace v2\n", ErrorCode::UnsupportedVersion),
            ("ledger-trace v1\n", ErrorCode::MissingDelta),
            ("ledger-trace v1\ndelta 2/4\n", ErrorCode::NonReducedDelta),
            ("ledger-trace v1\ndelta 0/1\n", ErrorCode::NonPositiveDelta),
            ("ledger-trace v1\ndelta -1/2\n", ErrorCode::NonPositiveDelta),
            ("ledger-trace v1\ndelta 0.5\n", ErrorCode::BadDelta),
            (
                "ledger-trace v1\ndelta 1/1\ndelta 1/1\n",
                ErrorCode::DuplicateDelta,
            ),
            (
                "ledger-trace v1\ndelta 1/1\nnode a\nnode a\n",
                ErrorCode::DuplicateNode,
            ),
            (
                "ledger-trace v1\ndelta 1/1\nnode a\nedge a z\n",
                ErrorCode::UnknownNode,
            ),
            (
                "ledger-trace v1\ndelta 1/1\nnode a\nedge a a\n",
                ErrorCode::SelfLoop,
            ),
            (
                "ledger-trace v1\ndelta 1/1\nnode a\nnode b\nedge a b\nedge b a\n",
                ErrorCode::DuplicateEdge,
            ),
            (
                "ledger-trace v1\ndelta 1/1\nnode a\nnode b\ntick 0 a b 1\n",
                ErrorCode::UnknownEdge,
            ),
            (
                "ledger-trace v1\ndelta 1/1\nnode a\nnode b\nedge a b\ntick 0 a b 0\n",
                ErrorCode::ZeroMagnitude,
            ),
            (
                "ledger-trace v1\ndelta 1/1\nnode a\nnode b\nedge a b\ntick 1 a b 1\n",
                ErrorCode::TickOutOfOrder,
            ),
            (
                "ledger-trace v1\ndelta 1/1\nnode a\ninit a 1\ninit a 2\n",
                ErrorCode::DuplicateInit,
            ),
            (
                "ledger-trace v1\ndelta 1/1\nnode a\ninit a x\n",
                ErrorCode::BadInteger,
            ),
            (
                "ledger-trace v1\ndelta 1/1\nfrobnicate\n",
                ErrorCode::UnknownDirective,
            ),
            ("ledger-trace v1\ndelta 1/1\nnode a b\n", ErrorCode::Arity),
            (
                "ledger-trace v1\ndelta 1/1\ntick 0 nothing\n",
                ErrorCode::Arity,
            ),
        ];
        for (text, code) in cases {
            assert_eq!(err(text).code, *code, "{text:?}");
        }
    }

    #[test]
    fn columns_are_character_based() {
        let e = err("ledger-trace v1\ndelta 1/1\n  node é\n  edge é zz\n");
        assert_eq!(e.code, ErrorCode::UnknownNode);
        assert_eq!((e.line, e.column), (4, 10));
    }

    #[test]
    fn invalid_utf8_is_located() {
        let e = parse_trace(b"ledger-trace v1\ndelta 1/1\nnode a\xff\n").unwrap_err();
        assert_eq!(e.code, ErrorCode::InvalidUtf8);
        assert_eq!((e.line, e.column), (3, 7));
    }

    #[test]
    fn comments_and_blank_lines() {
        let t = parse_trace(
            b"# leading comment\n\nledger-trace v1 # trailing\ndelta 1/1\n\nnode a # x\n",
        )
        .unwrap();
        assert_eq!(t.graph().node_count(), 1);
    }

    #[test]
    fn canonical_emission() {
        let text = "ledger-trace v1\ndelta 3/2\nnode b\nnode a\nedge b a\ninit b -4\ninit a 0\ntick 0 b a 2\ntick 1 empty\n";
        let t = parse_trace(text.as_bytes()).unwrap();
        let canon = emit_trace(&t);
        assert_eq!(
            canon,
            "ledger-trace v1\ndelta 3/2\nnode a\nnode b\nedge a b\ninit b -4\ntick 0 b a 2\ntick 1 empty\n"
        );
        assert_eq!(parse_trace(canon.as_bytes()).unwrap(), t);
    }

    #[test]
    fn walk_round_trip_and_errors() {
        let w = parse_walk(b"# d=3\n000\n001\n011\n").unwrap();
        assert_eq!(w.dim, 3);
        assert_eq!(w.len(), 3);
        assert_eq!(parse_walk(emit_walk(&w).as_bytes()).unwrap(), w);

        let w = parse_walk(b"01\n11\n").unwrap();
        assert_eq!(w.dim, 2);

        assert_eq!(
            parse_walk(b"# d=3\n000\n01\n").unwrap_err().code,
            ErrorCode::InconsistentWidth
        );
        assert_eq!(parse_walk(b"0a0\n").unwrap_err().code, ErrorCode::BadBits);
        assert_eq!(
            parse_walk(b"").unwrap_err().code,
            ErrorCode::MissingDimension
        );
        assert_eq!(
            parse_walk(b"# d=0\n").unwrap_err().code,
            ErrorCode::BadDimension
        );
        let e = parse_walk(b"# d=2\n00\n 0 1\n").unwrap_err();
        assert_eq!((e.code, e.line, e.column), (ErrorCode::Arity, 3, 4));
        assert!(parse_walk(b"# d=2\n").unwrap().is_empty());
    }
}
