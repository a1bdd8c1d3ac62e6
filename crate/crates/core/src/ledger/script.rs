use std::fmt;

use thiserror::Error;

use super::expr::{Quantity, RateExpr, Term};
use crate::entropy::RegSet;
use crate::resource::Party;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Merge { src: Party, dst: Party },
    CoherentMerge { src: Party, dst: Party },
    Superdense { src: Party, dst: Party },
    CoherentMeasurement { party: Party },
    Repackage { party: Party, with: Party },
    SendQubits { src: Party, dst: Party, amount: RateExpr },
    Relabel { note: String },
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Merge { src, dst } => write!(f, "merge {src} -> {dst}"),
            Step::CoherentMerge { src, dst } => write!(f, "coherent_merge {src} -> {dst}"),
            Step::Superdense { src, dst } => write!(f, "superdense {src} -> {dst}"),
            Step::CoherentMeasurement { party } => write!(f, "coherent_measurement {party}"),
            Step::Repackage { party, with } => write!(f, "repackage {party} with {with}"),
            Step::SendQubits { src, dst, amount } => write!(f, "send_qubits {src} -> {dst} {amount}"),
            Step::Relabel { note } => {
                f.write_str("relabel \"")?;
                for ch in note.chars() {
                    if ch == '"' || ch == '\\' {
                        f.write_str("\\")?;
                    }
                    write!(f, "{ch}")?;
                }
                f.write_str("\"")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProtocolScript {
    pub steps: Vec<Step>,
}

impl ProtocolScript {
    pub fn new(steps: Vec<Step>) -> Self {
        ProtocolScript { steps }
    }

    pub fn concat(&self, other: &ProtocolScript) -> ProtocolScript {
        let mut steps = self.steps.clone();
        steps.extend(other.steps.iter().cloned());
        ProtocolScript { steps }
    }
}

/// One step per line, newline-terminated.
impl fmt::Display for ProtocolScript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unknown keyword `{0}`")]
    UnknownKeyword(String),
    #[error("unknown party `{0}`")]
    UnknownParty(String),
    #[error("expected {0}")]
    Expected(&'static str),
    #[error("malformed rate expression: {0}")]
    MalformedRate(String),
    #[error("unterminated string")]
    UnterminatedString,
    #[error("unexpected `{0}`")]
    Unexpected(String),
    #[error("source and destination are both `{0}`")]
    SameParty(Party),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Word(String),
    Str(String),
    Arrow,
    Half,
    LParen,
    RParen,
    Pipe,
    Colon,
    Plus,
    Minus,
    Other(String),
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Word(w) | Tok::Other(w) => w.clone(),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Arrow => "->".into(),
            Tok::Half => "1/2".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Pipe => "|".into(),
            Tok::Colon => ":".into(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
        }
    }
}

/// Tokens of one line with their 1-based columns, plus the column where
/// the line's content ends (a comment or the end of line).
fn lex(line_no: usize, line: &str) -> Result<(Vec<(usize, Tok)>, usize), ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let err = |col: usize, kind| ParseError { line: line_no, col, kind };
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push((col, Tok::Word(chars[start..i].iter().collect())));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '/') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            if text == "1/2" {
                toks.push((col, Tok::Half));
            } else {
                toks.push((col, Tok::Other(text)));
            }
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(err(col, ParseErrorKind::UnterminatedString)),
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') if i + 1 < chars.len() => {
                        s.push(chars[i + 1]);
                        i += 2;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            toks.push((col, Tok::Str(s)));
            continue;
        }
        let tok = match c {
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 1;
                Tok::Arrow
            }
            '-' => Tok::Minus,
            '+' => Tok::Plus,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '|' => Tok::Pipe,
            ':' => Tok::Colon,
            other => Tok::Other(other.to_string()),
        };
        i += 1;
        toks.push((col, tok));
    }
    Ok((toks, i.min(chars.len()) + 1))
}

struct LineParser {
    line: usize,
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end_col: usize,
}

impl LineParser {
    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.0)
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { line: self.line, col: self.col(), kind }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &'static str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(ParseErrorKind::Expected(what)))
        }
    }

    fn party(&mut self) -> Result<Party, ParseError> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let p = w.parse::<Party>().map_err(|_| self.err(ParseErrorKind::UnknownParty(w.clone())))?;
                self.pos += 1;
                Ok(p)
            }
            Some(other) => Err(self.err(ParseErrorKind::UnknownParty(other.text()))),
            None => Err(self.err(ParseErrorKind::Expected("party"))),
        }
    }

    fn directed(&mut self) -> Result<(Party, Party), ParseError> {
        let src = self.party()?;
        self.expect(Tok::Arrow, "`->`")?;
        let col = self.col();
        let dst = self.party()?;
        if src == dst {
            return Err(ParseError { line: self.line, col, kind: ParseErrorKind::SameParty(dst) });
        }
        Ok((src, dst))
    }

    fn malformed(&self, msg: impl Into<String>) -> ParseError {
        self.err(ParseErrorKind::MalformedRate(msg.into()))
    }

    fn subset(&mut self) -> Result<RegSet, ParseError> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let set = RegSet::parse(w).map_err(|_| self.malformed(format!("bad subset `{w}`")))?;
                self.pos += 1;
                Ok(set)
            }
            _ => Err(self.malformed("expected a subset of A, B, C, R")),
        }
    }

    fn given(&mut self) -> Result<Option<RegSet>, ParseError> {
        if self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            Ok(Some(self.subset()?))
        } else {
            Ok(None)
        }
    }

    fn quantity(&mut self) -> Result<Quantity, ParseError> {
        let col = self.col();
        let q = match self.peek() {
            Some(Tok::Word(w)) if w == "S" => {
                self.pos += 1;
                self.expect_rate(Tok::LParen, "`(`")?;
                let x = self.subset()?;
                let given = self.given()?;
                Quantity::Entropy { x, given }
            }
            Some(Tok::Word(w)) if w == "I" => {
                self.pos += 1;
                self.expect_rate(Tok::LParen, "`(`")?;
                let x = self.subset()?;
                self.expect_rate(Tok::Colon, "`:`")?;
                let y = self.subset()?;
                let given = self.given()?;
                Quantity::Mutual { x, y, given }
            }
            _ => return Err(self.malformed("expected `S(` or `I(`")),
        };
        self.expect_rate(Tok::RParen, "`)`")?;
        let sets: Vec<RegSet> = match q {
            Quantity::Entropy { x, given } => [Some(x), given].into_iter().flatten().collect(),
            Quantity::Mutual { x, y, given } => [Some(x), Some(y), given].into_iter().flatten().collect(),
        };
        for (i, a) in sets.iter().enumerate() {
            for b in &sets[i + 1..] {
                if !a.is_disjoint(*b) {
                    return Err(ParseError {
                        line: self.line,
                        col,
                        kind: ParseErrorKind::MalformedRate(format!("subsets {a} and {b} overlap")),
                    });
                }
            }
        }
        Ok(q)
    }

    fn expect_rate(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.malformed(format!("expected {what}")))
        }
    }

    fn term(&mut self, negative: bool) -> Result<Term, ParseError> {
        let half = if self.peek() == Some(&Tok::Half) {
            self.pos += 1;
            true
        } else {
            false
        };
        Ok(Term { negative, half, quantity: self.quantity()? })
    }

    fn rate(&mut self) -> Result<RateExpr, ParseError> {
        if self.peek().is_none() {
            return Err(self.malformed("missing amount"));
        }
        let first_negative = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let mut terms = vec![self.term(first_negative)?];
        loop {
            let negative = match self.peek() {
                Some(Tok::Plus) => false,
                Some(Tok::Minus) => true,
                _ => break,
            };
            self.pos += 1;
            terms.push(self.term(negative)?);
        }
        Ok(RateExpr { terms })
    }

    fn step(&mut self) -> Result<Step, ParseError> {
        let kw = match self.bump() {
            Some(Tok::Word(w)) => w,
            Some(other) => {
                self.pos -= 1;
                return Err(self.err(ParseErrorKind::UnknownKeyword(other.text())));
            }
            None => unreachable!("blank lines are skipped"),
        };
        let step = match kw.as_str() {
            "merge" => {
                let (src, dst) = self.directed()?;
                Step::Merge { src, dst }
            }
            "coherent_merge" => {
                let (src, dst) = self.directed()?;
                Step::CoherentMerge { src, dst }
            }
            "superdense" => {
                let (src, dst) = self.directed()?;
                Step::Superdense { src, dst }
            }
            "coherent_measurement" => Step::CoherentMeasurement { party: self.party()? },
            "repackage" => {
                let party = self.party()?;
                match self.peek() {
                    Some(Tok::Word(w)) if w == "with" => self.pos += 1,
                    _ => return Err(self.err(ParseErrorKind::Expected("`with`"))),
                }
                let col = self.col();
                let with = self.party()?;
                if with == party {
                    return Err(ParseError { line: self.line, col, kind: ParseErrorKind::SameParty(with) });
                }
                Step::Repackage { party, with }
            }
            "send_qubits" => {
                let (src, dst) = self.directed()?;
                Step::SendQubits { src, dst, amount: self.rate()? }
            }
            "relabel" => match self.bump() {
                Some(Tok::Str(note)) => Step::Relabel { note },
                _ => {
                    self.pos -= 1;
                    return Err(self.err(ParseErrorKind::Expected("a quoted note")));
                }
            },
            _ => {
                self.pos -= 1;
                return Err(self.err(ParseErrorKind::UnknownKeyword(kw)));
            }
        };
        if let Some(t) = self.peek() {
            return Err(self.err(ParseErrorKind::Unexpected(t.text())));
        }
        Ok(step)
    }
}

/// Parses a script, one step per line. `#` starts a comment.
pub fn parse_script(text: &str) -> Result<ProtocolScript, ParseError> {
    let mut steps = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let (toks, end_col) = lex(i + 1, line)?;
        if toks.is_empty() {
            continue;
        }
        let mut p = LineParser { line: i + 1, toks, pos: 0, end_col };
        steps.push(p.step()?);
    }
    Ok(ProtocolScript { steps })
}
