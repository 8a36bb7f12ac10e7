//! Recursive-descent parser for the ASCII formula syntax.
//!
//! ```text
//! expr  := "forall" var "." expr | "exists" var "." expr
//!        | expr "<->" expr | expr "->" expr | expr "|" expr | expr "&" expr
//!        | "!" expr | "(" expr ")" | atom | "true" | "false"
//! atom  := NAME "(" term ")" | NAME "(" term "," term ")"
//!        | term "<" term | term "=" term
//!        | "E" INT "(" t "," t ")" | "pre" INT "(" t "," t ")"
//!        | "S" INT "(" t "," t ")" | "F" INT "(" t "," t ")"
//! term  := "x" | "y" | "@" NAME
//! ```
//!
//! Precedence from tightest: `!`, `&`, `|`, `->`, `<->`. `&`, `|` and `<->`
//! associate to the left, `->` to the right. A quantifier's scope extends
//! as far right as possible. `--` starts a line comment.

use std::collections::HashMap;

use thiserror::Error;

use super::ast::{Formula, Rel, Term, Var};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character {0:?}")]
    Lexical(char),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{symbol}` used with {found} argument(s), expected {expected}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("variable `{0}` is not allowed, only x and y")]
    ThirdVariable(String),
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Const(String),
    LParen,
    RParen,
    Comma,
    Dot,
    And,
    Or,
    Not,
    Implies,
    Iff,
    Less,
    Equal,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Const(s) => format!("`@{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Not => "`!`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::Less => "`<`".into(),
            Tok::Equal => "`=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, line: tl, col: tc });
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let rest = |s: &str| chars[i..].iter().take(s.len()).copied().eq(s.chars());
        let (tok, len) = if rest("<->") {
            (Tok::Iff, 3)
        } else if rest("->") {
            (Tok::Implies, 2)
        } else {
            match c {
                '(' => (Tok::LParen, 1),
                ')' => (Tok::RParen, 1),
                ',' => (Tok::Comma, 1),
                '.' => (Tok::Dot, 1),
                '&' => (Tok::And, 1),
                '|' => (Tok::Or, 1),
                '!' => (Tok::Not, 1),
                '<' => (Tok::Less, 1),
                '=' => (Tok::Equal, 1),
                '@' => {
                    let start = i + 1;
                    let mut j = start;
                    if j < chars.len() && is_ident_start(chars[j]) {
                        while j < chars.len() && is_ident_char(chars[j]) {
                            j += 1;
                        }
                    }
                    if j == start {
                        return Err(ParseError {
                            line,
                            col,
                            kind: ParseErrorKind::Lexical('@'),
                        });
                    }
                    let name: String = chars[start..j].iter().collect();
                    (Tok::Const(name), j - i)
                }
                c if is_ident_start(c) => {
                    let mut j = i;
                    while j < chars.len() && is_ident_char(chars[j]) {
                        j += 1;
                    }
                    (Tok::Ident(chars[i..j].iter().collect()), j - i)
                }
                other => {
                    return Err(ParseError {
                        line,
                        col,
                        kind: ParseErrorKind::Lexical(other),
                    })
                }
            }
        };
        push(&mut out, tok);
        i += len;
        col += len;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

/// Classify `E3`, `pre2`, `S1`, `F2`. Level 0 is not surface syntax.
fn special_symbol(name: &str) -> Option<Result<Rel, ()>> {
    let split = |prefix: &str| -> Option<Result<u32, ()>> {
        let digits = name.strip_prefix(prefix)?;
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        match digits.parse::<u32>() {
            Ok(0) | Err(_) => Some(Err(())),
            Ok(k) => Some(Ok(k)),
        }
    };
    if let Some(k) = split("pre") {
        return Some(k.map(Rel::Pre));
    }
    if let Some(k) = split("E") {
        return Some(k.map(Rel::Equiv));
    }
    if let Some(k) = split("S") {
        return Some(k.map(Rel::Succ));
    }
    if let Some(k) = split("F") {
        return Some(k.map(Rel::Fam));
    }
    None
}

const KEYWORDS: [&str; 6] = ["forall", "exists", "true", "false", "x", "y"];

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    arities: HashMap<String, usize>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, off: usize) -> &Tok {
        let i = (self.pos + off).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, kind: ParseErrorKind) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError {
            line: s.line,
            col: s.col,
            kind,
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        self.err_here(ParseErrorKind::Unexpected {
            expected: expected.to_string(),
            found: self.peek().describe(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn expr(&mut self) -> Result<Formula, ParseError> {
        self.iff()
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.implies()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.implies()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(name) if name == "forall" || name == "exists" => {
                self.bump();
                let v = self.bound_var()?;
                self.expect(Tok::Dot)?;
                let body = self.expr()?;
                Ok(if name == "forall" {
                    Formula::forall(v, body)
                } else {
                    Formula::exists(v, body)
                })
            }
            Tok::Ident(name) if name == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(name) if name == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            _ => self.atom(),
        }
    }

    fn bound_var(&mut self) -> Result<Var, ParseError> {
        match self.peek().clone() {
            Tok::Ident(n) if n == "x" => {
                self.bump();
                Ok(Var::X)
            }
            Tok::Ident(n) if n == "y" => {
                self.bump();
                Ok(Var::Y)
            }
            Tok::Ident(n) if !KEYWORDS.contains(&n.as_str()) => {
                Err(self.err_here(ParseErrorKind::ThirdVariable(n)))
            }
            _ => Err(self.unexpected("variable x or y")),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::Ident(n) if n == "x" => {
                self.bump();
                Ok(Term::Var(Var::X))
            }
            Tok::Ident(n) if n == "y" => {
                self.bump();
                Ok(Term::Var(Var::Y))
            }
            Tok::Const(c) => {
                self.bump();
                Ok(Term::Const(c))
            }
            Tok::Ident(n) if !KEYWORDS.contains(&n.as_str()) => {
                Err(self.err_here(ParseErrorKind::ThirdVariable(n)))
            }
            _ => Err(self.unexpected("term (x, y or @constant)")),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let is_term_start = match self.peek() {
            Tok::Const(_) => true,
            Tok::Ident(n) => {
                n == "x" || n == "y" || !matches!(self.peek_at(1), Tok::LParen)
            }
            _ => false,
        };
        if is_term_start {
            if let Tok::Ident(n) = self.peek().clone() {
                if n != "x" && n != "y" && !matches!(self.peek_at(1), Tok::Less | Tok::Equal) {
                    return Err(self.unexpected("formula"));
                }
            }
            let lhs = self.term()?;
            let rel = match self.peek() {
                Tok::Less => Rel::Less,
                Tok::Equal => Rel::Equal,
                _ => return Err(self.unexpected("`<` or `=`")),
            };
            self.bump();
            let rhs = self.term()?;
            return Ok(Formula::binary(rel, lhs, rhs));
        }
        let (name, line, col) = match self.peek().clone() {
            Tok::Ident(n) => {
                let s = &self.toks[self.pos];
                (n, s.line, s.col)
            }
            _ => return Err(self.unexpected("formula")),
        };
        if KEYWORDS.contains(&name.as_str()) {
            return Err(self.unexpected("formula"));
        }
        self.bump();
        self.expect(Tok::LParen)?;
        let mut args = vec![self.term()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.term()?);
        }
        self.expect(Tok::RParen)?;
        let at = |kind| ParseError { line, col, kind };
        if args.len() > 2 {
            return Err(at(ParseErrorKind::ArityMismatch {
                symbol: name,
                expected: 2,
                found: args.len(),
            }));
        }
        match special_symbol(&name) {
            Some(Err(())) => Err(at(ParseErrorKind::UnknownSymbol(name))),
            Some(Ok(rel)) => {
                if args.len() != 2 {
                    return Err(at(ParseErrorKind::ArityMismatch {
                        symbol: name,
                        expected: 2,
                        found: args.len(),
                    }));
                }
                let b = args.pop().unwrap();
                let a = args.pop().unwrap();
                Ok(Formula::binary(rel, a, b))
            }
            None => {
                let found = args.len();
                let expected = *self.arities.entry(name.clone()).or_insert(found);
                if expected != found {
                    return Err(at(ParseErrorKind::ArityMismatch {
                        symbol: name,
                        expected,
                        found,
                    }));
                }
                if found == 1 {
                    Ok(Formula::unary(&name, args.pop().unwrap()))
                } else {
                    let b = args.pop().unwrap();
                    let a = args.pop().unwrap();
                    Ok(Formula::binary(Rel::Common(name), a, b))
                }
            }
        }
    }
}

/// Parse a sentence (or open formula) in the ASCII syntax.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        arities: HashMap::new(),
    };
    let f = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of input"));
    }
    Ok(f)
}
