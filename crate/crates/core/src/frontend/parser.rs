//! Recursive-descent parser for formulas, name literals and propositional formulas.
//!
//! ```text
//! program  := ("let" ident "=" term ";")* formula
//! formula  := implies ("<->" implies)?
//! implies  := or ("->" implies)?
//! or       := and ("|" and)*
//! and      := unary ("&" unary)*
//! unary    := "~" unary | "(" formula ")" | quant | term ("in" | "eq") term
//! quant    := ("forall" | "exists") ident ("in" term)? "." formula
//! term     := ident | "{}" | "{" term ":" label ("," term ":" label)* "}"
//!           | "hat" "(" hfset ")" | "univ" "(" number ")"
//! hfset    := number | "{" (hfset ("," hfset)*)? "}"
//! ```

use std::fmt;

use crate::formula::{Formula, Term};
use crate::names::{enumerate_universe, hat_embed, universal_name, HfSet, NameId, NameStore, DEFAULT_CEILING};
use crate::proplogic::PropFormula;

use super::lexer::{tokenize, SourceSpan, Tok, Token};

const KEYWORDS: &[&str] = &["in", "eq", "forall", "exists", "let", "hat", "univ"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub span: SourceSpan,
    pub expected: Vec<String>,
    pub found: String,
    pub message: Option<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at {}: ", self.span)?;
        if let Some(m) = &self.message {
            return write!(f, "{m}");
        }
        write!(f, "expected {}, found {}", self.expected.join(" or "), self.found)
    }
}

impl std::error::Error for ParseError {}

/// A formula plus the `let` bindings it was parsed with.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedFormula {
    pub formula: Formula,
    pub bindings: Vec<(String, NameId)>,
}

impl ParsedFormula {
    /// The `let` name for a constant, if it has one.
    pub fn binding_for(&self, id: NameId) -> Option<&str> {
        self.bindings
            .iter()
            .rev()
            .find(|(_, n)| *n == id)
            .map(|(s, _)| s.as_str())
    }
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    store: Option<&'a NameStore>,
    bindings: Vec<(String, NameId)>,
    bound: Vec<String>,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn new(src: &str, store: Option<&'a NameStore>) -> PResult<Self> {
        let tokens = tokenize(src).map_err(|e| ParseError {
            span: e.span,
            expected: vec![],
            found: format!("`{}`", e.found),
            message: Some(format!("unexpected character `{}`", e.found)),
        })?;
        Ok(Parser {
            tokens,
            pos: 0,
            store,
            bindings: Vec::new(),
            bound: Vec::new(),
        })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let t = self.peek();
        Err(ParseError {
            span: t.span,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.describe(),
            message: None,
        })
    }

    fn fail<T>(&self, span: SourceSpan, message: String) -> PResult<T> {
        Err(ParseError {
            span,
            expected: vec![],
            found: String::new(),
            message: Some(message),
        })
    }

    fn at(&self, tok: &Tok) -> bool {
        &self.peek().tok == tok
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(&self.peek().tok, Tok::Word(x) if x == w)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if self.at(&tok) {
            Ok(self.bump())
        } else {
            self.error(&[&tok.describe()])
        }
    }

    fn ident(&mut self) -> PResult<(String, SourceSpan)> {
        match &self.peek().tok {
            Tok::Word(w) if !KEYWORDS.contains(&w.as_str()) => {
                let t = self.bump();
                let Tok::Word(w) = t.tok else { unreachable!() };
                Ok((w, t.span))
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn finish(&mut self) -> PResult<()> {
        if self.at(&Tok::Eof) {
            Ok(())
        } else {
            self.error(&["end of input"])
        }
    }

    fn store(&self, span: SourceSpan) -> PResult<&'a NameStore> {
        match self.store {
            Some(s) => Ok(s),
            None => self.fail(span, "name literals need a structure".into()),
        }
    }

    fn preamble(&mut self) -> PResult<()> {
        while self.at_word("let") {
            self.bump();
            let (name, _) = self.ident()?;
            self.expect(Tok::Assign)?;
            let start = self.peek().span;
            let term = self.term()?;
            let Term::Const(id) = term else {
                return self.fail(start, format!("`let {name}` must be bound to a name, not a variable"));
            };
            self.expect(Tok::Semi)?;
            self.bindings.push((name, id));
        }
        Ok(())
    }

    fn formula(&mut self) -> PResult<Formula> {
        let lhs = self.implies()?;
        if self.eat(&Tok::Iff) {
            let rhs = self.implies()?;
            return Ok(Formula::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> PResult<Formula> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<Formula> {
        let mut acc = self.and()?;
        while self.eat(&Tok::Bar) {
            acc = Formula::or(acc, self.and()?);
        }
        Ok(acc)
    }

    fn and(&mut self) -> PResult<Formula> {
        let mut acc = self.unary()?;
        while self.eat(&Tok::Amp) {
            acc = Formula::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> PResult<Formula> {
        if self.eat(&Tok::Tilde) {
            return Ok(Formula::not(self.unary()?));
        }
        if self.eat(&Tok::LParen) {
            let f = self.formula()?;
            self.expect(Tok::RParen)?;
            return Ok(f);
        }
        if self.at_word("forall") || self.at_word("exists") {
            let Tok::Word(kw) = self.bump().tok else { unreachable!() };
            let (x, _) = self.ident()?;
            let bound = if self.at_word("in") {
                self.bump();
                Some(self.term()?)
            } else {
                None
            };
            self.expect(Tok::Dot)?;
            self.bound.push(x.clone());
            let body = self.formula();
            self.bound.pop();
            let body = body?;
            return Ok(match (kw.as_str(), bound) {
                ("forall", None) => Formula::forall(&x, body),
                ("exists", None) => Formula::exists(&x, body),
                ("forall", Some(t)) => Formula::bforall(&x, t, body),
                (_, Some(t)) => Formula::bexists(&x, t, body),
                _ => unreachable!(),
            });
        }
        if !self.starts_term() {
            return self.error(&["`~`", "`(`", "`forall`", "`exists`", "term"]);
        }
        let a = self.term()?;
        if self.at_word("in") {
            self.bump();
            return Ok(Formula::Member(a, self.term()?));
        }
        if self.at_word("eq") {
            self.bump();
            return Ok(Formula::Equal(a, self.term()?));
        }
        self.error(&["`in`", "`eq`"])
    }

    fn starts_term(&self) -> bool {
        match &self.peek().tok {
            Tok::LBrace | Tok::Empty => true,
            Tok::Word(w) => !KEYWORDS.contains(&w.as_str()) || w == "hat" || w == "univ",
            _ => false,
        }
    }

    fn term(&mut self) -> PResult<Term> {
        let start = self.peek().span;
        match self.peek().tok.clone() {
            Tok::Empty => {
                self.bump();
                Ok(Term::Const(self.store(start)?.empty()))
            }
            Tok::LBrace => self.name_literal().map(Term::Const),
            Tok::Word(w) if w == "hat" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let set = self.hfset()?;
                self.expect(Tok::RParen)?;
                Ok(Term::Const(hat_embed(self.store(start)?, &set)))
            }
            Tok::Word(w) if w == "univ" => {
                self.bump();
                self.expect(Tok::LParen)?;
                let (k, span) = self.number()?;
                self.expect(Tok::RParen)?;
                let store = self.store(start)?;
                match enumerate_universe(store, k, DEFAULT_CEILING) {
                    Ok(u) => Ok(Term::Const(universal_name(store, &u))),
                    Err(e) => self.fail(span, e.to_string()),
                }
            }
            Tok::Word(_) => {
                let (name, _) = self.ident()?;
                if self.bound.contains(&name) {
                    return Ok(Term::Var(name));
                }
                Ok(match self.bindings.iter().rev().find(|(n, _)| *n == name) {
                    Some((_, id)) => Term::Const(*id),
                    None => Term::Var(name),
                })
            }
            _ => self.error(&["term"]),
        }
    }

    fn name_literal(&mut self) -> PResult<NameId> {
        let open = self.expect(Tok::LBrace)?;
        let store = self.store(open.span)?;
        let mut entries = Vec::new();
        if !self.eat(&Tok::RBrace) {
            loop {
                let at = self.peek().span;
                let child = match self.term()? {
                    Term::Const(id) => id,
                    Term::Var(v) => return self.fail(at, format!("`{v}` is not a bound name")),
                };
                self.expect(Tok::Colon)?;
                let label_tok = self.bump();
                let Tok::Word(label) = label_tok.tok else {
                    self.pos -= 1;
                    return self.error(&["element label"]);
                };
                let Some(value) = store.algebra().element_by_label(&label) else {
                    return self.fail(label_tok.span, format!("unknown element label `{label}`"));
                };
                entries.push((child, value));
                if self.eat(&Tok::RBrace) {
                    break;
                }
                if !self.eat(&Tok::Comma) {
                    return self.error(&["`,`", "`}`"]);
                }
            }
        }
        let end = self.tokens[self.pos - 1].span.end;
        store
            .make_name(entries)
            .or_else(|e| self.fail(SourceSpan::new(open.span.start, end), e.to_string()))
    }

    fn number(&mut self) -> PResult<(usize, SourceSpan)> {
        if let Tok::Word(w) = &self.peek().tok {
            if let Ok(n) = w.parse::<usize>() {
                let span = self.bump().span;
                return Ok((n, span));
            }
        }
        self.error(&["number"])
    }

    fn hfset(&mut self) -> PResult<HfSet> {
        if self.eat(&Tok::Empty) {
            return Ok(HfSet::empty());
        }
        if !self.at(&Tok::LBrace) {
            let (n, span) = self.number()?;
            if n > 64 {
                return self.fail(span, "ordinal too large".into());
            }
            return Ok(HfSet::von_neumann(n));
        }
        self.bump();
        let mut items = Vec::new();
        if !self.eat(&Tok::RBrace) {
            loop {
                items.push(self.hfset()?);
                if self.eat(&Tok::RBrace) {
                    break;
                }
                if !self.eat(&Tok::Comma) {
                    return self.error(&["`,`", "`}`"]);
                }
            }
        }
        Ok(HfSet::from_elements(items))
    }

    fn prop(&mut self) -> PResult<PropFormula> {
        let lhs = self.prop_implies()?;
        if self.eat(&Tok::Iff) {
            return Ok(PropFormula::iff(lhs, self.prop_implies()?));
        }
        Ok(lhs)
    }

    fn prop_implies(&mut self) -> PResult<PropFormula> {
        let lhs = self.prop_or()?;
        if self.eat(&Tok::Arrow) {
            return Ok(PropFormula::implies(lhs, self.prop_implies()?));
        }
        Ok(lhs)
    }

    fn prop_or(&mut self) -> PResult<PropFormula> {
        let mut acc = self.prop_and()?;
        while self.eat(&Tok::Bar) {
            acc = PropFormula::or(acc, self.prop_and()?);
        }
        Ok(acc)
    }

    fn prop_and(&mut self) -> PResult<PropFormula> {
        let mut acc = self.prop_unary()?;
        while self.eat(&Tok::Amp) {
            acc = PropFormula::and(acc, self.prop_unary()?);
        }
        Ok(acc)
    }

    fn prop_unary(&mut self) -> PResult<PropFormula> {
        if self.eat(&Tok::Tilde) {
            return Ok(PropFormula::not(self.prop_unary()?));
        }
        if self.eat(&Tok::LParen) {
            let f = self.prop()?;
            self.expect(Tok::RParen)?;
            return Ok(f);
        }
        match self.ident() {
            Ok((v, _)) => Ok(PropFormula::var(&v)),
            Err(_) => self.error(&["`~`", "`(`", "variable"]),
        }
    }
}

/// Parses a formula with an optional `let` preamble.
pub fn parse_formula(src: &str, store: &NameStore) -> Result<ParsedFormula, ParseError> {
    parse_formula_with(src, store, &[])
}

/// Like [`parse_formula`], with names already in scope.
pub fn parse_formula_with(
    src: &str,
    store: &NameStore,
    scope: &[(String, NameId)],
) -> Result<ParsedFormula, ParseError> {
    let mut p = Parser::new(src, Some(store))?;
    p.bindings = scope.to_vec();
    p.preamble()?;
    let formula = p.formula()?;
    p.finish()?;
    Ok(ParsedFormula {
        formula,
        bindings: p.bindings,
    })
}

/// Parses a single name term such as `{{}: 1/2}` or `hat(2)`.
pub fn parse_name(src: &str, store: &NameStore) -> Result<NameId, ParseError> {
    let mut p = Parser::new(src, Some(store))?;
    let start = p.peek().span;
    let t = p.term()?;
    p.finish()?;
    match t {
        Term::Const(id) => Ok(id),
        Term::Var(v) => p.fail(start, format!("`{v}` is not a name")),
    }
}

pub fn parse_prop(src: &str) -> Result<PropFormula, ParseError> {
    let mut p = Parser::new(src, None)?;
    let f = p.prop()?;
    p.finish()?;
    Ok(f)
}
