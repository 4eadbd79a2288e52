//! Text formats: `.pspec` specifications, `.pda` automata, and LTS export.
//!
//! Specification grammar (EBNF):
//!
//! ```text
//! spec      ::= "spec" NAME "{" directive* equation* "}"
//! directive ::= "mode" ("seq" | "seqc") ";" | "init" NAME ";"
//!             | "vars" names ";" | "alphabet" names ";"
//! equation  ::= NAME "=" choice
//! choice    ::= guarded ("+" guarded)*
//! guarded   ::= "[" prop "]" ("->" | "^^") guarded | seq
//! seq       ::= unary ((";" | "·") unary)*
//! unary     ::= NAME "." unary | atom
//! atom      ::= "0" | "_|_" | "1" | "NA" "(" choice ")" | "(" choice ")" | NAME
//! prop      ::= conj (("|" | "∨") conj)*
//! conj      ::= lit (("&" | "∧") lit)*
//! lit       ::= ("!" | "~" | "¬") lit | "(" prop ")" | "true" | "false" | NAME
//! ```
//!
//! Automaton grammar:
//!
//! ```text
//! pda        ::= "pda" NAME "{" pdadirective* transition* "}"
//! pdadirective ::= "states" names ";" | "init" NAME ";" | "final" names ";"
//!             | "alphabet" names ";" | "data" names ";"
//! transition ::= NAME "--" NAME "[" (NAME | "eps") "/" push "]" "-->" NAME
//! push       ::= "eps" | NAME ("," NAME)*
//! ```
//!
//! A push token that is not itself a declared stack symbol is split by greedy
//! longest match over the declared symbols, so `11` and `XY` both work.
//! Line comments start with `//`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;
use thiserror::Error;

use crate::core::{Action, CoreError, Mode, ProcExpr, Prop, Spec};
use crate::pda::{Pda, PdaError, Transition};
use crate::semantics::Lts;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub start: usize,
    pub end: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{span}: syntax error: {message}")]
    Syntax { message: String, span: SourceSpan },
    #[error("{span}: undefined identifier `{name}`")]
    UndefinedIdent { name: String, span: SourceSpan },
    #[error("{span}: `·` is only allowed in seq mode")]
    LegacyInSeqc { span: SourceSpan },
    #[error("{span}: unknown propositional variable `{name}`")]
    UnknownVar { name: String, span: SourceSpan },
    #[error("{span}: undeclared {what} `{name}`")]
    Undeclared { what: &'static str, name: String, span: SourceSpan },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Pda(#[from] PdaError),
}

// ----- lexer -----------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Name(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

const SYMBOLS: &[&str] = &[
    "-->", "_|_", "--", "->", "^^", "{", "}", "(", ")", "[", "]", ";", ",", "=", "+", ".", "·", "/", "!", "~", "¬",
    "&", "∧", "|", "∨",
];

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || "_#'@".contains(c) || (!c.is_ascii() && !"·¬∧∨".contains(c) && !c.is_whitespace())
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut line_start = 0;
    let mut i = 0;
    let bytes = text.as_bytes();
    let span_at = |start: usize, end: usize, line: usize, line_start: usize| SourceSpan {
        line,
        column: text[line_start..start].chars().count() + 1,
        start,
        end,
    };
    'outer: while i < text.len() {
        let rest = &text[i..];
        let c = rest.chars().next().expect("nonempty");
        if c == '\n' {
            line += 1;
            i += 1;
            line_start = i;
            continue;
        }
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if rest.starts_with("//") {
            while i < text.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        for sym in SYMBOLS {
            if rest.starts_with(sym) {
                out.push(Token { tok: Tok::Sym(sym), span: span_at(i, i + sym.len(), line, line_start) });
                i += sym.len();
                continue 'outer;
            }
        }
        if is_name_char(c) {
            let len: usize = rest.chars().take_while(|&c| is_name_char(c)).map(char::len_utf8).sum();
            out.push(Token { tok: Tok::Name(rest[..len].to_string()), span: span_at(i, i + len, line, line_start) });
            i += len;
            continue;
        }
        return Err(ParseError::Syntax {
            message: format!("unexpected character `{c}`"),
            span: span_at(i, i + c.len_utf8(), line, line_start),
        });
    }
    out.push(Token { tok: Tok::Eof, span: span_at(text.len(), text.len(), line, line_start) });
    Ok(out)
}

struct Cursor {
    toks: Vec<Token>,
    pos: usize,
}

impl Cursor {
    fn new(text: &str) -> Result<Cursor, ParseError> {
        Ok(Cursor { toks: lex(text)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax { message: message.into(), span: self.span() })
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Name(n) => format!("`{n}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<SourceSpan, ParseError> {
        if self.is_sym(s) {
            Ok(self.bump().span)
        } else {
            self.error(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn expect_name(&mut self) -> Result<(String, SourceSpan), ParseError> {
        match self.peek().clone() {
            Tok::Name(n) => {
                let sp = self.bump().span;
                Ok((n, sp))
            }
            _ => self.error(format!("expected a name, found {}", self.describe())),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Name(n) if n == kw => {
                self.bump();
                Ok(())
            }
            _ => self.error(format!("expected `{kw}`, found {}", self.describe())),
        }
    }

    /// Comma-separated names terminated by `;` (possibly empty).
    fn name_list(&mut self) -> Result<Vec<(String, SourceSpan)>, ParseError> {
        let mut out = Vec::new();
        if self.eat_sym(";") {
            return Ok(out);
        }
        loop {
            out.push(self.expect_name()?);
            if self.eat_sym(";") {
                return Ok(out);
            }
            self.expect_sym(",")?;
        }
    }

    fn keyword_directive(&self, kws: &[&str], not_followed_by: &str) -> Option<String> {
        match (self.peek(), self.peek_at(1)) {
            (Tok::Name(n), Tok::Sym(s)) if kws.contains(&n.as_str()) && *s == not_followed_by => None,
            (Tok::Name(n), _) if kws.contains(&n.as_str()) => Some(n.clone()),
            _ => None,
        }
    }
}

// ----- specifications --------------------------------------------------------

struct SpecParser<'v> {
    cur: Cursor,
    vars: &'v [String],
    mode: Mode,
    uses: Vec<(String, SourceSpan)>,
}

impl SpecParser<'_> {
    fn choice(&mut self) -> Result<ProcExpr, ParseError> {
        let mut e = self.guarded()?;
        while self.cur.eat_sym("+") {
            let r = self.guarded()?;
            e = ProcExpr::choice(e, r);
        }
        Ok(e)
    }

    fn guarded(&mut self) -> Result<ProcExpr, ParseError> {
        if self.cur.eat_sym("[") {
            let phi = self.prop_or()?;
            self.cur.expect_sym("]")?;
            if self.cur.eat_sym("->") {
                return Ok(ProcExpr::guard(phi, self.guarded()?));
            }
            if self.cur.eat_sym("^^") {
                return Ok(ProcExpr::signal(phi, self.guarded()?));
            }
            return self.cur.error(format!("expected `->` or `^^` after condition, found {}", self.cur.describe()));
        }
        self.seq()
    }

    fn seq(&mut self) -> Result<ProcExpr, ParseError> {
        let mut e = self.unary()?;
        loop {
            if self.cur.eat_sym(";") {
                let r = self.unary()?;
                e = ProcExpr::seqc(e, r);
            } else if self.cur.is_sym("·") {
                let span = self.cur.bump().span;
                if self.mode == Mode::Seqc {
                    return Err(ParseError::LegacyInSeqc { span });
                }
                let r = self.unary()?;
                e = ProcExpr::seq_legacy(e, r);
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<ProcExpr, ParseError> {
        if let (Tok::Name(n), Tok::Sym(".")) = (self.cur.peek().clone(), self.cur.peek_at(1)) {
            if n == "0" || n == "1" {
                return self.cur.error(format!("`{n}` cannot be used as an action"));
            }
            self.cur.bump();
            self.cur.bump();
            let body = self.unary()?;
            return Ok(ProcExpr::prefix(Action::named(&n), body));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<ProcExpr, ParseError> {
        if self.cur.eat_sym("_|_") {
            return Ok(ProcExpr::Deadlock);
        }
        if self.cur.eat_sym("(") {
            let e = self.choice()?;
            self.cur.expect_sym(")")?;
            return Ok(e);
        }
        match self.cur.peek().clone() {
            Tok::Name(n) => {
                let span = self.cur.bump().span;
                match n.as_str() {
                    "0" | "δ" => Ok(ProcExpr::Deadlock),
                    "1" => Ok(ProcExpr::Accept),
                    "NA" if self.cur.is_sym("(") => {
                        self.cur.bump();
                        let e = self.choice()?;
                        self.cur.expect_sym(")")?;
                        Ok(ProcExpr::na(e))
                    }
                    _ => {
                        self.uses.push((n.clone(), span));
                        Ok(ProcExpr::ident(&n))
                    }
                }
            }
            _ => self.cur.error(format!("expected a process term, found {}", self.cur.describe())),
        }
    }

    fn prop_or(&mut self) -> Result<Prop, ParseError> {
        let mut p = self.prop_and()?;
        while self.cur.eat_sym("|") || self.cur.eat_sym("∨") {
            p = p.or(&self.prop_and()?);
        }
        Ok(p)
    }

    fn prop_and(&mut self) -> Result<Prop, ParseError> {
        let mut p = self.prop_lit()?;
        while self.cur.eat_sym("&") || self.cur.eat_sym("∧") {
            p = p.and(&self.prop_lit()?);
        }
        Ok(p)
    }

    fn prop_lit(&mut self) -> Result<Prop, ParseError> {
        let n = self.vars.len();
        if self.cur.eat_sym("!") || self.cur.eat_sym("~") || self.cur.eat_sym("¬") {
            return Ok(self.prop_lit()?.not());
        }
        if self.cur.eat_sym("(") {
            let p = self.prop_or()?;
            self.cur.expect_sym(")")?;
            return Ok(p);
        }
        let (name, span) = self.cur.expect_name()?;
        match name.as_str() {
            "true" => Ok(Prop::truth(n)),
            "false" => Ok(Prop::falsity(n)),
            _ => match self.vars.iter().position(|v| *v == name) {
                Some(i) => Ok(Prop::var(n, i)),
                None => Err(ParseError::UnknownVar { name, span }),
            },
        }
    }
}

/// Parses a `.pspec` specification.
pub fn parse_spec(text: &str) -> Result<Spec, ParseError> {
    let mut cur = Cursor::new(text)?;
    cur.expect_keyword("spec")?;
    let (name, _) = cur.expect_name()?;
    cur.expect_sym("{")?;
    let mut mode = Mode::Seqc;
    let mut init: Option<(String, SourceSpan)> = None;
    let mut vars: Vec<String> = Vec::new();
    let mut alphabet: BTreeSet<Action> = BTreeSet::new();
    while let Some(kw) = cur.keyword_directive(&["mode", "init", "vars", "alphabet"], "=") {
        cur.bump();
        match kw.as_str() {
            "mode" => {
                let (m, _) = cur.expect_name()?;
                mode = match m.as_str() {
                    "seq" => Mode::Seq,
                    "seqc" => Mode::Seqc,
                    _ => return cur.error(format!("unknown mode `{m}` (expected `seq` or `seqc`)")),
                };
                cur.expect_sym(";")?;
            }
            "init" => {
                init = Some(cur.expect_name()?);
                cur.expect_sym(";")?;
            }
            "vars" => {
                vars = cur.name_list()?.into_iter().map(|(v, _)| v).collect();
                if vars.len() > crate::core::MAX_VARS {
                    return Err(CoreError::TooManyVars { found: vars.len() }.into());
                }
            }
            _ => alphabet = cur.name_list()?.into_iter().map(|(a, _)| Action::named(&a)).collect(),
        }
    }
    let mut parser = SpecParser { cur, vars: &vars, mode, uses: Vec::new() };
    let mut equations: IndexMap<Arc<str>, ProcExpr> = IndexMap::new();
    while !parser.cur.is_sym("}") {
        let (x, span) = parser.cur.expect_name()?;
        parser.cur.expect_sym("=")?;
        let body = parser.choice()?;
        if equations.insert(Arc::from(x.as_str()), body).is_some() {
            return Err(ParseError::Syntax { message: format!("identifier `{x}` is defined twice"), span });
        }
    }
    parser.cur.expect_sym("}")?;
    if !matches!(parser.cur.peek(), Tok::Eof) {
        return parser.cur.error(format!("unexpected {} after specification", parser.cur.describe()));
    }
    if let Some((x, span)) = parser.uses.iter().find(|(x, _)| !equations.contains_key(x.as_str())) {
        return Err(ParseError::UndefinedIdent { name: x.clone(), span: *span });
    }
    let init = match init {
        Some((x, span)) if !equations.contains_key(x.as_str()) => {
            return Err(ParseError::UndefinedIdent { name: x, span })
        }
        Some((x, _)) => x,
        None => match equations.keys().next() {
            Some(x) => x.to_string(),
            None => return parser.cur.error("specification has no equations"),
        },
    };
    Ok(Spec::new(name, mode, &init, vars, alphabet, equations)?)
}

/// Parses a single term against `spec`: its variables name the propositions, its mode
/// decides which sequencing operator is accepted, and identifiers must be defined in it.
pub fn parse_term(spec: &Spec, text: &str) -> Result<ProcExpr, ParseError> {
    let cur = Cursor::new(text)?;
    let mut parser = SpecParser { cur, vars: &spec.vars, mode: spec.mode, uses: Vec::new() };
    let term = parser.choice()?;
    if !matches!(parser.cur.peek(), Tok::Eof) {
        return parser.cur.error(format!("unexpected {} after term", parser.cur.describe()));
    }
    if let Some((x, span)) = parser.uses.into_iter().find(|(x, _)| spec.body(x).is_none()) {
        return Err(ParseError::UndefinedIdent { name: x, span });
    }
    Ok(term)
}

fn prec(e: &ProcExpr) -> u8 {
    match e {
        ProcExpr::Choice(..) => 0,
        ProcExpr::Guard(..) | ProcExpr::Signal(..) => 1,
        ProcExpr::Seqc(..) | ProcExpr::SeqLegacy(..) => 2,
        _ => 3,
    }
}

fn write_expr(e: &ProcExpr, vars: &[String], ctx: u8, out: &mut String) {
    let paren = prec(e) < ctx;
    if paren {
        out.push('(');
    }
    match e {
        ProcExpr::Deadlock => out.push('0'),
        ProcExpr::Accept => out.push('1'),
        ProcExpr::Ident(x) => out.push_str(x),
        ProcExpr::Prefix(a, p) => {
            out.push_str(a.name());
            out.push('.');
            write_expr(p, vars, 3, out);
        }
        ProcExpr::Choice(l, r) => {
            write_expr(l, vars, 0, out);
            out.push_str(" + ");
            write_expr(r, vars, 1, out);
        }
        ProcExpr::Seqc(l, r) | ProcExpr::SeqLegacy(l, r) => {
            write_expr(l, vars, 2, out);
            out.push_str(if matches!(e, ProcExpr::Seqc(..)) { ";" } else { "·" });
            write_expr(r, vars, 3, out);
        }
        ProcExpr::Na(p) => {
            out.push_str("NA(");
            write_expr(p, vars, 0, out);
            out.push(')');
        }
        ProcExpr::Guard(phi, p) | ProcExpr::Signal(phi, p) => {
            out.push('[');
            out.push_str(&phi.to_formula(vars));
            out.push_str(if matches!(e, ProcExpr::Guard(..)) { "] -> " } else { "]^^ " });
            write_expr(p, vars, 1, out);
        }
    }
    if paren {
        out.push(')');
    }
}

/// Prints a term with the minimum parentheses needed to parse it back.
pub fn print_expr(e: &ProcExpr, vars: &[String]) -> String {
    let mut out = String::new();
    write_expr(e, vars, 0, &mut out);
    out
}

pub fn print_prop(p: &Prop, vars: &[String]) -> String {
    p.to_formula(vars)
}

fn join_actions(set: &BTreeSet<Action>) -> String {
    set.iter().map(Action::name).collect::<Vec<_>>().join(", ")
}

pub fn print_spec(spec: &Spec) -> String {
    let mut out = format!("spec {} {{\n  mode {};\n  init {};\n", spec.name, spec.mode, spec.init);
    if !spec.vars.is_empty() {
        out.push_str(&format!("  vars {};\n", spec.vars.join(", ")));
    }
    if !spec.alphabet.is_empty() {
        out.push_str(&format!("  alphabet {};\n", join_actions(&spec.alphabet)));
    }
    for (x, body) in &spec.equations {
        out.push_str(&format!("  {} = {}\n", x, print_expr(body, &spec.vars)));
    }
    out.push_str("}\n");
    out
}

// ----- automata --------------------------------------------------------------

fn split_push(token: &str, data: &[String]) -> Option<Vec<String>> {
    if data.iter().any(|d| d == token) {
        return Some(vec![token.to_string()]);
    }
    let mut out = Vec::new();
    let mut rest = token;
    while !rest.is_empty() {
        let d = data.iter().filter(|d| !d.is_empty() && rest.starts_with(d.as_str())).max_by_key(|d| d.len())?;
        out.push(d.clone());
        rest = &rest[d.len()..];
    }
    Some(out)
}

/// Parses a `.pda` automaton.
pub fn parse_pda(text: &str) -> Result<Pda, ParseError> {
    let mut cur = Cursor::new(text)?;
    cur.expect_keyword("pda")?;
    let (name, _) = cur.expect_name()?;
    cur.expect_sym("{")?;
    let mut states: Vec<String> = Vec::new();
    let mut init: Option<(String, SourceSpan)> = None;
    let mut finals: Vec<(String, SourceSpan)> = Vec::new();
    let mut alphabet: Option<BTreeSet<Action>> = None;
    let mut data: Vec<String> = Vec::new();
    while let Some(kw) = cur.keyword_directive(&["states", "init", "final", "alphabet", "data"], "--") {
        cur.bump();
        match kw.as_str() {
            "states" => states = cur.name_list()?.into_iter().map(|(s, _)| s).collect(),
            "init" => {
                init = Some(cur.expect_name()?);
                cur.expect_sym(";")?;
            }
            "final" => finals = cur.name_list()?,
            "alphabet" => alphabet = Some(cur.name_list()?.into_iter().map(|(a, _)| Action::named(&a)).collect()),
            _ => {
                let list = cur.name_list()?;
                if let Some((_, span)) = list.iter().find(|(d, _)| d == "eps") {
                    return Err(ParseError::Syntax { message: "`eps` cannot be a stack symbol".into(), span: *span });
                }
                data = list.into_iter().map(|(d, _)| d).collect();
            }
        }
    }
    let state_known = |s: &str, span: SourceSpan| -> Result<(), ParseError> {
        if states.iter().any(|x| x == s) {
            Ok(())
        } else {
            Err(ParseError::Undeclared { what: "state", name: s.to_string(), span })
        }
    };
    let mut transitions = Vec::new();
    let mut used = BTreeSet::new();
    while !cur.is_sym("}") {
        let (src, src_span) = cur.expect_name()?;
        state_known(&src, src_span)?;
        cur.expect_sym("--")?;
        let (a, a_span) = cur.expect_name()?;
        let action = Action::named(&a);
        if let (Some(alpha), false) = (&alphabet, action == Action::Tau) {
            if !alpha.contains(&action) {
                return Err(ParseError::Undeclared { what: "action", name: a, span: a_span });
            }
        }
        cur.expect_sym("[")?;
        let (pop, pop_span) = cur.expect_name()?;
        let pop = if pop == "eps" {
            None
        } else if data.contains(&pop) {
            Some(pop)
        } else {
            return Err(ParseError::Undeclared { what: "stack symbol", name: pop, span: pop_span });
        };
        cur.expect_sym("/")?;
        let mut push = Vec::new();
        loop {
            let (tok, span) = cur.expect_name()?;
            if tok != "eps" {
                match split_push(&tok, &data) {
                    Some(ds) => push.extend(ds),
                    None => return Err(ParseError::Undeclared { what: "stack symbol", name: tok, span }),
                }
            }
            if !cur.eat_sym(",") {
                break;
            }
        }
        cur.expect_sym("]")?;
        cur.expect_sym("-->")?;
        let (dst, dst_span) = cur.expect_name()?;
        state_known(&dst, dst_span)?;
        if action != Action::Tau {
            used.insert(action.clone());
        }
        transitions.push(Transition { src, action, pop, push, dst });
    }
    cur.expect_sym("}")?;
    if !matches!(cur.peek(), Tok::Eof) {
        return cur.error(format!("unexpected {} after automaton", cur.describe()));
    }
    let (init, init_span) = match init {
        Some(i) => i,
        None => return cur.error("automaton declares no `init` state"),
    };
    state_known(&init, init_span)?;
    for (f, span) in &finals {
        state_known(f, *span)?;
    }
    let finals = finals.into_iter().map(|(f, _)| f).collect();
    Ok(Pda::new(name, states, alphabet.unwrap_or(used), data, transitions, init, finals)?)
}

/// Renders a stack word: juxtaposed when every symbol is one character, else comma-separated.
pub fn print_word(word: &[String]) -> String {
    if word.is_empty() {
        "eps".into()
    } else if word.iter().all(|d| d.chars().count() == 1) {
        word.concat()
    } else {
        word.join(",")
    }
}

pub fn print_transition(t: &Transition) -> String {
    format!(
        "{} --{}[{}/{}]--> {}",
        t.src,
        t.action,
        t.pop.as_deref().unwrap_or("eps"),
        print_word(&t.push),
        t.dst
    )
}

pub fn print_pda(pda: &Pda) -> String {
    let mut out = format!("pda {} {{\n", pda.name);
    out.push_str(&format!("  states {};\n", pda.states.join(", ")));
    out.push_str(&format!("  init {};\n", pda.init));
    out.push_str(&format!("  final {};\n", pda.finals.iter().cloned().collect::<Vec<_>>().join(", ")));
    out.push_str(&format!("  alphabet {};\n", join_actions(&pda.alphabet)));
    out.push_str(&format!("  data {};\n", pda.data.join(", ")));
    for t in &pda.transitions {
        out.push_str(&format!("  {}\n", print_transition(t)));
    }
    out.push_str("}\n");
    out
}

// ----- LTS export ------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LtsFormat {
    /// Aldebaran `.aut` with `accepting:` and `frontier:` lines appended.
    Aut,
    Dot,
    Text,
}

fn index_list(set: &BTreeSet<usize>) -> String {
    set.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub fn print_lts(lts: &Lts, format: LtsFormat) -> String {
    let mut out = String::new();
    match format {
        LtsFormat::Aut => {
            out.push_str(&format!("des ({},{},{})\n", lts.root, lts.transitions.len(), lts.num_states()));
            for (s, a, d) in &lts.transitions {
                out.push_str(&format!("({},\"{}\",{})\n", s, a, d));
            }
            out.push_str(&format!("accepting: {}\n", index_list(&lts.accepting)));
            if !lts.frontier.is_empty() {
                out.push_str(&format!("frontier: {}\n", index_list(&lts.frontier)));
            }
        }
        LtsFormat::Dot => {
            out.push_str("digraph lts {\n  rankdir=LR;\n  node [shape=circle];\n");
            out.push_str(&format!("  start [shape=point];\n  start -> s{};\n", lts.root));
            for (i, label) in lts.labels.iter().enumerate() {
                let shape = if lts.accepting.contains(&i) { "doublecircle" } else { "circle" };
                let style = if lts.frontier.contains(&i) { ", style=dashed" } else { "" };
                out.push_str(&format!("  s{i} [label=\"{}\", shape={shape}{style}];\n", dot_escape(label)));
            }
            for (s, a, d) in &lts.transitions {
                out.push_str(&format!("  s{s} -> s{d} [label=\"{}\"];\n", dot_escape(a.name())));
            }
            out.push_str("}\n");
        }
        LtsFormat::Text => {
            out.push_str(&format!(
                "{} states, {} transitions, root {}\n",
                lts.num_states(),
                lts.transitions.len(),
                lts.root
            ));
            let adj = lts.adjacency();
            for (i, label) in lts.labels.iter().enumerate() {
                let mut marks = Vec::new();
                if lts.accepting.contains(&i) {
                    marks.push("accepting");
                }
                if lts.frontier.contains(&i) {
                    marks.push("frontier");
                }
                let marks = if marks.is_empty() { String::new() } else { format!(" [{}]", marks.join(", ")) };
                out.push_str(&format!("{i}{marks}: {label}\n"));
                for (a, d) in &adj[i] {
                    out.push_str(&format!("  --{a}--> {d}\n"));
                }
            }
        }
    }
    out
}

/// Identifier names appearing in a specification, for collision-free fresh naming.
pub fn used_names(spec: &Spec) -> HashSet<String> {
    spec.idents().map(|x| x.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::free_idents;

    const COUNTER: &str = "spec C { mode seqc; init X; X = 1 + a.(Y;X) Y = 1 + b.1 + a.(Y;Y) }";

    #[test]
    fn counter_parses() {
        let s = parse_spec(COUNTER).unwrap();
        assert_eq!(s.equations.len(), 2);
        let y = ProcExpr::ident("Y");
        let x = ProcExpr::ident("X");
        let expect_x = ProcExpr::choice(ProcExpr::Accept, ProcExpr::act("a", ProcExpr::seqc(y.clone(), x)));
        assert_eq!(s.body("X"), Some(&expect_x));
        assert_eq!(s.alphabet.len(), 2);
    }

    #[test]
    fn prefix_binds_tighter_than_sequencing() {
        let s = parse_spec("spec T { X = a.X;X }").unwrap();
        let x = ProcExpr::ident("X");
        assert_eq!(s.body("X"), Some(&ProcExpr::seqc(ProcExpr::act("a", x.clone()), x)));
    }

    #[test]
    fn conditions_parse() {
        let s = parse_spec("spec T { vars P, Q; X = [P & !Q] -> a.1 + [P]^^ 1 }").unwrap();
        let p = Prop::var(2, 0);
        let q = Prop::var(2, 1);
        let expect = ProcExpr::choice(
            ProcExpr::guard(p.and(&q.not()), ProcExpr::act("a", ProcExpr::Accept)),
            ProcExpr::signal(p, ProcExpr::Accept),
        );
        assert_eq!(s.body("X"), Some(&expect));
        assert_eq!(parse_spec(&print_spec(&s)).unwrap(), s);
    }

    #[test]
    fn errors_carry_spans() {
        match parse_spec("spec T {\n  X = a.Y\n}") {
            Err(ParseError::UndefinedIdent { name, span }) => {
                assert_eq!(name, "Y");
                assert_eq!((span.line, span.column), (2, 9));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_spec("spec T { X = X·X }"), Err(ParseError::LegacyInSeqc { .. })));
        assert!(matches!(parse_spec("spec T { vars P; X = [Q] -> 1 }"), Err(ParseError::UnknownVar { .. })));
        assert!(matches!(parse_spec("spec T { X = a. }"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn legacy_mode_round_trip() {
        let s = parse_spec("spec D { mode seq; init X; X = a.(X·Y) + b.1 Y = 1 + c.(Y;Y) }").unwrap();
        assert_eq!(s.mode, Mode::Seq);
        assert_eq!(free_idents(s.body("X").unwrap()).len(), 2);
        assert_eq!(parse_spec(&print_spec(&s)).unwrap(), s);
    }

    #[test]
    fn pda_parses_and_round_trips() {
        let text = "pda C { states up; init up; final up; alphabet a, b; data 1;\n up --a[eps/1]--> up\n up --a[1/11]--> up\n up --b[1/eps]--> up }";
        let p = parse_pda(text).unwrap();
        assert_eq!(p.transitions.len(), 3);
        assert_eq!(p.transitions[1].push, vec!["1".to_string(), "1".to_string()]);
        assert_eq!(parse_pda(&print_pda(&p)).unwrap(), p);
    }

    #[test]
    fn pda_errors() {
        assert!(matches!(
            parse_pda("pda P { states s; init s; final ; data 1; s --a[2/eps]--> s }"),
            Err(ParseError::Undeclared { what: "stack symbol", .. })
        ));
        assert!(matches!(
            parse_pda("pda P { states s; init s; final ; alphabet b; s --a[eps/eps]--> s }"),
            Err(ParseError::Undeclared { what: "action", .. })
        ));
        assert!(matches!(
            parse_pda("pda P { states s; init s; final ; s --a[eps/eps]--> t }"),
            Err(ParseError::Undeclared { what: "state", .. })
        ));
    }

    #[test]
    fn aut_export_of_single_state() {
        let lts = Lts {
            labels: vec!["1".into()],
            root: 0,
            transitions: vec![],
            accepting: BTreeSet::from([0]),
            frontier: BTreeSet::new(),
            depth: vec![0],
        };
        assert_eq!(print_lts(&lts, LtsFormat::Aut), "des (0,0,1)\naccepting: 0\n");
    }
}
