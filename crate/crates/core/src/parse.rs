//! Concrete syntax input.
//!
//! ```text
//! file   ::= ('type' X '=' T)* (('proc' f ('[' x ':' T, ... ']')? '=' P)+ | P)
//! P      ::= U ('|' U)*
//! U      ::= '0' | '(' P ')' | '(' 'new' x y ':' T ')' P | 'new' x y ':' T P
//!          | 'if' v 'then' U 'else' U
//!          | q? x '(' B ('+' B)* ')'                         mixed
//!          | x '!' v K | q? x '?' y K | x '*?' y K
//!          | x 'select' l K | 'case' x 'of' '{' l '->' P, ... '}'   classical
//! B      ::= l '!' v K | l '?' y K
//! K      ::= ('.' U)?
//! ```
//!
//! A restriction scopes over the rest of the enclosing parallel
//! composition. Comments run from `//` to the end of the line.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{
    ClassicalProcess, Label, Mark, MixedBranch, MixedProcess, Name, NameKind, Polarity, Process, Qualifier, Value, View,
};
use crate::types::{ClassicalType, MixedType, MixedTypeBranch};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dialect {
    Native,
    /// Reads back SePi emission: `s_1` is `%s1`, `m_out` is `m^!`,
    /// `ell_1` is `%ell_1`.
    Sepi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Calculus {
    Mixed,
    Classical,
}

/// A named process with the typing context it is checked under.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Program<A: crate::syntax::Action> {
    pub name: String,
    pub context: Vec<(Name, A::Type)>,
    pub process: Process<A>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SourceFile<A: crate::syntax::Action> {
    pub programs: Vec<Program<A>>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const SYMBOLS: [&str; 20] =
    ["->", "*", "(", ")", "{", "}", "[", "]", ",", ".", ":", "=", "|", "+", "&", "!", "?", "^", ";", "-"];

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                {
                    let c = chars[i];
                    advance(&mut i, &mut line, &mut col, c);
                }
            }
            continue;
        }
        let (l, c0) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' || c == '%' {
            let start = i;
            advance(&mut i, &mut line, &mut col, c);
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                {
                    let c = chars[i];
                    advance(&mut i, &mut line, &mut col, c);
                }
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Token { tok: Tok::Ident(s), line: l, column: c0 });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                {
                    let c = chars[i];
                    advance(&mut i, &mut line, &mut col, c);
                }
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse::<i64>().map_err(|_| ParseError {
                line: l,
                column: c0,
                message: format!("integer literal {s} out of range"),
            })?;
            out.push(Token { tok: Tok::Int(n), line: l, column: c0 });
            continue;
        }
        let sym = SYMBOLS.iter().find(|s| {
            let s: Vec<char> = s.chars().collect();
            chars[i..].starts_with(&s)
        });
        match sym {
            Some(s) => {
                for _ in 0..s.len() {
                    {
                        let c = chars[i];
                        advance(&mut i, &mut line, &mut col, c);
                    }
                }
                out.push(Token { tok: Tok::Sym(s), line: l, column: c0 });
            }
            None => {
                return Err(ParseError { line: l, column: c0, message: format!("unexpected character {c:?}") });
            }
        }
    }
    out.push(Token { tok: Tok::Eof, line, column: col });
    Ok(out)
}

const KEYWORDS: [&str; 18] = [
    "new", "if", "then", "else", "case", "of", "select", "lin", "un", "rec", "end", "unit", "bool", "int", "true",
    "false", "type", "proc",
];

#[doc(hidden)]
pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    dialect: Dialect,
    aliases: HashMap<String, AliasBody>,
}

#[derive(Clone)]
#[doc(hidden)]
pub enum AliasBody {
    Mixed(MixedType),
    Classical(ClassicalType),
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(text: &str, dialect: Dialect) -> PResult<Parser> {
        Ok(Parser { toks: lex(text)?, pos: 0, dialect, aliases: HashMap::new() })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(ParseError { line: t.line, column: t.column, message: message.into() })
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.eat_kw(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.error(format!("expected an identifier, found {}", self.describe())),
        }
    }

    fn expect_eof(&self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.error(format!("unexpected {}", self.describe()))
        }
    }

    // ---- names, labels, values

    fn name(&mut self) -> PResult<Name> {
        let s = self.ident()?;
        self.to_name(&s)
    }

    fn to_name(&self, s: &str) -> PResult<Name> {
        if let Some(rest) = s.strip_prefix('%') {
            let mut cs = rest.chars();
            let kind = cs.next().and_then(NameKind::from_letter);
            let digits: String = cs.collect();
            return match (kind, digits.parse::<u32>()) {
                (Some(kind), Ok(counter)) if !digits.is_empty() => Ok(Name::generated(kind, counter)),
                _ => self.error(format!("malformed generated name `{s}`")),
            };
        }
        if self.dialect == Dialect::Sepi {
            if let Some((head, tail)) = s.split_once('_') {
                let mut hc = head.chars();
                if let (Some(c), None) = (hc.next(), hc.next()) {
                    if let (Some(kind), Ok(counter)) = (NameKind::from_letter(c), tail.parse::<u32>()) {
                        return Ok(Name::generated(kind, counter));
                    }
                }
            }
        }
        Ok(Name::user(s))
    }

    fn binder(&mut self) -> PResult<Name> {
        if self.is_sym("(") && matches!(self.peek_at(1), Tok::Sym(")")) {
            self.bump();
            self.bump();
            return Ok(Name::wildcard());
        }
        self.name()
    }

    fn label(&mut self) -> PResult<Label> {
        let s = self.ident()?;
        let mut label = if self.dialect == Dialect::Sepi { demangle(&s) } else { Label::new(s) };
        if self.is_sym("^") {
            self.bump();
            label.mark = match self.bump() {
                Tok::Sym("!") => Mark::Out,
                Tok::Sym("?") => Mark::In,
                _ => return self.error("expected `!` or `?` after `^`"),
            };
        }
        Ok(label)
    }

    fn value(&mut self) -> PResult<Value> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Value::True)
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(Value::False)
            }
            Tok::Int(n) => {
                self.bump();
                Ok(Value::Int { value: n })
            }
            Tok::Sym("-") => {
                self.bump();
                match self.bump() {
                    Tok::Int(n) => Ok(Value::Int { value: -n }),
                    _ => self.error("expected an integer after `-`"),
                }
            }
            Tok::Sym("(") => {
                self.bump();
                self.expect_sym(")")?;
                Ok(Value::Unit)
            }
            _ => Ok(Value::var(self.name()?)),
        }
    }

    fn qualifier(&mut self) -> Option<Qualifier> {
        if self.eat_kw("lin") {
            Some(Qualifier::Lin)
        } else if self.eat_kw("un") {
            Some(Qualifier::Un)
        } else {
            None
        }
    }

    fn view(&mut self) -> Option<View> {
        if self.eat_sym("+") {
            Some(View::Internal)
        } else if self.eat_sym("&") {
            Some(View::External)
        } else {
            None
        }
    }

    fn polarity(&mut self) -> Option<Polarity> {
        if self.eat_sym("!") {
            Some(Polarity::Out)
        } else if self.eat_sym("?") {
            Some(Polarity::In)
        } else {
            None
        }
    }

    // ---- types

    fn mixed_type(&mut self, bound: &mut Vec<String>) -> PResult<MixedType> {
        if self.eat_kw("rec") {
            let a = self.ident()?;
            self.expect_sym(".")?;
            bound.push(a.clone());
            let body = self.mixed_type(bound);
            bound.pop();
            return Ok(MixedType::rec(a, body?));
        }
        if self.is_kw("lin") || self.is_kw("un") || self.is_sym("+") || self.is_sym("&") {
            let q = self.qualifier().unwrap_or(Qualifier::Lin);
            let Some(view) = self.view() else {
                return self.error(format!("expected `+` or `&`, found {}", self.describe()));
            };
            self.expect_sym("{")?;
            let mut branches = Vec::new();
            if !self.is_sym("}") {
                loop {
                    let label = self.label()?;
                    let Some(polarity) = self.polarity() else {
                        return self.error("expected `!` or `?` after the branch label");
                    };
                    let payload = self.mixed_atom(bound)?;
                    self.expect_sym(".")?;
                    let cont = self.mixed_type(bound)?;
                    branches.push(MixedTypeBranch::new(label, polarity, payload, cont));
                    if !self.eat_sym(",") {
                        break;
                    }
                }
            }
            self.expect_sym("}")?;
            return Ok(MixedType::choice(q, view, branches));
        }
        self.mixed_atom(bound)
    }

    fn mixed_atom(&mut self, bound: &mut Vec<String>) -> PResult<MixedType> {
        match self.peek().clone() {
            Tok::Ident(s) => match s.as_str() {
                "end" => {
                    self.bump();
                    Ok(MixedType::End)
                }
                "unit" => {
                    self.bump();
                    Ok(MixedType::Unit)
                }
                "bool" => {
                    self.bump();
                    Ok(MixedType::Bool)
                }
                "int" | "integer" => {
                    self.bump();
                    Ok(MixedType::Int)
                }
                "lin" | "un" => self.mixed_type(bound),
                _ => {
                    let a = self.ident()?;
                    if bound.contains(&a) {
                        return Ok(MixedType::var(a));
                    }
                    match self.aliases.get(&a) {
                        Some(AliasBody::Mixed(t)) => Ok(t.clone()),
                        Some(AliasBody::Classical(_)) => self.error(format!("`{a}` is a classical type")),
                        None => Ok(MixedType::var(a)),
                    }
                }
            },
            Tok::Sym("+") | Tok::Sym("&") => self.mixed_type(bound),
            Tok::Sym("(") => {
                self.bump();
                if self.eat_sym(")") {
                    return Ok(MixedType::Unit);
                }
                let t = self.mixed_type(bound)?;
                self.expect_sym(")")?;
                Ok(t)
            }
            _ => self.error(format!("expected a type, found {}", self.describe())),
        }
    }

    fn classical_type(&mut self, bound: &mut Vec<String>) -> PResult<ClassicalType> {
        if self.eat_kw("rec") {
            let a = self.ident()?;
            self.expect_sym(".")?;
            bound.push(a.clone());
            let body = self.classical_type(bound);
            bound.pop();
            return Ok(ClassicalType::rec(a, body?));
        }
        if self.is_kw("lin")
            || self.is_kw("un")
            || self.is_sym("+")
            || self.is_sym("&")
            || self.is_sym("!")
            || self.is_sym("?")
        {
            let q = self.qualifier().unwrap_or(Qualifier::Lin);
            if let Some(polarity) = self.polarity() {
                let payload = self.classical_atom(bound)?;
                self.expect_sym(".")?;
                let cont = self.classical_type(bound)?;
                return Ok(ClassicalType::comm(q, polarity, payload, cont));
            }
            let Some(view) = self.view() else {
                return self.error(format!("expected `+`, `&`, `!` or `?`, found {}", self.describe()));
            };
            self.expect_sym("{")?;
            let mut arms = BTreeMap::new();
            if !self.is_sym("}") {
                loop {
                    let label = self.label()?;
                    self.expect_sym(":")?;
                    let t = self.classical_type(bound)?;
                    if arms.insert(label.clone(), t).is_some() {
                        return self.error(format!("duplicate label `{label}`"));
                    }
                    if !self.eat_sym(",") {
                        break;
                    }
                }
            }
            self.expect_sym("}")?;
            return Ok(ClassicalType::Choice { q, view, arms });
        }
        self.classical_atom(bound)
    }

    fn classical_atom(&mut self, bound: &mut Vec<String>) -> PResult<ClassicalType> {
        match self.peek().clone() {
            Tok::Ident(s) => match s.as_str() {
                "end" => {
                    self.bump();
                    Ok(ClassicalType::End)
                }
                "unit" => {
                    self.bump();
                    Ok(ClassicalType::Unit)
                }
                "bool" => {
                    self.bump();
                    Ok(ClassicalType::Bool)
                }
                "int" | "integer" => {
                    self.bump();
                    Ok(ClassicalType::Int)
                }
                "lin" | "un" => self.classical_type(bound),
                _ => {
                    let a = self.ident()?;
                    if bound.contains(&a) {
                        return Ok(ClassicalType::var(a));
                    }
                    match self.aliases.get(&a) {
                        Some(AliasBody::Classical(t)) => Ok(t.clone()),
                        Some(AliasBody::Mixed(_)) => self.error(format!("`{a}` is a mixed type")),
                        None => Ok(ClassicalType::var(a)),
                    }
                }
            },
            Tok::Sym("*") => {
                self.bump();
                if let Some(polarity) = self.polarity() {
                    let payload = self.classical_atom(bound)?;
                    return Ok(ClassicalType::star_comm(polarity, payload));
                }
                let Some(view) = self.view() else {
                    return self.error("expected `!`, `?`, `+` or `&` after `*`");
                };
                self.expect_sym("{")?;
                let mut labels = Vec::new();
                if !self.is_sym("}") {
                    loop {
                        labels.push(self.label()?);
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
                self.expect_sym("}")?;
                let arms = labels.into_iter().map(|l| (l, ClassicalType::var("a")));
                Ok(ClassicalType::rec("a", ClassicalType::choice(Qualifier::Un, view, arms)))
            }
            Tok::Sym("+") | Tok::Sym("&") | Tok::Sym("!") | Tok::Sym("?") => self.classical_type(bound),
            Tok::Sym("(") => {
                self.bump();
                if self.eat_sym(")") {
                    return Ok(ClassicalType::Unit);
                }
                let t = self.classical_type(bound)?;
                self.expect_sym(")")?;
                Ok(t)
            }
            _ => self.error(format!("expected a type, found {}", self.describe())),
        }
    }

    // ---- processes

    fn par<A: ParseAction>(&mut self) -> PResult<Process<A>> {
        let mut items = Vec::new();
        loop {
            let (item, open) = self.item::<A>()?;
            items.push(item);
            if open || !self.eat_sym("|") {
                break;
            }
        }
        Ok(Process::par_all(items))
    }

    /// Returns the item and whether it was a restriction that consumed the
    /// rest of the composition.
    fn item<A: ParseAction>(&mut self) -> PResult<(Process<A>, bool)> {
        if self.is_sym("(") && self.peek_at(1) == &Tok::Ident("new".into()) {
            self.bump();
            self.bump();
            let (x, y, ty) = self.new_header::<A>()?;
            if self.eat_sym(")") {
                let body = self.par::<A>()?;
                return Ok((Process::new(x, y, ty, body), true));
            }
            let body = self.par::<A>()?;
            self.expect_sym(")")?;
            return Ok((Process::new(x, y, ty, body), false));
        }
        if self.eat_kw("new") {
            let (x, y, ty) = self.new_header::<A>()?;
            let body = self.par::<A>()?;
            return Ok((Process::new(x, y, ty, body), true));
        }
        Ok((self.unary::<A>()?, false))
    }

    fn new_header<A: ParseAction>(&mut self) -> PResult<(Name, Name, A::Type)> {
        let x = self.name()?;
        let y = self.name()?;
        self.expect_sym(":")?;
        let ty = A::parse_type(self)?;
        Ok((x, y, ty))
    }

    fn unary<A: ParseAction>(&mut self) -> PResult<Process<A>> {
        if matches!(self.peek(), Tok::Int(0)) {
            self.bump();
            return Ok(Process::Inact);
        }
        if self.is_sym("(") && self.peek_at(1) == &Tok::Ident("new".into()) {
            return Ok(self.item::<A>()?.0);
        }
        if self.is_kw("new") {
            return Ok(self.item::<A>()?.0);
        }
        if self.eat_sym("(") {
            let p = self.par::<A>()?;
            self.expect_sym(")")?;
            return Ok(p);
        }
        if self.eat_kw("if") {
            let cond = self.value()?;
            self.expect_kw("then")?;
            let then_branch = self.unary::<A>()?;
            self.expect_kw("else")?;
            let else_branch = self.unary::<A>()?;
            return Ok(Process::cond(cond, then_branch, else_branch));
        }
        A::parse_prefix(self)
    }

    fn cont<A: ParseAction>(&mut self) -> PResult<Process<A>> {
        if self.eat_sym(".") {
            self.unary::<A>()
        } else {
            Ok(Process::Inact)
        }
    }

    fn context<A: ParseAction>(&mut self) -> PResult<Vec<(Name, A::Type)>> {
        let mut ctx = Vec::new();
        if self.eat_sym("[") {
            if !self.is_sym("]") {
                loop {
                    let x = self.name()?;
                    self.expect_sym(":")?;
                    let t = A::parse_type(self)?;
                    if ctx.iter().any(|(y, _)| *y == x) {
                        return self.error(format!("`{x}` declared twice"));
                    }
                    ctx.push((x, t));
                    if !self.eat_sym(",") {
                        break;
                    }
                }
            }
            self.expect_sym("]")?;
        }
        Ok(ctx)
    }

    fn type_aliases<A: ParseAction>(&mut self) -> PResult<()> {
        while self.eat_kw("type") {
            let name = self.ident()?;
            self.expect_sym("=")?;
            let body = A::parse_alias(self)?;
            self.aliases.insert(name, body);
        }
        Ok(())
    }

    fn file<A: ParseAction>(&mut self) -> PResult<SourceFile<A>> {
        self.type_aliases::<A>()?;
        let mut programs = Vec::new();
        if self.is_kw("proc") {
            while self.eat_kw("proc") {
                let name = self.ident()?;
                let context = self.context::<A>()?;
                self.expect_sym("=")?;
                let process = self.par::<A>()?;
                self.eat_sym(";");
                programs.push(Program { name, context, process });
            }
        } else {
            let process = self.par::<A>()?;
            programs.push(Program { name: "main".to_string(), context: Vec::new(), process });
        }
        self.expect_eof()?;
        Ok(SourceFile { programs })
    }
}

fn demangle(s: &str) -> Label {
    if let Some(base) = s.strip_suffix("_out") {
        return Label::marked(base, Polarity::Out);
    }
    if let Some(base) = s.strip_suffix("_in") {
        return Label::marked(base, Polarity::In);
    }
    if s == "ell" || s.strip_prefix("ell_").is_some_and(|d| !d.is_empty() && d.chars().all(|c| c.is_ascii_digit())) {
        return Label::new(format!("%{s}"));
    }
    Label::new(s)
}

/// The calculus-specific part of the grammar.
pub trait ParseAction: crate::syntax::Action {
    #[doc(hidden)]
    fn parse_prefix(p: &mut Parser) -> PResult<Process<Self>>;
    #[doc(hidden)]
    fn parse_type(p: &mut Parser) -> PResult<Self::Type>;
    #[doc(hidden)]
    fn parse_alias(p: &mut Parser) -> PResult<AliasBody>;
}

impl ParseAction for crate::syntax::Choice {
    fn parse_prefix(p: &mut Parser) -> PResult<MixedProcess> {
        let q = p.qualifier().unwrap_or(Qualifier::Lin);
        let subject = p.name()?;
        p.expect_sym("(")?;
        let mut branches = Vec::new();
        loop {
            let label = p.label()?;
            let branch = match p.polarity() {
                Some(Polarity::Out) => {
                    let v = p.value()?;
                    MixedBranch::output(label, v, p.cont()?)
                }
                Some(Polarity::In) => {
                    let z = p.binder()?;
                    MixedBranch::input(label, z, p.cont()?)
                }
                None => return p.error(format!("expected `!` or `?` after label, found {}", p.describe())),
            };
            branches.push(branch);
            if !p.eat_sym("+") {
                break;
            }
        }
        p.expect_sym(")")?;
        Ok(MixedProcess::choice(q, subject, branches))
    }

    fn parse_type(p: &mut Parser) -> PResult<MixedType> {
        p.mixed_type(&mut Vec::new())
    }

    fn parse_alias(p: &mut Parser) -> PResult<AliasBody> {
        Ok(AliasBody::Mixed(p.mixed_type(&mut Vec::new())?))
    }
}

impl ParseAction for crate::syntax::ClassicalAction {
    fn parse_prefix(p: &mut Parser) -> PResult<ClassicalProcess> {
        if p.eat_kw("case") {
            let subject = p.name()?;
            p.expect_kw("of")?;
            p.expect_sym("{")?;
            let mut arms = BTreeMap::new();
            loop {
                let label = p.label()?;
                p.expect_sym("->")?;
                let body = p.par::<Self>()?;
                if arms.insert(label.clone(), body).is_some() {
                    return p.error(format!("duplicate case arm `{label}`"));
                }
                if !p.eat_sym(",") {
                    break;
                }
            }
            p.expect_sym("}")?;
            return Ok(ClassicalProcess::case(subject, arms));
        }
        let q = p.qualifier();
        let subject = p.name()?;
        if p.eat_sym("!") {
            if q.is_some() {
                return p.error("outputs take no qualifier");
            }
            let v = p.value()?;
            return Ok(ClassicalProcess::send(subject, v, p.cont()?));
        }
        if p.eat_sym("?") {
            let z = p.binder()?;
            return Ok(ClassicalProcess::receive(q.unwrap_or(Qualifier::Lin), subject, z, p.cont()?));
        }
        if p.is_sym("*") && matches!(p.peek_at(1), Tok::Sym("?")) {
            p.bump();
            p.bump();
            if q == Some(Qualifier::Lin) {
                return p.error("`*?` is an unrestricted input");
            }
            let z = p.binder()?;
            return Ok(ClassicalProcess::receive(Qualifier::Un, subject, z, p.cont()?));
        }
        if p.eat_kw("select") {
            let label = p.label()?;
            return Ok(ClassicalProcess::select(subject, label, p.cont()?));
        }
        p.error(format!("expected `!`, `?`, `*?` or `select`, found {}", p.describe()))
    }

    fn parse_type(p: &mut Parser) -> PResult<ClassicalType> {
        p.classical_type(&mut Vec::new())
    }

    fn parse_alias(p: &mut Parser) -> PResult<AliasBody> {
        Ok(AliasBody::Classical(p.classical_type(&mut Vec::new())?))
    }
}

fn whole<T>(text: &str, dialect: Dialect, f: impl FnOnce(&mut Parser) -> PResult<T>) -> PResult<T> {
    let mut p = Parser::new(text, dialect)?;
    let out = f(&mut p)?;
    p.expect_eof()?;
    Ok(out)
}

pub fn parse_mixed(text: &str) -> Result<MixedProcess, ParseError> {
    whole(text, Dialect::Native, |p| p.par())
}

pub fn parse_classical(text: &str) -> Result<ClassicalProcess, ParseError> {
    whole(text, Dialect::Native, |p| p.par())
}

/// Reads SePi emission back, undoing name and label mangling.
/// Leading `type X = T` aliases are expanded.
pub fn parse_sepi(text: &str) -> Result<ClassicalProcess, ParseError> {
    whole(text, Dialect::Sepi, |p| {
        p.type_aliases::<crate::syntax::ClassicalAction>()?;
        p.par()
    })
}

pub fn parse_mixed_type(text: &str) -> Result<MixedType, ParseError> {
    whole(text, Dialect::Native, |p| p.mixed_type(&mut Vec::new()))
}

pub fn parse_classical_type(text: &str) -> Result<ClassicalType, ParseError> {
    whole(text, Dialect::Native, |p| p.classical_type(&mut Vec::new()))
}

pub fn parse_mixed_file(text: &str) -> Result<SourceFile<crate::syntax::Choice>, ParseError> {
    Parser::new(text, Dialect::Native)?.file()
}

pub fn parse_classical_file(text: &str) -> Result<SourceFile<crate::syntax::ClassicalAction>, ParseError> {
    Parser::new(text, Dialect::Native)?.file()
}

impl<A: crate::print::PrintAction> SourceFile<A> {
    /// Native text that parses back to the same file.
    pub fn print(&self) -> String {
        let mut out = String::new();
        for prog in &self.programs {
            out.push_str("proc ");
            out.push_str(&prog.name);
            if !prog.context.is_empty() {
                out.push_str(" [");
                for (i, (x, t)) in prog.context.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    let mut pr = crate::print::Printer::new(crate::print::Dialect::Native);
                    pr.name(x);
                    out.push_str(&pr.finish());
                    out.push_str(": ");
                    let mut pr = crate::print::Printer::new(crate::print::Dialect::Native);
                    A::print_type(t, &mut pr);
                    out.push_str(&pr.finish());
                }
                out.push(']');
            }
            out.push_str(" =\n  ");
            out.push_str(&crate::print::print_process(&prog.process, crate::print::Dialect::Native));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_branch_listing() {
        let p =
            parse_mixed("(new x y: lin&{m!int.end, n?int.end}) lin x (m!3 + n?z) | lin y (m?w + n!5 + p!7)").unwrap();
        let Process::New { body, .. } = &p else { panic!("expected a restriction, got {p:?}") };
        assert!(matches!(&**body, Process::Par { .. }));
    }

    #[test]
    fn inaction() {
        assert_eq!(parse_mixed("0").unwrap(), Process::Inact);
        assert_eq!(parse_classical("0").unwrap(), Process::Inact);
    }

    #[test]
    fn one_arm_case() {
        let p = parse_classical("case y of {ell -> 0}").unwrap();
        let Process::Act { action: crate::syntax::ClassicalAction::Case { arms, .. } } = p else { panic!() };
        assert_eq!(arms.len(), 1);
    }

    #[test]
    fn positioned_errors() {
        let e = parse_mixed("lin x (m!3 +").unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.column > 10);
        let e = parse_classical("x!3 |\n  $").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
    }

    #[test]
    fn restriction_scopes_over_the_rest() {
        let p = parse_classical("(new x y: lin!int.end) x!3 | y?z").unwrap();
        assert!(matches!(p, Process::New { .. }));
        let q = parse_classical("((new x y: lin!int.end) x!3) | y?z").unwrap();
        assert!(matches!(q, Process::Par { .. }));
    }

    #[test]
    fn star_abbreviations() {
        let t = parse_classical_type("*+{%ell_1, %ell_2}").unwrap();
        assert_eq!(t, ClassicalType::star_select([Label::race(1, 2), Label::race(2, 2)]));
        let u = parse_classical_type("*!()").unwrap();
        assert_eq!(u, ClassicalType::star_comm(Polarity::Out, ClassicalType::Unit));
    }

    #[test]
    fn aliases_and_contexts() {
        let f = parse_classical_file("type Unr = lin&{m^?: lin!int.end}\nproc p [x: *?Unr] = x?a").unwrap();
        assert_eq!(f.programs.len(), 1);
        let (_, t) = &f.programs[0].context[0];
        assert!(crate::types::is_un(t));
    }

    #[test]
    fn sepi_demangling() {
        let p = parse_sepi("new s_1 t_1: *+{ell}\ns_1 select ell | case t_1 of {ell -> x select m_out}").unwrap();
        let Process::New { x, .. } = &p else { panic!() };
        assert_eq!(*x, Name::generated(NameKind::S, 1));
    }
}
