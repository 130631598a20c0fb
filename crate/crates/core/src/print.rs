//! Concrete syntax output.
//!
//! The native syntax round-trips through [`crate::parse`]. The SePi
//! dialect renames generated names (`%s1` to `s_1`), mangles marked and
//! reserved labels (`m^!` to `m_out`, `%ell_2` to `ell_2`) and uses the
//! listing layout of `new x y: T` without parentheses.

use std::fmt::{self, Write as _};

use crate::syntax::{
    Choice, ClassicalAction, ClassicalProcess, Comm, Label, MixedProcess, Name, Process, Qualifier, Value,
};
use crate::types::{free_vars, ClassicalType, MixedType};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dialect {
    Native,
    Sepi,
}

pub struct Printer {
    dialect: Dialect,
    indent: usize,
    out: String,
}

/// Actions that know how to print themselves.
pub trait PrintAction: crate::syntax::Action {
    fn print_action(&self, pr: &mut Printer);
    fn print_type(ty: &Self::Type, pr: &mut Printer);
    /// Whether the printed action ends with a restriction whose body would
    /// swallow a following `| Q`.
    fn ends_open(&self) -> bool;
}

impl Printer {
    pub fn new(dialect: Dialect) -> Self {
        Printer { dialect, indent: 0, out: String::new() }
    }

    pub fn finish(self) -> String {
        self.out
    }

    fn push(&mut self, s: &str) {
        self.out.push_str(s);
    }

    fn newline(&mut self) {
        self.out.push('\n');
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
    }

    pub fn name(&mut self, n: &Name) {
        match self.dialect {
            Dialect::Native => {
                let _ = write!(self.out, "{n}");
            }
            Dialect::Sepi => self.out.push_str(&n.plain(true)),
        }
    }

    pub fn binder(&mut self, n: &Name) {
        if n.is_wildcard() && self.dialect == Dialect::Sepi {
            self.push("()");
        } else {
            self.name(n);
        }
    }

    pub fn label(&mut self, l: &Label) {
        match self.dialect {
            Dialect::Native => {
                let _ = write!(self.out, "{l}");
            }
            Dialect::Sepi => self.out.push_str(&l.mangled()),
        }
    }

    pub fn value(&mut self, v: &Value) {
        match v {
            Value::Var { name } => self.name(name),
            other => {
                let _ = write!(self.out, "{other}");
            }
        }
    }

    fn qualifier(&mut self, q: Qualifier) {
        let _ = write!(self.out, "{q}");
    }

    pub fn process<A: PrintAction>(&mut self, p: &Process<A>) {
        self.par(p);
    }

    fn par<A: PrintAction>(&mut self, p: &Process<A>) {
        let mut items = Vec::new();
        let mut cur = p;
        while let Process::Par { left, right } = cur {
            items.push(&**left);
            cur = right;
        }
        items.push(cur);
        let last = items.len() - 1;
        for (i, item) in items.into_iter().enumerate() {
            if i > 0 {
                if self.dialect == Dialect::Sepi {
                    self.push(" |");
                    self.newline();
                } else {
                    self.push(" | ");
                }
            }
            let wrap = matches!(item, Process::Par { .. }) || (i < last && ends_open(item));
            if wrap {
                self.push("(");
                self.par(item);
                self.push(")");
            } else {
                self.item(item);
            }
        }
    }

    fn item<A: PrintAction>(&mut self, p: &Process<A>) {
        match p {
            Process::New { x, y, ty, body } => {
                match self.dialect {
                    Dialect::Native => self.push("(new "),
                    Dialect::Sepi => self.push("new "),
                }
                self.name(x);
                self.push(" ");
                self.name(y);
                self.push(": ");
                A::print_type(ty, self);
                match self.dialect {
                    Dialect::Native => self.push(") "),
                    Dialect::Sepi => self.newline(),
                }
                self.par(body);
            }
            other => self.unary(other),
        }
    }

    /// A process in a position that binds tighter than `|`.
    pub fn unary<A: PrintAction>(&mut self, p: &Process<A>) {
        match p {
            Process::Inact => self.push("0"),
            Process::Par { .. } => {
                self.push("(");
                self.par(p);
                self.push(")");
            }
            Process::New { .. } => self.item(p),
            Process::If { cond, then_branch, else_branch } => {
                self.push("if ");
                self.value(cond);
                self.push(" then ");
                self.unary(then_branch);
                self.push(" else ");
                self.unary(else_branch);
            }
            Process::Act { action } => action.print_action(self),
        }
    }

    /// `.P`, omitted when `P` is `0`.
    fn cont<A: PrintAction>(&mut self, p: &Process<A>) {
        if !p.is_inact() {
            self.push(".");
            if self.dialect == Dialect::Sepi && matches!(p, Process::New { .. }) {
                self.indent += 1;
                self.newline();
                self.unary(p);
                self.indent -= 1;
            } else {
                self.push(" ");
                self.unary(p);
            }
        }
    }

    pub fn mixed_type(&mut self, t: &MixedType) {
        match t {
            MixedType::Choice { q, view, branches } => {
                self.qualifier(*q);
                let _ = write!(self.out, "{view}{{");
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        self.push(", ");
                    }
                    self.label(&b.label);
                    let _ = write!(self.out, "{}", b.polarity);
                    self.mixed_atom(&b.payload);
                    self.push(".");
                    self.mixed_type(&b.cont);
                }
                self.push("}");
            }
            MixedType::Rec { var, body } => {
                let _ = write!(self.out, "rec {var}.");
                self.mixed_type(body);
            }
            other => self.mixed_atom(other),
        }
    }

    fn mixed_atom(&mut self, t: &MixedType) {
        match t {
            MixedType::End => self.push("end"),
            MixedType::Unit => self.push("unit"),
            MixedType::Bool => self.push("bool"),
            MixedType::Int => self.push("int"),
            MixedType::Var { var } => self.push(var),
            MixedType::Choice { .. } => self.mixed_type(t),
            MixedType::Rec { .. } => {
                self.push("(");
                self.mixed_type(t);
                self.push(")");
            }
        }
    }

    pub fn classical_type(&mut self, t: &ClassicalType) {
        if self.star(t) {
            return;
        }
        match t {
            ClassicalType::Comm { q, polarity, payload, cont } => {
                self.qualifier(*q);
                let _ = write!(self.out, "{polarity}");
                self.classical_atom(payload);
                self.push(".");
                self.classical_type(cont);
            }
            ClassicalType::Choice { q, view, arms } => {
                self.qualifier(*q);
                let _ = write!(self.out, "{view}{{");
                for (i, (l, t)) in arms.iter().enumerate() {
                    if i > 0 {
                        self.push(", ");
                    }
                    self.label(l);
                    self.push(": ");
                    self.classical_type(t);
                }
                self.push("}");
            }
            ClassicalType::Rec { var, body } => {
                let _ = write!(self.out, "rec {var}.");
                self.classical_type(body);
            }
            other => self.classical_atom(other),
        }
    }

    fn classical_atom(&mut self, t: &ClassicalType) {
        if self.star(t) {
            return;
        }
        match t {
            ClassicalType::End => self.push("end"),
            ClassicalType::Unit => match self.dialect {
                Dialect::Native => self.push("unit"),
                Dialect::Sepi => self.push("()"),
            },
            ClassicalType::Bool => self.push("bool"),
            ClassicalType::Int => self.push("int"),
            ClassicalType::Var { var } => self.push(var),
            ClassicalType::Choice { .. } => self.classical_type(t),
            ClassicalType::Comm { .. } | ClassicalType::Rec { .. } => {
                self.push("(");
                self.classical_type(t);
                self.push(")");
            }
        }
    }

    /// `*!T`, `*?T`, `*+{..}` and `*&{..}` for the exact shapes they
    /// abbreviate, with recursion variable `a`.
    fn star(&mut self, t: &ClassicalType) -> bool {
        let ClassicalType::Rec { var, body } = t else {
            return false;
        };
        if var != "a" {
            return false;
        }
        let is_a = |t: &ClassicalType| matches!(t, ClassicalType::Var { var } if var == "a");
        match &**body {
            ClassicalType::Comm { q: Qualifier::Un, polarity, payload, cont }
                if is_a(cont) && !free_vars(&**payload).contains("a") =>
            {
                let _ = write!(self.out, "*{polarity}");
                self.classical_atom(payload);
                true
            }
            ClassicalType::Choice { q: Qualifier::Un, view, arms } if arms.values().all(is_a) => {
                let _ = write!(self.out, "*{view}{{");
                for (i, l) in arms.keys().enumerate() {
                    if i > 0 {
                        self.push(", ");
                    }
                    self.label(l);
                }
                self.push("}");
                true
            }
            _ => false,
        }
    }
}

fn ends_open<A: PrintAction>(p: &Process<A>) -> bool {
    match p {
        Process::New { .. } => true,
        Process::If { else_branch, .. } => ends_open(else_branch),
        Process::Act { action } => action.ends_open(),
        Process::Par { .. } | Process::Inact => false,
    }
}

impl PrintAction for Choice {
    fn print_action(&self, pr: &mut Printer) {
        pr.qualifier(self.q);
        pr.push(" ");
        pr.name(&self.subject);
        pr.push(" (");
        for (i, b) in self.branches.iter().enumerate() {
            if i > 0 {
                pr.push(" + ");
            }
            pr.label(&b.label);
            match &b.comm {
                Comm::Out { payload } => {
                    pr.push("!");
                    pr.value(payload);
                }
                Comm::In { binder } => {
                    pr.push("?");
                    pr.binder(binder);
                }
            }
            pr.cont(&b.cont);
        }
        pr.push(")");
    }

    fn print_type(ty: &MixedType, pr: &mut Printer) {
        pr.mixed_type(ty);
    }

    fn ends_open(&self) -> bool {
        false
    }
}

impl PrintAction for ClassicalAction {
    fn print_action(&self, pr: &mut Printer) {
        match self {
            ClassicalAction::Send { subject, payload, cont } => {
                pr.name(subject);
                pr.push("!");
                pr.value(payload);
                pr.cont(cont);
            }
            ClassicalAction::Receive { q, subject, binder, cont } => {
                pr.name(subject);
                pr.push(match q {
                    Qualifier::Lin => "?",
                    Qualifier::Un => "*?",
                });
                pr.binder(binder);
                pr.cont(cont);
            }
            ClassicalAction::Select { subject, label, cont } => {
                pr.name(subject);
                pr.push(" select ");
                pr.label(label);
                pr.cont(cont);
            }
            ClassicalAction::Case { subject, arms } => {
                pr.push("case ");
                pr.name(subject);
                pr.push(" of {");
                pr.indent += 1;
                for (i, (l, p)) in arms.iter().enumerate() {
                    if i > 0 {
                        pr.push(",");
                    }
                    if pr.dialect == Dialect::Sepi {
                        pr.newline();
                    } else if i > 0 {
                        pr.push(" ");
                    }
                    pr.label(l);
                    pr.push(" -> ");
                    pr.indent += 1;
                    pr.par(p);
                    pr.indent -= 1;
                }
                pr.indent -= 1;
                if pr.dialect == Dialect::Sepi {
                    pr.newline();
                }
                pr.push("}");
            }
        }
    }

    fn print_type(ty: &ClassicalType, pr: &mut Printer) {
        pr.classical_type(ty);
    }

    fn ends_open(&self) -> bool {
        match self {
            ClassicalAction::Send { cont, .. }
            | ClassicalAction::Receive { cont, .. }
            | ClassicalAction::Select { cont, .. } => ends_open(cont),
            ClassicalAction::Case { .. } => false,
        }
    }
}

pub fn print_process<A: PrintAction>(p: &Process<A>, dialect: Dialect) -> String {
    let mut pr = Printer::new(dialect);
    pr.process(p);
    pr.finish()
}

/// SePi-style text for a classical process.
pub fn emit_sepi(p: &ClassicalProcess) -> String {
    print_process(p, Dialect::Sepi)
}

pub fn print_mixed(p: &MixedProcess) -> String {
    print_process(p, Dialect::Native)
}

pub fn print_classical(p: &ClassicalProcess) -> String {
    print_process(p, Dialect::Native)
}

impl fmt::Display for MixedType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut pr = Printer::new(Dialect::Native);
        pr.mixed_type(self);
        f.write_str(&pr.finish())
    }
}

impl fmt::Display for ClassicalType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut pr = Printer::new(Dialect::Native);
        pr.classical_type(self);
        f.write_str(&pr.finish())
    }
}

impl<A: PrintAction> fmt::Display for Process<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_process(self, Dialect::Native))
    }
}

pub fn sepi_type(t: &ClassicalType) -> String {
    let mut pr = Printer::new(Dialect::Sepi);
    pr.classical_type(t);
    pr.finish()
}
