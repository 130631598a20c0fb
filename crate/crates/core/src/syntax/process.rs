use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::hash::Hash;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::name::{Name, NameKind, Value};

/// The prefixes of one calculus. Parallel composition, restriction,
/// conditionals and inaction are shared by both calculi and live in
/// [`Process`]; everything that acts on a channel is an `Action`.
pub trait Action: Clone + Debug + PartialEq + Eq + PartialOrd + Ord + Hash + Serialize + DeserializeOwned {
    type Type: Clone + Debug + PartialEq + Eq + PartialOrd + Ord + Hash + Serialize + DeserializeOwned;

    fn subject(&self) -> &Name;

    /// Rebuild the action, threading names, binders and continuations
    /// through `m`.
    fn map_with<M: Mapper<Self>>(&self, m: &mut M) -> Self;

    fn visit_with<V: Visitor<Self>>(&self, v: &mut V);

    /// The subject of a bare selection `a select l.0`, the only thread
    /// shape a garbage block may contain.
    fn garbage_subject(&self) -> Option<&Name> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "")]
pub enum Process<A: Action> {
    Act { action: A },
    Par { left: Box<Process<A>>, right: Box<Process<A>> },
    New { x: Name, y: Name, ty: A::Type, body: Box<Process<A>> },
    If { cond: Value, then_branch: Box<Process<A>>, else_branch: Box<Process<A>> },
    Inact,
}

/// Rewrites names in a process. Binders are announced with `bind` before
/// the scope they govern is traversed and with `unbind` afterwards.
pub trait Mapper<A: Action>: Sized {
    fn name(&mut self, n: &Name) -> Name;

    fn value(&mut self, v: &Value) -> Value {
        match v {
            Value::Var { name } => Value::var(self.name(name)),
            other => other.clone(),
        }
    }

    fn bind(&mut self, binder: &Name) -> Name;

    fn unbind(&mut self, binder: &Name);

    fn ty(&mut self, t: &A::Type) -> A::Type {
        t.clone()
    }

    fn process(&mut self, p: &Process<A>) -> Process<A> {
        map_process(p, self)
    }
}

pub trait Visitor<A: Action>: Sized {
    fn name(&mut self, n: &Name);

    fn value(&mut self, v: &Value) {
        if let Value::Var { name } = v {
            self.name(name);
        }
    }

    fn bind(&mut self, binder: &Name);

    fn unbind(&mut self, binder: &Name);

    fn process(&mut self, p: &Process<A>) {
        visit_process(p, self)
    }
}

pub fn map_process<A: Action, M: Mapper<A>>(p: &Process<A>, m: &mut M) -> Process<A> {
    match p {
        Process::Act { action } => Process::Act { action: action.map_with(m) },
        Process::Par { left, right } => {
            let left = m.process(left);
            let right = m.process(right);
            Process::par(left, right)
        }
        Process::New { x, y, ty, body } => {
            let ty = m.ty(ty);
            let x2 = m.bind(x);
            let y2 = m.bind(y);
            let body = m.process(body);
            m.unbind(y);
            m.unbind(x);
            Process::new(x2, y2, ty, body)
        }
        Process::If { cond, then_branch, else_branch } => {
            let cond = m.value(cond);
            let then_branch = m.process(then_branch);
            let else_branch = m.process(else_branch);
            Process::cond(cond, then_branch, else_branch)
        }
        Process::Inact => Process::Inact,
    }
}

pub fn visit_process<A: Action, V: Visitor<A>>(p: &Process<A>, v: &mut V) {
    match p {
        Process::Act { action } => action.visit_with(v),
        Process::Par { left, right } => {
            v.process(left);
            v.process(right);
        }
        Process::New { x, y, body, .. } => {
            v.bind(x);
            v.bind(y);
            v.process(body);
            v.unbind(y);
            v.unbind(x);
        }
        Process::If { cond, then_branch, else_branch } => {
            v.value(cond);
            v.process(then_branch);
            v.process(else_branch);
        }
        Process::Inact => {}
    }
}

impl<A: Action> Process<A> {
    pub fn act(action: A) -> Self {
        Process::Act { action }
    }

    pub fn par(left: Self, right: Self) -> Self {
        Process::Par { left: Box::new(left), right: Box::new(right) }
    }

    /// Right-nested parallel composition; `0` for an empty list.
    pub fn par_all(items: impl IntoIterator<Item = Self>) -> Self {
        let mut items: Vec<Self> = items.into_iter().collect();
        let Some(mut acc) = items.pop() else {
            return Process::Inact;
        };
        while let Some(p) = items.pop() {
            acc = Process::par(p, acc);
        }
        acc
    }

    pub fn new(x: Name, y: Name, ty: A::Type, body: Self) -> Self {
        Process::New { x, y, ty, body: Box::new(body) }
    }

    pub fn cond(cond: Value, then_branch: Self, else_branch: Self) -> Self {
        Process::If { cond, then_branch: Box::new(then_branch), else_branch: Box::new(else_branch) }
    }

    pub fn is_inact(&self) -> bool {
        matches!(self, Process::Inact)
    }

    pub fn free_names(&self) -> BTreeSet<Name> {
        let mut fv = FreeNames::default();
        fv.process(self);
        fv.free
    }

    /// Every name occurring in the process, free or bound.
    pub fn all_names(&self) -> BTreeSet<Name> {
        let mut all = AllNames::default();
        all.process(self);
        all.names
    }

    /// Capture-avoiding `self[v/z]`.
    pub fn substitute(&self, v: &Value, z: &Name) -> Self {
        let mut sigma = BTreeMap::new();
        sigma.insert(z.clone(), v.clone());
        self.substitute_all(&sigma)
    }

    /// Simultaneous capture-avoiding substitution. Binders that would
    /// capture a name in the range are refreshed deterministically.
    pub fn substitute_all(&self, sigma: &BTreeMap<Name, Value>) -> Self {
        if sigma.is_empty() {
            return self.clone();
        }
        let mut avoid = self.all_names();
        for (k, v) in sigma {
            avoid.insert(k.clone());
            if let Some(n) = v.as_name() {
                avoid.insert(n.clone());
            }
        }
        let range: BTreeSet<Name> = sigma.values().filter_map(|v| v.as_name().cloned()).collect();
        let mut s = Substituter { sigma: sigma.clone(), range, avoid, scopes: Vec::new() };
        s.process(self)
    }

    /// Renames every binder to `%c0, %c1, ...` in pre-order. Two processes
    /// are alpha-equivalent iff their renumbered forms are equal.
    pub fn renumber(&self) -> Self {
        let avoid = self.free_names();
        let mut r = Renumber { next: 0, scopes: Vec::new(), avoid };
        r.process(self)
    }

    /// Applies a renaming to free occurrences.
    pub fn rename(&self, map: &BTreeMap<Name, Name>) -> Self {
        let sigma = map.iter().map(|(k, v)| (k.clone(), Value::var(v.clone()))).collect();
        self.substitute_all(&sigma)
    }

    pub fn size(&self) -> usize {
        let mut c = Counter(0);
        c.process(self);
        c.0
    }
}

/// A name not in `avoid`, of the given kind, with the smallest counter.
pub fn fresh_name(kind: NameKind, avoid: &BTreeSet<Name>) -> Name {
    let mut counter = 0;
    loop {
        let n = Name::generated(kind, counter);
        if !avoid.contains(&n) {
            return n;
        }
        counter += 1;
    }
}

#[derive(Default)]
struct FreeNames {
    bound: Vec<Name>,
    free: BTreeSet<Name>,
}

impl<A: Action> Visitor<A> for FreeNames {
    fn name(&mut self, n: &Name) {
        if !self.bound.contains(n) {
            self.free.insert(n.clone());
        }
    }
    fn bind(&mut self, binder: &Name) {
        self.bound.push(binder.clone());
    }
    fn unbind(&mut self, _binder: &Name) {
        self.bound.pop();
    }
}

#[derive(Default)]
struct AllNames {
    names: BTreeSet<Name>,
}

impl<A: Action> Visitor<A> for AllNames {
    fn name(&mut self, n: &Name) {
        self.names.insert(n.clone());
    }
    fn bind(&mut self, binder: &Name) {
        self.names.insert(binder.clone());
    }
    fn unbind(&mut self, _binder: &Name) {}
}

struct Counter(usize);

impl<A: Action> Visitor<A> for Counter {
    fn name(&mut self, _n: &Name) {}
    fn bind(&mut self, _binder: &Name) {}
    fn unbind(&mut self, _binder: &Name) {}
    fn process(&mut self, p: &Process<A>) {
        self.0 += 1;
        visit_process(p, self)
    }
}

enum Scope {
    /// The binder shadows the substitution for its name.
    Shadow(Name),
    /// The binder was refreshed to avoid capturing a name in the range.
    Rename(Name, Name),
}

struct Substituter {
    sigma: BTreeMap<Name, Value>,
    range: BTreeSet<Name>,
    avoid: BTreeSet<Name>,
    scopes: Vec<Scope>,
}

impl Substituter {
    fn lookup(&self, n: &Name) -> Option<Value> {
        for scope in self.scopes.iter().rev() {
            match scope {
                Scope::Shadow(b) if b == n => return None,
                Scope::Rename(b, fresh) if b == n => return Some(Value::var(fresh.clone())),
                _ => {}
            }
        }
        self.sigma.get(n).cloned()
    }
}

impl<A: Action> Mapper<A> for Substituter {
    fn name(&mut self, n: &Name) -> Name {
        match self.lookup(n) {
            Some(Value::Var { name }) => name,
            // a literal substituted into a subject position is ill-typed; keep it
            _ => n.clone(),
        }
    }

    fn value(&mut self, v: &Value) -> Value {
        match v {
            Value::Var { name } => self.lookup(name).unwrap_or_else(|| v.clone()),
            other => other.clone(),
        }
    }

    fn bind(&mut self, binder: &Name) -> Name {
        if self.range.contains(binder) {
            let kind = match binder {
                Name::Generated { kind, .. } if *kind != NameKind::Canon => *kind,
                _ => NameKind::Refresh,
            };
            let fresh = fresh_name(kind, &self.avoid);
            self.avoid.insert(fresh.clone());
            self.scopes.push(Scope::Rename(binder.clone(), fresh.clone()));
            fresh
        } else {
            self.scopes.push(Scope::Shadow(binder.clone()));
            binder.clone()
        }
    }

    fn unbind(&mut self, _binder: &Name) {
        self.scopes.pop();
    }
}

struct Renumber {
    next: u32,
    scopes: Vec<(Name, Name)>,
    avoid: BTreeSet<Name>,
}

impl<A: Action> Mapper<A> for Renumber {
    fn name(&mut self, n: &Name) -> Name {
        self.scopes.iter().rev().find(|(old, _)| old == n).map(|(_, new)| new.clone()).unwrap_or_else(|| n.clone())
    }

    fn bind(&mut self, binder: &Name) -> Name {
        let mut new = Name::generated(NameKind::Canon, self.next);
        self.next += 1;
        while self.avoid.contains(&new) {
            new = Name::generated(NameKind::Canon, self.next);
            self.next += 1;
        }
        self.scopes.push((binder.clone(), new.clone()));
        new
    }

    fn unbind(&mut self, _binder: &Name) {
        self.scopes.pop();
    }
}

/// A mapper that applies a function to every continuation and leaves names
/// untouched.
pub struct MapChildren<F>(pub F);

impl<A: Action, F: FnMut(&Process<A>) -> Process<A>> Mapper<A> for MapChildren<F> {
    fn name(&mut self, n: &Name) -> Name {
        n.clone()
    }
    fn bind(&mut self, binder: &Name) -> Name {
        binder.clone()
    }
    fn unbind(&mut self, _binder: &Name) {}
    fn process(&mut self, p: &Process<A>) -> Process<A> {
        (self.0)(p)
    }
}
