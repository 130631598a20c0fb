//! Equirecursive session types for both calculi.
//!
//! Both type languages share the same recursive skeleton (`rec a.T`, `a`,
//! and constructor nodes), so the coinductive machinery is written once
//! against [`SessionType`]. Every relation works on closed, contractive
//! types and unfolds `rec` on demand; termination comes from the visited
//! set, which is bounded by the product of the reachable unfoldings.

mod classical;
mod mixed;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Debug;
use std::hash::Hash;

pub use classical::ClassicalType;
pub use mixed::{MixedType, MixedTypeBranch};

pub type TypeVar = String;

/// Upper bound on consecutive unfoldings. Contractive types need at most
/// one per nested `rec` binder.
const UNFOLD_LIMIT: usize = 256;

pub enum TypeView<'a, T: SessionType> {
    Rec(&'a str, &'a T),
    Var(&'a str),
    Node(T::Head, Vec<&'a T>),
}

pub trait SessionType: Clone + Debug + PartialEq + Eq + PartialOrd + Ord + Hash {
    /// A constructor with its children removed.
    type Head: Clone + Debug + PartialEq + Eq + PartialOrd + Ord + Hash;

    fn view(&self) -> TypeView<'_, Self>;
    fn mk_rec(var: TypeVar, body: Self) -> Self;
    fn mk_var(var: TypeVar) -> Self;
    fn rebuild(head: &Self::Head, children: Vec<Self>) -> Self;
    fn head_is_un(head: &Self::Head) -> bool;
    /// Session heads are choices, communications and `end`.
    fn head_is_session(head: &Self::Head) -> bool;
}

/// `t[with/var]`. `with` must be closed, so no capture can occur.
pub fn subst<T: SessionType>(t: &T, var: &str, with: &T) -> T {
    match t.view() {
        TypeView::Rec(a, _) if a == var => t.clone(),
        TypeView::Rec(a, body) => T::mk_rec(a.to_string(), subst(body, var, with)),
        TypeView::Var(a) if a == var => with.clone(),
        TypeView::Var(_) => t.clone(),
        TypeView::Node(head, children) => {
            T::rebuild(&head, children.into_iter().map(|c| subst(c, var, with)).collect())
        }
    }
}

/// Unfolds leading `rec` binders until a constructor (or a stuck
/// non-contractive term) is exposed.
pub fn unfold<T: SessionType>(t: &T) -> T {
    let mut cur = t.clone();
    for _ in 0..UNFOLD_LIMIT {
        let next = match cur.view() {
            TypeView::Rec(a, body) => subst(body, a, &cur),
            _ => return cur,
        };
        cur = next;
    }
    cur
}

pub fn free_vars<T: SessionType>(t: &T) -> BTreeSet<TypeVar> {
    fn go<T: SessionType>(t: &T, bound: &mut Vec<String>, out: &mut BTreeSet<TypeVar>) {
        match t.view() {
            TypeView::Rec(a, body) => {
                bound.push(a.to_string());
                go(body, bound, out);
                bound.pop();
            }
            TypeView::Var(a) => {
                if !bound.iter().any(|b| b == a) {
                    out.insert(a.to_string());
                }
            }
            TypeView::Node(_, children) => {
                for c in children {
                    go(c, bound, out);
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

pub fn is_closed<T: SessionType>(t: &T) -> bool {
    free_vars(t).is_empty()
}

/// Every `rec` body guards its variable under a constructor.
pub fn is_contractive<T: SessionType>(t: &T) -> bool {
    match t.view() {
        TypeView::Rec(..) => {
            let mut chain = Vec::new();
            let mut cur = t;
            while let TypeView::Rec(a, body) = cur.view() {
                chain.push(a);
                cur = body;
            }
            match cur.view() {
                TypeView::Var(b) => !chain.contains(&b),
                _ => is_contractive(cur),
            }
        }
        TypeView::Var(_) => true,
        TypeView::Node(_, children) => children.into_iter().all(is_contractive),
    }
}

pub fn is_un<T: SessionType>(t: &T) -> bool {
    match unfold(t).view() {
        TypeView::Node(head, _) => T::head_is_un(&head),
        _ => false,
    }
}

pub fn is_session<T: SessionType>(t: &T) -> bool {
    match unfold(t).view() {
        TypeView::Node(head, _) => T::head_is_session(&head),
        _ => false,
    }
}

/// The head constructor and children of a closed type, after unfolding.
pub fn expose<T: SessionType>(t: &T) -> Option<(T::Head, Vec<T>)> {
    let u = unfold(t);
    match u.view() {
        TypeView::Node(head, children) => Some((head, children.into_iter().cloned().collect())),
        _ => None,
    }
}

/// Equirecursive equivalence `≈`, decided with a visited-pair set.
pub fn type_equiv<T: SessionType>(s: &T, t: &T) -> bool {
    Equiv { visited: HashSet::new() }.check(s, t)
}

struct Equiv<T> {
    visited: HashSet<(T, T)>,
}

impl<T: SessionType> Equiv<T> {
    fn check(&mut self, s: &T, t: &T) -> bool {
        if s == t {
            return true;
        }
        if !self.visited.insert((s.clone(), t.clone())) {
            return true;
        }
        match (expose(s), expose(t)) {
            (Some((h1, c1)), Some((h2, c2))) => {
                h1 == h2 && c1.len() == c2.len() && c1.iter().zip(&c2).all(|(a, b)| self.check(a, b))
            }
            _ => false,
        }
    }
}

/// A canonical representative of the `≈`-class of a closed contractive
/// type: the unfolding graph is minimised by partition refinement and read
/// back with `rec` binders at back edges, named by binder depth.
/// Non-closed or non-contractive inputs are returned unchanged.
pub fn normalize<T: SessionType>(t: &T) -> T {
    if !is_closed(t) || !is_contractive(t) {
        return t.clone();
    }
    let root = unfold(t);
    let mut states: Vec<(T::Head, Vec<usize>)> = Vec::new();
    let mut index: HashMap<T, usize> = HashMap::new();
    let mut order: Vec<T> = Vec::new();
    index.insert(root.clone(), 0);
    order.push(root);
    // breadth-first discovery keeps numbering deterministic
    let mut next = 0;
    while next < order.len() {
        let cur = order[next].clone();
        next += 1;
        let (head, children) = match cur.view() {
            TypeView::Node(h, cs) => (h, cs.into_iter().cloned().collect::<Vec<_>>()),
            _ => return t.clone(),
        };
        let mut ids = Vec::with_capacity(children.len());
        for c in children {
            let c = unfold(&c);
            let cid = match index.get(&c) {
                Some(&cid) => cid,
                None => {
                    let cid = order.len();
                    index.insert(c.clone(), cid);
                    order.push(c);
                    cid
                }
            };
            ids.push(cid);
        }
        states.push((head, ids));
    }

    // partition refinement
    let mut class: Vec<usize> = {
        let mut ids: HashMap<&T::Head, usize> = HashMap::new();
        states
            .iter()
            .map(|(h, _)| {
                let n = ids.len();
                *ids.entry(h).or_insert(n)
            })
            .collect()
    };
    loop {
        let mut ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        let next: Vec<usize> = states
            .iter()
            .enumerate()
            .map(|(i, (_, cs))| {
                let sig = (class[i], cs.iter().map(|&c| class[c]).collect::<Vec<_>>());
                let n = ids.len();
                *ids.entry(sig).or_insert(n)
            })
            .collect();
        let before = class.iter().collect::<BTreeSet<_>>().len();
        let after = next.iter().collect::<BTreeSet<_>>().len();
        class = next;
        if before == after {
            break;
        }
    }

    let mut repr: HashMap<usize, usize> = HashMap::new();
    for (i, &c) in class.iter().enumerate() {
        repr.entry(c).or_insert(i);
    }
    let quotient = |c: usize| -> (T::Head, Vec<usize>) {
        let (h, cs) = &states[repr[&c]];
        (h.clone(), cs.iter().map(|&s| class[s]).collect())
    };

    fn emit<T: SessionType>(
        c: usize,
        stack: &mut Vec<(usize, bool)>,
        quotient: &dyn Fn(usize) -> (T::Head, Vec<usize>),
    ) -> T {
        if let Some(pos) = stack.iter().position(|(s, _)| *s == c) {
            stack[pos].1 = true;
            return T::mk_var(format!("%a{pos}"));
        }
        let depth = stack.len();
        stack.push((c, false));
        let (head, children) = quotient(c);
        let children = children.into_iter().map(|k| emit(k, stack, quotient)).collect();
        let node = T::rebuild(&head, children);
        let (_, recursive) = stack.pop().expect("pushed above");
        if recursive {
            T::mk_rec(format!("%a{depth}"), node)
        } else {
            node
        }
    }

    emit(class[0], &mut Vec::new(), &quotient)
}

/// Number of constructor nodes, for generators and size bounds.
pub fn type_size<T: SessionType>(t: &T) -> usize {
    match t.view() {
        TypeView::Rec(_, body) => 1 + type_size(body),
        TypeView::Var(_) => 1,
        TypeView::Node(_, children) => 1 + children.into_iter().map(type_size).sum::<usize>(),
    }
}
