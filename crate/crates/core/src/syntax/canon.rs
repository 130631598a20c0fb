//! Deciding `≡` and `≍` by canonical forms.
//!
//! A process is flattened into a prefix of restrictions and a multiset of
//! threads (prefixed actions and conditionals), with every continuation
//! canonicalized first. Unused restrictions and `0` threads disappear.
//! Restrictions are ordered by a signature that hides the identity of the
//! other restricted names; ties are broken by trying every ordering of the
//! tied group and keeping the least resulting term. Threads are then
//! sorted and all binders renumbered.

use std::collections::{BTreeMap, BTreeSet};

use super::name::{Name, NameKind};
use super::process::{fresh_name, Action, MapChildren, Process};

/// Tied restrictions are permuted exhaustively while the number of
/// orderings stays under this bound; beyond it the first ordering wins.
pub const PERMUTATION_CAP: usize = 720;

/// A restriction hoisted to the top of a process.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction<T> {
    pub x: Name,
    pub y: Name,
    pub ty: T,
}

/// `(new x1 y1)...(new xn yn)(T1 | ... | Tm)` with every `Ti` a prefixed
/// action or a conditional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flat<A: Action> {
    pub restrictions: Vec<Restriction<A::Type>>,
    pub threads: Vec<Process<A>>,
}

impl<A: Action> Flat<A> {
    pub fn rebuild(&self) -> Process<A> {
        let body = Process::par_all(self.threads.iter().cloned());
        self.restrictions.iter().rev().fold(body, |acc, r| Process::new(r.x.clone(), r.y.clone(), r.ty.clone(), acc))
    }
}

/// Hoists restrictions through parallel composition, keeping binder names
/// unless they clash with a name already in use, in which case a fresh
/// name of the same kind is drawn.
pub fn flatten<A: Action>(p: &Process<A>) -> Flat<A> {
    let mut used = p.free_names();
    let mut flat = Flat { restrictions: Vec::new(), threads: Vec::new() };
    hoist(p, &BTreeMap::new(), &mut used, &mut |n, used| refresh_like(n, used), &mut flat);
    flat
}

fn refresh_like(n: &Name, used: &BTreeSet<Name>) -> Name {
    if !used.contains(n) {
        return n.clone();
    }
    let kind = match n {
        Name::Generated { kind, .. } if *kind != NameKind::Canon => *kind,
        _ => NameKind::Refresh,
    };
    fresh_name(kind, used)
}

fn hoist<A: Action>(
    p: &Process<A>,
    env: &BTreeMap<Name, Name>,
    used: &mut BTreeSet<Name>,
    pick: &mut dyn FnMut(&Name, &BTreeSet<Name>) -> Name,
    flat: &mut Flat<A>,
) {
    match p {
        Process::Par { left, right } => {
            hoist(left, env, used, pick, flat);
            hoist(right, env, used, pick, flat);
        }
        Process::New { x, y, ty, body } => {
            let x2 = pick(x, used);
            used.insert(x2.clone());
            let y2 = pick(y, used);
            used.insert(y2.clone());
            let mut inner = env.clone();
            inner.insert(x.clone(), x2.clone());
            inner.insert(y.clone(), y2.clone());
            flat.restrictions.push(Restriction { x: x2, y: y2, ty: ty.clone() });
            hoist(body, &inner, used, pick, flat);
        }
        Process::Inact => {}
        thread => {
            let renamed = if env.iter().all(|(k, v)| k == v) { thread.clone() } else { thread.rename(env) };
            flat.threads.push(renamed);
        }
    }
}

pub fn canonicalize<A: Action>(p: &Process<A>) -> Process<A> {
    canon(p, false)
}

/// Canonical form modulo `≍`: `≡` plus removal of garbage blocks
/// `(new a b)(a select l1.0 | ... | a select ln.0)` with `b` unused.
pub fn canonicalize_ext<A: Action>(p: &Process<A>) -> Process<A> {
    canon(p, true)
}

pub fn congruent<A: Action>(p: &Process<A>, q: &Process<A>) -> bool {
    canonicalize(p) == canonicalize(q)
}

pub fn ext_congruent<A: Action>(p: &Process<A>, q: &Process<A>) -> bool {
    canonicalize_ext(p) == canonicalize_ext(q)
}

fn canon<A: Action>(p: &Process<A>, garbage: bool) -> Process<A> {
    let avoid: BTreeSet<Name> = p.all_names();
    let mut next = 0u32;
    let mut pick = |_: &Name, used: &BTreeSet<Name>| loop {
        let n = Name::generated(NameKind::Slot, next);
        next += 1;
        if !used.contains(&n) && !avoid.contains(&n) {
            return n;
        }
    };
    let mut used = p.free_names();
    let mut flat = Flat { restrictions: Vec::new(), threads: Vec::new() };
    hoist(p, &BTreeMap::new(), &mut used, &mut pick, &mut flat);

    let threads: Vec<Process<A>> = flat.threads.iter().map(|t| canon_children(t, garbage)).collect();
    let mut items: Vec<(Process<A>, BTreeSet<Name>)> = threads
        .into_iter()
        .filter(|t| !t.is_inact())
        .map(|t| {
            let fv = t.free_names();
            (t, fv)
        })
        .collect();
    let mut restrictions = flat.restrictions;

    if garbage {
        while let Some(i) = restrictions.iter().position(|r| is_garbage_block(r, &items)) {
            let a = restrictions.remove(i).x;
            items.retain(|(_, fv)| !fv.contains(&a));
        }
    }
    restrictions.retain(|r| items.iter().any(|(_, fv)| fv.contains(&r.x) || fv.contains(&r.y)));

    arrange(restrictions, items)
}

fn canon_children<A: Action>(t: &Process<A>, garbage: bool) -> Process<A> {
    match t {
        Process::Act { action } => {
            Process::Act { action: action.map_with(&mut MapChildren(|c: &Process<A>| canon(c, garbage))) }
        }
        Process::If { cond, then_branch, else_branch } => {
            Process::cond(cond.clone(), canon(then_branch, garbage), canon(else_branch, garbage))
        }
        other => canon(other, garbage),
    }
}

fn is_garbage_block<A: Action>(r: &Restriction<A::Type>, items: &[(Process<A>, BTreeSet<Name>)]) -> bool {
    if items.iter().any(|(_, fv)| fv.contains(&r.y)) {
        return false;
    }
    let mut users = items.iter().filter(|(_, fv)| fv.contains(&r.x)).peekable();
    users.peek().is_some()
        && users.all(|(t, fv)| {
            fv.len() == 1 && matches!(t, Process::Act { action } if action.garbage_subject() == Some(&r.x))
        })
}

fn arrange<A: Action>(restrictions: Vec<Restriction<A::Type>>, items: Vec<(Process<A>, BTreeSet<Name>)>) -> Process<A> {
    let restricted: BTreeSet<Name> = restrictions.iter().flat_map(|r| [r.x.clone(), r.y.clone()]).collect();
    let signatures: Vec<_> = restrictions
        .iter()
        .map(|r| {
            let mut map = BTreeMap::new();
            for n in &restricted {
                map.insert(n.clone(), Name::generated(NameKind::Hole, 0));
            }
            map.insert(r.x.clone(), Name::generated(NameKind::Hole, 1));
            map.insert(r.y.clone(), Name::generated(NameKind::Hole, 2));
            let mut forms: Vec<Process<A>> = items
                .iter()
                .filter(|(_, fv)| fv.contains(&r.x) || fv.contains(&r.y))
                .map(|(t, _)| t.rename(&map).renumber())
                .collect();
            forms.sort();
            (r.ty.clone(), forms)
        })
        .collect();

    let mut order: Vec<usize> = (0..restrictions.len()).collect();
    order.sort_by(|&i, &j| signatures[i].cmp(&signatures[j]));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some(g) if signatures[g[0]] == signatures[i] => g.push(i),
            _ => groups.push(vec![i]),
        }
    }
    let orderings = groups.iter().try_fold(1usize, |acc, g| {
        let f = (1..=g.len()).try_fold(1usize, |a, k| a.checked_mul(k))?;
        acc.checked_mul(f).filter(|&n| n <= PERMUTATION_CAP)
    });

    // Slots for the restricted names, skipping any slot that is free in
    // the threads so the renaming cannot capture.
    let free: BTreeSet<Name> =
        items.iter().flat_map(|(_, fv)| fv.iter()).filter(|n| !restricted.contains(*n)).cloned().collect();
    let slots: Vec<Name> = (0u32..)
        .map(|k| Name::generated(NameKind::Slot, k))
        .filter(|n| !free.contains(n))
        .take(2 * restrictions.len())
        .collect();

    let build = |order: &[usize]| -> Process<A> {
        let mut map = BTreeMap::new();
        for (pos, &i) in order.iter().enumerate() {
            map.insert(restrictions[i].x.clone(), slots[2 * pos].clone());
            map.insert(restrictions[i].y.clone(), slots[2 * pos + 1].clone());
        }
        let mut threads: Vec<Process<A>> = items.iter().map(|(t, _)| t.rename(&map).renumber()).collect();
        threads.sort();
        let flat = Flat {
            restrictions: order
                .iter()
                .map(|&i| Restriction {
                    x: map[&restrictions[i].x].clone(),
                    y: map[&restrictions[i].y].clone(),
                    ty: restrictions[i].ty.clone(),
                })
                .collect(),
            threads,
        };
        flat.rebuild().renumber()
    };

    match orderings {
        Some(n) if n > 1 => {
            let mut best: Option<Process<A>> = None;
            for_each_ordering(&groups, &mut Vec::new(), &mut |o| {
                let candidate = build(o);
                if best.as_ref().is_none_or(|b| candidate < *b) {
                    best = Some(candidate);
                }
            });
            best.expect("at least one ordering")
        }
        _ => build(&order),
    }
}

fn for_each_ordering(groups: &[Vec<usize>], prefix: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    let Some((first, rest)) = groups.split_first() else {
        f(prefix);
        return;
    };
    let mut g = first.clone();
    permute(&mut g, 0, &mut |perm| {
        let len = prefix.len();
        prefix.extend_from_slice(perm);
        for_each_ordering(rest, prefix, f);
        prefix.truncate(len);
    });
}

fn permute(items: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, f);
        items.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_classical;

    #[test]
    fn nested_restriction_does_not_capture_outer_names() {
        let p = parse_classical("(new x y: *!unit) un x?q. (new a b: *!unit) y!a").unwrap();
        let c = canonicalize(&p);
        let q = parse_classical("(new x y: *!unit) un x?q. (new a b: *!unit) b!a").unwrap();
        assert_ne!(c, canonicalize(&q));
        assert!(congruent(&c, &p));
    }

    #[test]
    fn unused_restrictions_and_inaction_vanish() {
        let p = parse_classical("(new x y: lin!int.end) 0 | 0").unwrap();
        assert_eq!(canonicalize(&p), Process::Inact);
    }

    #[test]
    fn garbage_selections_are_collected_only_when_extended() {
        let p = parse_classical("(new s t: *+{l}) s select l | w!1").unwrap();
        let q = parse_classical("w!1").unwrap();
        assert!(!congruent(&p, &q));
        assert!(ext_congruent(&p, &q));
    }

    #[test]
    fn parallel_order_is_irrelevant() {
        let p = parse_classical("w!1 | (new x y: lin!int.end) x!2 | lin y?z").unwrap();
        let q = parse_classical("(new a b: lin!int.end) (lin b?k | a!2) | w!1").unwrap();
        assert!(congruent(&p, &q));
    }
}
