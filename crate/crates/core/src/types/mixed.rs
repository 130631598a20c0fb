use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{subst, SessionType, TypeVar, TypeView};
use crate::syntax::{Label, Polarity, Qualifier, View};
use crate::TypeError;

/// Mixed session types. Choice branches are kept sorted by
/// `(label, polarity)`; build them with [`MixedType::choice`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MixedType {
    Choice { q: Qualifier, view: View, branches: Vec<MixedTypeBranch> },
    End,
    Unit,
    Bool,
    Int,
    Rec { var: TypeVar, body: Box<MixedType> },
    Var { var: TypeVar },
}

/// `l⋆S.T`
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MixedTypeBranch {
    pub label: Label,
    pub polarity: Polarity,
    pub payload: MixedType,
    pub cont: MixedType,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MixedHead {
    Choice { q: Qualifier, view: View, keys: Vec<(Label, Polarity)> },
    End,
    Unit,
    Bool,
    Int,
}

impl MixedTypeBranch {
    pub fn new(label: Label, polarity: Polarity, payload: MixedType, cont: MixedType) -> Self {
        MixedTypeBranch { label, polarity, payload, cont }
    }

    pub fn key(&self) -> (Label, Polarity) {
        (self.label.clone(), self.polarity)
    }
}

impl MixedType {
    pub fn choice(q: Qualifier, view: View, mut branches: Vec<MixedTypeBranch>) -> MixedType {
        branches.sort_by_key(MixedTypeBranch::key);
        MixedType::Choice { q, view, branches }
    }

    pub fn rec(var: impl Into<TypeVar>, body: MixedType) -> MixedType {
        MixedType::Rec { var: var.into(), body: Box::new(body) }
    }

    pub fn var(var: impl Into<TypeVar>) -> MixedType {
        MixedType::Var { var: var.into() }
    }

    /// The choice view of a closed type after unfolding, if it is one.
    pub fn as_choice(&self) -> Option<(Qualifier, View, Vec<MixedTypeBranch>)> {
        match super::unfold(self) {
            MixedType::Choice { q, view, branches } => Some((q, view, branches)),
            _ => None,
        }
    }

    /// Distinct label-polarity pairs in every choice, contractive, closed.
    pub fn well_formed(&self) -> Result<(), TypeError> {
        fn pairs(t: &MixedType) -> Result<(), TypeError> {
            match t {
                MixedType::Choice { branches, .. } => {
                    for w in branches.windows(2) {
                        if w[0].key() == w[1].key() {
                            return Err(TypeError::DuplicateBranch {
                                label: w[0].label.clone(),
                                polarity: w[0].polarity,
                            });
                        }
                    }
                    for b in branches {
                        pairs(&b.payload)?;
                        pairs(&b.cont)?;
                    }
                    Ok(())
                }
                MixedType::Rec { body, .. } => pairs(body),
                _ => Ok(()),
            }
        }
        pairs(self)?;
        if !super::is_contractive(self) {
            return Err(TypeError::NotContractive { ty: self.to_string() });
        }
        if let Some(v) = super::free_vars(self).into_iter().next() {
            return Err(TypeError::FreeTypeVariable { var: v });
        }
        Ok(())
    }

    /// Coinductive subtyping `≤`.
    pub fn subtype(&self, other: &MixedType) -> bool {
        Subtyping { visited: HashSet::new() }.check(self, other)
    }

    /// Coinductive duality `⊥`.
    pub fn are_dual(&self, other: &MixedType) -> bool {
        Duality { visited: HashSet::new() }.check(self, other)
    }

    /// The dual type, computed structurally. Payloads are closed over the
    /// enclosing `rec` binders so recursion variables under a payload keep
    /// referring to the original type.
    pub fn dual_of(&self) -> Result<MixedType, TypeError> {
        if !super::is_session(self) {
            return Err(TypeError::NotSessionType { ty: self.to_string() });
        }
        Ok(dualize(self, &mut Vec::new()))
    }
}

fn close(t: &MixedType, env: &[(TypeVar, MixedType)]) -> MixedType {
    env.iter().rev().fold(t.clone(), |acc, (a, closed)| subst(&acc, a, closed))
}

fn dualize(t: &MixedType, env: &mut Vec<(TypeVar, MixedType)>) -> MixedType {
    match t {
        MixedType::Choice { q, view, branches } => MixedType::choice(
            *q,
            view.dual(),
            branches
                .iter()
                .map(|b| {
                    MixedTypeBranch::new(
                        b.label.clone(),
                        b.polarity.dual(),
                        close(&b.payload, env),
                        dualize(&b.cont, env),
                    )
                })
                .collect(),
        ),
        MixedType::Rec { var, body } => {
            let closed = close(t, env);
            env.push((var.clone(), closed));
            let body = dualize(body, env);
            env.pop();
            MixedType::rec(var.clone(), body)
        }
        other => other.clone(),
    }
}

struct Subtyping {
    visited: HashSet<(MixedType, MixedType)>,
}

impl Subtyping {
    fn check(&mut self, s: &MixedType, t: &MixedType) -> bool {
        if !self.visited.insert((s.clone(), t.clone())) {
            return true;
        }
        let (s, t) = (super::unfold(s), super::unfold(t));
        match (&s, &t) {
            (MixedType::End, MixedType::End)
            | (MixedType::Unit, MixedType::Unit)
            | (MixedType::Bool, MixedType::Bool)
            | (MixedType::Int, MixedType::Int) => true,
            (
                MixedType::Choice { q: q1, view: v1, branches: b1 },
                MixedType::Choice { q: q2, view: v2, branches: b2 },
            ) if q1 == q2 && v1 == v2 => {
                // ⊕ may forget branches, & may gain them
                let (narrow, wide) = match v1 {
                    View::Internal => (b2, b1),
                    View::External => (b1, b2),
                };
                let wide: BTreeMap<_, _> = wide.iter().map(|b| (b.key(), b)).collect();
                narrow.iter().all(|n| match wide.get(&n.key()) {
                    None => false,
                    Some(w) => {
                        let (sub, sup) = match v1 {
                            View::Internal => (*w, n),
                            View::External => (n, *w),
                        };
                        self.branch(sub, sup)
                    }
                })
            }
            _ => false,
        }
    }

    fn branch(&mut self, sub: &MixedTypeBranch, sup: &MixedTypeBranch) -> bool {
        let payload = match sub.polarity {
            Polarity::Out => self.check(&sup.payload, &sub.payload),
            Polarity::In => self.check(&sub.payload, &sup.payload),
        };
        payload && self.check(&sub.cont, &sup.cont)
    }
}

struct Duality {
    visited: HashSet<(MixedType, MixedType)>,
}

impl Duality {
    fn check(&mut self, s: &MixedType, t: &MixedType) -> bool {
        if !self.visited.insert((s.clone(), t.clone())) {
            return true;
        }
        match (super::unfold(s), super::unfold(t)) {
            (MixedType::End, MixedType::End) => true,
            (
                MixedType::Choice { q: q1, view: v1, branches: b1 },
                MixedType::Choice { q: q2, view: v2, branches: b2 },
            ) => {
                if q1 != q2 || v1.dual() != v2 || b1.len() != b2.len() {
                    return false;
                }
                let other: BTreeMap<_, _> = b2.iter().map(|b| (b.key(), b)).collect();
                b1.iter().all(|b| match other.get(&(b.label.clone(), b.polarity.dual())) {
                    None => false,
                    Some(d) => super::type_equiv(&b.payload, &d.payload) && self.check(&b.cont, &d.cont),
                })
            }
            _ => false,
        }
    }
}

impl SessionType for MixedType {
    type Head = MixedHead;

    fn view(&self) -> TypeView<'_, Self> {
        match self {
            MixedType::Rec { var, body } => TypeView::Rec(var, body),
            MixedType::Var { var } => TypeView::Var(var),
            MixedType::Choice { q, view, branches } => TypeView::Node(
                MixedHead::Choice { q: *q, view: *view, keys: branches.iter().map(|b| b.key()).collect() },
                branches.iter().flat_map(|b| [&b.payload, &b.cont]).collect(),
            ),
            MixedType::End => TypeView::Node(MixedHead::End, Vec::new()),
            MixedType::Unit => TypeView::Node(MixedHead::Unit, Vec::new()),
            MixedType::Bool => TypeView::Node(MixedHead::Bool, Vec::new()),
            MixedType::Int => TypeView::Node(MixedHead::Int, Vec::new()),
        }
    }

    fn mk_rec(var: TypeVar, body: Self) -> Self {
        MixedType::rec(var, body)
    }

    fn mk_var(var: TypeVar) -> Self {
        MixedType::var(var)
    }

    fn rebuild(head: &MixedHead, children: Vec<Self>) -> Self {
        match head {
            MixedHead::Choice { q, view, keys } => {
                let mut it = children.into_iter();
                let branches = keys
                    .iter()
                    .map(|(l, p)| {
                        let payload = it.next().expect("payload child");
                        let cont = it.next().expect("continuation child");
                        MixedTypeBranch::new(l.clone(), *p, payload, cont)
                    })
                    .collect();
                MixedType::Choice { q: *q, view: *view, branches }
            }
            MixedHead::End => MixedType::End,
            MixedHead::Unit => MixedType::Unit,
            MixedHead::Bool => MixedType::Bool,
            MixedHead::Int => MixedType::Int,
        }
    }

    fn head_is_un(head: &MixedHead) -> bool {
        match head {
            MixedHead::Choice { q, .. } => *q == Qualifier::Un,
            _ => true,
        }
    }

    fn head_is_session(head: &MixedHead) -> bool {
        matches!(head, MixedHead::Choice { .. } | MixedHead::End)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{is_contractive, is_un, normalize, type_equiv, unfold};

    fn lin(view: View, bs: Vec<MixedTypeBranch>) -> MixedType {
        MixedType::choice(Qualifier::Lin, view, bs)
    }

    fn br(l: &str, p: Polarity, s: MixedType, t: MixedType) -> MixedTypeBranch {
        MixedTypeBranch::new(Label::new(l), p, s, t)
    }

    fn un_loop() -> MixedType {
        // rec a. un&{m? unit.a}
        MixedType::rec(
            "a",
            MixedType::choice(
                Qualifier::Un,
                View::External,
                vec![br("m", Polarity::In, MixedType::Unit, MixedType::var("a"))],
            ),
        )
    }

    #[test]
    fn un_predicate() {
        assert!(is_un(&MixedType::End));
        assert!(!is_un(&lin(View::Internal, vec![br("m", Polarity::Out, MixedType::Unit, MixedType::End)])));
        assert!(is_un(&un_loop()));
    }

    #[test]
    fn contractivity() {
        assert!(!is_contractive(&MixedType::rec("a", MixedType::var("a"))));
        assert!(!is_contractive(&MixedType::rec("a", MixedType::rec("b", MixedType::var("a")))));
        assert!(is_contractive(&MixedType::End));
        assert!(is_contractive(&un_loop()));
    }

    #[test]
    fn equivalence_up_to_one_unfolding() {
        let t = un_loop();
        let once =
            MixedType::choice(Qualifier::Un, View::External, vec![br("m", Polarity::In, MixedType::Unit, t.clone())]);
        assert!(type_equiv(&t, &once));
        assert_eq!(unfold(&t), once);
        assert!(type_equiv(&MixedType::End, &MixedType::End));
        let a = lin(View::Internal, vec![br("m", Polarity::Out, MixedType::Unit, MixedType::End)]);
        let b = lin(View::External, vec![br("m", Polarity::Out, MixedType::Unit, MixedType::End)]);
        assert!(!type_equiv(&a, &b));
        assert_eq!(normalize(&t), normalize(&once));
    }

    #[test]
    fn width_subtyping() {
        let wide = lin(
            View::Internal,
            vec![
                br("m", Polarity::Out, MixedType::Unit, MixedType::End),
                br("n", Polarity::In, MixedType::Bool, MixedType::End),
            ],
        );
        let narrow = lin(View::Internal, vec![br("m", Polarity::Out, MixedType::Unit, MixedType::End)]);
        assert!(wide.subtype(&narrow));
        assert!(!narrow.subtype(&wide));

        let ext_narrow = lin(View::External, vec![br("m", Polarity::Out, MixedType::Unit, MixedType::End)]);
        let ext_wide = lin(
            View::External,
            vec![
                br("m", Polarity::Out, MixedType::Unit, MixedType::End),
                br("n", Polarity::In, MixedType::Bool, MixedType::End),
            ],
        );
        assert!(ext_narrow.subtype(&ext_wide));
        assert!(!ext_wide.subtype(&ext_narrow));
    }

    #[test]
    fn qualifiers_are_not_related() {
        let l = lin(View::Internal, vec![br("m", Polarity::Out, MixedType::Unit, MixedType::End)]);
        let u = MixedType::choice(
            Qualifier::Un,
            View::Internal,
            vec![br("m", Polarity::Out, MixedType::Unit, MixedType::End)],
        );
        assert!(!l.subtype(&u));
        assert!(!u.subtype(&l));
    }

    #[test]
    fn duality_examples() {
        assert!(MixedType::End.are_dual(&MixedType::End));
        let a = lin(View::Internal, vec![br("m", Polarity::Out, MixedType::Unit, MixedType::End)]);
        let b = lin(View::External, vec![br("m", Polarity::In, MixedType::Unit, MixedType::End)]);
        assert!(a.are_dual(&b));
        assert!(!a.are_dual(&a));

        let t = lin(View::External, vec![br("m", Polarity::Out, MixedType::Int, MixedType::End)]);
        let d = t.dual_of().unwrap();
        assert_eq!(d, lin(View::Internal, vec![br("m", Polarity::In, MixedType::Int, MixedType::End)]));
        assert!(t.are_dual(&d));
        assert!(MixedType::Int.dual_of().is_err());
        assert_eq!(MixedType::End.dual_of().unwrap(), MixedType::End);
    }

    #[test]
    fn dual_of_keeps_recursive_payloads() {
        // rec a. lin&{m! a.a}: the payload refers to the original type
        let t = MixedType::rec(
            "a",
            lin(View::External, vec![br("m", Polarity::Out, MixedType::var("a"), MixedType::var("a"))]),
        );
        let d = t.dual_of().unwrap();
        assert!(t.are_dual(&d));
        assert!(type_equiv(&d.dual_of().unwrap(), &t));
    }
}
