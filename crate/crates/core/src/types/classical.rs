use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{subst, SessionType, TypeVar, TypeView};
use crate::syntax::{Label, Polarity, Qualifier, View};
use crate::TypeError;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassicalType {
    Comm { q: Qualifier, polarity: Polarity, payload: Box<ClassicalType>, cont: Box<ClassicalType> },
    Choice { q: Qualifier, view: View, arms: BTreeMap<Label, ClassicalType> },
    End,
    Unit,
    Bool,
    Int,
    Rec { var: TypeVar, body: Box<ClassicalType> },
    Var { var: TypeVar },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassicalHead {
    Comm { q: Qualifier, polarity: Polarity },
    Choice { q: Qualifier, view: View, labels: Vec<Label> },
    End,
    Unit,
    Bool,
    Int,
}

impl ClassicalType {
    pub fn comm(q: Qualifier, polarity: Polarity, payload: ClassicalType, cont: ClassicalType) -> Self {
        ClassicalType::Comm { q, polarity, payload: Box::new(payload), cont: Box::new(cont) }
    }

    pub fn choice(q: Qualifier, view: View, arms: impl IntoIterator<Item = (Label, ClassicalType)>) -> Self {
        ClassicalType::Choice { q, view, arms: arms.into_iter().collect() }
    }

    pub fn rec(var: impl Into<TypeVar>, body: ClassicalType) -> Self {
        ClassicalType::Rec { var: var.into(), body: Box::new(body) }
    }

    pub fn var(var: impl Into<TypeVar>) -> Self {
        ClassicalType::Var { var: var.into() }
    }

    /// `*⊕{l_i}`, i.e. `rec a. un⊕{l_i: a}`.
    pub fn star_select(labels: impl IntoIterator<Item = Label>) -> Self {
        ClassicalType::rec(
            "a",
            ClassicalType::choice(
                Qualifier::Un,
                View::Internal,
                labels.into_iter().map(|l| (l, ClassicalType::var("a"))),
            ),
        )
    }

    /// `*!T` and `*?T`, i.e. `rec a. un⋆T.a`. `payload` must be closed.
    pub fn star_comm(polarity: Polarity, payload: ClassicalType) -> Self {
        ClassicalType::rec("a", ClassicalType::comm(Qualifier::Un, polarity, payload, ClassicalType::var("a")))
    }

    pub fn well_formed(&self) -> Result<(), TypeError> {
        if !super::is_contractive(self) {
            return Err(TypeError::NotContractive { ty: self.to_string() });
        }
        if let Some(v) = super::free_vars(self).into_iter().next() {
            return Err(TypeError::FreeTypeVariable { var: v });
        }
        Ok(())
    }

    pub fn subtype(&self, other: &ClassicalType) -> bool {
        Subtyping { visited: HashSet::new() }.check(self, other)
    }

    pub fn are_dual(&self, other: &ClassicalType) -> bool {
        Duality { visited: HashSet::new() }.check(self, other)
    }

    pub fn dual_of(&self) -> Result<ClassicalType, TypeError> {
        if !super::is_session(self) {
            return Err(TypeError::NotSessionType { ty: self.to_string() });
        }
        Ok(dualize(self, &mut Vec::new()))
    }
}

fn close(t: &ClassicalType, env: &[(TypeVar, ClassicalType)]) -> ClassicalType {
    env.iter().rev().fold(t.clone(), |acc, (a, closed)| subst(&acc, a, closed))
}

fn dualize(t: &ClassicalType, env: &mut Vec<(TypeVar, ClassicalType)>) -> ClassicalType {
    match t {
        ClassicalType::Comm { q, polarity, payload, cont } => {
            ClassicalType::comm(*q, polarity.dual(), close(payload, env), dualize(cont, env))
        }
        ClassicalType::Choice { q, view, arms } => {
            ClassicalType::choice(*q, view.dual(), arms.iter().map(|(l, t)| (l.clone(), dualize(t, env))))
        }
        ClassicalType::Rec { var, body } => {
            let closed = close(t, env);
            env.push((var.clone(), closed));
            let body = dualize(body, env);
            env.pop();
            ClassicalType::rec(var.clone(), body)
        }
        other => other.clone(),
    }
}

struct Subtyping {
    visited: HashSet<(ClassicalType, ClassicalType)>,
}

impl Subtyping {
    fn check(&mut self, s: &ClassicalType, t: &ClassicalType) -> bool {
        if !self.visited.insert((s.clone(), t.clone())) {
            return true;
        }
        match (super::unfold(s), super::unfold(t)) {
            (ClassicalType::End, ClassicalType::End)
            | (ClassicalType::Unit, ClassicalType::Unit)
            | (ClassicalType::Bool, ClassicalType::Bool)
            | (ClassicalType::Int, ClassicalType::Int) => true,
            (
                ClassicalType::Comm { q: q1, polarity: p1, payload: s1, cont: c1 },
                ClassicalType::Comm { q: q2, polarity: p2, payload: s2, cont: c2 },
            ) if q1 == q2 && p1 == p2 => {
                let payload = match p1 {
                    Polarity::Out => self.check(&s2, &s1),
                    Polarity::In => self.check(&s1, &s2),
                };
                payload && self.check(&c1, &c2)
            }
            (
                ClassicalType::Choice { q: q1, view: v1, arms: a1 },
                ClassicalType::Choice { q: q2, view: v2, arms: a2 },
            ) if q1 == q2 && v1 == v2 => {
                let (narrow, wide) = match v1 {
                    View::Internal => (&a2, &a1),
                    View::External => (&a1, &a2),
                };
                narrow.iter().all(|(l, n)| match wide.get(l) {
                    None => false,
                    Some(w) => match v1 {
                        View::Internal => self.check(w, n),
                        View::External => self.check(n, w),
                    },
                })
            }
            _ => false,
        }
    }
}

struct Duality {
    visited: HashSet<(ClassicalType, ClassicalType)>,
}

impl Duality {
    fn check(&mut self, s: &ClassicalType, t: &ClassicalType) -> bool {
        if !self.visited.insert((s.clone(), t.clone())) {
            return true;
        }
        match (super::unfold(s), super::unfold(t)) {
            (ClassicalType::End, ClassicalType::End) => true,
            (
                ClassicalType::Comm { q: q1, polarity: p1, payload: s1, cont: c1 },
                ClassicalType::Comm { q: q2, polarity: p2, payload: s2, cont: c2 },
            ) => q1 == q2 && p1.dual() == p2 && s1.subtype(&s2) && s2.subtype(&s1) && self.check(&c1, &c2),
            (
                ClassicalType::Choice { q: q1, view: v1, arms: a1 },
                ClassicalType::Choice { q: q2, view: v2, arms: a2 },
            ) => {
                q1 == q2
                    && v1.dual() == v2
                    && a1.len() == a2.len()
                    && a1.iter().all(|(l, t1)| a2.get(l).is_some_and(|t2| self.check(t1, t2)))
            }
            _ => false,
        }
    }
}

impl SessionType for ClassicalType {
    type Head = ClassicalHead;

    fn view(&self) -> TypeView<'_, Self> {
        match self {
            ClassicalType::Rec { var, body } => TypeView::Rec(var, body),
            ClassicalType::Var { var } => TypeView::Var(var),
            ClassicalType::Comm { q, polarity, payload, cont } => {
                TypeView::Node(ClassicalHead::Comm { q: *q, polarity: *polarity }, vec![payload, cont])
            }
            ClassicalType::Choice { q, view, arms } => TypeView::Node(
                ClassicalHead::Choice { q: *q, view: *view, labels: arms.keys().cloned().collect() },
                arms.values().collect(),
            ),
            ClassicalType::End => TypeView::Node(ClassicalHead::End, Vec::new()),
            ClassicalType::Unit => TypeView::Node(ClassicalHead::Unit, Vec::new()),
            ClassicalType::Bool => TypeView::Node(ClassicalHead::Bool, Vec::new()),
            ClassicalType::Int => TypeView::Node(ClassicalHead::Int, Vec::new()),
        }
    }

    fn mk_rec(var: TypeVar, body: Self) -> Self {
        ClassicalType::rec(var, body)
    }

    fn mk_var(var: TypeVar) -> Self {
        ClassicalType::var(var)
    }

    fn rebuild(head: &ClassicalHead, children: Vec<Self>) -> Self {
        match head {
            ClassicalHead::Comm { q, polarity } => {
                let mut it = children.into_iter();
                let payload = it.next().expect("payload child");
                let cont = it.next().expect("continuation child");
                ClassicalType::comm(*q, *polarity, payload, cont)
            }
            ClassicalHead::Choice { q, view, labels } => {
                ClassicalType::choice(*q, *view, labels.iter().cloned().zip(children))
            }
            ClassicalHead::End => ClassicalType::End,
            ClassicalHead::Unit => ClassicalType::Unit,
            ClassicalHead::Bool => ClassicalType::Bool,
            ClassicalHead::Int => ClassicalType::Int,
        }
    }

    fn head_is_un(head: &ClassicalHead) -> bool {
        match head {
            ClassicalHead::Comm { q, .. } | ClassicalHead::Choice { q, .. } => *q == Qualifier::Un,
            _ => true,
        }
    }

    fn head_is_session(head: &ClassicalHead) -> bool {
        matches!(head, ClassicalHead::Comm { .. } | ClassicalHead::Choice { .. } | ClassicalHead::End)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{is_contractive, is_un, type_equiv};

    fn lin_comm(p: Polarity, s: ClassicalType) -> ClassicalType {
        ClassicalType::comm(Qualifier::Lin, p, s, ClassicalType::End)
    }

    #[test]
    fn star_select_is_contractive_and_un() {
        let t = ClassicalType::star_select([Label::new("l")]);
        assert!(is_contractive(&t));
        assert!(is_un(&t));
    }

    #[test]
    fn comm_duality() {
        assert!(lin_comm(Polarity::In, ClassicalType::Int).are_dual(&lin_comm(Polarity::Out, ClassicalType::Int)));
        assert!(!lin_comm(Polarity::In, ClassicalType::Int).are_dual(&lin_comm(Polarity::Out, ClassicalType::Bool)));
        assert!(!ClassicalType::Int.are_dual(&ClassicalType::Int));
    }

    #[test]
    fn select_and_branch_width() {
        let both = ClassicalType::choice(
            Qualifier::Lin,
            View::Internal,
            [(Label::new("l"), ClassicalType::End), (Label::new("m"), ClassicalType::End)],
        );
        let one = ClassicalType::choice(Qualifier::Lin, View::Internal, [(Label::new("l"), ClassicalType::End)]);
        assert!(both.subtype(&one));
        assert!(!one.subtype(&both));
        let d = both.dual_of().unwrap();
        assert!(both.are_dual(&d));
        assert!(!one.are_dual(&d));
    }

    #[test]
    fn output_payload_is_contravariant() {
        let narrow = ClassicalType::choice(Qualifier::Lin, View::Internal, [(Label::new("l"), ClassicalType::End)]);
        let wide = ClassicalType::choice(
            Qualifier::Lin,
            View::Internal,
            [(Label::new("l"), ClassicalType::End), (Label::new("m"), ClassicalType::End)],
        );
        assert!(lin_comm(Polarity::Out, narrow.clone()).subtype(&lin_comm(Polarity::Out, wide.clone())));
        assert!(lin_comm(Polarity::In, wide.clone()).subtype(&lin_comm(Polarity::In, narrow.clone())));
        assert!(!lin_comm(Polarity::Out, wide).subtype(&lin_comm(Polarity::Out, narrow)));
    }

    #[test]
    fn star_abbreviations_unfold() {
        let t = ClassicalType::star_comm(Polarity::Out, ClassicalType::Unit);
        let once = ClassicalType::comm(Qualifier::Un, Polarity::Out, ClassicalType::Unit, t.clone());
        assert!(type_equiv(&t, &once));
        assert!(type_equiv(&t.dual_of().unwrap(), &ClassicalType::star_comm(Polarity::In, ClassicalType::Unit)));
    }
}
