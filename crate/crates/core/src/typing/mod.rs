//! Typing contexts, context split and update, derivation trees, and the
//! rules shared by both calculi (`0`, `|`, `if`, `new`).
//!
//! Linearity is algorithmic: a split sends a linear entry to the left
//! premise exactly when that premise mentions the name, and copies
//! unrestricted entries to both sides.

pub mod classical;
pub mod mixed;

use std::collections::BTreeSet;
use std::fmt::Display;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{fresh_name, Action, Label, Name, NameKind, Polarity, Process, Value};
use crate::types::{is_un, type_equiv, SessionType};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum TypeError {
    #[error("unbound name `{name}`")]
    UnboundName { name: String },
    #[error("linear names left unused: {names}")]
    LinearLeftover { names: String },
    #[error("`{name}` is linear and cannot be reintroduced at {ty}")]
    LinearReintroduction { name: String, ty: String },
    #[error("choice on `{subject}` offers {found} but its type {ty} requires {expected}")]
    LabelSetMismatch { subject: String, ty: String, expected: String, found: String },
    #[error("qualifier violation on `{subject}`: {detail}")]
    QualifierViolation { subject: String, detail: String },
    #[error("restriction ({x} {y}): {ty} has no dual")]
    DualityFailure { x: String, y: String, ty: String },
    #[error("linear name `{name}` {detail}")]
    LinearityError { name: String, detail: String },
    #[error("`{subject}` has type {ty}, which is not a choice type")]
    SubjectNotChoiceTyped { subject: String, ty: String },
    #[error("`{subject}` has type {ty}, expected {expected}")]
    SubjectMismatch { subject: String, ty: String, expected: String },
    #[error("value {value} has type {found}, expected {expected}")]
    ValueMismatch { value: String, found: String, expected: String },
    #[error("case on `{subject}` lacks an arm for `{label}`")]
    MissingCaseArm { subject: String, label: String },
    #[error("case on `{subject}` has an arm `{label}` its type does not offer")]
    ExtraCaseArm { subject: String, label: String },
    #[error("`{subject}` cannot select `{label}`")]
    UnknownSelectLabel { subject: String, label: String },
    #[error("duplicate branch {label}{polarity} in a choice type")]
    DuplicateBranch { label: Label, polarity: Polarity },
    #[error("type {ty} is not contractive")]
    NotContractive { ty: String },
    #[error("free type variable `{var}`")]
    FreeTypeVariable { var: String },
    #[error("{ty} is not a session type")]
    NotSessionType { ty: String },
}

/// An ordered typing context.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(bound = "T: Serialize + serde::de::DeserializeOwned")]
pub struct Context<T> {
    pub entries: Vec<(Name, T)>,
}

impl<T> Default for Context<T> {
    fn default() -> Self {
        Context { entries: Vec::new() }
    }
}

impl<T: SessionType + Display> Context<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (Name, T)>) -> Self {
        Context { entries: entries.into_iter().collect() }
    }

    pub fn get(&self, x: &Name) -> Option<&T> {
        self.entries.iter().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    pub fn contains(&self, x: &Name) -> bool {
        self.get(x).is_some()
    }

    pub fn names(&self) -> BTreeSet<Name> {
        self.entries.iter().map(|(x, _)| x.clone()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// `Γ, x: T`; `x` must be fresh.
    pub fn extend(&self, x: Name, t: T) -> Self {
        debug_assert!(!self.contains(&x), "context extension with a bound name");
        let mut out = self.clone();
        out.entries.push((x, t));
        out
    }

    pub fn is_un(&self) -> bool {
        self.entries.iter().all(|(_, t)| is_un(t))
    }

    pub fn linear_names(&self) -> Vec<Name> {
        self.entries.iter().filter(|(_, t)| !is_un(t)).map(|(x, _)| x.clone()).collect()
    }

    /// `Γ = Γ1 ∘ Γ2` where linear entries named in `demand` go left.
    pub fn split(&self, demand: &BTreeSet<Name>) -> (Self, Self) {
        let mut left = Context::new();
        let mut right = Context::new();
        for (x, t) in &self.entries {
            if is_un(t) {
                left.entries.push((x.clone(), t.clone()));
                right.entries.push((x.clone(), t.clone()));
            } else if demand.contains(x) {
                left.entries.push((x.clone(), t.clone()));
            } else {
                right.entries.push((x.clone(), t.clone()));
            }
        }
        (left, right)
    }

    /// `Γ + x: T`.
    pub fn update(&self, x: &Name, t: &T) -> Result<Self, TypeError> {
        match self.get(x) {
            None => Ok(self.extend(x.clone(), t.clone())),
            Some(u) if is_un(u) && type_equiv(t, u) => Ok(self.clone()),
            Some(_) => Err(TypeError::LinearReintroduction { name: x.to_string(), ty: t.to_string() }),
        }
    }

    /// Fails with `LinearLeftover` unless every entry is unrestricted.
    pub fn require_un(&self) -> Result<(), TypeError> {
        let lin = self.linear_names();
        if lin.is_empty() {
            Ok(())
        } else {
            Err(TypeError::LinearLeftover { names: lin.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(", ") })
        }
    }

    /// Inverse of split: unrestricted entries are merged when equivalent,
    /// linear entries must be disjoint. Returns `None` when the parts do
    /// not recompose.
    pub fn merge(parts: &[&Self]) -> Option<Self> {
        let mut out: Context<T> = Context::new();
        for part in parts {
            for (x, t) in &part.entries {
                match out.get(x) {
                    None => out.entries.push((x.clone(), t.clone())),
                    Some(u) if is_un(u) && is_un(t) && type_equiv(u, t) => {}
                    Some(_) => return None,
                }
            }
        }
        Some(out)
    }

    /// Equality as finite maps, ignoring order.
    pub fn same_entries(&self, other: &Self) -> bool {
        self.len() == other.len() && self.entries.iter().all(|(x, t)| other.get(x) == Some(t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    Choice,
    Inact,
    Par,
    If,
    Res,
    Out,
    In,
    Unit,
    True,
    False,
    Int,
    Var,
    Subt,
    TOut,
    TIn,
    Branch,
    Sel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "")]
pub enum Judgement<A: Action> {
    /// `Γ ⊢ P`. The process is recorded after any binder renaming.
    Process { process: Process<A> },
    /// `Γ ⊢ v: T`.
    Value { value: Value, ty: A::Type },
    /// `Γ ⊢ M: U`, the branch at position `index` of the enclosing choice.
    Branch { index: usize },
}

/// What a mixed choice node records for the translation: the subject type
/// after subsumption and, per branch, `Γ = Γ1 ∘ Γ2 ∘ Γ3`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "T: Serialize + serde::de::DeserializeOwned")]
pub struct ChoiceRecord<T> {
    pub subject_type: T,
    pub branches: Vec<BranchRecord<T>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "T: Serialize + serde::de::DeserializeOwned")]
pub struct BranchRecord<T> {
    pub label: Label,
    pub polarity: Polarity,
    pub payload_type: T,
    pub cont_type: T,
    pub gamma1: Context<T>,
    pub gamma2: Context<T>,
    pub gamma3: Context<T>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Derivation<A: Action> {
    pub rule: Rule,
    pub context: Context<A::Type>,
    pub judgement: Judgement<A>,
    pub premises: Vec<Derivation<A>>,
    /// The parts of the context split at this node, left to right.
    pub split: Vec<Context<A::Type>>,
    pub choice: Option<ChoiceRecord<A::Type>>,
}

impl<A: Action> Derivation<A> {
    pub fn process(&self) -> &Process<A> {
        match &self.judgement {
            Judgement::Process { process } => process,
            other => panic!("derivation node is not a process judgement: {other:?}"),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(Derivation::size).sum::<usize>()
    }
}

impl<A: Action<Type: SessionType + Display>> Derivation<A> {
    /// Every recorded split recomposes to the node's context.
    pub fn splits_recompose(&self) -> bool {
        let here = self.split.is_empty() || {
            let parts: Vec<_> = self.split.iter().collect();
            Context::merge(&parts).is_some_and(|m| m.same_entries(&self.context))
        };
        let record = self.choice.as_ref().is_none_or(|c| {
            c.branches.iter().all(|b| {
                Context::merge(&[&b.gamma1, &b.gamma2, &b.gamma3]).is_some_and(|m| m.same_entries(&self.context))
            })
        });
        here && record && self.premises.iter().all(Derivation::splits_recompose)
    }
}

/// The calculus-specific typing rules.
pub trait TypedAction: Action<Type: SessionType + Display> {
    fn check_action(ctx: &Context<Self::Type>, action: &Self) -> Result<Derivation<Self>, TypeError>;
    fn dual(ty: &Self::Type) -> Result<Self::Type, TypeError>;
    fn well_formed(ty: &Self::Type) -> Result<(), TypeError>;
    fn subtype(s: &Self::Type, t: &Self::Type) -> bool;
    fn bool_type() -> Self::Type;
    fn value_type(v: &Value) -> Option<Self::Type>;
}

pub(crate) fn leaf<A: Action>(rule: Rule, ctx: &Context<A::Type>, judgement: Judgement<A>) -> Derivation<A> {
    Derivation { rule, context: ctx.clone(), judgement, premises: Vec::new(), split: Vec::new(), choice: None }
}

/// `Γ ⊢ v: T` with the declared type of the value.
pub fn type_value<A: TypedAction>(ctx: &Context<A::Type>, v: &Value) -> Result<(A::Type, Derivation<A>), TypeError> {
    match v {
        Value::Var { name } => {
            let Some(t) = ctx.get(name) else {
                return Err(TypeError::UnboundName { name: name.to_string() });
            };
            let rest = Context::from_entries(ctx.entries.iter().filter(|(y, _)| y != name).cloned());
            rest.require_un()?;
            let t = t.clone();
            Ok((t.clone(), leaf(Rule::Var, ctx, Judgement::Value { value: v.clone(), ty: t })))
        }
        literal => {
            ctx.require_un()?;
            let t = A::value_type(literal).expect("literal values have base types");
            let rule = match literal {
                Value::Unit => Rule::Unit,
                Value::True => Rule::True,
                Value::False => Rule::False,
                _ => Rule::Int,
            };
            Ok((t.clone(), leaf(rule, ctx, Judgement::Value { value: v.clone(), ty: t })))
        }
    }
}

/// `Γ ⊢ v: T` through subsumption.
pub fn check_value<A: TypedAction>(
    ctx: &Context<A::Type>,
    v: &Value,
    expected: &A::Type,
) -> Result<Derivation<A>, TypeError> {
    let (found, d) = type_value::<A>(ctx, v)?;
    if found == *expected {
        return Ok(d);
    }
    if !A::subtype(&found, expected) {
        return Err(TypeError::ValueMismatch {
            value: v.to_string(),
            found: found.to_string(),
            expected: expected.to_string(),
        });
    }
    Ok(Derivation {
        rule: Rule::Subt,
        context: ctx.clone(),
        judgement: Judgement::Value { value: v.clone(), ty: expected.clone() },
        premises: vec![d],
        split: Vec::new(),
        choice: None,
    })
}

fn value_names(v: &Value) -> BTreeSet<Name> {
    v.as_name().cloned().into_iter().collect()
}

/// Linear names shared by both sides of a composition.
fn shared_linear<T: SessionType + Display>(ctx: &Context<T>, a: &BTreeSet<Name>, b: &BTreeSet<Name>) -> Option<Name> {
    a.intersection(b).find(|x| ctx.get(x).is_some_and(|t| !is_un(t))).cloned()
}

/// A binder name that does not clash with the context, renaming the scope
/// if necessary.
pub(crate) fn fresh_binder<A: Action, T>(ctx: &Context<T>, binder: &Name, scope: &Process<A>) -> (Name, Process<A>) {
    if binder.is_wildcard() || !ctx.entries.iter().any(|(x, _)| x == binder) {
        return (binder.clone(), scope.clone());
    }
    let mut avoid = scope.all_names();
    avoid.extend(ctx.entries.iter().map(|(x, _)| x.clone()));
    let fresh = fresh_name(NameKind::Refresh, &avoid);
    let renamed = scope.rename(&[(binder.clone(), fresh.clone())].into_iter().collect());
    (fresh, renamed)
}

/// `Γ ⊢ P`.
pub fn check<A: TypedAction>(ctx: &Context<A::Type>, p: &Process<A>) -> Result<Derivation<A>, TypeError> {
    for (_, t) in &ctx.entries {
        A::well_formed(t)?;
    }
    check_process(ctx, p)
}

pub(crate) fn check_process<A: TypedAction>(
    ctx: &Context<A::Type>,
    p: &Process<A>,
) -> Result<Derivation<A>, TypeError> {
    let judgement = Judgement::Process { process: p.clone() };
    match p {
        Process::Inact => {
            ctx.require_un()?;
            Ok(leaf(Rule::Inact, ctx, judgement))
        }
        Process::Par { left, right } => {
            let fl = left.free_names();
            if let Some(x) = shared_linear(ctx, &fl, &right.free_names()) {
                return Err(TypeError::LinearityError {
                    name: x.to_string(),
                    detail: "is used on both sides of a parallel composition".into(),
                });
            }
            let (g1, g2) = ctx.split(&fl);
            let d1 = check_process(&g1, left)?;
            let d2 = check_process(&g2, right)?;
            let process = Process::par(d1.process().clone(), d2.process().clone());
            Ok(Derivation {
                rule: Rule::Par,
                context: ctx.clone(),
                judgement: Judgement::Process { process },
                premises: vec![d1, d2],
                split: vec![g1, g2],
                choice: None,
            })
        }
        Process::If { cond, then_branch, else_branch } => {
            let fv = value_names(cond);
            let mut rest = then_branch.free_names();
            rest.extend(else_branch.free_names());
            if let Some(x) = shared_linear(ctx, &fv, &rest) {
                return Err(TypeError::LinearityError {
                    name: x.to_string(),
                    detail: "is both the condition and used by a branch".into(),
                });
            }
            let (g1, g2) = ctx.split(&fv);
            let dv = check_value::<A>(&g1, cond, &A::bool_type())?;
            let dt = check_process(&g2, then_branch)?;
            let de = check_process(&g2, else_branch)?;
            let process = Process::cond(cond.clone(), dt.process().clone(), de.process().clone());
            Ok(Derivation {
                rule: Rule::If,
                context: ctx.clone(),
                judgement: Judgement::Process { process },
                premises: vec![dv, dt, de],
                split: vec![g1, g2],
                choice: None,
            })
        }
        Process::New { x, y, ty, body } => {
            A::well_formed(ty)?;
            let dual = A::dual(ty).map_err(|_| TypeError::DualityFailure {
                x: x.to_string(),
                y: y.to_string(),
                ty: ty.to_string(),
            })?;
            if x == y {
                return Err(TypeError::LinearityError {
                    name: x.to_string(),
                    detail: "names both ends of a restriction".into(),
                });
            }
            let (x2, body) = fresh_binder(ctx, x, body);
            let (y2, body) = fresh_binder(&ctx.extend(x2.clone(), ty.clone()), y, &body);
            let inner = ctx.extend(x2.clone(), ty.clone()).extend(y2.clone(), dual);
            let d = check_process(&inner, &body)?;
            let process = Process::new(x2, y2, ty.clone(), d.process().clone());
            Ok(Derivation {
                rule: Rule::Res,
                context: ctx.clone(),
                judgement: Judgement::Process { process },
                premises: vec![d],
                split: Vec::new(),
                choice: None,
            })
        }
        Process::Act { action } => A::check_action(ctx, action),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{Qualifier, View};
    use crate::types::{MixedType, MixedTypeBranch};

    fn lin_select() -> MixedType {
        MixedType::choice(
            Qualifier::Lin,
            View::Internal,
            vec![MixedTypeBranch::new(Label::new("m"), Polarity::Out, MixedType::Unit, MixedType::End)],
        )
    }

    fn un_loop() -> MixedType {
        MixedType::rec(
            "a",
            MixedType::choice(
                Qualifier::Un,
                View::External,
                vec![MixedTypeBranch::new(Label::new("m"), Polarity::In, MixedType::Unit, MixedType::var("a"))],
            ),
        )
    }

    #[test]
    fn split_examples() {
        let x = Name::user("x");
        let g = Context::from_entries([(x.clone(), lin_select())]);
        let (l, r) = g.split(&[x.clone()].into_iter().collect());
        assert!(l.contains(&x) && r.is_empty());

        let g = Context::from_entries([(x.clone(), MixedType::End)]);
        let (l, r) = g.split(&BTreeSet::new());
        assert!(l.contains(&x) && r.contains(&x));

        let (l, r) = Context::<MixedType>::new().split(&BTreeSet::new());
        assert!(l.is_empty() && r.is_empty());
    }

    #[test]
    fn update_examples() {
        let x = Name::user("x");
        let g = Context::<MixedType>::new().update(&x, &MixedType::End).unwrap();
        assert_eq!(g.get(&x), Some(&MixedType::End));

        let t = un_loop();
        let g = Context::from_entries([(x.clone(), t.clone())]);
        let unfolded = crate::types::unfold(&t);
        assert_eq!(g.update(&x, &unfolded).unwrap(), g);

        let g = Context::from_entries([(x.clone(), lin_select())]);
        assert!(matches!(g.update(&x, &lin_select()), Err(TypeError::LinearReintroduction { .. })));
    }

    #[test]
    fn merge_inverts_split() {
        let (x, y, z) = (Name::user("x"), Name::user("y"), Name::user("z"));
        let g =
            Context::from_entries([(x.clone(), lin_select()), (y.clone(), MixedType::End), (z.clone(), lin_select())]);
        let (l, r) = g.split(&[x].into_iter().collect());
        assert!(Context::merge(&[&l, &r]).unwrap().same_entries(&g));
    }
}
