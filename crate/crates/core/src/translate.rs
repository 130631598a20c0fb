//! The encoding of mixed sessions into classical sessions.
//!
//! Types translate structurally. Processes translate along a typing
//! derivation, because the shape of a choice's encoding depends on the
//! qualifier and view of its subject's type, which only the derivation
//! knows.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{
    Choice, ClassicalProcess, Comm, Label, MixedBranch, Name, NameKind, Polarity, Process, Qualifier, Value, View,
};
use crate::types::{subst, type_equiv, ClassicalType, MixedType, SessionType, TypeVar, TypeView};
use crate::typing::{Context, Derivation, Judgement, Rule};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum TranslateError {
    #[error("a nondeterministic choice needs at least one part")]
    EmptyChoice,
    #[error("continuation {continuation} of the unrestricted type {ty} is not equivalent to it")]
    UnContinuationMismatch { ty: String, continuation: String },
    #[error("malformed derivation: {0}")]
    MalformedDerivation(String),
}

/// Branches of one choice sharing a label and a polarity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    pub label: Label,
    pub polarity: Polarity,
    pub branches: Vec<MixedBranch>,
}

/// Groups branches by label-polarity pair. Fragments appear in order of
/// first occurrence and keep the branch order.
pub fn fragment_choice(branches: &[MixedBranch]) -> Vec<Fragment> {
    fragment_indices(branches)
        .into_iter()
        .map(|(label, polarity, ix)| Fragment {
            label,
            polarity,
            branches: ix.into_iter().map(|i| branches[i].clone()).collect(),
        })
        .collect()
}

fn fragment_indices(branches: &[MixedBranch]) -> Vec<(Label, Polarity, Vec<usize>)> {
    let mut out: Vec<(Label, Polarity, Vec<usize>)> = Vec::new();
    for (i, b) in branches.iter().enumerate() {
        match out.iter_mut().find(|(l, p, _)| *l == b.label && *p == b.polarity()) {
            Some(f) => f.2.push(i),
            None => out.push((b.label.clone(), b.polarity(), vec![i])),
        }
    }
    out
}

/// Deterministic supply of the channel ends the encoding introduces.
/// Ends come in pairs sharing a counter: `%s1 %t1`, `%u1 %v1`, `%a1 %b1`.
#[derive(Debug, Clone, Default)]
pub struct FreshNameSource {
    counters: BTreeMap<NameKind, u32>,
}

impl FreshNameSource {
    pub fn new() -> Self {
        Self::default()
    }

    /// A source whose names are all distinct from `names`.
    pub fn avoiding(names: &BTreeSet<Name>) -> Self {
        let mut fresh = Self::new();
        for n in names {
            if let Name::Generated { kind, counter } = n {
                let lead = pair_lead(*kind);
                let c = fresh.counters.entry(lead).or_insert(0);
                *c = (*c).max(*counter);
            }
        }
        fresh
    }

    /// Draws the next pair for `kind`, one of `S`, `U`, `A`.
    pub fn pair(&mut self, kind: NameKind) -> (Name, Name) {
        let lead = pair_lead(kind);
        let c = self.counters.entry(lead).or_insert(0);
        *c += 1;
        let partner = match lead {
            NameKind::S => NameKind::T,
            NameKind::U => NameKind::V,
            NameKind::A => NameKind::B,
            other => other,
        };
        (Name::generated(lead, *c), Name::generated(partner, *c))
    }
}

fn pair_lead(kind: NameKind) -> NameKind {
    match kind {
        NameKind::T => NameKind::S,
        NameKind::V => NameKind::U,
        NameKind::B => NameKind::A,
        k => k,
    }
}

/// `(new s t: *⊕{l_1..l_n})(s select l_1 | ... | s select l_n | case t of {l_i -> P_i})`.
pub fn build_ndchoice(
    parts: Vec<ClassicalProcess>,
    fresh: &mut FreshNameSource,
) -> Result<ClassicalProcess, TranslateError> {
    let (s, t) = fresh.pair(NameKind::S);
    ndchoice_on(s, t, parts)
}

fn ndchoice_on(s: Name, t: Name, parts: Vec<ClassicalProcess>) -> Result<ClassicalProcess, TranslateError> {
    let n = parts.len();
    if n == 0 {
        return Err(TranslateError::EmptyChoice);
    }
    let labels: Vec<Label> = (1..=n).map(|i| Label::race(i, n)).collect();
    let selects: Vec<_> =
        labels.iter().map(|l| ClassicalProcess::select(s.clone(), l.clone(), Process::Inact)).collect();
    let case = ClassicalProcess::case(t.clone(), labels.iter().cloned().zip(parts).collect());
    Ok(Process::new(
        s,
        t,
        ClassicalType::star_select(labels.clone()),
        Process::par_all(selects.into_iter().chain(std::iter::once(case))),
    ))
}

/// Draws the race channel before the parts are produced, so that names
/// follow a left-to-right reading of the output.
fn ndchoice<F>(fresh: &mut FreshNameSource, parts: F) -> Result<ClassicalProcess, TranslateError>
where
    F: FnOnce(&mut FreshNameSource) -> Result<Vec<ClassicalProcess>, TranslateError>,
{
    let (s, t) = fresh.pair(NameKind::S);
    let parts = parts(fresh)?;
    ndchoice_on(s, t, parts)
}

// ---------------------------------------------------------------- types

pub fn translate_type(t: &MixedType) -> Result<ClassicalType, TranslateError> {
    let mut avoid = BTreeSet::new();
    type_vars(t, &mut avoid);
    TypeTranslator { env: Vec::new(), avoid }.go(t)
}

pub fn translate_context(ctx: &Context<MixedType>) -> Result<Context<ClassicalType>, TranslateError> {
    let entries = ctx
        .entries
        .iter()
        .map(|(x, t)| Ok((x.clone(), translate_type(t)?)))
        .collect::<Result<Vec<_>, TranslateError>>()?;
    Ok(Context::from_entries(entries))
}

fn type_vars<T: SessionType>(t: &T, out: &mut BTreeSet<TypeVar>) {
    match t.view() {
        TypeView::Rec(a, body) => {
            out.insert(a.to_string());
            type_vars(body, out);
        }
        TypeView::Var(a) => {
            out.insert(a.to_string());
        }
        TypeView::Node(_, children) => children.into_iter().for_each(|c| type_vars(c, out)),
    }
}

/// The label a branch gets on the translated side: marks are kept on
/// internal choices and dualized on external ones, so that `l^!` on one
/// end meets `l^!` on the other.
fn marked(label: &Label, polarity: Polarity, view: View) -> Label {
    match view {
        View::Internal => Label::marked(label.base.clone(), polarity),
        View::External => Label::marked(label.base.clone(), polarity.dual()),
    }
}

struct TypeTranslator {
    /// Enclosing `rec` binders with their closed meaning.
    env: Vec<(TypeVar, MixedType)>,
    avoid: BTreeSet<TypeVar>,
}

impl TypeTranslator {
    fn close(&self, t: &MixedType) -> MixedType {
        self.env.iter().rev().fold(t.clone(), |acc, (a, c)| subst(&acc, a, c))
    }

    fn fresh_var(&self) -> TypeVar {
        let mut i = 0;
        loop {
            let v = if i == 0 { "b".to_string() } else { format!("b{i}") };
            if !self.avoid.contains(&v) {
                return v;
            }
            i += 1;
        }
    }

    fn go(&mut self, t: &MixedType) -> Result<ClassicalType, TranslateError> {
        Ok(match t {
            MixedType::End => ClassicalType::End,
            MixedType::Unit => ClassicalType::Unit,
            MixedType::Bool => ClassicalType::Bool,
            MixedType::Int => ClassicalType::Int,
            MixedType::Var { var } => ClassicalType::var(var.clone()),
            MixedType::Rec { var, body } => {
                let closed = self.close(t);
                self.env.push((var.clone(), closed));
                let body = self.go(body);
                self.env.pop();
                ClassicalType::rec(var.clone(), body?)
            }
            MixedType::Choice { q: Qualifier::Lin, view, branches } => {
                let arms = branches
                    .iter()
                    .map(|b| {
                        let comm =
                            ClassicalType::comm(Qualifier::Lin, b.polarity, self.go(&b.payload)?, self.go(&b.cont)?);
                        Ok((marked(&b.label, b.polarity, *view), comm))
                    })
                    .collect::<Result<Vec<_>, TranslateError>>()?;
                ClassicalType::choice(Qualifier::Lin, *view, arms)
            }
            MixedType::Choice { q: Qualifier::Un, view, branches } => {
                let whole = self.close(t);
                for b in branches {
                    let cont = self.close(&b.cont);
                    if !type_equiv(&cont, &whole) {
                        return Err(TranslateError::UnContinuationMismatch {
                            ty: whole.to_string(),
                            continuation: cont.to_string(),
                        });
                    }
                }
                // The message carries the end the receiver keeps; the
                // sender of an internal choice holds its dual and selects
                // on it.
                let arms = branches
                    .iter()
                    .map(|b| {
                        let polarity = match view {
                            View::Internal => b.polarity.dual(),
                            View::External => b.polarity,
                        };
                        let comm =
                            ClassicalType::comm(Qualifier::Lin, polarity, self.go(&b.payload)?, ClassicalType::End);
                        Ok((marked(&b.label, b.polarity, *view), comm))
                    })
                    .collect::<Result<Vec<_>, TranslateError>>()?;
                let payload = ClassicalType::choice(Qualifier::Lin, View::External, arms);
                let direction = match view {
                    View::Internal => Polarity::Out,
                    View::External => Polarity::In,
                };
                let b = self.fresh_var();
                ClassicalType::rec(
                    b.clone(),
                    ClassicalType::comm(Qualifier::Un, direction, payload, ClassicalType::var(b)),
                )
            }
        })
    }
}

// ------------------------------------------------------------ processes

/// Translates the process a successful mixed derivation types.
pub fn translate_process(d: &Derivation<Choice>) -> Result<ClassicalProcess, TranslateError> {
    let mut fresh = FreshNameSource::avoiding(&d.process().all_names());
    translate_with(d, &mut fresh)
}

/// As [`translate_process`], drawing names from a caller-owned source.
pub fn translate_with(d: &Derivation<Choice>, fresh: &mut FreshNameSource) -> Result<ClassicalProcess, TranslateError> {
    ProcessTranslator { fresh }.process(d)
}

fn malformed(what: &str) -> TranslateError {
    TranslateError::MalformedDerivation(what.to_string())
}

struct ProcessTranslator<'a> {
    fresh: &'a mut FreshNameSource,
}

impl ProcessTranslator<'_> {
    fn premise(d: &Derivation<Choice>, i: usize) -> Result<&Derivation<Choice>, TranslateError> {
        d.premises.get(i).ok_or_else(|| malformed("missing premise"))
    }

    fn process(&mut self, d: &Derivation<Choice>) -> Result<ClassicalProcess, TranslateError> {
        let Judgement::Process { process } = &d.judgement else {
            return Err(malformed("expected a process judgement"));
        };
        match (d.rule, process) {
            (Rule::Inact, _) => Ok(Process::Inact),
            (Rule::Par, _) => {
                let left = self.process(Self::premise(d, 0)?)?;
                let right = self.process(Self::premise(d, 1)?)?;
                Ok(Process::par(left, right))
            }
            (Rule::If, Process::If { cond, .. }) => {
                let then_branch = self.process(Self::premise(d, 1)?)?;
                let else_branch = self.process(Self::premise(d, 2)?)?;
                Ok(Process::cond(cond.clone(), then_branch, else_branch))
            }
            (Rule::Res, Process::New { x, y, ty, .. }) => {
                let ty = translate_type(ty)?;
                let body = self.process(Self::premise(d, 0)?)?;
                Ok(Process::new(x.clone(), y.clone(), ty, body))
            }
            (Rule::Choice, Process::Act { action }) => self.choice(d, action),
            (rule, _) => Err(malformed(&format!("rule {rule:?} does not conclude this process"))),
        }
    }

    /// The continuation of branch `i`, translated.
    fn cont(&mut self, d: &Derivation<Choice>, choice: &Choice, i: usize) -> Result<ClassicalProcess, TranslateError> {
        let branch = Self::premise(d, i + 1)?;
        let at = match choice.branches[i].comm {
            Comm::Out { .. } => 1,
            Comm::In { .. } => 0,
        };
        self.process(Self::premise(branch, at)?)
    }

    /// `c!v.P` or `c?y.P` for branch `i`, with `wrap` applied to `⟦P⟧`.
    fn leaf(
        &mut self,
        d: &Derivation<Choice>,
        choice: &Choice,
        i: usize,
        channel: &Name,
        wrap: &dyn Fn(ClassicalProcess) -> ClassicalProcess,
    ) -> Result<ClassicalProcess, TranslateError> {
        let cont = wrap(self.cont(d, choice, i)?);
        Ok(match &choice.branches[i].comm {
            Comm::Out { payload } => ClassicalProcess::send(channel.clone(), payload.clone(), cont),
            Comm::In { binder } => ClassicalProcess::receive(Qualifier::Lin, channel.clone(), binder.clone(), cont),
        })
    }

    fn fragment(
        &mut self,
        d: &Derivation<Choice>,
        choice: &Choice,
        indices: &[usize],
        channel: &Name,
        wrap: &dyn Fn(ClassicalProcess) -> ClassicalProcess,
    ) -> Result<ClassicalProcess, TranslateError> {
        ndchoice(self.fresh, |fresh| {
            let mut inner = ProcessTranslator { fresh };
            indices.iter().map(|&i| inner.leaf(d, choice, i, channel, wrap)).collect()
        })
    }

    fn choice(&mut self, d: &Derivation<Choice>, choice: &Choice) -> Result<ClassicalProcess, TranslateError> {
        let record = d.choice.as_ref().ok_or_else(|| malformed("choice node without a record"))?;
        let (q, view, type_branches) =
            record.subject_type.as_choice().ok_or_else(|| malformed("choice subject is not choice-typed"))?;
        let x = &choice.subject;
        let fragments = fragment_indices(&choice.branches);
        let keep: &dyn Fn(ClassicalProcess) -> ClassicalProcess = &|p| p;

        match (q, view) {
            (Qualifier::Lin, View::External) => {
                let mut arms = BTreeMap::new();
                for (l, p, ix) in &fragments {
                    arms.insert(marked(l, *p, view), self.fragment(d, choice, ix, x, keep)?);
                }
                Ok(ClassicalProcess::case(x.clone(), arms))
            }
            (Qualifier::Lin, View::Internal) => ndchoice(self.fresh, |fresh| {
                let mut inner = ProcessTranslator { fresh };
                fragments
                    .iter()
                    .map(|(l, p, ix)| {
                        let body = inner.fragment(d, choice, ix, x, keep)?;
                        Ok(ClassicalProcess::select(x.clone(), marked(l, *p, view), body))
                    })
                    .collect()
            }),
            (Qualifier::Un, View::External) => {
                let (u, v) = self.fresh.pair(NameKind::U);
                let (a, _) = self.fresh.pair(NameKind::A);
                let rearm = rearm(u.clone());
                let mut arms = BTreeMap::new();
                for (l, p, ix) in &fragments {
                    arms.insert(marked(l, *p, view), self.fragment(d, choice, ix, &a, &rearm)?);
                }
                let body =
                    ClassicalProcess::receive(Qualifier::Lin, x.clone(), a.clone(), ClassicalProcess::case(a, arms));
                Ok(un_loop(u, v, body))
            }
            (Qualifier::Un, View::Internal) => {
                let (u, v) = self.fresh.pair(NameKind::U);
                let rearm = rearm(u.clone());
                // The end sent on x: the external view of the declared type.
                // The subsumed type may list fewer branches than the case
                // receiving this end, which would break subject reduction.
                let declared = d.context.get(x).and_then(MixedType::as_choice).map(|(_, _, bs)| bs);
                let sent = ClassicalType::choice(
                    Qualifier::Lin,
                    View::External,
                    declared
                        .as_deref()
                        .unwrap_or(&type_branches)
                        .iter()
                        .map(|b| {
                            let c = ClassicalType::comm(
                                Qualifier::Lin,
                                b.polarity.dual(),
                                translate_type(&b.payload)?,
                                ClassicalType::End,
                            );
                            Ok((marked(&b.label, b.polarity, View::Internal), c))
                        })
                        .collect::<Result<Vec<_>, TranslateError>>()?,
                );
                let body = ndchoice(self.fresh, |fresh| {
                    let mut inner = ProcessTranslator { fresh };
                    fragments
                        .iter()
                        .map(|(l, p, ix)| {
                            let (a, b) = inner.fresh.pair(NameKind::A);
                            let rest = inner.fragment(d, choice, ix, &b, &rearm)?;
                            let select = ClassicalProcess::select(b.clone(), marked(l, *p, view), rest);
                            Ok(Process::new(
                                a.clone(),
                                b,
                                sent.clone(),
                                ClassicalProcess::send(x.clone(), Value::var(a), select),
                            ))
                        })
                        .collect()
                })?;
                Ok(un_loop(u, v, body))
            }
        }
    }
}

/// `P ↦ u!() | P`, dropping a trailing `0`.
fn rearm(u: Name) -> impl Fn(ClassicalProcess) -> ClassicalProcess {
    move |p| {
        let call = ClassicalProcess::send(u.clone(), Value::Unit, Process::Inact);
        if p.is_inact() {
            call
        } else {
            Process::par(call, p)
        }
    }
}

/// `(new u v: *!())(u!() | un v?_.body)`.
fn un_loop(u: Name, v: Name, body: ClassicalProcess) -> ClassicalProcess {
    let start = ClassicalProcess::send(u.clone(), Value::Unit, Process::Inact);
    let server = ClassicalProcess::receive(Qualifier::Un, v.clone(), Name::wildcard(), body);
    Process::new(u, v, ClassicalType::star_comm(Polarity::Out, ClassicalType::Unit), Process::par(start, server))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_classical_type, parse_mixed, parse_mixed_type};
    use crate::syntax::congruent;
    use crate::typing::mixed::check_mixed;

    fn tr(t: &str) -> ClassicalType {
        translate_type(&parse_mixed_type(t).unwrap()).unwrap()
    }

    #[test]
    fn fragments_group_duplicates() {
        let Process::Act { action } = parse_mixed("lin x (m!3 + m!5 + n?z + m!7)").unwrap() else { panic!() };
        let f = fragment_choice(&action.branches);
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].branches.len(), 3);
        assert_eq!(f[1].polarity, Polarity::In);
    }

    #[test]
    fn fresh_pairs_share_counters() {
        let mut f = FreshNameSource::avoiding(&[Name::generated(NameKind::T, 4)].into_iter().collect());
        assert_eq!(f.pair(NameKind::S), (Name::generated(NameKind::S, 5), Name::generated(NameKind::T, 5)));
        assert_eq!(f.pair(NameKind::U).1, Name::generated(NameKind::V, 1));
    }

    #[test]
    fn empty_ndchoice_is_rejected() {
        assert_eq!(build_ndchoice(Vec::new(), &mut FreshNameSource::new()), Err(TranslateError::EmptyChoice));
    }

    #[test]
    fn linear_external_type() {
        assert_eq!(
            tr("lin&{m!int.end, n?bool.end}"),
            parse_classical_type("lin&{m^?: lin!int.end, n^!: lin?bool.end}").unwrap()
        );
    }

    #[test]
    fn unrestricted_types_agree_on_the_message() {
        let server = tr("rec a.un&{m!int.a}");
        let client = tr("rec a.un+{m?int.a}");
        assert!(server.are_dual(&client));
        let expected = parse_classical_type("rec a.rec b.un?(lin&{m^?: lin!int.end}).b").unwrap();
        assert!(type_equiv(&server, &expected));
    }

    #[test]
    fn un_continuation_must_loop() {
        let t = parse_mixed_type("un&{m!int.end}").unwrap();
        assert!(matches!(translate_type(&t), Err(TranslateError::UnContinuationMismatch { .. })));
    }

    #[test]
    fn inact_translates_to_inact() {
        let d = check_mixed(&Context::new(), &Process::Inact).unwrap();
        assert_eq!(translate_process(&d).unwrap(), Process::Inact);
    }

    #[test]
    fn translation_is_compositional_on_restrictions() {
        let p = parse_mixed("(new x y: lin&{m!int.end}) lin x (m!3) | lin y (m?z)").unwrap();
        let d = check_mixed(&Context::new(), &p).unwrap();
        let out = translate_process(&d).unwrap();
        let Process::New { x, y, body, .. } = &out else { panic!() };
        assert_eq!((x.to_string().as_str(), y.to_string().as_str()), ("x", "y"));
        assert!(matches!(**body, Process::Par { .. }));
        assert!(congruent(&out, &translate_process(&d).unwrap()));
    }
}
