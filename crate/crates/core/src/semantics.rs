//! One-step reduction, bounded exploration and barbs.
//!
//! Redexes are looked up on the flattened form of a process: every
//! restriction hoisted to the top and the parallel threads listed. That
//! form is structurally congruent to the process, so searching it covers
//! the structural rule without rewriting modulo congruence.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Display;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{
    canonicalize, flatten, Action, Choice, ClassicalAction, ClassicalProcess, Comm, Flat, Label, MixedProcess, Name,
    Polarity, Process, Qualifier, Value, View,
};
use crate::types::{unfold, ClassicalType, MixedType, SessionType};
use crate::typing::{self, Context, TypeError, TypedAction};

/// Which mixed reduction rules apply. `M0` leaves out the rules where a
/// linear choice meets an unrestricted one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    M0,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StepRule {
    IfT,
    IfF,
    LinLin,
    LinUn,
    UnLin,
    UnUn,
    LinCom,
    UnCom,
    Case,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ReductionStep<A: Action> {
    pub rule: StepRule,
    /// The restricted pair the step communicates on, as `(x, y)` in `(new x y)`.
    pub channels: Option<(Name, Name)>,
    pub label: Option<Label>,
    pub result: Process<A>,
}

impl<A: Action> ReductionStep<A> {
    /// `xy` for a communication on `(new x y)`, `s3t3` for generated ends,
    /// and the rule name for conditionals.
    pub fn tag(&self) -> String {
        match &self.channels {
            Some((x, y)) => format!("{}{}", x.plain(false), y.plain(false)),
            None => format!("{:?}", self.rule),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Trace<A: Action> {
    pub start: Process<A>,
    pub steps: Vec<ReductionStep<A>>,
}

impl<A: Action> Trace<A> {
    pub fn empty(start: Process<A>) -> Self {
        Trace { start, steps: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn end(&self) -> &Process<A> {
        self.steps.last().map_or(&self.start, |s| &s.result)
    }

    pub fn tags(&self) -> Vec<String> {
        self.steps.iter().map(ReductionStep::tag).collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemanticsError {
    #[error("ill-typed process: {0}")]
    IllTyped(#[from] TypeError),
}

/// One interaction between a thread on one end of a channel and a thread
/// on the other: the rule, the label, and what each thread becomes.
pub struct Interaction<A: Action> {
    pub rule: StepRule,
    pub label: Option<Label>,
    pub left: Process<A>,
    pub right: Process<A>,
}

/// The communication rules of a calculus. `interact(a, b)` covers the
/// orientation where `a` is the sending or selecting side.
pub trait Reduce: Action {
    fn interact(a: &Self, b: &Self, mode: Mode) -> Vec<Interaction<Self>>;

    /// The annotation of `(new x y: T)` after a communication on it, so
    /// that reducts stay typable. `x_acts` tells whether `x` was the
    /// sending or selecting end.
    fn advance(ty: &Self::Type, label: Option<&Label>, x_acts: bool) -> Option<Self::Type>;
}

impl Reduce for Choice {
    fn interact(a: &Choice, b: &Choice, mode: Mode) -> Vec<Interaction<Choice>> {
        let rule = match (a.q, b.q) {
            (Qualifier::Lin, Qualifier::Lin) => StepRule::LinLin,
            (Qualifier::Lin, Qualifier::Un) => StepRule::LinUn,
            (Qualifier::Un, Qualifier::Lin) => StepRule::UnLin,
            (Qualifier::Un, Qualifier::Un) => StepRule::UnUn,
        };
        if mode == Mode::M0 && matches!(rule, StepRule::LinUn | StepRule::UnLin) {
            return Vec::new();
        }
        let persist = |q: Qualifier, c: &Choice, p: MixedProcess| match q {
            Qualifier::Lin => p,
            Qualifier::Un => Process::par(Process::act(c.clone()), p),
        };
        let mut out = Vec::new();
        for ba in &a.branches {
            let Comm::Out { payload } = &ba.comm else { continue };
            for bb in &b.branches {
                let Comm::In { binder } = &bb.comm else { continue };
                if ba.label != bb.label {
                    continue;
                }
                out.push(Interaction {
                    rule,
                    label: Some(ba.label.clone()),
                    left: persist(a.q, a, ba.cont.clone()),
                    right: persist(b.q, b, bb.cont.substitute(payload, binder)),
                });
            }
        }
        out
    }

    fn advance(ty: &MixedType, label: Option<&Label>, x_acts: bool) -> Option<MixedType> {
        let (q, _, branches) = ty.as_choice()?;
        if q == Qualifier::Un {
            return Some(ty.clone());
        }
        let polarity = if x_acts { Polarity::Out } else { Polarity::In };
        let label = label?;
        branches.into_iter().find(|b| b.label == *label && b.polarity == polarity).map(|b| b.cont)
    }
}

impl Reduce for ClassicalAction {
    fn interact(a: &ClassicalAction, b: &ClassicalAction, _mode: Mode) -> Vec<Interaction<ClassicalAction>> {
        match (a, b) {
            (ClassicalAction::Send { payload, cont, .. }, ClassicalAction::Receive { q, binder, cont: body, .. }) => {
                let received = body.substitute(payload, binder);
                let (rule, right) = match q {
                    Qualifier::Lin => (StepRule::LinCom, received),
                    Qualifier::Un => (StepRule::UnCom, Process::par(Process::act(b.clone()), received)),
                };
                vec![Interaction { rule, label: None, left: (**cont).clone(), right }]
            }
            (ClassicalAction::Select { label, cont, .. }, ClassicalAction::Case { arms, .. }) => arms
                .get(label)
                .map(|arm| Interaction {
                    rule: StepRule::Case,
                    label: Some(label.clone()),
                    left: (**cont).clone(),
                    right: arm.clone(),
                })
                .into_iter()
                .collect(),
            _ => Vec::new(),
        }
    }

    fn advance(ty: &ClassicalType, label: Option<&Label>, _x_acts: bool) -> Option<ClassicalType> {
        match unfold(ty) {
            ClassicalType::Comm { q: Qualifier::Un, .. } => Some(ty.clone()),
            ClassicalType::Comm { cont, .. } => Some(*cont),
            ClassicalType::Choice { q: Qualifier::Un, .. } => Some(ty.clone()),
            ClassicalType::Choice { arms, .. } => arms.get(label?).cloned(),
            _ => None,
        }
    }
}

/// All one-step reducts, one per distinct (rule, channels, label, result
/// up to `≡`), in a deterministic order.
pub fn reduce<A: Reduce>(p: &Process<A>, mode: Mode) -> Vec<ReductionStep<A>> {
    let flat = flatten(p);
    let mut steps = Vec::new();
    let mut seen = BTreeSet::new();
    let mut push = |step: ReductionStep<A>| {
        let key = (step.rule, step.channels.clone(), step.label.clone(), canonicalize(&step.result));
        if seen.insert(key) {
            steps.push(step);
        }
    };

    for (i, t) in flat.threads.iter().enumerate() {
        if let Process::If { cond, then_branch, else_branch } = t {
            let (rule, next) = match cond {
                Value::True => (StepRule::IfT, then_branch),
                Value::False => (StepRule::IfF, else_branch),
                _ => continue,
            };
            push(ReductionStep { rule, channels: None, label: None, result: replace(&flat, &[(i, (**next).clone())]) });
        }
    }

    for (ri, r) in flat.restrictions.iter().enumerate() {
        for (i, ti) in flat.threads.iter().enumerate() {
            let Process::Act { action: a } = ti else { continue };
            let other = if *a.subject() == r.x {
                &r.y
            } else if *a.subject() == r.y {
                &r.x
            } else {
                continue;
            };
            for (j, tj) in flat.threads.iter().enumerate() {
                let Process::Act { action: b } = tj else { continue };
                if i == j || b.subject() != other {
                    continue;
                }
                for it in A::interact(a, b, mode) {
                    let mut next = flat.clone();
                    if let Some(ty) = A::advance(&r.ty, it.label.as_ref(), *a.subject() == r.x) {
                        next.restrictions[ri].ty = ty;
                    }
                    push(ReductionStep {
                        rule: it.rule,
                        channels: Some((r.x.clone(), r.y.clone())),
                        label: it.label,
                        result: replace(&next, &[(i, it.left), (j, it.right)]),
                    });
                }
            }
        }
    }
    steps
}

fn replace<A: Action>(flat: &Flat<A>, with: &[(usize, Process<A>)]) -> Process<A> {
    let mut threads = flat.threads.clone();
    for (i, p) in with {
        threads[*i] = p.clone();
    }
    Flat { restrictions: flat.restrictions.clone(), threads }.rebuild()
}

pub fn reduce_mixed(p: &MixedProcess, mode: Mode) -> Vec<ReductionStep<Choice>> {
    reduce(p, mode)
}

pub fn reduce_classical(p: &ClassicalProcess) -> Vec<ReductionStep<ClassicalAction>> {
    reduce(p, Mode::Full)
}

// ---------------------------------------------------------- exploration

/// Upper bound on distinct states visited by one exploration.
pub const STATE_LIMIT: usize = 50_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub rule: StepRule,
    pub tag: String,
    pub label: Option<Label>,
}

/// The reachable state graph up to a depth, states identified up to `≡`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Exploration<A: Action> {
    pub mode: Mode,
    pub depth_limit: usize,
    /// A representative of each state, as first reached.
    pub states: Vec<Process<A>>,
    /// Canonical form of each state.
    pub canon: Vec<Process<A>>,
    /// BFS distance from the start.
    pub depth: Vec<usize>,
    pub edges: Vec<Edge>,
    /// Some state at the depth limit still had successors, or the state
    /// limit was hit.
    pub truncated: bool,
}

pub fn explore<A: Reduce>(p: &Process<A>, depth_limit: usize, mode: Mode) -> Exploration<A> {
    let mut ex = Exploration {
        mode,
        depth_limit,
        states: vec![p.clone()],
        canon: vec![canonicalize(p)],
        depth: vec![0],
        edges: Vec::new(),
        truncated: false,
    };
    let mut index: HashMap<Process<A>, usize> = HashMap::new();
    index.insert(ex.canon[0].clone(), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let steps = reduce(&ex.states[s], mode);
        if ex.depth[s] >= depth_limit {
            ex.truncated |= !steps.is_empty();
            continue;
        }
        for step in steps {
            let c = canonicalize(&step.result);
            let to = match index.get(&c) {
                Some(&to) => to,
                None => {
                    if ex.states.len() >= STATE_LIMIT {
                        ex.truncated = true;
                        continue;
                    }
                    let to = ex.states.len();
                    ex.states.push(step.result.clone());
                    ex.canon.push(c.clone());
                    ex.depth.push(ex.depth[s] + 1);
                    index.insert(c, to);
                    queue.push_back(to);
                    to
                }
            };
            ex.edges.push(Edge { from: s, to, rule: step.rule, tag: step.tag(), label: step.label.clone() });
        }
    }
    ex
}

impl<A: Reduce> Exploration<A> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// States without successors inside the explored graph that are not cut
    /// off by the depth limit.
    pub fn terminal_states(&self) -> Vec<usize> {
        let has_out: BTreeSet<usize> = self.edges.iter().map(|e| e.from).collect();
        (0..self.len()).filter(|s| !has_out.contains(s) && self.depth[*s] < self.depth_limit).collect()
    }

    /// The first state, in BFS order, satisfying `pred`.
    pub fn find(&self, mut pred: impl FnMut(&Process<A>) -> bool) -> Option<usize> {
        (0..self.len()).find(|&s| pred(&self.states[s]))
    }

    /// Every shortest path from the start to `target`, at most `cap` of
    /// them, in a deterministic order.
    pub fn shortest_paths(&self, target: usize, cap: usize) -> Vec<Vec<&Edge>> {
        let mut into: BTreeMap<usize, Vec<&Edge>> = BTreeMap::new();
        for e in &self.edges {
            if self.depth[e.to] == self.depth[e.from] + 1 {
                into.entry(e.to).or_default().push(e);
            }
        }
        let mut out = Vec::new();
        let mut path = Vec::new();
        back(target, &into, &mut path, &mut out, cap);
        out
    }

    /// Rebuilds a trace along a path, replaying each step so that every
    /// step's source is exactly the previous step's result.
    pub fn replay(&self, path: &[&Edge]) -> Trace<A> {
        let mut trace = Trace::empty(self.states[0].clone());
        for e in path {
            let cur = trace.end().clone();
            let step = reduce(&cur, self.mode)
                .into_iter()
                .find(|s| {
                    s.rule == e.rule
                        && s.tag() == e.tag
                        && s.label == e.label
                        && canonicalize(&s.result) == self.canon[e.to]
                })
                .expect("explored edges replay");
            trace.steps.push(step);
        }
        trace
    }

    /// A shortest trace to `target`.
    pub fn trace_to(&self, target: usize) -> Trace<A> {
        let path = self.shortest_paths(target, 1).into_iter().next().unwrap_or_default();
        self.replay(&path)
    }

    /// Maximal traces of length at most the depth limit, following
    /// shortest-path edges only, at most `cap` of them.
    pub fn maximal_traces(&self, cap: usize) -> Vec<Trace<A>> {
        let mut forward: BTreeMap<usize, Vec<&Edge>> = BTreeMap::new();
        for e in &self.edges {
            if self.depth[e.to] == self.depth[e.from] + 1 {
                forward.entry(e.from).or_default().push(e);
            }
        }
        let mut paths = Vec::new();
        fn go<'e>(
            s: usize,
            forward: &BTreeMap<usize, Vec<&'e Edge>>,
            path: &mut Vec<&'e Edge>,
            out: &mut Vec<Vec<&'e Edge>>,
            cap: usize,
        ) {
            if out.len() >= cap {
                return;
            }
            match forward.get(&s) {
                None => out.push(path.clone()),
                Some(es) => {
                    for e in es {
                        path.push(e);
                        go(e.to, forward, path, out, cap);
                        path.pop();
                    }
                }
            }
        }
        go(0, &forward, &mut Vec::new(), &mut paths, cap);
        paths.iter().map(|p| self.replay(p)).collect()
    }
}

fn back<'e>(
    s: usize,
    into: &BTreeMap<usize, Vec<&'e Edge>>,
    path: &mut Vec<&'e Edge>,
    out: &mut Vec<Vec<&'e Edge>>,
    cap: usize,
) {
    if out.len() >= cap {
        return;
    }
    if s == 0 {
        out.push(path.iter().rev().copied().collect());
        return;
    }
    for e in into.get(&s).into_iter().flatten() {
        path.push(e);
        back(e.from, into, path, out, cap);
        path.pop();
    }
}

// --------------------------------------------------------------- barbs

/// Whether a top-level thread exhibits a barb on its subject.
pub trait Barbed: TypedAction {
    fn barb(action: &Self, ctx: &Context<Self::Type>) -> bool;
}

impl Barbed for Choice {
    /// Only types reveal barbs: the subject must be typed by an internal
    /// choice.
    fn barb(action: &Choice, ctx: &Context<MixedType>) -> bool {
        ctx.get(&action.subject).and_then(MixedType::as_choice).is_some_and(|(_, view, _)| view == View::Internal)
    }
}

impl Barbed for ClassicalAction {
    fn barb(action: &ClassicalAction, _ctx: &Context<ClassicalType>) -> bool {
        matches!(action, ClassicalAction::Send { .. } | ClassicalAction::Select { .. })
    }
}

fn barbs_unchecked<A: Barbed>(ctx: &Context<A::Type>, p: &Process<A>) -> BTreeSet<Name> {
    let flat = flatten(p);
    let restricted: BTreeSet<&Name> = flat.restrictions.iter().flat_map(|r| [&r.x, &r.y]).collect();
    flat.threads
        .iter()
        .filter_map(|t| match t {
            Process::Act { action } if !restricted.contains(action.subject()) && A::barb(action, ctx) => {
                Some(action.subject().clone())
            }
            _ => None,
        })
        .collect()
}

/// The names `P` has a barb in, for `Γ ⊢ P`.
pub fn barbs<A: Barbed>(ctx: &Context<A::Type>, p: &Process<A>) -> Result<BTreeSet<Name>, SemanticsError>
where
    A::Type: SessionType + Display,
{
    typing::check(ctx, p)?;
    Ok(barbs_unchecked(ctx, p))
}

/// A shortest trace to a state with a barb in `x`, within `depth_limit`.
pub fn weak_barb<A: Barbed + Reduce>(
    ctx: &Context<A::Type>,
    p: &Process<A>,
    x: &Name,
    depth_limit: usize,
) -> Result<Option<Trace<A>>, SemanticsError>
where
    A::Type: SessionType + Display,
{
    typing::check(ctx, p)?;
    let ex = explore(p, depth_limit, Mode::M0);
    Ok(ex.find(|s| barbs_unchecked(ctx, s).contains(x)).map(|s| ex.trace_to(s)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_classical, parse_mixed, parse_mixed_type};
    use crate::syntax::{congruent, ext_congruent};

    #[test]
    fn mixed_choice_reduces_along_each_matching_label() {
        let p = parse_mixed("(new x y: lin&{m!int.end, n?int.end}) lin x (m!3 + n?z) | lin y (m?w + n!5)").unwrap();
        let steps = reduce_mixed(&p, Mode::M0);
        assert_eq!(steps.len(), 2);
        assert!(steps.iter().all(|s| s.rule == StepRule::LinLin && s.tag() == "xy"));
    }

    #[test]
    fn unrestricted_choices_persist() {
        let p = parse_mixed("(new x y: rec a.un&{m!int.a}) un x (m!3 + m!5) | un y (m?z.lin w (k!z))").unwrap();
        let steps = reduce_mixed(&p, Mode::M0);
        assert_eq!(steps.len(), 2);
        for s in &steps {
            assert_eq!(flatten(&s.result).threads.len(), 3);
        }
    }

    #[test]
    fn m0_excludes_mixed_qualifiers() {
        let p = parse_mixed("(new x y: rec a.un&{m!int.a}) un x (m!3) | lin y (m?z)").unwrap();
        assert!(reduce_mixed(&p, Mode::M0).is_empty());
        assert_eq!(reduce_mixed(&p, Mode::Full).len(), 1);
    }

    #[test]
    fn inaction_is_stuck() {
        assert!(reduce_mixed(&Process::Inact, Mode::Full).is_empty());
        let ex = explore(&MixedProcess::Inact, 5, Mode::M0);
        assert_eq!(ex.maximal_traces(10), vec![Trace::empty(Process::Inact)]);
    }

    #[test]
    fn classical_rules() {
        let p = parse_classical("(new x y: lin!int.end) x!3 | lin y?z").unwrap();
        let steps = reduce_classical(&p);
        assert_eq!(steps.len(), 1);
        assert!(congruent(&steps[0].result, &Process::Inact));

        let p = parse_classical("(new x y: lin+{l: end, m: end}) x select l | case y of {l -> 0, m -> 0}").unwrap();
        assert_eq!(reduce_classical(&p)[0].rule, StepRule::Case);

        let p = parse_classical("(new u v: *!unit) u!() | un v?z").unwrap();
        let step = &reduce_classical(&p)[0];
        assert_eq!(step.rule, StepRule::UnCom);
        assert!(!congruent(&step.result, &Process::Inact));
        assert!(!ext_congruent(&step.result, &Process::Inact));
    }

    #[test]
    fn conditionals() {
        let p = parse_mixed("if true then 0 else lin x (m!1)").unwrap();
        let steps = reduce_mixed(&p, Mode::M0);
        assert_eq!(steps[0].rule, StepRule::IfT);
        assert!(steps[0].result.is_inact());
    }

    #[test]
    fn barbs_need_internal_choice_types() {
        let p = parse_mixed("lin y (m?z)").unwrap();
        let ctx = Context::from_entries([(Name::user("y"), parse_mixed_type("lin+{m?int.end}").unwrap())]);
        assert_eq!(barbs(&ctx, &p).unwrap(), [Name::user("y")].into_iter().collect());
        let ctx = Context::from_entries([(Name::user("y"), parse_mixed_type("lin&{m?int.end}").unwrap())]);
        assert!(barbs(&ctx, &p).unwrap().is_empty());
    }

    #[test]
    fn weak_barb_immediate() {
        let p = parse_classical("x!3").unwrap();
        let ctx =
            Context::from_entries([(Name::user("x"), crate::parse::parse_classical_type("lin!int.end").unwrap())]);
        let w = weak_barb(&ctx, &p, &Name::user("x"), 0).unwrap().unwrap();
        assert!(w.is_empty());
    }
}
