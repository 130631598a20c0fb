//! Executable checks of the correctness results for the translation, run
//! on concrete programs with bounded search.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::semantics::{explore, reduce_classical, reduce_mixed, weak_barb, Barbed, Mode, Trace};
use crate::syntax::{
    canonicalize, canonicalize_ext, ext_congruent, ClassicalAction, ClassicalProcess, Name, Process, Value,
};
use crate::translate::{build_ndchoice, translate_context, translate_process, FreshNameSource};
use crate::types::{ClassicalType, MixedType};
use crate::typing::classical::check_classical;
use crate::typing::mixed::check_mixed;
use crate::typing::Context;

/// Depth used when none is given.
pub const DEFAULT_DEPTH: usize = 12;

/// Shortest interleavings recorded per completeness witness.
const INTERLEAVING_CAP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    TypeSoundness,
    #[serde(rename = "ndchoice_typing")]
    NdChoiceTyping,
    #[serde(rename = "ndchoice_reduction")]
    NdChoiceReduction,
    BarbPreservation,
    Completeness,
    SoundnessCounterexample,
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Claim::TypeSoundness => "type-soundness",
            Claim::NdChoiceTyping => "ndchoice-typing",
            Claim::NdChoiceReduction => "ndchoice-reduction",
            Claim::BarbPreservation => "barb-preservation",
            Claim::Completeness => "completeness",
            Claim::SoundnessCounterexample => "soundness-counterexample",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail {
        diagnostic: String,
    },
    /// A bounded search ran out of depth before settling the claim.
    Inconclusive {
        detail: String,
    },
}

impl Outcome {
    pub fn is_pass(&self) -> bool {
        matches!(self, Outcome::Pass)
    }

    /// 0 for pass, 1 for fail, 3 for inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail { .. } => 1,
            Outcome::Inconclusive { .. } => 3,
        }
    }
}

/// The result of checking one claim on one subject. Witness traces run in
/// the classical calculus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim: Claim,
    pub subject: String,
    #[serde(flatten)]
    pub outcome: Outcome,
    pub witnesses: Vec<Trace<ClassicalAction>>,
    /// Channel tags of each witness, in order.
    pub witness_tags: Vec<Vec<String>>,
    /// Completeness only: how each source step was matched.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matches: Vec<StepMatch>,
    pub notes: Vec<String>,
}

/// A source step and the shortest classical runs reaching its image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepMatch {
    pub step: String,
    pub interleavings: Vec<Vec<String>>,
}

impl VerificationReport {
    fn new(claim: Claim, subject: impl Into<String>) -> Self {
        VerificationReport {
            claim,
            subject: subject.into(),
            outcome: Outcome::Pass,
            witnesses: Vec::new(),
            witness_tags: Vec::new(),
            matches: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn fail(mut self, diagnostic: impl Into<String>) -> Self {
        self.outcome = Outcome::Fail { diagnostic: diagnostic.into() };
        self
    }

    fn witness(&mut self, trace: Trace<ClassicalAction>) {
        self.witness_tags.push(trace.tags());
        self.witnesses.push(trace);
    }

    /// Folds a sequence of outcomes: any failure wins, then any
    /// inconclusive.
    fn merge(&mut self, outcome: Outcome) {
        match (&self.outcome, outcome) {
            (Outcome::Fail { .. }, _) => {}
            (_, o @ Outcome::Fail { .. }) => self.outcome = o,
            (Outcome::Pass, o) => self.outcome = o,
            _ => {}
        }
    }

    pub fn one_line(&self) -> String {
        let verdict = match &self.outcome {
            Outcome::Pass => "pass".to_string(),
            Outcome::Fail { diagnostic } => format!("FAIL: {diagnostic}"),
            Outcome::Inconclusive { detail } => format!("inconclusive: {detail}"),
        };
        format!("{} {}: {}", self.claim, self.subject, verdict)
    }
}

/// Typing and translation of a source program.
struct Translated {
    ctx: Context<ClassicalType>,
    process: ClassicalProcess,
}

fn translate(ctx: &Context<MixedType>, p: &Process<crate::syntax::Choice>) -> Result<Translated, String> {
    let d = check_mixed(ctx, p).map_err(|e| format!("source is ill-typed: {e}"))?;
    let process = translate_process(&d).map_err(|e| format!("translation failed: {e}"))?;
    let ctx = translate_context(ctx).map_err(|e| format!("context translation failed: {e}"))?;
    Ok(Translated { ctx, process })
}

/// `Γ ⊢ P` implies `⟦Γ⟧ ⊢ ⟦P⟧`.
pub fn check_type_soundness(
    subject: &str,
    ctx: &Context<MixedType>,
    p: &Process<crate::syntax::Choice>,
) -> VerificationReport {
    let report = VerificationReport::new(Claim::TypeSoundness, subject);
    let t = match translate(ctx, p) {
        Ok(t) => t,
        Err(e) => return report.fail(e),
    };
    match check_classical(&t.ctx, &t.process) {
        Ok(_) => report,
        Err(e) => report.fail(format!("translation is ill-typed: {e}")),
    }
}

/// If every part is typed under `Γ`, so is their nondeterministic choice.
pub fn check_ndchoice_typing(
    subject: &str,
    ctx: &Context<ClassicalType>,
    parts: &[ClassicalProcess],
) -> VerificationReport {
    let report = VerificationReport::new(Claim::NdChoiceTyping, subject);
    for (i, part) in parts.iter().enumerate() {
        if let Err(e) = check_classical(ctx, part) {
            return report.fail(format!("part {} is not typed under the context: {e}", i + 1));
        }
    }
    let avoid: BTreeSet<Name> = parts.iter().flat_map(|p| p.all_names()).chain(ctx.names()).collect();
    let nd = match build_ndchoice(parts.to_vec(), &mut FreshNameSource::avoiding(&avoid)) {
        Ok(nd) => nd,
        Err(e) => return report.fail(e.to_string()),
    };
    match check_classical(ctx, &nd) {
        Ok(_) => report,
        Err(e) => report.fail(format!("the choice is ill-typed: {e}")),
    }
}

/// The marker processes `w!1, ..., w!n` the reduction check races.
pub fn ndchoice_markers(n: usize) -> Vec<ClassicalProcess> {
    (1..=n).map(|i| ClassicalProcess::send(Name::user("w"), Value::Int { value: i as i64 }, Process::Inact)).collect()
}

/// Every one-step reduct of a race between `n` markers is `≍` to one of
/// them, and each marker is reached.
pub fn check_ndchoice_reduction(n: usize) -> VerificationReport {
    let report = VerificationReport::new(Claim::NdChoiceReduction, format!("n={n}"));
    let markers = ndchoice_markers(n);
    let nd = match build_ndchoice(markers.clone(), &mut FreshNameSource::new()) {
        Ok(nd) => nd,
        Err(e) => return report.fail(e.to_string()),
    };
    let mut report = report;
    let steps = reduce_classical(&nd);
    let mut reached = vec![false; n];
    for step in &steps {
        match markers.iter().position(|m| ext_congruent(&step.result, m)) {
            Some(k) => reached[k] = true,
            None => {
                return report
                    .fail(format!("a reduct matches no part: {}", crate::print::print_classical(&step.result)))
            }
        }
    }
    if let Some(k) = reached.iter().position(|r| !r) {
        return report.fail(format!("part {} is never chosen", k + 1));
    }
    for (k, marker) in markers.iter().enumerate() {
        let step = steps.iter().find(|s| ext_congruent(&s.result, marker)).expect("reached above").clone();
        if canonicalize(&step.result) != canonicalize(marker) {
            report
                .notes
                .push(format!("part {} leaves garbage that is only collected modulo extended congruence", k + 1));
        }
        report.witness(Trace { start: nd.clone(), steps: vec![step] });
    }
    report
}

/// Each barb of `P` is a weak barb of `⟦P⟧`.
pub fn check_barb_preservation(
    subject: &str,
    ctx: &Context<MixedType>,
    p: &Process<crate::syntax::Choice>,
    depth: usize,
) -> VerificationReport {
    let mut report = VerificationReport::new(Claim::BarbPreservation, subject);
    let source_barbs = match crate::semantics::barbs(ctx, p) {
        Ok(b) => b,
        Err(e) => return report.fail(e.to_string()),
    };
    let t = match translate(ctx, p) {
        Ok(t) => t,
        Err(e) => return report.fail(e),
    };
    if source_barbs.is_empty() {
        report.notes.push("the source has no barbs".into());
    }
    for x in &source_barbs {
        match weak_barb(&t.ctx, &t.process, x, depth) {
            Ok(Some(trace)) => report.witness(trace),
            Ok(None) => {
                let outcome = if explore(&t.process, depth, Mode::M0).truncated {
                    Outcome::Inconclusive { detail: format!("no barb in {x} within depth {depth}") }
                } else {
                    Outcome::Fail { diagnostic: format!("the translation never exhibits a barb in {x}") }
                };
                report.merge(outcome);
            }
            Err(e) => report.merge(Outcome::Fail { diagnostic: format!("translation: {e}") }),
        }
    }
    report
}

/// Every M0 step `P → P'` is matched by `⟦P⟧ ⇒ Q` with `Q ≍ ⟦P'⟧`, where
/// `⟦P'⟧` translates `P'` retyped under the same context.
///
/// After a step between unrestricted choices the target re-translates the
/// surviving choices with fresh loop channels. The classical run reaches
/// the same shape once both loops have been re-armed, so the comparison
/// needs no administrative step beyond alpha-conversion of generated names.
pub fn check_completeness(
    subject: &str,
    ctx: &Context<MixedType>,
    p: &Process<crate::syntax::Choice>,
    depth: usize,
) -> VerificationReport {
    let mut report = VerificationReport::new(Claim::Completeness, subject);
    let source = match translate(ctx, p) {
        Ok(t) => t,
        Err(e) => return report.fail(e),
    };
    let steps = reduce_mixed(p, Mode::M0);
    if steps.is_empty() {
        report.notes.push("the source has no reductions".into());
        return report;
    }
    let ex = explore(&source.process, depth, Mode::M0);
    for (i, step) in steps.iter().enumerate() {
        let target = match translate(ctx, &step.result) {
            Ok(t) => canonicalize_ext(&t.process),
            Err(e) => {
                report.merge(Outcome::Fail { diagnostic: format!("reduct {} of the source: {e}", i + 1) });
                continue;
            }
        };
        if step.rule == crate::semantics::StepRule::UnUn {
            report
                .notes
                .push(format!("step {} is between unrestricted choices; matched at the re-armed loop state", i + 1));
        }
        let found = (0..ex.len()).find(|&s| canonicalize_ext(&ex.canon[s]) == target);
        match found {
            Some(s) => {
                let paths = ex.shortest_paths(s, INTERLEAVING_CAP);
                let interleavings: Vec<Vec<String>> =
                    paths.iter().map(|p| p.iter().map(|e| e.tag.clone()).collect()).collect();
                let shown: Vec<String> = interleavings.iter().map(|t| t.join(" ")).collect();
                report.notes.push(format!("step {} ({}): shortest matches [{}]", i + 1, step.tag(), shown.join("; ")));
                report.matches.push(StepMatch { step: step.tag(), interleavings });
                report.witness(ex.replay(&paths[0]));
            }
            None if ex.truncated => report.merge(Outcome::Inconclusive {
                detail: format!("step {} ({}) unmatched within depth {depth}", i + 1, step.tag()),
            }),
            None => report.merge(Outcome::Fail {
                diagnostic: format!("step {} ({}) has no classical counterpart", i + 1, step.tag()),
            }),
        }
    }
    report
}

/// The translation takes a step the source cannot match: passes when
/// `⟦P⟧` reduces while `P` is stuck in M0.
pub fn check_soundness_counterexample(
    subject: &str,
    ctx: &Context<MixedType>,
    p: &Process<crate::syntax::Choice>,
) -> VerificationReport {
    let mut report = VerificationReport::new(Claim::SoundnessCounterexample, subject);
    let t = match translate(ctx, p) {
        Ok(t) => t,
        Err(e) => return report.fail(e),
    };
    let source_steps = reduce_mixed(p, Mode::M0);
    if !source_steps.is_empty() {
        return report.fail(format!("the source reduces ({} steps)", source_steps.len()));
    }
    let target_steps = reduce_classical(&t.process);
    let Some(step) = target_steps.into_iter().next() else {
        return report.fail("the translation has no reduction either");
    };
    report.witness(Trace { start: t.process, steps: vec![step] });
    report
}

/// Runs a per-program claim. The NDChoice claims do not take a program
/// and fail here.
pub fn run_claim(
    claim: Claim,
    subject: &str,
    ctx: &Context<MixedType>,
    p: &Process<crate::syntax::Choice>,
    depth: usize,
) -> VerificationReport {
    match claim {
        Claim::TypeSoundness => check_type_soundness(subject, ctx, p),
        Claim::BarbPreservation => check_barb_preservation(subject, ctx, p, depth),
        Claim::Completeness => check_completeness(subject, ctx, p, depth),
        Claim::SoundnessCounterexample => check_soundness_counterexample(subject, ctx, p),
        Claim::NdChoiceTyping | Claim::NdChoiceReduction => {
            VerificationReport::new(claim, subject).fail("this claim is not about a single program")
        }
    }
}

/// `un y (m?z.0)` with `y: rec a.un+{m?int.a}`.
pub fn soundness_counterexample() -> (Context<MixedType>, Process<crate::syntax::Choice>) {
    let ty = crate::parse::parse_mixed_type("rec a.un+{m?int.a}").expect("fixed type");
    let p = crate::parse::parse_mixed("un y (m?z)").expect("fixed program");
    (Context::from_entries([(Name::user("y"), ty)]), p)
}

/// The names a process has barbs in, as the verifier sees them.
pub fn source_barbs<A: Barbed>(ctx: &Context<A::Type>, p: &Process<A>) -> BTreeSet<Name>
where
    A::Type: crate::types::SessionType + fmt::Display,
{
    crate::semantics::barbs(ctx, p).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_mixed, parse_mixed_type};

    fn closed(src: &str) -> (Context<MixedType>, Process<crate::syntax::Choice>) {
        (Context::new(), parse_mixed(src).unwrap())
    }

    fn open(x: &str, ty: &str, src: &str) -> (Context<MixedType>, Process<crate::syntax::Choice>) {
        (Context::from_entries([(Name::user(x), parse_mixed_type(ty).unwrap())]), parse_mixed(src).unwrap())
    }

    #[test]
    fn soundness_of_a_linear_exchange() {
        let (g, p) = closed("(new x y: lin&{m!int.end, n?bool.end}) lin x (m!3 + n?w) | lin y (m?z)");
        assert_eq!(check_type_soundness("t", &g, &p).outcome, Outcome::Pass);
    }

    #[test]
    fn soundness_fails_at_the_source() {
        let (g, p) = closed("lin x (m!3)");
        assert!(matches!(check_type_soundness("t", &g, &p).outcome, Outcome::Fail { .. }));
    }

    #[test]
    fn ndchoice_reduction_small() {
        for n in 1..=4 {
            let r = check_ndchoice_reduction(n);
            assert!(r.outcome.is_pass(), "{}", r.one_line());
            assert_eq!(r.witnesses.len(), n);
        }
    }

    #[test]
    fn completeness_linear_witness_is_five_steps() {
        let (g, p) = closed("(new x y: lin&{m!int.end, n?bool.end}) lin x (m!3 + n?w) | lin y (m?z)");
        let r = check_completeness("t", &g, &p, DEFAULT_DEPTH);
        assert!(r.outcome.is_pass(), "{}", r.one_line());
        assert_eq!(r.witnesses.len(), 1);
        assert_eq!(r.witnesses[0].len(), 5);
    }

    #[test]
    fn completeness_unrestricted() {
        let (g, p) = closed("(new x y: rec a.un&{m!int.a}) un x (m!3 + m!5) | un y (m?z)");
        let r = check_completeness("t", &g, &p, DEFAULT_DEPTH);
        assert!(r.outcome.is_pass(), "{}", r.one_line());
        assert_eq!(r.witnesses.len(), 1);

        // the received value is observable, so the two outcomes differ
        let (g, p) =
            open("w", "rec c.un+{k!int.c}", "(new x y: rec a.un&{m!int.a}) un x (m!3 + m!5) | un y (m?z.un w (k!z))");
        let r = check_completeness("t", &g, &p, DEFAULT_DEPTH);
        assert!(r.outcome.is_pass(), "{}", r.one_line());
        assert_eq!(r.witnesses.len(), 2);
    }

    #[test]
    fn completeness_conditional_is_one_step() {
        let (g, p) = closed("if true then 0 else 0");
        let r = check_completeness("t", &g, &p, DEFAULT_DEPTH);
        assert!(r.outcome.is_pass());
        assert_eq!(r.witnesses[0].len(), 1);
    }

    #[test]
    fn barbs_of_open_choices() {
        let (g, p) = open("y", "lin+{m?int.end}", "lin y (m?z)");
        let r = check_barb_preservation("t", &g, &p, DEFAULT_DEPTH);
        assert!(r.outcome.is_pass(), "{}", r.one_line());
        assert!(r.witnesses[0].len() <= 2);

        let (g, p) = open("y", "rec a.un+{m?int.a}", "un y (m?z)");
        let r = check_barb_preservation("t", &g, &p, DEFAULT_DEPTH);
        assert!(r.outcome.is_pass(), "{}", r.one_line());
        assert_eq!(r.witnesses.len(), 1);
    }

    #[test]
    fn counterexample_and_its_specificity() {
        let (g, p) = soundness_counterexample();
        let r = check_soundness_counterexample("t", &g, &p);
        assert!(r.outcome.is_pass());
        assert_eq!(r.witness_tags[0][0].chars().next(), Some('u'));
        let r = check_soundness_counterexample("t", &Context::new(), &Process::Inact);
        assert!(matches!(r.outcome, Outcome::Fail { .. }));
    }

    #[test]
    fn reports_are_deterministic() {
        let (g, p) = closed("(new x y: lin&{m!int.end}) lin x (m!3 + m!5) | lin y (m?z)");
        let a = serde_json::to_string(&check_completeness("t", &g, &p, 8)).unwrap();
        let b = serde_json::to_string(&check_completeness("t", &g, &p, 8)).unwrap();
        assert_eq!(a, b);
    }
}
