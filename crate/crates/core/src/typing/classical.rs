use std::collections::BTreeMap;

use super::{
    check_process, check_value, fresh_binder, shared_linear, type_value, value_names, Context, Derivation, Judgement,
    Rule, TypeError, TypedAction,
};
use crate::syntax::{ClassicalAction, ClassicalProcess, Label, Name, Polarity, Qualifier, Value, View};
use crate::types::{is_un, unfold, ClassicalType};

impl TypedAction for ClassicalAction {
    fn check_action(
        ctx: &Context<ClassicalType>,
        action: &ClassicalAction,
    ) -> Result<Derivation<ClassicalAction>, TypeError> {
        match action {
            ClassicalAction::Send { subject, payload, cont } => check_send(ctx, subject, payload, cont),
            ClassicalAction::Receive { q, subject, binder, cont } => check_receive(ctx, *q, subject, binder, cont),
            ClassicalAction::Select { subject, label, cont } => check_select(ctx, subject, label, cont),
            ClassicalAction::Case { subject, arms } => check_case(ctx, subject, arms),
        }
    }

    fn dual(ty: &ClassicalType) -> Result<ClassicalType, TypeError> {
        ty.dual_of()
    }

    fn well_formed(ty: &ClassicalType) -> Result<(), TypeError> {
        ty.well_formed()
    }

    fn subtype(s: &ClassicalType, t: &ClassicalType) -> bool {
        s.subtype(t)
    }

    fn bool_type() -> ClassicalType {
        ClassicalType::Bool
    }

    fn value_type(v: &Value) -> Option<ClassicalType> {
        match v {
            Value::Unit => Some(ClassicalType::Unit),
            Value::True | Value::False => Some(ClassicalType::Bool),
            Value::Int { .. } => Some(ClassicalType::Int),
            Value::Var { .. } => None,
        }
    }
}

/// `Γ ⊢ P` in the classical calculus.
pub fn check_classical(
    ctx: &Context<ClassicalType>,
    p: &ClassicalProcess,
) -> Result<Derivation<ClassicalAction>, TypeError> {
    super::check(ctx, p)
}

type Checked = Result<Derivation<ClassicalAction>, TypeError>;

/// The subject's unfolded type, its `Var` derivation, and the context
/// split into the subject's part and the rest.
type Subject = (ClassicalType, Derivation<ClassicalAction>, Context<ClassicalType>, Context<ClassicalType>);

/// Looks up the subject, splits it off, and unfolds its type.
fn subject(ctx: &Context<ClassicalType>, x: &Name) -> Result<Subject, TypeError> {
    if !ctx.contains(x) {
        return Err(TypeError::UnboundName { name: x.to_string() });
    }
    let (g1, g2) = ctx.split(&[x.clone()].into_iter().collect());
    let (t, d) = type_value::<ClassicalAction>(&g1, &Value::var(x.clone()))?;
    Ok((unfold(&t), d, g1, g2))
}

fn mismatch(x: &Name, t: &ClassicalType, expected: &str) -> TypeError {
    TypeError::SubjectMismatch { subject: x.to_string(), ty: t.to_string(), expected: expected.into() }
}

fn node(
    rule: Rule,
    ctx: &Context<ClassicalType>,
    process: ClassicalProcess,
    premises: Vec<Derivation<ClassicalAction>>,
    split: Vec<Context<ClassicalType>>,
) -> Derivation<ClassicalAction> {
    Derivation { rule, context: ctx.clone(), judgement: Judgement::Process { process }, premises, split, choice: None }
}

fn check_send(ctx: &Context<ClassicalType>, x: &Name, v: &Value, cont: &ClassicalProcess) -> Checked {
    let (t, dx, g1, rest) = subject(ctx, x)?;
    let ClassicalType::Comm { polarity: Polarity::Out, payload, cont: u, .. } = &t else {
        return Err(mismatch(x, &t, "an output type"));
    };
    let fv = value_names(v);
    if let Some(n) = shared_linear(&rest, &fv, &cont.free_names()) {
        return Err(TypeError::LinearityError {
            name: n.to_string(),
            detail: "is both sent and used by the continuation".into(),
        });
    }
    let (g2, g3) = rest.split(&fv);
    let dv = check_value::<ClassicalAction>(&g2, v, payload)?;
    let dp = check_process(&g3.update(x, u)?, cont)?;
    let process = ClassicalProcess::send(x.clone(), v.clone(), dp.process().clone());
    Ok(node(Rule::TOut, ctx, process, vec![dx, dv, dp], vec![g1, g2, g3]))
}

fn check_receive(ctx: &Context<ClassicalType>, q: Qualifier, x: &Name, y: &Name, cont: &ClassicalProcess) -> Checked {
    let (t, dx, g1, g2) = subject(ctx, x)?;
    let ClassicalType::Comm { polarity: Polarity::In, payload, cont: u, .. } = &t else {
        return Err(mismatch(x, &t, "an input type"));
    };
    if q == Qualifier::Un && !ctx.is_un() {
        return Err(TypeError::QualifierViolation {
            subject: x.to_string(),
            detail: "a replicated input cannot use linear names".into(),
        });
    }
    let g2x = g2.update(x, u)?;
    let (z, cont) = fresh_binder(&g2x, y, cont);
    let inner = if z.is_wildcard() {
        if !is_un(payload.as_ref()) {
            return Err(TypeError::LinearityError {
                name: y.to_string(),
                detail: format!("discards a payload of linear type {payload}"),
            });
        }
        g2x
    } else {
        g2x.extend(z.clone(), payload.as_ref().clone())
    };
    let dp = check_process(&inner, &cont)?;
    let process = ClassicalProcess::receive(q, x.clone(), z, dp.process().clone());
    Ok(node(Rule::TIn, ctx, process, vec![dx, dp], vec![g1, g2]))
}

fn check_select(ctx: &Context<ClassicalType>, x: &Name, l: &Label, cont: &ClassicalProcess) -> Checked {
    let (t, dx, g1, g2) = subject(ctx, x)?;
    let ClassicalType::Choice { view: View::Internal, arms, .. } = &t else {
        return Err(mismatch(x, &t, "an internal choice"));
    };
    let Some(u) = arms.get(l) else {
        return Err(TypeError::UnknownSelectLabel { subject: x.to_string(), label: l.to_string() });
    };
    let dp = check_process(&g2.update(x, u)?, cont)?;
    let process = ClassicalProcess::select(x.clone(), l.clone(), dp.process().clone());
    Ok(node(Rule::Sel, ctx, process, vec![dx, dp], vec![g1, g2]))
}

fn check_case(ctx: &Context<ClassicalType>, x: &Name, arms: &BTreeMap<Label, ClassicalProcess>) -> Checked {
    let (t, dx, g1, g2) = subject(ctx, x)?;
    let ClassicalType::Choice { view: View::External, arms: types, .. } = &t else {
        return Err(mismatch(x, &t, "an external choice"));
    };
    if let Some(l) = types.keys().find(|l| !arms.contains_key(*l)) {
        return Err(TypeError::MissingCaseArm { subject: x.to_string(), label: l.to_string() });
    }
    if let Some(l) = arms.keys().find(|l| !types.contains_key(*l)) {
        return Err(TypeError::ExtraCaseArm { subject: x.to_string(), label: l.to_string() });
    }
    let mut premises = vec![dx];
    let mut elaborated = BTreeMap::new();
    for (l, p) in arms {
        let d = check_process(&g2.update(x, &types[l])?, p)?;
        elaborated.insert(l.clone(), d.process().clone());
        premises.push(d);
    }
    Ok(node(Rule::Branch, ctx, ClassicalProcess::case(x.clone(), elaborated), premises, vec![g1, g2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_classical, parse_classical_type};

    fn ctx(entries: &[(&str, &str)]) -> Context<ClassicalType> {
        Context::from_entries(entries.iter().map(|(x, t)| (Name::user(*x), parse_classical_type(t).unwrap())))
    }

    #[test]
    fn send_and_receive() {
        let p = parse_classical("(new x y: lin!int.end) x!3 | lin y?z").unwrap();
        let d = check_classical(&Context::new(), &p).unwrap();
        assert!(d.splits_recompose());
    }

    #[test]
    fn case_must_cover_the_type() {
        let g = ctx(&[("x", "lin&{a: end, b: end}")]);
        let p = parse_classical("case x of {a -> 0}").unwrap();
        assert!(matches!(check_classical(&g, &p), Err(TypeError::MissingCaseArm { .. })));
        let p = parse_classical("case x of {a -> 0, b -> 0, c -> 0}").unwrap();
        assert!(matches!(check_classical(&g, &p), Err(TypeError::ExtraCaseArm { .. })));
    }

    #[test]
    fn select_needs_a_known_label() {
        let g = ctx(&[("x", "lin+{a: end}")]);
        let p = parse_classical("x select b").unwrap();
        assert!(matches!(check_classical(&g, &p), Err(TypeError::UnknownSelectLabel { .. })));
    }

    #[test]
    fn replicated_input_needs_unrestricted_context() {
        let g = ctx(&[("x", "*?int"), ("w", "lin!int.end")]);
        let p = parse_classical("un x?z.w!z").unwrap();
        assert!(matches!(check_classical(&g, &p), Err(TypeError::QualifierViolation { .. })));
    }

    #[test]
    fn output_subsumes_payload() {
        let g = ctx(&[("x", "lin!(lin+{a: end}).end"), ("w", "lin+{a: end, b: end}")]);
        let p = parse_classical("x!w").unwrap();
        let d = check_classical(&g, &p).unwrap();
        assert_eq!(d.premises[1].rule, Rule::Subt);
    }
}
