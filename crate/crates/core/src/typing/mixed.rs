use std::collections::BTreeSet;

use super::{
    check_process, check_value, fresh_binder, shared_linear, type_value, value_names, BranchRecord, ChoiceRecord,
    Context, Derivation, Judgement, Rule, TypeError, TypedAction,
};
use crate::syntax::{Choice, Comm, MixedBranch, MixedProcess, Name, Process, Qualifier, Value, View};
use crate::types::{is_un, MixedType};

impl TypedAction for Choice {
    fn check_action(ctx: &Context<MixedType>, choice: &Choice) -> Result<Derivation<Choice>, TypeError> {
        check_choice(ctx, choice)
    }

    fn dual(ty: &MixedType) -> Result<MixedType, TypeError> {
        let d = ty.dual_of()?;
        debug_assert!(ty.are_dual(&d));
        Ok(d)
    }

    fn well_formed(ty: &MixedType) -> Result<(), TypeError> {
        ty.well_formed()
    }

    fn subtype(s: &MixedType, t: &MixedType) -> bool {
        s.subtype(t)
    }

    fn bool_type() -> MixedType {
        MixedType::Bool
    }

    fn value_type(v: &Value) -> Option<MixedType> {
        match v {
            Value::Unit => Some(MixedType::Unit),
            Value::True | Value::False => Some(MixedType::Bool),
            Value::Int { .. } => Some(MixedType::Int),
            Value::Var { .. } => None,
        }
    }
}

/// `Γ ⊢ P` in the mixed calculus.
pub fn check_mixed(ctx: &Context<MixedType>, p: &MixedProcess) -> Result<Derivation<Choice>, TypeError> {
    super::check(ctx, p)
}

fn keys_text(keys: &BTreeSet<(crate::syntax::Label, crate::syntax::Polarity)>) -> String {
    let parts: Vec<String> = keys.iter().map(|(l, p)| format!("{l}{p}")).collect();
    format!("{{{}}}", parts.join(", "))
}

fn without(ctx: &Context<MixedType>, x: &Name, added: bool) -> Context<MixedType> {
    if added {
        Context::from_entries(ctx.entries.iter().filter(|(y, _)| y != x).cloned())
    } else {
        ctx.clone()
    }
}

fn check_choice(ctx: &Context<MixedType>, choice: &Choice) -> Result<Derivation<Choice>, TypeError> {
    let x = &choice.subject;
    let Some(declared) = ctx.get(x).cloned() else {
        return Err(TypeError::UnboundName { name: x.to_string() });
    };
    let Some((q2, view, type_branches)) = declared.as_choice() else {
        return Err(TypeError::SubjectNotChoiceTyped { subject: x.to_string(), ty: declared.to_string() });
    };
    if choice.q != q2 {
        return Err(TypeError::QualifierViolation {
            subject: x.to_string(),
            detail: format!("a {} choice on a channel of type {declared}", choice.q),
        });
    }
    if choice.q == Qualifier::Un && !ctx.is_un() {
        return Err(TypeError::QualifierViolation {
            subject: x.to_string(),
            detail: format!(
                "an un choice cannot use the linear names {}",
                ctx.linear_names().iter().map(|n| n.to_string()).collect::<Vec<_>>().join(", ")
            ),
        });
    }

    let process_keys: BTreeSet<_> = choice.branches.iter().map(MixedBranch::key).collect();
    let type_keys: BTreeSet<_> = type_branches.iter().map(|b| b.key()).collect();
    let fits = match view {
        View::Internal => process_keys.is_subset(&type_keys),
        View::External => process_keys == type_keys,
    };
    if !fits {
        return Err(TypeError::LabelSetMismatch {
            subject: x.to_string(),
            ty: declared.to_string(),
            expected: keys_text(&type_keys),
            found: keys_text(&process_keys),
        });
    }
    let subsumed =
        MixedType::choice(q2, view, type_branches.into_iter().filter(|b| process_keys.contains(&b.key())).collect());

    let (g1, g2) = ctx.split(&[x.clone()].into_iter().collect());
    let (_, dx) = type_value::<Choice>(&g1, &Value::var(x.clone()))?;
    let dx = if subsumed == declared {
        dx
    } else {
        Derivation {
            rule: Rule::Subt,
            context: g1.clone(),
            judgement: Judgement::Value { value: Value::var(x.clone()), ty: subsumed.clone() },
            premises: vec![dx],
            split: Vec::new(),
            choice: None,
        }
    };

    let x_in_g2 = g2.contains(x);
    let (_, _, branches_u) = subsumed.as_choice().expect("built as a choice");
    let mut premises = vec![dx];
    let mut records = Vec::new();
    let mut elaborated = Vec::new();
    for (index, b) in choice.branches.iter().enumerate() {
        let tb = branches_u.iter().find(|t| t.key() == b.key()).expect("key checked above");
        let g2x = g2.update(x, &tb.cont)?;
        let added = !x_in_g2;
        match &b.comm {
            Comm::Out { payload } => {
                let fv = value_names(payload);
                if let Some(n) = shared_linear(&g2x, &fv, &b.cont.free_names()) {
                    return Err(TypeError::LinearityError {
                        name: n.to_string(),
                        detail: "is both sent and used by the continuation".into(),
                    });
                }
                let (gv, gp) = g2x.split(&fv);
                let dv = check_value::<Choice>(&gv, payload, &tb.payload)?;
                let dp = check_process(&gp, &b.cont)?;
                elaborated.push(MixedBranch::output(b.label.clone(), payload.clone(), dp.process().clone()));
                records.push(BranchRecord {
                    label: b.label.clone(),
                    polarity: b.polarity(),
                    payload_type: tb.payload.clone(),
                    cont_type: tb.cont.clone(),
                    gamma1: g1.clone(),
                    gamma2: without(&gv, x, added),
                    gamma3: without(&gp, x, added),
                });
                premises.push(Derivation {
                    rule: Rule::Out,
                    context: g2x,
                    judgement: Judgement::Branch { index },
                    premises: vec![dv, dp],
                    split: vec![gv, gp],
                    choice: None,
                });
            }
            Comm::In { binder } => {
                let (z, cont) = fresh_binder(&g2x, binder, &b.cont);
                let inner = if z.is_wildcard() {
                    if !is_un(&tb.payload) {
                        return Err(TypeError::LinearityError {
                            name: binder.to_string(),
                            detail: format!("discards a payload of linear type {}", tb.payload),
                        });
                    }
                    g2x.clone()
                } else {
                    g2x.extend(z.clone(), tb.payload.clone())
                };
                let dp = check_process(&inner, &cont)?;
                elaborated.push(MixedBranch::input(b.label.clone(), z, dp.process().clone()));
                records.push(BranchRecord {
                    label: b.label.clone(),
                    polarity: b.polarity(),
                    payload_type: tb.payload.clone(),
                    cont_type: tb.cont.clone(),
                    gamma1: g1.clone(),
                    gamma2: Context::from_entries(g2.entries.iter().filter(|(_, t)| is_un(t)).cloned()),
                    gamma3: g2.clone(),
                });
                premises.push(Derivation {
                    rule: Rule::In,
                    context: g2x,
                    judgement: Judgement::Branch { index },
                    premises: vec![dp],
                    split: Vec::new(),
                    choice: None,
                });
            }
        }
    }

    let process = MixedProcess::choice(choice.q, x.clone(), elaborated);
    Ok(Derivation {
        rule: Rule::Choice,
        context: ctx.clone(),
        judgement: Judgement::Process { process },
        premises,
        split: vec![g1, g2],
        choice: Some(ChoiceRecord { subject_type: subsumed, branches: records }),
    })
}

/// Whether the process is a choice whose subject is typed by an internal
/// choice under `ctx`.
pub fn subject_is_internal(ctx: &Context<MixedType>, p: &Process<Choice>) -> bool {
    match p {
        Process::Act { action } => {
            ctx.get(&action.subject).and_then(|t| t.as_choice()).is_some_and(|(_, view, _)| view == View::Internal)
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_mixed, parse_mixed_type};

    fn ctx(entries: &[(&str, &str)]) -> Context<MixedType> {
        Context::from_entries(entries.iter().map(|(x, t)| (Name::user(*x), parse_mixed_type(t).unwrap())))
    }

    #[test]
    fn two_party_choice_is_well_typed() {
        let p = parse_mixed("(new x y: lin&{m!int.end, n?bool.end}) lin x (m!3 + n?w) | lin y (m?z)").unwrap();
        let d = check_mixed(&Context::new(), &p).unwrap();
        assert!(d.splits_recompose());
    }

    #[test]
    fn unused_linear_channel() {
        let err = check_mixed(&ctx(&[("x", "lin+{m!unit.end}")]), &Process::Inact).unwrap_err();
        assert!(matches!(err, TypeError::LinearLeftover { .. }));
    }

    #[test]
    fn external_choice_needs_every_pair() {
        let p = parse_mixed("lin x (m!3)").unwrap();
        let err = check_mixed(&ctx(&[("x", "lin&{m!int.end, n?bool.end}")]), &p).unwrap_err();
        assert!(matches!(err, TypeError::LabelSetMismatch { .. }));
    }

    #[test]
    fn internal_choice_may_offer_fewer() {
        let p = parse_mixed("lin x (m!3)").unwrap();
        let d = check_mixed(&ctx(&[("x", "lin+{m!int.end, n?bool.end}")]), &p).unwrap();
        let record = d.choice.unwrap();
        assert_eq!(record.branches.len(), 1);
        assert_eq!(d.premises[0].rule, Rule::Subt);
    }

    #[test]
    fn un_choice_over_linear_context() {
        let p = parse_mixed("un x (m!3)").unwrap();
        let err = check_mixed(&ctx(&[("x", "rec a.un+{m!int.a}"), ("w", "lin+{m!int.end}")]), &p.clone()).unwrap_err();
        assert!(matches!(err, TypeError::QualifierViolation { .. } | TypeError::LinearLeftover { .. }));
        let err = check_mixed(&ctx(&[("x", "lin+{m!int.end}")]), &p).unwrap_err();
        assert!(matches!(err, TypeError::QualifierViolation { .. }));
    }

    #[test]
    fn shadowed_binder_is_renamed() {
        let p = parse_mixed("lin y (m?x.un x (m!1))").unwrap();
        let g = ctx(&[("y", "lin+{m?(rec a.un+{m!int.a}).end}"), ("x", "end")]);
        let d = check_mixed(&g, &p).unwrap();
        let Process::Act { action } = d.process() else { panic!() };
        let Comm::In { binder } = &action.branches[0].comm else { panic!() };
        assert!(binder.is_generated());
    }

    #[test]
    fn weakening_with_end() {
        let p = parse_mixed("lin x (m!3)").unwrap();
        let g = ctx(&[("x", "lin+{m!int.end}")]);
        assert!(check_mixed(&g, &p).is_ok());
        let g2 = g.extend(Name::user("w"), MixedType::End);
        assert!(check_mixed(&g2, &p).is_ok());
    }
}
