//! Structural properties of the two checkers on the corpus and on
//! generated programs.

use mix2cls::corpus::{default_dir, load_manifest, load_mixed};
use mix2cls::gen::Gen;
use mix2cls::parse::Program;
use mix2cls::syntax::{Choice, Name};
use mix2cls::translate::{translate_context, translate_process};
use mix2cls::types::MixedType;
use mix2cls::typing::classical::check_classical;
use mix2cls::typing::mixed::check_mixed;
use mix2cls::typing::Context;
use proptest::prelude::*;

fn corpus_programs() -> Vec<Program<Choice>> {
    let dir = default_dir();
    load_manifest(&dir).unwrap().entries.iter().flat_map(|e| load_mixed(&dir.join(&e.file)).unwrap()).collect()
}

#[test]
fn weakening_by_an_ended_channel() {
    for prog in corpus_programs() {
        let ctx = prog.ctx();
        let wider = ctx.extend(Name::user("fresh_end"), MixedType::End);
        assert!(check_mixed(&wider, &prog.process).is_ok(), "{}", prog.name);
        let cctx = translate_context(&wider).unwrap();
        let t = translate_process(&check_mixed(&ctx, &prog.process).unwrap()).unwrap();
        assert!(check_classical(&cctx, &t).is_ok(), "{}", prog.name);
    }
}

#[test]
fn exchange_of_context_entries() {
    for prog in corpus_programs() {
        let ctx = prog.ctx();
        let mut reversed = ctx.clone();
        reversed.entries.reverse();
        let a = check_mixed(&ctx, &prog.process).map(|d| d.process().clone());
        let b = check_mixed(&reversed, &prog.process).map(|d| d.process().clone());
        assert_eq!(a, b, "{}", prog.name);
    }
}

#[test]
fn corpus_derivations_recompose() {
    for prog in corpus_programs() {
        let d = check_mixed(&prog.ctx(), &prog.process).unwrap();
        assert!(d.splits_recompose(), "{}", prog.name);
        let t = translate_process(&d).unwrap();
        let cd = check_classical(&translate_context(&prog.ctx()).unwrap(), &t).unwrap();
        assert!(cd.splits_recompose(), "{}", prog.name);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn checking_is_deterministic(seed in any::<u64>()) {
        let p = Gen::new(seed).program(3);
        let a = check_mixed(&Context::new(), &p).unwrap();
        let b = check_mixed(&Context::new(), &p).unwrap();
        prop_assert_eq!(&a, &b);
        let t = translate_process(&a).unwrap();
        prop_assert_eq!(check_classical(&Context::new(), &t).unwrap(), check_classical(&Context::new(), &t).unwrap());
    }

    #[test]
    fn generated_derivations_recompose(seed in any::<u64>()) {
        let p = Gen::new(seed).program(3);
        let d = check_mixed(&Context::new(), &p).unwrap();
        prop_assert!(d.splits_recompose());
        let t = translate_process(&d).unwrap();
        prop_assert!(check_classical(&Context::new(), &t).unwrap().splits_recompose());
    }

    #[test]
    fn ndchoice_is_admissible(seed in any::<u64>(), n in 1usize..=3) {
        let (ctx, parts) = Gen::new(seed).ndchoice_instance(n);
        let report = mix2cls::verify::check_ndchoice_typing("generated", &ctx, &parts);
        prop_assert!(report.outcome.is_pass(), "{}", report.one_line());
    }
}
