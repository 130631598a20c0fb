//! Translation determinism and shape, and printing round trips.

use mix2cls::corpus::{default_dir, load_manifest, load_mixed};
use mix2cls::gen::Gen;
use mix2cls::parse::{parse_classical, parse_mixed, parse_mixed_file, parse_sepi};
use mix2cls::print::{emit_sepi, print_classical, print_mixed};
use mix2cls::syntax::{congruent, ClassicalProcess, MixedProcess, Process};
use mix2cls::translate::translate_process;
use mix2cls::typing::mixed::check_mixed;
use mix2cls::typing::Context;
use proptest::prelude::*;

fn translated(ctx: &Context<mix2cls::types::MixedType>, p: &MixedProcess) -> ClassicalProcess {
    translate_process(&check_mixed(ctx, p).unwrap()).unwrap()
}

/// The source's parallel and restriction skeleton, down to the first
/// prefix or conditional.
fn skeleton_matches(src: &MixedProcess, out: &ClassicalProcess) -> bool {
    match (src, out) {
        (Process::Par { left: a, right: b }, Process::Par { left: c, right: d }) => {
            skeleton_matches(a, c) && skeleton_matches(b, d)
        }
        (Process::New { x, y, body, .. }, Process::New { x: x2, y: y2, body: body2, .. }) => {
            x == x2 && y == y2 && skeleton_matches(body, body2)
        }
        (Process::Inact, Process::Inact) => true,
        (Process::Par { .. } | Process::New { .. } | Process::Inact, _) => false,
        _ => true,
    }
}

#[test]
fn corpus_files_round_trip() {
    let dir = default_dir();
    let manifest = load_manifest(&dir).unwrap();
    let files = manifest.entries.iter().map(|e| e.file.clone()).chain(manifest.invalid.iter().cloned());
    for file in files {
        let text = std::fs::read_to_string(dir.join(&file)).unwrap();
        let parsed = parse_mixed_file(&text).unwrap();
        assert_eq!(parse_mixed_file(&parsed.print()).unwrap(), parsed, "{file}");
    }
}

#[test]
fn corpus_translations_preserve_names_and_structure() {
    let dir = default_dir();
    for entry in load_manifest(&dir).unwrap().entries {
        for prog in load_mixed(&dir.join(&entry.file)).unwrap() {
            let ctx = prog.ctx();
            let t = translated(&ctx, &prog.process);
            assert_eq!(t.free_names(), prog.process.free_names(), "{}", entry.file);
            assert!(skeleton_matches(&prog.process, &t), "{}", entry.file);
            assert_eq!(translated(&ctx, &prog.process), t);
            assert_eq!(parse_classical(&print_classical(&t)).unwrap(), t);
            assert!(congruent(&parse_sepi(&emit_sepi(&t)).unwrap(), &t), "{}", entry.file);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn generated_programs_round_trip(seed in any::<u64>()) {
        let p = Gen::new(seed).program(4);
        prop_assert_eq!(parse_mixed(&print_mixed(&p)).unwrap(), p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn translations_round_trip(seed in any::<u64>()) {
        let p = Gen::new(seed).program(3);
        let t = translated(&Context::new(), &p);
        prop_assert_eq!(&parse_classical(&print_classical(&t)).unwrap(), &t);
        let back = parse_sepi(&emit_sepi(&t)).unwrap();
        prop_assert!(congruent(&back, &t), "{}", emit_sepi(&t));
    }

    #[test]
    fn translation_is_deterministic_and_compositional(seed in any::<u64>()) {
        let p = Gen::new(seed).program(3);
        let t = translated(&Context::new(), &p);
        prop_assert_eq!(&translated(&Context::new(), &p), &t);
        prop_assert!(skeleton_matches(&p, &t));
        prop_assert_eq!(t.free_names(), p.free_names());
    }
}
