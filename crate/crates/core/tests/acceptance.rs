//! The acceptance suite: one line per criterion, then a combined verdict.
//! Runs without the test harness so the lines are always printed.

use std::collections::BTreeSet;

use mix2cls::corpus::{default_dir, load_manifest, load_mixed, load_sepi, matches_golden};
use mix2cls::gen::Gen;
use mix2cls::parse::{parse_mixed, parse_mixed_file, parse_sepi, Program};
use mix2cls::print::{emit_sepi, print_mixed};
use mix2cls::syntax::{congruent, Choice};
use mix2cls::translate::translate_type;
use mix2cls::types::{is_un, type_equiv};
use mix2cls::typing::mixed::check_mixed;
use mix2cls::typing::Context;
use mix2cls::verify::{
    check_barb_preservation, check_completeness, check_ndchoice_reduction, check_ndchoice_typing,
    check_soundness_counterexample, check_type_soundness, soundness_counterexample, DEFAULT_DEPTH,
};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn programs(file: &str) -> Vec<Program<Choice>> {
    load_mixed(&default_dir().join(file)).expect("corpus file loads")
}

fn program(file: &str, name: &str) -> Program<Choice> {
    programs(file).into_iter().find(|p| p.name == name).expect("named program exists")
}

/// Every program of every well-typed corpus entry.
fn corpus() -> Vec<(String, Program<Choice>)> {
    load_manifest(&default_dir())
        .expect("manifest loads")
        .entries
        .into_iter()
        .flat_map(|e| programs(&e.file).into_iter().map(move |p| (format!("{}:{}", e.file, p.name), p)))
        .collect()
}

fn golden_corpus() -> Verdict {
    for file in ["intro_mixed.mix", "intro_duplicate.mix", "intro_un.mix"] {
        let prog = program(file, "main");
        check_mixed(&prog.ctx(), &prog.process).map_err(|e| format!("{file}: {e}"))?;
    }
    for fig in ["fig1", "fig2", "fig3"] {
        let prog = program(&format!("{fig}.mix"), "main");
        let expected = load_sepi(&default_dir().join(format!("{fig}.sepi"))).map_err(|e| e.to_string())?;
        ensure(matches_golden(&prog, &expected)?, || format!("{fig}: translation differs from the transcription"))?;
    }
    Ok("3 introductory programs type-check, 3 transcriptions match".into())
}

fn type_soundness() -> Verdict {
    let corpus = corpus();
    for (subject, prog) in &corpus {
        let r = check_type_soundness(subject, &prog.ctx(), &prog.process);
        ensure(r.outcome.is_pass(), || r.one_line())?;
    }
    let mut g = Gen::new(0xacce);
    for i in 0..100 {
        let p = g.program(4);
        let r = check_type_soundness(&format!("generated#{i}"), &Context::new(), &p);
        ensure(r.outcome.is_pass(), || format!("{}\n{p}", r.one_line()))?;
    }
    Ok(format!("{} corpus programs and 100 generated programs", corpus.len()))
}

fn interleavings(file: &str) -> Result<BTreeSet<String>, String> {
    let prog = program(file, "main");
    let r = check_completeness(file, &prog.ctx(), &prog.process, DEFAULT_DEPTH);
    ensure(r.outcome.is_pass(), || r.one_line())?;
    ensure(r.matches.len() == 1, || format!("{file}: expected one source step, got {}", r.matches.len()))?;
    let m = &r.matches[0];
    ensure(m.interleavings.iter().all(|t| t.len() == 5), || format!("{file}: witness lengths {:?}", m.interleavings))?;
    Ok(m.interleavings.iter().map(|t| t.join(",")).collect())
}

fn completeness() -> Verdict {
    let corpus = corpus();
    let mut steps = 0;
    for (subject, prog) in &corpus {
        let r = check_completeness(subject, &prog.ctx(), &prog.process, DEFAULT_DEPTH);
        ensure(r.outcome.is_pass(), || r.one_line())?;
        steps += r.matches.len();
    }
    let fig1 = interleavings("fig1.mix")?;
    let want1: BTreeSet<String> = ["s3t3,xy,s1t1,s4t4,xy", "s3t3,xy,s4t4,s1t1,xy"].map(String::from).into();
    ensure(fig1 == want1, || format!("fig1 interleavings {fig1:?}"))?;
    let fig2 = interleavings("fig2.mix")?;
    let want2: BTreeSet<String> = ["s2t2,xy,s1t1,s3t3,xy", "s2t2,xy,s3t3,s1t1,xy"].map(String::from).into();
    ensure(fig2 == want2, || format!("fig2 interleavings {fig2:?}"))?;
    Ok(format!("{steps} source steps matched; both displayed interleavings found for each two-party exchange"))
}

fn barb_preservation() -> Verdict {
    let mut barbs = 0;
    for name in ["linear", "persistent"] {
        let prog = program("open_choices.mix", name);
        let r = check_barb_preservation(name, &prog.ctx(), &prog.process, DEFAULT_DEPTH);
        ensure(r.outcome.is_pass(), || r.one_line())?;
        ensure(!r.witnesses.is_empty(), || format!("{name}: no source barbs"))?;
        barbs += r.witnesses.len();
    }
    Ok(format!("{barbs} source barbs each met by a weak barb"))
}

fn ndchoice() -> Verdict {
    let mut g = Gen::new(0x4e44);
    for i in 0..100 {
        let (ctx, parts) = g.ndchoice_instance(1 + i % 3);
        let r = check_ndchoice_typing(&format!("generated#{i}"), &ctx, &parts);
        ensure(r.outcome.is_pass(), || r.one_line())?;
    }
    for n in 1..=4 {
        let r = check_ndchoice_reduction(n);
        ensure(r.outcome.is_pass(), || r.one_line())?;
        ensure(r.witnesses.len() == n, || format!("n={n}: {} reducts", r.witnesses.len()))?;
    }
    Ok("typing on 100 instances, reduction for n = 1..4".into())
}

fn counterexample() -> Verdict {
    let (ctx, p) = soundness_counterexample();
    let r = check_soundness_counterexample("un y (m?z.0)", &ctx, &p);
    ensure(r.outcome.is_pass(), || r.one_line())?;
    let tag = r.witness_tags.first().and_then(|t| t.first()).cloned().unwrap_or_default();
    ensure(tag.starts_with('u'), || format!("witness starts with {tag}, not a loop step"))?;
    Ok(format!("source stuck, translation steps on {tag}"))
}

fn type_algebra() -> Verdict {
    const SAMPLES: u64 = 200;
    for seed in 0..SAMPLES {
        let mut g = Gen::new(seed);
        let t = g.mixed_type(3);
        let s = g.supertype(&t);
        let u = g.supertype(&s);
        ensure(t.subtype(&t), || format!("not reflexive: {t}"))?;
        ensure(t.subtype(&s) && s.subtype(&u) && t.subtype(&u), || format!("not transitive: {t} {s} {u}"))?;
        for other in [&s, &u, &g.mixed_type(3)] {
            let mutual = t.subtype(other) && other.subtype(&t);
            ensure(type_equiv(&t, other) == mutual, || format!("equivalence disagrees: {t} {other}"))?;
        }
        let d = t.dual_of().map_err(|e| e.to_string())?;
        ensure(t.are_dual(&d), || format!("not dual: {t} {d}"))?;
        let dd = d.dual_of().map_err(|e| e.to_string())?;
        ensure(type_equiv(&t, &dd), || format!("duality not an involution: {t}"))?;

        let t = g.translatable_type(3);
        let s = g.supertype(&t);
        let (ct, cs) = (translate_type(&t).map_err(|e| e.to_string())?, translate_type(&s).map_err(|e| e.to_string())?);
        ensure(is_un(&t) == is_un(&ct), || format!("un not preserved: {t}"))?;
        ensure(ct.subtype(&cs), || format!("subtyping not preserved: {t} <= {s}"))?;
    }
    Ok(format!("{SAMPLES} general and {SAMPLES} translatable types"))
}

fn determinism_and_round_trip() -> Verdict {
    let dir = default_dir();
    let manifest = load_manifest(&dir).map_err(|e| e.to_string())?;
    for file in manifest.entries.iter().map(|e| &e.file).chain(&manifest.invalid) {
        let text = std::fs::read_to_string(dir.join(file)).map_err(|e| e.to_string())?;
        let parsed = parse_mixed_file(&text).map_err(|e| e.to_string())?;
        ensure(parse_mixed_file(&parsed.print()).as_ref() == Ok(&parsed), || format!("{file} does not round-trip"))?;
    }
    for (subject, prog) in corpus() {
        let a = mix2cls::corpus::translate_program(&prog)?;
        let b = mix2cls::corpus::translate_program(&prog)?;
        let json = |x: &_| serde_json::to_string(x).expect("serializes");
        ensure(json(&a.1) == json(&b.1), || format!("{subject}: translation differs between runs"))?;
        let back = parse_sepi(&emit_sepi(&a.1)).map_err(|e| format!("{subject}: {e}"))?;
        ensure(congruent(&back, &a.1), || format!("{subject}: SePi text re-parses to a different term"))?;
    }
    let mut g = Gen::new(0x7e7e);
    for _ in 0..500 {
        let p = g.program(4);
        ensure(parse_mixed(&print_mixed(&p)).as_ref() == Ok(&p), || format!("does not round-trip: {p}"))?;
    }
    Ok("corpus and 500 generated programs".into())
}

fn main() -> std::process::ExitCode {
    let criteria: [Criterion; 8] = [
        ("golden corpus", golden_corpus),
        ("type soundness", type_soundness),
        ("operational completeness", completeness),
        ("barb preservation", barb_preservation),
        ("nondeterministic choice", ndchoice),
        ("soundness counterexample", counterexample),
        ("coinductive type algebra", type_algebra),
        ("determinism and round trip", determinism_and_round_trip),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {} {name}: pass ({detail})", i + 1),
            Err(e) => {
                println!("criterion {} {name}: FAIL ({e})", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", criteria.len());
        std::process::ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
