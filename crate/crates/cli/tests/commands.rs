use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(file)
}

fn mix2cls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mix2cls")).args(args).env_remove("MIX2CLS_DEPTH").output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path(file: &str) -> String {
    corpus(file).to_string_lossy().into_owned()
}

#[test]
fn completeness_on_the_two_party_choice_passes() {
    let out = mix2cls(&["verify", &path("fig1.mix"), "--claim", "completeness", "--depth", "12"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("completeness fig1.mix:main: pass"));
}

#[test]
fn ill_typed_source_fails_check() {
    assert_eq!(code(&mix2cls(&["check", &path("invalid/illtyped.mix")])), 1);
}

#[test]
fn well_typed_source_passes_check() {
    let out = mix2cls(&["check", &path("conditionals.mix")]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).matches(": ok").count(), 3);
}

#[test]
fn counterexample_is_found() {
    assert_eq!(code(&mix2cls(&["verify", &path("unrecv.mix"), "--claim", "counterexample"])), 0);
}

#[test]
fn shallow_search_is_inconclusive() {
    let out = mix2cls(&["verify", &path("fig1.mix"), "--claim", "completeness", "--depth", "2"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn depth_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_mix2cls"))
        .args(["verify", &path("fig1.mix"), "--claim", "completeness"])
        .env("MIX2CLS_DEPTH", "2")
        .output()
        .unwrap();
    assert_eq!(code(&out), 3);
    let out = Command::new(env!("CARGO_BIN_EXE_mix2cls"))
        .args(["verify", &path("fig1.mix"), "--claim", "barbs"])
        .env("MIX2CLS_DEPTH", "deep")
        .output()
        .unwrap();
    assert_eq!(code(&out), 2);
}

#[test]
fn usage_and_parse_errors_exit_two() {
    assert_eq!(code(&mix2cls(&["frobnicate"])), 2);
    assert_eq!(code(&mix2cls(&["check", "/nonexistent.mix"])), 2);
    let dir = std::env::temp_dir().join(format!("mix2cls-parse-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.mix");
    std::fs::write(&bad, "proc main = lin x (m!").unwrap();
    let out = mix2cls(&["check", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains(":1:"));
}

#[test]
fn sepi_translation_uses_mangled_labels() {
    let out = mix2cls(&["translate", &path("fig1.mix"), "--sepi"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("m_in"));
    assert!(text.contains("select ell"));
    assert!(text.contains("s_1"));
}

#[test]
fn json_translation_is_versioned() {
    let out = mix2cls(&["translate", &path("fig2.mix"), "--json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["data"][0]["name"], "main");
}

#[test]
fn translated_classical_text_type_checks() {
    let out = mix2cls(&["translate", &path("fig3.mix")]);
    let body = stdout(&out);
    let (_, process) = body.split_once(": ").unwrap();
    let dir = std::env::temp_dir().join(format!("mix2cls-cls-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("fig3.cls");
    std::fs::write(&file, format!("proc main = {process}")).unwrap();
    let out = mix2cls(&["check-classical", file.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn run_writes_a_state_graph() {
    let dir = std::env::temp_dir().join(format!("mix2cls-dot-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let dot = dir.join("g.dot");
    let out =
        mix2cls(&["run", &path("open_choices.mix"), "--depth", "4", "--mode", "full", "--dot", dot.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(dot).unwrap();
    assert!(text.starts_with("digraph"));
}

#[test]
fn verify_writes_json_reports() {
    let dir = std::env::temp_dir().join(format!("mix2cls-json-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let json = dir.join("r.json");
    let out = mix2cls(&["verify", &path("fig2.mix"), "--claim", "soundness", "--json", json.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(v["data"][0]["claim"], "type_soundness");
    assert_eq!(v["data"][0]["outcome"], "pass");
}

#[test]
fn ndchoice_over_the_programs_of_a_file() {
    let out = mix2cls(&["verify", &path("conditionals.mix"), "--claim", "ndchoice"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("n=3: pass"));
}

#[test]
fn corpus_command_passes() {
    let out = mix2cls(&["corpus"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(!stdout(&out).to_lowercase().contains("fail"));
}
