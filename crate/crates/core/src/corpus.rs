//! The example corpus: a manifest naming source files, the claims to check
//! on each, and hand-written expected translations.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gen::Gen;
use crate::parse::{parse_mixed_file, parse_sepi, ParseError, Program};
use crate::syntax::{canonicalize, Action, Choice, ClassicalAction, ClassicalProcess, Mapper, Name, Process};
use crate::translate::translate_process;
use crate::types::{normalize, ClassicalType};
use crate::typing::mixed::check_mixed;
use crate::typing::Context;
use crate::verify::{check_ndchoice_reduction, check_ndchoice_typing, run_claim, Claim, Outcome, VerificationReport};

const NDCHOICE_MAX: usize = 4;
const NDCHOICE_INSTANCES: usize = 20;
const NDCHOICE_SEED: u64 = 0x5e55;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Entry {
    pub file: String,
    #[serde(default)]
    pub golden: Option<String>,
    pub claims: Vec<Claim>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<Entry>,
    /// Files that must be rejected by the mixed checker.
    #[serde(default)]
    pub invalid: Vec<String>,
}

/// Where the bundled corpus lives in the source tree.
pub fn default_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn read(path: &Path) -> Result<String, CorpusError> {
    std::fs::read_to_string(path).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })
}

pub fn load_manifest(dir: &Path) -> Result<Manifest, CorpusError> {
    Ok(serde_json::from_str(&read(&dir.join("manifest.json"))?)?)
}

pub fn load_mixed(path: &Path) -> Result<Vec<Program<Choice>>, CorpusError> {
    parse_mixed_file(&read(path)?)
        .map(|f| f.programs)
        .map_err(|source| CorpusError::Parse { path: path.to_path_buf(), source })
}

pub fn load_sepi(path: &Path) -> Result<ClassicalProcess, CorpusError> {
    parse_sepi(&read(path)?).map_err(|source| CorpusError::Parse { path: path.to_path_buf(), source })
}

impl<A: Action> Program<A>
where
    A::Type: crate::types::SessionType + std::fmt::Display,
{
    pub fn ctx(&self) -> Context<A::Type> {
        Context::from_entries(self.context.iter().cloned())
    }
}

struct NormalizeTypes;

impl Mapper<ClassicalAction> for NormalizeTypes {
    fn name(&mut self, n: &Name) -> Name {
        n.clone()
    }

    fn bind(&mut self, binder: &Name) -> Name {
        binder.clone()
    }

    fn unbind(&mut self, _binder: &Name) {}

    fn ty(&mut self, t: &ClassicalType) -> ClassicalType {
        normalize(t)
    }
}

/// Canonical form with every annotation replaced by its minimal
/// equivalent, so that `*?T` and its unfolding-based spelling agree.
pub fn comparison_form(p: &ClassicalProcess) -> ClassicalProcess {
    canonicalize(&NormalizeTypes.process(p))
}

/// Whether a program translates to the expected classical process, up to
/// canonical form and generated-name numbering.
pub fn matches_golden(program: &Program<Choice>, expected: &ClassicalProcess) -> Result<bool, String> {
    let d = check_mixed(&program.ctx(), &program.process).map_err(|e| e.to_string())?;
    let actual = translate_process(&d).map_err(|e| e.to_string())?;
    Ok(comparison_form(&actual) == comparison_form(expected))
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusRun {
    pub reports: Vec<VerificationReport>,
    /// `(file, matched)` per golden comparison.
    pub goldens: Vec<(String, Result<bool, String>)>,
    /// `(file, rejected)` per invalid file.
    pub rejections: Vec<(String, bool)>,
}

impl CorpusRun {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.outcome.is_pass())
            && self.goldens.iter().all(|(_, m)| matches!(m, Ok(true)))
            && self.rejections.iter().all(|(_, r)| *r)
    }

    /// 0 when everything passes, 3 when the only problems are
    /// inconclusive searches, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            return 0;
        }
        let hard = self.reports.iter().any(|r| matches!(r.outcome, Outcome::Fail { .. }))
            || self.goldens.iter().any(|(_, m)| !matches!(m, Ok(true)))
            || self.rejections.iter().any(|(_, r)| !*r);
        if hard {
            1
        } else {
            3
        }
    }
}

pub fn run(dir: &Path, depth: usize) -> Result<CorpusRun, CorpusError> {
    let manifest = load_manifest(dir)?;
    let mut run = CorpusRun { reports: Vec::new(), goldens: Vec::new(), rejections: Vec::new() };
    for entry in &manifest.entries {
        let programs = load_mixed(&dir.join(&entry.file))?;
        for prog in &programs {
            let subject = format!("{}:{}", entry.file, prog.name);
            for claim in &entry.claims {
                run.reports.push(run_claim(*claim, &subject, &prog.ctx(), &prog.process, depth));
            }
        }
        if let Some(golden) = &entry.golden {
            let expected = load_sepi(&dir.join(golden))?;
            let matched = match programs.as_slice() {
                [prog] => matches_golden(prog, &expected),
                _ => Err("a golden needs a file with exactly one program".to_string()),
            };
            run.goldens.push((entry.file.clone(), matched));
        }
    }
    for n in 1..=NDCHOICE_MAX {
        run.reports.push(check_ndchoice_reduction(n));
    }
    let mut gen = Gen::new(NDCHOICE_SEED);
    for i in 0..NDCHOICE_INSTANCES {
        let (ctx, parts) = gen.ndchoice_instance(1 + i % NDCHOICE_MAX);
        run.reports.push(check_ndchoice_typing(&format!("generated#{i}"), &ctx, &parts));
    }
    for file in &manifest.invalid {
        let programs = load_mixed(&dir.join(file))?;
        let rejected = programs.iter().all(|p| check_mixed(&p.ctx(), &p.process).is_err());
        run.rejections.push((file.clone(), rejected));
    }
    Ok(run)
}

/// Parses, checks and translates; the pieces the CLI prints.
pub fn translate_program(
    program: &Program<Choice>,
) -> Result<(Context<ClassicalType>, Process<ClassicalAction>), String> {
    let d = check_mixed(&program.ctx(), &program.process).map_err(|e| e.to_string())?;
    let p = translate_process(&d).map_err(|e| e.to_string())?;
    let ctx = crate::translate::translate_context(&program.ctx()).map_err(|e| e.to_string())?;
    Ok((ctx, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_corpus_passes() {
        let run = run(&default_dir(), crate::verify::DEFAULT_DEPTH).unwrap();
        for r in &run.reports {
            assert!(r.outcome.is_pass(), "{}", r.one_line());
        }
        assert_eq!(run.goldens.len(), 3);
        assert!(run.passed(), "{:?} {:?}", run.goldens, run.rejections);
        assert_eq!(run.exit_code(), 0);
    }

    #[test]
    fn missing_directory_is_an_io_error() {
        assert!(matches!(load_manifest(Path::new("/nonexistent")), Err(CorpusError::Io { .. })));
    }
}
