//! `mix2cls`: type check, translate, run and verify mixed-session programs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mix2cls::corpus::{self, load_mixed};
use mix2cls::export::{exploration_dot, to_json};
use mix2cls::parse::{parse_classical_file, Program};
use mix2cls::print::{emit_sepi, print_classical, PrintAction};
use mix2cls::semantics::{explore, Mode, Reduce};
use mix2cls::syntax::ClassicalAction;
use mix2cls::typing::classical::check_classical;
use mix2cls::typing::mixed::check_mixed;
use mix2cls::verify::{self, Claim, Outcome, VerificationReport, DEFAULT_DEPTH};

const USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "mix2cls", version, about = "Mixed sessions to classical sessions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Type check every program in a mixed file.
    Check { file: PathBuf },
    /// Translate a mixed file to the classical calculus.
    Translate {
        file: PathBuf,
        /// SePi-style text.
        #[arg(long, conflicts_with = "json")]
        sepi: bool,
        /// The classical AST as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Type check every program in a classical file.
    CheckClassical { file: PathBuf },
    /// Explore the reductions of each program.
    Run {
        file: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, value_enum, default_value_t = ModeArg::M0)]
        mode: ModeArg,
        /// Write the state graph in Graphviz format.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Check a correspondence claim on each program.
    Verify {
        file: PathBuf,
        #[arg(long, value_enum)]
        claim: ClaimArg,
        #[arg(long)]
        depth: Option<usize>,
        /// Write the reports as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the bundled example corpus.
    Corpus {
        #[arg(long)]
        dir: Option<PathBuf>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    M0,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClaimArg {
    Soundness,
    Barbs,
    Completeness,
    Ndchoice,
    Counterexample,
}

/// A failure that ends the command with the given exit status.
struct Exit(u8, String);

type CmdResult = Result<u8, Exit>;

fn usage(msg: impl Into<String>) -> Exit {
    Exit(USAGE, msg.into())
}

fn depth(flag: Option<usize>) -> Result<usize, Exit> {
    if let Some(d) = flag {
        return Ok(d);
    }
    match std::env::var("MIX2CLS_DEPTH") {
        Ok(v) => v.trim().parse().map_err(|_| usage(format!("MIX2CLS_DEPTH must be a number, got `{v}`"))),
        Err(_) => Ok(DEFAULT_DEPTH),
    }
}

fn is_classical(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "cls")
}

fn read(path: &Path) -> Result<String, Exit> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Exit> {
    std::fs::write(path, text).map_err(|e| Exit(1, format!("{}: {e}", path.display())))
}

fn mixed(path: &Path) -> Result<Vec<Program<mix2cls::syntax::Choice>>, Exit> {
    load_mixed(path).map_err(|e| usage(e.to_string()))
}

fn classical(path: &Path) -> Result<Vec<Program<ClassicalAction>>, Exit> {
    parse_classical_file(&read(path)?).map(|f| f.programs).map_err(|e| usage(format!("{}:{e}", path.display())))
}

fn check(file: &Path) -> CmdResult {
    let mut code = 0;
    for prog in mixed(file)? {
        match check_mixed(&prog.ctx(), &prog.process) {
            Ok(_) => println!("{}: ok", prog.name),
            Err(e) => {
                println!("{}: {e}", prog.name);
                code = 1;
            }
        }
    }
    Ok(code)
}

fn check_cls(file: &Path) -> CmdResult {
    let mut code = 0;
    for prog in classical(file)? {
        match check_classical(&prog.ctx(), &prog.process) {
            Ok(_) => println!("{}: ok", prog.name),
            Err(e) => {
                println!("{}: {e}", prog.name);
                code = 1;
            }
        }
    }
    Ok(code)
}

fn translate(file: &Path, sepi: bool, json: bool) -> CmdResult {
    let mut out = Vec::new();
    for prog in mixed(file)? {
        let (ctx, p) = corpus::translate_program(&prog).map_err(|e| Exit(1, format!("{}: {e}", prog.name)))?;
        out.push(Program { name: prog.name, context: ctx.entries, process: p });
    }
    if json {
        println!("{}", to_json("classical_programs", &out));
    } else if sepi {
        for prog in &out {
            println!("// {}\n{}", prog.name, emit_sepi(&prog.process));
        }
    } else {
        for prog in &out {
            println!("{}: {}", prog.name, print_classical(&prog.process));
        }
    }
    Ok(0)
}

fn explore_all<A: Reduce + PrintAction>(
    progs: &[Program<A>],
    depth: usize,
    mode: Mode,
    dot: Option<&Path>,
) -> CmdResult {
    let mut graphs = String::new();
    for prog in progs {
        let ex = explore(&prog.process, depth, mode);
        println!(
            "{}: {} states, {} steps, {} terminal{}",
            prog.name,
            ex.len(),
            ex.edges.len(),
            ex.terminal_states().len(),
            if ex.truncated { ", truncated" } else { "" }
        );
        for t in ex.maximal_traces(16) {
            println!("  {}", t.tags().join(" "));
        }
        graphs.push_str(&exploration_dot(&ex));
    }
    if let Some(path) = dot {
        write(path, &graphs)?;
    }
    Ok(0)
}

fn run(file: &Path, depth: usize, mode: Mode, dot: Option<&Path>) -> CmdResult {
    if is_classical(file) {
        explore_all(&classical(file)?, depth, mode, dot)
    } else {
        explore_all(&mixed(file)?, depth, mode, dot)
    }
}

fn ndchoice(file: &Path) -> Result<Vec<VerificationReport>, Exit> {
    let subject = file.display().to_string();
    let (ctx, parts) = if is_classical(file) {
        let progs = classical(file)?;
        let ctx = progs.first().map(|p| p.ctx()).unwrap_or_default();
        (ctx, progs.into_iter().map(|p| p.process).collect::<Vec<_>>())
    } else {
        let mut ctx = None;
        let mut parts = Vec::new();
        for prog in mixed(file)? {
            let (c, p) = corpus::translate_program(&prog).map_err(|e| Exit(1, format!("{}: {e}", prog.name)))?;
            ctx.get_or_insert(c);
            parts.push(p);
        }
        (ctx.unwrap_or_default(), parts)
    };
    if parts.is_empty() {
        return Err(usage(format!("{subject}: no programs")));
    }
    let n = parts.len();
    Ok(vec![verify::check_ndchoice_typing(&subject, &ctx, &parts), verify::check_ndchoice_reduction(n)])
}

fn verify_file(file: &Path, claim: ClaimArg, depth: usize, json: Option<&Path>) -> CmdResult {
    let reports = match claim {
        ClaimArg::Ndchoice => ndchoice(file)?,
        _ => {
            let claim = match claim {
                ClaimArg::Soundness => Claim::TypeSoundness,
                ClaimArg::Barbs => Claim::BarbPreservation,
                ClaimArg::Completeness => Claim::Completeness,
                _ => Claim::SoundnessCounterexample,
            };
            if is_classical(file) {
                return Err(usage("this claim takes a mixed (.mix) file"));
            }
            let name = file.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            mixed(file)?
                .iter()
                .map(|p| verify::run_claim(claim, &format!("{name}:{}", p.name), &p.ctx(), &p.process, depth))
                .collect()
        }
    };
    for r in &reports {
        println!("{}", r.one_line());
        for note in &r.notes {
            println!("  {note}");
        }
    }
    if let Some(path) = json {
        write(path, &to_json("verification_reports", &reports))?;
    }
    Ok(aggregate(reports.iter().map(|r| &r.outcome)))
}

fn aggregate<'a>(outcomes: impl Iterator<Item = &'a Outcome>) -> u8 {
    outcomes.map(|o| o.exit_code() as u8).fold(0, |acc, c| match (acc, c) {
        (1, _) | (_, 1) => 1,
        (3, _) | (_, 3) => 3,
        _ => 0,
    })
}

fn corpus_cmd(dir: Option<PathBuf>, depth: usize, json: Option<&Path>) -> CmdResult {
    let dir = dir.unwrap_or_else(corpus::default_dir);
    let run = corpus::run(&dir, depth).map_err(|e| usage(e.to_string()))?;
    for r in &run.reports {
        println!("{}", r.one_line());
    }
    for (file, m) in &run.goldens {
        match m {
            Ok(true) => println!("golden {file}: pass"),
            Ok(false) => println!("golden {file}: fail: translation differs"),
            Err(e) => println!("golden {file}: fail: {e}"),
        }
    }
    for (file, rejected) in &run.rejections {
        println!("invalid {file}: {}", if *rejected { "pass" } else { "fail: accepted" });
    }
    if let Some(path) = json {
        write(path, &to_json("corpus_run", &run))?;
    }
    Ok(run.exit_code() as u8)
}

fn dispatch(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Check { file } => check(&file),
        Command::CheckClassical { file } => check_cls(&file),
        Command::Translate { file, sepi, json } => translate(&file, sepi, json),
        Command::Run { file, depth: d, mode, dot } => {
            let mode = match mode {
                ModeArg::M0 => Mode::M0,
                ModeArg::Full => Mode::Full,
            };
            run(&file, depth(d)?, mode, dot.as_deref())
        }
        Command::Verify { file, claim, depth: d, json } => verify_file(&file, claim, depth(d)?, json.as_deref()),
        Command::Corpus { dir, depth: d, json } => corpus_cmd(dir, depth(d)?, json.as_deref()),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(Exit(code, msg)) => {
            eprintln!("mix2cls: {msg}");
            ExitCode::from(code)
        }
    }
}
