//! `uglr`: compile unification grammars to LR tables, parse with them, dump
//! states and compare the pipeline against the chart oracle.
//!
//! Every output line is a record `kind field...`; every exit path has its
//! own code (see [`Exit`]).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser as ClapParser, Subcommand, ValueEnum};

use uglr::compiler::{compile_with, deserialize_tables, dump_states, serialize_tables, CompileOptions};
use uglr::constraints::{dedupe, phase_three, phase_two, Analysis};
use uglr::oracle::{chart_parse, default_bound};
use uglr::runtime::{BackCheckMode, ParseError, ParseOptions, ParseOutcome, Parser};
use uglr::tree::Derivation;
use uglr::{Grammar, LookaheadMode, ParseTables};

/// Process exit codes. Usage errors exit with 2 through clap.
#[derive(Clone, Copy, Debug)]
enum Exit {
    Ok = 0,
    Error = 1,
    ZeroParses = 10,
    Lexical = 11,
    StepLimit = 12,
    Mismatch = 13,
}

#[derive(ClapParser)]
#[command(name = "uglr", version, about = "LR parsing with generalized unification grammars")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Slr,
    Lalr,
}

impl From<Mode> for LookaheadMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Slr => LookaheadMode::Slr,
            Mode::Lalr => LookaheadMode::Lalr,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BackCheck {
    All,
    Gaps,
    Off,
}

impl From<BackCheck> for BackCheckMode {
    fn from(b: BackCheck) -> Self {
        match b {
            BackCheck::All => BackCheckMode::All,
            BackCheck::Gaps => BackCheckMode::Gaps,
            BackCheck::Off => BackCheckMode::Off,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compile a grammar into a tables file.
    Compile {
        grammar: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "lalr")]
        mode: Mode,
        /// Keep closure items whose source rules cannot apply.
        #[arg(long)]
        no_closure_check: bool,
    },
    /// Parse one sentence with a tables file.
    Parse {
        tables: PathBuf,
        #[arg(required = true, num_args = 1..)]
        sentence: Vec<String>,
        #[command(flatten)]
        flags: ParseFlags,
        /// 1: generalized trees, 2: full constraints, 3: semantics.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
        phase: u8,
        /// Collapse analyses with identical instantiated trees.
        #[arg(long)]
        dedupe: bool,
    },
    /// Print every state's items.
    DumpStates { tables: PathBuf },
    /// Compare the pipeline with the chart oracle on a file of sentences.
    OracleCompare {
        grammar: PathBuf,
        /// One sentence per line; blank lines and lines starting with `#` are skipped.
        sentences: PathBuf,
        /// Use these tables instead of compiling the grammar.
        #[arg(long)]
        tables: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "lalr")]
        mode: Mode,
        #[command(flatten)]
        flags: ParseFlags,
    },
}

#[derive(clap::Args)]
struct ParseFlags {
    #[arg(long)]
    max_solutions: Option<usize>,
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: usize,
    #[arg(long, value_enum, default_value = "gaps")]
    back_check: BackCheck,
    /// Do not narrow a word's categories by the previous reduction.
    #[arg(long)]
    no_intersect: bool,
    /// Branch on ungeneralized source rules in phase one.
    #[arg(long)]
    use_full_ug: bool,
    /// Ignore all feature information in phase one.
    #[arg(long)]
    pure_cf: bool,
}

impl ParseFlags {
    fn options(&self) -> ParseOptions {
        ParseOptions {
            max_solutions: self.max_solutions,
            max_steps: self.max_steps,
            back_check: self.back_check.into(),
            intersect: !self.no_intersect,
            full_ug: self.use_full_ug,
            pure_cf: self.pure_cf,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Compile {
            grammar,
            out,
            mode,
            no_closure_check,
        } => cmd_compile(&grammar, &out, mode.into(), !no_closure_check),
        Command::Parse {
            tables,
            sentence,
            flags,
            phase,
            dedupe,
        } => cmd_parse(&tables, &sentence.join(" "), &flags.options(), phase, dedupe),
        Command::DumpStates { tables } => load_tables(&tables).map(|t| {
            print!("{}", dump_states(&t));
            Exit::Ok
        }),
        Command::OracleCompare {
            grammar,
            sentences,
            tables,
            mode,
            flags,
        } => cmd_oracle_compare(&grammar, &sentences, tables.as_deref(), mode.into(), &flags.options()),
    };
    let code = result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        Exit::Error
    });
    ExitCode::from(code as u8)
}

fn load_grammar(path: &Path) -> Result<Grammar> {
    let src = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Grammar::load(&src).with_context(|| format!("{}", path.display()))
}

fn load_tables(path: &Path) -> Result<ParseTables> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    deserialize_tables(&text).with_context(|| format!("{}", path.display()))
}

fn cmd_compile(grammar: &Path, out: &Path, mode: LookaheadMode, ug_filter: bool) -> Result<Exit> {
    let g = load_grammar(grammar)?;
    let t = compile_with(&g, CompileOptions { mode, ug_filter });
    fs::write(out, serialize_tables(&t)).with_context(|| format!("writing {}", out.display()))?;
    println!(
        "compiled states={} reduce_entries={} closure_filtered={} mode={mode}",
        t.state_count(),
        t.reduce_entry_count(),
        t.stats.closure_filtered
    );
    Ok(Exit::Ok)
}

/// Phase-two (and optionally phase-three) analyses of every phase-one tree.
fn analyses(t: &ParseTables, trees: &[uglr::tree::PhaseOneTree], phase: u8, dedupe_them: bool) -> Vec<Analysis> {
    let mut out: Vec<Analysis> = trees.iter().flat_map(|tree| phase_two(tree, t)).collect();
    if phase == 3 {
        out = out.iter().filter_map(|a| phase_three(a, t)).collect();
    }
    if dedupe_them {
        out = dedupe(out);
    }
    out
}

fn cmd_parse(path: &Path, sentence: &str, opts: &ParseOptions, phase: u8, dedupe_them: bool) -> Result<Exit> {
    let t = load_tables(path)?;
    let start = Instant::now();
    let result = match Parser::new(&t, opts.clone()).parse(sentence) {
        Ok(r) => r,
        Err(e @ ParseError::UnknownWord { .. }) => {
            println!("lexical-error {e}");
            return Ok(Exit::Lexical);
        }
    };
    println!("sentence {sentence}");
    let solutions = if phase == 1 {
        for tree in &result.trees {
            println!("tree {}", tree.render(&t.backbone, &t.grammar));
        }
        result.trees.len()
    } else {
        let found = analyses(&t, &result.trees, phase, dedupe_them);
        for a in &found {
            let mut line = format!("analysis {} root={}", a.derivation.render(&t.grammar), t.grammar.show(&a.root_phrase));
            if phase == 3 {
                if let Some(sem) = &a.sem {
                    line.push_str(&format!(" sem={sem}"));
                }
            }
            println!("{line}");
        }
        found.len()
    };
    let s = &result.stats;
    println!(
        "status solutions={solutions} steps={} backtracks={} gap_pushes={} gap_pops={} closure_filtered={} mode={} outcome={} elapsed_ms={}",
        s.steps,
        s.backtracks,
        s.gap_pushes,
        s.gap_pops,
        t.stats.closure_filtered,
        t.mode,
        result.outcome,
        start.elapsed().as_millis()
    );
    Ok(match result.outcome {
        ParseOutcome::StepLimit => Exit::StepLimit,
        _ if solutions == 0 => Exit::ZeroParses,
        _ => Exit::Ok,
    })
}

fn cmd_oracle_compare(
    grammar: &Path,
    sentences: &Path,
    tables: Option<&Path>,
    mode: LookaheadMode,
    opts: &ParseOptions,
) -> Result<Exit> {
    let g = load_grammar(grammar)?;
    let t = match tables {
        Some(p) => load_tables(p)?,
        None => compile_with(&g, CompileOptions { mode, ug_filter: true }),
    };
    let text = fs::read_to_string(sentences).with_context(|| format!("reading {}", sentences.display()))?;
    let (mut total, mut mismatches) = (0, 0);
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        total += 1;
        let words: Vec<&str> = line.split_whitespace().collect();
        let expected = chart_parse(&g, &words, default_bound(words.len()));
        let actual = match Parser::new(&t, opts.clone()).parse_words(&words) {
            Ok(r) => {
                let mut d: Vec<Derivation> = analyses(&t, &r.trees, 2, false).into_iter().map(|a| a.derivation).collect();
                d.sort();
                Some(d)
            }
            Err(_) => None,
        };
        // an unknown word is only a match when the oracle also finds nothing
        let same = actual.as_deref().unwrap_or(&[]) == expected.derivations.as_slice();
        let got = actual.as_ref().map_or(0, Vec::len);
        if same {
            println!("match parses={got} sentence={line}");
        } else {
            mismatches += 1;
            println!(
                "mismatch pipeline={got} oracle={} sentence={line}",
                expected.derivations.len()
            );
        }
    }
    println!("summary sentences={total} mismatches={mismatches}");
    Ok(if mismatches > 0 { Exit::Mismatch } else { Exit::Ok })
}
