//! `pdaproc`: command-line front end for the pushdown/specification workbench.
//!
//! Exit codes: 0 on success or an equivalence verdict, 1 on a distinguishing verdict
//! or an unguarded specification, 2 on usage, parse and other errors.

mod repro;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pdaproc::bisim::{k_bisimilar, partition_refine, replay_witness, stateless_bisimilar, KBisimVerdict};
use pdaproc::convert::{onestate_pda_to_spec, pda_to_signal_spec, signal_spec_to_pda, spec_to_pda};
use pdaproc::core::{Mode, Spec};
use pdaproc::normal::{to_aignf, to_gnf};
use pdaproc::parser::{parse_pda, parse_spec, parse_term, print_expr, print_lts, print_pda, print_spec, LtsFormat};
use pdaproc::pda::{pda_lts, Pda};
use pdaproc::rewrite::{axiom_instances, decide_bisim_rf, for_sequencing, hnf_with_trace, reduce_hnf, soundness, AxiomId, RfVerdict};
use pdaproc::semantics::{check_guarded, explore_spec, natural_kind, Bounds, Guardedness, Lts, SemanticsKind};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser, Debug)]
#[command(name = "pdaproc", version, about = "Pushdown automata and sequential process specifications")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    /// Exploration depth, and the k of bounded bisimilarity.
    #[arg(long, global = true, default_value_t = 12)]
    depth: usize,
    /// State budget for every exploration.
    #[arg(long, global = true, default_value_t = 50_000)]
    max_states: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the main output to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomised suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Aut,
    Dot,
    Text,
}

impl From<Format> for LtsFormat {
    fn from(f: Format) -> LtsFormat {
        match f {
            Format::Aut => LtsFormat::Aut,
            Format::Dot => LtsFormat::Dot,
            Format::Text => LtsFormat::Text,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Seq,
    Seqc,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Seq => Mode::Seq,
            ModeArg::Seqc => Mode::Seqc,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that every recursive occurrence is under an action prefix.
    CheckGuarded { file: PathBuf },
    /// Explore the process graph of a specification or automaton.
    Lts {
        file: PathBuf,
        /// Force the plain or derived semantics instead of choosing by content.
        #[arg(long, value_enum)]
        semantics: Option<SemanticsArg>,
    },
    /// Greibach normal form.
    Gnf { file: PathBuf },
    /// Acceptance irredundant Greibach normal form.
    Aignf { file: PathBuf },
    /// Add identifiers so that a set of non-accepting identifiers separates
    /// non-acceptance from acceptance.
    Separate { file: PathBuf },
    /// Head normal form of a recursion-free term, read against a specification's variables.
    Hnf {
        file: PathBuf,
        term: String,
        /// Drop summands that no valuation can fire.
        #[arg(long)]
        reduce: bool,
        /// Print the construction steps and the axioms each relies on.
        #[arg(long)]
        trace: bool,
    },
    /// Translate between automata and specifications.
    #[command(subcommand)]
    Convert(ConvertCmd),
    /// Compare or minimise processes up to bisimilarity.
    #[command(subcommand)]
    Bisim(BisimCmd),
    /// List the axioms or test them on random instances.
    #[command(subcommand)]
    Axioms(AxiomsCmd),
    /// Reproduce a bundled example.
    Repro {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(repro::IDS))]
        id: String,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SemanticsArg {
    Plain,
    Derived,
}

#[derive(Subcommand, Debug)]
enum ConvertCmd {
    /// One-state automaton to a plain specification.
    Onestate { file: PathBuf },
    /// Plain specification to a two-state automaton.
    ToPda { file: PathBuf },
    /// Automaton to a specification with guards and signals.
    ToSignalSpec { file: PathBuf },
    /// Specification with guards and signals to an automaton.
    SignalToPda { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum BisimCmd {
    /// Bounded bisimilarity (k = --depth) of two specifications or automata.
    K { left: PathBuf, right: PathBuf },
    /// Stateless bisimilarity of two recursion-free terms.
    Stateless { file: PathBuf, left: String, right: String },
    /// Minimise a fully explored process graph by partition refinement.
    Minimize { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum AxiomsCmd {
    /// List the axioms of a theory.
    List {
        #[arg(long, value_enum, default_value_t = ModeArg::Seqc)]
        mode: ModeArg,
    },
    /// Check random instances of axioms with the stateless bisimulation oracle.
    Soundness {
        #[arg(long, value_enum, default_value_t = ModeArg::Seqc)]
        mode: ModeArg,
        /// Check only this axiom; it may lie outside the theory of the mode.
        #[arg(long)]
        axiom: Option<String>,
        #[arg(long, default_value_t = 200)]
        instances: usize,
        /// Depth of the generated instances of the metavariables.
        #[arg(long, default_value_t = 3)]
        term_depth: usize,
    },
}

/// Text to emit plus whether the verdict was positive.
struct Report {
    text: String,
    ok: bool,
}

impl Report {
    fn ok(text: String) -> Report {
        Report { text, ok: true }
    }
}

/// A loaded input file.
enum Input {
    Spec(Spec),
    Pda(Pda),
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Automata are recognised by a `.pda` extension or, failing that, by their keyword.
fn load(path: &Path) -> Result<Input> {
    let text = read(path)?;
    let is_pda = match path.extension().and_then(|e| e.to_str()) {
        Some("pda") => true,
        Some("pspec") => false,
        _ => first_keyword(&text) == Some("pda"),
    };
    if is_pda {
        Ok(Input::Pda(parse_pda(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?))
    } else {
        Ok(Input::Spec(parse_spec(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?))
    }
}

fn first_keyword(text: &str) -> Option<&str> {
    text.lines().map(str::trim).find(|l| !l.is_empty() && !l.starts_with("//")).and_then(|l| l.split_whitespace().next())
}

fn load_spec(path: &Path) -> Result<Spec> {
    match load(path)? {
        Input::Spec(s) => Ok(s),
        Input::Pda(_) => bail!("{}: expected a specification, found an automaton", path.display()),
    }
}

fn load_pda(path: &Path) -> Result<Pda> {
    match load(path)? {
        Input::Pda(p) => Ok(p),
        Input::Spec(_) => bail!("{}: expected an automaton, found a specification", path.display()),
    }
}

/// The refusal printed for an unguarded specification.
fn unguarded_report(cycle: &[String]) -> Report {
    Report { text: format!("unguarded: [{}]\n", cycle.join(" -> ")), ok: false }
}

/// Runs `f` on a specification when it is guarded; otherwise reports the cycle.
fn with_guarded(spec: &Spec, f: impl FnOnce(&Spec) -> Result<Report>) -> Result<Report> {
    match check_guarded(spec) {
        Guardedness::Unguarded(cycle) => Ok(unguarded_report(&cycle)),
        Guardedness::Guarded => f(spec),
    }
}

fn bounds(opts: &Opts) -> Bounds {
    Bounds::new(opts.depth, opts.max_states)
}

/// Graph of an input explored to `depth` steps.
fn graph(input: &Input, depth: usize, max_states: usize, kind: Option<SemanticsKind>) -> Result<Lts> {
    let b = Bounds::new(depth, max_states);
    Ok(match input {
        Input::Spec(s) => explore_spec(s, b, kind.unwrap_or_else(|| natural_kind(s)))?,
        Input::Pda(p) => pda_lts(p, b)?,
    })
}

fn guard_input(input: &Input) -> Option<Report> {
    match input {
        Input::Spec(s) => match check_guarded(s) {
            Guardedness::Unguarded(cycle) => Some(unguarded_report(&cycle)),
            Guardedness::Guarded => None,
        },
        Input::Pda(_) => None,
    }
}

/// Bounded bisimilarity at `k`, lowered (with a note) when the state budget cut
/// exploration short.
fn bisim_report(left: &Lts, right: &Lts, k: usize) -> Result<Report> {
    let reached = [left.min_frontier_depth(), right.min_frontier_depth()].into_iter().flatten().min();
    let mut text = String::new();
    let k_eff = match reached {
        Some(d) if d <= k => {
            text.push_str(&format!("note: state budget reached at depth {d}; checking k={}\n", d.saturating_sub(1)));
            d.saturating_sub(1)
        }
        _ => k,
    };
    match k_bisimilar(left, right, k_eff)? {
        KBisimVerdict::Equivalent(k) => {
            text.push_str(&format!("equivalent up to depth {k} ({} vs {} states)\n", left.num_states(), right.num_states()));
            Ok(Report::ok(text))
        }
        KBisimVerdict::Distinguished(w) => {
            text.push_str(&format!("distinguished at depth {}\n{w}\n", w.depth()));
            let replays = replay_witness(left, right, &w);
            text.push_str(&format!("witness replays: {}\n", if replays { "yes" } else { "no" }));
            Ok(Report { text, ok: false })
        }
    }
}

fn run(cli: &Cli) -> Result<Report> {
    let opts = &cli.opts;
    match &cli.command {
        Command::CheckGuarded { file } => {
            let spec = load_spec(file)?;
            Ok(match check_guarded(&spec) {
                Guardedness::Guarded => Report::ok("guarded\n".into()),
                Guardedness::Unguarded(cycle) => unguarded_report(&cycle),
            })
        }
        Command::Lts { file, semantics } => {
            let input = load(file)?;
            if let Some(r) = guard_input(&input) {
                return Ok(r);
            }
            let kind = semantics.map(|s| match s {
                SemanticsArg::Plain => SemanticsKind::Plain,
                SemanticsArg::Derived => SemanticsKind::Derived,
            });
            let lts = graph(&input, opts.depth, opts.max_states, kind)?;
            Ok(Report::ok(print_lts(&lts, opts.format.into())))
        }
        Command::Gnf { file } => with_guarded(&load_spec(file)?, |s| Ok(Report::ok(print_spec(&to_gnf(s)?)))),
        Command::Aignf { file } => with_guarded(&load_spec(file)?, |s| Ok(Report::ok(print_spec(&to_aignf(s)?)))),
        Command::Separate { file } => with_guarded(&load_spec(file)?, |s| Ok(Report::ok(repro::separated(s)?))),
        Command::Hnf { file, term, reduce, trace } => {
            let spec = load_spec(file)?;
            with_guarded(&spec, |spec| {
                let t = parse_term(spec, term)?;
                let (mut h, steps) = hnf_with_trace(spec, &t)?;
                if *reduce {
                    h = reduce_hnf(spec, &h)?;
                }
                let mut text = format!("{}\n", print_expr(&h.to_expr(), &spec.vars));
                text.push_str(&h.render(&spec.vars));
                if *trace {
                    text.push_str("trace:\n");
                    for s in steps {
                        text.push_str(&format!("  {s}\n"));
                    }
                }
                Ok(Report::ok(text))
            })
        }
        Command::Convert(c) => convert(c),
        Command::Bisim(b) => bisim(b, opts),
        Command::Axioms(a) => axioms(a, opts),
        Command::Repro { id } => repro::run(id, opts),
    }
}

fn convert(c: &ConvertCmd) -> Result<Report> {
    match c {
        ConvertCmd::Onestate { file } => Ok(Report::ok(print_spec(&onestate_pda_to_spec(&load_pda(file)?)?))),
        ConvertCmd::ToPda { file } => with_guarded(&load_spec(file)?, |s| Ok(Report::ok(print_pda(&spec_to_pda(s)?)))),
        ConvertCmd::ToSignalSpec { file } => Ok(Report::ok(print_spec(&pda_to_signal_spec(&load_pda(file)?)?))),
        ConvertCmd::SignalToPda { file } => {
            with_guarded(&load_spec(file)?, |s| Ok(Report::ok(print_pda(&signal_spec_to_pda(s)?))))
        }
    }
}

fn bisim(b: &BisimCmd, opts: &Opts) -> Result<Report> {
    match b {
        BisimCmd::K { left, right } => {
            let (l, r) = (load(left)?, load(right)?);
            if let Some(rep) = guard_input(&l).or_else(|| guard_input(&r)) {
                return Ok(rep);
            }
            let k = opts.depth;
            bisim_report(&graph(&l, k + 1, opts.max_states, None)?, &graph(&r, k + 1, opts.max_states, None)?, k)
        }
        BisimCmd::Stateless { file, left, right } => {
            let spec = load_spec(file)?;
            with_guarded(&spec, |spec| {
                let (p, q) = (parse_term(spec, left)?, parse_term(spec, right)?);
                if stateless_bisimilar(spec, &p, &q)? {
                    return Ok(Report::ok("stateless bisimilar\n".into()));
                }
                let mut text = "not stateless bisimilar\n".to_string();
                if let RfVerdict::Distinguished(d) = decide_bisim_rf(spec, &p, &q)? {
                    text.push_str(&format!("{}\n", d.render(&spec.vars)));
                }
                Ok(Report { text, ok: false })
            })
        }
        BisimCmd::Minimize { file } => {
            let input = load(file)?;
            if let Some(r) = guard_input(&input) {
                return Ok(r);
            }
            let lts = graph(&input, opts.depth, opts.max_states, None)?;
            if !lts.is_complete() {
                bail!("the graph is not fully explored within --depth {} and --max-states {}", opts.depth, opts.max_states);
            }
            let (quotient, _) = partition_refine(&lts)?;
            let mut text = format!("{} states, {} blocks\n", lts.num_states(), quotient.num_states());
            text.push_str(&print_lts(&quotient, opts.format.into()));
            Ok(Report::ok(text))
        }
    }
}

fn axioms(a: &AxiomsCmd, opts: &Opts) -> Result<Report> {
    match a {
        AxiomsCmd::List { mode } => {
            let text: String = axiom_instances((*mode).into()).iter().map(|r| format!("{r}\n")).collect();
            Ok(Report::ok(text))
        }
        AxiomsCmd::Soundness { mode, axiom, instances, term_depth } => {
            let mode: Mode = (*mode).into();
            let rules = match axiom {
                Some(id) => vec![for_sequencing(id.parse::<AxiomId>()?, mode)],
                None => axiom_instances(mode),
            };
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let mut text = String::new();
            let mut ok = true;
            for rule in &rules {
                let report = soundness(rule, *instances, *term_depth, &mut rng)?;
                text.push_str(&format!("{:<4} {}/{}\n", rule.id.name(), report.passed(), report.instances));
                if let Some((l, r)) = report.failures.first() {
                    ok = false;
                    text.push_str(&format!("     e.g. {l}  vs  {r}\n"));
                }
            }
            Ok(Report { text, ok })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if let Some(path) = &cli.opts.out {
                if let Err(e) = fs::write(path, &report.text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{}", report.text);
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
