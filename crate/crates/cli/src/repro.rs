//! Reproductions of the bundled examples. Every target is deterministic given the
//! global options, so its output can be compared against a committed golden file.

use std::collections::BTreeMap;

use anyhow::Result;
use pdaproc::bisim::{branching_profile, partition_refine};
use pdaproc::convert::{onestate_pda_to_spec, pda_to_signal_spec, spec_to_pda};
use pdaproc::core::Spec;
use pdaproc::corpus;
use pdaproc::normal::separate;
use pdaproc::parser::{print_lts, print_pda, print_spec};
use pdaproc::pda::{branching_degree, pda_lts};
use pdaproc::semantics::{check_guarded, explore_spec, Bounds, Guardedness, Lts, SemanticsKind};

use crate::{bisim_report, bounds, unguarded_report, Opts, Report};

pub(crate) const IDS: &[&str] = &[
    "fig1",
    "fig2",
    "fig3/4",
    "fig7",
    "fig8",
    "fig9",
    "counter-spec",
    "stack",
    "cointoss",
    "separate-example",
    "nospec-evidence",
    "unbounded-branching",
];

pub(crate) fn run(id: &str, opts: &Opts) -> Result<Report> {
    let text = match id {
        "fig1" => print_pda(&corpus::pda(corpus::COUNTER_PDA)),
        "fig2" => print_lts(&pda_lts(&corpus::pda(corpus::COUNTER_PDA), bounds(opts))?, opts.format.into()),
        "fig3/4" => unguarded_branching(),
        "fig7" => print_pda(&corpus::pda(corpus::LADDER_PDA)),
        "fig8" => print_lts(&pda_lts(&corpus::pda(corpus::LADDER_PDA), bounds(opts))?, opts.format.into()),
        "fig9" => print_pda(&spec_to_pda(&corpus::spec(corpus::TWOSTATE_SPEC))?),
        "counter-spec" => return counter_spec(opts),
        "stack" => print_spec(&onestate_pda_to_spec(&corpus::pda(corpus::STACK_PDA))?),
        "cointoss" => cointoss(opts)?,
        "separate-example" => separated(&corpus::spec(corpus::NONSEPARATION_SPEC))?,
        "nospec-evidence" => nospec_evidence(opts)?,
        "unbounded-branching" => unbounded_branching(opts)?,
        _ => unreachable!("clap restricts the example ids"),
    };
    Ok(Report::ok(text))
}

/// The separated specification, preceded by its separating set as a comment.
pub(crate) fn separated(spec: &Spec) -> Result<String> {
    let (out, sep) = separate(spec)?;
    let names: Vec<&str> = sep.0.iter().map(|x| &**x).collect();
    Ok(format!("// separating set: {{{}}}\n{}", names.join(", "), print_spec(&out)))
}

/// `X = 1 + X·a.1` has an infinitely branching graph; guardedness rejects it.
fn unguarded_branching() -> String {
    let spec = corpus::spec(corpus::UNGUARDED_SPEC);
    let verdict = match check_guarded(&spec) {
        Guardedness::Guarded => "guarded\n".to_string(),
        Guardedness::Unguarded(cycle) => unguarded_report(&cycle).text,
    };
    format!("{}{verdict}", print_spec(&spec))
}

fn counter_spec(opts: &Opts) -> Result<Report> {
    let spec = corpus::spec(corpus::COUNTER_SPEC);
    let pda = corpus::pda(corpus::COUNTER_PDA);
    let k = opts.depth;
    let more = Bounds::new(k + 1, opts.max_states);
    let l = explore_spec(&spec, more, SemanticsKind::Plain)?;
    let r = pda_lts(&pda, more)?;
    let verdict = bisim_report(&l, &r, k)?;
    Ok(Report { text: format!("{}{}", print_spec(&spec), verdict.text), ok: verdict.ok })
}

fn cointoss(opts: &Opts) -> Result<String> {
    let spec = corpus::spec(corpus::COINTOSS_SPEC);
    let lts = explore_spec(&spec, bounds(opts), SemanticsKind::Derived)?;
    let mut text = print_lts(&lts, opts.format.into());
    if lts.is_complete() {
        let (quotient, _) = partition_refine(&lts)?;
        text.push_str(&format!("minimised: {} states\n", quotient.num_states()));
        text.push_str(&print_lts(&quotient, opts.format.into()));
    }
    Ok(text)
}

/// Largest out-degree among the expanded states at each depth.
fn degree_by_depth(lts: &Lts) -> BTreeMap<usize, (usize, usize)> {
    let profile = branching_profile(lts);
    let mut rows: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (s, &d) in lts.depth.iter().enumerate() {
        if lts.frontier.contains(&s) {
            continue;
        }
        let row = rows.entry(d).or_default();
        row.0 += 1;
        row.1 = row.1.max(profile.degrees[s]);
    }
    rows
}

fn degree_table(lts: &Lts) -> String {
    let mut text = "depth  states  max out-degree\n".to_string();
    for (d, (n, max)) in degree_by_depth(lts) {
        text.push_str(&format!("{d:>5}  {n:>6}  {max:>14}\n"));
    }
    text
}

/// The ladder automaton: bounded branching in its graph, and the signal specification
/// that captures it.
fn nospec_evidence(opts: &Opts) -> Result<String> {
    let pda = corpus::pda(corpus::LADDER_PDA);
    let lts = pda_lts(&pda, bounds(opts))?;
    let mut text = print_pda(&pda);
    text.push_str(&format!("automaton branching degree: {}\n", branching_degree(&pda)));
    text.push_str(&degree_table(&lts));
    text.push_str(&print_spec(&pda_to_signal_spec(&pda)?));
    Ok(text)
}

/// The counter equations under sequential composition: the out-degree grows with depth.
fn unbounded_branching(opts: &Opts) -> Result<String> {
    let spec = corpus::spec(corpus::DIFFERENCE_SPEC);
    let lts = explore_spec(&spec, bounds(opts), SemanticsKind::Plain)?;
    Ok(format!("{}{}", print_spec(&spec), degree_table(&lts)))
}
