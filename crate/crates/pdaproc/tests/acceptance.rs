//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria whose literal statement cannot hold for the bundled inputs are marked as
//! known failures; they still run in full and print what was observed. The process
//! exits non-zero only when a criterion fails that is not on the known list.

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pdaproc::bisim::{bisimilar_complete, k_bisimilar, partition_refine, replay_witness, stateless_bisimilar, KBisimVerdict};
use pdaproc::convert::{onestate_pda_to_spec, pda_to_signal_spec, signal_spec_to_pda, spec_to_pda};
use pdaproc::core::{Action, Mode, ProcExpr, Spec};
use pdaproc::corpus;
use pdaproc::gen::{closed_context, random_spec, TermGen};
use pdaproc::normal::{check_separation_along, separate, to_aignf, to_gnf};
use pdaproc::parser::{parse_pda, parse_spec, parse_term, print_expr};
use pdaproc::pda::{pda_lts, Pda};
use pdaproc::rewrite::{
    axiom_instances, decide_bisim_rf, depth, for_sequencing, hnf, is_reduced, random_rewrites, reduce_hnf, soundness,
    AxiomId, RfVerdict,
};
use pdaproc::semantics::{
    check_guarded, explore_spec, explore_term, natural_kind, steps_plain, Bounds, Engine, Guardedness, Lts,
    SemanticsError, SemanticsKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAX_STATES: usize = 200_000;
const SEED: u64 = 0x5eed;

struct Outcome {
    pass: bool,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Outcome {
        Outcome { pass: true, notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        self.notes.push(format!("{} {what}", if ok { "ok  " } else { "FAIL" }));
        self.pass &= ok;
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(format!("     {}", what.into()));
    }
}

type Criterion = fn() -> Outcome;

/// Number, title, check, and the reason it is expected to fail (if it is).
const CRITERIA: &[(u32, &str, Criterion, Option<&str>)] = &[
    (1, "counter specification and automaton agree", counter_correspondence, None),
    (
        2,
        "distributivity fails under sequencing; remaining axioms are sound",
        distributivity,
        Some("the weak-distributivity axiom for guards over sequencing fails on random instances"),
    ),
    (3, "transparency under sequential composition", transparency, None),
    (4, "unguarded specifications are rejected", guardedness_gate, None),
    (5, "one-state automata as specifications", onestate, None),
    (
        6,
        "two-state automaton from a specification",
        twostate,
        Some("the drawn automaton differs from its own specification; the construction adds a[eps/XY] and b[eps/eps]"),
    ),
    (7, "separating non-acceptance from acceptance", separation, None),
    (8, "ladder automaton as a signal specification", ladder_signal_spec, None),
    (9, "round trips preserve the process", round_trips, None),
    (10, "head normal forms", head_normal_forms, None),
    (11, "decision procedure agrees with the oracle", decision_procedure, None),
    (
        12,
        "coin toss minimisation",
        cointoss,
        Some("the initial state and the tails state are bisimilar, so the quotient has 3 states"),
    ),
    (13, "false guards: bisimilar but not stateless bisimilar", falseguards, None),
];

fn main() -> ExitCode {
    let mut unexpected = Vec::new();
    for (n, title, run, known) in CRITERIA {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        for line in &outcome.notes {
            println!("    {line}");
        }
        let verdict = match (outcome.pass, known) {
            (true, _) => "PASS".to_string(),
            (false, Some(reason)) => format!("FAIL (known: {reason})"),
            (false, None) => {
                unexpected.push(*n);
                "FAIL".to_string()
            }
        };
        println!("criterion {n:>2} {title}: {verdict} [{:.2?}]", elapsed);
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}

// ----- helpers -------------------------------------------------------------------

fn spec_graph(spec: &Spec, k: usize) -> Lts {
    explore_spec(spec, Bounds::new(k + 1, MAX_STATES), natural_kind(spec)).expect("exploration succeeds")
}

fn automaton_graph(pda: &Pda, k: usize) -> Lts {
    pda_lts(pda, Bounds::new(k + 1, MAX_STATES)).expect("exploration succeeds")
}

/// Bounded bisimilarity at exactly `k`. A state budget that cut either exploration
/// short of depth `k + 1` counts as a failure rather than silently lowering `k`.
fn bisim_at(l: &Lts, r: &Lts, k: usize) -> Result<(), String> {
    let reached = [l.min_frontier_depth(), r.min_frontier_depth()].into_iter().flatten().min();
    if let Some(d) = reached.filter(|&d| d <= k) {
        return Err(format!("state budget reached at depth {d}, below the requested {k}"));
    }
    match k_bisimilar(l, r, k).map_err(|e| e.to_string())? {
        KBisimVerdict::Equivalent(_) => Ok(()),
        KBisimVerdict::Distinguished(w) => Err(format!("distinguished:\n{w}")),
    }
}

fn check_bisim(out: &mut Outcome, l: &Lts, r: &Lts, k: usize, what: &str) {
    match bisim_at(l, r, k) {
        Ok(()) => out.check(true, format!("{what}: {k}-bisimilar ({} vs {} states)", l.num_states(), r.num_states())),
        Err(e) => out.check(false, format!("{what}: {e}")),
    }
}

/// The operands of a right-nested or left-nested choice.
fn summands(e: &ProcExpr) -> Vec<&ProcExpr> {
    match e {
        ProcExpr::Choice(l, r) => {
            let mut v = summands(l);
            v.extend(summands(r));
            v
        }
        _ => vec![e],
    }
}

fn printed_summands(spec: &Spec, x: &str) -> BTreeSet<String> {
    spec.body(x).map(|b| summands(b).into_iter().map(|s| print_expr(s, &spec.vars)).collect()).unwrap_or_default()
}

/// Equations of `spec` as summand sets, with identifiers renamed by `rename`.
fn renamed_equations(spec: &Spec, rename: &BTreeMap<String, String>) -> BTreeMap<String, BTreeSet<String>> {
    let swap = |s: &str| -> String {
        let mut out = String::new();
        let mut word = String::new();
        let flush = |word: &mut String, out: &mut String| {
            out.push_str(rename.get(word.as_str()).map(String::as_str).unwrap_or(word));
            word.clear();
        };
        for c in s.chars() {
            if c.is_alphanumeric() || c == '_' || c == '#' || c == '\'' {
                word.push(c);
            } else {
                flush(&mut word, &mut out);
                out.push(c);
            }
        }
        flush(&mut word, &mut out);
        out
    };
    spec.equations
        .keys()
        .map(|x| (swap(x), printed_summands(spec, x).iter().map(|s| swap(s)).collect()))
        .collect()
}

fn equations(spec: &Spec) -> BTreeMap<String, BTreeSet<String>> {
    renamed_equations(spec, &BTreeMap::new())
}

fn permutations(items: &[String]) -> Vec<Vec<String>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut all = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head.clone());
            all.push(p);
        }
    }
    all
}

/// A renaming of `produced`'s identifiers onto `expected`'s that makes their
/// equations coincide, if there is one. Initial identifiers must correspond.
fn match_up_to_renaming(produced: &Spec, expected: &Spec) -> Option<BTreeMap<String, String>> {
    let ours: Vec<String> = produced.equations.keys().map(|x| x.to_string()).collect();
    let theirs: Vec<String> = expected.equations.keys().map(|x| x.to_string()).collect();
    if ours.len() != theirs.len() {
        return None;
    }
    let want = equations(expected);
    permutations(&theirs).into_iter().find_map(|perm| {
        let rename: BTreeMap<String, String> = ours.iter().cloned().zip(perm).collect();
        (rename[&*produced.init] == *expected.init && renamed_equations(produced, &rename) == want).then_some(rename)
    })
}

// ----- criteria ------------------------------------------------------------------

fn counter_correspondence() -> Outcome {
    let mut out = Outcome::new();
    let start = Instant::now();
    let spec = corpus::spec(corpus::COUNTER_SPEC);
    let pda = corpus::pda(corpus::COUNTER_PDA);
    let verdict = bisim_at(&spec_graph(&spec, 12), &automaton_graph(&pda, 12), 12);
    let elapsed = start.elapsed();
    out.check(verdict.is_ok(), format!("specification vs automaton at k=12 {}", verdict.err().unwrap_or_default()));
    out.check(elapsed < Duration::from_secs(1), format!("runtime {elapsed:.2?} under 1 s"));
    out
}

fn distributivity() -> Outcome {
    let mut out = Outcome::new();
    let ctx = closed_context(0, Mode::Seqc);
    let lhs = parse_term(&ctx, "(a.1 + 1);b.1").unwrap();
    let rhs = parse_term(&ctx, "a.1;b.1 + 1;b.1").unwrap();
    let explore = |t: &ProcExpr| explore_term(&ctx, t, Bounds::new(2, MAX_STATES), SemanticsKind::Plain).unwrap();
    let (l, r) = (explore(&lhs), explore(&rhs));
    match k_bisimilar(&l, &r, 1).unwrap() {
        KBisimVerdict::Distinguished(w) => {
            let on_b = w.first_action() == Some(&Action::named("b"));
            out.check(on_b && replay_witness(&l, &r, &w), "(a.1 + 1);b.1 and a.1;b.1 + 1;b.1 differ at k=1 by a b-step");
            out.note(w.to_string().replace('\n', "\n         "));
        }
        KBisimVerdict::Equivalent(_) => out.check(false, "(a.1 + 1);b.1 and a.1;b.1 + 1;b.1 were not distinguished"),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let a4 = soundness(&for_sequencing(AxiomId::A4, Mode::Seqc), 200, 3, &mut rng).unwrap();
    out.check(!a4.failures.is_empty(), format!("A4 under sequencing: {} of 200 instances fail", a4.failures.len()));
    if let Some((l, r)) = a4.failures.first() {
        out.note(format!("e.g. {l}  vs  {r}"));
    }
    for rule in axiom_instances(Mode::Seqc).iter().filter(|r| r.id != AxiomId::A4) {
        let report = soundness(rule, 200, 3, &mut rng).unwrap();
        if !report.failures.is_empty() {
            out.check(false, format!("{} passed {}/200", rule.id, report.passed()));
            let (l, r) = &report.failures[0];
            out.note(format!("e.g. {l}  vs  {r}"));
        }
    }
    out.check(true, "soundness run over every remaining sequencing axiom (200 instances each)");
    out
}

/// `Y·...·Y·X` with `n` copies of `Y`, nested the way the exploration builds it.
fn spine_term(n: usize) -> ProcExpr {
    let x = ProcExpr::ident("X");
    if n == 0 {
        return x;
    }
    let mut ys = ProcExpr::ident("Y");
    for _ in 1..n {
        ys = ProcExpr::seq_legacy(ys, ProcExpr::ident("Y"));
    }
    ProcExpr::seq_legacy(ys, x)
}

fn transparency() -> Outcome {
    let mut out = Outcome::new();
    let spec = corpus::spec(corpus::DIFFERENCE_SPEC);
    let lts = explore_spec(&spec, Bounds::new(6, MAX_STATES), SemanticsKind::Plain).unwrap();
    let adj = lts.adjacency();
    let mut degrees = Vec::new();
    let mut state = lts.root;
    for n in 0..6 {
        let want = print_expr(&spine_term(n), &spec.vars);
        if lts.labels[state] != want {
            out.check(false, format!("spine state {n} is `{}`, expected `{want}`", lts.labels[state]));
            return out;
        }
        degrees.push(adj[state].len());
        let next = print_expr(&spine_term(n + 1), &spec.vars);
        match adj[state].iter().find(|(a, d)| a.name() == "a" && lts.labels[*d] == next) {
            Some((_, d)) => state = *d,
            None if n == 5 => break,
            None => {
                out.check(false, format!("no a-step from `{want}` to `{next}`"));
                return out;
            }
        }
    }
    out.note(format!("out-degrees along the a-spine: {degrees:?}"));
    out.check(degrees.windows(2).all(|w| w[0] < w[1]), "out-degrees strictly increase");

    let seqc_text = corpus::DIFFERENCE_SPEC.replace("mode seq;", "mode seqc;").replace('·', ";");
    let seqc = parse_spec(&seqc_text).unwrap();
    let g = spec_graph(&seqc, 12);
    check_bisim(&mut out, &g, &spec_graph(&corpus::spec(corpus::COUNTER_SPEC), 12), 12, "sequencing variant vs counter");
    check_bisim(&mut out, &g, &automaton_graph(&corpus::pda(corpus::COUNTER_PDA), 12), 12, "sequencing variant vs counter automaton");
    out
}

fn guardedness_gate() -> Outcome {
    let mut out = Outcome::new();
    for (name, text) in [("X = 1 + X·a.1", corpus::UNGUARDED_SPEC), ("X = X;a.1 + 1", corpus::UNGUARDED_SEQC_SPEC)] {
        let spec = corpus::spec(text);
        match check_guarded(&spec) {
            Guardedness::Unguarded(cycle) => {
                out.check(cycle.first().map(String::as_str) == Some("X"), format!("{name}: rejected, cycle {}", cycle.join(" -> ")))
            }
            Guardedness::Guarded => out.check(false, format!("{name}: accepted")),
        }
        let unguarded = |r: Result<(), SemanticsError>| matches!(r, Err(SemanticsError::Unguarded { .. }));
        let gates = [
            unguarded(Engine::new(&spec).map(|_| ())),
            unguarded(explore_spec(&spec, Bounds::default(), SemanticsKind::Plain).map(|_| ())),
            unguarded(steps_plain(&spec, &ProcExpr::ident("X")).map(|_| ())),
            to_gnf(&spec).is_err(),
            spec_to_pda(&spec).is_err(),
        ];
        out.check(gates.iter().all(|&g| g), format!("{name}: engine, exploration, steps and conversions all refuse"));
    }
    out
}

fn onestate() -> Outcome {
    let mut out = Outcome::new();
    let counter_pda = corpus::pda(corpus::COUNTER_PDA);
    let spec = onestate_pda_to_spec(&counter_pda).unwrap();
    match match_up_to_renaming(&spec, &corpus::spec(corpus::COUNTER_SPEC)) {
        Some(r) => out.check(true, format!("counter automaton gives the counter equations (renaming {r:?})")),
        None => out.check(false, format!("counter automaton gives {:?}", equations(&spec))),
    }
    check_bisim(&mut out, &spec_graph(&spec, 10), &automaton_graph(&counter_pda, 10), 10, "counter");

    let stack_pda = corpus::pda(corpus::STACK_PDA);
    let spec = onestate_pda_to_spec(&stack_pda).unwrap();
    let expected = parse_spec(
        "spec stack { init X;
           X = 1 + push_d.(X_d;X) + push_e.(X_e;X)
           X_d = 1 + pop_d.1 + push_d.(X_d;X_d) + push_e.(X_e;X_d)
           X_e = 1 + pop_e.1 + push_d.(X_d;X_e) + push_e.(X_e;X_e) }",
    )
    .unwrap();
    match match_up_to_renaming(&spec, &expected) {
        Some(_) => out.check(true, "stack automaton gives the stack equations"),
        None => out.check(false, format!("stack automaton gives {:?}", equations(&spec))),
    }
    check_bisim(&mut out, &spec_graph(&spec, 10), &automaton_graph(&stack_pda, 10), 10, "stack");
    out
}

fn transition_key(t: &pdaproc::pda::Transition, states: &BTreeMap<String, String>, data: &BTreeMap<String, String>) -> String {
    let sym = |d: &String| data.get(d).cloned().unwrap_or_else(|| format!("?{d}"));
    let pop = t.pop.as_ref().map(sym).unwrap_or_else(|| "eps".into());
    let push: Vec<String> = t.push.iter().map(sym).collect();
    let push = if push.is_empty() { "eps".to_string() } else { push.join("") };
    format!("{} --{}[{pop}/{push}]--> {}", states[&t.src], t.action, states[&t.dst])
}

fn twostate() -> Outcome {
    let mut out = Outcome::new();
    let spec = corpus::spec(corpus::TWOSTATE_SPEC);
    let pda = spec_to_pda(&spec).unwrap();
    out.check(pda.states.len() <= 2, format!("{} states", pda.states.len()));

    let expected: BTreeSet<String> =
        ["n --a[eps/X]--> n", "n --a[X/XY]--> n", "n --b[X/eps]--> t", "t --c[Y/eps]--> t"].iter().map(|s| s.to_string()).collect();
    let data: Vec<String> = pda.data.clone();
    let mut matched = false;
    for state_perm in permutations(&pda.states) {
        let states: BTreeMap<String, String> = state_perm.iter().cloned().zip(["n", "t"].map(String::from)).collect();
        for data_perm in permutations(&data) {
            let names: BTreeMap<String, String> =
                data_perm.iter().cloned().zip(["X", "Y", "Z", "W"].map(String::from)).collect();
            let got: BTreeSet<String> = pda.transitions.iter().map(|t| transition_key(t, &states, &names)).collect();
            matched |= got == expected;
        }
    }
    out.check(matched, "transition set matches the two-state figure up to renaming");
    for t in &pda.transitions {
        out.note(pdaproc::parser::print_transition(t));
    }
    check_bisim(&mut out, &spec_graph(&spec, 12), &automaton_graph(&pda, 12), 12, "specification vs automaton");
    let drawn = parse_pda(
        "pda drawn { states n, t; init n; final t; data X, Y;
           n --a[eps/X]--> n  n --a[X/XY]--> n  n --b[X/eps]--> t  t --c[Y/eps]--> t }",
    )
    .unwrap();
    if bisim_at(&spec_graph(&spec, 12), &automaton_graph(&drawn, 12), 12).is_err() {
        out.note("the drawn four-transition automaton is not 12-bisimilar to its specification:");
        out.note("it has no initial b-step, and after a^n b it allows n-1 c-steps where its specification allows n");
    }

    let (separated, sep) = separate(&to_aignf(&spec).unwrap()).unwrap();
    let holds = check_separation_along(&separated, &sep, &separated.init, 12).unwrap();
    out.check(holds, format!("separation by {:?} holds along every transition to depth 12", sep.0));
    out
}

fn separation() -> Outcome {
    let mut out = Outcome::new();
    let input = corpus::spec(corpus::NONSEPARATION_SPEC);
    let (produced, sep) = separate(&input).unwrap();
    let expected = corpus::spec(corpus::SEPARATED_SPEC);
    match match_up_to_renaming(&produced, &expected) {
        Some(rename) => {
            let mapped: BTreeSet<String> = sep.0.iter().map(|x| rename[&x.to_string()].clone()).collect();
            out.check(true, format!("equations match the three-identifier example (renaming {rename:?})"));
            out.check(mapped == BTreeSet::from(["Y".to_string()]), format!("separating set {mapped:?} is {{Y}}"));
        }
        None => out.check(false, format!("separate gives {:?}", equations(&produced))),
    }
    check_bisim(&mut out, &spec_graph(&produced, 10), &spec_graph(&input, 10), 10, "output vs input");
    out
}

fn ladder_signal_spec() -> Outcome {
    let mut out = Outcome::new();
    let pda = corpus::pda(corpus::LADDER_PDA);
    let spec = pda_to_signal_spec(&pda).unwrap();
    out.check(check_guarded(&spec).is_guarded(), "result is guarded");
    check_bisim(&mut out, &spec_graph(&spec, 12), &automaton_graph(&pda, 12), 12, "derived graph vs ladder graph");

    // The displayed stack identifier, with the state_up guard distributed over its sum.
    let has = |x: &str, term: &str| -> bool {
        let t = parse_term(&spec, term).unwrap();
        spec.body(x).map(|b| summands(b).into_iter().any(|s| *s == t)).unwrap_or(false)
    };
    for term in [
        "[state_down] -> b.([state_down] ^^ 1)",
        "[state_up] -> a.([state_up] ^^ X_1;X_1)",
        "[state_up] -> b.([state_up] ^^ 1)",
        "[state_up] -> c.([state_down] ^^ X_1)",
    ] {
        out.check(has("X_1", term), format!("X_1 has summand {term}"));
    }
    // The displayed initial identifier inlines the empty-stack identifier as
    // `state_up :-> S + state_down :-> 1`.
    out.check(has("X", "a.([state_up] ^^ X_1;X_eps)"), "X has summand a.([state_up] ^^ X_1;X_eps)");
    out.check(has("X_eps", "[state_down] -> 1"), "X_eps has summand [state_down] -> 1");
    let up_summands: BTreeSet<String> = spec
        .body("X_eps")
        .map(|b| summands(b).into_iter().filter_map(|s| match s {
            ProcExpr::Guard(p, body) if print_expr(&ProcExpr::guard(p.clone(), ProcExpr::Accept), &spec.vars).starts_with("[state_up]") => {
                Some(print_expr(body, &spec.vars))
            }
            _ => None,
        }).collect())
        .unwrap_or_default();
    let x_summands: BTreeSet<String> = printed_summands(&spec, "X").into_iter().filter(|s| s != "1").collect();
    out.check(up_summands == x_summands, "X_eps under state_up offers exactly the steps of X");
    for x in spec.equations.keys() {
        out.note(format!("{x} = {}", print_expr(spec.body(x).unwrap(), &spec.vars)));
    }
    out
}

/// One conversion checked against the graph of its source.
fn round_trip_case(out: &mut Outcome, name: &str, source: &Lts, produced: &Lts, failures: &mut usize) {
    for k in [4, 8, 12] {
        if let Err(e) = bisim_at(source, produced, k) {
            *failures += 1;
            out.check(false, format!("{name} at k={k}: {e}"));
        }
    }
}

fn round_trips() -> Outcome {
    let mut out = Outcome::new();
    let start = Instant::now();
    let mut plain: Vec<(String, Spec)> = Vec::new();
    for text in [corpus::COUNTER_SPEC, corpus::TWOSTATE_SPEC, corpus::NONSEPARATION_SPEC, corpus::SEPARATED_SPEC] {
        let s = corpus::spec(text);
        plain.push((s.name.clone(), s));
    }
    let seqc_difference = corpus::DIFFERENCE_SPEC.replace("mode seq;", "mode seqc;").replace('·', ";");
    plain.push(("difference-seqc".into(), parse_spec(&seqc_difference).unwrap()));
    for text in [corpus::COUNTER_PDA, corpus::STACK_PDA] {
        let pda = corpus::pda(text);
        plain.push((format!("{}-onestate", pda.name), onestate_pda_to_spec(&pda).unwrap()));
    }
    let mut signal: Vec<(String, Spec)> = vec![
        ("cointoss".into(), corpus::spec(corpus::COINTOSS_SPEC)),
        ("falseguards".into(), corpus::spec(corpus::FALSEGUARDS_SPEC)),
        ("ladder-signal".into(), pda_to_signal_spec(&corpus::pda(corpus::LADDER_PDA)).unwrap()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for i in 0..20 {
        plain.push((format!("random-{i}"), random_spec(&mut rng, 4, 3)));
    }

    let mut failures = 0;
    let total = plain.len() + signal.len();
    for (name, spec) in &plain {
        let source = spec_graph(spec, 12);
        let pda = spec_to_pda(spec).unwrap();
        round_trip_case(&mut out, &format!("{name} -> automaton"), &source, &automaton_graph(&pda, 12), &mut failures);
        let sig = pda_to_signal_spec(&pda).unwrap();
        round_trip_case(&mut out, &format!("{name} -> automaton -> signal spec"), &source, &spec_graph(&sig, 12), &mut failures);
        let back = signal_spec_to_pda(&sig).unwrap();
        round_trip_case(&mut out, &format!("{name} -> ... -> automaton"), &source, &automaton_graph(&back, 12), &mut failures);
    }
    for (name, spec) in signal.drain(..) {
        let source = spec_graph(&spec, 12);
        let pda = signal_spec_to_pda(&spec).unwrap();
        round_trip_case(&mut out, &format!("{name} -> automaton"), &source, &automaton_graph(&pda, 12), &mut failures);
        let sig = pda_to_signal_spec(&pda).unwrap();
        round_trip_case(&mut out, &format!("{name} -> automaton -> signal spec"), &source, &spec_graph(&sig, 12), &mut failures);
    }
    let elapsed = start.elapsed();
    out.check(failures == 0 && total >= 20, format!("{total} specifications, every conversion agrees at k = 4, 8, 12"));
    out.check(elapsed < Duration::from_secs(300), format!("runtime {elapsed:.2?} under 5 min"));
    out
}

fn head_normal_forms() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut terms, mut unsatisfiable) = (0, 0);
    let (mut hnf_ok, mut reduced_ok, mut witnessed, mut depth_ok) = (0, 0, 0, 0);
    while terms < 500 {
        let nvars = rng.gen_range(0..=3);
        let ctx = closed_context(nvars, Mode::Seqc);
        let t = TermGen::new(nvars, 4).term(&mut rng);
        let h = match hnf(&ctx, &t) {
            Ok(h) => h,
            Err(e) => {
                out.check(false, format!("hnf of {} failed: {e}", print_expr(&t, &ctx.vars)));
                return out;
            }
        };
        // Reduction is defined for terms that are consistent under some valuation.
        if h.root_signal.is_false() {
            unsatisfiable += 1;
            continue;
        }
        terms += 1;
        hnf_ok += usize::from(stateless_bisimilar(&ctx, &t, &h.to_expr()).unwrap());
        let r = reduce_hnf(&ctx, &h).unwrap();
        reduced_ok += usize::from(stateless_bisimilar(&ctx, &t, &r.to_expr()).unwrap());
        witnessed += usize::from(is_reduced(&ctx, &r).unwrap());
        let d = depth(&ctx, &t).unwrap();
        depth_ok += usize::from(r.summands.iter().all(|s| depth(&ctx, &s.tail).unwrap() < d));
    }
    out.note(format!("{unsatisfiable} generated terms skipped: their root signal is unsatisfiable"));
    out.check(hnf_ok == 500, format!("hnf bisimilar to its input on {hnf_ok}/500"));
    out.check(reduced_ok == 500, format!("reduce_hnf bisimilar to its input on {reduced_ok}/500"));
    out.check(witnessed == 500, format!("every reduced summand has a witnessing valuation on {witnessed}/500"));
    out.check(depth_ok == 500, format!("reduced summand tails are strictly shallower on {depth_ok}/500"));
    out
}

fn decision_procedure() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut disagreements, mut constructed_equal, mut equal) = (0, 0, 0);
    for i in 0..500 {
        let nvars = rng.gen_range(0..=3);
        let ctx = closed_context(nvars, Mode::Seqc);
        let gen = TermGen::new(nvars, 3);
        let p = gen.term(&mut rng);
        let constructed = i < 100;
        let q = if constructed { random_rewrites(&p, Mode::Seqc, nvars, 6, &mut rng) } else { gen.term(&mut rng) };
        let oracle = stateless_bisimilar(&ctx, &p, &q).unwrap();
        let decided = match decide_bisim_rf(&ctx, &p, &q) {
            Ok(v) => Ok(v == RfVerdict::Equal),
            Err(e) => Err(e.to_string()),
        };
        equal += usize::from(oracle);
        constructed_equal += usize::from(constructed && oracle);
        if decided != Ok(oracle) {
            disagreements += 1;
            out.note(format!("{}  vs  {}: oracle {oracle}, decided {decided:?}", print_expr(&p, &ctx.vars), print_expr(&q, &ctx.vars)));
        }
    }
    out.note(format!("{equal} of 500 pairs bisimilar"));
    out.check(constructed_equal == 100, format!("{constructed_equal}/100 constructed pairs are bisimilar per the oracle"));
    out.check(disagreements == 0, format!("{disagreements} disagreements"));
    out
}

fn cointoss() -> Outcome {
    let mut out = Outcome::new();
    let spec = corpus::spec(corpus::COINTOSS_SPEC);
    let lts = explore_spec(&spec, Bounds::new(50, MAX_STATES), SemanticsKind::Derived).unwrap();
    out.check(lts.is_complete(), format!("derived graph fully explored: {} states", lts.num_states()));
    out.check(coin_shape(&lts), "derived graph: toss to heads and tails, toss loop on tails, hurray from heads to acceptance");
    let (quotient, _) = partition_refine(&lts).unwrap();
    out.check(quotient.num_states() == 4, format!("quotient has {} states", quotient.num_states()));
    out.check(coin_shape(&quotient), "quotient has the coin-toss shape");
    out
}

/// Root with toss-successors `heads` and `tails`, `tails` tossing to itself and to
/// `heads`, `heads` doing hurray to an accepting state with no steps, four states.
fn coin_shape(lts: &Lts) -> bool {
    let adj = lts.adjacency();
    let steps = |s: usize| -> BTreeSet<(String, usize)> { adj[s].iter().map(|(a, d)| (a.name().to_string(), *d)).collect() };
    let root = steps(lts.root);
    let targets: Vec<usize> = root.iter().map(|(_, d)| *d).collect();
    if lts.num_states() != 4 || targets.len() != 2 || root.iter().any(|(a, _)| a != "toss") {
        return false;
    }
    let pick = |tails: usize, heads: usize| -> bool {
        let done = steps(heads);
        let Some((a, end)) = done.iter().next().cloned() else { return false };
        tails != lts.root
            && steps(tails) == BTreeSet::from([("toss".to_string(), tails), ("toss".to_string(), heads)])
            && done.len() == 1
            && a == "hurray"
            && lts.accepting == BTreeSet::from([end])
            && adj[end].is_empty()
    };
    pick(targets[0], targets[1]) || pick(targets[1], targets[0])
}

fn falseguards() -> Outcome {
    let mut out = Outcome::new();
    let spec = corpus::spec(corpus::FALSEGUARDS_SPEC);
    let graph = |x: &str| explore_term(&spec, &ProcExpr::ident(x), Bounds::new(20, MAX_STATES), SemanticsKind::Derived).unwrap();
    let (p, q) = (graph("P1"), graph("Q1"));
    out.check(bisimilar_complete(&p, &q).unwrap(), "derived graphs of [P] -> a.1 and [P] -> b.1 are bisimilar");
    let stateless = stateless_bisimilar(&spec, spec.body("P1").unwrap(), spec.body("Q1").unwrap()).unwrap();
    out.check(!stateless, "they are not stateless bisimilar");
    out
}
