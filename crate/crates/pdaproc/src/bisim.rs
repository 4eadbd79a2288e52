//! Equivalence checking on explored graphs and on recursion-free terms.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::core::{Action, ProcExpr, Spec, Valuation};
use crate::semantics::{Engine, Lts, SemanticsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BisimError {
    #[error("graph has unexplored frontier states; explore it completely first")]
    FrontierNotEmpty,
    #[error("graph explored only to depth {explored}; depth {needed} is needed for k = {k}")]
    InsufficientDepth { k: usize, needed: usize, explored: usize },
    #[error("term contains process identifiers; only recursion-free terms are supported")]
    RecursionPresent,
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

/// Which graph a move in a witness is taken in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Evidence that two states are not related by the k-th approximant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// Exactly one of the two states accepts.
    AcceptMismatch { left: usize, right: usize },
    /// Exactly one of the two states is an unexplored frontier state.
    FrontierMismatch { left: usize, right: usize },
    /// `side` moves by `action` to `target`; every reply of the other side is refuted.
    Move {
        left: usize,
        right: usize,
        side: Side,
        action: Action,
        target: usize,
        /// Pairs of reply state and a witness against (target, reply), oriented left/right.
        replies: Vec<(usize, Witness)>,
    },
}

impl Witness {
    /// Number of moves along the longest branch.
    pub fn depth(&self) -> usize {
        match self {
            Witness::AcceptMismatch { .. } | Witness::FrontierMismatch { .. } => 0,
            Witness::Move { replies, .. } => 1 + replies.iter().map(|(_, w)| w.depth()).max().unwrap_or(0),
        }
    }

    pub fn states(&self) -> (usize, usize) {
        match self {
            Witness::AcceptMismatch { left, right }
            | Witness::FrontierMismatch { left, right }
            | Witness::Move { left, right, .. } => (*left, *right),
        }
    }

    /// The action performed at the top of the move tree, if any.
    pub fn first_action(&self) -> Option<&Action> {
        match self {
            Witness::Move { action, .. } => Some(action),
            _ => None,
        }
    }

    fn render(&self, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        match self {
            Witness::AcceptMismatch { left, right } => {
                out.push_str(&format!("{pad}acceptance differs: left {left} vs right {right}\n"))
            }
            Witness::FrontierMismatch { left, right } => {
                out.push_str(&format!("{pad}exploration frontier differs: left {left} vs right {right}\n"))
            }
            Witness::Move { left, right, side, action, target, replies } => {
                let who = match side {
                    Side::Left => "left",
                    Side::Right => "right",
                };
                out.push_str(&format!(
                    "{pad}at (left {left}, right {right}): {who} does {action} to {target}; {} repl{}\n",
                    replies.len(),
                    if replies.len() == 1 { "y" } else { "ies" }
                ));
                for (_, w) in replies {
                    w.render(indent + 1, out);
                }
            }
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.render(0, &mut out);
        f.write_str(out.trim_end())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KBisimVerdict {
    Equivalent(usize),
    Distinguished(Witness),
}

impl KBisimVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, KBisimVerdict::Equivalent(_))
    }
}

struct KChecker<'a> {
    left: &'a Lts,
    right: &'a Lts,
    adj_l: Vec<Vec<(Action, usize)>>,
    adj_r: Vec<Vec<(Action, usize)>>,
    memo: HashMap<(usize, usize, usize), bool>,
}

impl KChecker<'_> {
    fn base(&self, s: usize, t: usize) -> bool {
        self.left.accepting.contains(&s) == self.right.accepting.contains(&t)
            && self.left.frontier.contains(&s) == self.right.frontier.contains(&t)
    }

    fn related(&mut self, s: usize, t: usize, i: usize) -> bool {
        if !self.base(s, t) {
            return false;
        }
        if i == 0 || self.left.frontier.contains(&s) {
            return true;
        }
        if let Some(&b) = self.memo.get(&(s, t, i)) {
            return b;
        }
        let moves_l = self.adj_l[s].clone();
        let moves_r = self.adj_r[t].clone();
        let ok = moves_l
            .iter()
            .all(|(a, s2)| moves_r.iter().any(|(b, t2)| a == b && self.related(*s2, *t2, i - 1)))
            && moves_r
                .iter()
                .all(|(b, t2)| moves_l.iter().any(|(a, s2)| a == b && self.related(*s2, *t2, i - 1)));
        self.memo.insert((s, t, i), ok);
        ok
    }

    /// Builds a witness for a pair known not to be related at level `i`.
    fn witness(&mut self, s: usize, t: usize, i: usize) -> Witness {
        if self.left.accepting.contains(&s) != self.right.accepting.contains(&t) {
            return Witness::AcceptMismatch { left: s, right: t };
        }
        if !self.base(s, t) {
            return Witness::FrontierMismatch { left: s, right: t };
        }
        let moves_l = self.adj_l[s].clone();
        let moves_r = self.adj_r[t].clone();
        for (a, s2) in &moves_l {
            if !moves_r.iter().any(|(b, t2)| a == b && self.related(*s2, *t2, i - 1)) {
                let replies = moves_r
                    .iter()
                    .filter(|(b, _)| b == a)
                    .map(|(_, t2)| (*t2, self.witness(*s2, *t2, i - 1)))
                    .collect();
                return Witness::Move { left: s, right: t, side: Side::Left, action: a.clone(), target: *s2, replies };
            }
        }
        for (b, t2) in &moves_r {
            if !moves_l.iter().any(|(a, s2)| a == b && self.related(*s2, *t2, i - 1)) {
                let replies = moves_l
                    .iter()
                    .filter(|(a, _)| a == b)
                    .map(|(_, s2)| (*s2, self.witness(*s2, *t2, i - 1)))
                    .collect();
                return Witness::Move { left: s, right: t, side: Side::Right, action: b.clone(), target: *t2, replies };
            }
        }
        unreachable!("witness requested for related states")
    }
}

fn check_depth(lts: &Lts, k: usize) -> Result<(), BisimError> {
    match lts.min_frontier_depth() {
        Some(d) if d <= k => Err(BisimError::InsufficientDepth { k, needed: k + 1, explored: d }),
        _ => Ok(()),
    }
}

/// Decides whether the roots are related by the k-th bisimulation approximant.
///
/// Both graphs must be explored at least to depth `k + 1`, so that no state within
/// `k` steps of a root is a frontier state.
pub fn k_bisimilar(left: &Lts, right: &Lts, k: usize) -> Result<KBisimVerdict, BisimError> {
    check_depth(left, k)?;
    check_depth(right, k)?;
    let mut checker =
        KChecker { left, right, adj_l: left.adjacency(), adj_r: right.adjacency(), memo: HashMap::new() };
    if checker.related(left.root, right.root, k) {
        Ok(KBisimVerdict::Equivalent(k))
    } else {
        Ok(KBisimVerdict::Distinguished(checker.witness(left.root, right.root, k)))
    }
}

/// Checks a witness against both graphs, starting from the pair it names.
pub fn replay_witness(left: &Lts, right: &Lts, w: &Witness) -> bool {
    match w {
        Witness::AcceptMismatch { left: s, right: t } => {
            left.accepting.contains(s) != right.accepting.contains(t)
        }
        Witness::FrontierMismatch { left: s, right: t } => left.frontier.contains(s) != right.frontier.contains(t),
        Witness::Move { left: s, right: t, side, action, target, replies } => {
            let (mover, mover_state, other, other_state) = match side {
                Side::Left => (left, *s, right, *t),
                Side::Right => (right, *t, left, *s),
            };
            if mover.frontier.contains(&mover_state) {
                return false;
            }
            if !mover.successors(mover_state).any(|(a, d)| a == action && d == *target) {
                return false;
            }
            let expected: BTreeSet<usize> =
                other.successors(other_state).filter(|(a, _)| *a == action).map(|(_, d)| d).collect();
            let given: BTreeSet<usize> = replies.iter().map(|(r, _)| *r).collect();
            if expected != given {
                return false;
            }
            replies.iter().all(|(r, sub)| {
                let want = match side {
                    Side::Left => (*target, *r),
                    Side::Right => (*r, *target),
                };
                sub.states() == want && replay_witness(left, right, sub)
            })
        }
    }
}

/// Coarsest stable partition of a fully explored graph, and the quotient graph.
pub fn partition_refine(lts: &Lts) -> Result<(Lts, Vec<usize>), BisimError> {
    if !lts.is_complete() {
        return Err(BisimError::FrontierNotEmpty);
    }
    let adj = lts.adjacency();
    let n = lts.num_states();
    let mut block: Vec<usize> = (0..n).map(|s| usize::from(lts.accepting.contains(&s))).collect();
    let mut count = usize::MAX;
    loop {
        let mut ids: HashMap<(usize, BTreeSet<(Action, usize)>), usize> = HashMap::new();
        let mut next = vec![0; n];
        for s in 0..n {
            let sig: BTreeSet<(Action, usize)> = adj[s].iter().map(|(a, d)| (a.clone(), block[*d])).collect();
            let fresh = ids.len();
            next[s] = *ids.entry((block[s], sig)).or_insert(fresh);
        }
        let new_count = ids.len();
        block = next;
        if new_count == count {
            break;
        }
        count = new_count;
    }
    let mut labels = vec![String::new(); count];
    let mut depth = vec![usize::MAX; count];
    let mut seen = vec![false; count];
    for s in 0..n {
        let b = block[s];
        if !seen[b] {
            seen[b] = true;
            labels[b] = lts.labels[s].clone();
        }
        depth[b] = depth[b].min(lts.depth[s]);
    }
    let mut transitions = Vec::new();
    for (s, a, d) in &lts.transitions {
        let t = (block[*s], a.clone(), block[*d]);
        if !transitions.contains(&t) {
            transitions.push(t);
        }
    }
    let accepting = lts.accepting.iter().map(|&s| block[s]).collect();
    let quotient =
        Lts { labels, root: block[lts.root], transitions, accepting, frontier: BTreeSet::new(), depth };
    Ok((quotient, block))
}

/// Disjoint union of two graphs; the right graph's states are shifted by the left size.
/// The root of the result is the left root.
pub fn disjoint_union(left: &Lts, right: &Lts) -> (Lts, usize) {
    let off = left.num_states();
    let mut u = left.clone();
    u.labels.extend(right.labels.iter().cloned());
    u.transitions.extend(right.transitions.iter().map(|(s, a, d)| (s + off, a.clone(), d + off)));
    u.accepting.extend(right.accepting.iter().map(|s| s + off));
    u.frontier.extend(right.frontier.iter().map(|s| s + off));
    u.depth.extend(right.depth.iter().copied());
    (u, right.root + off)
}

/// Exact bisimilarity of the roots of two fully explored graphs.
pub fn bisimilar_complete(left: &Lts, right: &Lts) -> Result<bool, BisimError> {
    let (u, right_root) = disjoint_union(left, right);
    let (_, block) = partition_refine(&u)?;
    Ok(block[u.root] == block[right_root])
}

/// Out-degree of every explored state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchingProfile {
    pub degrees: Vec<usize>,
    /// States whose degree is only a lower bound because they were not expanded.
    pub lower_bounds: BTreeSet<usize>,
    pub max: usize,
}

pub fn branching_profile(lts: &Lts) -> BranchingProfile {
    let mut degrees = vec![0; lts.num_states()];
    for (s, _, _) in &lts.transitions {
        degrees[*s] += 1;
    }
    let max = degrees.iter().copied().max().unwrap_or(0);
    BranchingProfile { degrees, lower_bounds: lts.frontier.clone(), max }
}

/// All terms reachable from `roots` under any valuation, in discovery order.
fn reachable_terms(engine: &Engine, roots: &[&ProcExpr]) -> Result<Vec<ProcExpr>, BisimError> {
    let nvars = engine.spec().nvars();
    let mut terms: Vec<ProcExpr> = Vec::new();
    let mut index: HashMap<ProcExpr, usize> = HashMap::new();
    for r in roots {
        if !index.contains_key(*r) {
            index.insert((*r).clone(), terms.len());
            terms.push((*r).clone());
        }
    }
    let mut i = 0;
    while i < terms.len() {
        let t = terms[i].clone();
        for v in Valuation::all(nvars) {
            if engine.cons(&t, v)? {
                for (_, q, _) in engine.steps_val(&t, v)? {
                    if !index.contains_key(&q) {
                        index.insert(q.clone(), terms.len());
                        terms.push(q);
                    }
                }
            }
        }
        i += 1;
    }
    Ok(terms)
}

/// Decides stateless bisimilarity of two recursion-free terms under the reset effect.
///
/// States are terms; two terms are related when, under every valuation, they agree on
/// consistency and acceptance and can match each other's steps (including the
/// resulting valuation) into related terms.
pub fn stateless_bisimilar(spec: &Spec, p: &ProcExpr, q: &ProcExpr) -> Result<bool, BisimError> {
    if !p.is_recursion_free() || !q.is_recursion_free() {
        return Err(BisimError::RecursionPresent);
    }
    let engine = Engine::new(spec)?;
    let terms = reachable_terms(&engine, &[p, q])?;
    let nvars = spec.nvars();
    let vals: Vec<Valuation> = Valuation::all(nvars).collect();
    let pos: HashMap<&ProcExpr, usize> = terms.iter().enumerate().map(|(i, t)| (t, i)).collect();
    // Per term and valuation: (consistent, accepts, steps as (action, v', target index)).
    type Local = (bool, bool, Vec<(Action, Valuation, usize)>);
    let mut local: Vec<Vec<Local>> = Vec::with_capacity(terms.len());
    for t in &terms {
        let mut row = Vec::with_capacity(vals.len());
        for &v in &vals {
            if engine.cons(t, v)? {
                let acc = engine.accepts_val(t, v)?;
                let steps = engine.steps_val(t, v)?.into_iter().map(|(a, q, v2)| (a, v2, pos[&q])).collect();
                row.push((true, acc, steps));
            } else {
                row.push((false, false, Vec::new()));
            }
        }
        local.push(row);
    }
    let n = terms.len();
    let mut block = vec![0usize; n];
    let mut count = 1;
    loop {
        type Sig = Vec<(bool, bool, BTreeSet<(Action, Valuation, usize)>)>;
        let mut ids: HashMap<(usize, Sig), usize> = HashMap::new();
        let mut next = vec![0; n];
        for s in 0..n {
            let sig: Sig = local[s]
                .iter()
                .map(|(c, a, steps)| (*c, *a, steps.iter().map(|(x, v, d)| (x.clone(), *v, block[*d])).collect()))
                .collect();
            let fresh = ids.len();
            next[s] = *ids.entry((block[s], sig)).or_insert(fresh);
        }
        block = next;
        if ids.len() == count {
            break;
        }
        count = ids.len();
    }
    Ok(block[pos[p]] == block[pos[q]])
}
