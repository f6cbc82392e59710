//! Layer 1: LTL planning over the regions of interest.
//!
//! A formula over region atoms is translated to a generalized Büchi
//! automaton; its product with the small region transition system yields a
//! prefix-suffix accepting path. Word semantics: each position of the word
//! is exactly one region (paths visit regions one at a time), so atoms are
//! mutually exclusive.

mod buchi;
mod parser;

pub use buchi::{accepts_lasso, ltl_to_buchi, BuchiAutomaton, Guard};
pub use parser::parse_ltl;

use std::collections::VecDeque;

use crate::error::LtlError;

/// Formula tree over region atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LtlAst {
    True,
    False,
    Atom(String),
    Not(Box<LtlAst>),
    And(Box<LtlAst>, Box<LtlAst>),
    Or(Box<LtlAst>, Box<LtlAst>),
    Implies(Box<LtlAst>, Box<LtlAst>),
    Next(Box<LtlAst>),
    Eventually(Box<LtlAst>),
    Always(Box<LtlAst>),
    Until(Box<LtlAst>, Box<LtlAst>),
    Release(Box<LtlAst>, Box<LtlAst>),
}

impl std::fmt::Display for LtlAst {
    /// Fully parenthesized concrete syntax; re-parses to the same tree.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LtlAst::True => write!(f, "true"),
            LtlAst::False => write!(f, "false"),
            LtlAst::Atom(a) => write!(f, "{a}"),
            LtlAst::Not(x) => write!(f, "! {x}"),
            LtlAst::Next(x) => write!(f, "X {x}"),
            LtlAst::Eventually(x) => write!(f, "F {x}"),
            LtlAst::Always(x) => write!(f, "G {x}"),
            LtlAst::And(a, b) => write!(f, "({a} && {b})"),
            LtlAst::Or(a, b) => write!(f, "({a} || {b})"),
            LtlAst::Implies(a, b) => write!(f, "({a} -> {b})"),
            LtlAst::Until(a, b) => write!(f, "({a} U {b})"),
            LtlAst::Release(a, b) => write!(f, "({a} R {b})"),
        }
    }
}

/// Region transition system `S = (Pi, delta)`.
#[derive(Debug, Clone)]
pub struct RoiTransitionSystem {
    pub regions: Vec<String>,
    /// `delta[i]` lists the region indices reachable from region `i`.
    pub delta: Vec<Vec<usize>>,
}

impl RoiTransitionSystem {
    pub fn new(regions: Vec<String>, delta: Vec<Vec<usize>>) -> Self {
        assert_eq!(regions.len(), delta.len());
        for succ in &delta {
            for &j in succ {
                assert!(j < regions.len());
            }
        }
        Self { regions, delta }
    }

    /// Complete transition relation: every region can follow every region.
    pub fn complete(regions: Vec<String>) -> Self {
        let all: Vec<usize> = (0..regions.len()).collect();
        let delta = vec![all; regions.len()];
        Self { regions, delta }
    }

    pub fn region_index(&self, name: &str) -> Option<usize> {
        self.regions.iter().position(|r| r == name)
    }
}

/// Prefix-suffix accepting path; the suffix repeats infinitely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcceptingPath {
    pub prefix: Vec<String>,
    pub suffix: Vec<String>,
}

/// Truth of `ast` on the ultimately periodic word `prefix . suffix^omega`.
///
/// Evaluates bottom-up over the `|prefix| + |suffix|` distinct positions,
/// with the successor of the last position looping back to the start of the
/// suffix; U/F are least fixpoints, R/G greatest fixpoints over the loop.
pub fn evaluate_on_lasso(ast: &LtlAst, prefix: &[String], suffix: &[String]) -> bool {
    assert!(!suffix.is_empty(), "suffix must be nonempty");
    let p = prefix.len();
    let word: Vec<&str> = prefix
        .iter()
        .chain(suffix.iter())
        .map(String::as_str)
        .collect();
    fn lfp(a: &[bool], b: &[bool], p: usize) -> Vec<bool> {
        let n = a.len();
        let succ = |i: usize| if i + 1 < n { i + 1 } else { p };
        let mut v = vec![false; n];
        loop {
            let mut changed = false;
            for i in (0..n).rev() {
                let nv = b[i] || (a[i] && v[succ(i)]);
                if nv != v[i] {
                    v[i] = nv;
                    changed = true;
                }
            }
            if !changed {
                return v;
            }
        }
    }

    fn gfp(a: &[bool], b: &[bool], p: usize) -> Vec<bool> {
        let n = a.len();
        let succ = |i: usize| if i + 1 < n { i + 1 } else { p };
        let mut v = vec![true; n];
        loop {
            let mut changed = false;
            for i in (0..n).rev() {
                let nv = b[i] && (a[i] || v[succ(i)]);
                if nv != v[i] {
                    v[i] = nv;
                    changed = true;
                }
            }
            if !changed {
                return v;
            }
        }
    }

    fn eval(ast: &LtlAst, word: &[&str], p: usize) -> Vec<bool> {
        let n = word.len();
        let succ = |i: usize| if i + 1 < n { i + 1 } else { p };
        match ast {
            LtlAst::True => vec![true; n],
            LtlAst::False => vec![false; n],
            LtlAst::Atom(a) => word.iter().map(|w| *w == a).collect(),
            LtlAst::Not(x) => eval(x, word, p).iter().map(|v| !v).collect(),
            LtlAst::And(a, b) => {
                let (va, vb) = (eval(a, word, p), eval(b, word, p));
                va.iter().zip(&vb).map(|(x, y)| *x && *y).collect()
            }
            LtlAst::Or(a, b) => {
                let (va, vb) = (eval(a, word, p), eval(b, word, p));
                va.iter().zip(&vb).map(|(x, y)| *x || *y).collect()
            }
            LtlAst::Implies(a, b) => {
                let (va, vb) = (eval(a, word, p), eval(b, word, p));
                va.iter().zip(&vb).map(|(x, y)| !*x || *y).collect()
            }
            LtlAst::Next(x) => {
                let v = eval(x, word, p);
                (0..n).map(|i| v[succ(i)]).collect()
            }
            LtlAst::Until(a, b) => lfp(&eval(a, word, p), &eval(b, word, p), p),
            LtlAst::Release(a, b) => gfp(&eval(a, word, p), &eval(b, word, p), p),
            LtlAst::Eventually(x) => lfp(&vec![true; n], &eval(x, word, p), p),
            LtlAst::Always(x) => gfp(&vec![false; n], &eval(x, word, p), p),
        }
    }

    eval(ast, &word, p)[0]
}

/// Deduplicated consecutive region pairs of a path, in first-occurrence
/// order, covering the prefix, the prefix-suffix seam, and the suffix
/// wrap-around.
pub fn consecutive_pairs(path: &AcceptingPath) -> Vec<(String, String)> {
    assert!(!path.suffix.is_empty());
    let seq: Vec<&String> = path.prefix.iter().chain(path.suffix.iter()).collect();
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut push = |a: &String, b: &String| {
        if !pairs.iter().any(|(x, y)| x == a && y == b) {
            pairs.push((a.clone(), b.clone()));
        }
    };
    for w in seq.windows(2) {
        push(w[0], w[1]);
    }
    push(path.suffix.last().unwrap(), &path.suffix[0]);
    pairs
}

/// Product construction and accepting-lasso search on `ts x aut`.
///
/// Generalized acceptance is degeneralized by a counter that advances when a
/// state of the current acceptance set is left; a breadth-first search finds
/// a reachable accepting product state together with a cycle through it.
pub fn find_accepting_path(
    ts: &RoiTransitionSystem,
    aut: &BuchiAutomaton,
    initial: &str,
) -> Result<AcceptingPath, LtlError> {
    let r0 = ts
        .region_index(initial)
        .ok_or_else(|| LtlError::UnknownInitialRegion(initial.to_string()))?;
    let k = aut.accepting.len();
    let nr = ts.regions.len();
    let nq = aut.guards.len();
    let idx = |r: usize, q: usize, c: usize| (r * nq + q) * k + c;
    let total = nr * nq * k;

    // counter advances when leaving a state of the current set
    let step_counter = |q: usize, c: usize| if aut.accepting[c][q] { (c + 1) % k } else { c };
    let is_accepting = |q: usize, c: usize| c == 0 && aut.accepting[0][q];

    let succs = |r: usize, q: usize, c: usize| {
        let c2 = step_counter(q, c);
        let mut out = Vec::new();
        for &r2 in &ts.delta[r] {
            for &q2 in &aut.succ[q] {
                if aut.guards[q2].matches(&ts.regions[r2]) {
                    out.push((r2, q2, c2));
                }
            }
        }
        out
    };

    // forward BFS from the initial product states, recording parents
    let mut parent: Vec<Option<usize>> = vec![None; total];
    let mut seen = vec![false; total];
    let mut queue = VecDeque::new();
    let mut order = Vec::new();
    for &q in &aut.initial {
        if aut.guards[q].matches(&ts.regions[r0]) {
            let s = idx(r0, q, 0);
            if !seen[s] {
                seen[s] = true;
                queue.push_back((r0, q, 0));
            }
        }
    }
    while let Some((r, q, c)) = queue.pop_front() {
        order.push((r, q, c));
        for (r2, q2, c2) in succs(r, q, c) {
            let s2 = idx(r2, q2, c2);
            if !seen[s2] {
                seen[s2] = true;
                parent[s2] = Some(idx(r, q, c));
                queue.push_back((r2, q2, c2));
            }
        }
    }

    let unpack = |s: usize| (s / (nq * k), (s / k) % nq, s % k);

    // for each reachable accepting state, BFS for a cycle back to it; among
    // the resulting lassos prefer the one inducing the fewest distinct
    // region pairs (fewest plans downstream), then the shortest suffix and
    // prefix
    let mut best: Option<(usize, usize, usize, AcceptingPath)> = None;
    for &(ar, aq, ac) in order.iter().filter(|&&(_, q, c)| is_accepting(q, c)) {
        let target = idx(ar, aq, ac);
        // prefix: initial -> accepting state (exclusive)
        let mut prefix_states = vec![target];
        while let Some(p) = parent[*prefix_states.last().unwrap()] {
            prefix_states.push(p);
        }
        prefix_states.reverse();
        // region pairs already paid for by the prefix; the cycle search
        // breaks breadth-first ties toward transitions reusing them
        let prefix_pairs: std::collections::HashSet<(usize, usize)> = prefix_states
            .windows(2)
            .map(|w| (unpack(w[0]).0, unpack(w[1]).0))
            .collect();
        let mut cparent: Vec<Option<usize>> = vec![None; total];
        let mut cseen = vec![false; total];
        let mut cq = VecDeque::new();
        cq.push_back((ar, aq, ac));
        let mut found = false;
        'bfs: while let Some((r, q, c)) = cq.pop_front() {
            let mut next = succs(r, q, c);
            next.sort_by_key(|&(r2, _, _)| !prefix_pairs.contains(&(r, r2)));
            for (r2, q2, c2) in next {
                let s2 = idx(r2, q2, c2);
                if s2 == target {
                    cparent[s2] = Some(idx(r, q, c));
                    found = true;
                    break 'bfs;
                }
                if !cseen[s2] {
                    cseen[s2] = true;
                    cparent[s2] = Some(idx(r, q, c));
                    cq.push_back((r2, q2, c2));
                }
            }
        }
        if !found {
            continue;
        }
        let prefix: Vec<String> = prefix_states[..prefix_states.len() - 1]
            .iter()
            .map(|&s| ts.regions[unpack(s).0].clone())
            .collect();
        // cycle: walk predecessors from the accepting state back to itself
        let mut back = Vec::new();
        let mut cur = target;
        loop {
            let p = cparent[cur].unwrap();
            if p == target {
                break;
            }
            back.push(p);
            cur = p;
        }
        let mut cycle_states = vec![target];
        cycle_states.extend(back.iter().rev().copied());
        let suffix: Vec<String> = cycle_states
            .iter()
            .map(|&s| ts.regions[unpack(s).0].clone())
            .collect();
        let candidate = AcceptingPath { prefix, suffix };
        let key = (
            consecutive_pairs(&candidate).len(),
            candidate.suffix.len(),
            candidate.prefix.len(),
        );
        if best
            .as_ref()
            .map(|(p, s, l, _)| key < (*p, *s, *l))
            .unwrap_or(true)
        {
            best = Some((key.0, key.1, key.2, candidate));
        }
    }
    best.map(|(_, _, _, path)| path).ok_or(LtlError::Unrealizable)
}

#[cfg(test)]
mod tests;
