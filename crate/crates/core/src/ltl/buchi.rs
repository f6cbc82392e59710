//! Tableau translation from LTL to a generalized Büchi automaton.
//!
//! The formula is first rewritten into negation normal form over the core
//! connectives (literals, and, or, next, until, release); the tableau then
//! expands a graph of nodes whose labels become automaton states. A guard is
//! the set of literals a state requires of the word position read when
//! entering it; under region-word semantics a positive literal pins the
//! position to one region and negative literals exclude regions.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use super::LtlAst;

/// Core NNF connectives, with subformulas as arena indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Core {
    True,
    False,
    Lit { atom: String, neg: bool },
    And(usize, usize),
    Or(usize, usize),
    Next(usize),
    Until(usize, usize),
    Release(usize, usize),
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Core>,
    dedup: HashMap<Core, usize>,
}

impl Arena {
    fn intern(&mut self, c: Core) -> usize {
        if let Some(&i) = self.dedup.get(&c) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(c.clone());
        self.dedup.insert(c, i);
        i
    }

    fn nnf(&mut self, ast: &LtlAst, negated: bool) -> usize {
        let c = match (ast, negated) {
            (LtlAst::True, false) | (LtlAst::False, true) => Core::True,
            (LtlAst::True, true) | (LtlAst::False, false) => Core::False,
            (LtlAst::Atom(a), neg) => Core::Lit {
                atom: a.clone(),
                neg,
            },
            (LtlAst::Not(x), neg) => return self.nnf(x, !neg),
            (LtlAst::And(a, b), false) | (LtlAst::Or(a, b), true) => {
                let (x, y) = (self.nnf(a, negated), self.nnf(b, negated));
                Core::And(x, y)
            }
            (LtlAst::And(a, b), true) | (LtlAst::Or(a, b), false) => {
                let (x, y) = (self.nnf(a, negated), self.nnf(b, negated));
                Core::Or(x, y)
            }
            (LtlAst::Implies(a, b), false) => {
                let (x, y) = (self.nnf(a, true), self.nnf(b, false));
                Core::Or(x, y)
            }
            (LtlAst::Implies(a, b), true) => {
                let (x, y) = (self.nnf(a, false), self.nnf(b, true));
                Core::And(x, y)
            }
            (LtlAst::Next(x), neg) => {
                let i = self.nnf(x, neg);
                Core::Next(i)
            }
            (LtlAst::Until(a, b), false) | (LtlAst::Release(a, b), true) => {
                let (x, y) = (self.nnf(a, negated), self.nnf(b, negated));
                Core::Until(x, y)
            }
            (LtlAst::Until(a, b), true) | (LtlAst::Release(a, b), false) => {
                let (x, y) = (self.nnf(a, negated), self.nnf(b, negated));
                Core::Release(x, y)
            }
            (LtlAst::Eventually(x), false) => {
                let t = self.intern(Core::True);
                let i = self.nnf(x, false);
                Core::Until(t, i)
            }
            (LtlAst::Eventually(x), true) => {
                let f = self.intern(Core::False);
                let i = self.nnf(x, true);
                Core::Release(f, i)
            }
            (LtlAst::Always(x), false) => {
                let f = self.intern(Core::False);
                let i = self.nnf(x, false);
                Core::Release(f, i)
            }
            (LtlAst::Always(x), true) => {
                let t = self.intern(Core::True);
                let i = self.nnf(x, true);
                Core::Until(t, i)
            }
        };
        self.intern(c)
    }

    fn negation_of(&self, f: usize) -> Option<usize> {
        if let Core::Lit { atom, neg } = &self.nodes[f] {
            let opposite = Core::Lit {
                atom: atom.clone(),
                neg: !neg,
            };
            return self.dedup.get(&opposite).copied();
        }
        None
    }
}

/// Guard on entering a state: literals that must hold of the region read.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Guard {
    pub pos: Vec<String>,
    pub neg: Vec<String>,
}

impl Guard {
    /// Under exactly-one-region word semantics.
    pub fn matches(&self, region: &str) -> bool {
        self.pos.iter().all(|a| a == region) && !self.neg.iter().any(|a| a == region)
    }
}

impl std::fmt::Display for Guard {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = self.pos.clone();
        parts.extend(self.neg.iter().map(|a| format!("!{a}")));
        if parts.is_empty() {
            write!(f, "true")
        } else {
            write!(f, "{}", parts.join(" & "))
        }
    }
}

/// Generalized Büchi automaton; acceptance is a conjunction of state sets,
/// each of which must be visited infinitely often.
#[derive(Debug, Clone)]
pub struct BuchiAutomaton {
    /// Guard of each state, checked against the word position read on entry.
    pub guards: Vec<Guard>,
    /// States entered while reading position 0.
    pub initial: Vec<usize>,
    pub succ: Vec<Vec<usize>>,
    /// `accepting[k][q]`: state `q` belongs to acceptance set `k`. Nonempty
    /// collection; a single all-states set when the formula has no untils.
    pub accepting: Vec<Vec<bool>>,
}

impl BuchiAutomaton {
    pub fn num_states(&self) -> usize {
        self.guards.len()
    }

    /// Textual transition list for debugging.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "states: {}", self.num_states());
        let _ = writeln!(
            out,
            "initial: {}",
            self.initial
                .iter()
                .map(|q| q.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        );
        for q in 0..self.num_states() {
            let sets: Vec<String> = (0..self.accepting.len())
                .filter(|&k| self.accepting[k][q])
                .map(|k| k.to_string())
                .collect();
            let _ = writeln!(
                out,
                "state {q}: guard [{}] accepting {{{}}}",
                self.guards[q],
                sets.join(",")
            );
            for &q2 in &self.succ[q] {
                let _ = writeln!(out, "  {q} -> {q2}");
            }
        }
        out
    }
}

/// Tableau node under construction.
#[derive(Debug, Clone)]
struct Node {
    incoming: BTreeSet<usize>,
    new: BTreeSet<usize>,
    old: BTreeSet<usize>,
    next: BTreeSet<usize>,
}

const INIT: usize = usize::MAX;

struct Builder<'a> {
    arena: &'a mut Arena,
    /// Completed nodes: (old, next, incoming).
    done: Vec<Node>,
}

impl<'a> Builder<'a> {
    fn expand(&mut self, mut node: Node) {
        let Some(&f) = node.new.iter().next() else {
            // fully processed: merge with an identical node or finalize
            for existing in &mut self.done {
                if existing.old == node.old && existing.next == node.next {
                    existing.incoming.extend(node.incoming.iter());
                    return;
                }
            }
            let id = self.done.len();
            self.done.push(node.clone());
            let fresh = Node {
                incoming: BTreeSet::from([id]),
                new: node.next.clone(),
                old: BTreeSet::new(),
                next: BTreeSet::new(),
            };
            self.expand(fresh);
            return;
        };
        node.new.remove(&f);
        match self.arena.nodes[f].clone() {
            Core::False => {}
            Core::True => {
                node.old.insert(f);
                self.expand(node);
            }
            Core::Lit { .. } => {
                if let Some(n) = self.arena.negation_of(f) {
                    if node.old.contains(&n) {
                        return; // contradictory label, discard
                    }
                }
                node.old.insert(f);
                self.expand(node);
            }
            Core::And(a, b) => {
                node.old.insert(f);
                for x in [a, b] {
                    if !node.old.contains(&x) {
                        node.new.insert(x);
                    }
                }
                self.expand(node);
            }
            Core::Next(a) => {
                node.old.insert(f);
                node.next.insert(a);
                self.expand(node);
            }
            Core::Or(a, b) => {
                let mut n1 = node.clone();
                n1.old.insert(f);
                if !n1.old.contains(&a) {
                    n1.new.insert(a);
                }
                let mut n2 = node;
                n2.old.insert(f);
                if !n2.old.contains(&b) {
                    n2.new.insert(b);
                }
                self.expand(n1);
                self.expand(n2);
            }
            Core::Until(a, b) => {
                // a U b  =  b or (a and X(a U b))
                let mut n1 = node.clone();
                n1.old.insert(f);
                if !n1.old.contains(&a) {
                    n1.new.insert(a);
                }
                n1.next.insert(f);
                let mut n2 = node;
                n2.old.insert(f);
                if !n2.old.contains(&b) {
                    n2.new.insert(b);
                }
                self.expand(n1);
                self.expand(n2);
            }
            Core::Release(a, b) => {
                // a R b  =  (a and b) or (b and X(a R b))
                let mut n1 = node.clone();
                n1.old.insert(f);
                if !n1.old.contains(&b) {
                    n1.new.insert(b);
                }
                n1.next.insert(f);
                let mut n2 = node;
                n2.old.insert(f);
                for x in [a, b] {
                    if !n2.old.contains(&x) {
                        n2.new.insert(x);
                    }
                }
                self.expand(n1);
                self.expand(n2);
            }
        }
    }
}

/// Translates a formula to a generalized Büchi automaton over region words.
pub fn ltl_to_buchi(ast: &LtlAst) -> BuchiAutomaton {
    let mut arena = Arena::default();
    let root = arena.nnf(ast, false);
    let mut builder = Builder {
        arena: &mut arena,
        done: Vec::new(),
    };
    builder.expand(Node {
        incoming: BTreeSet::from([INIT]),
        new: BTreeSet::from([root]),
        old: BTreeSet::new(),
        next: BTreeSet::new(),
    });
    let done = builder.done;
    let n = done.len();

    let mut guards = Vec::with_capacity(n);
    for node in &done {
        let mut g = Guard::default();
        for &f in &node.old {
            if let Core::Lit { atom, neg } = &arena.nodes[f] {
                if *neg {
                    g.neg.push(atom.clone());
                } else {
                    g.pos.push(atom.clone());
                }
            }
        }
        guards.push(g);
    }

    let mut initial = Vec::new();
    let mut succ = vec![Vec::new(); n];
    for (q, node) in done.iter().enumerate() {
        for &src in &node.incoming {
            if src == INIT {
                initial.push(q);
            } else {
                succ[src].push(q);
            }
        }
    }

    // one acceptance set per until subformula: states whose label either
    // does not promise the until or already contains its right operand
    let untils: Vec<(usize, usize)> = arena
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(i, c)| match c {
            Core::Until(_, b) => Some((i, *b)),
            _ => None,
        })
        .collect();
    let mut accepting = Vec::new();
    for &(u, b) in &untils {
        accepting.push(
            done.iter()
                .map(|node| !node.old.contains(&u) || node.old.contains(&b))
                .collect(),
        );
    }
    if accepting.is_empty() {
        accepting.push(vec![true; n]);
    }

    BuchiAutomaton {
        guards,
        initial,
        succ,
        accepting,
    }
}

/// Does the automaton accept `prefix . suffix^omega`? Independent of any
/// region transition system: searches for an accepting run position by
/// position over the lasso, tracking the degeneralization counter.
pub fn accepts_lasso(aut: &BuchiAutomaton, prefix: &[String], suffix: &[String]) -> bool {
    assert!(!suffix.is_empty());
    let p = prefix.len();
    let n = p + suffix.len();
    let word: Vec<&str> = prefix
        .iter()
        .chain(suffix.iter())
        .map(String::as_str)
        .collect();
    let succ_pos = |i: usize| if i + 1 < n { i + 1 } else { p };
    let k = aut.accepting.len();

    // product of word positions with automaton states and counter
    let nq = aut.num_states();
    let idx = |i: usize, q: usize, c: usize| (i * nq + q) * k + c;
    let mut seen = vec![false; n * nq * k];
    let mut queue = VecDeque::new();
    let mut order = Vec::new();
    for &q in &aut.initial {
        if aut.guards[q].matches(word[0]) && !seen[idx(0, q, 0)] {
            seen[idx(0, q, 0)] = true;
            queue.push_back((0usize, q, 0usize));
        }
    }
    let step = |i: usize, q: usize, c: usize| {
        let c2 = if aut.accepting[c][q] { (c + 1) % k } else { c };
        let i2 = succ_pos(i);
        let mut out = Vec::new();
        for &q2 in &aut.succ[q] {
            if aut.guards[q2].matches(word[i2]) {
                out.push((i2, q2, c2));
            }
        }
        out
    };
    while let Some((i, q, c)) = queue.pop_front() {
        order.push((i, q, c));
        for (i2, q2, c2) in step(i, q, c) {
            if !seen[idx(i2, q2, c2)] {
                seen[idx(i2, q2, c2)] = true;
                queue.push_back((i2, q2, c2));
            }
        }
    }
    // accepting iff some accepting product state lies on a cycle
    for &(i, q, c) in order
        .iter()
        .filter(|&&(_, q, c)| c == 0 && aut.accepting[0][q])
    {
        let target = idx(i, q, c);
        let mut cseen = vec![false; n * nq * k];
        let mut cq = VecDeque::new();
        cq.push_back((i, q, c));
        while let Some((i1, q1, c1)) = cq.pop_front() {
            for (i2, q2, c2) in step(i1, q1, c1) {
                if idx(i2, q2, c2) == target {
                    return true;
                }
                if !cseen[idx(i2, q2, c2)] {
                    cseen[idx(i2, q2, c2)] = true;
                    cq.push_back((i2, q2, c2));
                }
            }
        }
    }
    false
}
