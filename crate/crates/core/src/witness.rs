//! Witness-candidate solver for LCR. A candidate compresses an entire
//! computation into a bounded word over leader states, leader-written
//! symbols, ⊥ placeholders and barred first-writes ā, shaped
//! ((Q_L·D_⊥)^{≤L}·D̄)^{≤D}·Q_L. Validity (three requirements: unique bars,
//! a proper leader run, embeddable contributor computations) is equivalent
//! to reachability for some number of contributor copies, so the solver
//! enumerates candidates depth-first with requirement-aware pruning.
//!
//! Reads of the initial symbol pose a wrinkle: a contributor may read a⁰
//! before anything was written, which the positional embedding cannot
//! express. The embedding NFA therefore gets a virtual position 0 where only
//! ε-moves and reads of a⁰ are allowed; leader reads of a⁰ remain served
//! only through an ā⁰ first-write.

use std::collections::HashMap;

use thiserror::Error;

use crate::bits::SmallSet;
use crate::model::{
    Certificate, LcrInstance, MemoryOp, SolveError, StateId, SymbolId, Thread, Verdict,
    normalize_leader,
};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum WitnessLetter {
    /// A leader state, standing for a loop-compressed visit.
    State(StateId),
    /// A symbol the leader writes in the step to the following state.
    Symbol(SymbolId),
    /// A leader ε-step or a read of an already-first-written symbol.
    Bottom,
    /// ā: symbol a is written by a contributor for the first time.
    FirstWrite(SymbolId),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WitnessCandidate {
    pub letters: Vec<WitnessLetter>,
}

impl WitnessCandidate {
    /// Token form: "~x" for ā, "_" for ⊥, otherwise state/symbol names.
    pub fn to_tokens(&self, inst: &LcrInstance) -> Vec<String> {
        self.letters
            .iter()
            .map(|l| match *l {
                WitnessLetter::State(q) => inst.leader.state_name(q).to_string(),
                WitnessLetter::Symbol(a) => inst.domain[a].clone(),
                WitnessLetter::Bottom => "_".to_string(),
                WitnessLetter::FirstWrite(a) => format!("~{}", inst.domain[a]),
            })
            .collect()
    }

    /// Inverse of `to_tokens`. A bare token must name either a leader state
    /// or a domain symbol, unambiguously.
    pub fn from_tokens(tokens: &[&str], inst: &LcrInstance) -> Result<WitnessCandidate, Invalid> {
        let mut letters = Vec::new();
        for tok in tokens {
            let letter = if *tok == "_" {
                WitnessLetter::Bottom
            } else if let Some(sym) = tok.strip_prefix('~') {
                WitnessLetter::FirstWrite(
                    inst.symbol_index(sym)
                        .ok_or_else(|| Invalid::Shape(format!("unknown symbol `{sym}`")))?,
                )
            } else {
                let state = inst.leader.state_names().iter().position(|n| n == tok);
                let symbol = inst.symbol_index(tok);
                match (state, symbol) {
                    (Some(q), None) => WitnessLetter::State(q),
                    (None, Some(a)) => WitnessLetter::Symbol(a),
                    (Some(_), Some(_)) => {
                        return Err(Invalid::Shape(format!("ambiguous token `{tok}`")))
                    }
                    (None, None) => return Err(Invalid::Shape(format!("unknown token `{tok}`"))),
                }
            };
            letters.push(letter);
        }
        Ok(WitnessCandidate { letters })
    }
}

/// Cumulative first-write sets: entry i is D̄(w, i), the barred symbols in
/// w[..=i].
pub fn first_write_sets(letters: &[WitnessLetter]) -> Vec<SmallSet> {
    let mut acc = SmallSet::EMPTY;
    letters
        .iter()
        .map(|l| {
            if let WitnessLetter::FirstWrite(a) = *l {
                acc = acc.with(a);
            }
            acc
        })
        .collect()
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum Invalid {
    #[error("malformed candidate: {0}")]
    Shape(String),
    #[error("requirement ({0}) violated")]
    Requirement(u8),
}

/// Letters written on some loop at q while the leader reads only symbols in
/// `reads`: every a with a write p →!a p′ such that q →* p and p′ →* q in
/// the restricted leader.
pub fn loop_letters(leader: &Thread, q: StateId, reads: SmallSet) -> SmallSet {
    let forward = restricted_closure(leader, q, reads, false);
    let backward = restricted_closure(leader, q, reads, true);
    let mut out = SmallSet::EMPTY;
    for tr in leader.transitions() {
        if let MemoryOp::Write(a) = tr.op {
            if forward.contains(tr.from) && backward.contains(tr.to) {
                out = out.with(a);
            }
        }
    }
    out
}

/// States reachable from q (or co-reachable to q) in the leader with reads
/// restricted to `reads`.
fn restricted_closure(leader: &Thread, q: StateId, reads: SmallSet, backward: bool) -> SmallSet {
    let mut seen = SmallSet::singleton(q);
    let mut stack = vec![q];
    while let Some(p) = stack.pop() {
        for tr in leader.transitions() {
            let (src, dst) = if backward {
                (tr.to, tr.from)
            } else {
                (tr.from, tr.to)
            };
            if src != p {
                continue;
            }
            if let MemoryOp::Read(a) = tr.op {
                if !reads.contains(a) {
                    continue;
                }
            }
            if !seen.contains(dst) {
                seen = seen.with(dst);
                stack.push(dst);
            }
        }
    }
    seen
}

/// States from which some unsafe state is reachable using writes, ε, and
/// reads restricted to `reads`.
fn final_reachers(inst: &LcrInstance, reads: SmallSet) -> SmallSet {
    let mut seen = SmallSet::EMPTY;
    let mut stack: Vec<StateId> = inst.unsafe_states.iter().copied().collect();
    for &q in &stack {
        seen = seen.with(q);
    }
    while let Some(p) = stack.pop() {
        for tr in inst.leader.transitions() {
            if tr.to != p || seen.contains(tr.from) {
                continue;
            }
            if let MemoryOp::Read(a) = tr.op {
                if !reads.contains(a) {
                    continue;
                }
            }
            seen = seen.with(tr.from);
            stack.push(tr.from);
        }
    }
    seen
}

/// Memo for Loop(q, S) keyed on (q, S).
#[derive(Default)]
struct LoopMemo {
    cache: HashMap<(StateId, u64), SmallSet>,
}

impl LoopMemo {
    fn get(&mut self, leader: &Thread, q: StateId, reads: SmallSet) -> SmallSet {
        *self
            .cache
            .entry((q, reads.0))
            .or_insert_with(|| loop_letters(leader, q, reads))
    }
}

/// Can a contributor computation q⁰_C →^{u !target} embed its reads
/// monotonically into the prefix `v`? Decided by reachability in the product
/// of the contributor with positions 0..=|v|: writes and ε stay in place
/// (writes not before position 1), reads ?b require position i to serve b
/// (literal symbol, a loop letter at a state letter, or an earlier first
/// write), and any state with a write of `target` accepts.
fn embedding_ok(
    contributor: &Thread,
    leader: &Thread,
    v: &[WitnessLetter],
    dbar_at: &[SmallSet],
    init_symbol: SymbolId,
    target: SymbolId,
    loops: &mut LoopMemo,
) -> bool {
    let n = v.len();
    let c = contributor.len();
    let idx = |p: StateId, i: usize| p * (n + 1) + i;
    let mut seen = vec![false; c * (n + 1)];
    let mut stack = vec![(contributor.initial(), 0usize)];
    seen[idx(contributor.initial(), 0)] = true;
    let serves = |i: usize, b: SymbolId, loops: &mut LoopMemo| -> bool {
        if i == 0 {
            return b == init_symbol;
        }
        let literal = match v[i - 1] {
            WitnessLetter::Symbol(s) => s == b,
            WitnessLetter::State(q) => loops.get(leader, q, dbar_at[i - 1]).contains(b),
            _ => false,
        };
        literal || dbar_at[i - 1].contains(b)
    };
    while let Some((p, i)) = stack.pop() {
        let push = |p2: StateId, i2: usize, seen: &mut Vec<bool>, stack: &mut Vec<_>| {
            if !seen[idx(p2, i2)] {
                seen[idx(p2, i2)] = true;
                stack.push((p2, i2));
            }
        };
        if i < n {
            push(p, i + 1, &mut seen, &mut stack);
        }
        for tr in contributor.outgoing(p) {
            match tr.op {
                MemoryOp::Write(a) => {
                    if a == target {
                        return true;
                    }
                    if i >= 1 {
                        push(tr.to, i, &mut seen, &mut stack);
                    }
                }
                MemoryOp::Read(b) => {
                    if serves(i, b, loops) {
                        push(tr.to, i, &mut seen, &mut stack);
                    }
                }
                MemoryOp::Epsilon => push(tr.to, i, &mut seen, &mut stack),
            }
        }
    }
    false
}

/// Parsed shape of a candidate: the leader-run pairs, the bars, the final
/// state, all with their positions in the word.
struct Shape {
    /// (state, op letter index) per pair; the op is v[op_pos].
    pairs: Vec<(StateId, usize)>,
    /// (symbol, letter index) per bar, in order.
    bars: Vec<(SymbolId, usize)>,
    final_state: StateId,
}

fn parse_shape(w: &WitnessCandidate, inst: &LcrInstance) -> Result<Shape, Invalid> {
    let num_states = inst.leader.len();
    let num_symbols = inst.domain.len();
    let mut pairs = Vec::new();
    let mut bars = Vec::new();
    let mut block_pairs = 0usize;
    let mut block_states = SmallSet::EMPTY;
    let mut i = 0;
    let letters = &w.letters;
    let shape_err = |msg: &str| Err(Invalid::Shape(msg.to_string()));
    loop {
        match letters.get(i) {
            None => return shape_err("candidate must end in a leader state"),
            Some(&WitnessLetter::FirstWrite(a)) => {
                if a >= num_symbols {
                    return shape_err("first-write symbol out of range");
                }
                if bars.len() == num_symbols {
                    return shape_err("more first-writes than domain symbols");
                }
                bars.push((a, i));
                block_pairs = 0;
                block_states = SmallSet::EMPTY;
                i += 1;
            }
            Some(&WitnessLetter::State(q)) => {
                if q >= num_states {
                    return shape_err("leader state out of range");
                }
                match letters.get(i + 1) {
                    None => {
                        return Ok(Shape {
                            pairs,
                            bars,
                            final_state: q,
                        });
                    }
                    Some(WitnessLetter::Symbol(a)) if *a >= num_symbols => {
                        return shape_err("symbol out of range")
                    }
                    Some(WitnessLetter::Symbol(_)) | Some(WitnessLetter::Bottom) => {
                        if block_pairs == num_states {
                            return shape_err("block longer than the leader");
                        }
                        if block_states.contains(q) {
                            return shape_err("leader state repeats within a block");
                        }
                        block_states = block_states.with(q);
                        block_pairs += 1;
                        pairs.push((q, i + 1));
                        i += 2;
                    }
                    Some(_) => return shape_err("leader state must be followed by a symbol or ⊥"),
                }
            }
            Some(_) => return shape_err("expected a leader state or a first-write"),
        }
    }
}

/// The three-requirement validity check. Ok(()) means the candidate encodes
/// a real computation; the error carries the first violated requirement, or
/// a shape complaint for words outside the candidate language.
pub fn check_validity(w: &WitnessCandidate, inst: &LcrInstance) -> Result<(), Invalid> {
    let inst = &normalize_leader(inst);
    let shape = parse_shape(w, inst)?;
    let dbar_at = first_write_sets(&w.letters);
    let dbar_full = dbar_at.last().copied().unwrap_or(SmallSet::EMPTY);

    // (1) first writes are unique
    let mut seen = SmallSet::EMPTY;
    for &(a, _) in &shape.bars {
        if seen.contains(a) {
            return Err(Invalid::Requirement(1));
        }
        seen = seen.with(a);
    }

    // (2) the projection to Q_L ∪ D_⊥ is a run of the leader...
    let mut states: Vec<StateId> = shape.pairs.iter().map(|&(q, _)| q).collect();
    states.push(shape.final_state);
    if states[0] != inst.leader.initial() {
        return Err(Invalid::Requirement(2));
    }
    for (k, &(q, op_pos)) in shape.pairs.iter().enumerate() {
        let next = states[k + 1];
        let ok = inst.leader.outgoing(q).iter().any(|tr| {
            tr.to == next
                && match (w.letters[op_pos], tr.op) {
                    (WitnessLetter::Symbol(a), MemoryOp::Write(b)) => a == b,
                    (WitnessLetter::Bottom, MemoryOp::Epsilon) => true,
                    (WitnessLetter::Bottom, MemoryOp::Read(b)) => dbar_at[op_pos].contains(b),
                    _ => false,
                }
        });
        if !ok {
            return Err(Invalid::Requirement(2));
        }
    }
    // ...and the final state still reaches F_L reading only first writes.
    if !final_reachers(inst, dbar_full).contains(shape.final_state) {
        return Err(Invalid::Requirement(2));
    }

    // (3) every prefix v·ā admits a supportive contributor computation
    let contributor = inst.solving_contributor();
    let mut loops = LoopMemo::default();
    for &(a, pos) in &shape.bars {
        if !embedding_ok(
            &contributor,
            &inst.leader,
            &w.letters[..pos],
            &dbar_at[..pos],
            inst.init_symbol,
            a,
            &mut loops,
        ) {
            return Err(Invalid::Requirement(3));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug)]
pub struct WitnessConfig {
    pub max_nodes: u64,
}

impl Default for WitnessConfig {
    fn default() -> WitnessConfig {
        WitnessConfig {
            max_nodes: 20_000_000,
        }
    }
}

pub fn solve_lcr_witness(inst: &LcrInstance) -> Result<Verdict, SolveError> {
    solve_lcr_witness_with(inst, &WitnessConfig::default())
}

pub fn solve_lcr_witness_with(
    inst: &LcrInstance,
    config: &WitnessConfig,
) -> Result<Verdict, SolveError> {
    let mut search = Search::new(inst, config.max_nodes, false);
    let found = search.run()?;
    let certificate = found
        .first()
        .map(|w| Certificate::Witness(w.to_tokens(inst)));
    Ok(Verdict::new(!found.is_empty(), certificate, search.nodes))
}

/// Exhaustive pruned enumeration of every valid candidate, for tests.
pub fn enumerate_valid_witnesses(
    inst: &LcrInstance,
    max_nodes: u64,
) -> Result<Vec<WitnessCandidate>, SolveError> {
    let mut search = Search::new(inst, max_nodes, true);
    search.run()
}

#[derive(Clone, Copy)]
enum PendOp {
    Write(SymbolId),
    /// ⊥ together with D̄ at its position, against which a read may connect.
    Bottom(SmallSet),
}

struct Search {
    inst: LcrInstance, // normalized
    contributor: Thread,
    max_nodes: u64,
    find_all: bool,
    nodes: u64,
    letters: Vec<WitnessLetter>,
    dbar_at: Vec<SmallSet>,
    dbar: SmallSet,
    bars_used: usize,
    block_len: usize,
    block_states: SmallSet,
    loops: LoopMemo,
    final_memo: HashMap<u64, SmallSet>,
    found: Vec<WitnessCandidate>,
}

impl Search {
    fn new(inst: &LcrInstance, max_nodes: u64, find_all: bool) -> Search {
        let normalized = normalize_leader(inst);
        let contributor = normalized.solving_contributor();
        Search {
            inst: normalized,
            contributor,
            max_nodes,
            find_all,
            nodes: 0,
            letters: Vec::new(),
            dbar_at: Vec::new(),
            dbar: SmallSet::EMPTY,
            bars_used: 0,
            block_len: 0,
            block_states: SmallSet::EMPTY,
            loops: LoopMemo::default(),
            final_memo: HashMap::new(),
            found: Vec::new(),
        }
    }

    fn run(&mut self) -> Result<Vec<WitnessCandidate>, SolveError> {
        self.expect_state(None)?;
        Ok(std::mem::take(&mut self.found))
    }

    fn final_ok(&mut self, q: StateId) -> bool {
        let inst = &self.inst;
        let dbar = self.dbar;
        self.final_memo
            .entry(dbar.0)
            .or_insert_with(|| final_reachers(inst, dbar))
            .contains(q)
    }

    fn connect(&self, pending: Option<(StateId, PendOp)>, q: StateId) -> bool {
        match pending {
            None => q == self.inst.leader.initial(),
            Some((from, PendOp::Write(a))) => self
                .inst
                .leader
                .outgoing(from)
                .iter()
                .any(|tr| tr.to == q && tr.op == MemoryOp::Write(a)),
            Some((from, PendOp::Bottom(snap))) => {
                self.inst.leader.outgoing(from).iter().any(|tr| {
                    tr.to == q
                        && match tr.op {
                            MemoryOp::Epsilon => true,
                            MemoryOp::Read(b) => snap.contains(b),
                            MemoryOp::Write(_) => false,
                        }
                })
            }
        }
    }

    fn push(&mut self, letter: WitnessLetter) {
        self.letters.push(letter);
        self.dbar_at.push(self.dbar);
    }

    fn pop(&mut self) {
        self.letters.pop();
        self.dbar_at.pop();
    }

    /// Position expecting a leader state; bars may also be emitted here.
    /// `pending` is the unresolved (state, op) pair the next state must
    /// connect to; None before the first pair, when only q⁰_L may appear.
    fn expect_state(&mut self, pending: Option<(StateId, PendOp)>) -> Result<bool, SolveError> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(SolveError::BudgetExceeded(self.nodes));
        }
        for q in 0..self.inst.leader.len() {
            if !self.connect(pending, q) {
                continue;
            }
            self.push(WitnessLetter::State(q));
            if self.final_ok(q) {
                self.found.push(WitnessCandidate {
                    letters: self.letters.clone(),
                });
                if !self.find_all {
                    self.pop();
                    return Ok(true);
                }
            }
            if self.expect_op(q)? {
                self.pop();
                return Ok(true);
            }
            self.pop();
        }
        if self.bars_used < self.inst.domain.len() {
            for a in 0..self.inst.domain.len() {
                if self.dbar.contains(a) {
                    continue;
                }
                if !embedding_ok(
                    &self.contributor,
                    &self.inst.leader,
                    &self.letters,
                    &self.dbar_at,
                    self.inst.init_symbol,
                    a,
                    &mut self.loops,
                ) {
                    continue;
                }
                let saved = (self.dbar, self.block_len, self.block_states);
                self.dbar = self.dbar.with(a);
                self.bars_used += 1;
                self.block_len = 0;
                self.block_states = SmallSet::EMPTY;
                self.letters.push(WitnessLetter::FirstWrite(a));
                self.dbar_at.push(self.dbar); // D̄(w,i) includes the bar at i
                let hit = self.expect_state(pending)?;
                self.letters.pop();
                self.dbar_at.pop();
                self.bars_used -= 1;
                (self.dbar, self.block_len, self.block_states) = saved;
                if hit {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    /// Just emitted state q; extend the pair with a symbol or ⊥ (the word may
    /// also stop at q, which the caller already tried).
    fn expect_op(&mut self, q: StateId) -> Result<bool, SolveError> {
        if self.block_len >= self.inst.leader.len() || self.block_states.contains(q) {
            return Ok(false);
        }
        let num_symbols = self.inst.domain.len();
        // Symbols in domain order, then ⊥; skip ops with no outgoing match.
        for choice in 0..=num_symbols {
            let (letter, pend) = if choice < num_symbols {
                let a = choice;
                if !self
                    .inst
                    .leader
                    .outgoing(q)
                    .iter()
                    .any(|tr| tr.op == MemoryOp::Write(a))
                {
                    continue;
                }
                (WitnessLetter::Symbol(a), PendOp::Write(a))
            } else {
                let feasible = self.inst.leader.outgoing(q).iter().any(|tr| match tr.op {
                    MemoryOp::Epsilon => true,
                    MemoryOp::Read(b) => self.dbar.contains(b),
                    MemoryOp::Write(_) => false,
                });
                if !feasible {
                    continue;
                }
                (WitnessLetter::Bottom, PendOp::Bottom(self.dbar))
            };
            self.push(letter);
            self.block_len += 1;
            self.block_states = self.block_states.with(q);
            let hit = self.expect_state(Some((q, pend)))?;
            self.block_states = self.block_states.without(q);
            self.block_len -= 1;
            self.pop();
            if hit {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Instance, parse_program};

    fn lcr(text: &str) -> LcrInstance {
        match parse_program(text).unwrap() {
            Instance::Lcr(inst) => inst,
            _ => panic!("expected lcr"),
        }
    }

    #[test]
    fn loop_letters_self_loop() {
        let inst = lcr(
            r#"{"domain":["a0","a"],"init":"a0","kind":"lcr",
                "leader":{"init":"q0","trans":[["q0","!a","q0"]]},
                "contributors":[{"init":"p0","trans":[]}],"unsafe":[]}"#,
        );
        assert_eq!(
            loop_letters(&inst.leader, 0, SmallSet::EMPTY),
            SmallSet::singleton(inst.symbol_index("a").unwrap())
        );
    }

    #[test]
    fn loop_letters_acyclic() {
        let inst = lcr(
            r#"{"domain":["a0","a"],"init":"a0","kind":"lcr",
                "leader":{"init":"q0","trans":[["q0","!a","q1"]]},
                "contributors":[{"init":"p0","trans":[]}],"unsafe":[]}"#,
        );
        assert!(loop_letters(&inst.leader, 0, SmallSet::EMPTY).is_empty());
    }

    #[test]
    fn trivial_initial_unsafe() {
        let inst = lcr(
            r#"{"domain":["a0"],"init":"a0","kind":"lcr",
                "leader":{"init":"q0","trans":[]},
                "contributors":[{"init":"p0","trans":[]}],"unsafe":["q0"]}"#,
        );
        let verdict = solve_lcr_witness(&inst).unwrap();
        assert!(verdict.reachable);
        assert_eq!(
            verdict.certificate,
            Some(Certificate::Witness(vec!["q0".to_string()]))
        );
    }

    #[test]
    fn contributor_initial_read_served() {
        // The contributor must read a⁰ before it can provide the first write
        // the leader needs; the virtual position 0 makes this work.
        let inst = lcr(
            r#"{"domain":["a0","a"],"init":"a0","kind":"lcr",
                "leader":{"init":"q0","trans":[["q0","?a","q1"]]},
                "contributors":[{"init":"p0","trans":[["p0","?a0","p1"],["p1","!a","p1"]]}],
                "unsafe":["q1"]}"#,
        );
        assert!(solve_lcr_witness(&inst).unwrap().reachable);
    }

    #[test]
    fn unreachable_without_contributor_write() {
        let inst = lcr(
            r#"{"domain":["a0","a"],"init":"a0","kind":"lcr",
                "leader":{"init":"q0","trans":[["q0","?a","q1"]]},
                "contributors":[{"init":"p0","trans":[]}],"unsafe":["q1"]}"#,
        );
        assert!(!solve_lcr_witness(&inst).unwrap().reachable);
    }

    #[test]
    fn shape_rejects_trailing_op() {
        let inst = lcr(
            r#"{"domain":["a0"],"init":"a0","kind":"lcr",
                "leader":{"init":"q0","trans":[]},
                "contributors":[{"init":"p0","trans":[]}],"unsafe":[]}"#,
        );
        let w = WitnessCandidate {
            letters: vec![WitnessLetter::State(0), WitnessLetter::Bottom],
        };
        assert!(matches!(check_validity(&w, &inst), Err(Invalid::Shape(_))));
    }
}
