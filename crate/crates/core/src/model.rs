//! Program model: finite data domains, threads as NFAs over read/write/ε
//! operations, configurations and their one-step semantics, plus the JSON
//! instance format shared by the solvers, generators and the CLI.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bsr::StageTrace;

pub type StateId = usize;
pub type SymbolId = usize;

/// A single memory operation: write a symbol, read a symbol, or ε.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum MemoryOp {
    Write(SymbolId),
    Read(SymbolId),
    Epsilon,
}

impl MemoryOp {
    pub fn symbol(self) -> Option<SymbolId> {
        match self {
            MemoryOp::Write(a) | MemoryOp::Read(a) => Some(a),
            MemoryOp::Epsilon => None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Transition {
    pub from: StateId,
    pub op: MemoryOp,
    pub to: StateId,
}

/// A thread: an NFA over memory operations. Transitions are stored as a
/// deduplicated list sorted by source state, so iteration order (and with it
/// every certificate the solvers emit) is deterministic.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Thread {
    pub name: String,
    state_names: Vec<String>,
    initial: StateId,
    transitions: Vec<Transition>,
    starts: Vec<usize>, // CSR offsets into `transitions`, one slot per state + 1
}

impl Thread {
    pub fn new(
        name: impl Into<String>,
        state_names: Vec<String>,
        initial: StateId,
        mut transitions: Vec<Transition>,
        domain_len: usize,
    ) -> Result<Thread, ModelError> {
        let n = state_names.len();
        if initial >= n {
            return Err(ModelError::Invalid(format!(
                "initial state index {initial} out of range (thread has {n} states)"
            )));
        }
        for t in &transitions {
            if t.from >= n || t.to >= n {
                return Err(ModelError::Invalid(format!(
                    "transition endpoint out of range in thread with {n} states"
                )));
            }
            if let Some(a) = t.op.symbol() {
                if a >= domain_len {
                    return Err(ModelError::Invalid(format!(
                        "symbol index {a} out of range (domain has {domain_len} symbols)"
                    )));
                }
            }
        }
        transitions.sort_unstable();
        transitions.dedup();
        let mut starts = vec![0usize; n + 1];
        for t in &transitions {
            starts[t.from + 1] += 1;
        }
        for i in 0..n {
            starts[i + 1] += starts[i];
        }
        Ok(Thread {
            name: name.into(),
            state_names,
            initial,
            transitions,
            starts,
        })
    }

    pub fn len(&self) -> usize {
        self.state_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.state_names.is_empty()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.state_names[q]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn state_index(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|s| s == name)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn outgoing(&self, q: StateId) -> &[Transition] {
        &self.transitions[self.starts[q]..self.starts[q + 1]]
    }

    /// Rebuild with extra transitions (used by the normalization pass).
    pub fn with_added_transitions(
        &self,
        extra: Vec<Transition>,
        domain_len: usize,
    ) -> Result<Thread, ModelError> {
        let mut trans = self.transitions.clone();
        trans.extend(extra);
        Thread::new(
            self.name.clone(),
            self.state_names.clone(),
            self.initial,
            trans,
            domain_len,
        )
    }
}

/// A shared-memory program: a data domain, the initial memory symbol, and an
/// ordered list of thread instances.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Program {
    pub domain: Vec<String>,
    pub init_symbol: SymbolId,
    pub threads: Vec<Thread>,
}

impl Program {
    pub fn symbol_index(&self, name: &str) -> Option<SymbolId> {
        self.domain.iter().position(|s| s == name)
    }

    pub fn initial_configuration(&self) -> Configuration {
        Configuration {
            pc: self.threads.iter().map(|t| t.initial()).collect(),
            memory: self.init_symbol,
        }
    }
}

/// Global state of a program: one control state per thread plus the memory.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Configuration {
    pub pc: Vec<StateId>,
    pub memory: SymbolId,
}

/// One-step successors of `c`: a read is enabled iff the memory holds the read
/// symbol and leaves it unchanged, a write overwrites the memory
/// unconditionally, ε only moves control. Returns the empty set on deadlock.
pub fn successors(program: &Program, c: &Configuration) -> Vec<(Configuration, usize, MemoryOp)> {
    let mut out = Vec::new();
    for (i, thread) in program.threads.iter().enumerate() {
        for t in thread.outgoing(c.pc[i]) {
            let memory = match t.op {
                MemoryOp::Write(a) => a,
                MemoryOp::Read(a) => {
                    if c.memory != a {
                        continue;
                    }
                    c.memory
                }
                MemoryOp::Epsilon => c.memory,
            };
            let mut pc = c.pc.clone();
            pc[i] = t.to;
            out.push((Configuration { pc, memory }, i, t.op));
        }
    }
    out
}

/// A leader/contributor reachability instance: leader thread, one or more
/// contributor templates (each replicated arbitrarily often), and the set of
/// unsafe leader states.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LcrInstance {
    pub domain: Vec<String>,
    pub init_symbol: SymbolId,
    pub leader: Thread,
    pub contributors: Vec<Thread>,
    pub unsafe_states: BTreeSet<StateId>,
}

impl LcrInstance {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.domain.is_empty() {
            return Err(ModelError::Invalid("empty domain".into()));
        }
        if self.init_symbol >= self.domain.len() {
            return Err(ModelError::Invalid("initial symbol out of range".into()));
        }
        if self.contributors.is_empty() {
            return Err(ModelError::Invalid("no contributor template".into()));
        }
        for &q in &self.unsafe_states {
            if q >= self.leader.len() {
                return Err(ModelError::Invalid(format!(
                    "unsafe state index {q} out of range"
                )));
            }
        }
        Ok(())
    }

    pub fn symbol_index(&self, name: &str) -> Option<SymbolId> {
        self.domain.iter().position(|s| s == name)
    }

    /// The single contributor template the solvers run on: the sole template
    /// if there is one, otherwise the merge of all templates.
    pub fn solving_contributor(&self) -> Thread {
        if self.contributors.len() == 1 {
            self.contributors[0].clone()
        } else {
            merge_contributors(&self.contributors, self.domain.len())
                .expect("validated instance merges")
        }
    }
}

/// Merge contributor templates into a single template with a fresh initial
/// state and an ε-transition to each template's initial state.
pub fn merge_contributors(templates: &[Thread], domain_len: usize) -> Result<Thread, ModelError> {
    if templates.is_empty() {
        return Err(ModelError::Invalid("empty template list".into()));
    }
    let mut names = vec!["cinit".to_string()];
    let mut transitions = Vec::new();
    let mut offset = 1usize;
    for (k, t) in templates.iter().enumerate() {
        for s in t.state_names() {
            names.push(format!("c{k}:{s}"));
        }
        transitions.push(Transition {
            from: 0,
            op: MemoryOp::Epsilon,
            to: offset + t.initial(),
        });
        for tr in t.transitions() {
            transitions.push(Transition {
                from: offset + tr.from,
                op: tr.op,
                to: offset + tr.to,
            });
        }
        offset += t.len();
    }
    Thread::new("contributor", names, 0, transitions, domain_len)
}

/// Add an ε-shortcut q′ → q″ for every leader pair q →!a q′, q′ →?a q″, so the
/// witness enumeration may assume the leader never reads a value it has just
/// written. Original transitions are kept; all other solvers are insensitive
/// to the extra ε-moves.
pub fn normalize_leader(inst: &LcrInstance) -> LcrInstance {
    let leader = &inst.leader;
    let mut extra = Vec::new();
    for t in leader.transitions() {
        if let MemoryOp::Write(a) = t.op {
            for t2 in leader.outgoing(t.to) {
                if t2.op == MemoryOp::Read(a) {
                    extra.push(Transition {
                        from: t2.from,
                        op: MemoryOp::Epsilon,
                        to: t2.to,
                    });
                }
            }
        }
    }
    let mut out = inst.clone();
    out.leader = leader
        .with_added_transitions(extra, inst.domain.len())
        .expect("normalization preserves well-formedness");
    out
}

/// A bounded-stage reachability instance. `target[i] = None` places no
/// constraint on thread `i`; `memory_target = None` accepts any memory value.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BsrInstance {
    pub program: Program,
    pub target: Vec<Option<BTreeSet<StateId>>>,
    pub memory_target: Option<BTreeSet<SymbolId>>,
    pub stages: usize,
}

impl BsrInstance {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.program.domain.is_empty() {
            return Err(ModelError::Invalid("empty domain".into()));
        }
        if self.program.threads.is_empty() {
            return Err(ModelError::Invalid("no threads".into()));
        }
        if self.target.len() != self.program.threads.len() {
            return Err(ModelError::Invalid(
                "target list length differs from thread count".into(),
            ));
        }
        for (i, tgt) in self.target.iter().enumerate() {
            if let Some(set) = tgt {
                for &q in set {
                    if q >= self.program.threads[i].len() {
                        return Err(ModelError::Invalid(format!(
                            "target state index {q} out of range for thread {i}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn accepts(&self, c: &Configuration) -> bool {
        for (i, tgt) in self.target.iter().enumerate() {
            if let Some(set) = tgt {
                if !set.contains(&c.pc[i]) {
                    return false;
                }
            }
        }
        match &self.memory_target {
            Some(set) => set.contains(&c.memory),
            None => true,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Instance {
    Lcr(LcrInstance),
    Bsr(BsrInstance),
}

#[derive(Error, Debug)]
pub enum ModelError {
    #[error("syntax error at line {line}, column {column}: {msg}")]
    Syntax {
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown thread `{0}` in target")]
    UnknownThread(String),
    #[error("initial symbol `{0}` missing from domain")]
    MissingInitSymbol(String),
    #[error("bad operation `{0}` (expected \"!x\", \"?x\" or \"eps\")")]
    BadOp(String),
    #[error("unknown instance kind `{0}`")]
    BadKind(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
}

// ---------------------------------------------------------------------------
// Verdicts and certificates
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Default)]
pub struct Stats {
    pub nodes: u64,
    pub elapsed: Duration,
}

/// One back-pointer step of a DP certificate: contributor state `added` joined
/// the set while the leader sat at `(leader, memory)`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SaturationStep {
    pub added: StateId,
    pub leader: StateId,
    pub memory: SymbolId,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Certificate {
    /// Witness token list, e.g. ["~a","q0","_","q1","b","~c","q2"].
    Witness(Vec<String>),
    /// SCC-witness token list, e.g. ["scc:{q1,q2}@0","b","~c","scc:{q3}@1"].
    SccWitness(Vec<String>),
    Saturation(Vec<SaturationStep>),
    Trace(StageTrace),
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub reachable: bool,
    pub certificate: Option<Certificate>,
    pub stats: Stats,
}

impl Verdict {
    pub fn new(reachable: bool, certificate: Option<Certificate>, nodes: u64) -> Verdict {
        Verdict {
            reachable,
            certificate,
            stats: Stats {
                nodes,
                elapsed: Duration::ZERO,
            },
        }
    }
}

#[derive(Error, Debug)]
pub enum SolveError {
    #[error("node budget exceeded after {0} nodes")]
    BudgetExceeded(u64),
    #[error("instance too large: {0}")]
    TooLarge(String),
}

// ---------------------------------------------------------------------------
// JSON parsing and serialization
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct RawThread {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    init: String,
    trans: Vec<[String; 3]>,
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    domain: Vec<String>,
    init: String,
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    leader: Option<RawThread>,
    #[serde(skip_serializing_if = "Option::is_none")]
    contributors: Option<Vec<RawThread>>,
    #[serde(rename = "unsafe", skip_serializing_if = "Option::is_none")]
    unsafe_states: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    threads: Option<Vec<RawThread>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target: Option<BTreeMap<String, Vec<String>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stages: Option<usize>,
}

fn parse_op(s: &str, domain: &[String]) -> Result<MemoryOp, ModelError> {
    if s == "eps" {
        return Ok(MemoryOp::Epsilon);
    }
    let (head, sym) = s.split_at(1.min(s.len()));
    let idx = |name: &str| {
        domain
            .iter()
            .position(|d| d == name)
            .ok_or_else(|| ModelError::UnknownSymbol(name.to_string()))
    };
    match head {
        "!" if !sym.is_empty() => Ok(MemoryOp::Write(idx(sym)?)),
        "?" if !sym.is_empty() => Ok(MemoryOp::Read(idx(sym)?)),
        _ => Err(ModelError::BadOp(s.to_string())),
    }
}

fn op_string(op: MemoryOp, domain: &[String]) -> String {
    match op {
        MemoryOp::Write(a) => format!("!{}", domain[a]),
        MemoryOp::Read(a) => format!("?{}", domain[a]),
        MemoryOp::Epsilon => "eps".to_string(),
    }
}

/// Parse a serialized instance file (see the README for the format).
pub fn parse_program(text: &str) -> Result<Instance, ModelError> {
    let raw: RawInstance = serde_json::from_str(text).map_err(|e| ModelError::Syntax {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    let domain = raw.domain.clone();
    if domain.is_empty() {
        return Err(ModelError::Invalid("empty domain".into()));
    }
    let init_symbol = domain
        .iter()
        .position(|d| *d == raw.init)
        .ok_or_else(|| ModelError::MissingInitSymbol(raw.init.clone()))?;
    match raw.kind.as_str() {
        "lcr" => {
            let leader_raw = raw
                .leader
                .as_ref()
                .ok_or_else(|| ModelError::Invalid("lcr instance without leader".into()))?;
            let extra: Vec<&str> = raw
                .unsafe_states
                .as_deref()
                .unwrap_or(&[])
                .iter()
                .map(|s| s.as_str())
                .collect();
            let leader = thread_from_raw(leader_raw, "leader", &domain, &extra)?;
            let mut unsafe_states = BTreeSet::new();
            for s in raw.unsafe_states.as_deref().unwrap_or(&[]) {
                let q = leader
                    .state_index(s)
                    .ok_or_else(|| ModelError::UnknownState(s.clone()))?;
                unsafe_states.insert(q);
            }
            let contributors_raw = raw
                .contributors
                .as_ref()
                .filter(|c| !c.is_empty())
                .ok_or_else(|| ModelError::Invalid("lcr instance without contributors".into()))?;
            let mut contributors = Vec::new();
            for (i, c) in contributors_raw.iter().enumerate() {
                contributors.push(thread_from_raw(c, &format!("c{i}"), &domain, &[])?);
            }
            let inst = LcrInstance {
                domain,
                init_symbol,
                leader,
                contributors,
                unsafe_states,
            };
            inst.validate()?;
            Ok(Instance::Lcr(inst))
        }
        "bsr" => {
            let threads_raw = raw
                .threads
                .as_ref()
                .filter(|t| !t.is_empty())
                .ok_or_else(|| ModelError::Invalid("bsr instance without threads".into()))?;
            let target_map = raw.target.clone().unwrap_or_default();
            let mut threads = Vec::new();
            for (i, t) in threads_raw.iter().enumerate() {
                let name = t.name.clone().unwrap_or_else(|| format!("t{i}"));
                let extra: Vec<&str> = target_map
                    .get(&name)
                    .map(|v| v.iter().map(|s| s.as_str()).collect())
                    .unwrap_or_default();
                threads.push(thread_from_raw(t, &name, &domain, &extra)?);
            }
            let mut target = vec![None; threads.len()];
            let mut memory_target = None;
            for (tname, states) in &target_map {
                if tname == "memory" {
                    let mut set = BTreeSet::new();
                    for s in states {
                        let a = domain
                            .iter()
                            .position(|d| d == s)
                            .ok_or_else(|| ModelError::UnknownSymbol(s.clone()))?;
                        set.insert(a);
                    }
                    memory_target = Some(set);
                    continue;
                }
                let ti = threads
                    .iter()
                    .position(|t| &t.name == tname)
                    .ok_or_else(|| ModelError::UnknownThread(tname.clone()))?;
                let mut set = BTreeSet::new();
                for s in states {
                    let q = threads[ti]
                        .state_index(s)
                        .ok_or_else(|| ModelError::UnknownState(s.clone()))?;
                    set.insert(q);
                }
                target[ti] = Some(set);
            }
            let inst = BsrInstance {
                program: Program {
                    domain,
                    init_symbol,
                    threads,
                },
                target,
                memory_target,
                stages: raw.stages.unwrap_or(0),
            };
            inst.validate()?;
            Ok(Instance::Bsr(inst))
        }
        other => Err(ModelError::BadKind(other.to_string())),
    }
}

/// Intern the states of one raw thread. `extra` lists state names referenced
/// from outside the transition list (unsafe / target sets); they must resolve
/// to states already defined by `init` or the transitions.
fn thread_from_raw(
    raw: &RawThread,
    default_name: &str,
    domain: &[String],
    extra: &[&str],
) -> Result<Thread, ModelError> {
    let mut names: Vec<String> = vec![raw.init.clone()];
    let mut transitions = Vec::with_capacity(raw.trans.len());
    let intern = |name: &str, names: &mut Vec<String>| -> usize {
        match names.iter().position(|n| n == name) {
            Some(i) => i,
            None => {
                names.push(name.to_string());
                names.len() - 1
            }
        }
    };
    for t in &raw.trans {
        let from = intern(&t[0], &mut names);
        let op = parse_op(&t[1], domain)?;
        let to = intern(&t[2], &mut names);
        transitions.push(Transition { from, op, to });
    }
    for s in extra {
        if !names.iter().any(|n| n == s) {
            return Err(ModelError::UnknownState((*s).to_string()));
        }
    }
    let name = raw.name.clone().unwrap_or_else(|| default_name.to_string());
    Thread::new(name, names, 0, transitions, domain.len())
}

fn thread_to_raw(t: &Thread, domain: &[String], with_name: bool) -> RawThread {
    RawThread {
        name: if with_name { Some(t.name.clone()) } else { None },
        init: t.state_name(t.initial()).to_string(),
        trans: t
            .transitions()
            .iter()
            .map(|tr| {
                [
                    t.state_name(tr.from).to_string(),
                    op_string(tr.op, domain),
                    t.state_name(tr.to).to_string(),
                ]
            })
            .collect(),
    }
}

pub fn serialize_program(inst: &Instance) -> String {
    let raw = match inst {
        Instance::Lcr(lcr) => RawInstance {
            domain: lcr.domain.clone(),
            init: lcr.domain[lcr.init_symbol].clone(),
            kind: "lcr".into(),
            leader: Some(thread_to_raw(&lcr.leader, &lcr.domain, false)),
            contributors: Some(
                lcr.contributors
                    .iter()
                    .map(|c| thread_to_raw(c, &lcr.domain, false))
                    .collect(),
            ),
            unsafe_states: Some(
                lcr.unsafe_states
                    .iter()
                    .map(|&q| lcr.leader.state_name(q).to_string())
                    .collect(),
            ),
            threads: None,
            target: None,
            stages: None,
        },
        Instance::Bsr(bsr) => {
            let domain = &bsr.program.domain;
            let mut target = BTreeMap::new();
            for (i, tgt) in bsr.target.iter().enumerate() {
                if let Some(set) = tgt {
                    target.insert(
                        bsr.program.threads[i].name.clone(),
                        set.iter()
                            .map(|&q| bsr.program.threads[i].state_name(q).to_string())
                            .collect(),
                    );
                }
            }
            if let Some(mem) = &bsr.memory_target {
                target.insert(
                    "memory".into(),
                    mem.iter().map(|&a| domain[a].clone()).collect(),
                );
            }
            RawInstance {
                domain: domain.clone(),
                init: domain[bsr.program.init_symbol].clone(),
                kind: "bsr".into(),
                leader: None,
                contributors: None,
                unsafe_states: None,
                threads: Some(
                    bsr.program
                        .threads
                        .iter()
                        .map(|t| thread_to_raw(t, domain, true))
                        .collect(),
                ),
                target: Some(target),
                stages: Some(bsr.stages),
            }
        }
    };
    serde_json::to_string_pretty(&raw).expect("instance serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{fig1, random_bsr, random_lcr};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn serialize_parse_is_a_fixpoint() {
        let text = serialize_program(&Instance::Lcr(fig1()));
        let parsed = parse_program(&text).unwrap();
        assert_eq!(serialize_program(&parsed), text);
    }

    #[test]
    fn random_instances_round_trip() {
        // Parsing re-interns states in transition order, so serialize∘parse
        // becomes a fixpoint after one application.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let check = |text: String| {
            let once = serialize_program(&parse_program(&text).unwrap());
            let twice = serialize_program(&parse_program(&once).unwrap());
            assert_eq!(twice, once);
        };
        for _ in 0..50 {
            check(serialize_program(&Instance::Lcr(random_lcr(&mut rng, 4, 4, 3))));
            check(serialize_program(&Instance::Bsr(random_bsr(&mut rng, 3, 3, 3, 4))));
        }
    }

    #[test]
    fn unknown_symbol_is_reported() {
        let text = r#"{"domain":["a0"],"init":"a0","kind":"lcr",
            "leader":{"init":"q0","trans":[["q0","!zzz","q1"]]},
            "contributors":[{"init":"p0","trans":[]}],"unsafe":["q0"]}"#;
        assert!(matches!(
            parse_program(text),
            Err(ModelError::UnknownSymbol(s)) if s == "zzz"
        ));
    }

    #[test]
    fn unsafe_state_must_exist() {
        let text = r#"{"domain":["a0"],"init":"a0","kind":"lcr",
            "leader":{"init":"q0","trans":[]},
            "contributors":[{"init":"p0","trans":[]}],"unsafe":["nope"]}"#;
        assert!(matches!(
            parse_program(text),
            Err(ModelError::UnknownState(_))
        ));
    }

    #[test]
    fn reads_require_matching_memory() {
        let inst = fig1();
        let program = Program {
            domain: inst.domain.clone(),
            init_symbol: inst.init_symbol,
            threads: vec![inst.leader.clone()],
        };
        let succs = successors(&program, &program.initial_configuration());
        // The leader's only move reads `a`, which is not the initial symbol.
        assert!(succs.is_empty());
    }

    #[test]
    fn normalization_adds_write_read_shortcut() {
        let domain = vec!["a0".to_string(), "a".to_string()];
        let leader = Thread::new(
            "leader",
            vec!["q0".into(), "q1".into(), "q2".into()],
            0,
            vec![
                Transition {
                    from: 0,
                    op: MemoryOp::Write(1),
                    to: 1,
                },
                Transition {
                    from: 1,
                    op: MemoryOp::Read(1),
                    to: 2,
                },
            ],
            2,
        )
        .unwrap();
        let contributor =
            Thread::new("contributor", vec!["p0".into()], 0, vec![], 2).unwrap();
        let inst = LcrInstance {
            domain,
            init_symbol: 0,
            leader,
            contributors: vec![contributor],
            unsafe_states: BTreeSet::from([2]),
        };
        let norm = normalize_leader(&inst);
        assert!(norm.leader.transitions().contains(&Transition {
            from: 1,
            op: MemoryOp::Epsilon,
            to: 2,
        }));
    }

    #[test]
    fn merged_contributors_keep_templates_apart() {
        let domain_len = 2;
        let t0 = Thread::new(
            "c0",
            vec!["p0".into(), "p1".into()],
            0,
            vec![Transition {
                from: 0,
                op: MemoryOp::Write(1),
                to: 1,
            }],
            domain_len,
        )
        .unwrap();
        let t1 = Thread::new(
            "c1",
            vec!["r0".into()],
            0,
            vec![],
            domain_len,
        )
        .unwrap();
        let merged = merge_contributors(&[t0, t1], domain_len).unwrap();
        assert_eq!(merged.len(), 4);
        let eps: Vec<_> = merged
            .outgoing(0)
            .iter()
            .filter(|t| t.op == MemoryOp::Epsilon)
            .collect();
        assert_eq!(eps.len(), 2);
    }
}
