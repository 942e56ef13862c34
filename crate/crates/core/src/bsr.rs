//! Bounded-stage reachability. The solver explores the product automaton
//! implicitly: a product state carries the per-thread control states, the
//! active writer (none before the first stage opens), the number of stages
//! used, and the memory. Reads and ε-moves are free for every thread; writes
//! are restricted to the active writer; a stage-open transition picks any
//! thread as the next writer (re-choosing the same writer is allowed and
//! simply consumes a stage).
//!
//! For single-stage instances whose product is too large to enumerate, a
//! saturation search is used instead: non-writing threads only observe the
//! memory, so given the writer's run their reachable state sets evolve
//! independently and monotonically. Both paths produce replayable traces.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::model::{
    BsrInstance, Certificate, Configuration, MemoryOp, SolveError, StateId, SymbolId, Thread,
    Verdict,
};

/// One event of a stage-annotated trace.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum StageEvent {
    /// A stage boundary: `writer` becomes the only thread allowed to write.
    Boundary { writer: usize },
    /// A single thread step together with the configuration it produces.
    Step {
        thread: usize,
        op: MemoryOp,
        result: Configuration,
    },
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct StageTrace {
    pub events: Vec<StageEvent>,
}

#[derive(Error, Debug)]
#[error("stage trace invalid at step {step}: {msg}")]
pub struct TraceError {
    pub step: usize,
    pub msg: String,
}

#[derive(Clone, Debug)]
pub struct BsrConfig {
    pub max_nodes: u64,
    /// Product-size estimate above which single-stage instances switch to the
    /// saturation search.
    pub saturation_threshold: u64,
}

impl Default for BsrConfig {
    fn default() -> Self {
        BsrConfig {
            max_nodes: 5_000_000,
            saturation_threshold: 300_000,
        }
    }
}

pub fn solve_bsr(inst: &BsrInstance) -> Result<Verdict, SolveError> {
    solve_bsr_with(inst, &BsrConfig::default())
}

pub fn solve_bsr_with(inst: &BsrInstance, cfg: &BsrConfig) -> Result<Verdict, SolveError> {
    let mut estimate: u128 = 1;
    for t in &inst.program.threads {
        estimate = estimate.saturating_mul(t.len() as u128);
    }
    estimate = estimate
        .saturating_mul((inst.program.threads.len() + 1) as u128)
        .saturating_mul((inst.stages + 1) as u128)
        .saturating_mul(inst.program.domain.len() as u128);
    if inst.stages <= 1 && estimate > cfg.saturation_threshold as u128 {
        solve_saturated(inst, cfg)
    } else {
        solve_product_bfs(inst, cfg)
    }
}

// ---------------------------------------------------------------------------
// Plain product BFS
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct PNode {
    pc: Vec<StateId>,
    writer: Option<usize>,
    stages: usize,
    memory: SymbolId,
}

#[derive(Clone, Copy, Debug)]
enum PMove {
    Step(usize, MemoryOp, StateId),
    Open(usize),
}

fn solve_product_bfs(inst: &BsrInstance, cfg: &BsrConfig) -> Result<Verdict, SolveError> {
    let program = &inst.program;
    let t = program.threads.len();
    let start = PNode {
        pc: program.threads.iter().map(|th| th.initial()).collect(),
        writer: None,
        stages: 0,
        memory: program.init_symbol,
    };
    let mut parents: HashMap<PNode, Option<(PNode, PMove)>> = HashMap::new();
    parents.insert(start.clone(), None);
    let mut queue = VecDeque::new();
    queue.push_back(start.clone());
    let mut nodes = 0u64;

    let accepts = |n: &PNode| {
        inst.accepts(&Configuration {
            pc: n.pc.clone(),
            memory: n.memory,
        })
    };

    if accepts(&start) {
        let trace = rebuild_trace(inst, &parents, &start);
        return Ok(Verdict::new(true, Some(Certificate::Trace(trace)), 1));
    }

    while let Some(node) = queue.pop_front() {
        nodes += 1;
        if nodes > cfg.max_nodes {
            return Err(SolveError::BudgetExceeded(nodes));
        }
        let push = |next: PNode,
                        mv: PMove,
                        parents: &mut HashMap<PNode, Option<(PNode, PMove)>>,
                        queue: &mut VecDeque<PNode>|
         -> Option<PNode> {
            if parents.contains_key(&next) {
                return None;
            }
            parents.insert(next.clone(), Some((node.clone(), mv)));
            queue.push_back(next.clone());
            accepts(&next).then_some(next)
        };
        for (i, thread) in program.threads.iter().enumerate() {
            for tr in thread.outgoing(node.pc[i]) {
                let memory = match tr.op {
                    MemoryOp::Read(a) => {
                        if node.memory != a {
                            continue;
                        }
                        node.memory
                    }
                    MemoryOp::Epsilon => node.memory,
                    MemoryOp::Write(b) => {
                        if node.writer != Some(i) {
                            continue;
                        }
                        b
                    }
                };
                let mut pc = node.pc.clone();
                pc[i] = tr.to;
                let next = PNode {
                    pc,
                    writer: node.writer,
                    stages: node.stages,
                    memory,
                };
                if let Some(hit) = push(
                    next,
                    PMove::Step(i, tr.op, tr.to),
                    &mut parents,
                    &mut queue,
                ) {
                    let trace = rebuild_trace(inst, &parents, &hit);
                    return Ok(Verdict::new(true, Some(Certificate::Trace(trace)), nodes));
                }
            }
        }
        if node.stages < inst.stages {
            for m in 0..t {
                let next = PNode {
                    pc: node.pc.clone(),
                    writer: Some(m),
                    stages: node.stages + 1,
                    memory: node.memory,
                };
                if let Some(hit) = push(next, PMove::Open(m), &mut parents, &mut queue) {
                    let trace = rebuild_trace(inst, &parents, &hit);
                    return Ok(Verdict::new(true, Some(Certificate::Trace(trace)), nodes));
                }
            }
        }
    }
    Ok(Verdict::new(false, None, nodes))
}

fn rebuild_trace(
    inst: &BsrInstance,
    parents: &HashMap<PNode, Option<(PNode, PMove)>>,
    hit: &PNode,
) -> StageTrace {
    let mut moves = Vec::new();
    let mut cur = hit.clone();
    while let Some(Some((prev, mv))) = parents.get(&cur) {
        moves.push(*mv);
        cur = prev.clone();
    }
    moves.reverse();
    let mut events = Vec::new();
    let mut config = inst.program.initial_configuration();
    for mv in moves {
        match mv {
            PMove::Open(w) => events.push(StageEvent::Boundary { writer: w }),
            PMove::Step(i, op, to) => {
                config.pc[i] = to;
                if let MemoryOp::Write(b) = op {
                    config.memory = b;
                }
                events.push(StageEvent::Step {
                    thread: i,
                    op,
                    result: config.clone(),
                });
            }
        }
    }
    StageTrace { events }
}

// ---------------------------------------------------------------------------
// Saturation search for s <= 1
// ---------------------------------------------------------------------------

type BitVec = Vec<u64>;

fn bit_contains(v: &BitVec, i: usize) -> bool {
    v[i / 64] & (1 << (i % 64)) != 0
}

fn bit_insert(v: &mut BitVec, i: usize) {
    v[i / 64] |= 1 << (i % 64);
}

fn bit_iter(v: &BitVec) -> impl Iterator<Item = usize> + '_ {
    v.iter().enumerate().flat_map(|(w, &word)| {
        let mut rest = word;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * 64 + b)
            }
        })
    })
}

/// Close `set` under ε-moves and reads of `memory` within one thread.
fn close_under(thread: &Thread, set: &mut BitVec, memory: SymbolId) {
    let mut work: Vec<StateId> = bit_iter(set).collect();
    while let Some(q) = work.pop() {
        for tr in thread.outgoing(q) {
            let ok = match tr.op {
                MemoryOp::Epsilon => true,
                MemoryOp::Read(a) => a == memory,
                MemoryOp::Write(_) => false,
            };
            if ok && !bit_contains(set, tr.to) {
                bit_insert(set, tr.to);
                work.push(tr.to);
            }
        }
    }
}

/// Re-close `set` after the memory changed to `memory`: only reads of the new
/// symbol can admit states, so seed the closure from those transitions alone
/// instead of rescanning the whole set.
fn resaturate(thread: &Thread, read_trs: &[Vec<(StateId, StateId)>], set: &mut BitVec, memory: SymbolId) {
    let mut work: Vec<StateId> = Vec::new();
    for &(from, to) in &read_trs[memory] {
        if bit_contains(set, from) && !bit_contains(set, to) {
            bit_insert(set, to);
            work.push(to);
        }
    }
    while let Some(q) = work.pop() {
        for tr in thread.outgoing(q) {
            let ok = match tr.op {
                MemoryOp::Epsilon => true,
                MemoryOp::Read(a) => a == memory,
                MemoryOp::Write(_) => false,
            };
            if ok && !bit_contains(set, tr.to) {
                bit_insert(set, tr.to);
                work.push(tr.to);
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct SatNode {
    writer: usize,
    qw: StateId,
    memory: SymbolId,
    subs: Vec<BitVec>,
}

fn solve_saturated(inst: &BsrInstance, cfg: &BsrConfig) -> Result<Verdict, SolveError> {
    let program = &inst.program;
    let t = program.threads.len();
    let a0 = program.init_symbol;
    let words = |i: usize| program.threads[i].len().div_ceil(64);
    let mut closure0: Vec<BitVec> = Vec::with_capacity(t);
    for (i, th) in program.threads.iter().enumerate() {
        let mut set = vec![0u64; words(i)];
        bit_insert(&mut set, th.initial());
        close_under(th, &mut set, a0);
        closure0.push(set);
    }
    // per thread, per symbol: the read transitions, for incremental reclosure
    let read_trs: Vec<Vec<Vec<(StateId, StateId)>>> = program
        .threads
        .iter()
        .map(|th| {
            let mut by_symbol = vec![Vec::new(); program.domain.len()];
            for tr in th.transitions() {
                if let MemoryOp::Read(a) = tr.op {
                    by_symbol[a].push((tr.from, tr.to));
                }
            }
            by_symbol
        })
        .collect();
    let mut nodes = 1u64;

    let sets_accept = |subs: &[BitVec], skip: Option<(usize, StateId)>, memory: SymbolId| -> bool {
        if let Some(mem_tgt) = &inst.memory_target {
            if !mem_tgt.contains(&memory) {
                return false;
            }
        }
        for (i, tgt) in inst.target.iter().enumerate() {
            let Some(set) = tgt else { continue };
            if let Some((w, qw)) = skip {
                if i == w {
                    if !set.contains(&qw) {
                        return false;
                    }
                    continue;
                }
            }
            if !set.iter().any(|&q| bit_contains(&subs[i], q)) {
                return false;
            }
        }
        true
    };

    // Stage 0 alone: every thread just reads the initial symbol.
    if sets_accept(&closure0, None, a0) {
        let trace = rebuild_saturated_trace(inst, &closure0, None, &[], a0)?;
        return Ok(Verdict::new(true, Some(Certificate::Trace(trace)), nodes));
    }
    if inst.stages == 0 {
        return Ok(Verdict::new(false, None, nodes));
    }

    // One stage: pick a writer and a start state from its stage-0 closure,
    // then explore its concrete runs while the other threads saturate.
    for w in 0..t {
        let starts: Vec<StateId> = bit_iter(&closure0[w]).collect();
        for &qstart in &starts {
            let mut subs = closure0.clone();
            subs[w] = vec![0u64; words(w)];
            let start = SatNode {
                writer: w,
                qw: qstart,
                memory: a0,
                subs,
            };
            let mut parents: HashMap<SatNode, Option<(SatNode, MemoryOp, StateId)>> =
                HashMap::new();
            parents.insert(start.clone(), None);
            // Reader closures only grow and the verdict is monotone in them,
            // so per (writer state, memory) we keep only maximal closures.
            let flatten =
                |subs: &[BitVec]| -> Vec<u64> { subs.iter().flatten().copied().collect() };
            let covers =
                |a: &[u64], b: &[u64]| a.iter().zip(b).all(|(&x, &y)| y & !x == 0);
            let mut maximal: HashMap<(StateId, SymbolId), Vec<Vec<u64>>> = HashMap::new();
            maximal.insert((start.qw, start.memory), vec![flatten(&start.subs)]);
            let mut queue = VecDeque::new();
            queue.push_back(start.clone());
            if sets_accept(&start.subs, Some((w, qstart)), a0) {
                let trace = rebuild_saturated_trace(inst, &closure0, Some((w, qstart)), &[], a0)?;
                return Ok(Verdict::new(true, Some(Certificate::Trace(trace)), nodes));
            }
            while let Some(node) = queue.pop_front() {
                nodes += 1;
                if nodes > cfg.max_nodes {
                    return Err(SolveError::BudgetExceeded(nodes));
                }
                for tr in program.threads[w].outgoing(node.qw) {
                    let (memory, reclose) = match tr.op {
                        MemoryOp::Epsilon => (node.memory, false),
                        MemoryOp::Read(a) => {
                            if a != node.memory {
                                continue;
                            }
                            (node.memory, false)
                        }
                        MemoryOp::Write(b) => (b, true),
                    };
                    let mut subs = node.subs.clone();
                    if reclose {
                        for i in 0..t {
                            if i != w {
                                resaturate(&program.threads[i], &read_trs[i], &mut subs[i], memory);
                            }
                        }
                    }
                    let next = SatNode {
                        writer: w,
                        qw: tr.to,
                        memory,
                        subs,
                    };
                    let flat = flatten(&next.subs);
                    let entry = maximal.entry((next.qw, next.memory)).or_default();
                    if entry.iter().any(|old| covers(old, &flat)) {
                        continue;
                    }
                    entry.retain(|old| !covers(&flat, old));
                    entry.push(flat);
                    parents.insert(next.clone(), Some((node.clone(), tr.op, tr.to)));
                    if sets_accept(&next.subs, Some((w, next.qw)), next.memory) {
                        // Recover the writer's run from the parent chain.
                        let mut run = Vec::new();
                        let mut cur = next.clone();
                        while let Some(Some((prev, op, to))) = parents.get(&cur) {
                            run.push((*op, *to));
                            cur = prev.clone();
                        }
                        run.reverse();
                        let trace = rebuild_saturated_trace(
                            inst,
                            &closure0,
                            Some((w, qstart)),
                            &run,
                            next.memory,
                        )?;
                        return Ok(Verdict::new(true, Some(Certificate::Trace(trace)), nodes));
                    }
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(Verdict::new(false, None, nodes))
}

/// Rebuild a full stage trace from a saturated search result. `writer` is the
/// chosen writer with its stage-0 target state (None if the stage never
/// opened) and `run` its in-stage moves. Reader runs are recomputed per
/// thread against the memory-epoch sequence.
fn rebuild_saturated_trace(
    inst: &BsrInstance,
    _closure0: &[BitVec],
    writer: Option<(usize, StateId)>,
    run: &[(MemoryOp, StateId)],
    _final_memory: SymbolId,
) -> Result<StageTrace, SolveError> {
    let program = &inst.program;
    let t = program.threads.len();
    let a0 = program.init_symbol;
    // Memory epochs: epoch 0 is the initial symbol, one more per writer write.
    let mut epochs = vec![a0];
    for (op, _) in run {
        if let MemoryOp::Write(b) = op {
            epochs.push(*b);
        }
    }
    // Per-thread runs, each op labeled with the epoch it executes in.
    let mut thread_runs: Vec<Vec<(usize, MemoryOp, StateId)>> = vec![Vec::new(); t];
    for i in 0..t {
        if let Some((w, _)) = writer {
            if i == w {
                continue;
            }
        }
        let goal = inst.target[i].as_ref();
        let run_i = epoch_run(&program.threads[i], &epochs, goal)
            .ok_or_else(|| SolveError::TooLarge("trace reconstruction failed".into()))?;
        thread_runs[i] = run_i;
    }
    if let Some((w, qstart)) = writer {
        // The writer's stage-0 prefix reaches qstart on the initial symbol;
        // its in-stage moves are replayed from `run` directly below.
        thread_runs[w] = epoch_run_to(&program.threads[w], &epochs[..1], qstart)
            .ok_or_else(|| SolveError::TooLarge("trace reconstruction failed".into()))?;
    }

    // Assemble: all epoch-0 moves, the boundary, then the writer's moves with
    // reader moves of epoch e emitted right after the write opening epoch e.
    let mut events = Vec::new();
    let mut config = program.initial_configuration();
    let mut cursors = vec![0usize; t];
    let emit_epoch =
        |e: usize,
         events: &mut Vec<StageEvent>,
         config: &mut Configuration,
         cursors: &mut Vec<usize>,
         skip: Option<usize>| {
            for i in 0..t {
                if Some(i) == skip {
                    continue;
                }
                while cursors[i] < thread_runs[i].len() && thread_runs[i][cursors[i]].0 == e {
                    let (_, op, to) = thread_runs[i][cursors[i]];
                    cursors[i] += 1;
                    config.pc[i] = to;
                    if let MemoryOp::Write(b) = op {
                        config.memory = b;
                    }
                    events.push(StageEvent::Step {
                        thread: i,
                        op,
                        result: config.clone(),
                    });
                }
            }
        };
    emit_epoch(0, &mut events, &mut config, &mut cursors, None);
    if let Some((w, _)) = writer {
        events.push(StageEvent::Boundary { writer: w });
        let mut epoch = 0usize;
        for (op, to) in run {
            config.pc[w] = *to;
            if let MemoryOp::Write(b) = *op {
                config.memory = b;
                epoch += 1;
            }
            events.push(StageEvent::Step {
                thread: w,
                op: *op,
                result: config.clone(),
            });
            if matches!(op, MemoryOp::Write(_)) {
                emit_epoch(epoch, &mut events, &mut config, &mut cursors, Some(w));
            }
        }
    }
    Ok(StageTrace { events })
}

/// Shortest run of `thread` from its initial state to any state in `goal`
/// (or the empty run if `goal` is None), reading only the epoch symbols in
/// order. Returns ops labeled with their epoch index.
fn epoch_run(
    thread: &Thread,
    epochs: &[SymbolId],
    goal: Option<&std::collections::BTreeSet<StateId>>,
) -> Option<Vec<(usize, MemoryOp, StateId)>> {
    let Some(goal) = goal else {
        return Some(Vec::new());
    };
    if goal.contains(&thread.initial()) {
        return Some(Vec::new());
    }
    bfs_epochs(thread, epochs, |q| goal.contains(&q))
}

fn epoch_run_to(
    thread: &Thread,
    epochs: &[SymbolId],
    target: StateId,
) -> Option<Vec<(usize, MemoryOp, StateId)>> {
    if thread.initial() == target {
        return Some(Vec::new());
    }
    bfs_epochs(thread, epochs, |q| q == target)
}

fn bfs_epochs(
    thread: &Thread,
    epochs: &[SymbolId],
    is_goal: impl Fn(StateId) -> bool,
) -> Option<Vec<(usize, MemoryOp, StateId)>> {
    #[derive(Clone, Copy)]
    enum Back {
        None,
        Op(usize, MemoryOp, StateId, usize), // parent index, op taken, state reached, epoch
        Advance(usize),
    }
    let n = thread.len();
    let idx = |q: usize, e: usize| e * n + q;
    let mut back = vec![None::<Back>; n * epochs.len()];
    let start = idx(thread.initial(), 0);
    back[start] = Some(Back::None);
    let mut queue = VecDeque::new();
    queue.push_back((thread.initial(), 0usize));
    while let Some((q, e)) = queue.pop_front() {
        for tr in thread.outgoing(q) {
            let ok = match tr.op {
                MemoryOp::Epsilon => true,
                MemoryOp::Read(a) => a == epochs[e],
                MemoryOp::Write(_) => false,
            };
            if ok && back[idx(tr.to, e)].is_none() {
                back[idx(tr.to, e)] = Some(Back::Op(idx(q, e), tr.op, tr.to, e));
                if is_goal(tr.to) {
                    return Some(unwind(&back, idx(tr.to, e)));
                }
                queue.push_back((tr.to, e));
            }
        }
        if e + 1 < epochs.len() && back[idx(q, e + 1)].is_none() {
            back[idx(q, e + 1)] = Some(Back::Advance(idx(q, e)));
            queue.push_back((q, e + 1));
        }
    }
    return None;

    fn unwind(back: &[Option<Back>], mut at: usize) -> Vec<(usize, MemoryOp, StateId)> {
        let mut out = Vec::new();
        loop {
            match back[at].expect("visited node has a back-pointer") {
                Back::None => break,
                Back::Op(parent, op, to, e) => {
                    out.push((e, op, to));
                    at = parent;
                }
                Back::Advance(parent) => at = parent,
            }
        }
        out.reverse();
        out
    }
}

// ---------------------------------------------------------------------------
// Trace replay and helpers
// ---------------------------------------------------------------------------

/// Replay a trace against the instance: every step must be an enabled
/// one-step successor, writes within a stage must belong to the active
/// writer, at most `stages` boundaries may occur, and the final configuration
/// must lie in the target.
pub fn check_stage_trace(trace: &StageTrace, inst: &BsrInstance) -> Result<(), TraceError> {
    let program = &inst.program;
    let mut config = program.initial_configuration();
    let mut writer: Option<usize> = None;
    let mut boundaries = 0usize;
    for (step, event) in trace.events.iter().enumerate() {
        match event {
            StageEvent::Boundary { writer: w } => {
                boundaries += 1;
                if boundaries > inst.stages {
                    return Err(TraceError {
                        step,
                        msg: format!("stage budget {} exceeded", inst.stages),
                    });
                }
                if *w >= program.threads.len() {
                    return Err(TraceError {
                        step,
                        msg: format!("writer index {w} out of range"),
                    });
                }
                writer = Some(*w);
            }
            StageEvent::Step { thread, op, result } => {
                if matches!(op, MemoryOp::Write(_)) && writer != Some(*thread) {
                    return Err(TraceError {
                        step,
                        msg: format!("thread {thread} writes but is not the active writer"),
                    });
                }
                let succs = crate::model::successors(program, &config);
                let ok = succs
                    .iter()
                    .any(|(c, i, o)| c == result && i == thread && o == op);
                if !ok {
                    return Err(TraceError {
                        step,
                        msg: format!("step of thread {thread} is not an enabled successor"),
                    });
                }
                config = result.clone();
            }
        }
    }
    if !inst.accepts(&config) {
        return Err(TraceError {
            step: trace.events.len(),
            msg: "final configuration is not in the target".into(),
        });
    }
    Ok(())
}

/// Reachability of the target ignoring stage bounds entirely (every thread
/// may write at any time). Used as the saturation reference for large `s`.
pub fn product_reach_unrestricted(inst: &BsrInstance, max_nodes: u64) -> Result<bool, SolveError> {
    let program = &inst.program;
    let start = program.initial_configuration();
    if inst.accepts(&start) {
        return Ok(true);
    }
    let mut visited = std::collections::HashSet::new();
    visited.insert(start.clone());
    let mut queue = VecDeque::new();
    queue.push_back(start);
    let mut nodes = 0u64;
    while let Some(c) = queue.pop_front() {
        nodes += 1;
        if nodes > max_nodes {
            return Err(SolveError::BudgetExceeded(nodes));
        }
        for (next, _, _) in crate::model::successors(program, &c) {
            if visited.insert(next.clone()) {
                if inst.accepts(&next) {
                    return Ok(true);
                }
                queue.push_back(next);
            }
        }
    }
    Ok(false)
}

/// Serialize a trace as JSON lines with running stage counters.
pub fn stage_trace_to_json_lines(trace: &StageTrace, inst: &BsrInstance) -> String {
    let program = &inst.program;
    let mut out = String::new();
    let mut stage = 0usize;
    for event in &trace.events {
        let line = match event {
            StageEvent::Boundary { writer } => {
                stage += 1;
                serde_json::json!({
                    "stage": stage,
                    "open-writer": program.threads[*writer].name,
                })
            }
            StageEvent::Step { thread, op, result } => serde_json::json!({
                "stage": stage,
                "thread": program.threads[*thread].name,
                "op": match op {
                    MemoryOp::Write(a) => format!("!{}", program.domain[*a]),
                    MemoryOp::Read(a) => format!("?{}", program.domain[*a]),
                    MemoryOp::Epsilon => "eps".to_string(),
                },
                "memory": program.domain[result.memory],
                "pc": result
                    .pc
                    .iter()
                    .enumerate()
                    .map(|(i, &q)| program.threads[i].state_name(q))
                    .collect::<Vec<_>>(),
            }),
        };
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}
