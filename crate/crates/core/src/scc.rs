//! SCC-compressed witness solver for LCR. For a repetition-free first-write
//! word r, the leader restricted to reads within the first i bars is
//! decomposed into strongly connected components; a candidate then spells
//! SCCs instead of individual states, with at most d(r) SCC letters, where
//! d(r) is the longest path in the layered SCC graph G(P_L, r). A valid
//! SCC-witness exists iff a valid plain witness exists, but the candidate
//! space is much smaller on loop-heavy leaders.

use std::collections::HashMap;

use crate::bits::SmallSet;
use crate::model::{
    Certificate, LcrInstance, MemoryOp, SolveError, StateId, SymbolId, Thread, Verdict,
    normalize_leader,
};
use crate::witness::Invalid;

/// SCC decomposition of one restriction level P_L|_i.
pub struct LevelScc {
    /// state -> SCC id at this level
    pub scc_of: Vec<usize>,
    /// SCC id -> member states, ascending
    pub members: Vec<Vec<StateId>>,
    /// SCC id -> symbols written on transitions inside the SCC
    pub writes: Vec<SmallSet>,
}

/// The layered graph G(P_L, r): one vertex per SCC per level, same-level
/// edges between distinct SCCs, and cross edges from level i-1 to i enabled
/// by reading c_i.
pub struct SccGraph {
    pub levels: Vec<LevelScc>,
    offsets: Vec<usize>,
    succ: Vec<Vec<usize>>,
}

impl SccGraph {
    pub fn node(&self, level: usize, id: usize) -> usize {
        self.offsets[level] + id
    }

    pub fn num_nodes(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn successors(&self, level: usize, id: usize) -> &[usize] {
        &self.succ[self.node(level, id)]
    }
}

/// The leader with every read of a symbol outside {c_1..c_i} removed.
pub fn restricted_leader(leader: &Thread, r: &[SymbolId], i: usize) -> Thread {
    let allowed: SmallSet = r[..i].iter().copied().collect();
    let domain_len = leader
        .transitions()
        .iter()
        .filter_map(|t| t.op.symbol())
        .max()
        .map_or(0, |m| m + 1);
    let transitions = leader
        .transitions()
        .iter()
        .filter(|t| match t.op {
            MemoryOp::Read(a) => allowed.contains(a),
            _ => true,
        })
        .cloned()
        .collect();
    Thread::new(
        leader.name().to_string(),
        leader.state_names().to_vec(),
        leader.initial(),
        transitions,
        domain_len,
    )
    .expect("restriction preserves well-formedness")
}

/// Iterative Tarjan over an adjacency list; returns (scc id per vertex,
/// number of SCCs). Ids are assigned in completion order.
fn tarjan(n: usize, succ: &[Vec<usize>]) -> (Vec<usize>, usize) {
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut next_comp = 0usize;
    // call stack: (vertex, next successor position)
    let mut calls: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        calls.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = calls.last_mut() {
            if let Some(&w) = succ[v].get(*pos) {
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    calls.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                calls.pop();
                if let Some(&(parent, _)) = calls.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = next_comp;
                        if w == v {
                            break;
                        }
                    }
                    next_comp += 1;
                }
            }
        }
    }
    (comp, next_comp)
}

fn level_scc(leader: &Thread, r: &[SymbolId], i: usize) -> LevelScc {
    let allowed: SmallSet = r[..i].iter().copied().collect();
    let n = leader.len();
    let mut succ = vec![Vec::new(); n];
    for tr in leader.transitions() {
        if let MemoryOp::Read(a) = tr.op {
            if !allowed.contains(a) {
                continue;
            }
        }
        succ[tr.from].push(tr.to);
    }
    let (scc_of, count) = tarjan(n, &succ);
    let mut members = vec![Vec::new(); count];
    for q in 0..n {
        members[scc_of[q]].push(q);
    }
    let mut writes = vec![SmallSet::EMPTY; count];
    for tr in leader.transitions() {
        if let MemoryOp::Write(a) = tr.op {
            if scc_of[tr.from] == scc_of[tr.to] {
                writes[scc_of[tr.from]] = writes[scc_of[tr.from]].with(a);
            }
        }
    }
    LevelScc {
        scc_of,
        members,
        writes,
    }
}

/// Build G(P_L, r) and return it with its longest path length, counted in
/// nodes.
pub fn scc_depth(leader: &Thread, r: &[SymbolId]) -> (SccGraph, usize) {
    let levels: Vec<LevelScc> = (0..=r.len()).map(|i| level_scc(leader, r, i)).collect();
    let mut offsets = vec![0usize];
    for lvl in &levels {
        offsets.push(offsets.last().unwrap() + lvl.members.len());
    }
    let total = *offsets.last().unwrap();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); total];
    for (i, lvl) in levels.iter().enumerate() {
        let allowed: SmallSet = r[..i].iter().copied().collect();
        for tr in leader.transitions() {
            if let MemoryOp::Read(a) = tr.op {
                if !allowed.contains(a) {
                    continue;
                }
            }
            let (s1, s2) = (lvl.scc_of[tr.from], lvl.scc_of[tr.to]);
            if s1 != s2 {
                succ[offsets[i] + s1].push(offsets[i] + s2);
            }
        }
        // cross edges i-1 -> i, enabled by reading c_i
        if i > 0 {
            let prev = &levels[i - 1];
            let c = r[i - 1];
            for tr in leader.transitions() {
                if tr.op == MemoryOp::Read(c) {
                    succ[offsets[i - 1] + prev.scc_of[tr.from]]
                        .push(offsets[i] + lvl.scc_of[tr.to]);
                }
            }
        }
    }
    for list in &mut succ {
        list.sort_unstable();
        list.dedup();
    }
    let graph = SccGraph {
        levels,
        offsets,
        succ,
    };
    let depth = longest_path(&graph);
    (graph, depth)
}

/// Longest path in nodes; panics if the graph has a cycle (it cannot, by
/// construction).
fn longest_path(g: &SccGraph) -> usize {
    const ACTIVE: usize = usize::MAX - 1;
    const TODO: usize = usize::MAX;
    let n = g.num_nodes();
    let mut depth = vec![TODO; n];
    for start in 0..n {
        if depth[start] != TODO {
            continue;
        }
        let mut stack = vec![(start, 0usize)];
        depth[start] = ACTIVE;
        while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
            if let Some(&w) = g.succ[v].get(*pos) {
                *pos += 1;
                match depth[w] {
                    TODO => {
                        depth[w] = ACTIVE;
                        stack.push((w, 0));
                    }
                    ACTIVE => panic!("G(P_L, r) must be acyclic"),
                    _ => {}
                }
            } else {
                stack.pop();
                let best = g.succ[v].iter().map(|&w| depth[w]).max().unwrap_or(0);
                depth[v] = best + 1;
            }
        }
    }
    depth.iter().copied().max().unwrap_or(0)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SccLetter {
    /// An SCC of the restriction level `level`.
    Scc { level: usize, id: usize },
    Symbol(SymbolId),
    Bottom,
    FirstWrite(SymbolId),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SccWitnessCandidate {
    pub letters: Vec<SccLetter>,
}

impl SccWitnessCandidate {
    fn bars(&self) -> Vec<SymbolId> {
        self.letters
            .iter()
            .filter_map(|l| match l {
                SccLetter::FirstWrite(a) => Some(*a),
                _ => None,
            })
            .collect()
    }

    /// Tokens like ["scc:{q1,q2}@0","b","~c","scc:{q3}@1"]. SCC members are
    /// resolved against the normalized leader's decomposition for the bars
    /// appearing in the candidate.
    pub fn to_tokens(&self, inst: &LcrInstance) -> Vec<String> {
        let normalized = normalize_leader(inst);
        let r = self.bars();
        let (graph, _) = scc_depth(&normalized.leader, &r);
        self.letters
            .iter()
            .map(|l| match *l {
                SccLetter::Scc { level, id } => {
                    let names: Vec<&str> = graph.levels[level].members[id]
                        .iter()
                        .map(|&q| normalized.leader.state_name(q))
                        .collect();
                    format!("scc:{{{}}}@{}", names.join(","), level)
                }
                SccLetter::Symbol(a) => inst.domain[a].clone(),
                SccLetter::Bottom => "_".to_string(),
                SccLetter::FirstWrite(a) => format!("~{}", inst.domain[a]),
            })
            .collect()
    }
}

/// Cumulative first-write sets per letter position.
fn first_write_sets(letters: &[SccLetter]) -> Vec<SmallSet> {
    let mut acc = SmallSet::EMPTY;
    letters
        .iter()
        .map(|l| {
            if let SccLetter::FirstWrite(a) = *l {
                acc = acc.with(a);
            }
            acc
        })
        .collect()
}

/// States from which some unsafe state is reachable with reads ⊆ `reads`.
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

/// Embedding check for a prefix v·ā: a contributor computation reaching a
/// write of `target` whose reads map monotonically into v. A read ?b at
/// position i is served by a literal symbol b, by b ∈ D(scc) for an SCC
/// letter (symbols written inside the SCC), or by an earlier first write;
/// the virtual position 0 serves reads of a⁰.
fn embedding_ok(
    contributor: &Thread,
    graph: &SccGraph,
    v: &[SccLetter],
    dbar_at: &[SmallSet],
    init_symbol: SymbolId,
    target: SymbolId,
) -> bool {
    let n = v.len();
    let idx = |p: StateId, i: usize| p * (n + 1) + i;
    let mut seen = vec![false; contributor.len() * (n + 1)];
    let mut stack = vec![(contributor.initial(), 0usize)];
    seen[idx(contributor.initial(), 0)] = true;
    let serves = |i: usize, b: SymbolId| -> bool {
        if i == 0 {
            return b == init_symbol;
        }
        let literal = match v[i - 1] {
            SccLetter::Symbol(s) => s == b,
            SccLetter::Scc { level, id } => graph.levels[level].writes[id].contains(b),
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
                    if serves(i, b) {
                        push(tr.to, i, &mut seen, &mut stack);
                    }
                }
                MemoryOp::Epsilon => push(tr.to, i, &mut seen, &mut stack),
            }
        }
    }
    false
}

/// Is there a transition from a state of `from` to a state of `to` matching
/// the pair letter `op` (a write of the symbol, or for ⊥ an ε / a read of a
/// symbol in `snap`)?
fn scc_connect(
    leader: &Thread,
    from: &[StateId],
    to_scc: &[StateId],
    op: SccLetter,
    snap: SmallSet,
) -> bool {
    leader.transitions().iter().any(|tr| {
        from.contains(&tr.from)
            && to_scc.contains(&tr.to)
            && match (op, tr.op) {
                (SccLetter::Symbol(a), MemoryOp::Write(b)) => a == b,
                (SccLetter::Bottom, MemoryOp::Epsilon) => true,
                (SccLetter::Bottom, MemoryOp::Read(b)) => snap.contains(b),
                _ => false,
            }
    })
}

/// Parsed candidate structure.
struct SccShape {
    /// (scc letter index, op letter index) per pair
    pairs: Vec<(usize, usize)>,
    final_letter: usize,
}

fn parse_scc_shape(
    w: &SccWitnessCandidate,
    graph: &SccGraph,
    r: &[SymbolId],
    depth: usize,
    num_symbols: usize,
) -> Result<SccShape, Invalid> {
    let shape_err = |msg: &str| Err(Invalid::Shape(msg.to_string()));
    // r must be repetition-free over the domain
    let mut seen = SmallSet::EMPTY;
    for &a in r {
        if a >= num_symbols || seen.contains(a) {
            return shape_err("first-write word must be repetition-free");
        }
        seen = seen.with(a);
    }
    let mut pairs = Vec::new();
    let mut level = 0usize;
    let mut i = 0;
    loop {
        match w.letters.get(i) {
            None => return shape_err("candidate must end in an SCC letter"),
            Some(&SccLetter::FirstWrite(_)) => {
                // bars appear in r-order by construction of bars()
                level += 1;
                i += 1;
            }
            Some(&SccLetter::Scc { level: l, id }) => {
                if l != level {
                    return shape_err("SCC letter level must match the bars before it");
                }
                if id >= graph.levels[l].members.len() {
                    return shape_err("SCC id out of range");
                }
                match w.letters.get(i + 1) {
                    None => {
                        if level != r.len() {
                            return shape_err("candidate ends before the last first-write");
                        }
                        if pairs.len() + 1 > depth {
                            return shape_err("more SCC letters than the depth allows");
                        }
                        return Ok(SccShape {
                            pairs,
                            final_letter: i,
                        });
                    }
                    Some(&SccLetter::Symbol(a)) if a >= num_symbols => {
                        return shape_err("symbol out of range")
                    }
                    Some(&SccLetter::Symbol(_)) | Some(&SccLetter::Bottom) => {
                        pairs.push((i, i + 1));
                        i += 2;
                    }
                    Some(_) => return shape_err("SCC letter must be followed by a symbol or ⊥"),
                }
            }
            Some(_) => return shape_err("expected an SCC letter or a first-write"),
        }
    }
}

/// SCC validity: (1) the sequence encodes a leader run (connected adjacent
/// SCCs, q⁰_L in the first SCC, final SCC reaches F_L reading only bars);
/// (2) supportive contributor computations per bar prefix; (3) SCCs do not
/// repeat within a segment.
pub fn check_scc_validity(w: &SccWitnessCandidate, inst: &LcrInstance) -> Result<(), Invalid> {
    let inst = normalize_leader(inst);
    let r = w.bars();
    let num_symbols = inst.domain.len();
    let (graph, depth) = scc_depth(&inst.leader, &r);
    let shape = parse_scc_shape(w, &graph, &r, depth, num_symbols)?;
    let dbar_at = first_write_sets(&w.letters);
    let letter_scc = |i: usize| match w.letters[i] {
        SccLetter::Scc { level, id } => (level, id),
        _ => unreachable!("shape guarantees an SCC letter"),
    };

    // (1) leader run
    let mut scc_positions: Vec<usize> = shape.pairs.iter().map(|&(s, _)| s).collect();
    scc_positions.push(shape.final_letter);
    let (l0, id0) = letter_scc(scc_positions[0]);
    if !graph.levels[l0].members[id0].contains(&inst.leader.initial()) {
        return Err(Invalid::Requirement(1));
    }
    for (k, &(_, op_pos)) in shape.pairs.iter().enumerate() {
        let (lf, idf) = letter_scc(scc_positions[k]);
        let (lt, idt) = letter_scc(scc_positions[k + 1]);
        if !scc_connect(
            &inst.leader,
            &graph.levels[lf].members[idf],
            &graph.levels[lt].members[idt],
            w.letters[op_pos],
            dbar_at[op_pos],
        ) {
            return Err(Invalid::Requirement(1));
        }
    }
    let full: SmallSet = r.iter().copied().collect();
    let reachers = final_reachers(&inst, full);
    let (lf, idf) = letter_scc(shape.final_letter);
    if !graph.levels[lf].members[idf]
        .iter()
        .any(|&q| reachers.contains(q))
    {
        return Err(Invalid::Requirement(1));
    }

    // (2) contributor embeddings
    let contributor = inst.solving_contributor();
    for (pos, letter) in w.letters.iter().enumerate() {
        if let SccLetter::FirstWrite(a) = *letter {
            if !embedding_ok(
                &contributor,
                &graph,
                &w.letters[..pos],
                &dbar_at[..pos],
                inst.init_symbol,
                a,
            ) {
                return Err(Invalid::Requirement(2));
            }
        }
    }

    // (3) no SCC repeats within a segment
    let mut segment: Vec<usize> = Vec::new();
    let mut level = 0usize;
    for &(scc_pos, _) in &shape.pairs {
        let (l, id) = letter_scc(scc_pos);
        if l != level {
            segment.clear();
            level = l;
        }
        if segment.contains(&id) {
            return Err(Invalid::Requirement(3));
        }
        segment.push(id);
    }
    Ok(())
}

#[derive(Clone, Copy, Debug)]
pub struct SccConfig {
    pub max_nodes: u64,
}

impl Default for SccConfig {
    fn default() -> SccConfig {
        SccConfig {
            max_nodes: 20_000_000,
        }
    }
}

pub fn solve_lcr_scc(inst: &LcrInstance) -> Result<Verdict, SolveError> {
    solve_lcr_scc_with(inst, &SccConfig::default())
}

pub fn solve_lcr_scc_with(inst: &LcrInstance, config: &SccConfig) -> Result<Verdict, SolveError> {
    let mut search = SccSearch::new(inst, config.max_nodes, Mode::FindFirst)?;
    search.explore_r(&mut Vec::new())?;
    let certificate = search
        .found
        .first()
        .map(|w| Certificate::SccWitness(w.to_tokens(inst)));
    Ok(Verdict::new(
        !search.found.is_empty(),
        certificate,
        search.nodes,
    ))
}

/// Count all shape-complete candidates (no validity pruning), for sanity
/// bounds in tests.
pub fn count_scc_candidates(inst: &LcrInstance, max_nodes: u64) -> Result<u64, SolveError> {
    let mut search = SccSearch::new(inst, max_nodes, Mode::CountShapes)?;
    search.explore_r(&mut Vec::new())?;
    Ok(search.count)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    FindFirst,
    CountShapes,
}

struct RContext {
    r: Vec<SymbolId>,
    graph: SccGraph,
    depth: usize,
}

struct SccSearch {
    inst: LcrInstance, // normalized
    contributor: Thread,
    max_nodes: u64,
    mode: Mode,
    nodes: u64,
    count: u64,
    letters: Vec<SccLetter>,
    dbar_at: Vec<SmallSet>,
    dbar: SmallSet,
    pairs_used: usize,
    segment: SmallSet,
    final_memo: HashMap<u64, SmallSet>,
    found: Vec<SccWitnessCandidate>,
}

/// Unresolved pair: previous SCC letter plus its op and, for ⊥, the
/// first-write set at the op's position.
#[derive(Clone, Copy)]
struct Pending {
    level: usize,
    id: usize,
    op: SccLetter,
    snap: SmallSet,
}

impl SccSearch {
    fn new(inst: &LcrInstance, max_nodes: u64, mode: Mode) -> Result<SccSearch, SolveError> {
        if inst.leader.len() > 64 || inst.domain.len() > 64 {
            return Err(SolveError::TooLarge(
                "SCC solver supports at most 64 leader states and 64 symbols".into(),
            ));
        }
        let normalized = normalize_leader(inst);
        let contributor = normalized.solving_contributor();
        Ok(SccSearch {
            inst: normalized,
            contributor,
            max_nodes,
            mode,
            nodes: 0,
            count: 0,
            letters: Vec::new(),
            dbar_at: Vec::new(),
            dbar: SmallSet::EMPTY,
            pairs_used: 0,
            segment: SmallSet::EMPTY,
            final_memo: HashMap::new(),
            found: Vec::new(),
        })
    }

    fn explore_r(&mut self, r: &mut Vec<SymbolId>) -> Result<bool, SolveError> {
        let (graph, depth) = scc_depth(&self.inst.leader, r);
        let ctx = RContext {
            r: r.clone(),
            graph,
            depth,
        };
        debug_assert!(self.letters.is_empty());
        self.dbar = SmallSet::EMPTY;
        self.pairs_used = 0;
        self.segment = SmallSet::EMPTY;
        if self.expect_scc(&ctx, 0, None)? {
            return Ok(true);
        }
        for a in 0..self.inst.domain.len() {
            if r.contains(&a) {
                continue;
            }
            r.push(a);
            let hit = self.explore_r(r)?;
            r.pop();
            if hit {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn final_ok(&mut self, ctx: &RContext, id: usize) -> bool {
        let full: SmallSet = ctx.r.iter().copied().collect();
        let inst = &self.inst;
        let reachers = self
            .final_memo
            .entry(full.0)
            .or_insert_with(|| final_reachers(inst, full));
        ctx.graph.levels[ctx.r.len()].members[id]
            .iter()
            .any(|&q| reachers.contains(q))
    }

    fn connect(&self, ctx: &RContext, pending: Option<Pending>, level: usize, id: usize) -> bool {
        let members = &ctx.graph.levels[level].members[id];
        match pending {
            None => members.contains(&self.inst.leader.initial()),
            Some(p) => scc_connect(
                &self.inst.leader,
                &ctx.graph.levels[p.level].members[p.id],
                members,
                p.op,
                p.snap,
            ),
        }
    }

    fn expect_scc(
        &mut self,
        ctx: &RContext,
        level: usize,
        pending: Option<Pending>,
    ) -> Result<bool, SolveError> {
        self.nodes += 1;
        if self.nodes > self.max_nodes {
            return Err(SolveError::BudgetExceeded(self.nodes));
        }
        let ell = ctx.r.len();
        let scc_count = ctx.graph.levels[level].members.len();
        // (a) close with the final SCC, only at the last level
        if level == ell {
            for id in 0..scc_count {
                if self.mode == Mode::CountShapes {
                    self.count += 1;
                    continue;
                }
                if !self.connect(ctx, pending, level, id) {
                    continue;
                }
                if !self.final_ok(ctx, id) {
                    continue;
                }
                let mut letters = self.letters.clone();
                letters.push(SccLetter::Scc { level, id });
                self.found.push(SccWitnessCandidate { letters });
                return Ok(true);
            }
        }
        // (b) extend the current segment with a pair; Σ k_i ≤ d(r) - 1
        if ctx.depth >= 1 && self.pairs_used < ctx.depth - 1 {
            for id in 0..scc_count {
                let prunable = self.mode != Mode::CountShapes;
                if prunable && (self.segment.contains(id) || !self.connect(ctx, pending, level, id))
                {
                    continue;
                }
                let members = ctx.graph.levels[level].members[id].clone();
                for choice in 0..=self.inst.domain.len() {
                    let op = if choice < self.inst.domain.len() {
                        let a = choice;
                        let feasible = self.mode == Mode::CountShapes
                            || self.inst.leader.transitions().iter().any(|tr| {
                                members.contains(&tr.from) && tr.op == MemoryOp::Write(a)
                            });
                        if !feasible {
                            continue;
                        }
                        SccLetter::Symbol(a)
                    } else {
                        let dbar = self.dbar;
                        let feasible = self.mode == Mode::CountShapes
                            || self.inst.leader.transitions().iter().any(|tr| {
                                members.contains(&tr.from)
                                    && match tr.op {
                                        MemoryOp::Epsilon => true,
                                        MemoryOp::Read(b) => dbar.contains(b),
                                        MemoryOp::Write(_) => false,
                                    }
                            });
                        if !feasible {
                            continue;
                        }
                        SccLetter::Bottom
                    };
                    self.letters.push(SccLetter::Scc { level, id });
                    self.dbar_at.push(self.dbar);
                    self.letters.push(op);
                    self.dbar_at.push(self.dbar);
                    self.pairs_used += 1;
                    let saved_segment = self.segment;
                    self.segment = self.segment.with(id);
                    let next = Pending {
                        level,
                        id,
                        op,
                        snap: self.dbar,
                    };
                    let hit = self.expect_scc(ctx, level, Some(next))?;
                    self.segment = saved_segment;
                    self.pairs_used -= 1;
                    self.letters.pop();
                    self.dbar_at.pop();
                    self.letters.pop();
                    self.dbar_at.pop();
                    if hit {
                        return Ok(true);
                    }
                }
            }
        }
        // (c) emit the next bar of r
        if level < ell {
            let a = ctx.r[level];
            let ok = self.mode == Mode::CountShapes
                || embedding_ok(
                    &self.contributor,
                    &ctx.graph,
                    &self.letters,
                    &self.dbar_at,
                    self.inst.init_symbol,
                    a,
                );
            if ok {
                self.letters.push(SccLetter::FirstWrite(a));
                self.dbar = self.dbar.with(a);
                self.dbar_at.push(self.dbar);
                let saved_segment = self.segment;
                self.segment = SmallSet::EMPTY;
                let hit = self.expect_scc(ctx, level + 1, pending)?;
                self.segment = saved_segment;
                self.letters.pop();
                self.dbar_at.pop();
                self.dbar = self.dbar.without(a);
                if hit {
                    return Ok(true);
                }
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
    fn depth_of_chain() {
        let inst = lcr(
            r#"{"domain":["a0","a"],"init":"a0","kind":"lcr",
                "leader":{"init":"q0","trans":[["q0","!a","q1"],["q1","!a","q2"]]},
                "contributors":[{"init":"p0","trans":[]}],"unsafe":[]}"#,
        );
        let (graph, d) = scc_depth(&inst.leader, &[]);
        assert_eq!(graph.levels[0].members.len(), 3);
        assert_eq!(d, 3);
    }

    #[test]
    fn depth_of_strongly_connected() {
        let inst = lcr(
            r#"{"domain":["a0","a"],"init":"a0","kind":"lcr",
                "leader":{"init":"q0","trans":[["q0","!a","q1"],["q1","eps","q0"]]},
                "contributors":[{"init":"p0","trans":[]}],"unsafe":[]}"#,
        );
        let (graph, d) = scc_depth(&inst.leader, &[]);
        assert_eq!(graph.levels[0].members.len(), 1);
        assert_eq!(d, 1);
    }

    #[test]
    fn restriction_removes_reads() {
        let inst = lcr(
            r#"{"domain":["a0","a","b"],"init":"a0","kind":"lcr",
                "leader":{"init":"q0","trans":[["q0","?a","q1"],["q0","?b","q1"],["q0","!a","q1"]]},
                "contributors":[{"init":"p0","trans":[]}],"unsafe":[]}"#,
        );
        let a = inst.symbol_index("a").unwrap();
        let restricted = restricted_leader(&inst.leader, &[a], 1);
        assert_eq!(restricted.transitions().len(), 2);
        let restricted0 = restricted_leader(&inst.leader, &[a], 0);
        assert_eq!(restricted0.transitions().len(), 1);
    }

    #[test]
    fn single_state_leader_unsafe() {
        let inst = lcr(
            r#"{"domain":["a0"],"init":"a0","kind":"lcr",
                "leader":{"init":"q0","trans":[]},
                "contributors":[{"init":"p0","trans":[]}],"unsafe":["q0"]}"#,
        );
        assert!(solve_lcr_scc(&inst).unwrap().reachable);
    }

    #[test]
    fn needs_contributor_write() {
        let inst = lcr(
            r#"{"domain":["a0","a"],"init":"a0","kind":"lcr",
                "leader":{"init":"q0","trans":[["q0","?a","q1"]]},
                "contributors":[{"init":"p0","trans":[["p0","?a0","p1"],["p1","!a","p1"]]}],
                "unsafe":["q1"]}"#,
        );
        assert!(solve_lcr_scc(&inst).unwrap().reachable);
        let inert = lcr(
            r#"{"domain":["a0","a"],"init":"a0","kind":"lcr",
                "leader":{"init":"q0","trans":[["q0","?a","q1"]]},
                "contributors":[{"init":"p0","trans":[]}],"unsafe":["q1"]}"#,
        );
        assert!(!solve_lcr_scc(&inert).unwrap().reachable);
    }

    #[test]
    fn disconnected_adjacent_sccs_rejected() {
        let inst = lcr(
            r#"{"domain":["a0","a"],"init":"a0","kind":"lcr",
                "leader":{"init":"q0","trans":[["q0","!a","q1"],["q2","!a","q3"]]},
                "contributors":[{"init":"p0","trans":[]}],"unsafe":["q3"]}"#,
        );
        // scc ids at level 0 for the chain q0,q1,q2,q3 (all singletons)
        let (graph, _) = scc_depth(&normalize_leader(&inst).leader, &[]);
        let a = inst.symbol_index("a").unwrap();
        let id_of = |q: usize| graph.levels[0].scc_of[q];
        let w = SccWitnessCandidate {
            letters: vec![
                SccLetter::Scc { level: 0, id: id_of(0) },
                SccLetter::Symbol(a),
                SccLetter::Scc { level: 0, id: id_of(2) },
            ],
        };
        assert_eq!(check_scc_validity(&w, &inst), Err(Invalid::Requirement(1)));
    }
}
