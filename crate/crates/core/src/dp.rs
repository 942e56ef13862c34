//! Subset dynamic program for LCR. Nodes of the saturation graph are
//! (leader-state, memory, set-of-contributor-states); the set only ever
//! grows, so reachability decomposes into slices that add one contributor
//! state at a time. The table T maps each set S to the (leader, memory)
//! pairs reachable together with S, filled bottom-up by
//! T[S] = ∪_{p ∈ S} R(S ∖ {p}, S). `explicit_graph_reach` materializes the
//! whole graph instead and serves as the module's oracle.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::bits::SmallSet;
use crate::model::{
    Certificate, LcrInstance, MemoryOp, SaturationStep, SolveError, StateId, SymbolId, Thread,
    Verdict,
};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct SaturationNode {
    pub leader: StateId,
    pub memory: SymbolId,
    pub set: SmallSet,
}

pub type PairSet = BTreeSet<(StateId, SymbolId)>;

/// Two adjacent levels of the saturation graph: contributor-sets W (level 0)
/// and S = W ∪ {p} (level 1), with the saturating edges in between. Nodes are
/// indexed level·L·D + q·D + a.
pub struct Slice {
    pub w: SmallSet,
    pub added: StateId,
    num_states: usize,
    num_symbols: usize,
    succ: Vec<Vec<u32>>,
}

impl Slice {
    fn node(&self, level: usize, q: StateId, a: SymbolId) -> usize {
        (level * self.num_states + q) * self.num_symbols + a
    }

    pub fn successors(&self, level: usize, q: StateId, a: SymbolId) -> Vec<(usize, StateId, SymbolId)> {
        self.succ[self.node(level, q, a)]
            .iter()
            .map(|&n| {
                let n = n as usize;
                let a = n % self.num_symbols;
                let q = (n / self.num_symbols) % self.num_states;
                (n / (self.num_symbols * self.num_states), q, a)
            })
            .collect()
    }
}

/// Build the slice between W and W ∪ {p} for the merged contributor.
pub fn build_slice(inst: &LcrInstance, w: SmallSet, p: StateId) -> Slice {
    build_slice_merged(&inst.leader, &inst.solving_contributor(), inst.domain.len(), w, p)
}

fn build_slice_merged(
    leader: &Thread,
    contributor: &Thread,
    num_symbols: usize,
    w: SmallSet,
    p: StateId,
) -> Slice {
    debug_assert!(!w.contains(p));
    let num_states = leader.len();
    let node = |level: usize, q: StateId, a: SymbolId| (level * num_states + q) * num_symbols + a;
    let mut succ: Vec<Vec<u32>> = vec![Vec::new(); 2 * num_states * num_symbols];
    let s = w.with(p);
    for (level, set) in [(0usize, w), (1, s)] {
        // Leader moves keep the contributor-set fixed.
        for tr in leader.transitions() {
            match tr.op {
                MemoryOp::Write(a) => {
                    for b in 0..num_symbols {
                        let from = node(level, tr.from, b);
                        succ[from].push(node(level, tr.to, a) as u32);
                    }
                }
                MemoryOp::Read(a) => {
                    let from = node(level, tr.from, a);
                    succ[from].push(node(level, tr.to, a) as u32);
                }
                MemoryOp::Epsilon => {
                    for b in 0..num_symbols {
                        let from = node(level, tr.from, b);
                        succ[from].push(node(level, tr.to, b) as u32);
                    }
                }
            }
        }
        // Contributor moves within the level: only writes matter (a state
        // already in the set stays in it, so reads and ε induce self-loops).
        for tr in contributor.transitions() {
            if set.contains(tr.from) && set.contains(tr.to) {
                if let MemoryOp::Write(a) = tr.op {
                    for q in 0..num_states {
                        for b in 0..num_symbols {
                            let from = node(level, q, b);
                            succ[from].push(node(level, q, a) as u32);
                        }
                    }
                }
            }
        }
    }
    // Saturating edges: a transition r →op p with r ∈ W brings p into the set.
    for tr in contributor.transitions() {
        if tr.to != p || !w.contains(tr.from) {
            continue;
        }
        match tr.op {
            MemoryOp::Write(a) => {
                for q in 0..num_states {
                    for b in 0..num_symbols {
                        let from = node(0, q, b);
                        succ[from].push(node(1, q, a) as u32);
                    }
                }
            }
            MemoryOp::Read(a) => {
                for q in 0..num_states {
                    let from = node(0, q, a);
                    succ[from].push(node(1, q, a) as u32);
                }
            }
            MemoryOp::Epsilon => {
                for q in 0..num_states {
                    for b in 0..num_symbols {
                        let from = node(0, q, b);
                        succ[from].push(node(1, q, b) as u32);
                    }
                }
            }
        }
    }
    for list in &mut succ {
        list.sort_unstable();
        list.dedup();
    }
    Slice {
        w,
        added: p,
        num_states,
        num_symbols,
        succ,
    }
}

/// Forward fixed point from the level-0 seed pairs, projected to level 1.
pub fn reach_in_slice(seed: &PairSet, slice: &Slice) -> PairSet {
    reach_in_slice_traced(seed, slice).0
}

/// As `reach_in_slice`, but also reports for every reached level-1 pair one
/// seed pair it originates from (for certificate back-pointers), plus the
/// number of slice nodes visited.
pub fn reach_in_slice_traced(
    seed: &PairSet,
    slice: &Slice,
) -> (PairSet, HashMap<(StateId, SymbolId), (StateId, SymbolId)>, u64) {
    let total = 2 * slice.num_states * slice.num_symbols;
    let mut origin: Vec<Option<(StateId, SymbolId)>> = vec![None; total];
    let mut queue = VecDeque::new();
    for &(q, a) in seed {
        let n = slice.node(0, q, a);
        if origin[n].is_none() {
            origin[n] = Some((q, a));
            queue.push_back(n);
        }
    }
    let mut visited = 0u64;
    while let Some(n) = queue.pop_front() {
        visited += 1;
        for &m in &slice.succ[n] {
            let m = m as usize;
            if origin[m].is_none() {
                origin[m] = origin[n];
                queue.push_back(m);
            }
        }
    }
    let mut out = PairSet::new();
    let mut origins = HashMap::new();
    for q in 0..slice.num_states {
        for a in 0..slice.num_symbols {
            if let Some(src) = origin[slice.node(1, q, a)] {
                out.insert((q, a));
                origins.insert((q, a), src);
            }
        }
    }
    (out, origins, visited)
}

/// The table T: per contributor-set mask, the reachable (leader, memory)
/// pairs. Only masks containing the contributor's initial state can be
/// non-empty. Carries the name tables needed to print it.
pub struct ReachTable {
    pub entries: HashMap<u64, PairSet>,
    pub contributor_names: Vec<String>,
    pub leader_names: Vec<String>,
    pub domain: Vec<String>,
}

impl ReachTable {
    /// Lines "S={p0,p1} : (q1,a) (q1,c)", non-empty entries only, ordered by
    /// (cardinality, mask).
    pub fn to_lines(&self) -> Vec<String> {
        let mut masks: Vec<u64> = self
            .entries
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(&m, _)| m)
            .collect();
        masks.sort_by_key(|&m| (m.count_ones(), m));
        masks
            .into_iter()
            .map(|m| {
                let states: Vec<&str> = SmallSet(m)
                    .iter()
                    .map(|i| self.contributor_names[i].as_str())
                    .collect();
                let pairs: Vec<String> = self.entries[&m]
                    .iter()
                    .map(|&(q, a)| format!("({},{})", self.leader_names[q], self.domain[a]))
                    .collect();
                format!("S={{{}}} : {}", states.join(","), pairs.join(" "))
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DpConfig {
    /// Hard cap on merged contributor states; the table has 2^C entries.
    pub max_contributor_states: usize,
    /// Record back-pointers and emit a saturation certificate.
    pub certificates: bool,
}

impl Default for DpConfig {
    fn default() -> DpConfig {
        DpConfig {
            max_contributor_states: 22,
            certificates: false,
        }
    }
}

pub fn solve_lcr_dp(inst: &LcrInstance) -> Result<Verdict, SolveError> {
    solve_lcr_dp_with(inst, &DpConfig::default())
}

pub fn solve_lcr_dp_with(inst: &LcrInstance, config: &DpConfig) -> Result<Verdict, SolveError> {
    let (verdict, _) = dp_run(inst, config, false)?;
    Ok(verdict)
}

/// Fill the whole table (no early exit) for `--dump-table`.
pub fn compute_table(inst: &LcrInstance) -> Result<ReachTable, SolveError> {
    let (_, table) = dp_run(inst, &DpConfig::default(), true)?;
    Ok(table.expect("table requested"))
}

fn dp_run(
    inst: &LcrInstance,
    config: &DpConfig,
    keep_table: bool,
) -> Result<(Verdict, Option<ReachTable>), SolveError> {
    let contributor = inst.solving_contributor();
    let c = contributor.len();
    if c > config.max_contributor_states {
        return Err(SolveError::TooLarge(format!(
            "merged contributor has {c} states (cap {})",
            config.max_contributor_states
        )));
    }
    let leader = &inst.leader;
    let num_symbols = inst.domain.len();
    let q0c = contributor.initial();
    let mut nodes = 0u64;

    // Back-pointers: (S, pair) -> (p added, seed pair in T[S∖{p}]).
    let mut back: HashMap<(u64, StateId, SymbolId), (StateId, StateId, SymbolId)> = HashMap::new();
    let mut table: HashMap<u64, PairSet> = HashMap::new();

    // Base case: fixed point on the single level {q⁰_C} from v⁰. A slice with
    // an unreachable fresh "added" state restricted to level 0 does the job:
    // seed v⁰ and close under level-0 edges only.
    let base_set = SmallSet::singleton(q0c);
    let mut base = PairSet::new();
    {
        let slice = build_slice_merged(leader, &contributor, num_symbols, base_set, fresh_state(&contributor));
        let mut seen = vec![false; leader.len() * num_symbols];
        let mut queue = VecDeque::new();
        let v0 = (leader.initial(), inst.init_symbol);
        seen[v0.0 * num_symbols + v0.1] = true;
        queue.push_back(v0);
        while let Some((q, a)) = queue.pop_front() {
            nodes += 1;
            base.insert((q, a));
            for (lvl, q2, a2) in slice.successors(0, q, a) {
                debug_assert_eq!(lvl, 0);
                if !seen[q2 * num_symbols + a2] {
                    seen[q2 * num_symbols + a2] = true;
                    queue.push_back((q2, a2));
                }
            }
        }
    }
    let accepting =
        |pairs: &PairSet| pairs.iter().find(|&&(q, _)| inst.unsafe_states.contains(&q)).copied();
    let mut hit: Option<(u64, StateId, SymbolId)> = None;
    if let Some((q, a)) = accepting(&base) {
        hit = Some((base_set.0, q, a));
    }
    table.insert(base_set.0, base);

    if hit.is_none() || keep_table {
        // Forward propagation over non-empty masks in ascending cardinality:
        // when W is popped its entry is final, so R(W, W ∪ {p}) can be folded
        // into every successor mask. Empty entries are never stored, which
        // keeps unreachable instances far below the 2^C worst case.
        let mut pending: BTreeSet<(u32, u64)> = BTreeSet::new();
        pending.insert((1, base_set.0));
        'outer: while let Some(&(card, mask)) = pending.iter().next() {
            pending.remove(&(card, mask));
            let w = SmallSet(mask);
            let seed = table[&mask].clone();
            for p in 0..c {
                if w.contains(p) {
                    continue;
                }
                let slice = build_slice_merged(leader, &contributor, num_symbols, w, p);
                let (reached, origins, visited) = reach_in_slice_traced(&seed, &slice);
                nodes += visited;
                if reached.is_empty() {
                    continue;
                }
                let smask = mask | (1 << p);
                if !table.contains_key(&smask) {
                    table.insert(smask, PairSet::new());
                    pending.insert((card + 1, smask));
                }
                let mut found = None;
                let acc = table.get_mut(&smask).expect("entry just ensured");
                for (q, a) in reached {
                    if acc.insert((q, a)) {
                        if config.certificates {
                            let (q0, a0) = origins[&(q, a)];
                            back.insert((smask, q, a), (p, q0, a0));
                        }
                        if hit.is_none() && inst.unsafe_states.contains(&q) {
                            found = Some((smask, q, a));
                        }
                    }
                }
                if let Some(f) = found {
                    if hit.is_none() {
                        hit = Some(f);
                        if !keep_table {
                            break 'outer;
                        }
                    }
                }
            }
        }
    }

    let certificate = match (hit, config.certificates) {
        (Some((mask, q, a)), true) => {
            let mut steps = Vec::new();
            let (mut mask, mut q, mut a) = (mask, q, a);
            while let Some(&(p, q0, a0)) = back.get(&(mask, q, a)) {
                steps.push(SaturationStep {
                    added: p,
                    leader: q,
                    memory: a,
                });
                mask &= !(1u64 << p);
                q = q0;
                a = a0;
            }
            steps.reverse();
            Some(Certificate::Saturation(steps))
        }
        _ => None,
    };
    let verdict = Verdict::new(hit.is_some(), certificate, nodes);
    let out_table = keep_table.then(|| ReachTable {
        entries: table,
        contributor_names: contributor.state_names().to_vec(),
        leader_names: leader.state_names().to_vec(),
        domain: inst.domain.clone(),
    });
    Ok((verdict, out_table))
}

/// An index no contributor transition targets as a saturating edge; used to
/// build a single-level slice for the base case.
fn fresh_state(contributor: &Thread) -> StateId {
    contributor.len()
}

// ---------------------------------------------------------------------------
// Explicit whole-graph oracle
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct ExplicitConfig {
    pub max_contributor_states: usize,
}

impl Default for ExplicitConfig {
    fn default() -> ExplicitConfig {
        ExplicitConfig {
            max_contributor_states: 12,
        }
    }
}

pub fn explicit_graph_reach(inst: &LcrInstance) -> Result<Verdict, SolveError> {
    explicit_graph_reach_with(inst, &ExplicitConfig::default())
}

pub fn explicit_graph_reach_with(
    inst: &LcrInstance,
    config: &ExplicitConfig,
) -> Result<Verdict, SolveError> {
    let (verdict, _) = explicit_run(inst, config, false)?;
    Ok(verdict)
}

/// Full-graph reachability grouped by contributor-set, i.e. the ground truth
/// the table must match entry by entry.
pub fn explicit_reach_table(inst: &LcrInstance) -> Result<ReachTable, SolveError> {
    let config = ExplicitConfig::default();
    let (_, table) = explicit_run(inst, &config, true)?;
    Ok(table.expect("table requested"))
}

fn explicit_run(
    inst: &LcrInstance,
    config: &ExplicitConfig,
    keep_table: bool,
) -> Result<(Verdict, Option<ReachTable>), SolveError> {
    let contributor = inst.solving_contributor();
    let c = contributor.len();
    if c > config.max_contributor_states {
        return Err(SolveError::TooLarge(format!(
            "merged contributor has {c} states (cap {})",
            config.max_contributor_states
        )));
    }
    let leader = &inst.leader;
    let num_states = leader.len();
    let num_symbols = inst.domain.len();
    let total = (1usize << c) * num_states * num_symbols;
    let node =
        |mask: usize, q: StateId, a: SymbolId| (mask * num_states + q) * num_symbols + a;
    let mut visited = vec![false; total];
    let start = node(1 << contributor.initial(), leader.initial(), inst.init_symbol);
    visited[start] = true;
    let mut queue = VecDeque::new();
    queue.push_back(start);
    let mut reachable = inst.unsafe_states.contains(&leader.initial());
    let mut nodes = 0u64;
    while let Some(n) = queue.pop_front() {
        nodes += 1;
        let a = n % num_symbols;
        let q = (n / num_symbols) % num_states;
        let mask = n / (num_symbols * num_states);
        let mut push = |m: usize, visited: &mut Vec<bool>, queue: &mut VecDeque<usize>| {
            if !visited[m] {
                visited[m] = true;
                let q2 = (m / num_symbols) % num_states;
                if inst.unsafe_states.contains(&q2) {
                    reachable = true;
                }
                queue.push_back(m);
            }
        };
        for tr in leader.outgoing(q) {
            match tr.op {
                MemoryOp::Write(b) => push(node(mask, tr.to, b), &mut visited, &mut queue),
                MemoryOp::Read(b) if b == a => push(node(mask, tr.to, a), &mut visited, &mut queue),
                MemoryOp::Epsilon => push(node(mask, tr.to, a), &mut visited, &mut queue),
                MemoryOp::Read(_) => {}
            }
        }
        for tr in contributor.transitions() {
            if mask >> tr.from & 1 == 0 {
                continue;
            }
            let mask2 = mask | 1 << tr.to;
            match tr.op {
                MemoryOp::Write(b) => push(node(mask2, q, b), &mut visited, &mut queue),
                MemoryOp::Read(b) if b == a => push(node(mask2, q, a), &mut visited, &mut queue),
                MemoryOp::Epsilon => push(node(mask2, q, a), &mut visited, &mut queue),
                MemoryOp::Read(_) => {}
            }
        }
        if reachable && !keep_table {
            break;
        }
    }
    let verdict = Verdict::new(reachable, None, nodes);
    let out_table = keep_table.then(|| {
        let mut entries: HashMap<u64, PairSet> = HashMap::new();
        for mask in 0..(1usize << c) {
            let mut pairs = PairSet::new();
            for q in 0..num_states {
                for a in 0..num_symbols {
                    if visited[node(mask, q, a)] {
                        pairs.insert((q, a));
                    }
                }
            }
            if !pairs.is_empty() {
                entries.insert(mask as u64, pairs);
            }
        }
        ReachTable {
            entries,
            contributor_names: contributor.state_names().to_vec(),
            leader_names: leader.state_names().to_vec(),
            domain: inst.domain.clone(),
        }
    });
    Ok((verdict, out_table))
}

/// Is the saturation-graph node (q, a, S) reachable from v⁰?
pub fn explicit_node_reachable(inst: &LcrInstance, target: SaturationNode) -> Result<bool, SolveError> {
    let table = explicit_reach_table(inst)?;
    Ok(table
        .entries
        .get(&target.set.0)
        .is_some_and(|pairs| pairs.contains(&(target.leader, target.memory))))
}
