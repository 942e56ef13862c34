//! Independent brute-force deciders. These deliberately share no code with
//! the solvers they validate: explicit search over thread copies for LCR, and
//! exhaustive enumeration for 3-SAT, set cover and the two clique variants.

use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::Deserialize;
use thiserror::Error;

use crate::model::{LcrInstance, MemoryOp, StateId, Thread};

#[derive(Error, Debug)]
pub enum OracleError {
    #[error("oracle size cap exceeded: {0}")]
    CapExceeded(String),
    #[error("parse error: {0}")]
    Parse(String),
}

// ---------------------------------------------------------------------------
// Source problems
// ---------------------------------------------------------------------------

/// A literal: variable index in [1..n], with polarity.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Lit {
    pub var: usize,
    pub positive: bool,
}

/// CNF formula with at most three literals per clause.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<Vec<Lit>>,
}

impl CnfFormula {
    pub fn validate(&self) -> Result<(), OracleError> {
        for clause in &self.clauses {
            if clause.is_empty() || clause.len() > 3 {
                return Err(OracleError::Parse(
                    "clauses must have between 1 and 3 literals".into(),
                ));
            }
            for lit in clause {
                if lit.var == 0 || lit.var > self.num_vars {
                    return Err(OracleError::Parse(format!(
                        "literal references variable {} outside [1..{}]",
                        lit.var, self.num_vars
                    )));
                }
            }
        }
        Ok(())
    }

    /// Parse the DIMACS CNF format ("p cnf <vars> <clauses>", clauses are
    /// 0-terminated signed integers, "c" lines are comments).
    pub fn from_dimacs(text: &str) -> Result<CnfFormula, OracleError> {
        let mut num_vars = None;
        let mut clauses = Vec::new();
        let mut current = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 3 || parts[0] != "cnf" {
                    return Err(OracleError::Parse(format!("bad problem line: {line}")));
                }
                num_vars = Some(
                    parts[1]
                        .parse::<usize>()
                        .map_err(|e| OracleError::Parse(e.to_string()))?,
                );
                continue;
            }
            for tok in line.split_whitespace() {
                let v: i64 = tok
                    .parse()
                    .map_err(|_| OracleError::Parse(format!("bad literal `{tok}`")))?;
                if v == 0 {
                    clauses.push(std::mem::take(&mut current));
                } else {
                    current.push(Lit {
                        var: v.unsigned_abs() as usize,
                        positive: v > 0,
                    });
                }
            }
        }
        if !current.is_empty() {
            clauses.push(current);
        }
        let num_vars =
            num_vars.ok_or_else(|| OracleError::Parse("missing `p cnf` line".into()))?;
        let f = CnfFormula { num_vars, clauses };
        f.validate()?;
        Ok(f)
    }
}

/// Exhaustive SAT check, n <= 20.
pub fn sat_brute(phi: &CnfFormula) -> Result<bool, OracleError> {
    if phi.num_vars > 20 {
        return Err(OracleError::CapExceeded(format!(
            "{} variables (max 20)",
            phi.num_vars
        )));
    }
    phi.validate()?;
    for assignment in 0u32..(1 << phi.num_vars) {
        let value = |lit: &Lit| (assignment >> (lit.var - 1)) & 1 == u32::from(lit.positive);
        if phi.clauses.iter().all(|c| c.iter().any(value)) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Set cover: universe [1..n], family of subsets, budget r.
#[derive(Clone, PartialEq, Eq, Debug, Deserialize)]
pub struct SetCoverInstance {
    pub universe: usize,
    pub sets: Vec<BTreeSet<usize>>,
    pub budget: usize,
}

impl SetCoverInstance {
    pub fn validate(&self) -> Result<(), OracleError> {
        for set in &self.sets {
            for &u in set {
                if u == 0 || u > self.universe {
                    return Err(OracleError::Parse(format!(
                        "element {u} outside universe [1..{}]",
                        self.universe
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<SetCoverInstance, OracleError> {
        let inst: SetCoverInstance =
            serde_json::from_str(text).map_err(|e| OracleError::Parse(e.to_string()))?;
        inst.validate()?;
        Ok(inst)
    }
}

/// Exhaustive cover check over subsets of the family of size <= budget.
pub fn set_cover_brute(inst: &SetCoverInstance) -> Result<bool, OracleError> {
    if inst.universe > 12 {
        return Err(OracleError::CapExceeded(format!(
            "universe size {} (max 12)",
            inst.universe
        )));
    }
    if inst.sets.len() > 20 {
        return Err(OracleError::CapExceeded(format!(
            "family size {} (max 20)",
            inst.sets.len()
        )));
    }
    inst.validate()?;
    let full: BTreeSet<usize> = (1..=inst.universe).collect();
    for mask in 0u32..(1 << inst.sets.len()) {
        if mask.count_ones() as usize > inst.budget {
            continue;
        }
        let mut union = BTreeSet::new();
        for (i, set) in inst.sets.iter().enumerate() {
            if mask & (1 << i) != 0 {
                union.extend(set.iter().copied());
            }
        }
        if union == full {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Graph on the k x k grid of vertices (row, column), both 1-based.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GridGraph {
    pub k: usize,
    adj: Vec<bool>, // (k*k) x (k*k), symmetric, irreflexive
}

impl GridGraph {
    pub fn new(k: usize) -> GridGraph {
        GridGraph {
            k,
            adj: vec![false; k * k * k * k],
        }
    }

    pub fn vertex(&self, row: usize, col: usize) -> usize {
        debug_assert!(row >= 1 && row <= self.k && col >= 1 && col <= self.k);
        (row - 1) * self.k + (col - 1)
    }

    pub fn add_edge(&mut self, a: (usize, usize), b: (usize, usize)) {
        let (u, v) = (self.vertex(a.0, a.1), self.vertex(b.0, b.1));
        if u == v {
            return;
        }
        let n = self.k * self.k;
        self.adj[u * n + v] = true;
        self.adj[v * n + u] = true;
    }

    pub fn adjacent(&self, a: (usize, usize), b: (usize, usize)) -> bool {
        let (u, v) = (self.vertex(a.0, a.1), self.vertex(b.0, b.1));
        self.adj[u * self.k * self.k + v]
    }

    pub fn from_json(text: &str) -> Result<GridGraph, OracleError> {
        #[derive(Deserialize)]
        struct Raw {
            k: usize,
            edges: Vec<[[usize; 2]; 2]>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| OracleError::Parse(e.to_string()))?;
        if raw.k == 0 {
            return Err(OracleError::Parse("k must be positive".into()));
        }
        let mut g = GridGraph::new(raw.k);
        for e in raw.edges {
            let ok = |(r, c): (usize, usize)| r >= 1 && r <= raw.k && c >= 1 && c <= raw.k;
            let (a, b) = ((e[0][0], e[0][1]), (e[1][0], e[1][1]));
            if !ok(a) || !ok(b) {
                return Err(OracleError::Parse("edge endpoint outside grid".into()));
            }
            g.add_edge(a, b);
        }
        Ok(g)
    }
}

/// Does the grid graph contain a clique with exactly one vertex per row?
pub fn kxk_clique_brute(g: &GridGraph) -> Result<bool, OracleError> {
    if g.k > 4 {
        return Err(OracleError::CapExceeded(format!("k = {} (max 4)", g.k)));
    }
    let k = g.k;
    let mut choice = vec![1usize; k];
    loop {
        let mut ok = true;
        'check: for i in 1..=k {
            for j in (i + 1)..=k {
                if !g.adjacent((i, choice[i - 1]), (j, choice[j - 1])) {
                    ok = false;
                    break 'check;
                }
            }
        }
        if ok {
            return Ok(true);
        }
        // Next one-vertex-per-row selection.
        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(false);
            }
            if choice[pos] < k {
                choice[pos] += 1;
                break;
            }
            choice[pos] = 1;
            pos += 1;
        }
    }
}

/// Plain undirected graph on vertices [1..n].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Graph {
    pub n: usize,
    pub edges: BTreeSet<(usize, usize)>, // stored with u < v
}

impl Graph {
    pub fn new(n: usize) -> Graph {
        Graph {
            n,
            edges: BTreeSet::new(),
        }
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u != v {
            self.edges.insert((u.min(v), u.max(v)));
        }
    }

    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn from_json(text: &str) -> Result<Graph, OracleError> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            edges: Vec<[usize; 2]>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| OracleError::Parse(e.to_string()))?;
        let mut g = Graph::new(raw.n);
        for [u, v] in raw.edges {
            if u == 0 || u > raw.n || v == 0 || v > raw.n {
                return Err(OracleError::Parse("edge endpoint out of range".into()));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }
}

/// Exhaustive k-clique check on a general graph (small inputs only).
pub fn clique_brute(g: &Graph, k: usize) -> Result<bool, OracleError> {
    if g.n > 16 {
        return Err(OracleError::CapExceeded(format!("n = {} (max 16)", g.n)));
    }
    if k == 0 {
        return Ok(true);
    }
    fn extend(g: &Graph, chosen: &mut Vec<usize>, next: usize, k: usize) -> bool {
        if chosen.len() == k {
            return true;
        }
        for v in next..=g.n {
            if chosen.iter().all(|&u| g.adjacent(u, v)) {
                chosen.push(v);
                if extend(g, chosen, v + 1, k) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    Ok(extend(g, &mut Vec::new(), 1, k))
}

// ---------------------------------------------------------------------------
// Explicit A^t search
// ---------------------------------------------------------------------------

/// Explicit BFS over the configuration space with exactly `t` contributor
/// copies. Multi-template instances are handled directly by distributing the
/// `t` copies over the templates in every possible way. Copies of one
/// template are interchangeable, so their control states are kept sorted
/// (counter abstraction).
pub fn lcr_explicit_bfs(inst: &LcrInstance, t: usize) -> Result<bool, OracleError> {
    lcr_explicit_bfs_capped(inst, t, 2_000_000)
}

pub fn lcr_explicit_bfs_capped(
    inst: &LcrInstance,
    t: usize,
    max_nodes: u64,
) -> Result<bool, OracleError> {
    let k = inst.contributors.len();
    let mut nodes = 0u64;
    for counts in compositions(t, k) {
        if bfs_with_counts(inst, &counts, &mut nodes, max_nodes)? {
            return Ok(true);
        }
    }
    Ok(false)
}

fn compositions(t: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(t: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 1 {
            let mut full = prefix.clone();
            full.push(t);
            out.push(full);
            return;
        }
        for x in 0..=t {
            prefix.push(x);
            rec(t - x, k - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(t, k, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct ExplicitConfig {
    leader: StateId,
    groups: Vec<Vec<StateId>>, // one sorted vector of copy states per template
    memory: usize,
}

fn bfs_with_counts(
    inst: &LcrInstance,
    counts: &[usize],
    nodes: &mut u64,
    max_nodes: u64,
) -> Result<bool, OracleError> {
    let start = ExplicitConfig {
        leader: inst.leader.initial(),
        groups: inst
            .contributors
            .iter()
            .zip(counts)
            .map(|(c, &n)| vec![c.initial(); n])
            .collect(),
        memory: inst.init_symbol,
    };
    if inst.unsafe_states.contains(&start.leader) {
        return Ok(true);
    }
    let mut visited = HashSet::new();
    visited.insert(start.clone());
    let mut queue = VecDeque::new();
    queue.push_back(start);
    while let Some(c) = queue.pop_front() {
        *nodes += 1;
        if *nodes > max_nodes {
            return Err(OracleError::CapExceeded(format!(
                "explicit search explored more than {max_nodes} configurations"
            )));
        }
        let mut moves: Vec<ExplicitConfig> = Vec::new();
        let step = |thread: &Thread, q: StateId, memory: usize| {
            thread
                .outgoing(q)
                .iter()
                .filter_map(move |tr| {
                    let new_mem = match tr.op {
                        MemoryOp::Write(b) => b,
                        MemoryOp::Read(a) => {
                            if a != memory {
                                return None;
                            }
                            memory
                        }
                        MemoryOp::Epsilon => memory,
                    };
                    Some((tr.to, new_mem))
                })
                .collect::<Vec<_>>()
        };
        for (to, mem) in step(&inst.leader, c.leader, c.memory) {
            let mut next = c.clone();
            next.leader = to;
            next.memory = mem;
            moves.push(next);
        }
        for (gi, template) in inst.contributors.iter().enumerate() {
            for ci in 0..c.groups[gi].len() {
                if ci > 0 && c.groups[gi][ci] == c.groups[gi][ci - 1] {
                    continue; // identical copies: one representative suffices
                }
                for (to, mem) in step(template, c.groups[gi][ci], c.memory) {
                    let mut next = c.clone();
                    next.groups[gi][ci] = to;
                    next.groups[gi].sort_unstable();
                    next.memory = mem;
                    moves.push(next);
                }
            }
        }
        for next in moves {
            if visited.insert(next.clone()) {
                if inst.unsafe_states.contains(&next.leader) {
                    return Ok(true);
                }
                queue.push_back(next);
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::fig1;

    fn cnf(num_vars: usize, clauses: &[&[i64]]) -> CnfFormula {
        CnfFormula {
            num_vars,
            clauses: clauses
                .iter()
                .map(|c| {
                    c.iter()
                        .map(|&v| Lit {
                            var: v.unsigned_abs() as usize,
                            positive: v > 0,
                        })
                        .collect()
                })
                .collect(),
        }
    }

    #[test]
    fn dimacs_round() {
        let phi = CnfFormula::from_dimacs("c comment\np cnf 2 2\n1 -2 0\n2 0\n").unwrap();
        assert_eq!(phi.num_vars, 2);
        assert_eq!(phi.clauses.len(), 2);
        assert_eq!(phi.clauses[0][1].var, 2);
        assert!(!phi.clauses[0][1].positive);
    }

    #[test]
    fn sat_fixtures() {
        let cases: Vec<(CnfFormula, bool)> = vec![
            (cnf(1, &[&[1]]), true),
            (cnf(1, &[&[-1]]), true),
            (cnf(1, &[&[1], &[-1]]), false),
            (cnf(2, &[&[1, 2], &[-1], &[-2]]), false),
            (cnf(2, &[&[1, 2], &[-1, 2]]), true),
            (cnf(3, &[&[1, 2, 3]]), true),
            (cnf(3, &[&[1], &[2], &[3], &[-2]]), false),
            (cnf(2, &[&[-1, 2], &[1], &[2]]), true),
            (cnf(1, &[&[1, 1], &[-1, -1]]), false),
            (cnf(3, &[&[1, -2], &[2, -3], &[3, -1], &[1, 2, 3]]), true),
        ];
        for (i, (phi, want)) in cases.iter().enumerate() {
            assert_eq!(sat_brute(phi).unwrap(), *want, "sat fixture {i}");
        }
    }

    #[test]
    fn set_cover_fixtures() {
        let sc = |universe, sets: &[&[usize]], budget| SetCoverInstance {
            universe,
            sets: sets.iter().map(|s| s.iter().copied().collect()).collect(),
            budget,
        };
        let cases = vec![
            (sc(1, &[&[1]], 1), true),
            (sc(2, &[&[1], &[2]], 1), false),
            (sc(2, &[&[1], &[2]], 2), true),
            (sc(2, &[&[1, 2]], 1), true),
            (sc(3, &[&[1, 2], &[2, 3]], 2), true),
            (sc(3, &[&[1, 2], &[2, 3]], 1), false),
            (sc(3, &[&[1], &[2]], 3), false),
            (sc(4, &[&[1, 2], &[3], &[4]], 3), true),
            (sc(4, &[&[1, 2], &[3], &[4]], 2), false),
            (sc(2, &[], 0), false),
        ];
        for (i, (inst, want)) in cases.iter().enumerate() {
            assert_eq!(set_cover_brute(inst).unwrap(), *want, "cover fixture {i}");
        }
    }

    #[test]
    fn kxk_fixtures() {
        let grid = |k: usize, edges: &[((usize, usize), (usize, usize))]| {
            let mut g = GridGraph::new(k);
            for &(a, b) in edges {
                g.add_edge(a, b);
            }
            g
        };
        let complete = |k: usize| {
            let mut g = GridGraph::new(k);
            for r1 in 1..=k {
                for c1 in 1..=k {
                    for r2 in 1..=k {
                        for c2 in 1..=k {
                            if (r1, c1) != (r2, c2) {
                                g.add_edge((r1, c1), (r2, c2));
                            }
                        }
                    }
                }
            }
            g
        };
        let cases = vec![
            (grid(1, &[]), true),
            (grid(2, &[]), false),
            (grid(2, &[((1, 1), (2, 1))]), true),
            (grid(2, &[((1, 1), (1, 2))]), false),
            (grid(2, &[((1, 2), (2, 2))]), true),
            (complete(2), true),
            (
                grid(3, &[((1, 1), (2, 1)), ((1, 1), (3, 1)), ((2, 1), (3, 1))]),
                true,
            ),
            (grid(3, &[((1, 1), (2, 1)), ((1, 1), (3, 1))]), false),
            (grid(3, &[]), false),
            (complete(4), true),
        ];
        for (i, (g, want)) in cases.iter().enumerate() {
            assert_eq!(kxk_clique_brute(g).unwrap(), *want, "grid fixture {i}");
        }
    }

    #[test]
    fn clique_fixtures() {
        let graph = |n: usize, edges: &[(usize, usize)]| {
            let mut g = Graph::new(n);
            for &(u, v) in edges {
                g.add_edge(u, v);
            }
            g
        };
        let triangle = graph(3, &[(1, 2), (2, 3), (1, 3)]);
        let path = graph(3, &[(1, 2), (2, 3)]);
        assert!(clique_brute(&triangle, 3).unwrap());
        assert!(!clique_brute(&path, 3).unwrap());
        assert!(clique_brute(&path, 2).unwrap());
        assert!(clique_brute(&graph(1, &[]), 1).unwrap());
        assert!(!clique_brute(&graph(2, &[]), 2).unwrap());
        assert!(!clique_brute(&triangle, 4).unwrap());
    }

    #[test]
    fn explicit_bfs_on_fig1() {
        assert!(!lcr_explicit_bfs(&fig1(), 0).unwrap());
        assert!(lcr_explicit_bfs(&fig1(), 2).unwrap());
        // Monotone in the number of copies.
        let mut prev = false;
        for t in 0..=3 {
            let now = lcr_explicit_bfs(&fig1(), t).unwrap();
            assert!(!prev || now, "lost reachability at t={t}");
            prev = now;
        }
    }
}
