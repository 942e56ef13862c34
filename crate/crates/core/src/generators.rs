//! Instance generators: reductions from SAT, set cover and clique problems
//! into LCR / BSR instances. Each generator returns the instance together
//! with its parameter summary and the equivalence the construction promises,
//! so tests can close the loop against the brute-force oracles.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::model::{
    BsrInstance, Instance, LcrInstance, MemoryOp, Program, StateId, SymbolId, Thread, Transition,
};
use crate::oracles::{CnfFormula, Graph, GridGraph, SetCoverInstance};

#[derive(Error, Debug)]
pub enum GenError {
    #[error("invalid generator input: {0}")]
    Invalid(String),
    #[error("formula family is not shape-compatible: {0}")]
    NotEquivalent(String),
}

/// A generated instance plus the sizes the construction guarantees and a
/// one-line description of the equivalence it encodes.
#[derive(Clone, Debug)]
pub struct GeneratorReport {
    pub instance: Instance,
    pub parameters: Vec<(String, usize)>,
    pub equivalence: String,
}

impl GeneratorReport {
    pub fn lcr(&self) -> &LcrInstance {
        match &self.instance {
            Instance::Lcr(inst) => inst,
            Instance::Bsr(_) => panic!("expected an LCR instance"),
        }
    }

    pub fn bsr(&self) -> &BsrInstance {
        match &self.instance {
            Instance::Bsr(inst) => inst,
            Instance::Lcr(_) => panic!("expected a BSR instance"),
        }
    }

    pub fn parameter(&self, name: &str) -> Option<usize> {
        self.parameters
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
    }

    pub fn summary(&self) -> String {
        self.parameters
            .iter()
            .map(|(n, v)| format!("{n}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

// ---------------------------------------------------------------------------
// Small builders
// ---------------------------------------------------------------------------

/// Interning domain builder; symbol 0 is always the initial symbol `a0`.
struct Dom {
    names: Vec<String>,
    index: HashMap<String, SymbolId>,
}

impl Dom {
    fn new() -> Dom {
        let mut d = Dom {
            names: Vec::new(),
            index: HashMap::new(),
        };
        d.add("a0");
        d
    }

    fn add(&mut self, name: impl Into<String>) -> SymbolId {
        let name = name.into();
        if let Some(&i) = self.index.get(&name) {
            return i;
        }
        let i = self.names.len();
        self.index.insert(name.clone(), i);
        self.names.push(name);
        i
    }

    fn len(&self) -> usize {
        self.names.len()
    }
}

const A0: SymbolId = 0;

/// Thread builder interning states by name; the first state is initial.
struct Tb {
    name: String,
    states: Vec<String>,
    index: HashMap<String, StateId>,
    transitions: Vec<Transition>,
}

impl Tb {
    fn new(name: &str, init: &str) -> Tb {
        let mut b = Tb {
            name: name.to_string(),
            states: Vec::new(),
            index: HashMap::new(),
            transitions: Vec::new(),
        };
        b.state(init);
        b
    }

    fn state(&mut self, name: &str) -> StateId {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.states.len();
        self.index.insert(name.to_string(), i);
        self.states.push(name.to_string());
        i
    }

    fn add(&mut self, from: &str, op: MemoryOp, to: &str) {
        let from = self.state(from);
        let to = self.state(to);
        self.transitions.push(Transition { from, op, to });
    }

    /// A linear sequence of operations from `from` to `to`; intermediate
    /// states are named `prefix_<step>`.
    fn chain(&mut self, from: &str, to: &str, prefix: &str, ops: &[MemoryOp]) {
        let mut cur = from.to_string();
        for (s, &op) in ops.iter().enumerate() {
            let next = if s + 1 == ops.len() {
                to.to_string()
            } else {
                format!("{prefix}_{s}")
            };
            self.add(&cur, op, &next);
            cur = next;
        }
    }

    fn build(self, domain_len: usize) -> Thread {
        Thread::new(self.name, self.states, 0, self.transitions, domain_len)
            .expect("generated thread is well-formed")
    }
}

/// Smallest width `b` with `2^b >= x` (0 for x <= 1).
fn ceil_log2(x: usize) -> usize {
    let mut b = 0;
    while (1usize << b) < x {
        b += 1;
    }
    b
}

/// `width` bits of `value`, most significant first.
fn bits_msb(value: usize, width: usize) -> Vec<usize> {
    (0..width).map(|b| (value >> (width - 1 - b)) & 1).collect()
}

fn clause_satisfied_by(clause: &[crate::oracles::Lit], var: usize, val: usize) -> bool {
    clause
        .iter()
        .any(|l| l.var == var && l.positive == (val == 1))
}

/// Shape check for cross-compositions: every formula must be well-formed and
/// share the same number of variables and clauses.
fn family_shape(phis: &[CnfFormula]) -> Result<(usize, usize), GenError> {
    if phis.is_empty() {
        return Err(GenError::Invalid("empty formula family".into()));
    }
    for phi in phis {
        phi.validate()
            .map_err(|e| GenError::Invalid(e.to_string()))?;
    }
    let n = phis[0].num_vars;
    let m = phis[0].clauses.len();
    if n == 0 || m == 0 {
        return Err(GenError::Invalid(
            "formulas need at least one variable and one clause".into(),
        ));
    }
    for phi in &phis[1..] {
        if phi.num_vars != n || phi.clauses.len() != m {
            return Err(GenError::NotEquivalent(format!(
                "expected {n} variables / {m} clauses, found {} / {}",
                phi.num_vars,
                phi.clauses.len()
            )));
        }
    }
    Ok((n, m))
}

// ---------------------------------------------------------------------------
// LCR generators
// ---------------------------------------------------------------------------

/// Grid clique to LCR. The leader announces one vertex per row as the pair
/// row(i), col(j); contributors each store one vertex, drop out on a
/// non-neighbour, and report their row with a hash symbol the leader collects.
/// Reachable iff the grid has a clique with one vertex from each row.
/// Sizes: D = L = 3k+1.
pub fn gen_lcr_from_kxk_clique(g: &GridGraph) -> Result<GeneratorReport, GenError> {
    let k = g.k;
    if k == 0 {
        return Err(GenError::Invalid("k must be positive".into()));
    }
    let mut dom = Dom::new();
    let row: Vec<SymbolId> = (1..=k).map(|i| dom.add(format!("row{i}"))).collect();
    let col: Vec<SymbolId> = (1..=k).map(|j| dom.add(format!("col{j}"))).collect();
    let hash: Vec<SymbolId> = (1..=k).map(|i| dom.add(format!("hash{i}"))).collect();

    let mut l = Tb::new("leader", "qc0");
    for i in 1..=k {
        l.add(
            &format!("qc{}", i - 1),
            MemoryOp::Write(row[i - 1]),
            &format!("qr{i}"),
        );
        for j in 1..=k {
            l.add(
                &format!("qr{i}"),
                MemoryOp::Write(col[j - 1]),
                &format!("qc{i}"),
            );
        }
    }
    for i in 1..=k {
        let from = if i == 1 {
            format!("qc{k}")
        } else {
            format!("qh{}", i - 1)
        };
        l.add(&from, MemoryOp::Read(hash[i - 1]), &format!("qh{i}"));
    }
    let leader = l.build(dom.len());
    let unsafe_q = leader.state_index(&format!("qh{k}")).unwrap();

    let mut c = Tb::new("contributor", "p0");
    let cs = |i: usize, j: usize, kind: char, l: usize| format!("c{i}_{j}_{kind}{l}");
    for i in 1..=k {
        for j in 1..=k {
            c.add("p0", MemoryOp::Read(A0), &cs(i, j, 'c', 0));
            for lv in 1..=k {
                c.add(
                    &cs(i, j, 'c', lv - 1),
                    MemoryOp::Read(row[lv - 1]),
                    &cs(i, j, 'r', lv),
                );
                for jp in 1..=k {
                    let ok = if lv == i {
                        jp == j
                    } else {
                        g.adjacent((lv, jp), (i, j))
                    };
                    if ok {
                        c.add(
                            &cs(i, j, 'r', lv),
                            MemoryOp::Read(col[jp - 1]),
                            &cs(i, j, 'c', lv),
                        );
                    }
                }
            }
            c.add(&cs(i, j, 'c', k), MemoryOp::Write(hash[i - 1]), "pf");
        }
    }
    let contributor = c.build(dom.len());

    let inst = LcrInstance {
        domain: dom.names,
        init_symbol: A0,
        leader,
        contributors: vec![contributor],
        unsafe_states: BTreeSet::from([unsafe_q]),
    };
    inst.validate().map_err(|e| GenError::Invalid(e.to_string()))?;
    Ok(GeneratorReport {
        parameters: vec![
            ("D".into(), inst.domain.len()),
            ("L".into(), inst.leader.len()),
            ("C".into(), inst.contributors[0].len()),
        ],
        equivalence: format!(
            "reachable iff the {k}x{k} grid graph has a clique with one vertex per row"
        ),
        instance: Instance::Lcr(inst),
    })
}

/// 3-SAT to LCR. The leader guesses an evaluation, one pair per variable;
/// contributors each store one pair and loop writing the hash of every clause
/// that pair satisfies; the leader then reads hash1..hashm.
/// Reachable iff the formula is satisfiable. Contributor size C = 2n+1.
pub fn gen_lcr_from_3sat(phi: &CnfFormula) -> Result<GeneratorReport, GenError> {
    family_shape(std::slice::from_ref(phi))?;
    let n = phi.num_vars;
    let m = phi.clauses.len();
    let mut dom = Dom::new();
    let xv: Vec<[SymbolId; 2]> = (1..=n)
        .map(|i| [dom.add(format!("x{i}=0")), dom.add(format!("x{i}=1"))])
        .collect();
    let hash: Vec<SymbolId> = (1..=m).map(|j| dom.add(format!("hash{j}"))).collect();

    let mut l = Tb::new("leader", "qx0");
    for i in 1..=n {
        for v in 0..2 {
            l.add(
                &format!("qx{}", i - 1),
                MemoryOp::Write(xv[i - 1][v]),
                &format!("qx{i}"),
            );
        }
    }
    for j in 1..=m {
        let from = if j == 1 {
            format!("qx{n}")
        } else {
            format!("qh{}", j - 1)
        };
        l.add(&from, MemoryOp::Read(hash[j - 1]), &format!("qh{j}"));
    }
    let leader = l.build(dom.len());
    let unsafe_q = leader.state_index(&format!("qh{m}")).unwrap();

    let mut c = Tb::new("contributor", "p0");
    for i in 1..=n {
        for v in 0..2 {
            let st = format!("p_x{i}={v}");
            c.add("p0", MemoryOp::Read(xv[i - 1][v]), &st);
            for (j, clause) in phi.clauses.iter().enumerate() {
                if clause_satisfied_by(clause, i, v) {
                    c.add(&st, MemoryOp::Write(hash[j]), &st);
                }
            }
        }
    }
    let contributor = c.build(dom.len());

    let inst = LcrInstance {
        domain: dom.names,
        init_symbol: A0,
        leader,
        contributors: vec![contributor],
        unsafe_states: BTreeSet::from([unsafe_q]),
    };
    inst.validate().map_err(|e| GenError::Invalid(e.to_string()))?;
    Ok(GeneratorReport {
        parameters: vec![
            ("D".into(), inst.domain.len()),
            ("L".into(), inst.leader.len()),
            ("C".into(), inst.contributors[0].len()),
        ],
        equivalence: "reachable iff the formula is satisfiable".into(),
        instance: Instance::Lcr(inst),
    })
}

/// Set cover to LCR. The leader runs `budget` phases, in each picking a set
/// and writing its elements; contributors each store one element and loop
/// writing its check symbol; the leader finally reads every check symbol.
/// Reachable iff a cover within the budget exists. Contributor size C = n+1.
pub fn gen_lcr_from_set_cover(sc: &SetCoverInstance) -> Result<GeneratorReport, GenError> {
    sc.validate().map_err(|e| GenError::Invalid(e.to_string()))?;
    let n = sc.universe;
    if n == 0 {
        return Err(GenError::Invalid("empty universe".into()));
    }
    if sc.sets.is_empty() {
        return Err(GenError::Invalid("empty set family".into()));
    }
    let r = sc.budget;
    let mut dom = Dom::new();
    let elem: Vec<SymbolId> = (1..=n).map(|e| dom.add(format!("u{e}"))).collect();
    let check: Vec<SymbolId> = (1..=n).map(|e| dom.add(format!("u{e}h"))).collect();

    let mut l = Tb::new("leader", "q1");
    for i in 1..=r {
        for (s, set) in sc.sets.iter().enumerate() {
            if set.is_empty() {
                l.add(&format!("q{i}"), MemoryOp::Epsilon, &format!("q{}", i + 1));
                continue;
            }
            l.add(&format!("q{i}"), MemoryOp::Epsilon, &format!("q{i}_s{s}_0"));
            let members: Vec<usize> = set.iter().copied().collect();
            for (j, &e) in members.iter().enumerate() {
                let to = if j + 1 == members.len() {
                    format!("q{}", i + 1)
                } else {
                    format!("q{i}_s{s}_{}", j + 1)
                };
                l.add(
                    &format!("q{i}_s{s}_{j}"),
                    MemoryOp::Write(elem[e - 1]),
                    &to,
                );
            }
        }
    }
    for e in 1..=n {
        let from = if e == 1 {
            format!("q{}", r + 1)
        } else {
            format!("qh{}", e - 1)
        };
        l.add(&from, MemoryOp::Read(check[e - 1]), &format!("qh{e}"));
    }
    // budget 0 with a non-trivial universe: the read phase still starts at q1.
    l.state(&format!("q{}", r + 1));
    let leader = l.build(dom.len());
    let unsafe_q = leader.state_index(&format!("qh{n}")).unwrap();

    let mut c = Tb::new("contributor", "p0");
    for e in 1..=n {
        let st = format!("p_u{e}");
        c.add("p0", MemoryOp::Read(elem[e - 1]), &st);
        c.add(&st, MemoryOp::Write(check[e - 1]), &st);
    }
    let contributor = c.build(dom.len());

    let inst = LcrInstance {
        domain: dom.names,
        init_symbol: A0,
        leader,
        contributors: vec![contributor],
        unsafe_states: BTreeSet::from([unsafe_q]),
    };
    inst.validate().map_err(|e| GenError::Invalid(e.to_string()))?;
    Ok(GeneratorReport {
        parameters: vec![
            ("D".into(), inst.domain.len()),
            ("L".into(), inst.leader.len()),
            ("C".into(), inst.contributors[0].len()),
        ],
        equivalence: format!("reachable iff {r} sets from the family cover the universe"),
        instance: Instance::Lcr(inst),
    })
}

/// Cross-composition of a 3-SAT family with a deadlocking index tree. The
/// leader writes an instance index bit by bit, then an evaluation, then reads
/// the clause hashes; contributors branch through a binary tree on the index
/// bits (leaves outside [1..I] deadlock), store one evaluation pair and write
/// hashes of clauses of the chosen instance that pair satisfies.
/// Reachable iff some instance in the family is satisfiable.
pub fn gen_lcr_crosscomp_dl(phis: &[CnfFormula]) -> Result<GeneratorReport, GenError> {
    let (n, m) = family_shape(phis)?;
    let big_i = phis.len();
    let b = ceil_log2(big_i);
    let mut dom = Dom::new();
    let bit: Vec<[SymbolId; 2]> = (1..=b)
        .map(|l| [dom.add(format!("bit{l}=0")), dom.add(format!("bit{l}=1"))])
        .collect();
    let xv: Vec<[SymbolId; 2]> = (1..=n)
        .map(|i| [dom.add(format!("x{i}=0")), dom.add(format!("x{i}=1"))])
        .collect();
    let hash: Vec<SymbolId> = (1..=m).map(|j| dom.add(format!("hash{j}"))).collect();

    let mut l = Tb::new("leader", "qb0");
    for lv in 1..=b {
        for u in 0..2 {
            l.add(
                &format!("qb{}", lv - 1),
                MemoryOp::Write(bit[lv - 1][u]),
                &format!("qb{lv}"),
            );
        }
    }
    for i in 1..=n {
        let from = if i == 1 {
            format!("qb{b}")
        } else {
            format!("qx{}", i - 1)
        };
        for v in 0..2 {
            l.add(&from, MemoryOp::Write(xv[i - 1][v]), &format!("qx{i}"));
        }
    }
    for j in 1..=m {
        let from = if j == 1 {
            if n > 0 {
                format!("qx{n}")
            } else {
                format!("qb{b}")
            }
        } else {
            format!("qh{}", j - 1)
        };
        l.add(&from, MemoryOp::Read(hash[j - 1]), &format!("qh{j}"));
    }
    let leader = l.build(dom.len());
    let unsafe_q = leader.state_index(&format!("qh{m}")).unwrap();

    let mut c = Tb::new("contributor", "t");
    // Binary index tree: node names carry the bit string read so far.
    for z in 0..(1usize << b) {
        let bits = bits_msb(z, b);
        // Edges along the path to this leaf.
        for depth in 1..=b {
            let from = format!("t{}", bits[..depth - 1].iter().map(|x| x.to_string()).collect::<String>());
            let to = format!("t{}", bits[..depth].iter().map(|x| x.to_string()).collect::<String>());
            c.add(&from, MemoryOp::Read(bit[depth - 1][bits[depth - 1]]), &to);
        }
        let leaf = format!("t{}", bits.iter().map(|x| x.to_string()).collect::<String>());
        let ell = z + 1;
        if ell <= big_i {
            c.add(&leaf, MemoryOp::Epsilon, &format!("ch{ell}"));
        }
        // Padding leaves have no outgoing transitions and deadlock.
    }
    for ell in 1..=big_i {
        for i in 1..=n {
            for v in 0..2 {
                let st = format!("s{ell}_x{i}={v}");
                c.add(&format!("ch{ell}"), MemoryOp::Read(xv[i - 1][v]), &st);
                for (j, clause) in phis[ell - 1].clauses.iter().enumerate() {
                    if clause_satisfied_by(clause, i, v) {
                        c.add(&st, MemoryOp::Write(hash[j]), &st);
                    }
                }
            }
        }
    }
    let contributor = c.build(dom.len());

    let inst = LcrInstance {
        domain: dom.names,
        init_symbol: A0,
        leader,
        contributors: vec![contributor],
        unsafe_states: BTreeSet::from([unsafe_q]),
    };
    inst.validate().map_err(|e| GenError::Invalid(e.to_string()))?;
    Ok(GeneratorReport {
        parameters: vec![
            ("D".into(), inst.domain.len()),
            ("L".into(), inst.leader.len()),
            ("C".into(), inst.contributors[0].len()),
            ("I".into(), big_i),
            ("bits".into(), b),
        ],
        equivalence: format!("reachable iff one of the {big_i} formulas is satisfiable"),
        instance: Instance::Lcr(inst),
    })
}

/// Cross-composition where the leader branches over the instances instead:
/// the evaluation phase is shared, then the leader picks an instance index l
/// and reads hash(l,1)..hash(l,m). The contributor is the 3-SAT contributor
/// with per-instance hash symbols, so C = 2n+1 independent of the family size.
/// Reachable iff some instance in the family is satisfiable.
pub fn gen_lcr_crosscomp_c(phis: &[CnfFormula]) -> Result<GeneratorReport, GenError> {
    let (n, m) = family_shape(phis)?;
    let big_i = phis.len();
    let mut dom = Dom::new();
    let xv: Vec<[SymbolId; 2]> = (1..=n)
        .map(|i| [dom.add(format!("x{i}=0")), dom.add(format!("x{i}=1"))])
        .collect();
    let hash: Vec<Vec<SymbolId>> = (1..=big_i)
        .map(|l| (1..=m).map(|j| dom.add(format!("hash{l}_{j}"))).collect())
        .collect();

    let mut l = Tb::new("leader", "qx0");
    for i in 1..=n {
        for v in 0..2 {
            l.add(
                &format!("qx{}", i - 1),
                MemoryOp::Write(xv[i - 1][v]),
                &format!("qx{i}"),
            );
        }
    }
    let mut unsafe_states = BTreeSet::new();
    for ell in 1..=big_i {
        for j in 1..=m {
            let from = if j == 1 {
                format!("qx{n}")
            } else {
                format!("q{ell}h{}", j - 1)
            };
            l.add(&from, MemoryOp::Read(hash[ell - 1][j - 1]), &format!("q{ell}h{j}"));
        }
    }
    let leader = l.build(dom.len());
    for ell in 1..=big_i {
        unsafe_states.insert(leader.state_index(&format!("q{ell}h{m}")).unwrap());
    }

    let mut c = Tb::new("contributor", "p0");
    for i in 1..=n {
        for v in 0..2 {
            let st = format!("p_x{i}={v}");
            c.add("p0", MemoryOp::Read(xv[i - 1][v]), &st);
            for (li, phi) in phis.iter().enumerate() {
                for (j, clause) in phi.clauses.iter().enumerate() {
                    if clause_satisfied_by(clause, i, v) {
                        c.add(&st, MemoryOp::Write(hash[li][j]), &st);
                    }
                }
            }
        }
    }
    let contributor = c.build(dom.len());

    let inst = LcrInstance {
        domain: dom.names,
        init_symbol: A0,
        leader,
        contributors: vec![contributor],
        unsafe_states,
    };
    inst.validate().map_err(|e| GenError::Invalid(e.to_string()))?;
    Ok(GeneratorReport {
        parameters: vec![
            ("D".into(), inst.domain.len()),
            ("L".into(), inst.leader.len()),
            ("C".into(), inst.contributors[0].len()),
            ("I".into(), big_i),
        ],
        equivalence: format!("reachable iff one of the {big_i} formulas is satisfiable"),
        instance: Instance::Lcr(inst),
    })
}

/// General clique to LCR with a small leader. Three phases: the leader writes
/// k candidate vertices, then re-announces them with check symbols while the
/// contributors verify distinctness and edges, then collects one hash per
/// row of the candidate. Reachable iff the graph has a k-clique.
/// Sizes: L = 3k+1, D = 2k|V| + k + 1.
pub fn gen_lcr_from_clique_l(g: &Graph, k: usize) -> Result<GeneratorReport, GenError> {
    if k == 0 {
        return Err(GenError::Invalid("k must be positive".into()));
    }
    if g.n == 0 {
        return Err(GenError::Invalid("empty graph".into()));
    }
    let n = g.n;
    let mut dom = Dom::new();
    let first: Vec<Vec<SymbolId>> = (1..=n)
        .map(|v| (1..=k).map(|i| dom.add(format!("v{v}_{i}"))).collect())
        .collect();
    let second: Vec<Vec<SymbolId>> = (1..=n)
        .map(|v| (1..=k).map(|i| dom.add(format!("v{v}h_{i}"))).collect())
        .collect();
    let hash: Vec<SymbolId> = (1..=k).map(|i| dom.add(format!("hash{i}"))).collect();

    let mut l = Tb::new("leader", "q0");
    for i in 1..=k {
        let from = if i == 1 {
            "q0".to_string()
        } else {
            format!("qv{}", i - 1)
        };
        for v in 1..=n {
            l.add(&from, MemoryOp::Write(first[v - 1][i - 1]), &format!("qv{i}"));
        }
    }
    for i in 1..=k {
        let from = if i == 1 {
            format!("qv{k}")
        } else {
            format!("qw{}", i - 1)
        };
        for v in 1..=n {
            l.add(&from, MemoryOp::Write(second[v - 1][i - 1]), &format!("qw{i}"));
        }
    }
    for i in 1..=k {
        let from = if i == 1 {
            format!("qw{k}")
        } else {
            format!("qh{}", i - 1)
        };
        l.add(&from, MemoryOp::Read(hash[i - 1]), &format!("qh{i}"));
    }
    let leader = l.build(dom.len());
    let unsafe_q = leader.state_index(&format!("qh{k}")).unwrap();

    let mut c = Tb::new("contributor", "p0");
    for v in 1..=n {
        for i in 1..=k {
            c.add("p0", MemoryOp::Read(first[v - 1][i - 1]), &format!("c{v}_{i}_0"));
            for j in 1..=k {
                for w in 1..=n {
                    let ok = if j == i {
                        w == v
                    } else {
                        w != v && g.adjacent(v, w)
                    };
                    if ok {
                        c.add(
                            &format!("c{v}_{i}_{}", j - 1),
                            MemoryOp::Read(second[w - 1][j - 1]),
                            &format!("c{v}_{i}_{j}"),
                        );
                    }
                }
            }
            c.add(&format!("c{v}_{i}_{k}"), MemoryOp::Write(hash[i - 1]), "pf");
        }
    }
    let contributor = c.build(dom.len());

    let inst = LcrInstance {
        domain: dom.names,
        init_symbol: A0,
        leader,
        contributors: vec![contributor],
        unsafe_states: BTreeSet::from([unsafe_q]),
    };
    inst.validate().map_err(|e| GenError::Invalid(e.to_string()))?;
    Ok(GeneratorReport {
        parameters: vec![
            ("D".into(), inst.domain.len()),
            ("L".into(), inst.leader.len()),
            ("C".into(), inst.contributors[0].len()),
            ("k".into(), k),
        ],
        equivalence: format!("reachable iff the graph has a clique of size {k}"),
        instance: Instance::Lcr(inst),
    })
}

// ---------------------------------------------------------------------------
// BSR generators
// ---------------------------------------------------------------------------

/// Grid clique to BSR with a single writer. Reader i picks a vertex of row i
/// on the initial symbol and then checks the k vertices the writer announces;
/// the writer just writes one vertex per row. All threads reaching their last
/// level within one stage iff the grid has a row-clique. Writer has k+1 states.
pub fn gen_bsr_from_kxk_clique(g: &GridGraph) -> Result<GeneratorReport, GenError> {
    let k = g.k;
    if k == 0 {
        return Err(GenError::Invalid("k must be positive".into()));
    }
    let mut dom = Dom::new();
    let vert: Vec<Vec<SymbolId>> = (1..=k)
        .map(|i| (1..=k).map(|j| dom.add(format!("v{i}_{j}"))).collect())
        .collect();

    let mut threads = Vec::new();
    let mut target = Vec::new();
    for i in 1..=k {
        let mut t = Tb::new(&format!("r{i}"), "init");
        for j in 1..=k {
            t.add("init", MemoryOp::Read(A0), &format!("q{j}_0"));
            for lv in 1..=k {
                for m in 1..=k {
                    let ok = if lv == i {
                        m == j
                    } else {
                        g.adjacent((i, j), (lv, m))
                    };
                    if ok {
                        t.add(
                            &format!("q{j}_{}", lv - 1),
                            MemoryOp::Read(vert[lv - 1][m - 1]),
                            &format!("q{j}_{lv}"),
                        );
                    }
                }
            }
        }
        let thread = t.build(dom.len());
        let goal: BTreeSet<StateId> = (1..=k)
            .filter_map(|j| thread.state_index(&format!("q{j}_{k}")))
            .collect();
        threads.push(thread);
        target.push(Some(goal));
    }
    let mut w = Tb::new("w", "w0");
    for i in 1..=k {
        for j in 1..=k {
            w.add(
                &format!("w{}", i - 1),
                MemoryOp::Write(vert[i - 1][j - 1]),
                &format!("w{i}"),
            );
        }
    }
    let writer = w.build(dom.len());
    let wk = writer.state_index(&format!("w{k}")).unwrap();
    threads.push(writer);
    target.push(Some(BTreeSet::from([wk])));

    let inst = BsrInstance {
        program: Program {
            domain: dom.names,
            init_symbol: A0,
            threads,
        },
        target,
        memory_target: None,
        stages: 1,
    };
    inst.validate().map_err(|e| GenError::Invalid(e.to_string()))?;
    let p_max = inst.program.threads.iter().map(|t| t.len()).max().unwrap();
    Ok(GeneratorReport {
        parameters: vec![
            ("D".into(), inst.program.domain.len()),
            ("P".into(), p_max),
            ("Pw".into(), k + 1),
            ("t".into(), inst.program.threads.len()),
            ("s".into(), 1),
        ],
        equivalence: format!(
            "1-stage reachable iff the {k}x{k} grid graph has a clique with one vertex per row"
        ),
        instance: Instance::Bsr(inst),
    })
}

/// Cross-composition of a 3-SAT family into BSR. One writer guesses per
/// clause slot a tuple (instance, clause, variable, value); variable threads
/// store an evaluation on the initial symbol and check tuples naming their
/// variable; bit checkers pin all tuples to the same instance index.
/// 1-stage reachable iff some instance is satisfiable.
/// Sizes: P = 2(m+1)+1 (variable threads), t = 1 + n + ceil(log2 I).
pub fn gen_bsr_crosscomp(phis: &[CnfFormula]) -> Result<GeneratorReport, GenError> {
    let (n, m) = family_shape(phis)?;
    let big_i = phis.len();
    let b = ceil_log2(big_i);
    let mut dom = Dom::new();
    // tup[l-1][j-1][i-1][v]
    let tup: Vec<Vec<Vec<[SymbolId; 2]>>> = (1..=big_i)
        .map(|l| {
            (1..=m)
                .map(|j| {
                    (1..=n)
                        .map(|i| {
                            [
                                dom.add(format!("c{l}_{j}_x{i}=0")),
                                dom.add(format!("c{l}_{j}_x{i}=1")),
                            ]
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut threads = Vec::new();
    let mut target = Vec::new();

    let mut w = Tb::new("w", "w0");
    for j in 1..=m {
        for l in 1..=big_i {
            for i in 1..=n {
                for v in 0..2 {
                    w.add(
                        &format!("w{}", j - 1),
                        MemoryOp::Write(tup[l - 1][j - 1][i - 1][v]),
                        &format!("w{j}"),
                    );
                }
            }
        }
    }
    let writer = w.build(dom.len());
    let wm = writer.state_index(&format!("w{m}")).unwrap();
    threads.push(writer);
    target.push(Some(BTreeSet::from([wm])));

    for i in 1..=n {
        let mut t = Tb::new(&format!("x{i}"), "init");
        for v in 0..2 {
            t.add("init", MemoryOp::Read(A0), &format!("e{v}_0"));
            for j in 1..=m {
                for l in 1..=big_i {
                    for ip in 1..=n {
                        for vp in 0..2 {
                            let ok = if ip == i {
                                vp == v
                                    && clause_satisfied_by(&phis[l - 1].clauses[j - 1], i, v)
                            } else {
                                true
                            };
                            if ok {
                                t.add(
                                    &format!("e{v}_{}", j - 1),
                                    MemoryOp::Read(tup[l - 1][j - 1][ip - 1][vp]),
                                    &format!("e{v}_{j}"),
                                );
                            }
                        }
                    }
                }
            }
        }
        let thread = t.build(dom.len());
        let goal: BTreeSet<StateId> = (0..2)
            .filter_map(|v| thread.state_index(&format!("e{v}_{m}")))
            .collect();
        threads.push(thread);
        target.push(Some(goal));
    }

    for bit in 1..=b {
        let mut t = Tb::new(&format!("b{bit}"), "init");
        for l in 1..=big_i {
            let u = bits_msb(l - 1, b)[bit - 1];
            for j in 1..=m {
                let from = if j == 1 {
                    "init".to_string()
                } else {
                    format!("u{u}_{}", j - 1)
                };
                for i in 1..=n {
                    for v in 0..2 {
                        t.add(
                            &from,
                            MemoryOp::Read(tup[l - 1][j - 1][i - 1][v]),
                            &format!("u{u}_{j}"),
                        );
                    }
                }
            }
        }
        let thread = t.build(dom.len());
        let goal: BTreeSet<StateId> = (0..2)
            .filter_map(|u| thread.state_index(&format!("u{u}_{m}")))
            .collect();
        threads.push(thread);
        target.push(Some(goal));
    }

    let inst = BsrInstance {
        program: Program {
            domain: dom.names,
            init_symbol: A0,
            threads,
        },
        target,
        memory_target: None,
        stages: 1,
    };
    inst.validate().map_err(|e| GenError::Invalid(e.to_string()))?;
    Ok(GeneratorReport {
        parameters: vec![
            ("D".into(), inst.program.domain.len()),
            ("P".into(), 2 * (m + 1) + 1),
            ("t".into(), inst.program.threads.len()),
            ("s".into(), 1),
            ("I".into(), big_i),
        ],
        equivalence: format!("1-stage reachable iff one of the {big_i} formulas is satisfiable"),
        instance: Instance::Bsr(inst),
    })
}

/// 3-SAT to BSR over the constant domain {a0, #, 0, 1}. A verifier thread
/// picks one literal per clause and writes its encoding v # bin(i) bit by
/// bit, # separated; each variable thread stores an evaluation and reads all
/// m encodings, deadlocking on a literal that contradicts its choice.
/// 1-stage reachable iff the formula is satisfiable.
pub fn gen_bsr_constant_domain(phi: &CnfFormula) -> Result<GeneratorReport, GenError> {
    let (n, m) = family_shape(std::slice::from_ref(phi))?;
    let mut dom = Dom::new();
    let sep = dom.add("#");
    let zero = dom.add("0");
    let one = dom.add("1");
    let bitsym = [zero, one];
    let width = ceil_log2(n) + 1;
    // Symbols of enc(x_i = v): v # b1 # b2 # ... bw #, index i in binary MSB first.
    let enc = |var: usize, val: usize| -> Vec<SymbolId> {
        let mut out = vec![bitsym[val], sep];
        for bit in bits_msb(var, width) {
            out.push(bitsym[bit]);
            out.push(sep);
        }
        out
    };

    let mut threads = Vec::new();
    let mut target = Vec::new();

    let mut ver = Tb::new("v", "v0");
    for (j, clause) in phi.clauses.iter().enumerate() {
        let j = j + 1;
        for (p, lit) in clause.iter().enumerate() {
            let ops: Vec<MemoryOp> = enc(lit.var, usize::from(lit.positive))
                .into_iter()
                .map(MemoryOp::Write)
                .collect();
            ver.chain(
                &format!("v{}", j - 1),
                &format!("v{j}"),
                &format!("v{j}_{p}"),
                &ops,
            );
        }
    }
    let verifier = ver.build(dom.len());
    let vm = verifier.state_index(&format!("v{m}")).unwrap();
    threads.push(verifier);
    target.push(Some(BTreeSet::from([vm])));

    // The distinct literals the verifier may transmit.
    let mut lits: BTreeSet<(usize, bool)> = BTreeSet::new();
    for clause in &phi.clauses {
        for lit in clause {
            lits.insert((lit.var, lit.positive));
        }
    }

    for i in 1..=n {
        let mut t = Tb::new(&format!("x{i}"), "init");
        for v in 0..2 {
            t.add("init", MemoryOp::Read(A0), &format!("p{v}_0"));
            for j in 1..=m {
                // Literals over other variables pass through unchecked; the
                // own variable only with the stored evaluation.
                let mut allowed: Vec<(usize, usize)> = lits
                    .iter()
                    .filter(|&&(var, _)| var != i)
                    .map(|&(var, pos)| (var, usize::from(pos)))
                    .collect();
                allowed.push((i, v));
                for (idx, &(var, val)) in allowed.iter().enumerate() {
                    let ops: Vec<MemoryOp> =
                        enc(var, val).into_iter().map(MemoryOp::Read).collect();
                    t.chain(
                        &format!("p{v}_{}", j - 1),
                        &format!("p{v}_{j}"),
                        &format!("p{v}_{j}_e{idx}"),
                        &ops,
                    );
                }
            }
        }
        let thread = t.build(dom.len());
        let goal: BTreeSet<StateId> = (0..2)
            .filter_map(|v| thread.state_index(&format!("p{v}_{m}")))
            .collect();
        threads.push(thread);
        target.push(Some(goal));
    }

    let inst = BsrInstance {
        program: Program {
            domain: dom.names,
            init_symbol: A0,
            threads,
        },
        target,
        memory_target: None,
        stages: 1,
    };
    inst.validate().map_err(|e| GenError::Invalid(e.to_string()))?;
    Ok(GeneratorReport {
        parameters: vec![
            ("D".into(), inst.program.domain.len()),
            ("t".into(), inst.program.threads.len()),
            ("s".into(), 1),
            ("bits".into(), width),
        ],
        equivalence: "1-stage reachable iff the formula is satisfiable".into(),
        instance: Instance::Bsr(inst),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dp::solve_lcr_dp;
    use crate::oracles::Lit;
    use crate::witness::solve_lcr_witness;

    fn lit(v: i64) -> Lit {
        Lit {
            var: v.unsigned_abs() as usize,
            positive: v > 0,
        }
    }

    fn cnf(num_vars: usize, clauses: &[&[i64]]) -> CnfFormula {
        CnfFormula {
            num_vars,
            clauses: clauses
                .iter()
                .map(|c| c.iter().map(|&v| lit(v)).collect())
                .collect(),
        }
    }

    #[test]
    fn kxk_sizes_match() {
        let g = GridGraph::new(3);
        let rep = gen_lcr_from_kxk_clique(&g).unwrap();
        assert_eq!(rep.parameter("D"), Some(10));
        assert_eq!(rep.parameter("L"), Some(10));
    }

    #[test]
    fn kxk_k1_reachable() {
        let g = GridGraph::new(1);
        let rep = gen_lcr_from_kxk_clique(&g).unwrap();
        assert!(solve_lcr_witness(rep.lcr()).unwrap().reachable);
    }

    #[test]
    fn threesat_contributor_size() {
        let phi = cnf(3, &[&[1, -2, 3]]);
        let rep = gen_lcr_from_3sat(&phi).unwrap();
        assert_eq!(rep.parameter("C"), Some(7));
    }

    #[test]
    fn threesat_single_positive_clause_reachable() {
        let phi = cnf(1, &[&[1]]);
        let rep = gen_lcr_from_3sat(&phi).unwrap();
        assert!(solve_lcr_dp(rep.lcr()).unwrap().reachable);
    }

    #[test]
    fn threesat_contradiction_unreachable() {
        let phi = cnf(1, &[&[1], &[-1]]);
        let rep = gen_lcr_from_3sat(&phi).unwrap();
        assert!(!solve_lcr_dp(rep.lcr()).unwrap().reachable);
    }

    #[test]
    fn set_cover_contributor_size() {
        let sc = SetCoverInstance {
            universe: 4,
            sets: vec![BTreeSet::from([1, 2]), BTreeSet::from([3, 4])],
            budget: 2,
        };
        let rep = gen_lcr_from_set_cover(&sc).unwrap();
        assert_eq!(rep.parameter("C"), Some(5));
        assert!(solve_lcr_dp(rep.lcr()).unwrap().reachable);
    }

    #[test]
    fn set_cover_whole_universe_one_set() {
        let sc = SetCoverInstance {
            universe: 2,
            sets: vec![BTreeSet::from([1, 2])],
            budget: 1,
        };
        let rep = gen_lcr_from_set_cover(&sc).unwrap();
        assert!(solve_lcr_dp(rep.lcr()).unwrap().reachable);
    }

    #[test]
    fn crosscomp_dl_family_shape_enforced() {
        let fam = vec![cnf(2, &[&[1]]), cnf(3, &[&[1]])];
        assert!(matches!(
            gen_lcr_crosscomp_dl(&fam),
            Err(GenError::NotEquivalent(_))
        ));
    }

    #[test]
    fn crosscomp_dl_single_instance() {
        let fam = vec![cnf(1, &[&[1]])];
        let rep = gen_lcr_crosscomp_dl(&fam).unwrap();
        assert_eq!(rep.parameter("bits"), Some(0));
        assert!(solve_lcr_dp(rep.lcr()).unwrap().reachable);
    }

    #[test]
    fn crosscomp_c_contributor_matches_threesat() {
        let fam = vec![cnf(2, &[&[1, 2]]), cnf(2, &[&[-1, -2]])];
        let rep = gen_lcr_crosscomp_c(&fam).unwrap();
        let base = gen_lcr_from_3sat(&fam[0]).unwrap();
        assert_eq!(rep.parameter("C"), base.parameter("C"));
    }

    #[test]
    fn clique_l_leader_size() {
        let mut g = Graph::new(3);
        g.add_edge(1, 2);
        g.add_edge(2, 3);
        g.add_edge(1, 3);
        let rep = gen_lcr_from_clique_l(&g, 3).unwrap();
        assert_eq!(rep.parameter("L"), Some(10));
        assert_eq!(rep.parameter("D"), Some(3 * 2 * 3 + 3 + 1));
        assert!(solve_lcr_witness(rep.lcr()).unwrap().reachable);
    }

    #[test]
    fn clique_l_path_has_no_triangle() {
        let mut g = Graph::new(3);
        g.add_edge(1, 2);
        g.add_edge(2, 3);
        let rep = gen_lcr_from_clique_l(&g, 3).unwrap();
        assert!(!solve_lcr_witness(rep.lcr()).unwrap().reachable);
    }

    #[test]
    fn bsr_kxk_writer_size() {
        let g = GridGraph::new(2);
        let rep = gen_bsr_from_kxk_clique(&g).unwrap();
        assert_eq!(rep.parameter("Pw"), Some(3));
        assert_eq!(rep.parameter("t"), Some(3));
        assert_eq!(rep.bsr().stages, 1);
    }

    #[test]
    fn bsr_crosscomp_sizes() {
        let fam = vec![
            cnf(2, &[&[1], &[2]]),
            cnf(2, &[&[-1], &[2]]),
            cnf(2, &[&[1], &[-2]]),
            cnf(2, &[&[-1], &[-2]]),
        ];
        let rep = gen_bsr_crosscomp(&fam).unwrap();
        assert_eq!(rep.parameter("t"), Some(5));
        assert_eq!(rep.parameter("P"), Some(7));
    }

    #[test]
    fn constant_domain_is_constant() {
        let phi = cnf(2, &[&[1, -2]]);
        let rep = gen_bsr_constant_domain(&phi).unwrap();
        assert_eq!(rep.parameter("D"), Some(4));
        assert_eq!(rep.parameter("s"), Some(1));
    }
}
