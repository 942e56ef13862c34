//! Cross-validation of the solvers against brute-force re-implementations
//! and against each other on seeded random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shmv_core::bits::SmallSet;
use shmv_core::dp::{
    DpConfig, SaturationNode, compute_table, explicit_node_reachable, explicit_reach_table,
    solve_lcr_dp, solve_lcr_dp_with,
};
use shmv_core::model::{
    Certificate, LcrInstance, MemoryOp, Program, Thread, Transition, successors,
};
use shmv_core::oracles::lcr_explicit_bfs;
use shmv_core::sample::{random_lcr, random_lcr_multi};
use shmv_core::scc::{count_scc_candidates, scc_depth, solve_lcr_scc};
use shmv_core::witness::{
    WitnessCandidate, WitnessLetter, check_validity, enumerate_valid_witnesses, first_write_sets,
    loop_letters, solve_lcr_witness,
};

// ---------------------------------------------------------------------------
// Witness enumeration vs. exhaustive shape enumeration
// ---------------------------------------------------------------------------

/// Every block of up to |Q_L| (state, symbol-or-⊥) pairs without a repeated
/// state, built breadth-first.
fn all_blocks(inst: &LcrInstance) -> Vec<Vec<WitnessLetter>> {
    let nq = inst.leader.len();
    let ops: Vec<WitnessLetter> = std::iter::once(WitnessLetter::Bottom)
        .chain((0..inst.domain.len()).map(WitnessLetter::Symbol))
        .collect();
    let mut out = vec![Vec::new()];
    let mut frontier: Vec<(Vec<WitnessLetter>, SmallSet)> = vec![(Vec::new(), SmallSet::EMPTY)];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (block, used) in frontier {
            if used.len() == nq {
                continue;
            }
            for q in 0..nq {
                if used.contains(q) {
                    continue;
                }
                for &op in &ops {
                    let mut b2 = block.clone();
                    b2.push(WitnessLetter::State(q));
                    b2.push(op);
                    out.push(b2.clone());
                    next.push((b2, used.with(q)));
                }
            }
        }
        frontier = next;
    }
    out
}

/// Every shape-conforming candidate: blocks separated by first-writes (bar
/// symbols may repeat here; the validity check rejects those), closed by a
/// final leader state.
fn all_shape_candidates(inst: &LcrInstance) -> Vec<WitnessCandidate> {
    let blocks = all_blocks(inst);
    let d = inst.domain.len();
    let nq = inst.leader.len();
    let mut prefixes: Vec<Vec<WitnessLetter>> = vec![Vec::new()];
    let mut all_prefixes = prefixes.clone();
    for _ in 0..d {
        let mut next = Vec::new();
        for p in &prefixes {
            for block in &blocks {
                for a in 0..d {
                    let mut w = p.clone();
                    w.extend_from_slice(block);
                    w.push(WitnessLetter::FirstWrite(a));
                    next.push(w);
                }
            }
        }
        all_prefixes.extend(next.iter().cloned());
        prefixes = next;
    }
    let mut out = Vec::new();
    for p in &all_prefixes {
        for block in &blocks {
            for q in 0..nq {
                let mut letters = p.clone();
                letters.extend_from_slice(block);
                letters.push(WitnessLetter::State(q));
                out.push(WitnessCandidate { letters });
            }
        }
    }
    out
}

#[test]
fn pruned_witness_enumeration_matches_exhaustive_filtering() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..10 {
        let inst = random_lcr(&mut rng, 2, 3, 1);
        let mut brute: Vec<Vec<String>> = all_shape_candidates(&inst)
            .into_iter()
            .filter(|w| check_validity(w, &inst).is_ok())
            .map(|w| w.to_tokens(&inst))
            .collect();
        let mut pruned: Vec<Vec<String>> = enumerate_valid_witnesses(&inst, 50_000_000)
            .unwrap()
            .into_iter()
            .map(|w| w.to_tokens(&inst))
            .collect();
        brute.sort();
        brute.dedup();
        pruned.sort();
        assert_eq!(pruned, brute, "on {:?}", inst);
    }
}

#[test]
fn every_enumerated_witness_has_monotone_first_write_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..20 {
        let inst = random_lcr(&mut rng, 2, 3, 1);
        for w in enumerate_valid_witnesses(&inst, 50_000_000).unwrap() {
            let sets = first_write_sets(&w.letters);
            for pair in sets.windows(2) {
                assert!(pair[0].is_subset(pair[1]));
            }
            if let Some(last) = sets.last() {
                assert!(last.len() <= inst.domain.len());
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Loop(q, S) vs. a step-bounded walk oracle
// ---------------------------------------------------------------------------

/// States reachable from `from` by walks of at most |Q| steps whose reads
/// stay in `reads`, via |Q| rounds of one-step expansion.
fn walk_reach(leader: &Thread, from: usize, reads: SmallSet) -> SmallSet {
    let mut reach = SmallSet::singleton(from);
    for _ in 0..leader.len() {
        let mut next = reach;
        for tr in leader.transitions() {
            let enabled = match tr.op {
                MemoryOp::Read(a) => reads.contains(a),
                _ => true,
            };
            if enabled && reach.contains(tr.from) {
                next = next.with(tr.to);
            }
        }
        reach = next;
    }
    reach
}

#[test]
fn loop_letters_agrees_with_walk_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    for _ in 0..100 {
        let inst = random_lcr(&mut rng, 4, 2, 3);
        let leader = &inst.leader;
        let d = inst.domain.len();
        for q in 0..leader.len() {
            for mask in 0u64..(1 << d) {
                let reads = SmallSet(mask);
                let mut expected = SmallSet::EMPTY;
                let from_q = walk_reach(leader, q, reads);
                for tr in leader.transitions() {
                    if let MemoryOp::Write(a) = tr.op {
                        if from_q.contains(tr.from)
                            && walk_reach(leader, tr.to, reads).contains(q)
                        {
                            expected = expected.with(a);
                        }
                    }
                }
                assert_eq!(loop_letters(leader, q, reads), expected);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Subset DP vs. the explicit saturation graph
// ---------------------------------------------------------------------------

#[test]
fn dp_table_matches_explicit_table_line_for_line() {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    for _ in 0..120 {
        let inst = random_lcr(&mut rng, 4, 4, 3);
        let dp = compute_table(&inst).unwrap().to_lines();
        let explicit = explicit_reach_table(&inst).unwrap().to_lines();
        assert_eq!(dp, explicit, "on {:?}", inst);
    }
}

#[test]
fn nonempty_table_entries_contain_the_contributor_initial_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(113);
    for _ in 0..60 {
        let inst = random_lcr(&mut rng, 4, 4, 3);
        let init = inst.solving_contributor().initial();
        let table = compute_table(&inst).unwrap();
        for (&mask, pairs) in &table.entries {
            if !pairs.is_empty() {
                assert!(mask & (1 << init) != 0);
            }
        }
    }
}

#[test]
fn dp_certificates_saturate_monotonically_and_replay_explicitly() {
    let mut rng = ChaCha8Rng::seed_from_u64(127);
    let config = DpConfig {
        certificates: true,
        ..DpConfig::default()
    };
    let mut reachable = 0;
    for _ in 0..150 {
        let inst = random_lcr(&mut rng, 4, 4, 3);
        let verdict = solve_lcr_dp_with(&inst, &config).unwrap();
        if !verdict.reachable {
            continue;
        }
        reachable += 1;
        let steps = match verdict.certificate {
            Some(Certificate::Saturation(steps)) => steps,
            other => panic!("expected a saturation certificate, got {other:?}"),
        };
        let init = inst.solving_contributor().initial();
        let mut set = SmallSet::singleton(init);
        for step in &steps {
            // strictly growing contributor set along the certificate
            assert!(!set.contains(step.added));
            set = set.with(step.added);
            let node = SaturationNode {
                leader: step.leader,
                memory: step.memory,
                set,
            };
            assert!(explicit_node_reachable(&inst, node).unwrap());
        }
    }
    assert!(reachable > 10, "sampler produced too few reachable instances");
}

// ---------------------------------------------------------------------------
// SCC solver: depth bounds, candidate-count bound, witness equivalence
// ---------------------------------------------------------------------------

fn repetition_free_words(d: usize) -> Vec<Vec<usize>> {
    fn rec(d: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(prefix.clone());
        for a in 0..d {
            if prefix.contains(&a) {
                continue;
            }
            prefix.push(a);
            rec(d, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, &mut Vec::new(), &mut out);
    out
}

#[test]
fn scc_depth_is_bounded_by_states_times_levels() {
    let mut rng = ChaCha8Rng::seed_from_u64(131);
    for _ in 0..80 {
        let inst = random_lcr(&mut rng, 4, 2, 3);
        for r in repetition_free_words(inst.domain.len()) {
            // scc_depth also asserts acyclicity of the layered graph
            let (_, depth) = scc_depth(&inst.leader, &r);
            assert!(depth <= inst.leader.len() * (r.len() + 1));
        }
    }
}

#[test]
fn strongly_connected_leader_collapses_the_candidate_space() {
    // A leader that is strongly connected with writes and ε alone: every
    // restriction level has a single SCC, so d(r) = 1 for every r.
    let domain = vec!["a0".to_string(), "x".to_string(), "y".to_string()];
    let t = |from, op, to| Transition { from, op, to };
    let leader = Thread::new(
        "leader",
        vec!["q0".into(), "q1".into(), "q2".into()],
        0,
        vec![
            t(0, MemoryOp::Write(1), 1),
            t(1, MemoryOp::Write(2), 2),
            t(2, MemoryOp::Epsilon, 0),
        ],
        domain.len(),
    )
    .unwrap();
    let contributor = Thread::new(
        "contributor",
        vec!["p0".into(), "p1".into()],
        0,
        vec![t(0, MemoryOp::Read(1), 1), t(1, MemoryOp::Write(2), 1)],
        domain.len(),
    )
    .unwrap();
    let inst = LcrInstance {
        domain,
        init_symbol: 0,
        leader,
        contributors: vec![contributor],
        unsafe_states: std::collections::BTreeSet::from([2]),
    };
    for r in repetition_free_words(inst.domain.len()) {
        assert_eq!(scc_depth(&inst.leader, &r).1, 1);
    }
    // candidate space bound (D+1)^d · D^D · 2^(D+d) with d = 1, D = 3
    let d_sym = inst.domain.len() as u64;
    let bound = (d_sym + 1) * d_sym.pow(d_sym as u32) * 2u64.pow((d_sym + 1) as u32);
    let count = count_scc_candidates(&inst, 50_000_000).unwrap();
    assert!(count <= bound, "{count} > {bound}");
}

#[test]
fn scc_and_witness_solvers_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(137);
    for _ in 0..150 {
        let inst = random_lcr(&mut rng, 3, 3, 2);
        let w = solve_lcr_witness(&inst).unwrap().reachable;
        let s = solve_lcr_scc(&inst).unwrap().reachable;
        assert_eq!(w, s, "on {:?}", inst);
    }
}

// ---------------------------------------------------------------------------
// Multi-template merging vs. the explicit multi-copy oracle
// ---------------------------------------------------------------------------

#[test]
fn merged_templates_match_the_multi_template_bfs() {
    let mut rng = ChaCha8Rng::seed_from_u64(139);
    for _ in 0..60 {
        let inst = random_lcr_multi(&mut rng, 3, 2, 2, 2);
        let dp = solve_lcr_dp(&inst).unwrap().reachable;
        let mut seen = false;
        for t in 0..=8 {
            let now = lcr_explicit_bfs(&inst, t).unwrap();
            assert!(now || !seen, "copycat monotonicity violated at t={t}");
            seen = seen || now;
        }
        assert_eq!(dp, seen, "on {:?}", inst);
    }
}

// ---------------------------------------------------------------------------
// Semantics: monotonicity in δ and read-enabledness
// ---------------------------------------------------------------------------

fn random_walk(rng: &mut impl Rng, program: &Program, steps: usize) -> Vec<shmv_core::model::Configuration> {
    let mut configs = vec![program.initial_configuration()];
    for _ in 0..steps {
        let succ = successors(program, configs.last().unwrap());
        if succ.is_empty() {
            break;
        }
        let (next, _, _) = succ[rng.gen_range(0..succ.len())].clone();
        configs.push(next);
    }
    configs
}

#[test]
fn successors_are_monotone_in_the_transition_relation() {
    let mut rng = ChaCha8Rng::seed_from_u64(149);
    for _ in 0..100 {
        let inst = random_lcr(&mut rng, 4, 4, 3);
        let program = Program {
            domain: inst.domain.clone(),
            init_symbol: inst.init_symbol,
            threads: vec![inst.leader.clone(), inst.contributors[0].clone()],
        };
        let configs = random_walk(&mut rng, &program, 5);
        let which = rng.gen_range(0..program.threads.len());
        let thread = &program.threads[which];
        let extra = Transition {
            from: rng.gen_range(0..thread.len()),
            op: MemoryOp::Write(rng.gen_range(0..program.domain.len())),
            to: rng.gen_range(0..thread.len()),
        };
        let mut bigger = program.clone();
        bigger.threads[which] = thread
            .with_added_transitions(vec![extra], program.domain.len())
            .unwrap();
        for c in &configs {
            let before: Vec<_> = successors(&program, c).into_iter().map(|(c, _, _)| c).collect();
            let after: Vec<_> = successors(&bigger, c).into_iter().map(|(c, _, _)| c).collect();
            for s in &before {
                assert!(after.contains(s));
            }
        }
    }
}

#[test]
fn reads_fire_only_on_matching_memory() {
    let mut rng = ChaCha8Rng::seed_from_u64(151);
    for _ in 0..100 {
        let inst = random_lcr(&mut rng, 4, 4, 3);
        let program = Program {
            domain: inst.domain.clone(),
            init_symbol: inst.init_symbol,
            threads: vec![inst.leader.clone(), inst.contributors[0].clone()],
        };
        for c in random_walk(&mut rng, &program, 6) {
            for (next, _, op) in successors(&program, &c) {
                match op {
                    MemoryOp::Read(a) => {
                        assert_eq!(c.memory, a);
                        assert_eq!(next.memory, a);
                    }
                    MemoryOp::Write(a) => assert_eq!(next.memory, a),
                    MemoryOp::Epsilon => assert_eq!(next.memory, c.memory),
                }
            }
        }
    }
}
