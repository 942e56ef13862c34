//! Hand-built example instances and seeded random samplers used by the test
//! suite and the benchmark harness.

use std::collections::BTreeSet;

use rand::Rng;

use crate::model::{
    BsrInstance, LcrInstance, MemoryOp, Program, StateId, Thread, Transition,
};

fn t(from: StateId, op: MemoryOp, to: StateId) -> Transition {
    Transition { from, op, to }
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// The running LCR example: a leader that needs a contributor-provided `a`
/// twice around a write of `b`, and contributors that produce `a` freely but
/// `c` only after observing `b`.
pub fn fig1() -> LcrInstance {
    let domain = vec!["a0".into(), "a".into(), "b".into(), "c".into()];
    let leader = Thread::new(
        "leader",
        names("q", 5),
        0,
        vec![
            t(0, MemoryOp::Read(1), 1),
            t(1, MemoryOp::Write(2), 2),
            t(1, MemoryOp::Epsilon, 2),
            t(2, MemoryOp::Read(3), 3),
            t(3, MemoryOp::Read(1), 4),
        ],
        domain.len(),
    )
    .unwrap();
    let contributor = Thread::new(
        "contributor",
        names("p", 3),
        0,
        vec![
            t(0, MemoryOp::Write(1), 1),
            t(1, MemoryOp::Write(1), 1),
            t(0, MemoryOp::Read(2), 2),
            t(2, MemoryOp::Write(3), 2),
        ],
        domain.len(),
    )
    .unwrap();
    LcrInstance {
        domain,
        init_symbol: 0,
        leader,
        contributors: vec![contributor],
        unsafe_states: BTreeSet::from([4]),
    }
}

/// The subset-saturation example: the leader hands out `a` and then waits for
/// `b` and `c`, which two contributor states produce once both are occupied.
pub fn fig2() -> LcrInstance {
    let domain = vec!["a0".into(), "a".into(), "b".into(), "c".into()];
    let leader = Thread::new(
        "leader",
        names("q", 4),
        0,
        vec![
            t(0, MemoryOp::Write(1), 1),
            t(1, MemoryOp::Read(2), 2),
            t(2, MemoryOp::Read(3), 3),
        ],
        domain.len(),
    )
    .unwrap();
    let contributor = Thread::new(
        "contributor",
        names("p", 3),
        0,
        vec![
            t(0, MemoryOp::Read(1), 1),
            t(1, MemoryOp::Write(3), 1),
            t(0, MemoryOp::Read(1), 2),
            t(2, MemoryOp::Write(2), 0),
        ],
        domain.len(),
    )
    .unwrap();
    LcrInstance {
        domain,
        init_symbol: 0,
        leader,
        contributors: vec![contributor],
        unsafe_states: BTreeSet::from([3]),
    }
}

fn random_op(
    rng: &mut impl Rng,
    domain_len: usize,
    allow_init_read: bool,
) -> MemoryOp {
    loop {
        match rng.gen_range(0..5) {
            0 => return MemoryOp::Epsilon,
            1 | 2 => return MemoryOp::Write(rng.gen_range(0..domain_len)),
            _ => {
                let a = rng.gen_range(0..domain_len);
                if a == 0 && !allow_init_read {
                    continue;
                }
                return MemoryOp::Read(a);
            }
        }
    }
}

fn random_thread(
    rng: &mut impl Rng,
    name: &str,
    prefix: &str,
    max_states: usize,
    domain_len: usize,
    allow_init_read: bool,
) -> Thread {
    let n = rng.gen_range(1..=max_states);
    let mut transitions = Vec::new();
    // Give every non-initial state an incoming transition so all states are
    // defined by the transition list (and survive serialization).
    for q in 1..n {
        transitions.push(t(
            rng.gen_range(0..q),
            random_op(rng, domain_len, allow_init_read),
            q,
        ));
    }
    for q in 0..n {
        for _ in 0..rng.gen_range(0..=3) {
            transitions.push(t(
                q,
                random_op(rng, domain_len, allow_init_read),
                rng.gen_range(0..n),
            ));
        }
    }
    Thread::new(name, names(prefix, n), 0, transitions, domain_len).unwrap()
}

/// A random LCR instance with at most `max_leader` leader states,
/// `max_contrib` contributor states and `max_extra` symbols besides the
/// initial one. The leader never reads the initial symbol, so the sampled
/// instances stay inside the fragment all four solvers agree on.
pub fn random_lcr(
    rng: &mut impl Rng,
    max_leader: usize,
    max_contrib: usize,
    max_extra: usize,
) -> LcrInstance {
    random_lcr_multi(rng, max_leader, max_contrib, max_extra, 1)
}

/// As `random_lcr` but with `templates` contributor templates.
pub fn random_lcr_multi(
    rng: &mut impl Rng,
    max_leader: usize,
    max_contrib: usize,
    max_extra: usize,
    templates: usize,
) -> LcrInstance {
    let d = 1 + rng.gen_range(1..=max_extra);
    let domain: Vec<String> = std::iter::once("a0".to_string())
        .chain((1..d).map(|i| format!("m{i}")))
        .collect();
    let leader = random_thread(rng, "leader", "q", max_leader, d, false);
    let contributors = (0..templates)
        .map(|k| random_thread(rng, &format!("c{k}"), &format!("p{k}x"), max_contrib, d, true))
        .collect();
    let unsafe_q = rng.gen_range(0..leader.len());
    LcrInstance {
        domain,
        init_symbol: 0,
        leader,
        contributors,
        unsafe_states: BTreeSet::from([unsafe_q]),
    }
}

/// A random BSR instance with at most `max_threads` threads of at most
/// `max_states` states each and a random stage bound in `0..=max_stages`.
pub fn random_bsr(
    rng: &mut impl Rng,
    max_threads: usize,
    max_states: usize,
    max_extra: usize,
    max_stages: usize,
) -> BsrInstance {
    let d = 1 + rng.gen_range(1..=max_extra);
    let domain: Vec<String> = std::iter::once("a0".to_string())
        .chain((1..d).map(|i| format!("m{i}")))
        .collect();
    let nthreads = rng.gen_range(1..=max_threads);
    let mut threads = Vec::new();
    let mut target = Vec::new();
    for i in 0..nthreads {
        let thread = random_thread(rng, &format!("t{i}"), &format!("t{i}q"), max_states, d, true);
        // Most threads get a goal state, some are unconstrained.
        if rng.gen_range(0..4) > 0 {
            let q = rng.gen_range(0..thread.len());
            target.push(Some(BTreeSet::from([q])));
        } else {
            target.push(None);
        }
        threads.push(thread);
    }
    BsrInstance {
        program: Program {
            domain,
            init_symbol: 0,
            threads,
        },
        target,
        memory_target: None,
        stages: rng.gen_range(0..=max_stages),
    }
}

/// A synthetic stress instance for the subset DP: 16 contributor states,
/// 6 leader states, 4 symbols. The contributor climbs a read chain whose
/// levels unlock writes that in turn feed the next levels and finally the
/// leader's two reads.
pub fn dp_stress_instance() -> LcrInstance {
    let domain = vec!["a0".into(), "a".into(), "b".into(), "c".into()];
    let d = domain.len();
    let leader = Thread::new(
        "leader",
        names("q", 6),
        0,
        vec![
            t(0, MemoryOp::Write(1), 1),
            t(1, MemoryOp::Write(2), 2),
            t(2, MemoryOp::Write(3), 3),
            t(3, MemoryOp::Read(1), 4),
            t(4, MemoryOp::Read(2), 5),
        ],
        d,
    )
    .unwrap();
    let n = 16;
    let mut transitions = Vec::new();
    for q in 0..n - 1 {
        // Climb on a rotating read symbol, and at every level offer a write
        // of the next rotation so later levels (and the leader) can be fed.
        transitions.push(t(q, MemoryOp::Read(1 + q % 3), q + 1));
        transitions.push(t(q, MemoryOp::Write(1 + (q + 1) % 3), q));
    }
    transitions.push(t(n - 1, MemoryOp::Write(1), n - 1));
    let contributor = Thread::new("contributor", names("p", n), 0, transitions, d).unwrap();
    LcrInstance {
        domain,
        init_symbol: 0,
        leader,
        contributors: vec![contributor],
        unsafe_states: BTreeSet::from([5]),
    }
}
