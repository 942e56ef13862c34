//! Safety verification for shared-memory programs: a leader thread plus
//! arbitrarily many contributor copies communicating through one atomic
//! register (LCR), and a bounded-stage variant for a fixed number of threads
//! (BSR). Four interchangeable LCR deciders (witness enumeration, an
//! SCC-compressed variant, a subset dynamic program and explicit graph
//! search) back each other up, with brute-force oracles and reductions from
//! classic hard problems for cross-checking.

pub mod bits;
pub mod bsr;
pub mod dp;
pub mod generators;
pub mod model;
pub mod oracles;
pub mod sample;
pub mod scc;
pub mod witness;
