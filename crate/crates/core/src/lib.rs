//! Exact-counting machinery for GAP-UNSAT verification.
//!
//! The crate builds up, layer by layer, everything needed to run a
//! counting-based unsatisfiability verifier on Boolean circuits:
//!
//! * [`circuit`] — a DAG circuit representation with single-assignment and
//!   bitsliced evaluation, plus the closure operations (negation, binary
//!   AND, parities, constants) the rest of the crate composes with.
//! * [`symrep`] — exact-majority circuits, their rewrite into signed sums
//!   of subcircuits, and the expansion of sparse symmetric functions into
//!   exact majorities of small ANDs.
//! * [`codec`] — random linear codes with brute-force verified minimum
//!   distance.
//! * [`cnf`] — the circuit-to-3-SAT reduction over an encoded input copy,
//!   serial repetition of clause groups, and exact (group-aware) MAX-SAT.
//! * [`gis`] — the clause-group-to-vertex independent-set reduction with
//!   per-vertex codeword constraints, and an exact solver for it.
//! * [`counting`] — the exact #SAT oracle (bitsliced enumeration) and
//!   signed-sum counting for sum circuits.
//! * [`amplify`] — a seeded hitting-set generator (walk on a verified
//!   circulant expander) and the OR-composition that widens the gap of a
//!   GAP-UNSAT instance.
//! * [`verifier`] — parameter planning, honest witness construction, the
//!   three counting phases, and the end-to-end prove/verify drivers.
//!
//! Everything is deterministic given explicit seeds, and all counts are
//! exact integers (`i128`/`u128`; magnitudes stay far below 2^127 for the
//! input budgets enforced at each entry point).

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod amplify;
pub mod circuit;
pub mod cnf;
pub mod codec;
pub mod counting;
pub mod gis;
pub mod rng;
pub mod symrep;
pub mod verifier;

pub use circuit::{Circuit, CircuitBuilder, CircuitError, Gate, GateId, TruthSlice};
pub use cnf::{CnfInstance, PartialAssignment, RepeatMode, WitnessExtractor};
pub use codec::LinearCode;
pub use counting::CountResult;
pub use gis::{GisInstance, Label, VertexLabeling};
pub use symrep::{EmajCircuit, Sign, SparseSymmetric, SumCircuit};
pub use verifier::{Decision, ParameterPlan, Verdict, Witness};
