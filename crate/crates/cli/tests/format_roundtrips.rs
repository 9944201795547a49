//! Property tests for the text formats: printing then parsing is the
//! identity on the structures the formats carry.

use gapunsat_cli::formats::{parse_dimacs, parse_emaj, print_dimacs, print_emaj};
use gapunsat_cli::netlist::{parse_netlist, print_netlist};
use gapunsat_core::circuit::{Circuit, Gate, GateId};
use gapunsat_core::cnf::CnfInstance;
use gapunsat_core::symrep::EmajCircuit;
use proptest::prelude::*;

fn arb_circuit() -> impl Strategy<Value = Circuit> {
    (1u32..=6, proptest::collection::vec((0u8..7, any::<u32>(), any::<u32>()), 1..30)).prop_map(
        |(n, ops)| {
            let mut gates: Vec<Gate> = Vec::new();
            for (op, a, b) in ops {
                let gate = if gates.is_empty() || op >= 5 {
                    match op % 3 {
                        0 => Gate::Const0,
                        1 => Gate::Const1,
                        _ => Gate::Input(a % n),
                    }
                } else {
                    let len = gates.len() as u32;
                    let a = a % len;
                    let b = b % len;
                    match op {
                        0 => Gate::Not(a),
                        1 => Gate::And(a, b),
                        2 => Gate::Or(a, b),
                        3 => Gate::Xor(a, b),
                        _ => Gate::Input(a % n.max(1)),
                    }
                };
                gates.push(gate);
            }
            let out = (gates.len() - 1) as GateId;
            Circuit::new(n, gates, out).unwrap()
        },
    )
}

proptest! {
    #[test]
    fn netlist_roundtrip(c in arb_circuit()) {
        let text = print_netlist(&c);
        let parsed = parse_netlist(&text).unwrap();
        prop_assert_eq!(parsed, c);
    }

    #[test]
    fn emaj_roundtrip(subs in proptest::collection::vec(arb_circuit(), 1..4), u in 0u64..4) {
        // normalize to a shared arity
        let n = subs.iter().map(|c| c.num_inputs()).max().unwrap();
        let subs: Vec<Circuit> = subs
            .into_iter()
            .map(|c| {
                let mut b = gapunsat_core::circuit::CircuitBuilder::new(n);
                let wires: Vec<GateId> = (0..c.num_inputs()).map(|i| b.input(i)).collect();
                let out = b.splice(&c, &wires);
                b.finish(out)
            })
            .collect();
        let u = u.min(subs.len() as u64);
        let e = EmajCircuit::new(subs, u).unwrap();
        let parsed = parse_emaj(&print_emaj(&e)).unwrap();
        prop_assert_eq!(parsed.threshold(), e.threshold());
        prop_assert_eq!(parsed.subcircuits(), e.subcircuits());
    }

    #[test]
    fn dimacs_roundtrip(
        y in 0u32..3,
        z in 1u32..6,
        raw in proptest::collection::vec(proptest::collection::vec((1u32..9, any::<bool>()), 1..4), 1..8),
    ) {
        let vars = y + z;
        let clauses: Vec<Vec<i32>> = raw
            .into_iter()
            .map(|lits| {
                lits.into_iter()
                    .map(|(v, neg)| {
                        let v = (v % vars.max(1)) + 1;
                        if neg { -(v as i32) } else { v as i32 }
                    })
                    .collect()
            })
            .collect();
        let f = CnfInstance::with_singleton_groups(y, z, clauses).unwrap();
        let parsed = parse_dimacs(&print_dimacs(&f)).unwrap();
        prop_assert_eq!(parsed, f);
    }
}
