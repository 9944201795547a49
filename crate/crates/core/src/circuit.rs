//! Boolean circuit DAGs: representation, evaluation, and closure operations.
//!
//! A [`Circuit`] is a gate list in topological order (every operand id is
//! smaller than the gate's own id) with a designated output gate. Inputs
//! are 0-based; assignment index `a` assigns input `k` the value of bit
//! `k` of `a` (input 0 is the least significant bit). That convention is
//! load-bearing: bitsliced evaluation and every counting routine in the
//! crate depend on it bit-exactly.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Index of a gate within a circuit's gate list.
pub type GateId = u32;

/// A single gate. Operands always reference earlier gates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gate {
    Const0,
    Const1,
    /// Reads input wire `i` (0-based, LSB-first in assignment indices).
    Input(u32),
    Not(GateId),
    And(GateId, GateId),
    Or(GateId, GateId),
    Xor(GateId, GateId),
}

impl Gate {
    fn operands(&self) -> (Option<GateId>, Option<GateId>) {
        match *self {
            Gate::Const0 | Gate::Const1 | Gate::Input(_) => (None, None),
            Gate::Not(a) => (Some(a), None),
            Gate::And(a, b) | Gate::Or(a, b) | Gate::Xor(a, b) => (Some(a), Some(b)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CircuitError {
    /// An operand id does not precede the gate that uses it.
    NotTopological { gate: GateId },
    /// An input gate references a wire outside `0..num_inputs`.
    InputOutOfRange { gate: GateId, input: u32 },
    /// The output id does not name a gate.
    BadOutput,
    /// The gate list is empty.
    Empty,
    /// An evaluation was given the wrong number of input bits.
    ArityMismatch { expected: u32, got: u32 },
    /// Two circuits combined by a closure operation disagree on arity.
    IncompatibleArity { left: u32, right: u32 },
    /// A bitslice block base was not word-aligned.
    UnalignedBlock { block_base: u64 },
    /// A parity subset named an input outside the circuit's arity.
    SubsetOutOfRange { index: u32 },
}

impl fmt::Display for CircuitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CircuitError::NotTopological { gate } => {
                write!(f, "gate {gate} references a non-preceding operand")
            }
            CircuitError::InputOutOfRange { gate, input } => {
                write!(f, "gate {gate} reads input x{input} beyond declared arity")
            }
            CircuitError::BadOutput => write!(f, "output id does not name a gate"),
            CircuitError::Empty => write!(f, "circuit has no gates"),
            CircuitError::ArityMismatch { expected, got } => {
                write!(f, "expected {expected} input bits, got {got}")
            }
            CircuitError::IncompatibleArity { left, right } => {
                write!(f, "operand circuits have arities {left} and {right}")
            }
            CircuitError::UnalignedBlock { block_base } => {
                write!(f, "block base {block_base} is not a multiple of 64")
            }
            CircuitError::SubsetOutOfRange { index } => {
                write!(f, "parity subset index {index} out of range")
            }
        }
    }
}

/// One machine word of evaluation results over a contiguous block of
/// assignment indices. Bit `b` of `word` is the circuit's value on
/// assignment `block_base + b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TruthSlice {
    pub block_base: u64,
    pub word: u64,
}

impl TruthSlice {
    /// Assignments per slice word.
    pub const WIDTH: u32 = 64;
}

/// Bit pattern of input `k` over one aligned 64-assignment block.
#[inline]
pub(crate) fn input_slice(k: u32, block_base: u64) -> u64 {
    const PATTERNS: [u64; 6] = [
        0xaaaa_aaaa_aaaa_aaaa,
        0xcccc_cccc_cccc_cccc,
        0xf0f0_f0f0_f0f0_f0f0,
        0xff00_ff00_ff00_ff00,
        0xffff_0000_ffff_0000,
        0xffff_ffff_0000_0000,
    ];
    if k < 6 {
        PATTERNS[k as usize]
    } else if k < 64 && (block_base >> k) & 1 == 1 {
        !0
    } else {
        0
    }
}

/// An immutable gate DAG. Structure is validated on construction, so every
/// held `Circuit` satisfies the topological and arity invariants.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Circuit {
    num_inputs: u32,
    gates: Vec<Gate>,
    output: GateId,
}

impl Circuit {
    pub fn new(num_inputs: u32, gates: Vec<Gate>, output: GateId) -> Result<Self, CircuitError> {
        if gates.is_empty() {
            return Err(CircuitError::Empty);
        }
        if output as usize >= gates.len() {
            return Err(CircuitError::BadOutput);
        }
        for (id, gate) in gates.iter().enumerate() {
            let id = id as GateId;
            if let Gate::Input(i) = gate {
                if *i >= num_inputs {
                    return Err(CircuitError::InputOutOfRange { gate: id, input: *i });
                }
            }
            let (a, b) = gate.operands();
            for op in [a, b].into_iter().flatten() {
                if op >= id {
                    return Err(CircuitError::NotTopological { gate: id });
                }
            }
        }
        Ok(Self { num_inputs, gates, output })
    }

    pub fn num_inputs(&self) -> u32 {
        self.num_inputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Gate count; the size measure used throughout.
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn output(&self) -> GateId {
        self.output
    }

    /// Evaluates the circuit on a single assignment.
    pub fn evaluate(&self, x: &[bool]) -> Result<bool, CircuitError> {
        if x.len() != self.num_inputs as usize {
            return Err(CircuitError::ArityMismatch {
                expected: self.num_inputs,
                got: x.len() as u32,
            });
        }
        let mut vals = vec![false; self.gates.len()];
        self.eval_into(x, &mut vals);
        Ok(vals[self.output as usize])
    }

    /// Evaluates on the assignment encoded by index bits (input k = bit k).
    pub fn evaluate_index(&self, index: u64) -> Result<bool, CircuitError> {
        let x: Vec<bool> = (0..self.num_inputs).map(|k| (index >> k) & 1 == 1).collect();
        self.evaluate(&x)
    }

    pub(crate) fn eval_into(&self, x: &[bool], vals: &mut [bool]) {
        for (id, gate) in self.gates.iter().enumerate() {
            vals[id] = match *gate {
                Gate::Const0 => false,
                Gate::Const1 => true,
                Gate::Input(i) => x[i as usize],
                Gate::Not(a) => !vals[a as usize],
                Gate::And(a, b) => vals[a as usize] & vals[b as usize],
                Gate::Or(a, b) => vals[a as usize] | vals[b as usize],
                Gate::Xor(a, b) => vals[a as usize] ^ vals[b as usize],
            };
        }
    }

    /// Evaluates 64 consecutive assignments at once.
    ///
    /// `block_base` must be a multiple of [`TruthSlice::WIDTH`]; bit `b` of
    /// the result is the value on assignment `block_base + b`, matching
    /// [`Circuit::evaluate_index`] bit for bit.
    pub fn evaluate_bitsliced(&self, block_base: u64) -> Result<TruthSlice, CircuitError> {
        if block_base % TruthSlice::WIDTH as u64 != 0 {
            return Err(CircuitError::UnalignedBlock { block_base });
        }
        let mut words = vec![0u64; self.gates.len()];
        self.eval_block_into(block_base, &mut words);
        Ok(TruthSlice { block_base, word: words[self.output as usize] })
    }

    pub(crate) fn eval_block_into(&self, block_base: u64, words: &mut [u64]) {
        for (id, gate) in self.gates.iter().enumerate() {
            words[id] = match *gate {
                Gate::Const0 => 0,
                Gate::Const1 => !0,
                Gate::Input(i) => input_slice(i, block_base),
                Gate::Not(a) => !words[a as usize],
                Gate::And(a, b) => words[a as usize] & words[b as usize],
                Gate::Or(a, b) => words[a as usize] | words[b as usize],
                Gate::Xor(a, b) => words[a as usize] ^ words[b as usize],
            };
        }
    }
}

/// Semantic negation: same truth table complemented. Grows by one gate.
pub fn negate(c: &Circuit) -> Circuit {
    let mut gates = c.gates.clone();
    gates.push(Gate::Not(c.output));
    let output = (gates.len() - 1) as GateId;
    Circuit { num_inputs: c.num_inputs, gates, output }
}

/// Conjunction of two circuits over the same inputs.
pub fn and2(c1: &Circuit, c2: &Circuit) -> Result<Circuit, CircuitError> {
    if c1.num_inputs != c2.num_inputs {
        return Err(CircuitError::IncompatibleArity { left: c1.num_inputs, right: c2.num_inputs });
    }
    let offset = c1.gates.len() as GateId;
    let mut gates = c1.gates.clone();
    gates.extend(c2.gates.iter().map(|g| shift_gate(*g, offset)));
    gates.push(Gate::And(c1.output, c2.output + offset));
    let output = (gates.len() - 1) as GateId;
    Ok(Circuit { num_inputs: c1.num_inputs, gates, output })
}

/// XOR with a constant: identity for `b = 0`, negation for `b = 1`.
pub fn xor_const(c: &Circuit, b: bool) -> Circuit {
    if b {
        negate(c)
    } else {
        c.clone()
    }
}

/// The constant-1 function on `n` inputs.
pub fn all_ones(n: u32) -> Circuit {
    Circuit { num_inputs: n, gates: vec![Gate::Const1], output: 0 }
}

/// The constant-0 function on `n` inputs.
pub fn all_zeros(n: u32) -> Circuit {
    Circuit { num_inputs: n, gates: vec![Gate::Const0], output: 0 }
}

/// Parity of the input subset `indices` (0-based) on `n` inputs.
/// The empty subset yields the constant 0.
pub fn parity_subset(n: u32, indices: &[u32]) -> Result<Circuit, CircuitError> {
    for &i in indices {
        if i >= n {
            return Err(CircuitError::SubsetOutOfRange { index: i });
        }
    }
    if indices.is_empty() {
        return Ok(all_zeros(n));
    }
    let mut gates = Vec::with_capacity(2 * indices.len());
    gates.push(Gate::Input(indices[0]));
    let mut acc: GateId = 0;
    for &i in &indices[1..] {
        gates.push(Gate::Input(i));
        let inp = (gates.len() - 1) as GateId;
        gates.push(Gate::Xor(acc, inp));
        acc = (gates.len() - 1) as GateId;
    }
    Ok(Circuit { num_inputs: n, gates, output: acc })
}

fn shift_gate(g: Gate, offset: GateId) -> Gate {
    match g {
        Gate::Const0 | Gate::Const1 | Gate::Input(_) => g,
        Gate::Not(a) => Gate::Not(a + offset),
        Gate::And(a, b) => Gate::And(a + offset, b + offset),
        Gate::Or(a, b) => Gate::Or(a + offset, b + offset),
        Gate::Xor(a, b) => Gate::Xor(a + offset, b + offset),
    }
}

/// Incremental circuit construction with constant folding and structural
/// sharing. Identical gates are merged, so composite constructions (walk
/// unrollings, selector trees) stay compact.
pub struct CircuitBuilder {
    num_inputs: u32,
    gates: Vec<Gate>,
    cons: BTreeMap<Gate, GateId>,
}

impl CircuitBuilder {
    pub fn new(num_inputs: u32) -> Self {
        Self { num_inputs, gates: Vec::new(), cons: BTreeMap::new() }
    }

    pub fn num_inputs(&self) -> u32 {
        self.num_inputs
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    fn push(&mut self, g: Gate) -> GateId {
        if let Some(&id) = self.cons.get(&g) {
            return id;
        }
        let id = self.gates.len() as GateId;
        self.gates.push(g);
        self.cons.insert(g, id);
        id
    }

    fn is_const(&self, id: GateId) -> Option<bool> {
        match self.gates[id as usize] {
            Gate::Const0 => Some(false),
            Gate::Const1 => Some(true),
            _ => None,
        }
    }

    pub fn const0(&mut self) -> GateId {
        self.push(Gate::Const0)
    }

    pub fn const1(&mut self) -> GateId {
        self.push(Gate::Const1)
    }

    pub fn constant(&mut self, b: bool) -> GateId {
        if b {
            self.const1()
        } else {
            self.const0()
        }
    }

    pub fn input(&mut self, i: u32) -> GateId {
        assert!(i < self.num_inputs, "input index out of range");
        self.push(Gate::Input(i))
    }

    pub fn not(&mut self, a: GateId) -> GateId {
        match self.is_const(a) {
            Some(v) => self.constant(!v),
            None => {
                // collapse double negation
                if let Gate::Not(inner) = self.gates[a as usize] {
                    return inner;
                }
                self.push(Gate::Not(a))
            }
        }
    }

    pub fn and(&mut self, a: GateId, b: GateId) -> GateId {
        match (self.is_const(a), self.is_const(b)) {
            (Some(false), _) | (_, Some(false)) => self.const0(),
            (Some(true), _) => b,
            (_, Some(true)) => a,
            _ if a == b => a,
            _ => {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                self.push(Gate::And(lo, hi))
            }
        }
    }

    pub fn or(&mut self, a: GateId, b: GateId) -> GateId {
        match (self.is_const(a), self.is_const(b)) {
            (Some(true), _) | (_, Some(true)) => self.const1(),
            (Some(false), _) => b,
            (_, Some(false)) => a,
            _ if a == b => a,
            _ => {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                self.push(Gate::Or(lo, hi))
            }
        }
    }

    pub fn xor(&mut self, a: GateId, b: GateId) -> GateId {
        match (self.is_const(a), self.is_const(b)) {
            (Some(va), Some(vb)) => self.constant(va ^ vb),
            (Some(false), _) => b,
            (_, Some(false)) => a,
            (Some(true), _) => self.not(b),
            (_, Some(true)) => self.not(a),
            _ if a == b => self.const0(),
            _ => {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                self.push(Gate::Xor(lo, hi))
            }
        }
    }

    /// `a == b` as a wire.
    pub fn eq(&mut self, a: GateId, b: GateId) -> GateId {
        let x = self.xor(a, b);
        self.not(x)
    }

    /// Balanced conjunction of many wires; empty input gives constant 1.
    pub fn and_all(&mut self, ids: &[GateId]) -> GateId {
        self.fold_balanced(ids, true)
    }

    /// Balanced disjunction of many wires; empty input gives constant 0.
    pub fn or_all(&mut self, ids: &[GateId]) -> GateId {
        self.fold_balanced(ids, false)
    }

    fn fold_balanced(&mut self, ids: &[GateId], is_and: bool) -> GateId {
        match ids.len() {
            0 => {
                if is_and {
                    self.const1()
                } else {
                    self.const0()
                }
            }
            1 => ids[0],
            n => {
                let (l, r) = ids.split_at(n / 2);
                let lv = self.fold_balanced(l, is_and);
                let rv = self.fold_balanced(r, is_and);
                if is_and {
                    self.and(lv, rv)
                } else {
                    self.or(lv, rv)
                }
            }
        }
    }

    /// Splices `c` into this builder, wiring `c`'s input `k` to
    /// `input_map[k]`. Returns the wire carrying `c`'s output.
    pub fn splice(&mut self, c: &Circuit, input_map: &[GateId]) -> GateId {
        let map = self.splice_all(c, input_map);
        map[c.output as usize]
    }

    /// Like [`CircuitBuilder::splice`], but returns the wire for every
    /// gate of `c`, not just its output. Used when downstream logic taps
    /// internal values (gate-by-gate witnesses).
    pub fn splice_all(&mut self, c: &Circuit, input_map: &[GateId]) -> Vec<GateId> {
        assert_eq!(input_map.len(), c.num_inputs as usize, "splice arity mismatch");
        let mut map: Vec<GateId> = Vec::with_capacity(c.gates.len());
        for gate in &c.gates {
            let id = match *gate {
                Gate::Const0 => self.const0(),
                Gate::Const1 => self.const1(),
                Gate::Input(i) => input_map[i as usize],
                Gate::Not(a) => self.not(map[a as usize]),
                Gate::And(a, b) => self.and(map[a as usize], map[b as usize]),
                Gate::Or(a, b) => self.or(map[a as usize], map[b as usize]),
                Gate::Xor(a, b) => self.xor(map[a as usize], map[b as usize]),
            };
            map.push(id);
        }
        map
    }

    /// Finalizes the builder, retaining only the cone of `output`.
    pub fn finish(self, output: GateId) -> Circuit {
        let (gates, output) = extract_cone(&self.gates, output);
        Circuit { num_inputs: self.num_inputs, gates, output }
    }

    /// Finalizes without dead-gate elimination. Useful when several wires
    /// of the same arena will be addressed later.
    pub fn finish_arena(self, output: GateId) -> Circuit {
        Circuit { num_inputs: self.num_inputs, gates: self.gates, output }
    }
}

fn extract_cone(gates: &[Gate], output: GateId) -> (Vec<Gate>, GateId) {
    let mut live = vec![false; gates.len()];
    live[output as usize] = true;
    for id in (0..=output as usize).rev() {
        if !live[id] {
            continue;
        }
        let (a, b) = gates[id].operands();
        for op in [a, b].into_iter().flatten() {
            live[op as usize] = true;
        }
    }
    let mut remap = vec![GateId::MAX; gates.len()];
    let mut out = Vec::new();
    for (id, gate) in gates.iter().enumerate() {
        if !live[id] {
            continue;
        }
        let g = match *gate {
            Gate::Const0 | Gate::Const1 | Gate::Input(_) => *gate,
            Gate::Not(a) => Gate::Not(remap[a as usize]),
            Gate::And(a, b) => Gate::And(remap[a as usize], remap[b as usize]),
            Gate::Or(a, b) => Gate::Or(remap[a as usize], remap[b as usize]),
            Gate::Xor(a, b) => Gate::Xor(remap[a as usize], remap[b as usize]),
        };
        remap[id] = out.len() as GateId;
        out.push(g);
    }
    let new_output = remap[output as usize];
    (out, new_output)
}

/// Fixes some inputs to constants and renumbers the surviving inputs in
/// ascending original order. The result takes `n - |fixed|` inputs.
pub fn restrict_inputs(c: &Circuit, fixed: &BTreeMap<u32, bool>) -> Result<Circuit, CircuitError> {
    for &i in fixed.keys() {
        if i >= c.num_inputs {
            return Err(CircuitError::SubsetOutOfRange { index: i });
        }
    }
    let mut new_index = vec![0u32; c.num_inputs as usize];
    let mut next = 0u32;
    for i in 0..c.num_inputs {
        if !fixed.contains_key(&i) {
            new_index[i as usize] = next;
            next += 1;
        }
    }
    let mut b = CircuitBuilder::new(next);
    let input_wires: Vec<GateId> = (0..c.num_inputs)
        .map(|i| match fixed.get(&i) {
            Some(&v) => b.constant(v),
            None => b.input(new_index[i as usize]),
        })
        .collect();
    let out = b.splice(c, &input_wires);
    Ok(b.finish(out))
}
