//! Circuit-to-CNF reduction over an encoded input copy, serial repetition
//! of clause groups, and exact satisfiability tooling.
//!
//! [`circuit_to_csp`] encodes "the circuit outputs 0" over variables
//! `Y ∪ Z`: `Y` holds a claimed codeword, `Z` holds an input copy, the
//! gate values, and the parity-chain scratch variables that tie every
//! codeword bit to the input copy. When the circuit rejects the decoded
//! input, the extractor's assignment satisfies everything; when it
//! accepts, the output unit clause pins down a contradiction, so every
//! completion falsifies at least one of the `m` clauses.
//!
//! [`serial_repeat`] replaces the clause set by groups of `k` clauses
//! (one group per `k`-tuple); a group counts as satisfied only when all
//! of its members are. [`maxsat`] and [`decide_sat`] are the exact
//! reference solvers over those group semantics.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::circuit::{Circuit, Gate};
use crate::codec::LinearCode;
use crate::rng::SplitMix64;

/// A literal: positive or negative 1-based variable index.
pub type Lit = i32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CnfError {
    EmptyClause,
    LitOutOfRange { lit: Lit, vars: u32 },
    UngroupedClause { clause: u32 },
    DoublyGroupedClause { clause: u32 },
    EmptyInstance,
    BadRepetition { k: u32 },
    /// Tuple enumeration or completion enumeration would exceed a budget.
    BudgetExceeded { needed: u128, budget: u128 },
    /// The code's message length must match the circuit arity.
    CodeArityMismatch { code_n: u32, circuit_n: u32 },
    ExtractArity { expected: u32, got: u32 },
}

impl fmt::Display for CnfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CnfError::EmptyClause => write!(f, "empty clause"),
            CnfError::LitOutOfRange { lit, vars } => {
                write!(f, "literal {lit} outside 1..={vars}")
            }
            CnfError::UngroupedClause { clause } => write!(f, "clause {clause} not in any group"),
            CnfError::DoublyGroupedClause { clause } => {
                write!(f, "clause {clause} appears in two groups")
            }
            CnfError::EmptyInstance => write!(f, "instance has no clauses"),
            CnfError::BadRepetition { k } => write!(f, "repetition parameter {k} must be >= 1"),
            CnfError::BudgetExceeded { needed, budget } => {
                write!(f, "enumeration needs {needed}, budget {budget}")
            }
            CnfError::CodeArityMismatch { code_n, circuit_n } => {
                write!(f, "code length {code_n} != circuit arity {circuit_n}")
            }
            CnfError::ExtractArity { expected, got } => {
                write!(f, "extractor expected {expected} input bits, got {got}")
            }
        }
    }
}

/// A partial assignment: mapped variables are pinned, unmapped are free.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialAssignment {
    map: BTreeMap<u32, bool>,
}

impl PartialAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, var: u32, value: bool) {
        self.map.insert(var, value);
    }

    pub fn get(&self, var: u32) -> Option<bool> {
        self.map.get(&var).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, bool)> + '_ {
        self.map.iter().map(|(&v, &b)| (v, b))
    }

    /// Pins variables `1..=bits.len()` to the given values (the Y block).
    pub fn from_prefix(bits: &[bool]) -> Self {
        let mut pa = Self::new();
        for (i, &b) in bits.iter().enumerate() {
            pa.set(i as u32 + 1, b);
        }
        pa
    }
}

/// A CNF with an explicit `Y`/`Z` split and clause-group metadata.
/// Variables `1..=y_vars` are `Y`; `y_vars+1..=y_vars+z_vars` are `Z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfInstance {
    pub y_vars: u32,
    pub z_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
    /// Clause indices per group; every clause belongs to exactly one group.
    pub groups: Vec<Vec<u32>>,
    pub clause_width: u32,
}

impl CnfInstance {
    pub fn num_vars(&self) -> u32 {
        self.y_vars + self.z_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn validate(&self) -> Result<(), CnfError> {
        if self.clauses.is_empty() {
            return Err(CnfError::EmptyInstance);
        }
        let vars = self.num_vars();
        for clause in &self.clauses {
            if clause.is_empty() {
                return Err(CnfError::EmptyClause);
            }
            for &lit in clause {
                let v = lit.unsigned_abs();
                if lit == 0 || v > vars {
                    return Err(CnfError::LitOutOfRange { lit, vars });
                }
            }
        }
        let mut seen = vec![false; self.clauses.len()];
        for group in &self.groups {
            for &ci in group {
                let ci = ci as usize;
                if seen[ci] {
                    return Err(CnfError::DoublyGroupedClause { clause: ci as u32 });
                }
                seen[ci] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|&s| !s) {
            return Err(CnfError::UngroupedClause { clause: missing as u32 });
        }
        Ok(())
    }

    /// Builds an ungrouped instance, giving each clause its own group.
    pub fn with_singleton_groups(
        y_vars: u32,
        z_vars: u32,
        clauses: Vec<Vec<Lit>>,
    ) -> Result<Self, CnfError> {
        let groups = (0..clauses.len() as u32).map(|i| vec![i]).collect();
        let clause_width = clauses.iter().map(|c| c.len() as u32).max().unwrap_or(0);
        let inst = CnfInstance { y_vars, z_vars, clauses, groups, clause_width };
        inst.validate()?;
        Ok(inst)
    }

    fn lit_true(lit: Lit, assignment: &[bool]) -> bool {
        let v = lit.unsigned_abs() as usize;
        let val = assignment[v - 1];
        if lit > 0 {
            val
        } else {
            !val
        }
    }

    pub fn clause_satisfied(&self, clause: u32, assignment: &[bool]) -> bool {
        self.clauses[clause as usize].iter().any(|&l| Self::lit_true(l, assignment))
    }

    pub fn group_satisfied(&self, group: u32, assignment: &[bool]) -> bool {
        self.groups[group as usize].iter().all(|&c| self.clause_satisfied(c, assignment))
    }

    /// Number of satisfied groups under a full assignment.
    pub fn satisfied_groups(&self, assignment: &[bool]) -> u64 {
        (0..self.groups.len() as u32).filter(|&g| self.group_satisfied(g, assignment)).count()
            as u64
    }

    /// Number of satisfied clauses under a full assignment.
    pub fn satisfied_clauses(&self, assignment: &[bool]) -> u64 {
        (0..self.clauses.len() as u32).filter(|&c| self.clause_satisfied(c, assignment)).count()
            as u64
    }
}

/// Everything needed to reproduce the satisfying `Z` assignment for an
/// input the circuit rejects: the gate skeleton plus the parity-chain
/// layout, in the exact variable order the reduction emitted.
#[derive(Clone, Debug)]
pub struct WitnessExtractor {
    circuit: Circuit,
    supports: Vec<Vec<u32>>,
    z_vars: u32,
}

impl WitnessExtractor {
    /// The `Z` assignment (input copy, gate values, chain parities) for
    /// input `x`, indexed from the first `Z` variable.
    pub fn extract(&self, x: &[bool]) -> Result<Vec<bool>, CnfError> {
        let n = self.circuit.num_inputs();
        if x.len() != n as usize {
            return Err(CnfError::ExtractArity { expected: n, got: x.len() as u32 });
        }
        let mut z = Vec::with_capacity(self.z_vars as usize);
        z.extend_from_slice(x);
        let mut vals = vec![false; self.circuit.len()];
        self.circuit.eval_into(x, &mut vals);
        z.extend_from_slice(&vals);
        for support in &self.supports {
            if support.len() >= 3 {
                let mut acc = x[support[0] as usize];
                for &j in &support[1..support.len() - 1] {
                    acc ^= x[j as usize];
                    z.push(acc);
                }
            }
        }
        debug_assert_eq!(z.len(), self.z_vars as usize);
        Ok(z)
    }

    /// Full `(Y, Z)` assignment: codeword of `x` followed by `extract(x)`.
    pub fn full_assignment(&self, x: &[bool]) -> Result<Vec<bool>, CnfError> {
        let mut out: Vec<bool> = self
            .supports
            .iter()
            .map(|support| support.iter().fold(false, |acc, &j| acc ^ x[j as usize]))
            .collect();
        out.extend(self.extract(x)?);
        Ok(out)
    }
}

/// Emitted sizes of the reduction, used to cross-check construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CspShape {
    pub y_vars: u32,
    pub z_vars: u32,
    pub clauses: u64,
}

/// Predicted shape of `circuit_to_csp(d, code)` from first principles.
pub fn csp_shape(d: &Circuit, code: &LinearCode) -> CspShape {
    let n = d.num_inputs();
    let gate_clauses: u64 = d
        .gates()
        .iter()
        .map(|g| match g {
            Gate::Const0 | Gate::Const1 => 1u64,
            Gate::Input(_) | Gate::Not(_) => 2,
            Gate::And(..) | Gate::Or(..) => 3,
            Gate::Xor(..) => 4,
        })
        .sum();
    let mut chain_clauses = 0u64;
    let mut chain_aux = 0u64;
    for i in 1..=code.cn() {
        let u = code.support(i).unwrap().len() as u64;
        chain_clauses += match u {
            0 => 1,
            1 => 2,
            _ => 4 * (u - 1),
        };
        chain_aux += u.saturating_sub(2);
    }
    CspShape {
        y_vars: code.cn(),
        z_vars: n + d.len() as u32 + chain_aux as u32,
        clauses: gate_clauses + 1 + chain_clauses,
    }
}

/// Reduces "circuit `d` outputs 0 on the input encoded in `Y`" to CNF.
///
/// `Y` holds the claimed codeword (one variable per codeword bit), `Z`
/// holds an input copy, one value per gate, and the chain parities.
/// Completeness: if `d(x) = 0`, the extractor's assignment satisfies
/// every clause of `F(Y = ENC(x))`. Soundness: if `d(x) = 1`, every `Z`
/// assignment falsifies at least one clause, because satisfied chains
/// force the input copy to decode to `x` (the code is injective) and the
/// satisfied gate clauses then contradict the output unit clause.
pub fn circuit_to_csp(
    d: &Circuit,
    code: &LinearCode,
) -> Result<(CnfInstance, WitnessExtractor), CnfError> {
    let n = d.num_inputs();
    if code.n() != n {
        return Err(CnfError::CodeArityMismatch { code_n: code.n(), circuit_n: n });
    }
    let cn = code.cn();
    let xcopy = |j: u32| -> Lit { (cn + 1 + j) as Lit };
    let gate_var = |g: u32| -> Lit { (cn + n + 1 + g) as Lit };
    let mut next_aux = cn + n + d.len() as u32 + 1;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();

    for (id, gate) in d.gates().iter().enumerate() {
        let vg = gate_var(id as u32);
        match *gate {
            Gate::Const0 => clauses.push(vec![-vg]),
            Gate::Const1 => clauses.push(vec![vg]),
            Gate::Input(j) => {
                let xj = xcopy(j);
                clauses.push(vec![-vg, xj]);
                clauses.push(vec![vg, -xj]);
            }
            Gate::Not(a) => {
                let va = gate_var(a);
                clauses.push(vec![-vg, -va]);
                clauses.push(vec![vg, va]);
            }
            Gate::And(a, b) => {
                let (va, vb) = (gate_var(a), gate_var(b));
                clauses.push(vec![-vg, va]);
                clauses.push(vec![-vg, vb]);
                clauses.push(vec![vg, -va, -vb]);
            }
            Gate::Or(a, b) => {
                let (va, vb) = (gate_var(a), gate_var(b));
                clauses.push(vec![vg, -va]);
                clauses.push(vec![vg, -vb]);
                clauses.push(vec![-vg, va, vb]);
            }
            Gate::Xor(a, b) => {
                let (va, vb) = (gate_var(a), gate_var(b));
                push_xor_def(&mut clauses, vg, va, vb);
            }
        }
    }
    clauses.push(vec![-gate_var(d.output())]);

    let mut supports = Vec::with_capacity(cn as usize);
    for i in 1..=cn {
        let yi = i as Lit;
        let support = code.support(i).expect("index within cn");
        match support.len() {
            0 => clauses.push(vec![-yi]),
            1 => {
                let xj = xcopy(support[0]);
                clauses.push(vec![-yi, xj]);
                clauses.push(vec![yi, -xj]);
            }
            2 => push_xor_def(&mut clauses, yi, xcopy(support[0]), xcopy(support[1])),
            _ => {
                let mut acc = next_aux as Lit;
                next_aux += 1;
                push_xor_def(&mut clauses, acc, xcopy(support[0]), xcopy(support[1]));
                for &j in &support[2..support.len() - 1] {
                    let p = next_aux as Lit;
                    next_aux += 1;
                    push_xor_def(&mut clauses, p, acc, xcopy(j));
                    acc = p;
                }
                push_xor_def(&mut clauses, yi, acc, xcopy(support[support.len() - 1]));
            }
        }
        supports.push(support);
    }

    let z_vars = next_aux - 1 - cn;
    let inst = CnfInstance::with_singleton_groups(cn, z_vars, clauses)?;
    let extractor = WitnessExtractor { circuit: d.clone(), supports, z_vars };
    Ok((inst, extractor))
}

fn push_xor_def(clauses: &mut Vec<Vec<Lit>>, o: Lit, a: Lit, b: Lit) {
    clauses.push(vec![-o, a, b]);
    clauses.push(vec![-o, -a, -b]);
    clauses.push(vec![o, -a, b]);
    clauses.push(vec![o, a, -b]);
}

/// Tuple selection mode for serial repetition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RepeatMode {
    /// Every `k`-tuple of clause indices, lexicographic order.
    AllTuples,
    /// `count` tuples drawn from a seeded generator.
    Sampled { seed: u64, count: u64 },
}

#[derive(Clone, Debug)]
pub struct RepeatBudget {
    pub max_groups: u128,
}

impl Default for RepeatBudget {
    fn default() -> Self {
        Self { max_groups: 2_000_000 }
    }
}

/// Serial repetition: each output group is the conjunction of `k` base
/// clauses, emitted as its `k` member clauses sharing a group id. In
/// `AllTuples` mode a full assignment satisfying `s` of the `m` base
/// clauses satisfies exactly `(s/m)^k` of the groups.
pub fn serial_repeat(
    f: &CnfInstance,
    k: u32,
    mode: RepeatMode,
    budget: &RepeatBudget,
) -> Result<CnfInstance, CnfError> {
    if k == 0 {
        return Err(CnfError::BadRepetition { k });
    }
    f.validate()?;
    let m = f.clauses.len() as u128;
    let mut clauses = Vec::new();
    let mut groups = Vec::new();
    let emit = |tuple: &[usize], clauses: &mut Vec<Vec<Lit>>, groups: &mut Vec<Vec<u32>>| {
        let start = clauses.len() as u32;
        for &ci in tuple {
            clauses.push(f.clauses[ci].clone());
        }
        groups.push((start..start + k).collect());
    };
    match mode {
        RepeatMode::AllTuples => {
            let total = m.checked_pow(k).ok_or(CnfError::BudgetExceeded {
                needed: u128::MAX,
                budget: budget.max_groups,
            })?;
            if total > budget.max_groups {
                return Err(CnfError::BudgetExceeded { needed: total, budget: budget.max_groups });
            }
            let mut tuple = vec![0usize; k as usize];
            loop {
                emit(&tuple, &mut clauses, &mut groups);
                // lexicographic odometer, most significant digit first
                let mut pos = k as usize;
                loop {
                    if pos == 0 {
                        return finish_repeat(f, clauses, groups);
                    }
                    pos -= 1;
                    tuple[pos] += 1;
                    if tuple[pos] < m as usize {
                        break;
                    }
                    tuple[pos] = 0;
                }
            }
        }
        RepeatMode::Sampled { seed, count } => {
            if count as u128 > budget.max_groups {
                return Err(CnfError::BudgetExceeded {
                    needed: count as u128,
                    budget: budget.max_groups,
                });
            }
            let mut rng = SplitMix64::new(seed);
            let mut tuple = vec![0usize; k as usize];
            for _ in 0..count {
                for slot in tuple.iter_mut() {
                    *slot = rng.index(m as usize);
                }
                emit(&tuple, &mut clauses, &mut groups);
            }
            finish_repeat(f, clauses, groups)
        }
    }
}

fn finish_repeat(
    f: &CnfInstance,
    clauses: Vec<Vec<Lit>>,
    groups: Vec<Vec<u32>>,
) -> Result<CnfInstance, CnfError> {
    let out = CnfInstance {
        y_vars: f.y_vars,
        z_vars: f.z_vars,
        clause_width: f.clause_width,
        clauses,
        groups,
    };
    out.validate()?;
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct MaxSatBudget {
    pub max_free_vars: u32,
}

impl Default for MaxSatBudget {
    fn default() -> Self {
        Self { max_free_vars: 20 }
    }
}

/// Exact maximum number of satisfiable groups of `f` under any completion
/// of `τ`, by exhaustive enumeration of the free variables. Clauses
/// falsified by `τ` stay in place and count against their group.
pub fn maxsat(
    f: &CnfInstance,
    tau: &PartialAssignment,
    budget: &MaxSatBudget,
) -> Result<u64, CnfError> {
    f.validate()?;
    let vars = f.num_vars();
    let free: Vec<u32> = (1..=vars).filter(|v| tau.get(*v).is_none()).collect();
    if free.len() as u32 > budget.max_free_vars {
        return Err(CnfError::BudgetExceeded {
            needed: 1u128 << free.len().min(127),
            budget: 1u128 << budget.max_free_vars,
        });
    }
    let mut assignment = vec![false; vars as usize];
    for (v, b) in tau.iter() {
        if v >= 1 && v <= vars {
            assignment[(v - 1) as usize] = b;
        }
    }
    let mut best = 0u64;
    for pattern in 0..(1u64 << free.len()) {
        for (pos, &v) in free.iter().enumerate() {
            assignment[(v - 1) as usize] = (pattern >> pos) & 1 == 1;
        }
        best = best.max(f.satisfied_groups(&assignment));
        if best == f.groups.len() as u64 {
            break;
        }
    }
    Ok(best)
}

/// Complete SAT decision for `f` under `τ` (all clauses must hold), by
/// unit propagation and branching. Exact; intended for the modest
/// instances this crate produces.
pub fn decide_sat(f: &CnfInstance, tau: &PartialAssignment) -> bool {
    let vars = f.num_vars() as usize;
    let mut assign: Vec<Option<bool>> = vec![None; vars];
    for (v, b) in tau.iter() {
        if v >= 1 && v as usize <= vars {
            assign[(v - 1) as usize] = Some(b);
        }
    }
    dpll(f, &mut assign)
}

fn dpll(f: &CnfInstance, assign: &mut Vec<Option<bool>>) -> bool {
    let mut trail: Vec<u32> = Vec::new();
    // unit propagation to fixpoint
    loop {
        let mut changed = false;
        for clause in &f.clauses {
            let mut unassigned: Option<Lit> = None;
            let mut satisfied = false;
            let mut unassigned_count = 0;
            for &lit in clause {
                let v = (lit.unsigned_abs() - 1) as usize;
                match assign[v] {
                    Some(val) => {
                        if val == (lit > 0) {
                            satisfied = true;
                            break;
                        }
                    }
                    None => {
                        unassigned_count += 1;
                        unassigned = Some(lit);
                    }
                }
            }
            if satisfied {
                continue;
            }
            match unassigned_count {
                0 => {
                    for &v in &trail {
                        assign[v as usize] = None;
                    }
                    return false;
                }
                1 => {
                    let lit = unassigned.unwrap();
                    let v = (lit.unsigned_abs() - 1) as usize;
                    assign[v] = Some(lit > 0);
                    trail.push(v as u32);
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            break;
        }
    }
    let branch = assign.iter().position(|a| a.is_none());
    let result = match branch {
        None => true,
        Some(v) => {
            let mut ok = false;
            for val in [false, true] {
                assign[v] = Some(val);
                if dpll(f, assign) {
                    ok = true;
                    break;
                }
                assign[v] = None;
            }
            if !ok {
                assign[v] = None;
            }
            ok
        }
    };
    if !result {
        for &v in &trail {
            assign[v as usize] = None;
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{self, CircuitBuilder};
    use crate::codec::{build_code, CodeParams};

    fn bits(index: u64, n: u32) -> Vec<bool> {
        (0..n).map(|k| (index >> k) & 1 == 1).collect()
    }

    fn and_gate_circuit() -> Circuit {
        let mut b = CircuitBuilder::new(2);
        let x0 = b.input(0);
        let x1 = b.input(1);
        let out = b.and(x0, x1);
        b.finish(out)
    }

    fn assignment_under(
        f: &CnfInstance,
        y: &[bool],
        z: &[bool],
    ) -> Vec<bool> {
        let mut a = Vec::with_capacity(f.num_vars() as usize);
        a.extend_from_slice(y);
        a.extend_from_slice(z);
        a
    }

    #[test]
    fn const0_is_complete_for_every_input() {
        let d = circuit::all_zeros(3);
        let code = build_code(3, 0, &CodeParams::default()).unwrap();
        let (f, ext) = circuit_to_csp(&d, &code).unwrap();
        for a in 0..8u64 {
            let x = bits(a, 3);
            let y = code.encode(&x).unwrap();
            let z = ext.extract(&x).unwrap();
            let full = assignment_under(&f, &y, &z);
            assert_eq!(f.satisfied_clauses(&full), f.num_clauses() as u64);
        }
    }

    #[test]
    fn and_circuit_soundness_brute_force() {
        // d = AND(x0, x1), x = (1,1): every Z completion falsifies a clause
        let d = and_gate_circuit();
        let params = CodeParams { c: 2, ..CodeParams::default() };
        let code = build_code(2, 0, &params).unwrap();
        let (f, _) = circuit_to_csp(&d, &code).unwrap();
        let x = [true, true];
        let y = code.encode(&x).unwrap();
        assert!(f.z_vars <= 16, "test keeps Z enumerable");
        for zpat in 0..(1u64 << f.z_vars) {
            let z = bits(zpat, f.z_vars);
            let full = assignment_under(&f, &y, &z);
            assert!(
                f.satisfied_clauses(&full) < f.num_clauses() as u64,
                "some Z assignment satisfied everything"
            );
        }
    }

    #[test]
    fn completeness_and_soundness_small_corpus() {
        let mut rng = crate::rng::SplitMix64::new(0x1c);
        let params = CodeParams { c: 2, row_weight: Some(2), ..CodeParams::default() };
        for trial in 0..12 {
            let n = 2 + rng.below(3) as u32;
            let d = {
                let mut gates: Vec<Gate> = (0..n).map(Gate::Input).collect();
                for _ in 0..rng.below(8) {
                    let len = gates.len() as u32;
                    let a = rng.below(len as u64) as u32;
                    let b = rng.below(len as u64) as u32;
                    gates.push(match rng.below(4) {
                        0 => Gate::Not(a),
                        1 => Gate::And(a, b),
                        2 => Gate::Or(a, b),
                        _ => Gate::Xor(a, b),
                    });
                }
                Circuit::new(n, gates.clone(), (gates.len() - 1) as u32).unwrap()
            };
            let code = build_code(n, trial, &params).unwrap();
            let (f, ext) = circuit_to_csp(&d, &code).unwrap();
            for a in 0..(1u64 << n) {
                let x = bits(a, n);
                let y = code.encode(&x).unwrap();
                let tau = PartialAssignment::from_prefix(&y);
                if !d.evaluate(&x).unwrap() {
                    let z = ext.extract(&x).unwrap();
                    let full = assignment_under(&f, &y, &z);
                    assert_eq!(f.satisfied_clauses(&full), f.num_clauses() as u64);
                } else {
                    assert!(!decide_sat(&f, &tau), "trial {trial}: expected unsat at x={a}");
                }
            }
        }
    }

    #[test]
    fn emitted_shape_matches_formula() {
        // single-input identity circuit over a 1-bit message
        let d = Circuit::new(1, vec![Gate::Input(0)], 0).unwrap();
        let code = build_code(1, 0, &CodeParams::default()).unwrap();
        let (f, _) = circuit_to_csp(&d, &code).unwrap();
        let shape = csp_shape(&d, &code);
        assert_eq!(shape.y_vars, f.y_vars);
        assert_eq!(shape.z_vars, f.z_vars);
        assert_eq!(shape.clauses, f.num_clauses() as u64);
        // and for a richer circuit
        let d2 = and_gate_circuit();
        let code2 = build_code(2, 1, &CodeParams::default()).unwrap();
        let (f2, _) = circuit_to_csp(&d2, &code2).unwrap();
        let shape2 = csp_shape(&d2, &code2);
        assert_eq!(shape2.z_vars, f2.z_vars);
        assert_eq!(shape2.clauses, f2.num_clauses() as u64);
        assert!(f2.clause_width <= 3);
        assert!(f2.clauses.iter().all(|c| c.len() <= 3));
    }

    fn tiny_instance(clauses: Vec<Vec<Lit>>, vars: u32) -> CnfInstance {
        CnfInstance::with_singleton_groups(0, vars, clauses).unwrap()
    }

    #[test]
    fn repeat_preserves_satisfying_assignments() {
        let f = tiny_instance(vec![vec![1, 2], vec![-1, 3], vec![2, -3]], 3);
        let rep = serial_repeat(&f, 2, RepeatMode::AllTuples, &RepeatBudget::default()).unwrap();
        assert_eq!(rep.num_groups(), 9);
        for a in 0..8u64 {
            let full = bits(a, 3);
            if f.satisfied_clauses(&full) == 3 {
                assert_eq!(rep.satisfied_groups(&full), 9);
            }
        }
    }

    #[test]
    fn repeat_two_clauses_cubed() {
        // m = 2, k = 3: an assignment satisfying one clause hits 1/8 of groups
        let f = tiny_instance(vec![vec![1], vec![-1]], 1);
        let rep = serial_repeat(&f, 3, RepeatMode::AllTuples, &RepeatBudget::default()).unwrap();
        assert_eq!(rep.num_groups(), 8);
        assert_eq!(rep.satisfied_groups(&[true]), 1);
        assert_eq!(rep.satisfied_groups(&[false]), 1);
    }

    #[test]
    fn repeat_fraction_is_exact_power() {
        let mut rng = crate::rng::SplitMix64::new(0xaa);
        for _ in 0..20 {
            let vars = 2 + rng.below(4) as u32;
            let m = 2 + rng.below(5) as usize;
            let clauses: Vec<Vec<Lit>> = (0..m)
                .map(|_| {
                    let w = 1 + rng.below(3) as usize;
                    (0..w)
                        .map(|_| {
                            let v = 1 + rng.below(vars as u64) as Lit;
                            if rng.next_bool() {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect()
                })
                .collect();
            let f = tiny_instance(clauses, vars);
            for k in 1..=3u32 {
                let rep =
                    serial_repeat(&f, k, RepeatMode::AllTuples, &RepeatBudget::default()).unwrap();
                for a in 0..(1u64 << vars) {
                    let full = bits(a, vars);
                    let s = f.satisfied_clauses(&full);
                    assert_eq!(rep.satisfied_groups(&full), s.pow(k), "s={s} m={m} k={k}");
                }
            }
        }
    }

    #[test]
    fn repeat_is_deterministic() {
        let f = tiny_instance(vec![vec![1, 2], vec![-2, 3], vec![1, -3]], 3);
        let a = serial_repeat(
            &f,
            2,
            RepeatMode::Sampled { seed: 9, count: 20 },
            &RepeatBudget::default(),
        )
        .unwrap();
        let b = serial_repeat(
            &f,
            2,
            RepeatMode::Sampled { seed: 9, count: 20 },
            &RepeatBudget::default(),
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn repeat_budget_error() {
        let f = tiny_instance(vec![vec![1], vec![-1], vec![1]], 1);
        let budget = RepeatBudget { max_groups: 8 };
        assert!(matches!(
            serial_repeat(&f, 2, RepeatMode::AllTuples, &budget),
            Err(CnfError::BudgetExceeded { needed: 9, .. })
        ));
    }

    #[test]
    fn maxsat_single_wide_clause() {
        let f = tiny_instance(vec![vec![1, 2, 3]], 3);
        assert_eq!(maxsat(&f, &PartialAssignment::new(), &MaxSatBudget::default()).unwrap(), 1);
    }

    #[test]
    fn maxsat_contradiction_is_one() {
        let f = tiny_instance(vec![vec![1], vec![-1]], 1);
        assert_eq!(maxsat(&f, &PartialAssignment::new(), &MaxSatBudget::default()).unwrap(), 1);
    }

    /// Independent oracle: branch-and-bound over variables, no shared
    /// code with the enumeration in `maxsat`.
    fn bnb_maxsat(f: &CnfInstance, tau: &PartialAssignment) -> u64 {
        fn recurse(f: &CnfInstance, assign: &mut Vec<Option<bool>>, best: &mut u64) {
            // bound: groups not yet falsified
            let mut upper = 0u64;
            let mut complete = true;
            for group in &f.groups {
                let mut group_alive = true;
                for &ci in group {
                    let clause = &f.clauses[ci as usize];
                    let mut sat = false;
                    let mut open = false;
                    for &lit in clause {
                        match assign[(lit.unsigned_abs() - 1) as usize] {
                            Some(val) => {
                                if val == (lit > 0) {
                                    sat = true;
                                    break;
                                }
                            }
                            None => open = true,
                        }
                    }
                    if !sat {
                        if open {
                            complete = false;
                        } else {
                            group_alive = false;
                            break;
                        }
                    }
                }
                upper += group_alive as u64;
            }
            if upper <= *best {
                return;
            }
            if complete {
                *best = (*best).max(upper);
                return;
            }
            let v = assign.iter().position(|a| a.is_none()).unwrap();
            for val in [false, true] {
                assign[v] = Some(val);
                recurse(f, assign, best);
                assign[v] = None;
            }
        }
        let mut assign: Vec<Option<bool>> = vec![None; f.num_vars() as usize];
        for (v, b) in tau.iter() {
            assign[(v - 1) as usize] = Some(b);
        }
        let mut best = 0;
        recurse(f, &mut assign, &mut best);
        best
    }

    #[test]
    fn maxsat_matches_bnb_oracle() {
        let mut rng = crate::rng::SplitMix64::new(0x7e);
        for _ in 0..25 {
            let vars = 3 + rng.below(6) as u32;
            let m = 3 + rng.below(8) as usize;
            let clauses: Vec<Vec<Lit>> = (0..m)
                .map(|_| {
                    let w = 1 + rng.below(3) as usize;
                    (0..w)
                        .map(|_| {
                            let v = 1 + rng.below(vars as u64) as Lit;
                            if rng.next_bool() {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect()
                })
                .collect();
            let f = tiny_instance(clauses, vars);
            let mut tau = PartialAssignment::new();
            if rng.next_bool() {
                tau.set(1 + rng.below(vars as u64) as u32, rng.next_bool());
            }
            assert_eq!(
                maxsat(&f, &tau, &MaxSatBudget::default()).unwrap(),
                bnb_maxsat(&f, &tau)
            );
        }
    }

    #[test]
    fn decide_sat_agrees_with_maxsat() {
        let mut rng = crate::rng::SplitMix64::new(0x99);
        for _ in 0..25 {
            let vars = 3 + rng.below(5) as u32;
            let m = 3 + rng.below(10) as usize;
            let clauses: Vec<Vec<Lit>> = (0..m)
                .map(|_| {
                    let w = 1 + rng.below(3) as usize;
                    (0..w)
                        .map(|_| {
                            let v = 1 + rng.below(vars as u64) as Lit;
                            if rng.next_bool() {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect()
                })
                .collect();
            let f = tiny_instance(clauses, vars);
            let tau = PartialAssignment::new();
            let sat = decide_sat(&f, &tau);
            let max = maxsat(&f, &tau, &MaxSatBudget::default()).unwrap();
            assert_eq!(sat, max == f.num_groups() as u64);
        }
    }
}
