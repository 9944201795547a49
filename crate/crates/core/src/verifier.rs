//! The counting verifier: parameter planning, witness construction, the
//! three counting phases, and the end-to-end drivers.
//!
//! The pipeline turns a base circuit into a generalized independent-set
//! instance (amplify, reduce, repeat, graph-build), and the verifier
//! decides "unsatisfiable" versus "heavily satisfiable" from three exact
//! sums over a claimed selector circuit `R(x, i)`:
//!
//! 1. independence: for every edge `(i1, i2)`,
//!    `sum_x R(x,i1) * R(x,i2)` must vanish;
//! 2. codeword consistency: for every vertex constraint `(j', b)`,
//!    `sum_x (ENC_j'(x) xor b) * R(x,i)` must vanish;
//! 3. the final tally `sum_x sum_i R(x,i)` must reach `2^n * kappa`.
//!
//! A fourth zero-check pins `R` to 0/1 values pointwise; together with
//! the plan's separation inequality that keeps every value-inflated
//! witness below the acceptance threshold at these instance sizes.
//!
//! `R` is never materialized per assignment: all sums are batched
//! product-counting jobs over one shared gate arena, with the vertex
//! index constant-folded away per job.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::amplify::{amplify_gap, log2_ceil, AmplifiedCircuit, AmplifyError, HitterConfig};
use crate::circuit::{Circuit, CircuitBuilder, CircuitError, GateId};
use crate::cnf::{
    circuit_to_csp, serial_repeat, CnfError, CnfInstance, RepeatBudget, RepeatMode,
    WitnessExtractor,
};
use crate::codec::{build_code, CodeError, CodeParams, LinearCode};
use crate::counting::{CountConfig, CountError, ProductJobs, SliceOracle};
use crate::gis::{fglss_build, GisBudget, GisError, GisInstance};
use crate::symrep::{EmajCircuit, SymrepError};

#[derive(Clone, Debug)]
pub enum VerifyError {
    /// Stage provenance wrappers.
    Amplify(AmplifyError),
    Code(CodeError),
    Reduce(CnfError),
    Graph(GisError),
    Count(CountError),
    Symrep(SymrepError),
    Circuit(CircuitError),
    /// The witness does not match the instance's input layout.
    WitnessArity { expected: u32, got: u32 },
    /// No parameter choice separates the two cases within budgets.
    NoFeasiblePlan,
    /// Serial repetition must enumerate all tuples for verification.
    SampledRepetitionUnsupported,
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::Amplify(e) => write!(f, "amplify: {e}"),
            VerifyError::Code(e) => write!(f, "code: {e}"),
            VerifyError::Reduce(e) => write!(f, "reduce: {e}"),
            VerifyError::Graph(e) => write!(f, "graph: {e}"),
            VerifyError::Count(e) => write!(f, "count: {e}"),
            VerifyError::Symrep(e) => write!(f, "witness: {e}"),
            VerifyError::Circuit(e) => write!(f, "circuit: {e}"),
            VerifyError::WitnessArity { expected, got } => {
                write!(f, "witness arity {got}, instance needs {expected}")
            }
            VerifyError::NoFeasiblePlan => write!(f, "no feasible parameter plan"),
            VerifyError::SampledRepetitionUnsupported => {
                write!(f, "verification requires all-tuples repetition")
            }
        }
    }
}

impl From<AmplifyError> for VerifyError {
    fn from(e: AmplifyError) -> Self {
        VerifyError::Amplify(e)
    }
}
impl From<CodeError> for VerifyError {
    fn from(e: CodeError) -> Self {
        VerifyError::Code(e)
    }
}
impl From<CnfError> for VerifyError {
    fn from(e: CnfError) -> Self {
        VerifyError::Reduce(e)
    }
}
impl From<GisError> for VerifyError {
    fn from(e: GisError) -> Self {
        VerifyError::Graph(e)
    }
}
impl From<CountError> for VerifyError {
    fn from(e: CountError) -> Self {
        VerifyError::Count(e)
    }
}
impl From<SymrepError> for VerifyError {
    fn from(e: SymrepError) -> Self {
        VerifyError::Symrep(e)
    }
}
impl From<CircuitError> for VerifyError {
    fn from(e: CircuitError) -> Self {
        VerifyError::Circuit(e)
    }
}

/// Everything the pipeline is allowed to spend.
#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub code: CodeParams,
    pub code_seed: u64,
    pub hitter: HitterConfig,
    /// Amplifier gap parameter.
    pub gap: u64,
    /// Serial repetition count (all-tuples).
    pub repetition: u32,
    pub count: CountConfig,
    pub gis: GisBudget,
    pub repeat: RepeatBudget,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            code: CodeParams { c: 2, delta: (1, 16), row_weight: Some(3), max_retries: 256 },
            code_seed: 0,
            hitter: HitterConfig {
                psi: 2,
                strings_per_seed: Some(4),
                lambda_budget: 0.9999,
                seed: 0,
                max_retries: 512,
            },
            gap: 8,
            repetition: 1,
            count: CountConfig::default(),
            gis: GisBudget::default(),
            repeat: RepeatBudget::default(),
        }
    }
}

/// The parameter bundle tying the stages together, plus the derived
/// quantities the decision rule needs.
#[derive(Clone, Debug)]
pub struct ParameterPlan {
    /// Base clause count before repetition.
    pub base_clauses: u64,
    /// Serial repetition count.
    pub repetition: u32,
    /// Amplifier gap parameter.
    pub gap: u64,
    /// Group count of the repeated instance: the honest set size.
    pub kappa: u64,
    /// Upper bound on the independent set when the instance encodes an
    /// accepted input: `(m-1)^repetition` against `kappa = m^repetition`.
    pub dishonest_bound: u64,
    /// Term count of the witness's signed-sum form.
    pub witness_width: u64,
    /// Admitted per-vertex value bound (the range check enforces it).
    pub value_bound: u64,
    /// Vertex count of the instance graph.
    pub n2: u64,
    /// Free inputs of the amplified circuit.
    pub data_inputs: u32,
    /// Index bits appended for the vertex argument.
    pub index_bits: u32,
    pub psi: u32,
    pub delta: (u32, u32),
}

impl ParameterPlan {
    /// Achieved soundness exponent: `repetition * log2(m / (m-1))`.
    pub fn soundness_exponent(&self) -> f64 {
        let m = self.base_clauses as f64;
        self.repetition as f64 * libm::log2(m / (m - 1.0))
    }

    /// `h = 2^k`: the ratio between honest and dishonest set sizes.
    pub fn soundness_ratio(&self) -> f64 {
        self.kappa as f64 / self.dishonest_bound as f64
    }

    /// Acceptance threshold `2^n * kappa` for the final tally.
    pub fn threshold(&self) -> i128 {
        (1i128 << self.data_inputs) * self.kappa as i128
    }

    /// The separation inequality with a safety margin of half a unit per
    /// input: the largest tally any value-bounded witness can reach on a
    /// heavily satisfiable instance stays at least `2^(n-1)` below the
    /// threshold. Exact integer arithmetic; unrepresentable magnitudes
    /// count as unseparated.
    pub fn separation_holds(&self) -> bool {
        let g = self.gap as i128;
        let vb = self.value_bound as i128;
        let kappa = self.kappa as i128;
        let bad = self.dishonest_bound as i128;
        // g*kappa - vb*((g-1)*bad + kappa) >= g/2
        let lhs = (g - 1)
            .checked_mul(bad)
            .and_then(|x| x.checked_add(kappa))
            .and_then(|x| x.checked_mul(vb));
        let total = g.checked_mul(kappa);
        match (total, lhs) {
            (Some(total), Some(lhs)) => match total.checked_sub(lhs).and_then(|m| m.checked_mul(2)) {
                Some(margin) => margin >= g,
                None => false,
            },
            _ => false,
        }
    }

    /// Largest final tally a value-bounded witness that passes the zero
    /// checks can reach when at most a `1/g` fraction of inputs is
    /// rejected by the instance circuit.
    pub fn dishonest_ceiling(&self) -> i128 {
        let n = self.data_inputs;
        let g = self.gap as i128;
        let vb = self.value_bound as i128;
        let per_good = self.dishonest_bound as i128;
        let per_bad = self.kappa as i128;
        // (2^n / g) * vb * ((g-1) * per_good + per_bad), rounded up
        let num = vb * ((g - 1) * per_good + per_bad) * (1i128 << n);
        (num + g - 1) / g
    }
}

/// Smallest `(k, g)` powers-of-two plan for the raw separation inequality
/// `t*kappa/h + t*n2/g < kappa` with a safety factor of 2. Deterministic:
/// starts from `h = 2*t*kappa`, `g = 2*t*n2*kappa` and escalates
/// alternately until `2*(t*kappa/h + t*n2/g) < kappa` holds strictly.
pub fn plan_from_counts(t: u64, n2: u64, kappa: u64) -> Result<(u32, u64), VerifyError> {
    let holds = |h: u128, g: u128| -> Option<bool> {
        let t = t as u128;
        let lhs = t
            .checked_mul(kappa as u128)?
            .checked_mul(g)?
            .checked_add(t.checked_mul(n2 as u128)?.checked_mul(h)?)?
            .checked_mul(2)?;
        let rhs = (kappa as u128).checked_mul(h)?.checked_mul(g)?;
        Some(lhs < rhs)
    };
    let mut h: u128 = (2 * t as u128 * kappa as u128).next_power_of_two();
    let mut g: u128 = (2 * t as u128)
        .checked_mul(n2 as u128)
        .and_then(|x| x.checked_mul(kappa as u128))
        .ok_or(VerifyError::NoFeasiblePlan)?
        .next_power_of_two();
    for round in 0..200 {
        match holds(h, g) {
            Some(true) => {
                let k = h.trailing_zeros();
                return Ok((k, g as u64));
            }
            Some(false) => {}
            None => break,
        }
        if round % 2 == 0 {
            h *= 2;
        } else {
            g *= 2;
        }
        if h > (1 << 63) || g > (1 << 63) {
            break;
        }
    }
    Err(VerifyError::NoFeasiblePlan)
}

/// All intermediate stage outputs of one pipeline run.
#[derive(Clone, Debug)]
pub struct PipelineArtifacts {
    pub amplified: AmplifiedCircuit,
    pub code: LinearCode,
    pub base_csp: CnfInstance,
    pub extractor: WitnessExtractor,
    pub repeated: CnfInstance,
    pub gis: GisInstance,
    pub plan: ParameterPlan,
}

/// amplify -> reduce -> repeat -> graph, with the plan computed from the
/// realized sizes and asserted separated.
pub fn build_pipeline(
    d_prime: &Circuit,
    cfg: &PipelineConfig,
) -> Result<PipelineArtifacts, VerifyError> {
    let amplified = amplify_gap(d_prime, cfg.gap, &cfg.hitter)?;
    let n = amplified.seed_len();
    if n > cfg.count.max_free_inputs {
        return Err(VerifyError::Count(CountError::BudgetExceeded {
            inputs: n,
            budget: cfg.count.max_free_inputs,
        }));
    }
    let code = build_code(n, cfg.code_seed, &cfg.code)?;
    let (base_csp, extractor) = circuit_to_csp(&amplified.circuit, &code)?;
    let repeated = serial_repeat(&base_csp, cfg.repetition, RepeatMode::AllTuples, &cfg.repeat)?;
    let gis = fglss_build(&repeated, &cfg.gis)?;
    let m = base_csp.num_clauses() as u64;
    let kappa = gis.kappa();
    let dishonest_bound = (m - 1).pow(cfg.repetition);
    let n2 = gis.num_vertices() as u64;
    let plan = ParameterPlan {
        base_clauses: m,
        repetition: cfg.repetition,
        gap: cfg.gap,
        kappa,
        dishonest_bound,
        witness_width: width_for(1, 1),
        value_bound: 1,
        n2,
        data_inputs: n,
        index_bits: log2_ceil(n2.max(1)),
        psi: cfg.hitter.psi,
        delta: cfg.code.delta,
    };
    if !plan.separation_holds() {
        return Err(VerifyError::NoFeasiblePlan);
    }
    Ok(PipelineArtifacts { amplified, code, base_csp, extractor, repeated, gis, plan })
}

/// Signed-sum term count of `(sum of t subcircuits - u)^2`.
pub fn width_for(t: u64, u: u64) -> u64 {
    t * t + 2 * u * t + u * u
}

/// One term of the expanded square: a signed product of subcircuits
/// (none means the all-ones constant).
#[derive(Clone, Debug)]
pub struct TermView {
    sign: i8,
    factors: Vec<u8>,
}

/// The symbolic term list of `(sum of t subcircuits - u)^2`, mirroring
/// [`crate::symrep::emaj_to_sum`]: diagonal products simplified, `2ut`
/// negated singles, `u^2` constant terms.
pub fn sum_term_views(t: usize, u: u64) -> Vec<TermView> {
    let mut terms = Vec::with_capacity((width_for(t as u64, u)) as usize);
    for i in 0..t {
        for j in 0..t {
            let factors = if i == j { vec![i as u8] } else { vec![i as u8, j as u8] };
            terms.push(TermView { sign: 1, factors });
        }
    }
    for _ in 0..2 * u {
        for i in 0..t {
            terms.push(TermView { sign: -1, factors: vec![i as u8] });
        }
    }
    for _ in 0..u * u {
        terms.push(TermView { sign: 1, factors: Vec::new() });
    }
    terms
}

/// The verifier-side form of a witness: every subcircuit pre-folded per
/// vertex index over one shared arena of the instance's data inputs,
/// plus both polarities of every codeword parity.
#[derive(Clone, Debug)]
pub struct StructuredWitness {
    arena: Circuit,
    /// `folded[a][i]` = wire of subcircuit `a` with the index fixed to `i`.
    folded: Vec<Vec<GateId>>,
    parity_pos: Vec<GateId>,
    parity_neg: Vec<GateId>,
}

/// A guessed or constructed selector witness: an exact-majority circuit
/// over `(x, index)` claimed to compute the negation of the honest
/// selector, with the verifier's folded form alongside when the
/// construction provided it.
///
/// Input layout, bit-exact for interchange: the `n` data inputs come
/// first, then `ceil(log2 n2)` index bits, least significant first.
/// Index values at or above the vertex count are out of range; honest
/// construction makes the selector 0 there, and every verifier sum binds
/// the index inside range.
#[derive(Clone, Debug)]
pub struct Witness {
    pub emaj: EmajCircuit,
    structured: Option<StructuredWitness>,
}

impl Witness {
    /// Wraps an externally supplied majority circuit; the folded form is
    /// derived on first use.
    pub fn external(emaj: EmajCircuit) -> Self {
        Self { emaj, structured: None }
    }

    pub fn width(&self) -> u64 {
        width_for(self.emaj.subcircuits().len() as u64, self.emaj.threshold())
    }
}

/// Fault injections for soundness testing: each produces a syntactically
/// valid witness whose selector deviates from honest in one spot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessFault {
    /// Complement the selector of one vertex.
    FlipVertex(u32),
    /// Never select one vertex.
    DropVertex(u32),
    /// Always select one vertex.
    ForceVertex(u32),
    /// Replace the majority threshold.
    Threshold(u64),
    /// Duplicate the primary subcircuit and double the threshold,
    /// inflating selected values to 4.
    DuplicatePrimary,
}

/// Honest witness shapes: the single-subcircuit wrapper, or a three-way
/// split `(D, C, not C)` with threshold 2 that represents the same
/// selector with width-25 sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessShape {
    Single,
    Split3,
}

/// Builds the honest witness for the pipeline instance: the selector
/// `A(x, i)` is 1 exactly when vertex `i` is the per-group choice
/// matching the honest assignment for `x`, and the majority circuit
/// computes its negation. Faults are applied to both the circuit form
/// and the folded form so they stay consistent.
pub fn build_honest_witness(
    art: &PipelineArtifacts,
    shape: WitnessShape,
    faults: &[WitnessFault],
) -> Result<Witness, VerifyError> {
    let n = art.plan.data_inputs;
    let index_bits = art.plan.index_bits;
    let n2 = art.gis.num_vertices();

    let mut threshold_override = None;
    let mut duplicate = false;
    for f in faults {
        match f {
            WitnessFault::Threshold(u) => threshold_override = Some(*u),
            WitnessFault::DuplicatePrimary => duplicate = true,
            _ => {}
        }
    }

    // folded form: arena over the data inputs only
    let structured = {
        let mut b = CircuitBuilder::new(n);
        let xw: Vec<GateId> = (0..n).map(|i| b.input(i)).collect();
        let vars = honest_var_wires(&mut b, art, &xw);
        let selectors: Vec<GateId> = (0..n2)
            .map(|i| {
                let w = match_wire(&mut b, art, i, &vars);
                apply_vertex_fault(&mut b, w, i as u32, faults)
            })
            .collect();
        let primary: Vec<GateId> = selectors.iter().map(|&w| b.not(w)).collect();
        let mut folded = vec![primary];
        if matches!(shape, WitnessShape::Split3) {
            let cx = parity_of_inputs(&mut b, &xw);
            let ncx = b.not(cx);
            folded.push(vec![cx; n2]);
            folded.push(vec![ncx; n2]);
        }
        if duplicate {
            let again = folded[0].clone();
            folded.push(again);
        }
        let (parity_pos, parity_neg) = parity_wires(&mut b, art, &xw);
        let keep = b.const0();
        StructuredWitness { arena: b.finish_arena(keep), folded, parity_pos, parity_neg }
    };

    // circuit form: same semantics over (x, index) inputs
    let emaj = {
        let mut b = CircuitBuilder::new(n + index_bits);
        let xw: Vec<GateId> = (0..n).map(|i| b.input(i)).collect();
        let idx: Vec<GateId> = (0..index_bits).map(|j| b.input(n + j)).collect();
        let vars = honest_var_wires(&mut b, art, &xw);
        let mut picks: Vec<GateId> = Vec::with_capacity(n2);
        for i in 0..n2 {
            let w = match_wire(&mut b, art, i, &vars);
            let w = apply_vertex_fault(&mut b, w, i as u32, faults);
            let here = index_equals(&mut b, &idx, i as u64);
            picks.push(b.and(here, w));
        }
        let a = b.or_all(&picks);
        let d1 = b.not(a);
        let d1 = b.finish(d1);
        let mut subs = vec![d1.clone()];
        let mut u = 1u64;
        if matches!(shape, WitnessShape::Split3) {
            let x_indices: Vec<u32> = (0..n).collect();
            let cx = crate::circuit::parity_subset(n + index_bits, &x_indices)?;
            subs.push(cx.clone());
            subs.push(crate::circuit::negate(&cx));
            u = 2;
        }
        if duplicate {
            subs.push(d1);
            u *= 2;
        }
        if let Some(t) = threshold_override {
            u = t;
        }
        EmajCircuit::new(subs, u)?
    };

    // fold the threshold fault into the structured view by rebuilding
    // term views at verification time (threshold comes from the circuit)
    Ok(Witness { emaj, structured: Some(structured) })
}

fn apply_vertex_fault(
    b: &mut CircuitBuilder,
    wire: GateId,
    vertex: u32,
    faults: &[WitnessFault],
) -> GateId {
    let mut w = wire;
    for f in faults {
        match *f {
            WitnessFault::FlipVertex(v) if v == vertex => w = b.not(w),
            WitnessFault::DropVertex(v) if v == vertex => w = b.const0(),
            WitnessFault::ForceVertex(v) if v == vertex => w = b.const1(),
            _ => {}
        }
    }
    w
}

/// Wires computing the honest value of every CNF variable on input `x`:
/// codeword parities for `Y`, the input copy, the gate values of the
/// instance circuit, then the chain parities, in emission order.
fn honest_var_wires(
    b: &mut CircuitBuilder,
    art: &PipelineArtifacts,
    xw: &[GateId],
) -> Vec<GateId> {
    let mut vars: Vec<GateId> = Vec::with_capacity(art.base_csp.num_vars() as usize);
    for i in 1..=art.code.cn() {
        let support = art.code.support(i).expect("within cn");
        let wire = xor_fold(b, &support, xw);
        vars.push(wire);
    }
    vars.extend_from_slice(xw);
    let gate_wires = b.splice_all(&art.amplified.circuit, xw);
    vars.extend_from_slice(&gate_wires);
    for i in 1..=art.code.cn() {
        let support = art.code.support(i).expect("within cn");
        if support.len() >= 3 {
            let mut acc = xw[support[0] as usize];
            for &j in &support[1..support.len() - 1] {
                acc = b.xor(acc, xw[j as usize]);
                vars.push(acc);
            }
        }
    }
    debug_assert_eq!(vars.len(), art.base_csp.num_vars() as usize);
    vars
}

fn xor_fold(b: &mut CircuitBuilder, support: &[u32], xw: &[GateId]) -> GateId {
    if support.is_empty() {
        return b.const0();
    }
    let mut acc = xw[support[0] as usize];
    for &j in &support[1..] {
        acc = b.xor(acc, xw[j as usize]);
    }
    acc
}

fn parity_of_inputs(b: &mut CircuitBuilder, xw: &[GateId]) -> GateId {
    let mut acc = b.const0();
    for &w in xw {
        acc = b.xor(acc, w);
    }
    acc
}

fn match_wire(
    b: &mut CircuitBuilder,
    art: &PipelineArtifacts,
    vertex: usize,
    vars: &[GateId],
) -> GateId {
    let assignment = &art.gis.vertices[vertex].assignment;
    let lits: Vec<GateId> = assignment
        .iter()
        .map(|&(v, bit)| {
            let w = vars[(v - 1) as usize];
            if bit {
                w
            } else {
                b.not(w)
            }
        })
        .collect();
    b.and_all(&lits)
}

fn index_equals(b: &mut CircuitBuilder, idx: &[GateId], value: u64) -> GateId {
    let lits: Vec<GateId> = idx
        .iter()
        .enumerate()
        .map(|(j, &w)| if (value >> j) & 1 == 1 { w } else { b.not(w) })
        .collect();
    b.and_all(&lits)
}

fn parity_wires(
    b: &mut CircuitBuilder,
    art: &PipelineArtifacts,
    xw: &[GateId],
) -> (Vec<GateId>, Vec<GateId>) {
    let mut pos = Vec::with_capacity(art.code.cn() as usize);
    let mut neg = Vec::with_capacity(art.code.cn() as usize);
    for i in 1..=art.code.cn() {
        let support = art.code.support(i).expect("within cn");
        let w = xor_fold(b, &support, xw);
        pos.push(w);
        neg.push(b.not(w));
    }
    (pos, neg)
}

/// Folds an external majority circuit per vertex index over a fresh
/// arena. Shared structure across indices is deduplicated by the
/// builder, so the cost is one specialization per (subcircuit, vertex).
fn fold_external(
    emaj: &EmajCircuit,
    art: &PipelineArtifacts,
) -> Result<StructuredWitness, VerifyError> {
    let n = art.plan.data_inputs;
    let index_bits = art.plan.index_bits;
    let expected = n + index_bits;
    if emaj.arity() != expected {
        return Err(VerifyError::WitnessArity { expected, got: emaj.arity() });
    }
    let n2 = art.gis.num_vertices();
    let mut b = CircuitBuilder::new(n);
    let xw: Vec<GateId> = (0..n).map(|i| b.input(i)).collect();
    let mut folded = Vec::with_capacity(emaj.subcircuits().len());
    for sub in emaj.subcircuits() {
        let mut per_vertex = Vec::with_capacity(n2);
        for i in 0..n2 {
            let mut wires = xw.clone();
            for j in 0..index_bits {
                let bit = (i as u64 >> j) & 1 == 1;
                wires.push(b.constant(bit));
            }
            per_vertex.push(b.splice(sub, &wires));
        }
        folded.push(per_vertex);
    }
    let (parity_pos, parity_neg) = parity_wires(&mut b, art, &xw);
    let keep = b.const0();
    Ok(StructuredWitness { arena: b.finish_arena(keep), folded, parity_pos, parity_neg })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    UnsatVerified,
    Reject,
}

/// Oracle-call accounting per phase (one call = one exact count over the
/// data-input space).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OracleCalls {
    pub independence: u64,
    pub consistency: u64,
    pub final_phase: u64,
    pub range_check: u64,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub plan: ParameterPlan,
    pub independence_sum: i128,
    pub consistency_sum: i128,
    pub range_sum: i128,
    pub final_sum: i128,
    pub decision: Decision,
    pub calls: OracleCalls,
}

impl Verdict {
    pub fn accepted(&self) -> bool {
        self.decision == Decision::UnsatVerified
    }
}

/// Flushes batched jobs through the oracle, folding signs into a total.
struct JobBatch<'o, 'a> {
    oracle: &'o SliceOracle<'a>,
    jobs: ProductJobs,
    signs: Vec<i8>,
    total: i128,
    flush_at: usize,
}

impl<'o, 'a> JobBatch<'o, 'a> {
    fn new(oracle: &'o SliceOracle<'a>) -> Self {
        Self { oracle, jobs: ProductJobs::new(), signs: Vec::new(), total: 0, flush_at: 200_000 }
    }

    fn push(&mut self, sign: i8, factors: &[GateId]) {
        self.jobs.push(factors);
        self.signs.push(sign);
        if self.jobs.len() >= self.flush_at {
            self.flush();
        }
    }

    fn flush(&mut self) {
        if self.jobs.is_empty() {
            return;
        }
        let counts = self.oracle.count_product_batch(&self.jobs);
        for (count, &sign) in counts.iter().zip(&self.signs) {
            self.total += sign as i128 * *count as i128;
        }
        self.jobs.clear();
        self.signs.clear();
    }

    fn finish(mut self) -> i128 {
        self.flush();
        self.total
    }
}

fn term_factors_into(
    term: &TermView,
    folded: &[Vec<GateId>],
    vertex: usize,
    buf: &mut Vec<GateId>,
) {
    buf.extend(term.factors.iter().map(|&a| folded[a as usize][vertex]));
}

/// Phase 1: `sum_{edges (i1,i2)} sum_x R(x,i1) R(x,i2)`, via one signed
/// counting call per (edge, term pair). Zero iff the selector never
/// places both endpoints of an edge in the set.
pub fn verify_independence(
    sw: &StructuredWitness,
    terms: &[TermView],
    gis: &GisInstance,
    oracle: &SliceOracle,
) -> (i128, u64) {
    let mut batch = JobBatch::new(oracle);
    let mut buf: Vec<GateId> = Vec::with_capacity(8);
    let mut calls = 0u64;
    for &(u, v) in &gis.edges {
        for t1 in terms {
            for t2 in terms {
                buf.clear();
                term_factors_into(t1, &sw.folded, u as usize, &mut buf);
                term_factors_into(t2, &sw.folded, v as usize, &mut buf);
                batch.push(t1.sign * t2.sign, &buf);
                calls += 1;
            }
        }
    }
    (batch.finish(), calls)
}

/// Phase 2: `sum_{i} sum_{(j',b) in S_i} sum_x (ENC_j'(x) xor b) R(x,i)`.
/// Zero iff the selector never picks a vertex the input's codeword
/// forbids.
pub fn verify_consistency(
    sw: &StructuredWitness,
    terms: &[TermView],
    gis: &GisInstance,
    oracle: &SliceOracle,
) -> (i128, u64) {
    let mut batch = JobBatch::new(oracle);
    let mut buf: Vec<GateId> = Vec::with_capacity(8);
    let mut calls = 0u64;
    for (i, vert) in gis.vertices.iter().enumerate() {
        for &(bit, b) in &vert.s_pairs {
            let indicator =
                if b { sw.parity_neg[(bit - 1) as usize] } else { sw.parity_pos[(bit - 1) as usize] };
            for t in terms {
                buf.clear();
                buf.push(indicator);
                term_factors_into(t, &sw.folded, i, &mut buf);
                batch.push(t.sign, &buf);
                calls += 1;
            }
        }
    }
    (batch.finish(), calls)
}

/// Range check: `sum_i sum_x (R(x,i)^2 - R(x,i))`, zero iff the selector
/// takes only 0/1 values. Keeps value-inflating witnesses out of the
/// final tally's admissible set.
pub fn verify_value_range(
    sw: &StructuredWitness,
    terms: &[TermView],
    n2: usize,
    oracle: &SliceOracle,
) -> (i128, u64) {
    let mut batch = JobBatch::new(oracle);
    let mut buf: Vec<GateId> = Vec::with_capacity(8);
    let mut calls = 0u64;
    for i in 0..n2 {
        for t1 in terms {
            for t2 in terms {
                buf.clear();
                term_factors_into(t1, &sw.folded, i, &mut buf);
                term_factors_into(t2, &sw.folded, i, &mut buf);
                batch.push(t1.sign * t2.sign, &buf);
                calls += 1;
            }
        }
        for t in terms {
            buf.clear();
            term_factors_into(t, &sw.folded, i, &mut buf);
            batch.push(-t.sign, &buf);
            calls += 1;
        }
    }
    (batch.finish(), calls)
}

/// Phase 3: the final tally `sum_j sum_i sum_x R_j(x, i)` and the
/// threshold decision.
pub fn final_sum(
    sw: &StructuredWitness,
    terms: &[TermView],
    n2: usize,
    oracle: &SliceOracle,
) -> (i128, u64) {
    let mut batch = JobBatch::new(oracle);
    let mut buf: Vec<GateId> = Vec::with_capacity(8);
    let mut calls = 0u64;
    for i in 0..n2 {
        for t in terms {
            buf.clear();
            term_factors_into(t, &sw.folded, i, &mut buf);
            batch.push(t.sign, &buf);
            calls += 1;
        }
    }
    (batch.finish(), calls)
}

/// Runs all phases on a witness against a built pipeline instance.
pub fn verify_witness(
    art: &PipelineArtifacts,
    witness: &Witness,
    cfg: &PipelineConfig,
) -> Result<Verdict, VerifyError> {
    let folded_local;
    let sw = match &witness.structured {
        Some(sw) => sw,
        None => {
            folded_local = fold_external(&witness.emaj, art)?;
            &folded_local
        }
    };
    let t = witness.emaj.subcircuits().len();
    let u = witness.emaj.threshold();
    let terms = sum_term_views(t, u);
    let mut plan = art.plan.clone();
    plan.witness_width = terms.len() as u64;

    let oracle = SliceOracle::new(&sw.arena, &cfg.count)?;
    let n2 = art.gis.num_vertices();
    let (independence_sum, ind_calls) = verify_independence(sw, &terms, &art.gis, &oracle);
    let (consistency_sum, con_calls) = verify_consistency(sw, &terms, &art.gis, &oracle);
    let (range_sum, range_calls) = verify_value_range(sw, &terms, n2, &oracle);
    let (fsum, fin_calls) = final_sum(sw, &terms, n2, &oracle);

    let zero_checks_pass = independence_sum == 0 && consistency_sum == 0 && range_sum == 0;
    let decision = if zero_checks_pass && plan.separation_holds() && fsum >= plan.threshold() {
        Decision::UnsatVerified
    } else {
        Decision::Reject
    };
    Ok(Verdict {
        plan,
        independence_sum,
        consistency_sum,
        range_sum,
        final_sum: fsum,
        decision,
        calls: OracleCalls {
            independence: ind_calls,
            consistency: con_calls,
            final_phase: fin_calls,
            range_check: range_calls,
        },
    })
}

pub enum E2eMode {
    /// Construct the honest witness, then verify it.
    Prove,
    /// Verify an externally supplied witness.
    Verify(EmajCircuit),
}

/// The full driver: build the pipeline for the base circuit, obtain a
/// witness per the mode, and run the verifier phases.
pub fn run_e2e(
    d_prime: &Circuit,
    mode: E2eMode,
    cfg: &PipelineConfig,
) -> Result<Verdict, VerifyError> {
    let art = build_pipeline(d_prime, cfg)?;
    let witness = match mode {
        E2eMode::Prove => build_honest_witness(&art, WitnessShape::Single, &[])?,
        E2eMode::Verify(emaj) => Witness::external(emaj),
    };
    verify_witness(&art, &witness, cfg)
}
