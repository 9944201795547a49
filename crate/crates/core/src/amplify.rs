//! Gap amplification: seeded hitting sets and the OR-composition.
//!
//! [`HittingSetGen`] expands a seed of `m + psi * ceil(log2 g)` bits into
//! `t` strings of length `m` by walking a circulant graph on `Z_{2^m}`
//! whose second eigenvalue is computed exactly (the graph is circulant,
//! so its spectrum is a cosine sum per frequency) and asserted against a
//! threshold at construction, retrying seeds until it holds.
//!
//! [`amplify_gap`] unrolls that walk into gate logic and ORs a copy of
//! the base circuit over every walk vertex: unsatisfiability is
//! preserved exactly, and a dense base circuit makes the composition
//! satisfied on all but roughly a `1/g` fraction of seeds, a property
//! the tests measure directly (exhaustively over seeds when the seed
//! space is small).

use alloc::vec::Vec;
use core::fmt;

use crate::circuit::{Circuit, CircuitBuilder, CircuitError, GateId};
use crate::rng::SplitMix64;

#[derive(Clone, Debug, PartialEq)]
pub enum AmplifyError {
    /// Target string length outside the supported range.
    TargetLength { m: u32 },
    /// Gap parameter must be at least 2.
    GapTooSmall { g: u64 },
    /// The seed-bit budget cannot fund the requested number of strings.
    SeedBudget { step_bits_available: u32, steps: u32 },
    /// No generator set met the eigenvalue threshold within the retries.
    ExpanderRetries { retries: u32, lambda_budget: f64 },
    /// A seed of the wrong length was supplied.
    SeedLength { expected: u32, got: u32 },
    Circuit(CircuitError),
}

impl fmt::Display for AmplifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AmplifyError::TargetLength { m } => write!(f, "unsupported target length {m}"),
            AmplifyError::GapTooSmall { g } => write!(f, "gap {g} must be >= 2"),
            AmplifyError::SeedBudget { step_bits_available, steps } => write!(
                f,
                "{step_bits_available} step bits cannot fund {steps} walk steps"
            ),
            AmplifyError::ExpanderRetries { retries, lambda_budget } => write!(
                f,
                "no circulant with lambda <= {lambda_budget} in {retries} retries"
            ),
            AmplifyError::SeedLength { expected, got } => {
                write!(f, "seed has {got} bits, expected {expected}")
            }
            AmplifyError::Circuit(e) => write!(f, "{e}"),
        }
    }
}

impl From<CircuitError> for AmplifyError {
    fn from(e: CircuitError) -> Self {
        AmplifyError::Circuit(e)
    }
}

/// `ceil(log2 g)` for `g >= 2`.
pub fn log2_ceil(g: u64) -> u32 {
    g.next_power_of_two().trailing_zeros()
}

#[derive(Clone, Debug)]
pub struct HitterConfig {
    /// Seed-overhead constant: the seed is `m + psi * ceil(log2 g)` bits.
    pub psi: u32,
    /// Strings emitted per seed; `None` selects `ceil(4 * log2 g)`.
    pub strings_per_seed: Option<u32>,
    /// Acceptance threshold for the verified second eigenvalue.
    pub lambda_budget: f64,
    pub seed: u64,
    pub max_retries: u32,
}

impl Default for HitterConfig {
    fn default() -> Self {
        Self { psi: 8, strings_per_seed: None, lambda_budget: 0.9999, seed: 0, max_retries: 512 }
    }
}

/// A seeded hitting-set generator backed by a walk on a verified
/// circulant expander over `Z_{2^m}`.
#[derive(Clone, Debug)]
pub struct HittingSetGen {
    target_len: u32,
    gap: u64,
    psi: u32,
    strings_per_seed: u32,
    step_bits: u32,
    generators: Vec<u64>,
    lambda: f64,
}

impl HittingSetGen {
    pub fn new(m: u32, g: u64, cfg: &HitterConfig) -> Result<Self, AmplifyError> {
        if m == 0 || m > 16 {
            return Err(AmplifyError::TargetLength { m });
        }
        if g < 2 {
            return Err(AmplifyError::GapTooSmall { g });
        }
        let overhead = cfg.psi * log2_ceil(g);
        let t = cfg.strings_per_seed.unwrap_or(4 * log2_ceil(g)).max(2);
        let steps = t - 1;
        if overhead / steps == 0 {
            return Err(AmplifyError::SeedBudget { step_bits_available: overhead, steps });
        }
        let step_bits = (overhead / steps).min(6).min(m);
        let d = 1u64 << step_bits;
        let modulus = 1u64 << m;
        for attempt in 0..cfg.max_retries {
            let mut rng = SplitMix64::new(cfg.seed.wrapping_add(attempt as u64));
            // quality screening is only meaningful (and satisfiable)
            // once the group has room: tiny moduli serve structural
            // tests, not hitting statistics
            let screened = m >= 5;
            let mut generators = Vec::with_capacity(d as usize);
            let mut degenerate = false;
            for idx in 0..d {
                // alternate 2-adic valuations (odd steps mix bit 0,
                // doubled-odd steps mix bit 1) and insist each step
                // magnitude disturbs every higher bit often enough, so
                // no bit-stripe set survives the walk untouched
                let shift = u32::from(idx % 2 == 1 && m >= 2);
                let mut found = false;
                for _ in 0..4096 {
                    let odd = (rng.below(modulus / 2) << 1) | 1;
                    let candidate = (odd << shift) & (modulus - 1);
                    if candidate != 0
                        && (!screened || gen_preservation(m, candidate, shift) <= 0.65)
                    {
                        generators.push(candidate);
                        found = true;
                        break;
                    }
                }
                if !found {
                    degenerate = true;
                    break;
                }
            }
            if screened {
                // duplicate or mutually cancelling steps collide walk
                // vertices and waste strings
                for i in 0..generators.len() {
                    for j in i..generators.len() {
                        if (i != j && generators[i] == generators[j])
                            || (generators[i] + generators[j]) % modulus == 0
                        {
                            degenerate = true;
                        }
                    }
                }
                if worst_bit_preservation(m, &generators) > 0.70 {
                    degenerate = true;
                }
            }
            if degenerate {
                continue;
            }
            let lambda = circulant_second_eigenvalue(m, &generators);
            if lambda <= cfg.lambda_budget {
                return Ok(Self {
                    target_len: m,
                    gap: g,
                    psi: cfg.psi,
                    strings_per_seed: t,
                    step_bits,
                    generators,
                    lambda,
                });
            }
        }
        Err(AmplifyError::ExpanderRetries {
            retries: cfg.max_retries,
            lambda_budget: cfg.lambda_budget,
        })
    }

    pub fn target_len(&self) -> u32 {
        self.target_len
    }

    pub fn gap(&self) -> u64 {
        self.gap
    }

    pub fn psi(&self) -> u32 {
        self.psi
    }

    pub fn strings_per_seed(&self) -> u32 {
        self.strings_per_seed
    }

    pub fn step_bits(&self) -> u32 {
        self.step_bits
    }

    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    /// The verified bound on the walk's second eigenvalue.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Seed length in bits: `m + psi * ceil(log2 g)`.
    pub fn seed_len(&self) -> u32 {
        self.target_len + self.psi * log2_ceil(self.gap)
    }

    /// Walk vertices as integers, starting from the seed's first `m` bits.
    pub fn expand_seed_indices(&self, r: &[bool]) -> Result<Vec<u64>, AmplifyError> {
        if r.len() != self.seed_len() as usize {
            return Err(AmplifyError::SeedLength {
                expected: self.seed_len(),
                got: r.len() as u32,
            });
        }
        let modulus = 1u64 << self.target_len;
        let mut v = 0u64;
        for k in 0..self.target_len {
            if r[k as usize] {
                v |= 1 << k;
            }
        }
        let mut out = Vec::with_capacity(self.strings_per_seed as usize);
        out.push(v);
        for step in 0..self.strings_per_seed - 1 {
            let base = (self.target_len + step * self.step_bits) as usize;
            let mut sel = 0usize;
            for b in 0..self.step_bits as usize {
                if r[base + b] {
                    sel |= 1 << b;
                }
            }
            v = (v + self.generators[sel]) & (modulus - 1);
            out.push(v);
        }
        Ok(out)
    }

    /// The `t` strings of length `m` produced from seed `r`.
    pub fn expand_seed(&self, r: &[bool]) -> Result<Vec<Vec<bool>>, AmplifyError> {
        Ok(self
            .expand_seed_indices(r)?
            .into_iter()
            .map(|v| (0..self.target_len).map(|k| (v >> k) & 1 == 1).collect())
            .collect())
    }
}

/// Worst-case preservation of a single step: the largest, over bit
/// positions at or above the step's 2-adic valuation, fraction of states
/// whose bit survives the step.
fn gen_preservation(m: u32, g: u64, valuation: u32) -> f64 {
    let mut worst: f64 = 0.0;
    for j in valuation..m {
        let span = 1u64 << (j + 1);
        let half = 1u64 << j;
        let r = g % span;
        let flip = r.min(span - r) as f64 / half as f64;
        worst = worst.max(1.0 - flip);
    }
    worst
}

/// Average probability, over one uniformly chosen step, that bit `j` of
/// the walk state survives unchanged, maximized over bit positions. A
/// step of size `s` preserves bit `j` on a `1 - min(s', 2^{j+1}-s')/2^j`
/// fraction of states where `s' = s mod 2^{j+1}`, so low-magnitude steps
/// barely touch high bits; sets where some bit is preserved too often
/// admit bit-stripe functions the walk fails to hit.
pub fn worst_bit_preservation(m: u32, generators: &[u64]) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..m {
        let span = 1u64 << (j + 1);
        let half = 1u64 << j;
        let mut total = 0.0;
        for &g in generators {
            let r = g % span;
            let flip = r.min(span - r) as f64 / half as f64;
            total += 1.0 - flip;
        }
        let avg = total / generators.len() as f64;
        if avg > worst {
            worst = avg;
        }
    }
    worst
}

/// Exact second eigenvalue (in absolute value) of the normalized walk on
/// the circulant graph over `Z_{2^m}` with the given step multiset:
/// `max_{k != 0} | (1/d) sum_s cos(2 pi k s / N) |`.
pub fn circulant_second_eigenvalue(m: u32, generators: &[u64]) -> f64 {
    let n = 1u64 << m;
    let d = generators.len() as f64;
    let tau = 2.0 * core::f64::consts::PI / n as f64;
    let mut worst: f64 = 0.0;
    for k in 1..n {
        let mut re = 0.0;
        let mut im = 0.0;
        for &s in generators {
            let angle = tau * ((k.wrapping_mul(s) % n) as f64);
            re += libm::cos(angle);
            im += libm::sin(angle);
        }
        let mag = libm::sqrt(re * re + im * im) / d;
        if mag > worst {
            worst = mag;
        }
    }
    worst
}

/// The amplified circuit: an OR of base-circuit copies over the walk
/// vertices of its seed input.
#[derive(Clone, Debug)]
pub struct AmplifiedCircuit {
    pub circuit: Circuit,
    pub generator: HittingSetGen,
    /// Gates spent on walk logic during construction (upper bound part).
    pub generator_gates: usize,
    pub base_gates: usize,
}

impl AmplifiedCircuit {
    pub fn seed_len(&self) -> u32 {
        self.generator.seed_len()
    }
}

/// Builds `D(r) = OR_i D'(x_i(r))` over the hitting-set expansion.
/// If the base circuit is unsatisfiable so is the result; if the base
/// circuit is satisfied on at least half its inputs, all but about a
/// `1/g` fraction of seeds satisfy the result.
pub fn amplify_gap(
    d_prime: &Circuit,
    g: u64,
    cfg: &HitterConfig,
) -> Result<AmplifiedCircuit, AmplifyError> {
    let m = d_prime.num_inputs();
    let gen = HittingSetGen::new(m, g, cfg)?;
    let n = gen.seed_len();
    let mut b = CircuitBuilder::new(n);
    let mut state: Vec<GateId> = (0..m).map(|k| b.input(k)).collect();
    let mut copies: Vec<GateId> = Vec::with_capacity(gen.strings_per_seed as usize);
    let mut walk_gates = 0usize;
    for step in 0..gen.strings_per_seed {
        let before = b.len();
        copies.push(b.splice(d_prime, &state));
        let after_copy = b.len();
        if step + 1 < gen.strings_per_seed {
            let base = m + step * gen.step_bits;
            let sel: Vec<GateId> = (0..gen.step_bits).map(|j| b.input(base + j)).collect();
            state = add_mux_constant(&mut b, &state, &sel, &gen.generators);
            walk_gates += b.len() - after_copy;
        }
        let _ = before;
    }
    let out = b.or_all(&copies);
    let circuit = b.finish(out);
    Ok(AmplifiedCircuit {
        circuit,
        generator: gen,
        generator_gates: walk_gates,
        base_gates: d_prime.len(),
    })
}

/// state + table[sel] mod 2^m as gate logic: per-bit selector functions
/// over the constant table, then a ripple-carry add.
fn add_mux_constant(
    b: &mut CircuitBuilder,
    state: &[GateId],
    sel: &[GateId],
    table: &[u64],
) -> Vec<GateId> {
    let m = state.len();
    let addend: Vec<GateId> = (0..m)
        .map(|bit| {
            let bits: Vec<bool> = table.iter().map(|&t| (t >> bit) & 1 == 1).collect();
            mux_constant(b, sel, &bits)
        })
        .collect();
    let mut out = Vec::with_capacity(m);
    let mut carry = b.const0();
    for i in 0..m {
        let (s, a) = (state[i], addend[i]);
        let sa = b.xor(s, a);
        out.push(b.xor(sa, carry));
        let and1 = b.and(s, a);
        let and2 = b.and(sa, carry);
        carry = b.or(and1, and2);
    }
    out
}

/// Shannon expansion of a constant table over selector wires; sel[0] is
/// the least significant selector bit.
fn mux_constant(b: &mut CircuitBuilder, sel: &[GateId], table: &[bool]) -> GateId {
    debug_assert_eq!(table.len(), 1 << sel.len());
    if sel.is_empty() {
        return b.constant(table[0]);
    }
    let half = table.len() / 2;
    let rest = &sel[1..];
    let (lo_t, hi_t): (Vec<bool>, Vec<bool>) = {
        let mut lo = Vec::with_capacity(half);
        let mut hi = Vec::with_capacity(half);
        for (i, &v) in table.iter().enumerate() {
            if i & 1 == 0 {
                lo.push(v);
            } else {
                hi.push(v);
            }
        }
        (lo, hi)
    };
    let v0 = mux_constant(b, rest, &lo_t);
    let v1 = mux_constant(b, rest, &hi_t);
    if v0 == v1 {
        return v0;
    }
    // v0 xor (sel0 and (v0 xor v1))
    let diff = b.xor(v0, v1);
    let gated = b.and(sel[0], diff);
    b.xor(v0, gated)
}
