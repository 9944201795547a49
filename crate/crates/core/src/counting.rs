//! Exact model counting by bitsliced enumeration.
//!
//! [`count_sat`] walks the whole assignment space 64 assignments per
//! machine word. [`count_signed_sum`] lifts that to signed sums of
//! circuits, binding a trailing block of inputs first. [`SliceOracle`]
//! is the batched workhorse behind the verifier: one gate arena shared
//! by many counting jobs is swept once per chunk of the assignment
//! space, and every job accumulates its popcount from the same slices.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::circuit::{restrict_inputs, Circuit, CircuitError, GateId, TruthSlice};
use crate::symrep::SumCircuit;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CountError {
    /// More free inputs than the enumeration budget allows.
    BudgetExceeded { inputs: u32, budget: u32 },
    /// A nonnegativity-promised sum evaluated negative: the witness that
    /// produced it is bad, which callers surface as rejection evidence.
    PromiseViolation { value: i128 },
    /// `fixed` must bind exactly a trailing block of inputs.
    BadFixedSet,
    /// The sum circuit has no terms to infer an arity from.
    EmptySum,
    Circuit(CircuitError),
}

impl fmt::Display for CountError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountError::BudgetExceeded { inputs, budget } => {
                write!(f, "{inputs} free inputs exceed counting budget {budget}")
            }
            CountError::PromiseViolation { value } => {
                write!(f, "nonnegativity promise violated: sum = {value}")
            }
            CountError::BadFixedSet => write!(f, "fixed inputs must form a trailing block"),
            CountError::EmptySum => write!(f, "sum circuit has no terms"),
            CountError::Circuit(e) => write!(f, "{e}"),
        }
    }
}

impl From<CircuitError> for CountError {
    fn from(e: CircuitError) -> Self {
        CountError::Circuit(e)
    }
}

#[derive(Clone, Debug)]
pub struct CountConfig {
    /// Hard cap on free inputs per exhaustive count.
    pub max_free_inputs: u32,
}

impl Default for CountConfig {
    fn default() -> Self {
        Self { max_free_inputs: 28 }
    }
}

/// Exact model count of one circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountResult {
    pub num_inputs: u32,
    pub count: u128,
}

/// Mask selecting the valid low bits of the final word when the space has
/// fewer than 64 assignments.
fn space_mask(n: u32) -> u64 {
    if n >= 6 {
        !0
    } else {
        (1u64 << (1u64 << n)) - 1
    }
}

/// Exact `|{x : c(x) = 1}|` by bitsliced enumeration.
pub fn count_sat(c: &Circuit, cfg: &CountConfig) -> Result<CountResult, CountError> {
    let n = c.num_inputs();
    if n > cfg.max_free_inputs {
        return Err(CountError::BudgetExceeded { inputs: n, budget: cfg.max_free_inputs });
    }
    let total: u64 = 1u64 << n;
    let mut words = vec![0u64; c.len()];
    let mut count: u128 = 0;
    let mut base = 0u64;
    loop {
        c.eval_block_into(base, &mut words);
        let mut w = words[c.output() as usize];
        if base + 64 > total {
            w &= space_mask(n);
        }
        count += w.count_ones() as u128;
        base += 64;
        if base >= total {
            break;
        }
    }
    Ok(CountResult { num_inputs: n, count })
}

/// Reference counter: one evaluation per assignment. Slow on purpose;
/// kept as the baseline the bitsliced path is checked and timed against.
pub fn count_sat_naive(c: &Circuit, cfg: &CountConfig) -> Result<CountResult, CountError> {
    let n = c.num_inputs();
    if n > cfg.max_free_inputs {
        return Err(CountError::BudgetExceeded { inputs: n, budget: cfg.max_free_inputs });
    }
    let mut vals = vec![false; c.len()];
    let mut x = vec![false; n as usize];
    let mut count: u128 = 0;
    for a in 0..(1u64 << n) {
        for (k, slot) in x.iter_mut().enumerate() {
            *slot = (a >> k) & 1 == 1;
        }
        c.eval_into(&x, &mut vals);
        count += vals[c.output() as usize] as u128;
    }
    Ok(CountResult { num_inputs: n, count })
}

/// Signed model count of a sum circuit with a trailing block of inputs
/// bound to constants: `sum_j sign_j * |{x : C_j(x, fixed) = 1}|`.
///
/// `fixed` must bind input indices `n - j .. n` for some `j` (the index
/// inputs appended after the data inputs). When the sum carries a
/// nonnegativity promise, a negative result is reported as a promise
/// violation rather than returned.
pub fn count_signed_sum(
    s: &SumCircuit,
    fixed: &BTreeMap<u32, bool>,
    cfg: &CountConfig,
) -> Result<i128, CountError> {
    let n = s.arity().ok_or(CountError::EmptySum)?;
    let j = fixed.len() as u32;
    if j > n || !(n - j..n).all(|i| fixed.contains_key(&i)) {
        return Err(CountError::BadFixedSet);
    }
    let mut total = 0i128;
    for (sign, term) in &s.terms {
        let bound = if fixed.is_empty() { term.clone() } else { restrict_inputs(term, fixed)? };
        let c = count_sat(&bound, cfg)?;
        total += sign.as_i128() * c.count as i128;
    }
    if s.promised_nonnegative && total < 0 {
        return Err(CountError::PromiseViolation { value: total });
    }
    Ok(total)
}

/// A counting job over a shared arena: the conjunction of the listed
/// wires, counted over all assignments. No factors means the constant-1
/// function (the count of the whole space).
#[derive(Clone, Debug)]
pub struct ProductJob {
    pub factors: Vec<GateId>,
}

/// A flat batch of product jobs: one shared factor buffer plus spans,
/// so pushing a job never allocates on its own.
#[derive(Clone, Debug, Default)]
pub struct ProductJobs {
    factors: Vec<GateId>,
    spans: Vec<(u32, u32)>,
}

impl ProductJobs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, factors: &[GateId]) {
        let start = self.factors.len() as u32;
        self.factors.extend_from_slice(factors);
        self.spans.push((start, factors.len() as u32));
    }

    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn clear(&mut self) {
        self.factors.clear();
        self.spans.clear();
    }

    fn job(&self, i: usize) -> &[GateId] {
        let (start, len) = self.spans[i];
        &self.factors[start as usize..(start + len) as usize]
    }
}

/// Batched counting over one arena. All jobs are answered in a single
/// sweep of the assignment space, so shared subcircuits are evaluated
/// once per block no matter how many jobs touch them.
pub struct SliceOracle<'a> {
    arena: &'a Circuit,
    chunk_words: usize,
}

impl<'a> SliceOracle<'a> {
    pub fn new(arena: &'a Circuit, cfg: &CountConfig) -> Result<Self, CountError> {
        let n = arena.num_inputs();
        if n > cfg.max_free_inputs {
            return Err(CountError::BudgetExceeded { inputs: n, budget: cfg.max_free_inputs });
        }
        Ok(Self { arena, chunk_words: 64 })
    }

    /// Counts every job's conjunction over the full assignment space.
    pub fn count_products(&self, jobs: &[ProductJob]) -> Vec<u128> {
        let mut flat = ProductJobs::new();
        for job in jobs {
            flat.push(&job.factors);
        }
        self.count_product_batch(&flat)
    }

    /// Flat-batch variant of [`SliceOracle::count_products`].
    pub fn count_product_batch(&self, jobs: &ProductJobs) -> Vec<u128> {
        let n = self.arena.num_inputs();
        let total: u64 = 1u64 << n;
        let total_words = total.div_ceil(TruthSlice::WIDTH as u64).max(1);
        let gates = self.arena.len();
        let chunk = self.chunk_words.min(total_words as usize);
        // slice storage: gate-major, `chunk` words per gate
        let mut slices = vec![0u64; gates * chunk];
        let mut counts = vec![0u128; jobs.len()];
        let mut word_index = 0u64;
        while word_index < total_words {
            let words_here = chunk.min((total_words - word_index) as usize);
            for w in 0..words_here {
                let base = (word_index + w as u64) * TruthSlice::WIDTH as u64;
                // strided write: word w of every gate
                self.eval_block_strided(base, w, chunk, &mut slices);
            }
            let last_block = word_index + words_here as u64 == total_words;
            for (i, count) in counts.iter_mut().enumerate() {
                *count +=
                    self.accumulate(jobs.job(i), &slices, chunk, words_here, last_block, n);
            }
            word_index += words_here as u64;
        }
        counts
    }

    fn eval_block_strided(&self, base: u64, w: usize, chunk: usize, slices: &mut [u64]) {
        use crate::circuit::Gate;
        for (id, gate) in self.arena.gates().iter().enumerate() {
            let v = match *gate {
                Gate::Const0 => 0,
                Gate::Const1 => !0,
                Gate::Input(i) => crate::circuit::input_slice(i, base),
                Gate::Not(a) => !slices[a as usize * chunk + w],
                Gate::And(a, b) => slices[a as usize * chunk + w] & slices[b as usize * chunk + w],
                Gate::Or(a, b) => slices[a as usize * chunk + w] | slices[b as usize * chunk + w],
                Gate::Xor(a, b) => slices[a as usize * chunk + w] ^ slices[b as usize * chunk + w],
            };
            slices[id * chunk + w] = v;
        }
    }

    fn accumulate(
        &self,
        factors: &[GateId],
        slices: &[u64],
        chunk: usize,
        words_here: usize,
        last_block: bool,
        n: u32,
    ) -> u128 {
        let row = |f: GateId| {
            let base = f as usize * chunk;
            &slices[base..base + words_here]
        };
        let mut acc: u32 = match factors {
            [] => words_here as u32 * 64,
            [a] => row(*a).iter().map(|w| w.count_ones()).sum(),
            [a, b] => {
                row(*a).iter().zip(row(*b)).map(|(x, y)| (x & y).count_ones()).sum()
            }
            [a, b, c] => {
                let (ra, rb, rc) = (row(*a), row(*b), row(*c));
                (0..words_here).map(|w| (ra[w] & rb[w] & rc[w]).count_ones()).sum()
            }
            _ => {
                let mut total = 0u32;
                for w in 0..words_here {
                    let mut word = !0u64;
                    for &f in factors {
                        word &= slices[f as usize * chunk + w];
                    }
                    total += word.count_ones();
                }
                total
            }
        };
        if last_block {
            // correct the final word for spaces smaller than one word
            let mask = space_mask(n);
            if mask != !0 {
                let w = words_here - 1;
                let mut word = !0u64;
                for &f in factors {
                    word &= slices[f as usize * chunk + w];
                }
                acc -= word.count_ones();
                acc += (word & mask).count_ones();
            }
        }
        acc as u128
    }
}
