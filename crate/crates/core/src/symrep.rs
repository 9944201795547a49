//! Exact-majority circuits and their signed-sum representations.
//!
//! An [`EmajCircuit`] fires exactly when a prescribed number `u` of its
//! subcircuits fire. [`emaj_to_sum`] rewrites it into a [`SumCircuit`]
//! computing `(sum_i D_i(x) - u)^2`: a nonnegative signed sum of plain
//! circuits that is zero precisely on the majority circuit's accepting
//! inputs — so the sum circuit represents the *negation* of the majority
//! circuit, and the verifier relies on exactly that polarity.
//!
//! [`sparse_to_emaj_ands`] expands a symmetric function that accepts on
//! few Hamming weights into an exact majority of small AND terms.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::circuit::{self, Circuit, CircuitBuilder, CircuitError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymrepError {
    /// Subcircuits disagree on arity.
    MixedArity,
    /// Threshold exceeds the subcircuit count.
    ThresholdTooLarge { u: u64, t: usize },
    /// The subcircuit list is empty.
    NoSubcircuits,
    /// Sparse expansion requires `k < n/2`.
    UnsupportedSparsity { k: u32, n: u32 },
    /// The expansion would emit more subcircuits than the configured cap.
    ExpansionTooLarge { terms: u128, cap: u128 },
    Circuit(CircuitError),
}

impl fmt::Display for SymrepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymrepError::MixedArity => write!(f, "subcircuits have mixed arities"),
            SymrepError::ThresholdTooLarge { u, t } => {
                write!(f, "threshold {u} exceeds subcircuit count {t}")
            }
            SymrepError::NoSubcircuits => write!(f, "exact-majority circuit needs subcircuits"),
            SymrepError::UnsupportedSparsity { k, n } => {
                write!(f, "sparsity {k} not below n/2 for n = {n}")
            }
            SymrepError::ExpansionTooLarge { terms, cap } => {
                write!(f, "expansion needs {terms} subcircuits, cap is {cap}")
            }
            SymrepError::Circuit(e) => write!(f, "{e}"),
        }
    }
}

impl From<CircuitError> for SymrepError {
    fn from(e: CircuitError) -> Self {
        SymrepError::Circuit(e)
    }
}

/// `EMAJ(D_1, ..., D_t, u)`: outputs 1 iff exactly `u` subcircuits output 1.
#[derive(Clone, Debug)]
pub struct EmajCircuit {
    subcircuits: Vec<Circuit>,
    threshold: u64,
}

impl EmajCircuit {
    pub fn new(subcircuits: Vec<Circuit>, threshold: u64) -> Result<Self, SymrepError> {
        if subcircuits.is_empty() {
            return Err(SymrepError::NoSubcircuits);
        }
        let arity = subcircuits[0].num_inputs();
        if subcircuits.iter().any(|c| c.num_inputs() != arity) {
            return Err(SymrepError::MixedArity);
        }
        if threshold > subcircuits.len() as u64 {
            return Err(SymrepError::ThresholdTooLarge { u: threshold, t: subcircuits.len() });
        }
        Ok(Self { subcircuits, threshold })
    }

    pub fn subcircuits(&self) -> &[Circuit] {
        &self.subcircuits
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn arity(&self) -> u32 {
        self.subcircuits[0].num_inputs()
    }
}

/// Signs of sum-circuit terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn as_i128(self) -> i128 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }
}

/// A signed sum of circuits, optionally carrying the promise that the sum
/// is nonnegative on every input.
#[derive(Clone, Debug)]
pub struct SumCircuit {
    pub terms: Vec<(Sign, Circuit)>,
    pub promised_nonnegative: bool,
}

impl SumCircuit {
    pub fn arity(&self) -> Option<u32> {
        self.terms.first().map(|(_, c)| c.num_inputs())
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }
}

/// Evaluates an exact-majority circuit on one assignment.
pub fn emaj_eval(e: &EmajCircuit, x: &[bool]) -> Result<bool, SymrepError> {
    let mut fired = 0u64;
    for c in &e.subcircuits {
        fired += c.evaluate(x)? as u64;
    }
    Ok(fired == e.threshold)
}

/// Number of subcircuits firing on `x`; the quantity EMAJ thresholds.
pub fn emaj_tally(e: &EmajCircuit, x: &[bool]) -> Result<u64, SymrepError> {
    let mut fired = 0u64;
    for c in &e.subcircuits {
        fired += c.evaluate(x)? as u64;
    }
    Ok(fired)
}

/// Evaluates a signed sum on one assignment.
pub fn sum_eval(s: &SumCircuit, x: &[bool]) -> Result<i128, SymrepError> {
    let mut total = 0i128;
    for (sign, c) in &s.terms {
        total += sign.as_i128() * c.evaluate(x)? as i128;
    }
    Ok(total)
}

/// Rewrites `EMAJ(D_1..D_t, u)` into the signed sum computing
/// `(sum_i D_i(x) - u)^2`, i.e. a nonnegative sum representing the
/// negation of the majority circuit.
///
/// The expansion is `sum_{i,j} (D_i AND D_j) - 2u * sum_i D_i + u^2`,
/// with diagonal products simplified to `D_i` and the `u^2` constant
/// realized as `u^2` copies of the all-ones circuit. Term count is
/// exactly `t^2 + 2ut + u^2`.
pub fn emaj_to_sum(e: &EmajCircuit) -> Result<SumCircuit, SymrepError> {
    let t = e.subcircuits.len();
    let u = e.threshold;
    let n = e.arity();
    let mut terms: Vec<(Sign, Circuit)> = Vec::with_capacity(t * t + 2 * u as usize * t + (u * u) as usize);
    for i in 0..t {
        for j in 0..t {
            if i == j {
                terms.push((Sign::Pos, e.subcircuits[i].clone()));
            } else {
                terms.push((Sign::Pos, circuit::and2(&e.subcircuits[i], &e.subcircuits[j])?));
            }
        }
    }
    for _ in 0..2 * u {
        for d in &e.subcircuits {
            terms.push((Sign::Neg, d.clone()));
        }
    }
    for _ in 0..u * u {
        terms.push((Sign::Pos, circuit::all_ones(n)));
    }
    Ok(SumCircuit { terms, promised_nonnegative: true })
}

/// Largest value `(sum_i D_i - u)^2` can take for a width-`t` majority.
pub fn emaj_square_value_bound(t: u64, u: u64) -> u128 {
    let a = u as u128;
    let b = (t - u) as u128;
    let m = a.max(b);
    m * m
}

/// A symmetric function described by the set of accepted Hamming weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseSymmetric {
    pub arity: u32,
    pub support: BTreeSet<u32>,
}

impl SparseSymmetric {
    pub fn sparsity(&self) -> u32 {
        self.support.len() as u32
    }

    /// Direct evaluation from the defining weight set.
    pub fn eval_index(&self, x: u64) -> bool {
        let w = (x & ((1u64 << self.arity) - 1)).count_ones();
        self.support.contains(&w)
    }
}

/// Multilinear monomial expansion of `prod_{v in support} (sum_i x_i - v)`
/// over the Boolean cube. Keys are sorted 0-based input index sets; the
/// empty key is the constant term. Zero coefficients are dropped.
pub fn multilinear_expansion(f: &SparseSymmetric) -> BTreeMap<Vec<u32>, i128> {
    let mut poly: BTreeMap<Vec<u32>, i128> = BTreeMap::new();
    poly.insert(Vec::new(), 1);
    for &v in &f.support {
        let mut next: BTreeMap<Vec<u32>, i128> = BTreeMap::new();
        for (m, &c) in &poly {
            *next.entry(m.clone()).or_insert(0) -= v as i128 * c;
            for i in 0..f.arity {
                let mut m2 = m.clone();
                match m2.binary_search(&i) {
                    Ok(_) => {} // x_i^2 = x_i on the cube
                    Err(pos) => m2.insert(pos, i),
                }
                *next.entry(m2).or_insert(0) += c;
            }
        }
        next.retain(|_, c| *c != 0);
        poly = next;
    }
    poly.retain(|_, c| *c != 0);
    poly
}

/// Default cap on the number of emitted subcircuits.
pub const SPARSE_EXPANSION_CAP: u128 = 4_000_000;

/// Expands a sparse symmetric function into an exact majority whose
/// subcircuits are small ANDs over (possibly negated) inputs plus
/// all-ones terms, with truth table equal to the defining function.
///
/// Monomials with positive coefficients become AND chains directly. A
/// negative monomial `-x_{i1}..x_{ir}` is replaced through the identity
/// `-prod = sum_j (prefix_j AND NOT x_{ij}) - 1`, which moves its weight
/// into positive AND terms and a constant that lands in the threshold.
pub fn sparse_to_emaj_ands(f: &SparseSymmetric) -> Result<EmajCircuit, SymrepError> {
    let n = f.arity;
    let k = f.sparsity();
    if 2 * k >= n {
        return Err(SymrepError::UnsupportedSparsity { k, n });
    }
    let poly = multilinear_expansion(f);

    let mut planned: u128 = 0;
    for (m, &c) in &poly {
        let mag = c.unsigned_abs();
        planned += if c > 0 { mag } else { mag * m.len().max(1) as u128 };
    }
    if planned > SPARSE_EXPANSION_CAP {
        return Err(SymrepError::ExpansionTooLarge { terms: planned, cap: SPARSE_EXPANSION_CAP });
    }

    let mut subs: Vec<Circuit> = Vec::new();
    let mut threshold: u128 = 0;
    for (m, &c) in &poly {
        let mag = c.unsigned_abs();
        if m.is_empty() {
            if c > 0 {
                for _ in 0..mag {
                    subs.push(circuit::all_ones(n));
                }
            } else {
                threshold += mag;
            }
            continue;
        }
        if c > 0 {
            let chain = and_chain(n, m, None)?;
            for _ in 0..mag {
                subs.push(chain.clone());
            }
        } else {
            threshold += mag;
            for j in 0..m.len() {
                let term = and_chain(n, &m[..j], Some(m[j]))?;
                for _ in 0..mag {
                    subs.push(term.clone());
                }
            }
        }
    }

    if subs.is_empty() || threshold > subs.len() as u128 {
        // The product is never zero on the cube, so the function is
        // identically 0; emit a majority that can never fire.
        return EmajCircuit::new(vec![circuit::all_ones(n)], 0);
    }
    EmajCircuit::new(subs, threshold as u64)
}

/// AND of the listed inputs, optionally extended by one negated input.
fn and_chain(n: u32, positives: &[u32], negated: Option<u32>) -> Result<Circuit, SymrepError> {
    let mut b = CircuitBuilder::new(n);
    let mut wires: Vec<_> = positives.iter().map(|&i| b.input(i)).collect();
    if let Some(i) = negated {
        let w = b.input(i);
        let nw = b.not(w);
        wires.push(nw);
    }
    let out = b.and_all(&wires);
    Ok(b.finish(out))
}
