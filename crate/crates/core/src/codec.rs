//! Linear error-correcting codes over GF(2) with verified distance.
//!
//! A code here is just its generator: `cn` parity rows over `n` message
//! bits. The pipeline consumes codes only through linearity, minimum
//! distance, and the per-output-bit parity circuits, so the construction
//! is a seeded random generator matrix whose distance is checked by an
//! exhaustive weight scan at the sizes we run (and the seed is bumped
//! until the target is met).

use alloc::vec::Vec;
use core::fmt;

use crate::circuit::{self, Circuit};
use crate::rng::SplitMix64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CodeError {
    /// Message length outside the supported range (1..=24 message bits).
    BadLength { n: u32 },
    /// No sampled generator met the distance target within the retry budget.
    DistanceUnreachable { n: u32, target: u32, retries: u32 },
    /// Componentwise access with an out-of-range codeword index.
    IndexOutOfRange { index: u32, cn: u32 },
    /// Encode called with the wrong message length.
    ArityMismatch { expected: u32, got: u32 },
}

impl fmt::Display for CodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeError::BadLength { n } => write!(f, "unsupported message length {n}"),
            CodeError::DistanceUnreachable { n, target, retries } => write!(
                f,
                "no [{n}]-code with distance >= {target} found in {retries} retries"
            ),
            CodeError::IndexOutOfRange { index, cn } => {
                write!(f, "codeword bit {index} out of range 1..={cn}")
            }
            CodeError::ArityMismatch { expected, got } => {
                write!(f, "message has {got} bits, code expects {expected}")
            }
        }
    }
}

/// Construction knobs. `c` is the rate constant (`cn = c * n`), `delta`
/// the claimed relative distance as a fraction of `cn`, and `row_weight`
/// optionally caps the parity support per output bit (smaller supports
/// mean cheaper consistency clauses downstream).
#[derive(Clone, Debug)]
pub struct CodeParams {
    pub c: u32,
    pub delta: (u32, u32),
    pub row_weight: Option<u32>,
    pub max_retries: u32,
}

impl Default for CodeParams {
    fn default() -> Self {
        Self { c: 4, delta: (1, 8), row_weight: None, max_retries: 256 }
    }
}

/// Maximum message length for which construction verifies distance by a
/// full nonzero-message scan.
pub const EXHAUSTIVE_VERIFY_LIMIT: u32 = 14;

/// A binary linear code given by its generator rows. Row `i` holds the
/// message-bit subset whose parity is codeword bit `i+1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearCode {
    n: u32,
    cn: u32,
    rows: Vec<u64>,
    delta: (u32, u32),
    c: u32,
    verified_distance: Option<u32>,
}

impl LinearCode {
    /// Reassembles a code from explicit generator rows (each row a mask of
    /// message bits). Distance is verified exhaustively when the length
    /// permits; otherwise the claimed parameters are taken as-is.
    pub fn from_rows(n: u32, rows: Vec<u64>, delta: (u32, u32)) -> Result<Self, CodeError> {
        if n == 0 || n > 24 || rows.is_empty() {
            return Err(CodeError::BadLength { n });
        }
        let cn = rows.len() as u32;
        let mut code = LinearCode {
            n,
            cn,
            rows,
            delta,
            c: cn.div_ceil(n),
            verified_distance: None,
        };
        if n <= EXHAUSTIVE_VERIFY_LIMIT {
            code.verified_distance = Some(code.min_distance_exhaustive());
        }
        Ok(code)
    }

    /// Message length in bits.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Codeword length in bits.
    pub fn cn(&self) -> u32 {
        self.cn
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn delta(&self) -> (u32, u32) {
        self.delta
    }

    /// Distance target `ceil(delta * cn)` implied by the parameters.
    pub fn distance_target(&self) -> u32 {
        distance_target(self.cn, self.delta)
    }

    /// Exact minimum distance when the builder verified it exhaustively.
    pub fn verified_distance(&self) -> Option<u32> {
        self.verified_distance
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    /// The message-bit support of codeword bit `i` (1-based), 0-based bits.
    pub fn support(&self, i: u32) -> Result<Vec<u32>, CodeError> {
        if i == 0 || i > self.cn {
            return Err(CodeError::IndexOutOfRange { index: i, cn: self.cn });
        }
        let mask = self.rows[(i - 1) as usize];
        Ok((0..self.n).filter(|&j| (mask >> j) & 1 == 1).collect())
    }

    /// Encodes a message given as an index (bit `k` = message bit `k`).
    pub fn encode_index(&self, x: u64) -> Vec<bool> {
        self.rows.iter().map(|&row| (row & x).count_ones() % 2 == 1).collect()
    }

    /// Matrix-vector product over GF(2).
    pub fn encode(&self, x: &[bool]) -> Result<Vec<bool>, CodeError> {
        if x.len() != self.n as usize {
            return Err(CodeError::ArityMismatch { expected: self.n, got: x.len() as u32 });
        }
        let mut packed = 0u64;
        for (k, &b) in x.iter().enumerate() {
            if b {
                packed |= 1 << k;
            }
        }
        Ok(self.encode_index(packed))
    }

    /// One codeword bit as a parity circuit over the message bits, usable
    /// as a subcircuit anywhere a plain circuit is expected.
    pub fn component(&self, i: u32) -> Result<Circuit, CodeError> {
        let support = self.support(i)?;
        circuit::parity_subset(self.n, &support).map_err(|_| CodeError::BadLength { n: self.n })
    }

    fn codeword_weight(&self, x: u64) -> u32 {
        self.rows.iter().map(|&row| (row & x).count_ones() % 2).sum()
    }

    /// Minimum weight over all nonzero messages; exact, O(2^n * cn).
    pub fn min_distance_exhaustive(&self) -> u32 {
        let mut best = u32::MAX;
        for x in 1..(1u64 << self.n) {
            best = best.min(self.codeword_weight(x));
            if best == 0 {
                break;
            }
        }
        best
    }
}

fn distance_target(cn: u32, delta: (u32, u32)) -> u32 {
    // ceil(cn * num / den)
    (cn * delta.0).div_ceil(delta.1)
}

/// Builds a code deterministically from `(n, seed)` under the given
/// parameters. For `n = 1` the repetition code is emitted directly; for
/// `n <= EXHAUSTIVE_VERIFY_LIMIT` the minimum distance is verified
/// exhaustively and the seed is incremented until the target is met.
pub fn build_code(n: u32, seed: u64, params: &CodeParams) -> Result<LinearCode, CodeError> {
    if n == 0 || n > 24 {
        return Err(CodeError::BadLength { n });
    }
    let cn = params.c * n;
    let target = distance_target(cn, params.delta);
    if n == 1 {
        let code = LinearCode {
            n,
            cn,
            rows: alloc::vec![1u64; cn as usize],
            delta: params.delta,
            c: params.c,
            verified_distance: Some(cn),
        };
        return if cn >= target {
            Ok(code)
        } else {
            Err(CodeError::DistanceUnreachable { n, target, retries: 0 })
        };
    }
    for attempt in 0..params.max_retries {
        let mut rng = SplitMix64::new(seed.wrapping_add(attempt as u64));
        let rows: Vec<u64> = (0..cn).map(|_| sample_row(&mut rng, n, params.row_weight)).collect();
        let mut code = LinearCode {
            n,
            cn,
            rows,
            delta: params.delta,
            c: params.c,
            verified_distance: None,
        };
        if n <= EXHAUSTIVE_VERIFY_LIMIT {
            let d = code.min_distance_exhaustive();
            if d < target {
                continue;
            }
            code.verified_distance = Some(d);
        }
        return Ok(code);
    }
    Err(CodeError::DistanceUnreachable { n, target, retries: params.max_retries })
}

fn sample_row(rng: &mut SplitMix64, n: u32, weight: Option<u32>) -> u64 {
    match weight {
        None => loop {
            let row = rng.next_u64() & ((1u64 << n) - 1);
            if row != 0 {
                return row;
            }
        },
        Some(w) => {
            // weights vary over 1..=w; fixed even weights would leave the
            // all-ones message in the kernel
            let w = w.min(n).max(1);
            let target = 1 + rng.below(w as u64) as u32;
            let mut row = 0u64;
            while row.count_ones() < target {
                row |= 1 << rng.below(n as u64);
            }
            row
        }
    }
}
