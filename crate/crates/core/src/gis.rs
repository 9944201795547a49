//! Clause groups to generalized independent set, and exact solvers.
//!
//! [`fglss_build`] creates one vertex per (group, satisfying assignment
//! of the group's conjunction) and connects vertices whose assignments
//! contradict each other, so same-group vertices always form a clique
//! and the maximum independent set equals the maximum number of
//! simultaneously satisfiable groups. Each vertex also carries the
//! `Y`-restricted part of its assignment as `(codeword bit, expected
//! value)` pairs; [`derive_partial`] turns an input into the partial
//! labeling that zeroes every vertex contradicting the input's codeword.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::cnf::{CnfError, CnfInstance};
use crate::codec::LinearCode;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GisError {
    /// A group touches more variables than the enumeration budget allows.
    GroupTooWide { group: u32, vars: u32, budget: u32 },
    /// The graph exceeds the exact solver's vertex budget.
    SolverBudget { vertices: usize, budget: usize },
    /// Two vertices forced in by 1-labels are adjacent.
    ConflictingForcedOnes { u: u32, v: u32 },
    /// The provided assignment fails to satisfy some group.
    InvalidWitness { group: u32 },
    /// A labeling's domain does not match the vertex count.
    LabelingSize { expected: usize, got: usize },
    /// The input length does not match the code.
    InputArity { expected: u32, got: u32 },
    Cnf(CnfError),
}

impl fmt::Display for GisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GisError::GroupTooWide { group, vars, budget } => {
                write!(f, "group {group} touches {vars} vars, budget {budget}")
            }
            GisError::SolverBudget { vertices, budget } => {
                write!(f, "{vertices} vertices exceed solver budget {budget}")
            }
            GisError::ConflictingForcedOnes { u, v } => {
                write!(f, "1-labeled vertices {u} and {v} are adjacent")
            }
            GisError::InvalidWitness { group } => {
                write!(f, "assignment does not satisfy group {group}")
            }
            GisError::LabelingSize { expected, got } => {
                write!(f, "labeling covers {got} vertices, graph has {expected}")
            }
            GisError::InputArity { expected, got } => {
                write!(f, "input has {got} bits, code expects {expected}")
            }
            GisError::Cnf(e) => write!(f, "{e}"),
        }
    }
}

impl From<CnfError> for GisError {
    fn from(e: CnfError) -> Self {
        GisError::Cnf(e)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GisVertex {
    pub group: u32,
    /// Full assignment of the group's variables, sorted by variable.
    pub assignment: Vec<(u32, bool)>,
    /// The Y-restricted pairs: (codeword bit index, expected value).
    pub s_pairs: Vec<(u32, bool)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GisInstance {
    pub vertices: Vec<GisVertex>,
    /// Conflict edges, sorted, each stored once with `u < v`.
    pub edges: Vec<(u32, u32)>,
    pub y_width: u32,
    /// Total group count, including groups with unsatisfiable
    /// conjunctions (they contribute no vertices but still bound the
    /// independent set from above).
    pub group_count: u32,
}

impl GisInstance {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Candidate honest independent-set size.
    pub fn kappa(&self) -> u64 {
        self.group_count as u64
    }

    pub fn adjacency_bitsets(&self) -> Vec<Vec<u64>> {
        let n = self.vertices.len();
        let words = n.div_ceil(64);
        let mut adj = vec![vec![0u64; words]; n];
        for &(u, v) in &self.edges {
            adj[u as usize][v as usize / 64] |= 1 << (v % 64);
            adj[v as usize][u as usize / 64] |= 1 << (u % 64);
        }
        adj
    }

    pub fn are_adjacent(&self, u: u32, v: u32) -> bool {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.edges.binary_search(&(a, b)).is_ok()
    }

    /// True when the vertex set is pairwise non-adjacent.
    pub fn is_independent(&self, set: &[u32]) -> bool {
        for (i, &u) in set.iter().enumerate() {
            for &v in &set[i + 1..] {
                if self.are_adjacent(u, v) {
                    return false;
                }
            }
        }
        true
    }

    /// Structural check: same-group vertices are pairwise adjacent.
    pub fn same_group_cliques_hold(&self) -> bool {
        let by_group = self.vertices_by_group();
        for members in by_group.values() {
            for (i, &u) in members.iter().enumerate() {
                for &v in &members[i + 1..] {
                    if !self.are_adjacent(u, v) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn vertices_by_group(&self) -> BTreeMap<u32, Vec<u32>> {
        let mut by_group: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (i, v) in self.vertices.iter().enumerate() {
            by_group.entry(v.group).or_default().push(i as u32);
        }
        by_group
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Label {
    Zero,
    One,
}

/// A partial vertex labeling; valid independent sets must contain every
/// 1-labeled vertex and no 0-labeled vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexLabeling {
    labels: Vec<Option<Label>>,
}

impl VertexLabeling {
    pub fn unlabeled(n: usize) -> Self {
        Self { labels: vec![None; n] }
    }

    pub fn set(&mut self, v: u32, label: Label) {
        self.labels[v as usize] = Some(label);
    }

    pub fn get(&self, v: u32) -> Option<Label> {
        self.labels[v as usize]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn zero_count(&self) -> usize {
        self.labels.iter().filter(|l| **l == Some(Label::Zero)).count()
    }

    /// True when `set` avoids all 0-labels and contains all 1-labels.
    pub fn consistent_with(&self, set: &[u32]) -> bool {
        if set.iter().any(|&v| self.labels[v as usize] == Some(Label::Zero)) {
            return false;
        }
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == Some(Label::One))
            .all(|(v, _)| set.contains(&(v as u32)))
    }
}

#[derive(Clone, Debug)]
pub struct GisBudget {
    /// Max distinct variables per group (the per-group enumeration is
    /// 2^vars).
    pub max_group_vars: u32,
    /// Hard vertex cap for the exact solver.
    pub max_solver_vertices: usize,
    /// Below this vertex count the solver uses the plain bitmask search.
    pub bitmask_threshold: usize,
}

impl Default for GisBudget {
    fn default() -> Self {
        Self { max_group_vars: 18, max_solver_vertices: 5000, bitmask_threshold: 30 }
    }
}

/// Builds the generalized independent-set instance of a grouped CNF.
pub fn fglss_build(f: &CnfInstance, budget: &GisBudget) -> Result<GisInstance, GisError> {
    f.validate()?;
    let mut vertices: Vec<GisVertex> = Vec::new();
    for (gid, group) in f.groups.iter().enumerate() {
        let mut vars: Vec<u32> = group
            .iter()
            .flat_map(|&ci| f.clauses[ci as usize].iter().map(|l| l.unsigned_abs()))
            .collect();
        vars.sort_unstable();
        vars.dedup();
        if vars.len() as u32 > budget.max_group_vars {
            return Err(GisError::GroupTooWide {
                group: gid as u32,
                vars: vars.len() as u32,
                budget: budget.max_group_vars,
            });
        }
        for pattern in 0..(1u64 << vars.len()) {
            let assignment: Vec<(u32, bool)> = vars
                .iter()
                .enumerate()
                .map(|(pos, &v)| (v, (pattern >> pos) & 1 == 1))
                .collect();
            let value = |v: u32| assignment[vars.binary_search(&v).unwrap()].1;
            let ok = group.iter().all(|&ci| {
                f.clauses[ci as usize]
                    .iter()
                    .any(|&lit| value(lit.unsigned_abs()) == (lit > 0))
            });
            if ok {
                let s_pairs = assignment
                    .iter()
                    .filter(|(v, _)| *v <= f.y_vars)
                    .map(|&(v, b)| (v, b))
                    .collect();
                vertices.push(GisVertex { group: gid as u32, assignment, s_pairs });
            }
        }
    }

    // conflict edges via per-variable occurrence lists
    let mut pos: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    let mut neg: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for (i, vert) in vertices.iter().enumerate() {
        for &(v, b) in &vert.assignment {
            if b {
                pos.entry(v).or_default().push(i as u32);
            } else {
                neg.entry(v).or_default().push(i as u32);
            }
        }
    }
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for (v, ps) in &pos {
        if let Some(ns) = neg.get(v) {
            for &a in ps {
                for &b in ns {
                    edges.push(if a < b { (a, b) } else { (b, a) });
                }
            }
        }
    }
    edges.sort_unstable();
    edges.dedup();

    Ok(GisInstance { vertices, edges, y_width: f.y_vars, group_count: f.groups.len() as u32 })
}

/// The partial labeling induced by input `x`: a vertex is zeroed exactly
/// when one of its `(i, b)` pairs disagrees with `ENC_i(x)`. No vertex is
/// ever labeled 1.
pub fn derive_partial(
    g: &GisInstance,
    code: &LinearCode,
    x: &[bool],
) -> Result<VertexLabeling, GisError> {
    if x.len() != code.n() as usize {
        return Err(GisError::InputArity { expected: code.n(), got: x.len() as u32 });
    }
    let enc = code.encode(x).map_err(|_| GisError::InputArity {
        expected: code.n(),
        got: x.len() as u32,
    })?;
    let mut labeling = VertexLabeling::unlabeled(g.num_vertices());
    for (i, vert) in g.vertices.iter().enumerate() {
        let clash = vert.s_pairs.iter().any(|&(bit, b)| enc[(bit - 1) as usize] != b);
        if clash {
            labeling.set(i as u32, Label::Zero);
        }
    }
    Ok(labeling)
}

/// Exact maximum independent set consistent with the labeling: all
/// 1-labeled vertices forced in, all 0-labeled excluded. Returns the size
/// and the lexicographically least witness among the optima found by the
/// deterministic lowest-index branching order.
pub fn max_independent_set(
    g: &GisInstance,
    labeling: &VertexLabeling,
    budget: &GisBudget,
) -> Result<(u64, Vec<u32>), GisError> {
    if labeling.len() != g.num_vertices() {
        return Err(GisError::LabelingSize { expected: g.num_vertices(), got: labeling.len() });
    }
    if g.num_vertices() > budget.max_solver_vertices {
        return Err(GisError::SolverBudget {
            vertices: g.num_vertices(),
            budget: budget.max_solver_vertices,
        });
    }
    let adj = g.adjacency_bitsets();
    let n = g.num_vertices();
    let words = n.div_ceil(64);

    let mut forced: Vec<u32> = Vec::new();
    let mut live = vec![!0u64; words];
    if words > 0 && n % 64 != 0 {
        live[words - 1] = (1u64 << (n % 64)) - 1;
    }
    for v in 0..n as u32 {
        match labeling.get(v) {
            Some(Label::Zero) => clear_bit(&mut live, v),
            Some(Label::One) => forced.push(v),
            None => {}
        }
    }
    for (i, &u) in forced.iter().enumerate() {
        for &v in &forced[i + 1..] {
            if g.are_adjacent(u, v) {
                return Err(GisError::ConflictingForcedOnes { u, v });
            }
        }
    }
    for &u in &forced {
        clear_bit(&mut live, u);
        for w in 0..words {
            live[w] &= !adj[u as usize][w];
        }
    }

    let (best_size, best_set) = if n <= budget.bitmask_threshold.min(64) {
        // exhaustive single-word search for small graphs
        let live_mask = live.first().copied().unwrap_or(0);
        let adj_mask: Vec<u64> = (0..n)
            .map(|v| adj[v].first().copied().unwrap_or(0))
            .collect();
        let (size, mask) = bitmask_mis(&adj_mask, live_mask);
        let set = (0..n as u32).filter(|&v| (mask >> v) & 1 == 1).collect();
        (size, set)
    } else {
        let groups: Vec<u32> = g.vertices.iter().map(|v| v.group).collect();
        let mut best_size = 0u64;
        let mut best_set: Vec<u32> = Vec::new();
        let mut current: Vec<u32> = Vec::new();
        branch(&adj, &groups, g.group_count, &mut live, &mut current, &mut best_size, &mut best_set);
        (best_size, best_set)
    };

    let mut witness = forced;
    let shift = witness.len() as u64;
    witness.extend(best_set);
    witness.sort_unstable();
    Ok((best_size + shift, witness))
}

/// Plain recursive maximum independent set over single-word adjacency
/// masks: include-or-exclude on the lowest live vertex.
fn bitmask_mis(adj: &[u64], live: u64) -> (u64, u64) {
    if live == 0 {
        return (0, 0);
    }
    let v = live.trailing_zeros() as usize;
    let bit = 1u64 << v;
    let (with_size, with_set) = bitmask_mis(adj, live & !bit & !adj[v]);
    let (without_size, without_set) = bitmask_mis(adj, live & !bit);
    if with_size + 1 >= without_size {
        (with_size + 1, with_set | bit)
    } else {
        (without_size, without_set)
    }
}

fn clear_bit(mask: &mut [u64], v: u32) {
    mask[v as usize / 64] &= !(1 << (v % 64));
}

fn count_live_groups(groups: &[u32], group_count: u32, live: &[u64]) -> u64 {
    let mut seen = vec![false; group_count as usize];
    let mut count = 0u64;
    for (w, &word) in live.iter().enumerate() {
        let mut bits = word;
        while bits != 0 {
            let b = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let g = groups[w * 64 + b] as usize;
            if !seen[g] {
                seen[g] = true;
                count += 1;
            }
        }
    }
    count
}

fn branch(
    adj: &[Vec<u64>],
    groups: &[u32],
    group_count: u32,
    live: &mut Vec<u64>,
    current: &mut Vec<u32>,
    best_size: &mut u64,
    best_set: &mut Vec<u32>,
) {
    let bound = current.len() as u64 + count_live_groups(groups, group_count, live);
    if bound < *best_size
        || (bound == *best_size && !best_set.is_empty())
    {
        return;
    }
    // first live vertex, lowest index
    let mut pick: Option<u32> = None;
    for (w, &word) in live.iter().enumerate() {
        if word != 0 {
            pick = Some((w * 64) as u32 + word.trailing_zeros());
            break;
        }
    }
    let Some(v) = pick else {
        let size = current.len() as u64;
        let improves = size > *best_size
            || (size == *best_size && (best_set.is_empty() || current < best_set));
        if improves {
            *best_size = size;
            *best_set = current.clone();
        }
        return;
    };
    // include v
    let saved = live.clone();
    clear_bit(live, v);
    for w in 0..live.len() {
        live[w] &= !adj[v as usize][w];
    }
    current.push(v);
    branch(adj, groups, group_count, live, current, best_size, best_set);
    current.pop();
    *live = saved;
    // exclude v
    clear_bit(live, v);
    branch(adj, groups, group_count, live, current, best_size, best_set);
    set_bit(live, v);
}

fn set_bit(mask: &mut [u64], v: u32) {
    mask[v as usize / 64] |= 1 << (v % 64);
}

/// Per-group vertex selection matching a full variable assignment that
/// satisfies every group. The result is an independent set of size equal
/// to the group count.
pub fn honest_assignment(
    g: &GisInstance,
    f: &CnfInstance,
    full: &[bool],
) -> Result<Vec<u32>, GisError> {
    let mut chosen = Vec::with_capacity(f.groups.len());
    let mut found = vec![false; f.groups.len()];
    for (i, vert) in g.vertices.iter().enumerate() {
        if found[vert.group as usize] {
            continue;
        }
        let matches = vert
            .assignment
            .iter()
            .all(|&(v, b)| full.get((v - 1) as usize).copied() == Some(b));
        if matches {
            found[vert.group as usize] = true;
            chosen.push(i as u32);
        }
    }
    if let Some(missing) = found.iter().position(|&f| !f) {
        return Err(GisError::InvalidWitness { group: missing as u32 });
    }
    chosen.sort_unstable();
    Ok(chosen)
}
