//! Interchange formats beyond netlists: extended DIMACS for grouped CNF,
//! the graph format for generalized independent-set instances, generator
//! matrices, majority-circuit serialization, and the witness file the
//! prover and verifier exchange.

use anyhow::{anyhow, bail, Context, Result};
use gapunsat_core::amplify::HitterConfig;
use gapunsat_core::cnf::CnfInstance;
use gapunsat_core::codec::{CodeParams, LinearCode};
use gapunsat_core::gis::GisInstance;
use gapunsat_core::symrep::EmajCircuit;
use gapunsat_core::verifier::{ParameterPlan, PipelineConfig};
use std::fmt::Write as _;

use crate::netlist::{parse_netlist_block, print_netlist, significant_lines};

/// Extended DIMACS: standard `p cnf` plus `c ypart <count>` for the Y
/// block and `c group <gid> <clause...>` lines (1-based clause indices)
/// for repetition groups.
pub fn print_dimacs(f: &CnfInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "c ypart {}", f.y_vars);
    let _ = writeln!(out, "p cnf {} {}", f.num_vars(), f.num_clauses());
    for clause in &f.clauses {
        for lit in clause {
            let _ = write!(out, "{lit} ");
        }
        let _ = writeln!(out, "0");
    }
    for (gid, group) in f.groups.iter().enumerate() {
        let _ = write!(out, "c group {gid}");
        for &ci in group {
            let _ = write!(out, " {}", ci + 1);
        }
        let _ = writeln!(out);
    }
    out
}

pub fn parse_dimacs(text: &str) -> Result<CnfInstance> {
    let mut y_vars = 0u32;
    let mut header: Option<(u32, usize)> = None;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut groups: Vec<Vec<u32>> = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some(rest) = line.strip_prefix("c ypart ") {
            y_vars = rest.trim().parse().context("bad ypart")?;
        } else if let Some(rest) = line.strip_prefix("c group ") {
            let mut it = rest.split_whitespace();
            let _gid: usize = it.next().ok_or_else(|| anyhow!("empty group line"))?.parse()?;
            let members: Vec<u32> = it
                .map(|t| t.parse::<u32>().map(|v| v - 1))
                .collect::<std::result::Result<_, _>>()
                .context("bad group member")?;
            groups.push(members);
        } else if line.starts_with('c') {
            continue;
        } else if let Some(rest) = line.strip_prefix("p cnf ") {
            let mut it = rest.split_whitespace();
            let vars: u32 = it.next().ok_or_else(|| anyhow!("bad p line"))?.parse()?;
            let count: usize = it.next().ok_or_else(|| anyhow!("bad p line"))?.parse()?;
            header = Some((vars, count));
        } else {
            let mut clause = Vec::new();
            for tok in line.split_whitespace() {
                let lit: i32 = tok.parse().context("bad literal")?;
                if lit == 0 {
                    break;
                }
                clause.push(lit);
            }
            clauses.push(clause);
        }
    }
    let (vars, count) = header.ok_or_else(|| anyhow!("missing p cnf header"))?;
    if clauses.len() != count {
        bail!("clause count mismatch: header {count}, found {}", clauses.len());
    }
    if y_vars > vars {
        bail!("ypart exceeds variable count");
    }
    let clause_width = clauses.iter().map(|c| c.len() as u32).max().unwrap_or(0);
    let inst = if groups.is_empty() {
        CnfInstance::with_singleton_groups(y_vars, vars - y_vars, clauses)
            .map_err(|e| anyhow!("{e}"))?
    } else {
        let inst = CnfInstance { y_vars, z_vars: vars - y_vars, clauses, groups, clause_width };
        inst.validate().map_err(|e| anyhow!("{e}"))?;
        inst
    };
    Ok(inst)
}

/// Graph format: `p gis <V> <E> <ywidth>`, one `g <v> <gid>` tag per
/// vertex, `s <v> <i> <b>` per codeword constraint, `e <u> <v>` per edge.
/// Vertices are 1-based.
pub fn print_gis(g: &GisInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p gis {} {} {}", g.num_vertices(), g.num_edges(), g.y_width);
    for (i, v) in g.vertices.iter().enumerate() {
        let _ = writeln!(out, "g {} {}", i + 1, v.group);
    }
    for (i, v) in g.vertices.iter().enumerate() {
        for &(bit, b) in &v.s_pairs {
            let _ = writeln!(out, "s {} {} {}", i + 1, bit, b as u8);
        }
    }
    for &(u, v) in &g.edges {
        let _ = writeln!(out, "e {} {}", u + 1, v + 1);
    }
    out
}

/// The graph-format payload: structure without the per-vertex assignments
/// (which the format intentionally omits).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GisDocument {
    pub vertex_count: usize,
    pub y_width: u32,
    pub groups: Vec<u32>,
    pub s_pairs: Vec<Vec<(u32, bool)>>,
    pub edges: Vec<(u32, u32)>,
}

impl GisDocument {
    pub fn of(g: &GisInstance) -> Self {
        Self {
            vertex_count: g.num_vertices(),
            y_width: g.y_width,
            groups: g.vertices.iter().map(|v| v.group).collect(),
            s_pairs: g.vertices.iter().map(|v| v.s_pairs.clone()).collect(),
            edges: g.edges.clone(),
        }
    }
}

pub fn parse_gis(text: &str) -> Result<GisDocument> {
    let mut doc: Option<GisDocument> = None;
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some(rest) = line.strip_prefix("p gis ") {
            let mut it = rest.split_whitespace();
            let v: usize = it.next().ok_or_else(|| anyhow!("bad p gis"))?.parse()?;
            let _e: usize = it.next().ok_or_else(|| anyhow!("bad p gis"))?.parse()?;
            let y: u32 = it.next().ok_or_else(|| anyhow!("bad p gis"))?.parse()?;
            doc = Some(GisDocument {
                vertex_count: v,
                y_width: y,
                groups: vec![0; v],
                s_pairs: vec![Vec::new(); v],
                edges: Vec::new(),
            });
        } else if let Some(rest) = line.strip_prefix("g ") {
            let d = doc.as_mut().ok_or_else(|| anyhow!("g before header"))?;
            let mut it = rest.split_whitespace();
            let v: usize = it.next().ok_or_else(|| anyhow!("bad g line"))?.parse()?;
            let gid: u32 = it.next().ok_or_else(|| anyhow!("bad g line"))?.parse()?;
            d.groups[v - 1] = gid;
        } else if let Some(rest) = line.strip_prefix("s ") {
            let d = doc.as_mut().ok_or_else(|| anyhow!("s before header"))?;
            let mut it = rest.split_whitespace();
            let v: usize = it.next().ok_or_else(|| anyhow!("bad s line"))?.parse()?;
            let bit: u32 = it.next().ok_or_else(|| anyhow!("bad s line"))?.parse()?;
            let b: u8 = it.next().ok_or_else(|| anyhow!("bad s line"))?.parse()?;
            d.s_pairs[v - 1].push((bit, b != 0));
        } else if let Some(rest) = line.strip_prefix("e ") {
            let d = doc.as_mut().ok_or_else(|| anyhow!("e before header"))?;
            let mut it = rest.split_whitespace();
            let u: u32 = it.next().ok_or_else(|| anyhow!("bad e line"))?.parse()?;
            let v: u32 = it.next().ok_or_else(|| anyhow!("bad e line"))?.parse()?;
            d.edges.push((u - 1, v - 1));
        } else {
            bail!("unrecognized line `{line}`");
        }
    }
    doc.ok_or_else(|| anyhow!("missing p gis header"))
}

/// Generator matrix: header then one codeword-bit row of `0`/`1` per line.
pub fn print_code(code: &LinearCode) -> String {
    let mut out = String::new();
    let (num, den) = code.delta();
    let _ = writeln!(out, "code n={} cn={} delta={}/{}", code.n(), code.cn(), num, den);
    for i in 1..=code.cn() {
        let support = code.support(i).expect("row within cn");
        let mut row = String::with_capacity(code.n() as usize);
        for j in 0..code.n() {
            row.push(if support.contains(&j) { '1' } else { '0' });
        }
        let _ = writeln!(out, "{row}");
    }
    out
}

pub fn parse_code(text: &str) -> Result<LinearCode> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| anyhow!("missing code header"))?;
    let fields = parse_kv(header.strip_prefix("code ").ok_or_else(|| anyhow!("bad header"))?)?;
    let n: u32 = get_field(&fields, "n")?.parse()?;
    let cn: u32 = get_field(&fields, "cn")?.parse()?;
    let (dn, dd) = parse_fraction(get_field(&fields, "delta")?)?;
    let mut rows = Vec::with_capacity(cn as usize);
    for line in lines {
        let mut mask = 0u64;
        if line.len() != n as usize {
            bail!("row `{line}` has wrong length");
        }
        for (j, ch) in line.chars().enumerate() {
            match ch {
                '1' => mask |= 1 << j,
                '0' => {}
                _ => bail!("bad matrix character `{ch}`"),
            }
        }
        rows.push(mask);
    }
    if rows.len() != cn as usize {
        bail!("expected {cn} rows, found {}", rows.len());
    }
    LinearCode::from_rows(n, rows, (dn, dd)).map_err(|e| anyhow!("{e}"))
}

/// Majority-circuit serialization: `emaj t=<t> u=<u>` followed by one
/// netlist block per subcircuit.
pub fn print_emaj(e: &EmajCircuit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "emaj t={} u={}", e.subcircuits().len(), e.threshold());
    for sub in e.subcircuits() {
        out.push_str(&print_netlist(sub));
    }
    out
}

pub fn parse_emaj(text: &str) -> Result<EmajCircuit> {
    let mut lines = significant_lines(text);
    parse_emaj_block(&mut lines)
}

fn parse_emaj_block<'a>(lines: &mut impl Iterator<Item = &'a str>) -> Result<EmajCircuit> {
    let header = lines.next().ok_or_else(|| anyhow!("missing emaj header"))?;
    let fields = parse_kv(header.strip_prefix("emaj ").ok_or_else(|| anyhow!("bad emaj"))?)?;
    let t: usize = get_field(&fields, "t")?.parse()?;
    let u: u64 = get_field(&fields, "u")?.parse()?;
    let mut subs = Vec::with_capacity(t);
    for _ in 0..t {
        subs.push(parse_netlist_block(lines)?);
    }
    EmajCircuit::new(subs, u).map_err(|e| anyhow!("{e}"))
}

/// The witness file: the pipeline configuration needed to reproduce the
/// instance, an echo of the realized plan for cross-checking, and the
/// majority circuit itself.
pub fn print_witness_file(cfg: &PipelineConfig, plan: &ParameterPlan, e: &EmajCircuit) -> String {
    let mut out = String::new();
    let weight = cfg.code.row_weight.map(|w| w.to_string()).unwrap_or_else(|| "none".into());
    let strings = cfg
        .hitter
        .strings_per_seed
        .map(|t| t.to_string())
        .unwrap_or_else(|| "auto".into());
    let _ = writeln!(
        out,
        "config gap={} krep={} psi={} strings={} lambda={} hitter_seed={} code_c={} code_delta={}/{} code_weight={} code_seed={}",
        cfg.gap,
        cfg.repetition,
        cfg.hitter.psi,
        strings,
        cfg.hitter.lambda_budget,
        cfg.hitter.seed,
        cfg.code.c,
        cfg.code.delta.0,
        cfg.code.delta.1,
        weight,
        cfg.code_seed,
    );
    let _ = writeln!(
        out,
        "plan n={} index_bits={} m={} kappa={} n2={}",
        plan.data_inputs, plan.index_bits, plan.base_clauses, plan.kappa, plan.n2,
    );
    out.push_str(&print_emaj(e));
    out
}

/// Parsed witness file contents.
pub struct WitnessFile {
    pub config: PipelineConfig,
    pub plan_echo: PlanEcho,
    pub emaj: EmajCircuit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanEcho {
    pub data_inputs: u32,
    pub index_bits: u32,
    pub base_clauses: u64,
    pub kappa: u64,
    pub n2: u64,
}

impl PlanEcho {
    pub fn of(plan: &ParameterPlan) -> Self {
        Self {
            data_inputs: plan.data_inputs,
            index_bits: plan.index_bits,
            base_clauses: plan.base_clauses,
            kappa: plan.kappa,
            n2: plan.n2,
        }
    }
}

pub fn parse_witness_file(text: &str) -> Result<WitnessFile> {
    let mut lines = significant_lines(text).peekable();
    let config_line = lines.next().ok_or_else(|| anyhow!("missing config line"))?;
    let fields =
        parse_kv(config_line.strip_prefix("config ").ok_or_else(|| anyhow!("bad config"))?)?;
    let weight = match get_field(&fields, "code_weight")? {
        "none" => None,
        w => Some(w.parse()?),
    };
    let strings = match get_field(&fields, "strings")? {
        "auto" => None,
        t => Some(t.parse()?),
    };
    let (dn, dd) = parse_fraction(get_field(&fields, "code_delta")?)?;
    let config = PipelineConfig {
        gap: get_field(&fields, "gap")?.parse()?,
        repetition: get_field(&fields, "krep")?.parse()?,
        code: CodeParams {
            c: get_field(&fields, "code_c")?.parse()?,
            delta: (dn, dd),
            row_weight: weight,
            max_retries: 256,
        },
        code_seed: get_field(&fields, "code_seed")?.parse()?,
        hitter: HitterConfig {
            psi: get_field(&fields, "psi")?.parse()?,
            strings_per_seed: strings,
            lambda_budget: get_field(&fields, "lambda")?.parse()?,
            seed: get_field(&fields, "hitter_seed")?.parse()?,
            max_retries: 512,
        },
        ..PipelineConfig::default()
    };
    let plan_line = lines.next().ok_or_else(|| anyhow!("missing plan line"))?;
    let pf = parse_kv(plan_line.strip_prefix("plan ").ok_or_else(|| anyhow!("bad plan"))?)?;
    let plan_echo = PlanEcho {
        data_inputs: get_field(&pf, "n")?.parse()?,
        index_bits: get_field(&pf, "index_bits")?.parse()?,
        base_clauses: get_field(&pf, "m")?.parse()?,
        kappa: get_field(&pf, "kappa")?.parse()?,
        n2: get_field(&pf, "n2")?.parse()?,
    };
    let emaj = parse_emaj_block(&mut lines)?;
    Ok(WitnessFile { config, plan_echo, emaj })
}

fn parse_kv(s: &str) -> Result<Vec<(String, String)>> {
    s.split_whitespace()
        .map(|tok| {
            tok.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| anyhow!("expected key=value, got `{tok}`"))
        })
        .collect()
}

fn get_field<'a>(fields: &'a [(String, String)], key: &str) -> Result<&'a str> {
    fields
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| anyhow!("missing field `{key}`"))
}

fn parse_fraction(s: &str) -> Result<(u32, u32)> {
    let (a, b) = s.split_once('/').ok_or_else(|| anyhow!("expected num/den, got `{s}`"))?;
    Ok((a.parse()?, b.parse()?))
}
