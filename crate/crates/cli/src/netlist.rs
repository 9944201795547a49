//! Line-oriented netlist text format.
//!
//! ```text
//! # optional comments
//! inputs 3
//! g1 = INPUT x0
//! g2 = INPUT x1
//! g3 = AND g1 g2
//! output g3
//! ```
//!
//! Gates are listed in topological order with ids `g1..gK` matching their
//! position; inputs are referenced as `x<idx>` with `x0` the least
//! significant bit of an assignment index. Printing then parsing is the
//! identity on circuits.

use anyhow::{anyhow, bail, Context, Result};
use gapunsat_core::circuit::{Circuit, Gate, GateId};
use std::fmt::Write as _;

pub fn print_netlist(c: &Circuit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "inputs {}", c.num_inputs());
    for (id, gate) in c.gates().iter().enumerate() {
        let id = id + 1;
        match *gate {
            Gate::Const0 => {
                let _ = writeln!(out, "g{id} = CONST0");
            }
            Gate::Const1 => {
                let _ = writeln!(out, "g{id} = CONST1");
            }
            Gate::Input(i) => {
                let _ = writeln!(out, "g{id} = INPUT x{i}");
            }
            Gate::Not(a) => {
                let _ = writeln!(out, "g{id} = NOT g{}", a + 1);
            }
            Gate::And(a, b) => {
                let _ = writeln!(out, "g{id} = AND g{} g{}", a + 1, b + 1);
            }
            Gate::Or(a, b) => {
                let _ = writeln!(out, "g{id} = OR g{} g{}", a + 1, b + 1);
            }
            Gate::Xor(a, b) => {
                let _ = writeln!(out, "g{id} = XOR g{} g{}", a + 1, b + 1);
            }
        }
    }
    let _ = writeln!(out, "output g{}", c.output() + 1);
    out
}

pub fn parse_netlist(text: &str) -> Result<Circuit> {
    let mut lines = significant_lines(text);
    parse_netlist_block(&mut lines)
}

pub(crate) fn significant_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

/// Parses one netlist block (`inputs` through `output`) from a line
/// iterator, leaving the rest of the stream untouched.
pub(crate) fn parse_netlist_block<'a>(
    lines: &mut impl Iterator<Item = &'a str>,
) -> Result<Circuit> {
    let header = lines.next().ok_or_else(|| anyhow!("missing `inputs` header"))?;
    let n: u32 = header
        .strip_prefix("inputs ")
        .ok_or_else(|| anyhow!("expected `inputs <n>`, got `{header}`"))?
        .trim()
        .parse()
        .context("bad input count")?;
    let mut gates: Vec<Gate> = Vec::new();
    for line in lines {
        if let Some(rest) = line.strip_prefix("output ") {
            let out = parse_gate_ref(rest.trim(), gates.len())?;
            return Circuit::new(n, gates, out).map_err(|e| anyhow!("invalid circuit: {e}"));
        }
        let (lhs, rhs) =
            line.split_once('=').ok_or_else(|| anyhow!("expected `g<id> = ...`: `{line}`"))?;
        let id: usize = lhs
            .trim()
            .strip_prefix('g')
            .ok_or_else(|| anyhow!("gate id must start with g: `{line}`"))?
            .parse()
            .context("bad gate id")?;
        if id != gates.len() + 1 {
            bail!("gate ids must be sequential: expected g{}, got g{id}", gates.len() + 1);
        }
        let mut parts = rhs.split_whitespace();
        let op = parts.next().ok_or_else(|| anyhow!("missing op in `{line}`"))?;
        let gate = match op {
            "CONST0" => Gate::Const0,
            "CONST1" => Gate::Const1,
            "INPUT" => {
                let arg = parts.next().ok_or_else(|| anyhow!("INPUT needs x<idx>"))?;
                let idx: u32 = arg
                    .strip_prefix('x')
                    .ok_or_else(|| anyhow!("input ref must be x<idx>: `{arg}`"))?
                    .parse()
                    .context("bad input index")?;
                Gate::Input(idx)
            }
            "NOT" => {
                let a = parse_gate_ref(
                    parts.next().ok_or_else(|| anyhow!("NOT needs an operand"))?,
                    gates.len(),
                )?;
                Gate::Not(a)
            }
            "AND" | "OR" | "XOR" => {
                let a = parse_gate_ref(
                    parts.next().ok_or_else(|| anyhow!("{op} needs two operands"))?,
                    gates.len(),
                )?;
                let b = parse_gate_ref(
                    parts.next().ok_or_else(|| anyhow!("{op} needs two operands"))?,
                    gates.len(),
                )?;
                match op {
                    "AND" => Gate::And(a, b),
                    "OR" => Gate::Or(a, b),
                    _ => Gate::Xor(a, b),
                }
            }
            other => bail!("unknown op `{other}`"),
        };
        if parts.next().is_some() {
            bail!("trailing tokens in `{line}`");
        }
        gates.push(gate);
    }
    bail!("missing `output` footer")
}

fn parse_gate_ref(token: &str, defined: usize) -> Result<GateId> {
    let id: usize = token
        .strip_prefix('g')
        .ok_or_else(|| anyhow!("gate ref must be g<id>: `{token}`"))?
        .parse()
        .context("bad gate ref")?;
    if id == 0 || id > defined {
        bail!("gate ref g{id} not yet defined");
    }
    Ok((id - 1) as GateId)
}

#[cfg(test)]
mod tests {
    use super::*;
    use gapunsat_core::circuit;

    #[test]
    fn roundtrip_simple() {
        let c = circuit::parity_subset(4, &[0, 2, 3]).unwrap();
        let text = print_netlist(&c);
        let parsed = parse_netlist(&text).unwrap();
        assert_eq!(parsed, c);
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let text = "# header\n\ninputs 1\n# mid\ng1 = INPUT x0\ng2 = NOT g1\noutput g2\n";
        let c = parse_netlist(text).unwrap();
        assert!(c.evaluate(&[false]).unwrap());
    }

    #[test]
    fn rejects_forward_references() {
        let text = "inputs 1\ng1 = NOT g2\ng2 = INPUT x0\noutput g2\n";
        assert!(parse_netlist(text).is_err());
    }
}
