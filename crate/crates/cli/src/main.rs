//! Command-line driver for the counting pipeline.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use gapunsat_cli::formats;
use gapunsat_cli::netlist::{parse_netlist, print_netlist};
use gapunsat_core::amplify::amplify_gap;
use gapunsat_core::circuit::{restrict_inputs, Circuit};
use gapunsat_core::counting::{count_sat, CountConfig};
use gapunsat_core::symrep::EmajCircuit;
use gapunsat_core::verifier::{
    build_honest_witness, build_pipeline, verify_witness, Decision, PipelineConfig, Verdict,
    Witness, WitnessShape,
};

#[derive(Parser)]
#[command(name = "gapunsat", about = "Exact-counting GAP-UNSAT verification pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact model count of a netlist.
    Count {
        netlist: PathBuf,
        /// Bind inputs to constants, e.g. --fixed 7=1,8=0
        #[arg(long)]
        fixed: Option<String>,
    },
    /// Widen a circuit's satisfiable-fraction gap by OR-composition over
    /// a seeded hitting set.
    Amplify {
        netlist: PathBuf,
        #[arg(long = "g")]
        g: u64,
        #[arg(long, default_value_t = 2)]
        psi: u32,
        /// Strings per seed (defaults to a multiple of log2 g).
        #[arg(long)]
        strings: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.9999)]
        lambda: f64,
        /// Output path; stdout when omitted.
        #[arg(short)]
        out: Option<PathBuf>,
    },
    /// Full pipeline in prove mode: build instance, construct the honest
    /// witness, run all verification phases.
    E2e {
        netlist: PathBuf,
        #[command(flatten)]
        plan: PlanArgs,
    },
    /// Build the instance and write the honest witness file.
    Prove {
        netlist: PathBuf,
        #[arg(short)]
        out: PathBuf,
        #[command(flatten)]
        plan: PlanArgs,
    },
    /// Verify an externally supplied witness file against a netlist.
    Verify {
        netlist: PathBuf,
        #[arg(long)]
        witness: PathBuf,
    },
    /// Run the built-in invariant suite.
    Selftest,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    gap: Option<u64>,
    #[arg(long)]
    psi: Option<u32>,
    #[arg(long)]
    strings: Option<u32>,
    #[arg(long)]
    krep: Option<u32>,
    #[arg(long)]
    code_c: Option<u32>,
    #[arg(long)]
    code_weight: Option<u32>,
    #[arg(long)]
    code_seed: Option<u64>,
    #[arg(long)]
    hitter_seed: Option<u64>,
}

impl PlanArgs {
    fn apply(&self, mut cfg: PipelineConfig) -> PipelineConfig {
        if let Some(g) = self.gap {
            cfg.gap = g;
        }
        if let Some(p) = self.psi {
            cfg.hitter.psi = p;
        }
        if let Some(t) = self.strings {
            cfg.hitter.strings_per_seed = Some(t);
        }
        if let Some(k) = self.krep {
            cfg.repetition = k;
        }
        if let Some(c) = self.code_c {
            cfg.code.c = c;
        }
        if let Some(w) = self.code_weight {
            cfg.code.row_weight = Some(w);
        }
        if let Some(s) = self.code_seed {
            cfg.code_seed = s;
        }
        if let Some(s) = self.hitter_seed {
            cfg.hitter.seed = s;
        }
        cfg
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Count { netlist, fixed } => {
            let c = load_netlist(&netlist)?;
            let c = match fixed {
                Some(spec) => restrict_inputs(&c, &parse_fixed(&spec)?)
                    .map_err(|e| anyhow!("restricting inputs: {e}"))?,
                None => c,
            };
            let result =
                count_sat(&c, &CountConfig::default()).map_err(|e| anyhow!("counting: {e}"))?;
            println!("{}", result.count);
            Ok(ExitCode::SUCCESS)
        }
        Command::Amplify { netlist, g, psi, strings, seed, lambda, out } => {
            let c = load_netlist(&netlist)?;
            let mut hitter = gapunsat_core::amplify::HitterConfig {
                psi,
                strings_per_seed: strings,
                lambda_budget: lambda,
                seed,
                ..Default::default()
            };
            if strings.is_none() && psi <= 2 {
                // small-overhead profiles need an explicit walk length
                hitter.strings_per_seed =
                    Some(gapunsat_core::amplify::log2_ceil(g) + 1);
            }
            let amp = amplify_gap(&c, g, &hitter).map_err(|e| anyhow!("amplify: {e}"))?;
            let gen = &amp.generator;
            let mut text = String::new();
            text.push_str(&format!(
                "# amplified: g={g} psi={} strings={} step_bits={} lambda={}\n",
                gen.psi(),
                gen.strings_per_seed(),
                gen.step_bits(),
                gen.lambda()
            ));
            text.push_str(&format!(
                "# walk generators: {:?}\n# seed bits: {}\n",
                gen.generators(),
                gen.seed_len()
            ));
            text.push_str(&print_netlist(&amp.circuit));
            emit(out.as_deref(), &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::E2e { netlist, plan } => {
            let c = load_netlist(&netlist)?;
            let cfg = plan.apply(PipelineConfig::default());
            let art = build_pipeline(&c, &cfg).map_err(|e| anyhow!("pipeline: {e}"))?;
            let witness = build_honest_witness(&art, WitnessShape::Single, &[])
                .map_err(|e| anyhow!("witness: {e}"))?;
            let verdict =
                verify_witness(&art, &witness, &cfg).map_err(|e| anyhow!("verify: {e}"))?;
            print_verdict(&verdict);
            Ok(exit_for(&verdict))
        }
        Command::Prove { netlist, out, plan } => {
            let c = load_netlist(&netlist)?;
            let cfg = plan.apply(PipelineConfig::default());
            let art = build_pipeline(&c, &cfg).map_err(|e| anyhow!("pipeline: {e}"))?;
            let witness = build_honest_witness(&art, WitnessShape::Single, &[])
                .map_err(|e| anyhow!("witness: {e}"))?;
            let text = formats::print_witness_file(&cfg, &art.plan, &witness.emaj);
            fs::write(&out, text).with_context(|| format!("writing {}", out.display()))?;
            println!("witness written to {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { netlist, witness } => {
            let c = load_netlist(&netlist)?;
            let text = fs::read_to_string(&witness)
                .with_context(|| format!("reading {}", witness.display()))?;
            let file = formats::parse_witness_file(&text)?;
            let art = build_pipeline(&c, &file.config).map_err(|e| anyhow!("pipeline: {e}"))?;
            let echo = formats::PlanEcho::of(&art.plan);
            if echo != file.plan_echo {
                bail!(
                    "plan mismatch: witness file claims {:?}, recomputed {:?}",
                    file.plan_echo,
                    echo
                );
            }
            let verdict = verify_witness(&art, &Witness::external(file.emaj), &file.config)
                .map_err(|e| anyhow!("verify: {e}"))?;
            print_verdict(&verdict);
            Ok(exit_for(&verdict))
        }
        Command::Selftest => selftest(),
    }
}

fn load_netlist(path: &PathBuf) -> Result<Circuit> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_netlist(&text)
}

fn parse_fixed(spec: &str) -> Result<BTreeMap<u32, bool>> {
    let mut out = BTreeMap::new();
    for part in spec.split(',') {
        let (i, b) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("expected i=b in --fixed, got `{part}`"))?;
        out.insert(i.trim().parse()?, b.trim().parse::<u8>()? != 0);
    }
    Ok(out)
}

fn emit(path: Option<&std::path::Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_verdict(v: &Verdict) {
    println!(
        "plan: n={} m={} krep={} g={} kappa={} n2={} width={}",
        v.plan.data_inputs,
        v.plan.base_clauses,
        v.plan.repetition,
        v.plan.gap,
        v.plan.kappa,
        v.plan.n2,
        v.plan.witness_width
    );
    println!(
        "phases: independence={} consistency={} range={} final={} threshold={}",
        v.independence_sum,
        v.consistency_sum,
        v.range_sum,
        v.final_sum,
        v.plan.threshold()
    );
    println!(
        "oracle calls: independence={} consistency={} final={} range={}",
        v.calls.independence, v.calls.consistency, v.calls.final_phase, v.calls.range_check
    );
    match v.decision {
        Decision::UnsatVerified => println!("verdict: UNSAT-VERIFIED"),
        Decision::Reject => println!("verdict: REJECT"),
    }
}

fn exit_for(v: &Verdict) -> ExitCode {
    match v.decision {
        Decision::UnsatVerified => ExitCode::SUCCESS,
        Decision::Reject => ExitCode::from(1),
    }
}

fn selftest() -> Result<ExitCode> {
    use gapunsat_core::circuit::{self, Gate};
    use gapunsat_core::cnf::{self, PartialAssignment};
    use gapunsat_core::codec::{build_code, CodeParams};
    use gapunsat_core::gis;
    use gapunsat_core::rng::SplitMix64;
    use gapunsat_core::symrep;
    use gapunsat_core::verifier::WitnessFault;

    let mut failures = 0u32;
    let mut check = |name: &str, ok: bool| {
        if ok {
            println!("[ok]   {name}");
        } else {
            println!("[FAIL] {name}");
            failures += 1;
        }
    };

    let mut rng = SplitMix64::new(0x5e1f);
    let random_circuit = |rng: &mut SplitMix64, n: u32, extra: usize| -> Circuit {
        let mut gates: Vec<Gate> = (0..n).map(Gate::Input).collect();
        for _ in 0..extra {
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

    // bitsliced counting equals naive counting
    {
        let cfg = CountConfig::default();
        let ok = (0..50).all(|_| {
            let n = 1 + rng.below(11) as u32;
            let c = random_circuit(&mut rng, n, 20);
            count_sat(&c, &cfg).unwrap().count
                == gapunsat_core::counting::count_sat_naive(&c, &cfg).unwrap().count
        });
        check("bitsliced count matches naive count", ok);
    }

    // majority-to-sum rewrite is the exact square
    {
        let ok = (0..30).all(|_| {
            let n = 1 + rng.below(7) as u32;
            let t = 1 + rng.below(4);
            let subs: Vec<Circuit> = (0..t).map(|_| random_circuit(&mut rng, n, 8)).collect();
            let u = rng.below(t + 1);
            let e = EmajCircuit::new(subs, u).unwrap();
            let s = symrep::emaj_to_sum(&e).unwrap();
            (0..(1u64 << n)).all(|a| {
                let x: Vec<bool> = (0..n).map(|k| (a >> k) & 1 == 1).collect();
                let tally = symrep::emaj_tally(&e, &x).unwrap() as i128;
                symrep::sum_eval(&s, &x).unwrap() == (tally - u as i128).pow(2)
            })
        });
        check("majority rewrite equals squared deviation", ok);
    }

    // verified code distances
    {
        let ok = (4..=8u32).all(|n| {
            build_code(n, n as u64, &CodeParams::default())
                .map(|code| code.verified_distance().unwrap() >= code.distance_target())
                .unwrap_or(false)
        });
        check("code distances meet the target", ok);
    }

    // serial repetition satisfied-group fractions
    {
        let ok = (0..10).all(|_| {
            let vars = 2 + rng.below(4) as u32;
            let m = 2 + rng.below(4) as usize;
            let clauses: Vec<Vec<i32>> = (0..m)
                .map(|_| {
                    let w = 1 + rng.below(3) as usize;
                    (0..w)
                        .map(|_| {
                            let v = 1 + rng.below(vars as u64) as i32;
                            if rng.next_bool() {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect()
                })
                .collect();
            let f = cnf::CnfInstance::with_singleton_groups(0, vars, clauses).unwrap();
            let rep = cnf::serial_repeat(
                &f,
                2,
                cnf::RepeatMode::AllTuples,
                &cnf::RepeatBudget::default(),
            )
            .unwrap();
            (0..(1u64 << vars)).all(|a| {
                let full: Vec<bool> = (0..vars).map(|k| (a >> k) & 1 == 1).collect();
                rep.satisfied_groups(&full) == f.satisfied_clauses(&full).pow(2)
            })
        });
        check("repetition satisfies exact tuple fractions", ok);
    }

    // graph reduction equals group MAX-SAT under codeword restrictions
    {
        let params = CodeParams { c: 2, ..CodeParams::default() };
        let ok = (0..10u64).all(|trial| {
            let code = build_code(3, trial, &params).unwrap();
            let clauses: Vec<Vec<i32>> = (0..6)
                .map(|_| {
                    let w = 1 + rng.below(3) as usize;
                    (0..w)
                        .map(|_| {
                            let v = 1 + rng.below(10) as i32;
                            if rng.next_bool() {
                                v
                            } else {
                                -v
                            }
                        })
                        .collect()
                })
                .collect();
            let f = cnf::CnfInstance::with_singleton_groups(code.cn(), 4, clauses).unwrap();
            let g = gis::fglss_build(&f, &gis::GisBudget::default()).unwrap();
            (0..8u64).all(|xpat| {
                let x: Vec<bool> = (0..3).map(|k| (xpat >> k) & 1 == 1).collect();
                let lab = gis::derive_partial(&g, &code, &x).unwrap();
                let tau = PartialAssignment::from_prefix(&code.encode(&x).unwrap());
                let (mis, _) =
                    gis::max_independent_set(&g, &lab, &gis::GisBudget::default()).unwrap();
                let ms = cnf::maxsat(&f, &tau, &cnf::MaxSatBudget::default()).unwrap();
                mis == ms
            })
        });
        check("independent set equals group MAX-SAT", ok);
    }

    // end-to-end accept, reject, and fault rejection
    {
        let cfg = PipelineConfig {
            hitter: gapunsat_core::amplify::HitterConfig {
                psi: 1,
                strings_per_seed: Some(2),
                lambda_budget: 0.999,
                seed: 3,
                max_retries: 512,
            },
            gap: 4,
            ..PipelineConfig::default()
        };
        let x0 = Circuit::new(3, vec![Gate::Input(0)], 0).unwrap();
        let contradiction = circuit::and2(&x0, &circuit::negate(&x0)).unwrap();
        let art = build_pipeline(&contradiction, &cfg).unwrap();
        let honest = build_honest_witness(&art, WitnessShape::Single, &[]).unwrap();
        let v = verify_witness(&art, &honest, &cfg).unwrap();
        check("unsatisfiable instance is accepted", v.decision == Decision::UnsatVerified);

        let dense = Circuit::new(3, vec![Gate::Input(1)], 0).unwrap();
        let art2 = build_pipeline(&dense, &cfg).unwrap();
        let honest2 = build_honest_witness(&art2, WitnessShape::Single, &[]).unwrap();
        let v2 = verify_witness(&art2, &honest2, &cfg).unwrap();
        check("half-satisfiable instance is rejected", v2.decision == Decision::Reject);

        let faults = [
            WitnessFault::DropVertex(0),
            WitnessFault::Threshold(0),
            WitnessFault::DuplicatePrimary,
        ];
        let ok = faults.iter().all(|f| {
            let w = build_honest_witness(&art2, WitnessShape::Single, &[*f]).unwrap();
            verify_witness(&art2, &w, &cfg).unwrap().decision == Decision::Reject
        });
        check("faulted witnesses are rejected", ok);
    }

    if failures == 0 {
        println!("selftest: all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("selftest: {failures} checks failed");
        Ok(ExitCode::from(1))
    }
}
