//! gklab: command-line front end for the lab.
//!
//! One binary, git-style subcommands. Reports are line-delimited JSON with
//! the resolved configuration and seed embedded; `--text` renders a human
//! summary instead. Exit codes: 0 ok, 1 user error, 2 resource cap,
//! 3 internal invariant violation.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use gklab_core::circuit::{parse_circuit, serialize_circuit, Circuit, GateKind, TruthTable};
use gklab_core::depthred::{gk_depth2, vv_gk_circuit};
use gklab_core::error::{Caps, Error};
use gklab_core::gen::random_gk;
use gklab_core::poly::interpolate_ball;
use gklab_core::problems::{
    best_linear_agreement, counting_bounds, exact_correlation, solve_2dhlf_bruteforce,
    verify_2dhlf, verify_relation, CorrelationTarget, HlfInstance, RelationInstance,
    RelationOutput, RelationTag,
};
use gklab_core::probpoly::{
    circuit_poly_sampler, estimate_pointwise_error, gk_poly_sampler, or_poly_sampler, DetectorThr,
    ExactThr, PointSet, ThrKind, ThrSource,
};
use gklab_core::report::Envelope;
use gklab_core::rng::CounterRng;
use gklab_core::switchlab::{fourier_level_mass, parseval_sum, switching_experiment, BoundSpec};
use gklab_core::symsat::{brute_force_sat, gc_sat, SatOptions};

#[derive(Parser)]
#[command(
    name = "gklab",
    version,
    about = "circuit-analysis lab",
    disable_help_subcommand = true
)]
struct Cli {
    /// Worker threads for parallel sweeps (0 = library default). Parallel
    /// and serial runs produce identical reports.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Render a human-readable summary instead of JSON.
    #[arg(long, global = true)]
    text: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interpolate a random truth assignment on a Hamming ball.
    Interp(InterpArgs),
    /// Estimate pointwise error of a probabilistic-polynomial sampler.
    Probpoly(ProbpolyArgs),
    /// Build the randomness-efficient constructions and report profiles.
    Depthred(DepthredArgs),
    /// Decide satisfiability through the symmetric-evaluation pipeline.
    Sat(SatArgs),
    /// Random-restriction switching experiment.
    Switch(SwitchArgs),
    /// Walsh-Hadamard level masses of a circuit output.
    Fourier(FourierArgs),
    /// Hidden-linear-function instances, solver, and verifier.
    Hlf(HlfArgs),
    /// Relation-problem instance generation and verification.
    Relation(RelationArgs),
    /// Exact correlation against hard targets.
    Correlate(CorrelateArgs),
    /// Counting bounds for generalized gates vs threshold circuits.
    Count(CountArgs),
}

#[derive(Args, Serialize)]
struct InterpArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    #[arg(long)]
    q: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct ProbpolyArgs {
    /// Sampler: "or", "gk", or "circuit".
    #[arg(long, default_value = "gk")]
    gate: String,
    #[arg(long, default_value_t = 8)]
    n: u32,
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long, default_value_t = 3)]
    q: u64,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    #[arg(long, default_value_t = 2000)]
    trials: u64,
    /// Threshold source for generalized gates: "detector" or "exact".
    #[arg(long, default_value = "detector")]
    thr: String,
    /// Circuit file for --gate circuit.
    #[arg(long)]
    circuit: Option<String>,
    /// Evaluate a sampled subset of points instead of all of them.
    #[arg(long)]
    points: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct DepthredArgs {
    #[arg(long, default_value_t = 6)]
    n: u32,
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long, default_value_t = 3)]
    q: u64,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    /// Also emit the constructed circuit ("depth5" or "depth2") as text.
    #[arg(long)]
    emit: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct SatArgs {
    #[arg(long)]
    circuit: String,
    /// Split-prefix width (default: n/4, rounded up).
    #[arg(long)]
    ell: Option<u32>,
    #[arg(long, default_value_t = 15)]
    repeats: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-point error budget of each randomized conversion.
    #[arg(long, default_value_t = 0.05)]
    budget: f64,
    #[arg(long, default_value_t = 1e-3)]
    max_residual: f64,
    /// Modulus override (inferred from MOD gates when absent).
    #[arg(long)]
    q: Option<u64>,
    /// Compare against the exhaustive scan as well.
    #[arg(long)]
    brute_force: bool,
    /// Emit machine-readable JSON (the default; kept for compatibility).
    #[arg(long)]
    json: bool,
}

#[derive(Args, Serialize)]
struct SwitchArgs {
    #[arg(long)]
    circuit: String,
    /// Restriction schedule: comma-separated star probabilities.
    #[arg(long)]
    p: String,
    #[arg(long)]
    t: u32,
    #[arg(long, default_value_t = 0)]
    r: u32,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bound shape: "syntactic" or "multiswitch".
    #[arg(long, default_value = "syntactic")]
    bound: String,
    /// Exponent of the instantiated bound (default t + 1).
    #[arg(long)]
    bound_t: Option<u32>,
    /// Leaf-depth parameter of the multiswitch bound (default r + 1).
    #[arg(long)]
    bound_r: Option<u32>,
    /// Print per-trial CSV rows before the summary JSON.
    #[arg(long)]
    csv: bool,
}

#[derive(Args, Serialize)]
struct FourierArgs {
    #[arg(long)]
    circuit: String,
    /// Report only this level (default: all levels).
    #[arg(long)]
    level: Option<u32>,
}

#[derive(Args, Serialize)]
struct HlfArgs {
    #[arg(long)]
    grid: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Solve the generated instance and report z.
    #[arg(long)]
    solve: bool,
    /// Verify a proposed z from a JSON file {"z": "0101..."}.
    #[arg(long)]
    verify: Option<String>,
}

#[derive(Args, Serialize)]
struct RelationArgs {
    /// "php", "bend3", "qbend", or "mod3".
    #[arg(long)]
    problem: String,
    #[arg(long, default_value_t = 8)]
    n: u32,
    #[arg(long, default_value_t = 8)]
    m: u32,
    #[arg(long, default_value_t = 4)]
    r: u32,
    /// Modulus for "qbend".
    #[arg(long, default_value_t = 3)]
    q: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Verify outputs from a JSON file {"outputs": [...]}.
    #[arg(long)]
    verify: Option<String>,
}

#[derive(Args, Serialize)]
struct CorrelateArgs {
    /// Circuit file; omit with --best-linear.
    #[arg(long)]
    circuit: Option<String>,
    /// "maj" or "mod:R".
    #[arg(long)]
    target: String,
    /// Sweep all degree-one polynomials instead of a circuit.
    #[arg(long)]
    best_linear: bool,
    #[arg(long, default_value_t = 7)]
    n: u32,
    #[arg(long, default_value_t = 3)]
    q: u64,
}

#[derive(Args, Serialize)]
struct CountArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own message (including help/version output).
            let is_help = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            e.print().expect("write to stderr");
            std::process::exit(if is_help { 0 } else { 1 });
        }
    };
    if cli.workers > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global();
    }
    let caps = Caps::from_env();
    let code = match run(&cli, &caps) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("gklab: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn load_circuit(path: &str) -> Result<Circuit, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read '{path}': {e}")))?;
    let (c, _) = parse_circuit(&text)?;
    let diags = c.validate();
    if !diags.is_empty() {
        let msgs: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        return Err(Error::Input(format!(
            "invalid circuit: {}",
            msgs.join("; ")
        )));
    }
    Ok(c)
}

fn emit<T: Serialize>(cli: &Cli, envelope: &Envelope<T>) {
    if cli.text {
        let v: serde_json::Value =
            serde_json::from_str(&envelope.to_json_line()).expect("valid json");
        if let serde_json::Value::Object(map) = v {
            for (k, val) in map {
                if k == "config" {
                    continue;
                }
                println!("{k:>24}: {val}");
            }
        }
    } else {
        println!("{}", envelope.to_json_line());
    }
}

fn config_json<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("args serialize")
}

fn run(cli: &Cli, caps: &Caps) -> Result<(), Error> {
    match &cli.command {
        Command::Interp(a) => {
            let size = gklab_core::ball::ball_size_checked(a.n, a.k, caps.max_ball_entries)?;
            let mut rng = CounterRng::new(a.seed);
            let truth: Vec<u64> = (0..size).map(|_| rng.next_below(a.q)).collect();
            let poly = interpolate_ball(&truth, a.n, a.k, a.q, caps.max_ball_entries)?;
            let points = gklab_core::ball::ball_points(a.n, a.k);
            let matches = points
                .iter()
                .enumerate()
                .all(|(i, &m)| poly.eval_mask(m) == truth[i]);
            #[derive(Serialize)]
            struct Body {
                polynomial: String,
                degree: u32,
                ball_points: usize,
                matches_ball: bool,
            }
            let body = Body {
                polynomial: poly.to_text(),
                degree: poly.degree(),
                ball_points: size,
                matches_ball: matches,
            };
            if !matches {
                return Err(Error::Internal("interpolation missed a ball point".into()));
            }
            emit(cli, &Envelope::new("interp", config_json(a), a.seed, body));
            Ok(())
        }
        Command::Probpoly(a) => {
            let report = match a.gate.as_str() {
                "or" => {
                    let s = or_poly_sampler(a.n, a.q, a.eps)?;
                    let reference = TruthTable::from_fn(a.n, |x| x != 0);
                    estimate_pointwise_error(
                        &s,
                        &reference,
                        a.trials,
                        a.points.map_or(PointSet::Exhaustive, PointSet::Sampled),
                        a.seed,
                        "or",
                    )?
                }
                "gk" => {
                    let mut rng = CounterRng::new(a.seed ^ 0xb5ad_4ece_da1c_e2a9);
                    let gate = random_gk(a.n, a.k, &mut rng);
                    let thr: Box<dyn ThrSource> = match a.thr.as_str() {
                        "exact" => Box::new(ExactThr::new(a.n, a.k, a.q)?),
                        "detector" => Box::new(DetectorThr::new(a.n, a.k, a.q, a.eps, caps)?),
                        other => {
                            return Err(Error::Input(format!("unknown threshold source '{other}'")))
                        }
                    };
                    let s = gk_poly_sampler(&gate, a.q, a.eps, thr, caps)?;
                    let reference = TruthTable::from_fn(a.n, |x| gate.eval_mask(x));
                    estimate_pointwise_error(
                        &s,
                        &reference,
                        a.trials,
                        a.points.map_or(PointSet::Exhaustive, PointSet::Sampled),
                        a.seed,
                        "gk",
                    )?
                }
                "circuit" => {
                    let path = a
                        .circuit
                        .as_ref()
                        .ok_or_else(|| Error::Input("--gate circuit needs --circuit".into()))?;
                    let c = load_circuit(path)?;
                    let thr_kind = match a.thr.as_str() {
                        "exact" => ThrKind::Exact,
                        "detector" => ThrKind::Detector,
                        other => {
                            return Err(Error::Input(format!("unknown threshold source '{other}'")))
                        }
                    };
                    let s = circuit_poly_sampler(&c, a.q, a.eps, thr_kind, caps)?;
                    let reference = c.truth_table(0, caps)?;
                    estimate_pointwise_error(
                        &s,
                        &reference,
                        a.trials,
                        a.points.map_or(PointSet::Exhaustive, PointSet::Sampled),
                        a.seed,
                        "circuit",
                    )?
                }
                other => return Err(Error::Input(format!("unknown sampler '{other}'"))),
            };
            emit(
                cli,
                &Envelope::new("probpoly", config_json(a), a.seed, report),
            );
            Ok(())
        }
        Command::Depthred(a) => {
            let mut rng = CounterRng::new(a.seed ^ 0x1234_5678_9abc_def0);
            let gate = random_gk(a.n, a.k, &mut rng);
            let five = vv_gk_circuit(&gate, a.q, a.eps, caps)?;
            #[derive(Serialize)]
            struct Body {
                rand_bits: u32,
                copies: u32,
                hash_length: u32,
                error: f64,
                size: usize,
                profile: gklab_core::depthred::LayerProfile,
            }
            let body = Body {
                rand_bits: five.rand_bits,
                copies: five.params.copies,
                hash_length: five.params.m,
                error: five.error,
                size: five.base.size(),
                profile: five.profile.clone(),
            };
            emit(
                cli,
                &Envelope::new("depthred", config_json(a), a.seed, body),
            );
            match a.emit.as_deref() {
                Some("depth5") => print!("{}", serialize_circuit(&five.base, "depth5")),
                Some("depth2") => {
                    let two = gk_depth2(&gate, a.q, a.eps, caps)?;
                    print!("{}", serialize_circuit(&two.base, "depth2"));
                }
                Some(other) => return Err(Error::Input(format!("unknown emit target '{other}'"))),
                None => {}
            }
            Ok(())
        }
        Command::Sat(a) => {
            let c = load_circuit(&a.circuit)?;
            let opts = SatOptions {
                point_budget: a.budget,
                max_residual: a.max_residual,
                modulus: a.q,
            };
            let ell = a.ell.unwrap_or_else(|| c.ninputs().div_ceil(4));
            let report = gc_sat(&c, ell, a.repeats, a.seed, &opts, caps)?;
            #[derive(Serialize)]
            struct Body {
                #[serde(flatten)]
                report: gklab_core::symsat::SatReport,
                brute_force_verdict: Option<gklab_core::symsat::Verdict>,
            }
            let brute = if a.brute_force {
                Some(brute_force_sat(&c, caps)?.verdict)
            } else {
                None
            };
            let body = Body {
                report,
                brute_force_verdict: brute,
            };
            // The report carries the resolved split width.
            let mut config = config_json(a);
            config["ell"] = serde_json::json!(ell);
            emit(cli, &Envelope::new("sat", config, a.seed, body));
            Ok(())
        }
        Command::Switch(a) => {
            let c = load_circuit(&a.circuit)?;
            let schedule: Vec<f64> =
                a.p.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Input(format!("bad probability '{s}'")))
                    })
                    .collect::<Result<_, _>>()?;
            let bound = match a.bound.as_str() {
                "syntactic" => {
                    let table = c.truth_table(0, caps)?;
                    let depth = gklab_core::switchlab::min_dt_depth(&table)?;
                    BoundSpec::Syntactic {
                        source_depth: depth,
                        t: a.bound_t.unwrap_or(a.t + 1),
                    }
                }
                "multiswitch" => {
                    let k = c
                        .nodes()
                        .iter()
                        .filter_map(|n| match n.kind {
                            GateKind::Gk { k, .. } => Some(k),
                            _ => None,
                        })
                        .max()
                        .unwrap_or(0);
                    let w = c.nodes().iter().map(|n| n.inputs.len()).max().unwrap_or(1) as u32;
                    BoundSpec::MultiSwitch {
                        k,
                        s1: c.size() as u64,
                        w,
                        t: a.bound_t.unwrap_or(a.t + 1),
                        r: a.bound_r.unwrap_or(a.r + 1),
                    }
                }
                other => return Err(Error::Input(format!("unknown bound shape '{other}'"))),
            };
            let (report, rows) =
                switching_experiment(&c, &schedule, a.t, a.r, a.trials, a.seed, bound, caps)?;
            if a.csv {
                println!("trial,free_vars,member");
                for row in &rows {
                    println!("{},{},{}", row.trial, row.free_vars, row.member);
                }
            }
            emit(
                cli,
                &Envelope::new("switch", config_json(a), a.seed, report),
            );
            Ok(())
        }
        Command::Fourier(a) => {
            let c = load_circuit(&a.circuit)?;
            let table = c.truth_table(0, caps)?;
            let parseval = parseval_sum(&table, caps)?;
            let levels: Vec<u32> = match a.level {
                Some(l) => vec![l],
                None => (0..=c.ninputs()).collect(),
            };
            let masses: Vec<f64> = levels
                .iter()
                .map(|&l| fourier_level_mass(&table, l, caps))
                .collect::<Result<_, _>>()?;
            // Growth-bound shape with universal constants set to 1:
            // (k (k + log2 size))^(level (depth - 1 means the exponent
            // collapses at depth 1)).
            let k = c
                .nodes()
                .iter()
                .filter_map(|n| match n.kind {
                    GateKind::Gk { k, .. } => Some(k),
                    _ => None,
                })
                .max()
                .unwrap_or(0);
            let size = c.size().max(1) as f64;
            let depth = c.depth().max(1);
            let base = (k.max(1) as f64) * (k as f64 + size.log2()).powi(depth as i32 - 1);
            let bound_shape: Vec<f64> = levels.iter().map(|&l| base.powi(l as i32)).collect();
            #[derive(Serialize)]
            struct Body {
                parseval: f64,
                levels: Vec<u32>,
                masses: Vec<f64>,
                growth_bound_shape: Vec<f64>,
                constants_note: String,
            }
            let body = Body {
                parseval,
                levels,
                masses,
                growth_bound_shape: bound_shape,
                constants_note: "universal constants set to 1; logged for comparison only"
                    .to_string(),
            };
            emit(cli, &Envelope::new("fourier", config_json(a), 0, body));
            Ok(())
        }
        Command::Hlf(a) => {
            let inst = HlfInstance::random(a.grid, a.seed)?;
            #[derive(Serialize)]
            struct Body {
                instance: HlfInstance,
                z: Option<String>,
                accepted: Option<bool>,
            }
            let mut body = Body {
                instance: inst,
                z: None,
                accepted: None,
            };
            if a.solve {
                let z = solve_2dhlf_bruteforce(&body.instance)?;
                let n = body.instance.n();
                let zs: String = (0..n)
                    .map(|i| if z >> i & 1 == 1 { '1' } else { '0' })
                    .collect();
                body.accepted = Some(verify_2dhlf(&body.instance, z)?);
                body.z = Some(zs);
            } else if let Some(path) = &a.verify {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Input(format!("cannot read '{path}': {e}")))?;
                #[derive(serde::Deserialize)]
                struct ZFile {
                    z: String,
                }
                let zf: ZFile = serde_json::from_str(&text)
                    .map_err(|e| Error::Input(format!("bad z file: {e}")))?;
                if zf.z.len() != body.instance.n() as usize {
                    return Err(Error::Input("z length does not match the instance".into()));
                }
                let mut z = 0u64;
                for (i, ch) in zf.z.chars().enumerate() {
                    match ch {
                        '1' => z |= 1 << i,
                        '0' => {}
                        other => return Err(Error::Input(format!("bad z bit '{other}'"))),
                    }
                }
                body.z = Some(zf.z);
                body.accepted = Some(verify_2dhlf(&body.instance, z)?);
            }
            emit(cli, &Envelope::new("hlf", config_json(a), a.seed, body));
            Ok(())
        }
        Command::Relation(a) => {
            let tag = match a.problem.as_str() {
                "php" => RelationTag::Php,
                "bend3" => RelationTag::ParityBending3,
                "qbend" => RelationTag::QrParityBending(a.q),
                "mod3" => RelationTag::ThreeOutputMod3,
                other => return Err(Error::Input(format!("unknown problem '{other}'"))),
            };
            let inst = RelationInstance::random(tag, a.n, a.m, a.r, a.seed)?;
            #[derive(Serialize)]
            struct Body {
                instance: RelationInstance,
                report: Option<gklab_core::problems::RelationReport>,
            }
            let mut body = Body {
                instance: inst,
                report: None,
            };
            if let Some(path) = &a.verify {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Input(format!("cannot read '{path}': {e}")))?;
                let out: RelationOutput = serde_json::from_str(&text)
                    .map_err(|e| Error::Input(format!("bad outputs file: {e}")))?;
                body.report = Some(verify_relation(&body.instance, &out)?);
            }
            emit(
                cli,
                &Envelope::new("relation", config_json(a), a.seed, body),
            );
            Ok(())
        }
        Command::Correlate(a) => {
            #[derive(Serialize)]
            struct Body {
                correlation: f64,
                mode: String,
            }
            let target_of = |spec: &str, n: u32| -> Result<TruthTable, Error> {
                match spec {
                    "maj" => Ok(TruthTable::maj(n)),
                    s if s.starts_with("mod:") => {
                        let r: u32 = s[4..]
                            .parse()
                            .map_err(|_| Error::Input(format!("bad target '{s}'")))?;
                        Ok(TruthTable::mod_m(n, r))
                    }
                    other => Err(Error::Input(format!("unknown target '{other}'"))),
                }
            };
            let body = if a.best_linear {
                let t = target_of(&a.target, a.n)?;
                Body {
                    correlation: best_linear_agreement(a.n, a.q, &t)?,
                    mode: "best-degree-1".to_string(),
                }
            } else {
                let path = a
                    .circuit
                    .as_ref()
                    .ok_or_else(|| Error::Input("--circuit or --best-linear required".into()))?;
                let c = load_circuit(path)?;
                let corr = match a.target.as_str() {
                    "maj" => exact_correlation(&c, &CorrelationTarget::Maj, caps)?,
                    s if s.starts_with("mod:") => {
                        let r: u32 = s[4..]
                            .parse()
                            .map_err(|_| Error::Input(format!("bad target '{s}'")))?;
                        exact_correlation(&c, &CorrelationTarget::Mod(r), caps)?
                    }
                    other => return Err(Error::Input(format!("unknown target '{other}'"))),
                };
                Body {
                    correlation: corr,
                    mode: "circuit".to_string(),
                }
            };
            emit(cli, &Envelope::new("correlate", config_json(a), 0, body));
            Ok(())
        }
        Command::Count(a) => {
            let report = counting_bounds(a.n, a.k)?;
            emit(cli, &Envelope::new("count", config_json(a), 0, report));
            Ok(())
        }
    }
}
