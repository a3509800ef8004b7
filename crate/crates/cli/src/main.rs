use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use apexp::circle::{build_denjoy, rotation_number, suspension_flow, CircleLift, SuspensionPoint};
use apexp::exponents::{
    find_f_sequences, kronecker_solve, probe_exponent, Direction, FSequence, Forward,
    KroneckerQuery, Orbit, ProbeConfig, SearchConfig, Verdict,
};
use apexp::groups::{build_b_sequence, decide_equivalence, FinGenSubgroup};
use apexp::harness::{run_scenario, specs::OrbitSpec, SCENARIOS};
use apexp::realfield::{rational::parse_rational, RealVector, SymbolBasis};
use apexp::solenoid::{LinearFlowSpec, SolenoidSystem};

#[derive(Parser)]
#[command(
    name = "lab",
    version,
    about = "Exponent groups of almost periodic orbits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a registered scenario; exits nonzero if any expectation fails.
    Run {
        scenario: String,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for CSV dumps.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// List registered scenarios.
    List,
    #[command(subcommand)]
    Bseq(BseqCommand),
    #[command(subcommand)]
    Group(GroupCommand),
    #[command(subcommand)]
    Solenoid(SolenoidCommand),
    /// Rotation number of a lift given as JSON.
    Rotnum {
        #[arg(long)]
        lift: PathBuf,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
    },
    #[command(subcommand)]
    Denjoy(DenjoyCommand),
    #[command(subcommand)]
    Suspend(SuspendCommand),
    #[command(subcommand)]
    Exponents(ExponentsCommand),
    #[command(subcommand)]
    Kronecker(KroneckerCommand),
}

#[derive(Subcommand)]
enum BseqCommand {
    /// Build the B-sequence prefix; prints JSON.
    Build {
        /// Comma-separated maximal independent set.
        #[arg(long)]
        b: String,
        /// Comma-separated elements, starting with 0.
        #[arg(long)]
        elements: String,
    },
}

#[derive(Subcommand)]
enum GroupCommand {
    /// Is x in the group generated by gens?
    Member {
        #[arg(long)]
        gens: String,
        #[arg(long)]
        x: String,
    },
    /// Is M = aN for a nonzero real a?
    Equiv {
        #[arg(long)]
        m: String,
        #[arg(long)]
        n: String,
        #[arg(long)]
        candidate: Option<String>,
        #[arg(long, default_value_t = 6)]
        bound: u32,
    },
}

#[derive(Subcommand)]
enum SolenoidCommand {
    /// CSV rows (t, stage, coordinates...) of the linear flow from the identity.
    Flow {
        /// System JSON, or a B-sequence JSON from `bseq build`.
        #[arg(long)]
        system: PathBuf,
        /// `start:end:count`.
        #[arg(long)]
        t_grid: String,
    },
}

#[derive(Subcommand)]
enum DenjoyCommand {
    /// Build a Denjoy map; prints its intervals as JSON.
    Build {
        #[arg(long)]
        theta: String,
        #[arg(long, default_value = "1/2")]
        lambda: String,
        #[arg(short = 'N', long = "truncation", default_value_t = 40)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum SuspendCommand {
    /// CSV rows (t, s, x) of a suspension orbit.
    Orbit {
        #[arg(long)]
        lift: PathBuf,
        #[arg(long)]
        t_grid: String,
        #[arg(long, default_value_t = 0.0)]
        s0: f64,
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
    },
}

#[derive(Subcommand)]
enum ExponentsCommand {
    /// Probe candidate exponents of an orbit.
    Probe(ProbeArgs),
}

#[derive(Args)]
struct ProbeArgs {
    /// JSON with `orbit`, and either `sequences` or `target` plus search settings.
    #[arg(long)]
    orbit: PathBuf,
    /// One candidate expression per line.
    #[arg(long)]
    candidates: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Only use nonnegative times.
    #[arg(long)]
    forward: bool,
}

#[derive(Subcommand)]
enum KroneckerCommand {
    /// Find t with frac(freq_j t) near target_j.
    Solve {
        #[arg(long)]
        freqs: String,
        #[arg(long, allow_hyphen_values = true)]
        targets: String,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1e12)]
        bound: f64,
        #[arg(long, default_value_t = 0.0)]
        t_min: f64,
        #[arg(long)]
        backward: bool,
    },
}

fn ctx() -> Arc<SymbolBasis> {
    Arc::new(SymbolBasis::standard())
}

fn reals(ctx: &Arc<SymbolBasis>, list: &str) -> Result<Vec<RealVector>> {
    list.split(',')
        .map(|s| RealVector::parse(ctx, s.trim()).with_context(|| format!("parsing {s:?}")))
        .collect()
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        bail!("t-grid must be start:end:count");
    };
    let (a, b): (f64, f64) = (a.parse()?, b.parse()?);
    let n: usize = n.parse()?;
    Ok(match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
            .collect(),
    })
}

fn print_json(v: &Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::List => {
            for s in SCENARIOS {
                println!("{:<22}{}", s.name, s.summary);
            }
        }
        Command::Run {
            scenario,
            params,
            out,
            csv,
        } => {
            let params = params.as_deref().map(read_json).transpose()?;
            let run = run_scenario(&scenario, params.as_ref())?;
            for e in &run.report.expectations {
                eprintln!(
                    "{} {:<40} {}",
                    if e.passed { "PASS" } else { "FAIL" },
                    e.id,
                    e.detail
                );
            }
            eprintln!("runtime {:.2}s", run.runtime.as_secs_f64());
            let text = serde_json::to_string_pretty(&run.report)?;
            match out {
                Some(p) => fs::write(p, text + "\n")?,
                None => println!("{text}"),
            }
            if let Some(dir) = csv {
                for d in &run.dumps {
                    d.write(&dir)?;
                }
            }
            return Ok(run.report.passed);
        }
        Command::Bseq(BseqCommand::Build { b, elements }) => {
            let c = ctx();
            let seq = build_b_sequence(&reals(&c, &b)?, &reals(&c, &elements)?)?;
            print_json(&seq.to_json()?)?;
        }
        Command::Group(GroupCommand::Member { gens, x }) => {
            let c = ctx();
            let g = FinGenSubgroup::new(&c, reals(&c, &gens)?)?;
            let x = RealVector::parse(&c, &x)?;
            let coeffs = g.generator_coefficients(&x)?;
            print_json(&json!({
                "member": coeffs.is_some(),
                "coefficients": coeffs.map(|v| v.iter().map(|c| c.to_string()).collect::<Vec<_>>()),
            }))?;
        }
        Command::Group(GroupCommand::Equiv {
            m,
            n,
            candidate,
            bound,
        }) => {
            let c = ctx();
            let gm = FinGenSubgroup::new(&c, reals(&c, &m)?)?;
            let gn = FinGenSubgroup::new(&c, reals(&c, &n)?)?;
            let cand = candidate.map(|s| RealVector::parse(&c, &s)).transpose()?;
            print_json(&decide_equivalence(&gm, &gn, cand.as_ref(), bound)?.to_json())?;
        }
        Command::Solenoid(SolenoidCommand::Flow { system, t_grid }) => {
            let v = read_json(&system)?;
            let sys = if v.get("stages").is_some() {
                SolenoidSystem::from_b_sequence(&apexp::groups::BSequence::from_json(&v)?, None)?
            } else {
                SolenoidSystem::from_json(&v)?
            };
            let flow = LinearFlowSpec::new(sys);
            let mut w = io::stdout().lock();
            writeln!(w, "t,stage,coordinates")?;
            for t in grid(&t_grid)? {
                for (i, s) in flow.pi_solenoid(t).stages.iter().enumerate() {
                    let coords: Vec<String> = s.iter().map(f64::to_string).collect();
                    writeln!(w, "{t},{},{}", i + 1, coords.join(" "))?;
                }
            }
        }
        Command::Rotnum { lift, n, x0 } => {
            let lift = CircleLift::from_json(&read_json(&lift)?)?;
            let r = rotation_number(&lift, x0, n)?;
            print_json(&serde_json::to_value(r)?)?;
        }
        Command::Denjoy(DenjoyCommand::Build { theta, lambda, n }) => {
            let c = ctx();
            let d = build_denjoy(
                &RealVector::parse(&c, &theta)?,
                &parse_rational(&lambda)?,
                n,
            )?;
            print_json(&d.to_json())?;
        }
        Command::Suspend(SuspendCommand::Orbit {
            lift,
            t_grid,
            s0,
            x0,
        }) => {
            let lift = CircleLift::from_json(&read_json(&lift)?)?;
            lift.validate()?;
            let base = SuspensionPoint::new(s0, x0);
            let mut w = io::stdout().lock();
            writeln!(w, "t,s,x")?;
            for t in grid(&t_grid)? {
                let p = suspension_flow(&lift, t, base);
                writeln!(w, "{t},{},{}", p.s, p.x)?;
            }
        }
        Command::Exponents(ExponentsCommand::Probe(args)) => return probe(args),
        Command::Kronecker(KroneckerCommand::Solve {
            freqs,
            targets,
            eps,
            bound,
            t_min,
            backward,
        }) => {
            let c = ctx();
            let targets: Vec<f64> = targets
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| anyhow!("target {s:?}: {e}"))
                })
                .collect::<Result<_>>()?;
            let mut q = KroneckerQuery::new(reals(&c, &freqs)?, targets, eps, bound);
            q.t_min = t_min;
            if backward {
                q.direction = Direction::Backward;
            }
            if q.frequencies.len() != q.targets.len() {
                bail!("need one target per frequency");
            }
            print_json(&serde_json::to_value(kronecker_solve(&q)?)?)?;
        }
    }
    Ok(true)
}

/// Sequences come from `sequences: [{label, times, target?}]` in the orbit
/// file, or from a return search toward `target`.
fn probe(args: ProbeArgs) -> Result<bool> {
    let v = read_json(&args.orbit)?;
    let spec = OrbitSpec::from_json(v.get("orbit").ok_or_else(|| anyhow!("missing orbit"))?)?;
    let built = spec.build()?;
    let full: &dyn Orbit = built.orbit.as_ref();
    let semi = Forward(full);
    let orbit: &dyn Orbit = if args.forward { &semi } else { full };
    let target: Option<Vec<f64>> = v
        .get("target")
        .map(|t| serde_json::from_value(t.clone()))
        .transpose()?;
    let mut sequences = Vec::new();
    if let Some(list) = v.get("sequences").and_then(Value::as_array) {
        for (i, s) in list.iter().enumerate() {
            let times: Vec<f64> = serde_json::from_value(
                s.get("times")
                    .cloned()
                    .ok_or_else(|| anyhow!("sequence {i} has no times"))?,
            )?;
            let t = match s.get("target") {
                Some(t) => serde_json::from_value(t.clone())?,
                None => orbit.eval(
                    *times
                        .last()
                        .ok_or_else(|| anyhow!("sequence {i} is empty"))?,
                ),
            };
            let label = s
                .get("label")
                .and_then(Value::as_str)
                .map_or(format!("sequence {i}"), String::from);
            sequences.push(FSequence::new(orbit, label, times, t, None));
        }
    } else if let Some(target) = &target {
        let cfg = SearchConfig {
            grid: v.get("grid").and_then(Value::as_f64).unwrap_or(0.01),
            ..SearchConfig::default()
        };
        let t_max = v.get("t_max").and_then(Value::as_f64).unwrap_or(40.0);
        let count = v.get("count").and_then(Value::as_u64).unwrap_or(2) as usize;
        sequences = find_f_sequences(orbit, target, count, t_max, &cfg).sequences;
    } else {
        bail!("the orbit file needs `sequences` or `target`");
    }
    let c = ctx();
    let text = fs::read_to_string(&args.candidates)?;
    let cfg = ProbeConfig::default();
    let mut reports = Vec::new();
    for line in text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
    {
        let cand = RealVector::parse(&c, line)?;
        let r = probe_exponent(orbit, &cand, &sequences, &cfg);
        eprintln!("{:<20} {:?}", line, r.verdict);
        reports.push(r.to_json());
    }
    let out = json!({"orbit": orbit.describe(), "sequences": sequences.len(), "reports": reports});
    match args.report {
        Some(p) => fs::write(p, serde_json::to_string_pretty(&out)? + "\n")?,
        None => print_json(&out)?,
    }
    Ok(reports
        .iter()
        .all(|r| r["verdict"] != json!(Verdict::Inconclusive)))
}
