//! Command-line front end. Results go to `--out` or stdout as one JSON
//! document; diagnostics go to stderr.
//!
//! Exit codes: 0 success, 2 usage, 3 parse or dimension errors, 4 numerical
//! consistency failures.

use crate::circuit::Circuit;
use crate::dense;
use crate::error::{Error, Result};
use crate::heisenberg::{transform_circuit, zero_state_energy};
use crate::io::{self, CircuitFile, Endpoint, ResultFile};
use crate::metrics::{self, MetricReport};
use crate::opt::{self, Objective, OptResult, OptimizerConfig, Schedule};
use crate::pauli::PauliSum;
use crate::pulse::{self, AtomChain, PulseConfig};
use crate::thermal::{self, Chem, ThermalProblem, ThermalResult};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const THREADS_ENV: &str = "MAGIC_LADDER_THREADS";

/// Tolerance for re-checking an optimizer cost through the full transform.
const RECHECK_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(name = "magic-ladder", version, about = "Clifford + kRz Hamiltonian transformations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Apply a circuit to a Hamiltonian: U^dag H U.
    Transform(TransformArgs),
    /// Minimize the ground-energy cost over Clifford + kRz circuits.
    OptimizeGround(GroundArgs),
    /// Warm-started runs for k = 0..=k_max.
    Ladder(LadderArgs),
    /// Minimize the closed-form free energy of H - mu N.
    OptimizeThermal(ThermalArgs),
    /// Magic, negativity and Gibbs off-diagonal diagnostics.
    Metrics(MetricsArgs),
    /// Optimize Rydberg-chain pulses against a target Hamiltonian.
    PulseOptimize(PulseArgs),
    /// Exact ground energy and, optionally, the grand free energy.
    Exact(ExactArgs),
}

#[derive(Args, Debug, Default)]
pub struct OutputArgs {
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overwrite an existing output file.
    #[arg(long)]
    pub force: bool,
    /// Record elapsed seconds in the result (makes output non-reproducible).
    #[arg(long)]
    pub wall_time: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OnOff {
    On,
    Off,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleArg {
    Random,
    RoundRobin,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveArg {
    Energy,
    Offdiag,
}

#[derive(Args, Debug, Serialize)]
pub struct TransformArgs {
    #[arg(long)]
    pub hamiltonian: PathBuf,
    #[arg(long)]
    pub circuit: PathBuf,
    /// Include the off-diagonal weight of the transformed Hamiltonian.
    #[arg(long)]
    pub report_offdiag: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct OptArgs {
    #[arg(long)]
    pub hamiltonian: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    /// Number of Rz gates.
    #[arg(long, default_value_t = 0)]
    pub rz: usize,
    #[arg(long, default_value_t = 1000)]
    pub restarts: usize,
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    #[arg(long, default_value_t = 10)]
    pub theta_starts: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_grad_iters: usize,
    /// Random seed; generated from the clock and recorded when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = OnOff::On)]
    pub warm_start: OnOff,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Random)]
    pub schedule: ScheduleArg,
    /// Brickwork layers applied before the Rz gates (default: half, rounded up).
    #[arg(long)]
    pub rz_layer: Option<usize>,
    /// Keep every restart's trace in the result.
    #[arg(long)]
    pub keep_traces: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct GroundArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub opt: OptArgs,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Energy)]
    pub objective: ObjectiveArg,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct LadderArgs {
    #[arg(long, default_value_t = 4)]
    pub k_max: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub ground: GroundArgs,
}

#[derive(Args, Debug, Serialize)]
#[command(group(clap::ArgGroup::new("chem").required(true).args(["mu", "target_number"])))]
pub struct ThermalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub opt: OptArgs,
    #[arg(long)]
    pub number_op: PathBuf,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// Fix mu by bisection so that the mean particle number hits this value.
    #[arg(long)]
    pub target_number: Option<f64>,
    /// Run the warm-started ladder up to this many Rz gates instead of a
    /// single optimization at `--rz`.
    #[arg(long)]
    pub k_max: Option<usize>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct MetricsArgs {
    #[arg(long)]
    pub circuit: PathBuf,
    #[arg(long)]
    pub hamiltonian: PathBuf,
    /// Comma-separated subset of magic, negativity, offdiag.
    #[arg(long, default_value = "magic,negativity,offdiag")]
    pub which: String,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu: f64,
    #[arg(long)]
    pub number_op: Option<PathBuf>,
    /// Negativity partitions such as "0,1;2"; single sites by default.
    #[arg(long)]
    pub partitions: Option<String>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct PulseArgs {
    #[arg(long)]
    pub target: PathBuf,
    /// Comma-separated positions in micrometers, or a JSON file holding an
    /// array of positions. Defaults to a uniform chain.
    #[arg(long)]
    pub positions: Option<String>,
    #[arg(long, default_value_t = pulse::DEFAULT_SPACING)]
    pub spacing: f64,
    #[arg(long)]
    pub nearest_only: bool,
    /// Evolution time in microseconds.
    #[arg(long, default_value_t = 0.1)]
    pub time: f64,
    #[arg(long, default_value_t = pulse::DEFAULT_SEGMENTS)]
    pub segments: usize,
    #[arg(long, default_value_t = 20)]
    pub restarts: usize,
    #[arg(long, default_value_t = 30)]
    pub iters: usize,
    #[arg(long, default_value_t = 5.0)]
    pub init_scale: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also optimize against the target transformed by this circuit.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct ExactArgs {
    #[arg(long)]
    pub hamiltonian: PathBuf,
    #[arg(long, requires = "beta")]
    pub number_op: Option<PathBuf>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } | Error::Dimension { .. } | Error::Json(_) => 3,
        Error::Numerical(_) | Error::NotHermitian(_) => 4,
        Error::Invalid(_) | Error::OutOfRange { .. } | Error::TooLarge { .. } | Error::Io(_) => 2,
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Some(t),
            _ => {
                eprintln!("error: {THREADS_ENV} must be a positive integer, got '{v}'");
                return 2;
            }
        },
        Err(_) => None,
    };
    let result = match threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| run(cli.command)),
            Err(e) => {
                eprintln!("error: cannot build thread pool: {e}");
                return 2;
            }
        },
        None => run(cli.command),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cmd: Command) -> Result<()> {
    let start = Instant::now();
    let (mut result, output) = match cmd {
        Command::Transform(a) => (cmd_transform(&a)?, a.output),
        Command::OptimizeGround(a) => (cmd_ground(&a)?, a.output),
        Command::Ladder(a) => (cmd_ladder(&a)?, a.ground.output),
        Command::OptimizeThermal(a) => (cmd_thermal(&a)?, a.output),
        Command::Metrics(a) => (cmd_metrics(&a)?, a.output),
        Command::PulseOptimize(a) => (cmd_pulse(&a)?, a.output),
        Command::Exact(a) => (cmd_exact(&a)?, a.output),
    };
    if output.wall_time {
        result.wall_time = Some(start.elapsed().as_secs_f64());
    }
    io::emit_result(&result, output.out.as_deref(), output.force)
}

fn echo<T: Serialize>(args: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(args)?)
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0)
    })
}

fn optimizer_config(a: &OptArgs, seed: u64, objective: Objective) -> OptimizerConfig {
    OptimizerConfig {
        layers: a.layers,
        rz_count: a.rz,
        restarts: a.restarts,
        iters: a.iters,
        theta_starts: a.theta_starts,
        grad_tol: a.grad_tol,
        max_grad_iters: a.max_grad_iters,
        seed,
        objective,
        warm_start: a.warm_start == OnOff::On,
        seed_basis_state: true,
        schedule: match a.schedule {
            ScheduleArg::Random => Schedule::Random,
            ScheduleArg::RoundRobin => Schedule::RoundRobin,
        },
        rz_layer: a.rz_layer,
        keep_traces: a.keep_traces,
    }
}

fn terms_json(h: &PauliSum) -> serde_json::Value {
    h.terms()
        .iter()
        .map(|t| json!({"coeff": t.coeff, "word": t.op.word_string()}))
        .collect()
}

fn endpoints(r: &OptResult) -> Vec<Endpoint> {
    r.endpoints.iter().map(|&(restart_id, cost)| Endpoint { restart_id, cost }).collect()
}

/// Re-evaluates the reported optimum through the full transform.
fn recheck(h: &PauliSum, r: &OptResult, objective: Objective) -> Result<()> {
    let direct = opt::direct_cost(h, &r.best_circuit, objective)?;
    if (direct - r.best_cost).abs() > RECHECK_TOL * (1.0 + direct.abs()) {
        return Err(Error::Numerical(format!(
            "optimizer cost {} disagrees with the direct transform {direct}",
            r.best_cost
        )));
    }
    Ok(())
}

fn fill_opt(out: &mut ResultFile, r: &OptResult) {
    out.best_cost = Some(r.best_cost);
    out.best_circuit = Some(CircuitFile::from_ladder(&r.best_circuit));
    out.endpoints = endpoints(r);
    out.trace = Some(r.trace.clone());
}

fn level_json(k: usize, r: &OptResult) -> serde_json::Value {
    json!({
        "k": k,
        "best_cost": r.best_cost,
        "restart_id": r.restart_id,
        "best_circuit": CircuitFile::from_ladder(&r.best_circuit),
        "traces": r.traces,
    })
}

fn cmd_transform(a: &TransformArgs) -> Result<ResultFile> {
    let h = io::load_hamiltonian(&a.hamiltonian)?;
    let cf = io::load_circuit(&a.circuit)?;
    let c = cf.to_circuit()?;
    let h_eff = transform_circuit(&h, &c)?;
    let mut out = ResultFile::new("transform", echo(a)?, 0);
    let e0 = zero_state_energy(&h_eff);
    out.best_cost = Some(e0);
    out.best_circuit = Some(cf);
    let mut data = json!({
        "hamiltonian": terms_json(&h_eff),
        "zero_state_energy": e0,
    });
    if a.report_offdiag {
        data["offdiag_weight"] = json!(h_eff.offdiag_weight()?);
    }
    out.data = data;
    Ok(out)
}

fn objective_of(o: ObjectiveArg) -> Objective {
    match o {
        ObjectiveArg::Energy => Objective::GroundEnergy,
        ObjectiveArg::Offdiag => Objective::OffdiagWeight,
    }
}

fn cmd_ground(a: &GroundArgs) -> Result<ResultFile> {
    let h = io::load_hamiltonian(&a.opt.hamiltonian)?;
    let seed = resolve_seed(a.opt.seed);
    let objective = objective_of(a.objective);
    let r = opt::optimize(&h, &optimizer_config(&a.opt, seed, objective))?;
    recheck(&h, &r, objective)?;
    let mut out = ResultFile::new("optimize-ground", echo(a)?, seed);
    fill_opt(&mut out, &r);
    out.data = json!({ "restart_id": r.restart_id, "traces": r.traces });
    Ok(out)
}

fn cmd_ladder(a: &LadderArgs) -> Result<ResultFile> {
    let g = &a.ground;
    let h = io::load_hamiltonian(&g.opt.hamiltonian)?;
    let seed = resolve_seed(g.opt.seed);
    let objective = objective_of(g.objective);
    let levels = opt::ladder_run(&h, a.k_max, &optimizer_config(&g.opt, seed, objective))?;
    for r in &levels {
        recheck(&h, r, objective)?;
    }
    let mut out = ResultFile::new("ladder", echo(a)?, seed);
    fill_opt(&mut out, levels.last().expect("k_max + 1 levels"));
    out.data = json!({
        "levels": levels.iter().enumerate().map(|(k, r)| level_json(k, r)).collect::<Vec<_>>(),
    });
    Ok(out)
}

fn thermal_json(r: &ThermalResult) -> serde_json::Value {
    json!({
        "k": r.best_circuit.k(),
        "free_energy": r.free_energy,
        "mu_used": r.mu_used,
        "mean_number": r.mean_number,
        "p_summary": r.p_summary,
        "best_circuit": CircuitFile::from_ladder(&r.best_circuit),
    })
}

fn cmd_thermal(a: &ThermalArgs) -> Result<ResultFile> {
    let h = io::load_hamiltonian(&a.opt.hamiltonian)?;
    let number_op = io::load_hamiltonian(&a.number_op)?;
    let seed = resolve_seed(a.opt.seed);
    let chem = match (a.mu, a.target_number) {
        (Some(mu), None) => Chem::Mu(mu),
        (None, Some(t)) => Chem::TargetNumber(t),
        _ => return Err(Error::Invalid("give exactly one of --mu and --target-number".into())),
    };
    let problem = ThermalProblem {
        h,
        number_op,
        beta: a.beta,
        chem,
        cfg: optimizer_config(&a.opt, seed, Objective::FreeEnergy { beta: a.beta }),
    };
    let levels = match a.k_max {
        Some(k) => thermal::thermal_ladder(&problem, k)?,
        None => vec![thermal::optimize_thermal(&problem)?],
    };
    let best = levels.last().expect("at least one level");
    let mut out = ResultFile::new("optimize-thermal", echo(a)?, seed);
    fill_opt(&mut out, &best.opt);
    out.data = json!({
        "free_energy": best.free_energy,
        "mu_used": best.mu_used,
        "mean_number": best.mean_number,
        "p_summary": best.p_summary,
        "levels": levels.iter().map(thermal_json).collect::<Vec<_>>(),
    });
    Ok(out)
}

fn parse_partitions(s: &str, n: usize) -> Result<Vec<Vec<usize>>> {
    s.split(';')
        .map(|part| {
            part.split(',')
                .map(|t| {
                    let q: usize = t
                        .trim()
                        .parse()
                        .map_err(|_| Error::Invalid(format!("invalid site '{t}' in --partitions")))?;
                    if q >= n {
                        return Err(Error::OutOfRange { index: q, n });
                    }
                    Ok(q)
                })
                .collect()
        })
        .collect()
}

fn cmd_metrics(a: &MetricsArgs) -> Result<ResultFile> {
    let h = io::load_hamiltonian(&a.hamiltonian)?;
    let cf = io::load_circuit(&a.circuit)?;
    let c: Circuit = cf.to_circuit()?;
    crate::error::check_dim(h.n(), c.n)?;
    let n = h.n();
    let number_op = match &a.number_op {
        Some(p) => io::load_hamiltonian(p)?,
        None => PauliSum::zero(n),
    };
    let mut report = MetricReport::default();
    let mut want = (false, false, false);
    for w in a.which.split(',').map(str::trim).filter(|w| !w.is_empty()) {
        match w {
            "magic" => want.0 = true,
            "negativity" => want.1 = true,
            "offdiag" => want.2 = true,
            other => return Err(Error::Invalid(format!("unknown metric '{other}'"))),
        }
    }
    if want.0 {
        let psi = dense::simulate(&c, &dense::zero_state(n))?;
        report.magic_m = Some(metrics::stabilizer_entropy(&psi)?);
    }
    if want.1 || want.2 {
        let h_eff = transform_circuit(&h, &c)?;
        let n_eff = transform_circuit(&number_op, &c)?;
        let rho = metrics::gibbs_state(&h_eff, a.beta, a.mu, &n_eff)?;
        if want.1 {
            let parts = match &a.partitions {
                Some(s) => parse_partitions(s, n)?,
                None => (0..n).map(|q| vec![q]).collect(),
            };
            let (v, mean) = metrics::partition_averaged_negativity(&rho, &parts)?;
            report.negativity_per_site = Some(v);
            report.negativity_mean = Some(mean);
        }
        if want.2 {
            report.offdiag = Some(metrics::offdiag_density(&rho));
        }
    }
    let mut out = ResultFile::new("metrics", echo(a)?, 0);
    out.best_circuit = Some(cf);
    out.data = serde_json::to_value(&report)?;
    Ok(out)
}

fn load_positions(arg: &str) -> Result<Vec<f64>> {
    let p = Path::new(arg);
    if p.is_file() {
        return Ok(serde_json::from_str(&std::fs::read_to_string(p)?)?);
    }
    arg.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Invalid(format!("invalid position '{t}'")))
        })
        .collect()
}

fn cmd_pulse(a: &PulseArgs) -> Result<ResultFile> {
    let target = io::load_hamiltonian(&a.target)?;
    let seed = resolve_seed(a.seed);
    let positions = match &a.positions {
        Some(s) => load_positions(s)?,
        None => (0..target.n()).map(|j| j as f64 * a.spacing).collect(),
    };
    let chain = AtomChain::new(positions, a.nearest_only)?;
    crate::error::check_dim(target.n(), chain.n())?;
    let cfg = PulseConfig {
        duration: a.time,
        segments: a.segments,
        restarts: a.restarts,
        max_iters: a.iters,
        seed,
        init_scale: a.init_scale,
        ..PulseConfig::default()
    };
    let mut out = ResultFile::new("pulse-optimize", echo(a)?, seed);
    let (original, transformed, circuit) = match &a.circuit {
        Some(p) => {
            let cf = io::load_circuit(p)?;
            let cmp = pulse::compare(&chain, &target, &cf.to_circuit()?, &cfg)?;
            (cmp.original, Some(cmp.transformed), Some(cf))
        }
        None => (pulse::optimize_pulses(&chain, &target, &cfg)?, None, None),
    };
    out.best_cost = Some(original.best_cost);
    out.best_circuit = circuit;
    out.endpoints = original
        .restarts
        .iter()
        .map(|r| Endpoint { restart_id: r.restart_id, cost: r.cost })
        .collect();
    out.data = json!({
        "chain": chain,
        "original": original,
        "transformed": transformed,
    });
    Ok(out)
}

fn cmd_exact(a: &ExactArgs) -> Result<ResultFile> {
    let h = io::load_hamiltonian(&a.hamiltonian)?;
    let g = dense::exact_ground(&h)?;
    let mut out = ResultFile::new("exact", echo(a)?, 0);
    out.best_cost = Some(g.energy);
    let mut data = json!({ "ground_energy": g.energy });
    if let Some(beta) = a.beta {
        let number_op = match &a.number_op {
            Some(p) => io::load_hamiltonian(p)?,
            None => PauliSum::zero(h.n()),
        };
        let gibbs = dense::exact_grand_free_energy(&h, &number_op, beta, a.mu)?;
        data["free_energy"] = json!(gibbs.free_energy);
        data["entropy"] = json!(dense::von_neumann_entropy(&gibbs.rho));
    }
    out.data = data;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Dimension { expected: 2, got: 3 }), 3);
        assert_eq!(exit_code(&Error::Numerical("x".into())), 4);
        assert_eq!(exit_code(&Error::Invalid("x".into())), 2);
        assert_eq!(dispatch(["magic-ladder", "no-such-command"]), 2);
        assert_eq!(dispatch(["magic-ladder", "optimize-thermal", "--hamiltonian", "h", "--number-op", "n", "--beta", "1"]), 2);
    }

    #[test]
    fn partitions_parse() {
        assert_eq!(parse_partitions("0,1;2", 3).unwrap(), vec![vec![0, 1], vec![2]]);
        assert!(parse_partitions("0;5", 3).is_err());
    }
}
