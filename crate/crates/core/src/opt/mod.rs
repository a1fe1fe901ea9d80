//! Hybrid discrete/continuous search over brickwork Clifford + kRz circuits.
//!
//! Discrete parameters are the gate codes and Rz sites; for each discrete
//! choice the cost is minimized over the angles by gradient descent from
//! several starts (the marginalized cost). Coordinates are improved greedily
//! one at a time, restarts run in parallel, and the ladder protocol seeds
//! each `k + 1` run with the best `k` circuit.

mod landscape;
mod symmetry;
mod warm;

pub use landscape::{Objective, ThetaLandscape, ENUMERATION_LIMIT, MAX_RZ};
pub use symmetry::{symmetry_report, SymmetryStats};
pub use warm::{basis_flip_gates, best_basis_state, warm_start_tableau};

use crate::circuit::LadderCircuit;
use crate::error::{Error, Result};
use crate::heisenberg::clifford_pass;
use crate::pauli::{Pauli, PauliString, PauliSum, DEFAULT_TOL};
use crate::tableau::CliffordGate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Uniformly random coordinate per step.
    Random,
    /// Coordinates in order, cycling.
    RoundRobin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub layers: usize,
    pub rz_count: usize,
    /// Number of restarts.
    pub restarts: usize,
    /// Greedy coordinate steps per restart.
    pub iters: usize,
    /// Random angle starts per marginalized cost evaluation.
    pub theta_starts: usize,
    pub grad_tol: f64,
    pub max_grad_iters: usize,
    pub seed: u64,
    pub objective: Objective,
    pub warm_start: bool,
    /// Seed restart 0 with the best computational basis state.
    pub seed_basis_state: bool,
    pub schedule: Schedule,
    /// Number of brickwork layers applied before the Rz gates; `None` uses
    /// `ceil(layers / 2)`.
    pub rz_layer: Option<usize>,
    pub keep_traces: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            layers: 2,
            rz_count: 0,
            restarts: 1000,
            iters: 100,
            theta_starts: 10,
            grad_tol: 1e-8,
            max_grad_iters: 500,
            seed: 0,
            objective: Objective::GroundEnergy,
            warm_start: true,
            seed_basis_state: true,
            schedule: Schedule::Random,
            rz_layer: None,
            keep_traces: false,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if n < 2 {
            return Err(Error::Invalid("the brickwork ansatz needs at least two qubits".into()));
        }
        if self.layers == 0 || self.restarts == 0 || self.theta_starts == 0 || self.max_grad_iters == 0 {
            return Err(Error::Invalid("layers, restarts, theta_starts and max_grad_iters must be at least 1".into()));
        }
        if self.rz_count > n * self.layers || self.rz_count > MAX_RZ {
            return Err(Error::Invalid(format!(
                "rz_count {} exceeds the limit min(n * layers, {MAX_RZ})",
                self.rz_count
            )));
        }
        if let Some(l) = self.rz_layer {
            if l > self.layers {
                return Err(Error::Invalid(format!("rz_layer {l} exceeds layers {}", self.layers)));
            }
        }
        if !(self.grad_tol >= 0.0) {
            return Err(Error::Invalid("grad_tol must be non-negative".into()));
        }
        self.objective.validate(n)
    }

    fn rz_layer(&self) -> usize {
        self.rz_layer.unwrap_or(self.layers.div_ceil(2))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    /// `None` for the initial evaluation.
    pub coordinate: Option<usize>,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RestartOutcome {
    pub restart_id: usize,
    pub circuit: LadderCircuit,
    pub initial_cost: f64,
    pub cost: f64,
    pub trace: Vec<TraceEntry>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptResult {
    pub best_circuit: LadderCircuit,
    pub best_cost: f64,
    /// Trace of the winning restart.
    pub trace: Vec<TraceEntry>,
    pub restart_id: usize,
    pub seed_used: u64,
    /// `(restart_id, final cost)` for every restart.
    pub endpoints: Vec<(usize, f64)>,
    /// Every restart's trace when `keep_traces` is set.
    pub traces: Option<Vec<Vec<TraceEntry>>>,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent RNG stream for a restart.
pub fn restart_rng(seed: u64, restart_id: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(restart_id as u64)))
}

/// Marginalized-cost evaluator for one Hamiltonian and one fixed tail.
pub struct Evaluator<'a> {
    h: &'a PauliSum,
    cfg: &'a OptimizerConfig,
    tail: Vec<CliffordGate>,
    /// `tail^dag H tail`.
    h_tail: Vec<(f64, PauliString)>,
}

fn terms_of(h: &PauliSum) -> Vec<(f64, PauliString)> {
    h.terms().iter().map(|t| (t.coeff, t.op.clone())).collect()
}

fn conjugate_terms(terms: &mut [(f64, PauliString)], gates: &[CliffordGate], n: usize) {
    for g in gates.iter().rev() {
        if !g.is_identity() {
            clifford_pass(terms, &g.axis(n).expect("validated gate"), false);
        }
    }
}

impl<'a> Evaluator<'a> {
    pub fn new(h: &'a PauliSum, cfg: &'a OptimizerConfig, tail: Vec<CliffordGate>) -> Result<Self> {
        let n = h.n();
        for g in &tail {
            g.axis(n)?;
        }
        let mut h_tail = terms_of(h);
        conjugate_terms(&mut h_tail, &tail, n);
        Ok(Self { h, cfg, tail, h_tail })
    }

    pub fn tail(&self) -> &[CliffordGate] {
        &self.tail
    }

    /// Cost landscape over the angles for fixed discrete parameters.
    pub fn landscape(&self, c: &LadderCircuit) -> Result<ThetaLandscape> {
        let n = self.h.n();
        debug_assert_eq!(c.tail, self.tail);
        let before = c.clifford_before();
        let mut terms = self.h_tail.clone();
        let after: Vec<CliffordGate> = c.clifford_after();
        let brick_after = &after[..after.len() - c.tail.len()];
        conjugate_terms(&mut terms, brick_after, n);
        conjugate_terms(&mut terms, &before, n);
        let hp = PauliSum::from_complex(
            n,
            terms.into_iter().map(|(c, p)| (p.x().clone(), p.z().clone(), p.sign_complex() * c)),
            DEFAULT_TOL,
        )?;
        let axes = c
            .rz_sites
            .iter()
            .map(|&q| {
                let mut t = vec![(1.0, PauliString::single(n, q, Pauli::Z)?)];
                conjugate_terms(&mut t, &before, n);
                let (s, p) = t.pop().expect("one term");
                Ok(if s < 0.0 { p.times_i_pow(2) } else { p })
            })
            .collect::<Result<Vec<_>>>()?;
        ThetaLandscape::new(&hp, &axes, self.cfg.objective)
    }

    /// `f(X, theta)`.
    pub fn cost(&self, c: &LadderCircuit) -> Result<f64> {
        self.landscape(c)?.value(&c.thetas)
    }

    /// `min_theta f(X, theta)` from random starts, zero and the incumbent
    /// angles of `c`. Returns the cost and the minimizing angles.
    pub fn marginalized_cost(&self, c: &LadderCircuit, rng: &mut ChaCha8Rng) -> Result<(f64, Vec<f64>)> {
        let land = self.landscape(c)?;
        let k = c.k();
        if k == 0 || land.is_constant() {
            return Ok((land.value(&c.thetas)?, c.thetas.clone()));
        }
        let mut starts: Vec<Vec<f64>> = (0..self.cfg.theta_starts)
            .map(|_| (0..k).map(|_| rng.gen::<f64>() * TAU).collect())
            .collect();
        starts.push(vec![0.0; k]);
        starts.push(c.thetas.clone());
        let mut best: Option<(f64, Vec<f64>)> = None;
        for s in starts {
            let (f, t) = descend(&land, s, self.cfg.grad_tol, self.cfg.max_grad_iters)?;
            if best.as_ref().map_or(true, |b| f < b.0) {
                best = Some((f, t));
            }
        }
        Ok(best.expect("at least two starts"))
    }
}

/// Gradient descent with Barzilai-Borwein trial steps and Armijo
/// backtracking. The returned value never exceeds the starting value.
pub fn descend(land: &ThetaLandscape, theta0: Vec<f64>, grad_tol: f64, max_iters: usize) -> Result<(f64, Vec<f64>)> {
    let mut theta = theta0;
    let (mut f, mut g) = land.value_grad(&theta)?;
    let mut step = 0.5;
    for _ in 0..max_iters {
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gmax <= grad_tol {
            break;
        }
        let g2: f64 = g.iter().map(|v| v * v).sum();
        let mut accepted = None;
        let mut t = step;
        while t > 1e-14 {
            let trial: Vec<f64> = theta.iter().zip(&g).map(|(a, b)| a - t * b).collect();
            let ft = land.value(&trial)?;
            if ft <= f - 1e-4 * t * g2 {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((next, _)) = accepted else { break };
        let (fn_, gn) = land.value_grad(&next)?;
        if fn_ > f {
            break;
        }
        let s: Vec<f64> = next.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let ss: f64 = s.iter().map(|v| v * v).sum();
        step = if sy > 0.0 { (ss / sy).clamp(1e-6, 1e3) } else { (t * 2.0).min(1e3) };
        theta = next;
        f = fn_;
        g = gn;
    }
    Ok((f, theta))
}

fn random_circuit(n: usize, cfg: &OptimizerConfig, k: usize, tail: Vec<CliffordGate>, rng: &mut ChaCha8Rng) -> Result<LadderCircuit> {
    let mut c = LadderCircuit::identity(n, cfg.layers)?;
    c.rz_layer = cfg.rz_layer();
    for v in c.codes.iter_mut() {
        *v = rng.gen_range(0..16u8);
    }
    c.rz_sites = (0..k).map(|_| rng.gen_range(0..n)).collect();
    c.thetas = (0..k).map(|_| rng.gen::<f64>() * TAU).collect();
    c.tail = tail;
    c.validate()?;
    Ok(c)
}

fn seeded_identity(n: usize, cfg: &OptimizerConfig, k: usize, tail: Vec<CliffordGate>) -> Result<LadderCircuit> {
    let mut c = LadderCircuit::identity(n, cfg.layers)?;
    c.rz_layer = cfg.rz_layer();
    c.rz_sites = (0..k).map(|j| j % n).collect();
    c.thetas = vec![0.0; k];
    c.tail = tail;
    c.validate()?;
    Ok(c)
}

/// Candidate values of discrete coordinate `j`.
fn coordinate_range(c: &LadderCircuit, j: usize) -> usize {
    if j < c.codes.len() {
        16
    } else {
        c.n
    }
}

fn coordinate_value(c: &LadderCircuit, j: usize) -> usize {
    if j < c.codes.len() {
        c.codes[j] as usize
    } else {
        c.rz_sites[j - c.codes.len()]
    }
}

fn with_coordinate(c: &LadderCircuit, j: usize, v: usize) -> LadderCircuit {
    let mut out = c.clone();
    if j < out.codes.len() {
        out.codes[j] = v as u8;
    } else {
        let idx = j - out.codes.len();
        out.rz_sites[idx] = v;
    }
    out
}

/// One step of the greedy search: sweeps every value of coordinate `j`,
/// keeps the argmin (lowest value wins ties). The incumbent keeps its
/// current cost, so the returned cost never exceeds `cost`.
pub fn greedy_step(
    ev: &Evaluator,
    c: &LadderCircuit,
    cost: f64,
    j: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(LadderCircuit, f64)> {
    if j >= c.discrete_len() {
        return Err(Error::OutOfRange { index: j, n: c.discrete_len() });
    }
    let current = coordinate_value(c, j);
    let mut best: Option<(f64, LadderCircuit)> = None;
    for v in 0..coordinate_range(c, j) {
        let (f, cand) = if v == current {
            (cost, c.clone())
        } else {
            let mut cand = with_coordinate(c, j, v);
            let (f, th) = ev.marginalized_cost(&cand, rng)?;
            cand.thetas = th;
            (f, cand)
        };
        if best.as_ref().map_or(true, |b| f < b.0) {
            best = Some((f, cand));
        }
    }
    let (f, cand) = best.expect("non-empty range");
    Ok((cand, f))
}

/// Appends one Rz gate to `c`. Candidates are a zero-angle Rz on each site
/// and, where the bond around the Rz layer is idle on both sides, the same
/// code placed before and after it so the Rz acts about a rotated axis. The
/// plain insertion keeps the incoming cost, so the result never exceeds it
/// (lowest candidate wins, ties to the first).
pub fn insert_rz(ev: &Evaluator, c: &LadderCircuit, rng: &mut ChaCha8Rng) -> Result<(LadderCircuit, f64)> {
    let n = c.n;
    let mut best: Option<(f64, LadderCircuit)> = None;
    let mut consider = |cand: LadderCircuit, rng: &mut ChaCha8Rng| -> Result<()> {
        let (f, th) = ev.marginalized_cost(&cand, rng)?;
        if best.as_ref().map_or(true, |b| f < b.0) {
            let mut cand = cand;
            cand.thetas = th;
            best = Some((f, cand));
        }
        Ok(())
    };
    for q in 0..n {
        let mut cand = c.clone();
        cand.rz_sites.push(q);
        cand.thetas.push(0.0);
        consider(cand, rng)?;
    }
    let l = c.rz_layer;
    if l >= 1 && l < c.layers {
        for q in 0..n {
            for g in 0..n {
                let (a, b) = LadderCircuit::bond(n, g);
                let (before, after) = ((l - 1) * n + g, l * n + g);
                if (a != q && b != q) || c.codes[before] != 0 || c.codes[after] != 0 {
                    continue;
                }
                for v in 1..16u8 {
                    let mut cand = c.clone();
                    cand.codes[before] = v;
                    cand.codes[after] = v;
                    cand.rz_sites.push(q);
                    cand.thetas.push(0.0);
                    consider(cand, rng)?;
                }
            }
        }
    }
    let (f, c) = best.expect("n >= 1");
    Ok((c, f))
}

/// Greedy coordinate search from a starting circuit with a known cost.
pub fn greedy_search(
    ev: &Evaluator,
    start: LadderCircuit,
    start_cost: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(LadderCircuit, f64, Vec<TraceEntry>)> {
    let mut c = start;
    let mut cost = start_cost;
    let mut trace = vec![TraceEntry {
        iteration: 0,
        coordinate: None,
        cost,
    }];
    let len = c.discrete_len();
    for it in 1..=ev.cfg.iters {
        if len == 0 {
            break;
        }
        let j = match ev.cfg.schedule {
            Schedule::Random => rng.gen_range(0..len),
            Schedule::RoundRobin => (it - 1) % len,
        };
        let (nc, nf) = greedy_step(ev, &c, cost, j, rng)?;
        c = nc;
        cost = nf;
        trace.push(TraceEntry {
            iteration: it,
            coordinate: Some(j),
            cost,
        });
    }
    Ok((c, cost, trace))
}

/// How restart 0 is initialized.
enum Seed<'a> {
    /// Identity brickwork with a basis-state tail.
    Basis,
    /// The previous ladder level; one zero-angle Rz is inserted.
    Ladder(&'a LadderCircuit),
}

fn run_restart(
    h: &PauliSum,
    cfg: &OptimizerConfig,
    id: usize,
    seed: &Seed,
    warm: &[CliffordGate],
) -> Result<RestartOutcome> {
    let n = h.n();
    let k = cfg.rz_count;
    let mut rng = restart_rng(cfg.seed, id);
    let (ev, start, start_cost) = match (id, seed) {
        (0, Seed::Ladder(prev)) => {
            let ev = Evaluator::new(h, cfg, prev.tail.clone())?;
            let mut base = (*prev).clone();
            while base.k() > k {
                base.rz_sites.pop();
                base.thetas.pop();
            }
            if base.k() + 1 == k {
                let (c, f) = insert_rz(&ev, &base, &mut rng)?;
                (ev, c, f)
            } else {
                let f = ev.cost(&base)?;
                (ev, base, f)
            }
        }
        (0, Seed::Basis) if cfg.seed_basis_state => {
            let tail = basis_flip_gates(&best_basis_state(h));
            let ev = Evaluator::new(h, cfg, tail.clone())?;
            let c = seeded_identity(n, cfg, k, tail)?;
            let f = ev.cost(&c)?;
            (ev, c, f)
        }
        (1, _) if cfg.warm_start && cfg.seed_basis_state => {
            let mut hw = terms_of(h);
            conjugate_terms(&mut hw, warm, n);
            let hw = PauliSum::from_complex(
                n,
                hw.into_iter().map(|(c, p)| (p.x().clone(), p.z().clone(), p.sign_complex() * c)),
                DEFAULT_TOL,
            )?;
            let mut tail = basis_flip_gates(&best_basis_state(&hw));
            tail.extend_from_slice(warm);
            let ev = Evaluator::new(h, cfg, tail.clone())?;
            let c = seeded_identity(n, cfg, k, tail)?;
            let f = ev.cost(&c)?;
            (ev, c, f)
        }
        _ => {
            let tail = if cfg.warm_start { warm.to_vec() } else { Vec::new() };
            let ev = Evaluator::new(h, cfg, tail.clone())?;
            let c = random_circuit(n, cfg, k, tail, &mut rng)?;
            let (f, th) = ev.marginalized_cost(&c, &mut rng)?;
            let mut c = c;
            c.thetas = th;
            (ev, c, f)
        }
    };
    let (circuit, cost, trace) = greedy_search(&ev, start, start_cost, &mut rng)?;
    Ok(RestartOutcome {
        restart_id: id,
        circuit,
        initial_cost: start_cost,
        cost,
        trace,
    })
}

fn collect(cfg: &OptimizerConfig, outcomes: Vec<RestartOutcome>) -> OptResult {
    let best = outcomes
        .iter()
        .min_by(|a, b| a.cost.total_cmp(&b.cost).then(a.restart_id.cmp(&b.restart_id)))
        .expect("at least one restart")
        .clone();
    OptResult {
        best_circuit: best.circuit,
        best_cost: best.cost,
        trace: best.trace,
        restart_id: best.restart_id,
        seed_used: cfg.seed,
        endpoints: outcomes.iter().map(|o| (o.restart_id, o.cost)).collect(),
        traces: cfg.keep_traces.then(|| outcomes.into_iter().map(|o| o.trace).collect()),
    }
}

fn optimize_seeded(h: &PauliSum, cfg: &OptimizerConfig, seed: Seed) -> Result<OptResult> {
    cfg.validate(h.n())?;
    let h = h.canonicalize(DEFAULT_TOL)?;
    let warm = if cfg.warm_start { warm_start_tableau(&h)? } else { Vec::new() };
    let outcomes = run_all(&h, cfg, &seed, &warm)?;
    Ok(collect(cfg, outcomes))
}

fn run_all(h: &PauliSum, cfg: &OptimizerConfig, seed: &Seed, warm: &[CliffordGate]) -> Result<Vec<RestartOutcome>> {
    (0..cfg.restarts)
        .into_par_iter()
        .map(|id| run_restart(h, cfg, id, seed, warm))
        .collect()
}

/// Runs all restarts and returns the best circuit.
pub fn optimize(h: &PauliSum, cfg: &OptimizerConfig) -> Result<OptResult> {
    optimize_seeded(h, cfg, Seed::Basis)
}

/// Optimizes for `k = 0..=k_max`; restart 0 of level `k + 1` starts from the
/// best level-`k` circuit with one extra zero-angle Rz, so the best cost is
/// non-increasing in `k`.
pub fn ladder_run(h: &PauliSum, k_max: usize, cfg: &OptimizerConfig) -> Result<Vec<OptResult>> {
    let mut out: Vec<OptResult> = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mut c = cfg.clone();
        c.rz_count = k;
        let res = match out.last() {
            None => optimize_seeded(h, &c, Seed::Basis)?,
            Some(prev) => {
                let prev = prev.best_circuit.clone();
                optimize_seeded(h, &c, Seed::Ladder(&prev))?
            }
        };
        out.push(res);
    }
    Ok(out)
}

/// Cost of a circuit evaluated through the full Heisenberg transform,
/// independent of the landscape machinery.
pub fn direct_cost(h: &PauliSum, c: &LadderCircuit, objective: Objective) -> Result<f64> {
    let t = crate::heisenberg::transform(h, c)?;
    match objective {
        Objective::GroundEnergy => Ok(crate::heisenberg::zero_state_energy(&t)),
        Objective::OffdiagWeight => t.offdiag_weight(),
        Objective::FreeEnergy { beta } => {
            let e = crate::thermal::diagonal_energies(&t)?;
            Ok(crate::thermal::closed_form_free_energy(&e, beta)?.0)
        }
    }
}
