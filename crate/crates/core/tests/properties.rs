mod common;

use common::*;
use magic_ladder::circuit::{Circuit, Gate, LadderCircuit};
use magic_ladder::dense;
use magic_ladder::genstab::{GenStabState, PauliChannel};
use magic_ladder::heisenberg::{self, conjugate_by_rz, transform, transform_circuit};
use magic_ladder::io::{self, CircuitFile, Endpoint, ResultFile};
use magic_ladder::metrics;
use magic_ladder::opt::{self, Objective, OptimizerConfig, TraceEntry};
use magic_ladder::pauli::{PauliString, PauliSum};
use magic_ladder::pulse::{self, AtomChain, PulseConfig, PulseSchedule};
use magic_ladder::tableau::{BasisIndex, FullTableau};
use magic_ladder::thermal::{self, Chem, ThermalProblem};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cfg(200))]

    #[test]
    fn pauli_group_laws(seed in any::<u64>()) {
        let mut r = rng(seed);
        for _ in 0..50 {
            let n = r.gen_range(1..=16);
            let (a, b, c) = (random_pauli(&mut r, n), random_pauli(&mut r, n), random_pauli(&mut r, n));
            let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
            let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
            let id = a.multiply(&a.inverse()).unwrap();
            prop_assert_eq!(id, PauliString::identity(n));
        }
    }

    #[test]
    fn decompose_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=8);
        let mut t = FullTableau::computational(n).unwrap();
        for _ in 0..r.gen_range(0..40) {
            if n > 1 {
                t.apply_clifford_mut(&random_clifford(&mut r, n)).unwrap();
            }
        }
        for _ in 0..50 {
            let p = random_pauli(&mut r, n);
            let d = t.decompose_pauli(&p).unwrap();
            let back = t
                .destabilizer_product(&d.b)
                .multiply(&t.stabilizer_product(&d.c))
                .unwrap()
                .times_i_pow(d.alpha);
            prop_assert_eq!(back, p);
        }
    }
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn commutation_matches_dense(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=5);
        let (a, b) = (random_pauli(&mut r, n), random_pauli(&mut r, n));
        let (ma, mb) = (dense::pauli_to_dense(&a).unwrap(), dense::pauli_to_dense(&b).unwrap());
        let comm = &ma * &mb - &mb * &ma;
        let zero = comm.iter().all(|v| v.norm() < 1e-12);
        prop_assert_eq!(a.commutes(&b).unwrap(), zero);
    }

    #[test]
    fn canonicalize_idempotent_and_dense_preserving(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=5);
        let raw: Vec<(f64, PauliString)> = (0..12)
            .map(|_| (r.gen_range(-1.0..1.0), random_word(&mut r, n)))
            .collect();
        let len = raw.len() as f64;
        let sum = PauliSum::from_terms(n, raw).unwrap();
        let c1 = sum.canonicalize(1e-12).unwrap();
        prop_assert_eq!(c1.canonicalize(1e-12).unwrap(), c1.clone());
        let d0 = dense::pauli_sum_to_dense(&sum).unwrap().matrix;
        let d1 = dense::pauli_sum_to_dense(&c1).unwrap().matrix;
        prop_assert!(max_abs_diff(&d0, &d1) <= 1e-12 * len);
        let (diag, _) = c1.diagonal_split().unwrap();
        let dd = dense::pauli_sum_to_dense(&diag).unwrap().matrix;
        for i in 0..dd.nrows() {
            for j in 0..dd.ncols() {
                if i != j {
                    prop_assert_eq!(dd[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn tableau_invariants_and_dense_states(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=5);
        let mut t = FullTableau::computational(n).unwrap();
        let mut v = dense::zero_state(n);
        let zero = BasisIndex::zero(n);
        for _ in 0..r.gen_range(1..30) {
            let g = random_clifford(&mut r, n);
            t.apply_clifford_mut(&g).unwrap();
            prop_assert!(t.check_invariants().is_ok());
            dense::apply_gate(&mut v, n, &Gate::Clifford(g)).unwrap();
            let proj = dense::outer(&t.state_dense(&zero).unwrap());
            prop_assert!(max_abs_diff(&proj, &dense::outer(&v)) <= 1e-12);
        }
        for _ in 0..10 {
            let p = random_word(&mut r, n);
            let e = t.stabilizer_expectation(&zero, &p).unwrap() as f64;
            let ed = dense::expectation(&v, &PauliSum::from_terms(n, vec![(1.0, p)]).unwrap());
            prop_assert!((ed.re - e).abs() < 1e-12 && ed.im.abs() < 1e-12);
        }
    }

    #[test]
    fn genstab_channel_invariants(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=5);
        let k = r.gen_range(0..=4);
        let c = random_circuit(&mut r, n, 12, k);
        let mut s = GenStabState::zero(n).unwrap().into_mixed();
        let mut rz_seen = 0u32;
        for g in &c.gates {
            let before = s.lambda();
            match g {
                Gate::Clifford(cg) => s.evolve_clifford(cg).unwrap(),
                Gate::Rz { site, theta } => {
                    s.evolve_pauli_channel(&PauliChannel::rz(n, *site, *theta).unwrap()).unwrap();
                    rz_seen += 1;
                    prop_assert!(s.lambda() <= 4 * before);
                }
            }
            prop_assert!((s.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-10);
            prop_assert!(s.hermiticity_defect() < 1e-10);
            prop_assert!((s.purity() - 1.0).abs() < 1e-9);
            prop_assert!(s.lambda() <= 4usize.pow(rz_seen));
        }
        let psi = dense::simulate(&c, &dense::zero_state(n)).unwrap();
        prop_assert!(max_abs_diff(&s.to_dense().unwrap(), &dense::outer(&psi)) <= 1e-9);
        let fast = GenStabState::run(&c).unwrap();
        prop_assert!(max_abs_diff(&fast.to_dense().unwrap(), &dense::outer(&psi)) <= 1e-9);
    }

    #[test]
    fn transform_conserves_weight_and_bounds_terms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=6);
        let k = r.gen_range(0..=3);
        let h = random_hamiltonian(&mut r, n, 10);
        let c = random_circuit(&mut r, n, 15, k);
        let t = transform_circuit(&h, &c).unwrap();
        let (w0, w1) = (h.frobenius_weight(), t.frobenius_weight());
        prop_assert!((w0 - w1).abs() <= 1e-10 * w0.max(1.0));
        prop_assert!(t.len() <= (1usize << k) * h.len());
    }

    #[test]
    fn same_site_rz_composes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=5);
        let h = random_hamiltonian(&mut r, n, 8);
        let q = r.gen_range(0..n);
        let (a, b) = (r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0));
        let two = conjugate_by_rz(&conjugate_by_rz(&h, q, a).unwrap(), q, b).unwrap();
        let one = conjugate_by_rz(&h, q, a + b).unwrap();
        let d = two.add_scaled(&one, -1.0).unwrap();
        prop_assert!(d.terms().iter().all(|t| t.coeff.abs() <= 1e-12));
    }

    #[test]
    fn ladder_paths_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=5);
        let k = r.gen_range(0..=3);
        let c = random_ladder(&mut r, n, 2, k);
        let h = random_hamiltonian(&mut r, n, 10);
        let e_h = heisenberg::ground_energy_objective(&h, &c).unwrap();
        let e_s = GenStabState::run(&c.to_circuit()).unwrap().expectation(&h).unwrap();
        let psi = dense::simulate(&c.to_circuit(), &dense::zero_state(n)).unwrap();
        let e_d = dense::expectation(&psi, &h).re;
        prop_assert!((e_h - e_s).abs() <= 1e-9 && (e_h - e_d).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn optimizer_bounded_by_exact_ground(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=4);
        let h = random_hamiltonian(&mut r, n, 8);
        let cfg = OptimizerConfig {
            layers: 1, rz_count: r.gen_range(0..=2), restarts: 2, iters: 6, theta_starts: 2,
            max_grad_iters: 60, seed, keep_traces: true, ..Default::default()
        };
        let res = opt::optimize(&h, &cfg).unwrap();
        let e0 = dense::exact_ground(&h).unwrap().energy;
        prop_assert!(res.best_cost >= e0 - 1e-9);
        for t in res.traces.as_ref().unwrap() {
            prop_assert!(t.windows(2).all(|w| w[1].cost <= w[0].cost));
        }
    }

    #[test]
    fn thermal_variational_bound_and_entropy(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=5);
        let h = random_hamiltonian(&mut r, n, 10);
        let num = number_op(n);
        let beta = r.gen_range(0.2..5.0);
        let mu = r.gen_range(-1.0..1.0);
        let k = r.gen_range(0..=2);
        let c = random_ladder(&mut r, n, 2, k);
        let g = h.add_scaled(&num, -mu).unwrap();
        let e = thermal::basis_energies(&c, &g).unwrap();
        let (f, p) = thermal::closed_form_free_energy(&e, beta).unwrap();
        let f0 = dense::exact_grand_free_energy(&h, &num, beta, mu).unwrap().free_energy;
        prop_assert!(f >= f0 - 1e-9);
        let rho = thermal::ansatz_density(&c, &p).unwrap();
        prop_assert!((dense::von_neumann_entropy(&rho) - thermal::shannon_entropy(&p)).abs() < 1e-9);
    }

    #[test]
    fn log_sum_exp_is_shift_stable(seed in any::<u64>()) {
        let mut r = rng(seed);
        let e: Vec<f64> = (0..16).map(|_| r.gen_range(-2.0..2.0)).collect();
        let beta = r.gen_range(0.1..50.0);
        let (f, _) = thermal::closed_form_free_energy(&e, beta).unwrap();
        for shift in [1e6, -1e6] {
            let es: Vec<f64> = e.iter().map(|v| v + shift).collect();
            let (fs, _) = thermal::closed_form_free_energy(&es, beta).unwrap();
            prop_assert!((fs - (f + shift)).abs() <= 1e-9);
        }
    }

    #[test]
    fn magic_spectrum_and_clifford_invariance(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=5);
        let psi = random_state(&mut r, n);
        let xi = metrics::pauli_spectrum(&psi).unwrap();
        prop_assert!((xi.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        if n >= 2 {
            let m = metrics::stabilizer_entropy(&psi).unwrap();
            prop_assert!(m >= -1e-9);
            let c = random_circuit(&mut r, n, 10, 0);
            let cpsi = dense::simulate(&c, &psi).unwrap();
            prop_assert!((metrics::stabilizer_entropy(&cpsi).unwrap() - m).abs() <= 1e-9);
        }
    }

    #[test]
    fn negativity_local_unitary_invariance(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = 4;
        let psi = random_state(&mut r, n);
        let rho = dense::outer(&psi);
        let part = [0usize, 1];
        let before = metrics::negativity(&rho, &part).unwrap();
        // Random two-qubit unitaries inside A = {0,1} and inside B = {2,3}.
        let mut v = psi.clone();
        for (a, b) in [(0, 1), (2, 3)] {
            for _ in 0..4 {
                let g = magic_ladder::tableau::CliffordGate::new(a, b, r.gen_range(0..16)).unwrap();
                dense::apply_gate(&mut v, n, &Gate::Clifford(g)).unwrap();
                dense::apply_rz(&mut v, if r.gen() { a } else { b }, r.gen_range(-3.0..3.0));
            }
        }
        let after = metrics::negativity(&dense::outer(&v), &part).unwrap();
        prop_assert!(before >= -1e-10);
        prop_assert!((before - after).abs() <= 1e-9);
        let twice = metrics::partial_transpose(&metrics::partial_transpose(&rho, &part).unwrap(), &part).unwrap();
        let (s0, _) = dense::eigh(&rho);
        let (s1, _) = dense::eigh(&twice);
        prop_assert!(s0.iter().zip(&s1).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn eigensolvers_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(2..=7);
        let h = random_hamiltonian(&mut r, n, 12);
        let full = dense::exact_ground(&h).unwrap().energy;
        let lz = dense::lanczos_ground(&h, 40).unwrap().energy;
        prop_assert!((full - lz).abs() <= 1e-9);
    }

    #[test]
    fn pulse_norm_and_refinement(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.gen_range(1..=4);
        let chain = AtomChain::uniform(n, r.gen_range(5.0..12.0)).unwrap();
        let segs = r.gen_range(1..=4);
        let mut s = PulseSchedule::zeros(n, segs, r.gen_range(0.0..0.6));
        for k in 0..s.len() {
            s.set(k, r.gen_range(-8.0..8.0));
        }
        let psi = pulse::evolve(&chain, &s, &pulse::ground_state(n)).unwrap();
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() <= 1e-9);
        let t = random_hamiltonian(&mut r, n, 6);
        let f1 = pulse::pulse_objective(&chain, &s, &t).unwrap();
        let f2 = pulse::pulse_objective(&chain, &s.refine(2), &t).unwrap();
        prop_assert!((f1 - f2).abs() <= 1e-10);
    }
}

#[test]
fn thermal_gauge_invariance() {
    let mut r = rng(5);
    let h = random_hamiltonian(&mut r, 3, 8);
    let shift = 2.75;
    let base = OptimizerConfig {
        layers: 1, rz_count: 1, restarts: 3, iters: 8, theta_starts: 2, max_grad_iters: 80, seed: 4,
        keep_traces: true, ..Default::default()
    };
    let run = |h: PauliSum| {
        thermal::optimize_thermal(&ThermalProblem { h, number_op: number_op(3), beta: 1.7, chem: Chem::Mu(0.3), cfg: base.clone() })
            .unwrap()
    };
    let a = run(h.clone());
    let b = run(h.add_identity(shift).unwrap());
    assert!((b.free_energy - a.free_energy - shift).abs() < 1e-12);
    assert_eq!(a.best_circuit.codes, b.best_circuit.codes);
    assert_eq!(a.best_circuit.rz_sites, b.best_circuit.rz_sites);
    let coords = |t: &[TraceEntry]| t.iter().map(|e| e.coordinate).collect::<Vec<_>>();
    assert_eq!(coords(&a.trace), coords(&b.trace));
    for (x, y) in a.p_summary.iter().zip(&b.p_summary) {
        assert_eq!(x.state, y.state);
        assert!((x.p - y.p).abs() < 1e-12);
    }
}

#[test]
fn optimizer_is_thread_count_independent() {
    let mut r = rng(9);
    let h = random_hamiltonian(&mut r, 4, 10);
    let cfg = OptimizerConfig {
        layers: 1, rz_count: 1, restarts: 6, iters: 6, theta_starts: 2, max_grad_iters: 60, seed: 21,
        keep_traces: true, ..Default::default()
    };
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| opt::optimize(&h, &cfg).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn landscape_gradients_match_central_differences() {
    let mut r = rng(13);
    let mut checked = 0;
    while checked < 100 {
        let n = r.gen_range(2..=4);
        let k = r.gen_range(1..=3);
        let h = random_hamiltonian(&mut r, n, 8);
        let mut c = random_ladder(&mut r, n, 1, k);
        c.tail.clear();
        let obj = match checked % 3 {
            0 => Objective::GroundEnergy,
            1 => Objective::OffdiagWeight,
            _ => Objective::FreeEnergy { beta: 1.3 },
        };
        let cfg = OptimizerConfig { objective: obj, ..Default::default() };
        let ev = opt::Evaluator::new(&h, &cfg, Vec::new()).unwrap();
        let land = ev.landscape(&c).unwrap();
        let (_, g) = land.value_grad(&c.thetas).unwrap();
        for j in 0..k {
            let mut tp = c.thetas.clone();
            let mut tm = c.thetas.clone();
            tp[j] += 1e-5;
            tm[j] -= 1e-5;
            let fd = (land.value(&tp).unwrap() - land.value(&tm).unwrap()) / 2e-5;
            assert!((fd - g[j]).abs() <= 1e-6 * g[j].abs().max(1.0), "{fd} vs {}", g[j]);
        }
        checked += 1;
    }
}

fn random_result(r: &mut rand_chacha::ChaCha8Rng) -> ResultFile {
    let n = r.gen_range(2..=5);
    let mut out = ResultFile::new(
        ["optimize-ground", "ladder", "exact"][r.gen_range(0..3)],
        serde_json::json!({ "beta": r.gen::<f64>() * 10.0, "layers": r.gen_range(1..5u32), "name": "x" }),
        r.gen(),
    );
    out.best_cost = if r.gen() { Some(r.gen_range(-1e3..1e3)) } else { None };
    out.best_circuit = if r.gen() { Some(CircuitFile::from_ladder(&random_ladder(r, n, 2, 2))) } else { None };
    out.endpoints = (0..r.gen_range(0..5)).map(|i| Endpoint { restart_id: i, cost: r.gen_range(-5.0..5.0) }).collect();
    out.trace = if r.gen() {
        Some(
            (0..r.gen_range(0..6))
                .map(|i| TraceEntry { iteration: i, coordinate: if i == 0 { None } else { Some(r.gen_range(0..9)) }, cost: r.gen::<f64>() * -3.0 })
                .collect(),
        )
    } else {
        None
    };
    out.wall_time = if r.gen() { Some(r.gen::<f64>()) } else { None };
    out.data = serde_json::json!({ "values": [r.gen::<f64>(), 1e-300 * r.gen::<f64>(), -r.gen::<f64>() * 1e300] });
    out
}

#[test]
fn file_formats_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(77);
    for i in 0..100 {
        let n = r.gen_range(1..=8);
        let terms = r.gen_range(1..15);
        let h = random_hamiltonian(&mut r, n, terms);
        let p = dir.path().join(format!("h{i}.ham"));
        io::write_atomic(&p, &io::format_hamiltonian(&h), false).unwrap();
        assert_eq!(io::load_hamiltonian(&p).unwrap(), h);

        let n = r.gen_range(2..=6);
        let (layers, k) = (r.gen_range(1..=3), r.gen_range(0..=3));
        let lad = random_ladder(&mut r, n, layers, k);
        let cf = CircuitFile::from_ladder(&lad);
        let p = dir.path().join(format!("c{i}.json"));
        io::write_atomic(&p, &io::to_json(&cf).unwrap(), false).unwrap();
        let back = io::load_circuit(&p).unwrap();
        assert_eq!(back, cf);
        assert_eq!(back.to_ladder().unwrap(), lad);
        let gen: Circuit = random_circuit(&mut r, n, 8, 2);
        let gf = CircuitFile::from_circuit(&gen);
        io::write_atomic(&p, &io::to_json(&gf).unwrap(), true).unwrap();
        assert_eq!(io::load_circuit(&p).unwrap().to_circuit().unwrap(), gen);

        let res = random_result(&mut r);
        let p = dir.path().join(format!("r{i}.json"));
        io::emit_result(&res, Some(&p), false).unwrap();
        assert_eq!(io::load_result(&p).unwrap(), res);
    }
}

#[test]
fn pulse_comparison_reports_both_targets() {
    let chain = AtomChain::uniform(2, pulse::DEFAULT_SPACING).unwrap();
    let h = PauliSum::from_words(&[(1.0, "ZZ"), (0.5, "XI"), (0.5, "IX")]).unwrap();
    let mut lad = LadderCircuit::identity(2, 1).unwrap();
    lad.codes[0] = 6;
    let cfg = PulseConfig { segments: 2, restarts: 2, max_iters: 3, ..Default::default() };
    let cmp = pulse::compare(&chain, &h, &lad.to_circuit(), &cfg).unwrap();
    assert_eq!(cmp.original.restarts.len(), 2);
    assert_eq!(cmp.transformed.restarts.len(), 2);
    let h_eff = transform(&h, &lad).unwrap();
    let f = pulse::pulse_objective(&chain, &cmp.transformed.best, &h_eff).unwrap();
    assert!((f - cmp.transformed.best_cost).abs() < 1e-12);
}
