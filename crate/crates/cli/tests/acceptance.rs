//! Acceptance criteria. Runs as a plain binary so every criterion prints one
//! line whatever the outcome; exits non-zero if any fails.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::time::{Duration, Instant};

use nvisa::isa::{
    Address, Binding, Instruction, NodeConfig, Opcode, Pattern, Preparation, ReadoutBasis,
};
use nvisa::node::{
    execute_coherent_branches, execute_deterministic_branches, kraus_operators, ClusterState,
};
use nvisa::protocols::{
    bbpssw, entanglement_transfer, phase_scan, witness, PurificationMode, TransferBasis,
    WitnessMode,
};
use nvisa::quantum::{Basis, Gate, GateSpec, Label, Matrix, PureState, C64};
use nvisa::rng::{trial_rng, TrialRng};
use nvisa_cli::{cmd_bbpssw, cmd_throughput, BbpsswArgs, ModeArg, OutArg, SeedArg, ThroughputArgs};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn csv_column(bytes: &[u8], name: &str) -> Vec<f64> {
    let text = std::str::from_utf8(bytes).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(i).unwrap().parse().unwrap())
        .collect()
}

// Oracles ------------------------------------------------------------------

/// Closed-form one-step BBPSSW map on Werner inputs.
fn recurrence_oracle(f: f64) -> (f64, f64) {
    let q = (1.0 - f) / 3.0;
    let den = f * f + 2.0 * f * q + 5.0 * q * q;
    ((f * f + q * q) / den, den)
}

type M2 = [[C64; 2]; 2];

fn gate2(g: &GateSpec) -> M2 {
    let (z, o) = (c(0.0, 0.0), c(1.0, 0.0));
    match *g {
        GateSpec::I => [[o, z], [z, o]],
        GateSpec::X => [[z, o], [o, z]],
        GateSpec::Y => [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
        GateSpec::Z => [[o, z], [z, -o]],
        GateSpec::H => {
            let s = c(FRAC_1_SQRT_2, 0.0);
            [[s, s], [s, -s]]
        }
        GateSpec::Ry(t) => {
            let (s, co) = (t / 2.0).sin_cos();
            [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
        }
        GateSpec::Rz(t) => [
            [C64::from_polar(1.0, -t / 2.0), z],
            [z, C64::from_polar(1.0, t / 2.0)],
        ],
        GateSpec::Phase(t) => [[o, z], [z, C64::from_polar(1.0, t)]],
        _ => unreachable!(),
    }
}

/// `⟨ψ|U0†U1|ψ⟩` by direct 2×2 arithmetic.
fn overlap_oracle(u0: &[GateSpec], u1: &[GateSpec], psi: [C64; 2]) -> C64 {
    let run = |seq: &[GateSpec]| {
        seq.iter().fold(psi, |v, g| {
            let m = gate2(g);
            [
                m[0][0] * v[0] + m[0][1] * v[1],
                m[1][0] * v[0] + m[1][1] * v[1],
            ]
        })
    };
    let (a, b) = (run(u0), run(u1));
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

fn random_gate(rng: &mut TrialRng) -> GateSpec {
    let t = rng.gen_range(-PI..PI);
    match rng.gen_range(0..8) {
        0 => GateSpec::I,
        1 => GateSpec::X,
        2 => GateSpec::Y,
        3 => GateSpec::Z,
        4 => GateSpec::H,
        5 => GateSpec::Ry(t),
        6 => GateSpec::Rz(t),
        _ => GateSpec::Phase(t),
    }
}

fn random_seq(rng: &mut TrialRng) -> Vec<GateSpec> {
    let n = rng.gen_range(1..5);
    (0..n).map(|_| random_gate(rng)).collect()
}

fn random_qubit(rng: &mut TrialRng) -> [C64; 2] {
    let v = [
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
    ];
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

/// Random unitary rows by Gram–Schmidt.
fn random_rows(d: usize, rng: &mut TrialRng) -> Vec<Vec<C64>> {
    let mut rows: Vec<Vec<C64>> = (0..d)
        .map(|_| {
            (0..d)
                .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    for i in 0..d {
        for j in 0..i {
            let dot: C64 = rows[j]
                .iter()
                .zip(&rows[i])
                .map(|(a, b)| a.conj() * b)
                .sum();
            let rj = rows[j].clone();
            for (x, y) in rows[i].iter_mut().zip(&rj) {
                *x -= dot * y;
            }
        }
        let n = rows[i].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        rows[i].iter_mut().for_each(|z| *z /= n);
    }
    rows
}

// Criteria -----------------------------------------------------------------

fn bbpssw_exact() -> Outcome {
    let start = Instant::now();
    let grid = [0.6, 0.7, 0.8, 0.9];
    let args = BbpsswArgs {
        fidelity: grid.to_vec(),
        mode: ModeArg::Exact,
        trials: 0,
        seed: SeedArg { seed: 0 },
        out: OutArg { out: None },
    };
    let (table, _) = cmd_bbpssw(&args).unwrap();
    let bytes = table.to_bytes().unwrap();
    let (f_out, p_out) = (
        csv_column(&bytes, "f_out_exact"),
        csv_column(&bytes, "p_succ_exact"),
    );
    let mut worst: f64 = 0.0;
    for (i, &f) in grid.iter().enumerate() {
        let (fp, p) = recurrence_oracle(f);
        worst = worst.max((f_out[i] - fp).abs()).max((p_out[i] - p).abs());
    }
    let mut fixed: f64 = 0.0;
    for f in [1.0, 0.25] {
        let r = bbpssw(f, PurificationMode::Exact, 0, 0).unwrap();
        fixed = fixed.max((r.output_fidelity - f).abs());
    }
    let t = start.elapsed();
    outcome(
        worst < 1e-9 && fixed < 1e-10 && t < Duration::from_secs(1),
        format!(
            "max dev {worst:.2e} (tol 1e-9), fixed points {fixed:.2e} (tol 1e-10), {t:.2?} (< 1 s)"
        ),
    )
}

fn witness_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = trial_rng(2024, 2);
    let mut worst: f64 = 0.0;
    let n = 500;
    for _ in 0..n {
        let (u0, u1) = (random_seq(&mut rng), random_seq(&mut rng));
        let psi = random_qubit(&mut rng);
        let state = PureState::qubit("psi", psi[0], psi[1]).unwrap();
        let w = witness(&u0, &u1, &state, WitnessMode::Exact, &mut rng).unwrap();
        let lhs = (2.0 * w.p_plus[0] - 1.0).powi(2) + (2.0 * w.p_plus[1] - 1.0).powi(2);
        worst = worst.max((lhs - overlap_oracle(&u0, &u1, psi).norm_sqr()).abs());
    }
    let t = start.elapsed();
    outcome(
        worst < 1e-10 && t < Duration::from_secs(5),
        format!("{n} triples, max dev {worst:.2e} (tol 1e-10), {t:.2?} (< 5 s)"),
    )
}

fn fringe_law() -> Outcome {
    let phases: Vec<f64> = (0..64).map(|k| TAU * f64::from(k) / 64.0).collect();
    let zero = PureState::qubit("psi", c(1.0, 0.0), c(0.0, 0.0)).unwrap();
    let mut worst: f64 = 0.0;
    for theta in [0.0, FRAC_PI_4, FRAC_PI_2, PI] {
        let scan = phase_scan(&[], &[GateSpec::Ry(theta)], &zero, &phases).unwrap();
        for (phi, p) in phases.iter().zip(&scan.p_plus) {
            worst = worst.max((p - 0.5 * (1.0 + (theta / 2.0).cos() * phi.cos())).abs());
        }
    }
    outcome(
        worst < 1e-12,
        format!("4 x 64 points, max dev {worst:.2e} (tol 1e-12)"),
    )
}

fn kraus_completeness() -> Outcome {
    let mut rng = trial_rng(7, 4);
    let n = 1000;
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let r = rng.gen_range(1..=3usize);
        let d = 1usize << r;
        let node = NodeConfig::new(0, 1, r, 1);
        let e = Label::electron(0, 0);
        let size = rng.gen_range(1..=d);
        let mut keys: Vec<u32> = (0..d as u32).collect();
        for i in (1..keys.len()).rev() {
            keys.swap(i, rng.gen_range(0..=i));
        }
        keys.truncate(size);
        keys.sort_unstable();
        let amps: Vec<C64> = keys
            .iter()
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let prep = keys
            .iter()
            .zip(&amps)
            .map(|(k, a)| (*k, a / norm))
            .collect();
        let mut instr = Instruction::coherent(
            Address::new(0, 0),
            Opcode::Idle,
            Pattern::new(keys.iter().copied()).unwrap(),
            Preparation::Amplitudes(prep),
            ReadoutBasis::Rows(random_rows(d, &mut rng)),
        );
        let entangle = rng.gen_bool(0.3).then(|| keys[rng.gen_range(0..size)]);
        for &k in &keys {
            let mut gates: Vec<Gate> = random_seq(&mut rng)
                .into_iter()
                .map(|g| Gate::on(g, e.clone()))
                .collect();
            if entangle == Some(k) {
                gates.push(Gate::cnot(e.clone(), Label::ancilla(0, 0, 0)));
            }
            instr = instr.with_override(k, gates);
        }
        let ops = kraus_operators(&instr, &node).unwrap();
        let dim = ops[0].operator.nrows();
        let mut sum = Matrix::zeros(dim, dim);
        for b in &ops {
            sum += b.operator.adjoint() * &b.operator;
        }
        let dev = (sum - Matrix::identity(dim, dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        worst = worst.max(dev);
    }
    outcome(
        worst < 1e-10,
        format!("{n} instruments, max |sum K^dag K - I| {worst:.2e} (tol 1e-10)"),
    )
}

fn mode_equivalence() -> Outcome {
    let mut rng = trial_rng(11, 5);
    let e = Label::electron(0, 0);
    let anc = Label::ancilla(0, 0, 0);
    let (mut worst, mut cases, mut mismatched) = (0.0f64, 0usize, 0usize);
    for r in 1..=3usize {
        let node = NodeConfig::new(0, 1, r, 1);
        let table: Vec<(u32, Binding)> = node.bindings.iter().collect();
        for &(a, binding) in &table {
            for _ in 0..100 {
                let psi = random_qubit(&mut rng);
                let psi = PureState::qubit(e.clone(), psi[0], psi[1]).unwrap();
                let cl = ClusterState::with_electron(Address::new(0, 0), r, 1, &psi).unwrap();
                let theta = rng.gen_range(-PI..PI);
                let mut det = Instruction::deterministic(
                    Address::new(0, 0),
                    binding.opcode(),
                    Pattern::single(a),
                );
                let mut coh = Instruction::coherent(
                    Address::new(0, 0),
                    Opcode::Idle,
                    Pattern::new(table.iter().map(|(k, _)| *k)).unwrap(),
                    Preparation::Amplitudes(BTreeMap::from([(a, c(1.0, 0.0))])),
                    ReadoutBasis::Computational,
                );
                if table
                    .iter()
                    .any(|(_, b)| matches!(b, Binding::Ry | Binding::Rz))
                {
                    coh = coh.theta(theta);
                }
                if table.iter().any(|(_, b)| *b == Binding::Cnot) {
                    coh = coh.control(e.clone()).target(anc.clone());
                }
                if table.iter().any(|(_, b)| *b == Binding::Measure) {
                    coh = coh.basis(Basis::Z);
                }
                det = match binding {
                    Binding::Ry | Binding::Rz => det.theta(theta),
                    Binding::Cnot | Binding::CnotToAncilla(_) => {
                        det.control(e.clone()).target(anc.clone())
                    }
                    Binding::Measure => det.target(anc.clone()).basis(Basis::Z),
                    _ => det,
                };
                let dr = execute_deterministic_branches(&cl, &det, &node).unwrap();
                let cr = execute_coherent_branches(&cl, &coh, &node).unwrap();
                cases += 1;
                if dr.len() != cr.len() {
                    mismatched += 1;
                    continue;
                }
                for (x, y) in dr.iter().zip(&cr) {
                    if x.classical_bits != y.classical_bits {
                        mismatched += 1;
                    }
                    let dx = x.post_state.data_state().phase_normalized();
                    let dy = y.post_state.data_state().phase_normalized();
                    worst = worst
                        .max((x.probability - y.probability).abs())
                        .max(dx.max_abs_diff(&dy).unwrap());
                }
            }
        }
    }
    outcome(
        worst < 1e-12 && mismatched == 0,
        format!("{cases} cases over r = 1..3, max dev {worst:.2e} (tol 1e-12), {mismatched} branch mismatches"),
    )
}

fn transfer() -> Outcome {
    let x = entanglement_transfer::<TrialRng>(TransferBasis::X, None).unwrap();
    let parities: Vec<bool> = x.outcomes.iter().map(|o| o.bit_a != o.bit_b).collect();
    let both = parities.contains(&true) && parities.contains(&false);
    let worst = x
        .outcomes
        .iter()
        .map(|o| (o.nuclear_fidelity - 1.0).abs())
        .fold(0.0, f64::max);
    let none = entanglement_transfer::<TrialRng>(TransferBasis::None, None).unwrap();
    let marginal = (none.marginal_fidelity - 0.5).abs();
    outcome(
        both && worst < 1e-12 && marginal < 1e-12,
        format!("X-basis fidelity dev {worst:.2e} over both parities, marginal dev {marginal:.2e} (tol 1e-12)"),
    )
}

fn throughput() -> Outcome {
    let start = Instant::now();
    let args = ThroughputArgs {
        fixed: nvisa::perf::DEFAULT_FIXED,
        tau_grid: "0:10e-6:0.5e-6".into(),
        r_grid: nvisa::perf::DEFAULT_R_GRID.to_vec(),
        electrons: 1,
        out: OutArg { out: None },
    };
    let (table, _) = cmd_throughput(&args).unwrap();
    // Exact values, not the printed ones.
    let taus = nvisa_cli::parse_grid(&args.tau_grid).unwrap();
    let template = nvisa::perf::TimingParams::with_fixed(args.fixed, 0.0, 1, 1);
    let points = nvisa::perf::sweep(&template, &taus, &args.r_grid).unwrap();
    let (mut worst, mut misrounded, mut ordered) = (0.0f64, 0usize, true);
    for p in &points {
        let slot = args.fixed + p.tau_reset * f64::from(p.r);
        worst = worst.max((p.rate * slot - 1.0).abs());
        // R is the reciprocal rounded once: |R·slot − 1| is below half an
        // ulp of R, scaled by slot.
        let residual = p.rate.mul_add(slot, -1.0).abs();
        let half_ulp = (f64::from_bits(p.rate.to_bits() + 1) - p.rate) / 2.0;
        if residual > half_ulp * slot {
            misrounded += 1;
        }
    }
    for row in points.chunks(args.r_grid.len()) {
        if row[0].tau_reset > 0.0 {
            ordered &= row.windows(2).all(|w| w[0].rate > w[1].rate);
        }
    }
    let t = start.elapsed();
    outcome(
        table.len() == 5 * taus.len() && misrounded == 0 && worst <= f64::EPSILON && ordered,
        format!(
            "{} cells, max |R*slot - 1| {worst:.2e} (1 ulp), {misrounded} not correctly rounded, ordering {}, {t:.2?}",
            table.len(),
            if ordered { "strict" } else { "violated" }
        ),
    )
}

fn monte_carlo() -> Outcome {
    let start = Instant::now();
    let exact = bbpssw(0.8, PurificationMode::Exact, 0, 0).unwrap();
    let mc = bbpssw(0.8, PurificationMode::MonteCarlo, 50_000, 20_240_601).unwrap();
    let t = start.elapsed();
    let zf = (mc.output_fidelity - exact.output_fidelity).abs() / mc.output_stderr.unwrap();
    let zp =
        (mc.success_probability - exact.success_probability).abs() / mc.success_stderr.unwrap();
    outcome(
        zf < 4.0 && zp < 4.0 && t < Duration::from_secs(30),
        format!(
            "F' {:.5} vs {:.5} ({zf:.2} SE), p_succ {:.5} vs {:.5} ({zp:.2} SE), {t:.2?} (< 30 s)",
            mc.output_fidelity,
            exact.output_fidelity,
            mc.success_probability,
            exact.success_probability
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("BBPSSW exact", bbpssw_exact),
        ("witness identity", witness_identity),
        ("fringe law", fringe_law),
        ("Kraus completeness", kraus_completeness),
        ("mode equivalence", mode_equivalence),
        ("entanglement transfer", transfer),
        ("throughput sweep", throughput),
        ("Monte Carlo consistency", monte_carlo),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!(
            "criterion {} {:<24} {}  {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
