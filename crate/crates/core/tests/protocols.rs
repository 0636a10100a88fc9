use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use nvisa::controller::{run_round_exact, LinkState, NetworkState};
use nvisa::isa::Opcode;
use nvisa::protocols::*;
use nvisa::quantum::{make_werner, DensityState, GateSpec, Label, PureState, C64};
use nvisa::rng::{trial_rng, TrialRng};
use proptest::prelude::*;

// (F_in, F′, p_succ) from the standard recurrence, evaluated independently.
const BBPSSW_TABLE: [(f64, f64, f64); 4] = [
    (0.6, 0.6204379562043795, 0.6088888888888889),
    (0.7, 0.7352941176470588, 0.68),
    (0.8, 0.838150289017341, 0.7688888888888891),
    (0.9, 0.9263959390862945, 0.8755555555555555),
];

type M2 = [[C64; 2]; 2];

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn matrix(g: &GateSpec) -> M2 {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
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

fn apply(seq: &[GateSpec], v: [C64; 2]) -> [C64; 2] {
    seq.iter().fold(v, |v, g| {
        let m = matrix(g);
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    })
}

/// `⟨ψ|U0†U1|ψ⟩` by direct 2×2 arithmetic.
fn overlap(u0: &[GateSpec], u1: &[GateSpec], psi: [C64; 2]) -> C64 {
    let a = apply(u0, psi);
    let b = apply(u1, psi);
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

fn state(v: [C64; 2]) -> PureState {
    PureState::qubit("psi", v[0], v[1]).unwrap()
}

fn zero() -> [C64; 2] {
    [c(1.0, 0.0), c(0.0, 0.0)]
}

fn plus() -> [C64; 2] {
    [c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)]
}

#[test]
fn recurrence_matches_frozen_values() {
    for (f, fp, p) in BBPSSW_TABLE {
        let (a, b) = recurrence(f);
        assert!((a - fp).abs() < 1e-15 && (b - p).abs() < 1e-15);
    }
}

#[test]
fn bbpssw_exact_matches_recurrence() {
    for (f, fp, p) in BBPSSW_TABLE {
        let r = bbpssw(f, PurificationMode::Exact, 0, 0).unwrap();
        assert!(
            (r.output_fidelity - fp).abs() < 1e-9,
            "F={f}: {}",
            r.output_fidelity
        );
        assert!(
            (r.success_probability - p).abs() < 1e-9,
            "F={f}: {}",
            r.success_probability
        );
        assert_eq!(r.trials, 0);
    }
}

#[test]
fn bbpssw_fixed_points() {
    let one = bbpssw(1.0, PurificationMode::Exact, 0, 0).unwrap();
    assert!((one.output_fidelity - 1.0).abs() < 1e-10);
    assert!((one.success_probability - 1.0).abs() < 1e-10);
    let quarter = bbpssw(0.25, PurificationMode::Exact, 0, 0).unwrap();
    assert!((quarter.output_fidelity - 0.25).abs() < 1e-10);
    assert!((quarter.success_probability - 0.5).abs() < 1e-10);
}

#[test]
fn bbpssw_rejects_bad_input() {
    assert!(matches!(
        bbpssw(1.5, PurificationMode::Exact, 0, 0),
        Err(ProtocolError::FidelityOutOfRange(_))
    ));
    assert!(matches!(
        bbpssw(0.8, PurificationMode::MonteCarlo, 0, 0),
        Err(ProtocolError::ZeroTrials)
    ));
}

#[test]
fn bbpssw_monte_carlo_within_four_sigma() {
    let exact = bbpssw(0.8, PurificationMode::Exact, 0, 0).unwrap();
    let mc = bbpssw(0.8, PurificationMode::MonteCarlo, 10_000, 11).unwrap();
    assert_eq!(mc.trials, 10_000);
    let (se_f, se_p) = (mc.output_stderr.unwrap(), mc.success_stderr.unwrap());
    assert!((mc.output_fidelity - exact.output_fidelity).abs() < 4.0 * se_f);
    assert!((mc.success_probability - exact.success_probability).abs() < 4.0 * se_p);
    let again = bbpssw(0.8, PurificationMode::MonteCarlo, 10_000, 11).unwrap();
    assert_eq!(mc, again);
}

#[test]
fn twirl_leaves_werner_unchanged() {
    let net = NetworkState::with_links(bbpssw_nodes(), &bbpssw_links([LinkState::Werner(0.65); 2]))
        .unwrap();
    let w = make_werner(0.65, Label::electron(0, 0), Label::electron(1, 0)).unwrap();
    for u in [Opcode::Idle, Opcode::X, Opcode::Y, Opcode::Z] {
        let out = run_round_exact(&net, &bbpssw_program(u).rounds[0]).unwrap();
        let pair: DensityState = out[0]
            .state
            .reduced(&[Label::electron(0, 0), Label::electron(1, 0)])
            .unwrap();
        assert!(pair.max_abs_diff(&w).unwrap() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bbpssw_improves_above_half(f in 0.5001f64..0.9999) {
        let r = bbpssw(f, PurificationMode::Exact, 0, 0).unwrap();
        prop_assert!(r.output_fidelity > f);
        prop_assert!((0.0..=1.0).contains(&r.success_probability));
    }

    #[test]
    fn witness_identity(
        a in -PI..PI, b in -PI..PI, d in -PI..PI,
        e in -PI..PI, g in -PI..PI, h in -PI..PI,
        theta in 0.0..PI, phi in -PI..PI,
    ) {
        let u0 = [GateSpec::Rz(a), GateSpec::Ry(b), GateSpec::Phase(d)];
        let u1 = [GateSpec::Ry(e), GateSpec::Rz(g), GateSpec::Phase(h)];
        let (s, co) = (theta / 2.0).sin_cos();
        let psi = [c(co, 0.0), C64::from_polar(s, phi)];
        let w = witness(&u0, &u1, &state(psi), WitnessMode::Exact, &mut trial_rng(0, 0)).unwrap();
        let want = overlap(&u0, &u1, psi);
        prop_assert!((w.f_state - want.norm_sqr()).abs() < 1e-10);
        prop_assert!((w.overlap - want).norm() < 1e-10);
    }

    #[test]
    fn fringe_bounds(theta in -PI..PI, phases in proptest::collection::vec(-PI..PI, 1..12)) {
        let u1 = [GateSpec::Ry(theta), GateSpec::Phase(theta / 3.0)];
        let scan = phase_scan(&[], &u1, &state(plus()), &phases).unwrap();
        let amp = overlap(&[], &u1, plus()).norm();
        let mut hi = f64::MIN;
        for (p, m) in scan.p_plus.iter().zip(&scan.p_minus) {
            prop_assert!((0.0..=1.0).contains(p) && (0.0..=1.0).contains(m));
            prop_assert!((p + m - 1.0).abs() < 1e-10);
            hi = hi.max(2.0 * p - 1.0);
        }
        prop_assert!(hi <= amp + 1e-10);
    }
}

#[test]
fn fringe_amplitude_equals_overlap_modulus() {
    let u1 = [GateSpec::Ry(0.9), GateSpec::Phase(0.4)];
    let phases: Vec<f64> = (0..4096)
        .map(|i| -PI + 2.0 * PI * f64::from(i) / 4096.0)
        .collect();
    let scan = phase_scan(&[], &u1, &state(plus()), &phases).unwrap();
    let hi = scan.p_plus.iter().fold(f64::MIN, |m, p| m.max(*p));
    let lo = scan.p_plus.iter().fold(f64::MAX, |m, p| m.min(*p));
    let amp = overlap(&[], &u1, plus()).norm();
    assert!((hi - lo - amp).abs() < 1e-5);
}

#[test]
fn phase_scan_identical_unitaries() {
    let phases = [0.0, 0.3, FRAC_PI_2, 2.0, PI];
    let scan = phase_scan(&[GateSpec::H], &[GateSpec::H], &state(zero()), &phases).unwrap();
    for (phi, p) in phases.iter().zip(&scan.p_plus) {
        assert!((p - 0.5 * (1.0 + phi.cos())).abs() < 1e-12);
    }
}

#[test]
fn phase_scan_ry_at_zero_phase() {
    for theta in [0.0, 0.4, 1.3, PI] {
        let scan = phase_scan(&[], &[GateSpec::Ry(theta)], &state(zero()), &[0.0]).unwrap();
        assert!((scan.p_plus[0] - 0.5 * (1.0 + (theta / 2.0).cos())).abs() < 1e-12);
    }
}

#[test]
fn phase_scan_rejects_non_finite() {
    assert!(matches!(
        phase_scan(&[], &[], &state(zero()), &[f64::NAN]),
        Err(ProtocolError::NonFinitePhase(_))
    ));
}

#[test]
fn witness_examples() {
    let mut rng = trial_rng(0, 0);
    let w = witness(
        &[GateSpec::H],
        &[GateSpec::H],
        &state(zero()),
        WitnessMode::Exact,
        &mut rng,
    )
    .unwrap();
    assert!((w.overlap - c(1.0, 0.0)).norm() < 1e-12);
    assert!((w.f_state - 1.0).abs() < 1e-12);

    let w = witness(
        &[],
        &[GateSpec::Phase(FRAC_PI_2)],
        &state(plus()),
        WitnessMode::Exact,
        &mut rng,
    )
    .unwrap();
    assert!((w.overlap - c(0.5, 0.5)).norm() < 1e-12);
    assert!((w.f_state - 0.5).abs() < 1e-12);

    for i in 0..=16 {
        let theta = PI * f64::from(i) / 8.0;
        let w = witness(
            &[],
            &[GateSpec::Ry(theta)],
            &state(zero()),
            WitnessMode::Exact,
            &mut rng,
        )
        .unwrap();
        assert!((w.f_state - (theta / 2.0).cos().powi(2)).abs() < 1e-12);
    }
}

#[test]
fn witness_sampled() {
    let mut rng = trial_rng(5, 0);
    let u1 = [GateSpec::Phase(FRAC_PI_2)];
    let w = witness(
        &[],
        &u1,
        &state(plus()),
        WitnessMode::Sampled { shots: 4000 },
        &mut rng,
    )
    .unwrap();
    assert_eq!(w.shots, 4000);
    // p_+ = 3/4 at both phases; σ ≈ 0.0068.
    for p in w.p_plus {
        assert!((p - 0.75).abs() < 0.03);
    }
    assert!(matches!(
        witness(
            &[],
            &u1,
            &state(plus()),
            WitnessMode::Sampled { shots: 0 },
            &mut rng
        ),
        Err(ProtocolError::ZeroShots)
    ));
}

#[test]
fn witness_requires_single_qubit() {
    let two = PureState::zeros(vec!["a".into(), "b".into()]).unwrap();
    assert!(matches!(
        witness(&[], &[], &two, WitnessMode::Exact, &mut trial_rng(0, 0)),
        Err(ProtocolError::NotSingleQubit)
    ));
}

#[test]
fn calibrate_examples() {
    let zero_eps = calibrate(0.3, &[0.0], &state(zero())).unwrap();
    assert_eq!(zero_eps[0].estimate, 0.0);
    assert_eq!(zero_eps[0].sign, Sign::Zero);

    let p = calibrate(FRAC_PI_2, &[0.1], &state(zero())).unwrap();
    assert!((p[0].f_state - 0.05f64.cos().powi(2)).abs() < 1e-12);
    assert!((p[0].estimate - 0.1).abs() < 1e-8);

    // |+i⟩ has ⟨Y⟩ = 1, which exposes the sign through Im a.
    let plus_i = state([c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)]);
    for eps in [-0.2, -1.1, 0.2, 2.5] {
        let p = calibrate(0.7, &[eps], &plus_i).unwrap();
        assert!(
            (p[0].estimate - eps).abs() < 1e-8,
            "ε={eps}: {}",
            p[0].estimate
        );
    }

    // With ⟨Y⟩ = 0 the sign cannot be recovered.
    let p = calibrate(0.7, &[-0.2], &state(zero())).unwrap();
    assert_eq!(p[0].sign, Sign::Ambiguous);
    assert!((p[0].estimate.abs() - 0.2).abs() < 1e-8);
}

#[test]
fn calibrate_general_state() {
    let (s, co) = (0.6f64).sin_cos();
    let psi = state([c(co, 0.0), C64::from_polar(s, 1.0)]);
    for eps in [-0.2, 0.05, 0.9] {
        let p = calibrate(1.2, &[eps], &psi).unwrap();
        assert!((p[0].estimate - eps).abs() < 1e-8);
    }
}

#[test]
fn calibrate_rejects_out_of_range() {
    assert!(matches!(
        calibrate(0.0, &[PI], &state(zero())),
        Err(ProtocolError::EpsilonOutOfRange(_))
    ));
}

#[test]
fn transfer_without_measurement() {
    let r = entanglement_transfer::<TrialRng>(TransferBasis::None, None).unwrap();
    let s = FRAC_1_SQRT_2;
    let ghz: Vec<C64> = (0..16)
        .map(|i| c(if i == 0 || i == 15 { s } else { 0.0 }, 0.0))
        .collect();
    let want = PureState::new(r.after_cnot.labels().to_vec(), ghz).unwrap();
    assert!(r.after_cnot.max_abs_diff(&want).unwrap() < 1e-12);
    assert!((r.marginal_fidelity - 0.5).abs() < 1e-12);
}

#[test]
fn transfer_x_basis_corrects_both_parities() {
    let r = entanglement_transfer::<TrialRng>(TransferBasis::X, None).unwrap();
    assert_eq!(r.outcomes.len(), 4);
    for o in &r.outcomes {
        assert!((o.probability - 0.25).abs() < 1e-12);
        assert!((o.nuclear_fidelity - 1.0).abs() < 1e-12);
        assert_eq!(o.corrected, o.bit_a != o.bit_b);
    }
}

#[test]
fn transfer_z_basis_gives_product_states() {
    let r = entanglement_transfer::<TrialRng>(TransferBasis::Z, None).unwrap();
    assert_eq!(r.outcomes.len(), 2);
    for o in &r.outcomes {
        assert_eq!(o.bit_a, o.bit_b);
        assert!((o.probability - 0.5).abs() < 1e-12);
        assert!((o.nuclear_fidelity - 0.5).abs() < 1e-12);
    }
}

#[test]
fn transfer_sampled_single_outcome() {
    let mut rng = trial_rng(2, 0);
    let r = entanglement_transfer(TransferBasis::X, Some(&mut rng)).unwrap();
    assert_eq!(r.outcomes.len(), 1);
    assert!((r.outcomes[0].nuclear_fidelity - 1.0).abs() < 1e-12);
}
