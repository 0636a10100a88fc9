use nvisa::perf::*;
use proptest::prelude::*;

fn at(tau: f64, r: u32) -> TimingParams {
    TimingParams::with_fixed(DEFAULT_FIXED, tau, r, 2)
}

#[test]
fn round_throughput_examples() {
    assert!((round_throughput(&at(0.0, 4)).unwrap() - 100_000.0).abs() < 1e-6);
    let r = round_throughput(&at(1e-6, 4)).unwrap();
    assert!((r - 1.0 / 14e-6).abs() < 1e-6);
    assert!((r - 71_428.571_428_571).abs() < 1e-6);
    assert!(round_throughput(&at(1e-6, 16)).unwrap() < round_throughput(&at(1e-6, 1)).unwrap());
}

#[test]
fn min_register_size_examples() {
    assert_eq!(min_register_size(6), 3);
    assert_eq!(min_register_size(1), 1);
    assert_eq!(min_register_size(16), 4);
    assert_eq!(min_register_size(17), 5);
    assert_eq!(min_register_size(2), 1);
    assert_eq!(min_register_size(3), 2);
}

#[test]
fn invalid_parameters() {
    let mut p = at(1e-6, 1);
    p.r = 0;
    assert_eq!(round_throughput(&p), Err(PerfError::ZeroCount("r")));
    let mut p = at(1e-6, 1);
    p.t_meas = -1.0;
    assert!(matches!(
        round_throughput(&p),
        Err(PerfError::NegativeTime(_))
    ));
    assert_eq!(
        round_throughput(&TimingParams::with_fixed(0.0, 0.0, 1, 1)),
        Err(PerfError::ZeroSlot)
    );
    assert_eq!(sweep(&at(0.0, 1), &[], &[1]), Err(PerfError::EmptyGrid));
}

#[test]
fn default_sweep() {
    let taus = default_tau_grid();
    let table = sweep(&at(0.0, 1), &taus, &DEFAULT_R_GRID).unwrap();
    assert_eq!(table.len(), DEFAULT_R_GRID.len() * taus.len());
    for row in table.chunks(DEFAULT_R_GRID.len()) {
        let tau = row[0].tau_reset;
        for w in row.windows(2) {
            if tau > 0.0 {
                assert!(w[0].rate > w[1].rate);
            } else {
                assert_eq!(w[0].rate, w[1].rate);
            }
        }
        for p in row {
            assert_eq!(p.rate, round_throughput(&at(p.tau_reset, p.r)).unwrap());
            assert_eq!(p.node_rate / p.rate, 2.0);
        }
    }
    for r in DEFAULT_R_GRID {
        let curve: Vec<f64> = table.iter().filter(|p| p.r == r).map(|p| p.rate).collect();
        assert!(curve.windows(2).all(|w| w[0] > w[1]));
    }
}

proptest! {
    #[test]
    fn hyperbolic_identity(fixed in 1e-7f64..1e-3, tau in 0.0f64..1e-4, r in 1u32..64, e in 1u32..8) {
        let p = TimingParams::with_fixed(fixed, tau, r, e);
        let rate = round_throughput(&p).unwrap();
        prop_assert!((rate * p.slot_time() - 1.0).abs() <= 2.0 * f64::EPSILON);
        prop_assert_eq!(node_throughput(&p).unwrap(), f64::from(e) * rate);
    }

    #[test]
    fn larger_register_is_slower(tau in 1e-9f64..1e-4, r1 in 1u32..32, dr in 1u32..32) {
        let a = round_throughput(&at(tau, r1)).unwrap();
        let b = round_throughput(&at(tau, r1 + dr)).unwrap();
        prop_assert!(a > b);
    }
}
