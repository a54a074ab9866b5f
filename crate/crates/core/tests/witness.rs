use shannon_core::dyadic::Dyadic;
use shannon_core::error::Error;
use shannon_core::exact::ExactRational;
use shannon_core::machine::{counter_program, gate_table, Machine, LOOP_PROGRAM};
use shannon_core::norm::l1q;
use shannon_core::witness::*;

/// `-(1/pi) sum_{k=1}^{n} 1/(k - 1/2)`, compensated f64 sum.
fn c_direct(n: u64) -> f64 {
    let (mut s, mut comp) = (0.0f64, 0.0f64);
    for k in (1..=n).rev() {
        let y = 1.0 / (k as f64 - 0.5) - comp;
        let t = s + y;
        comp = (t - s) - y;
        s = t;
    }
    -s / std::f64::consts::PI
}

fn opts() -> WitnessOptions {
    WitnessOptions::default()
}

#[test]
fn c_matches_direct_sum() {
    for (j, want) in [(1u64, 2.39008966), (2, 4.15517426), (3, 5.92025906)] {
        let w = build_g_witness(j, 30, &opts()).unwrap();
        let direct = c_direct(1 << (8 * j));
        assert!((w.c.to_f64() - direct).abs() < 1e-9, "{} vs {direct}", w.c);
        assert!((w.c.abs().to_f64() - want).abs() < 1e-7);
        assert!(w.c.width_at_most(-30));
    }
}

#[test]
fn g1_properties() {
    let w = build_g_witness(1, 20, &opts()).unwrap();
    assert_eq!(w.method, "direct");
    assert!(w.value_ok(20));
    assert!(w.sample_ok());
    assert!(w.c_ok());
    assert!(w.c.abs().lo() > &Dyadic::from_int(2));
    // the closed form agrees with direct evaluation
    let cf = build_g_witness(1, 20, &WitnessOptions { max_direct: 1, ..opts() }).unwrap();
    assert_eq!(cf.method, "closed form");
    assert!(cf.value_at_half.intersect(&w.value_at_half).is_some());
}

#[test]
fn g_budget() {
    let small = WitnessOptions { max_log2_n: 8, ..opts() };
    assert!(build_g_witness(1, 20, &small).is_ok());
    assert!(matches!(build_g_witness(2, 20, &small), Err(Error::ResourceLimit(_))));
}

#[test]
fn q_witnesses() {
    let w = build_q_witness(4, 20, &opts()).unwrap();
    assert_eq!(w.sample_l1, ExactRational::from_int(2));
    for n in [8u64, 64] {
        let w = build_q_witness(n, 10, &opts()).unwrap();
        assert!(w.inside());
        assert_eq!(w.sample_l1, ExactRational::from_int(2));
    }
    let (lo, hi) = q_bounds(64).unwrap();
    assert!((lo.to_f64() - ((32f64).ln() / (6.0 * std::f64::consts::PI) - 1.0 / std::f64::consts::PI)).abs() < 1e-12);
    assert!((hi.to_f64() - (4.0 + 5.0 * (129f64).ln() / std::f64::consts::PI)).abs() < 1e-12);
    assert!(matches!(build_q_witness(1, 10, &opts()), Err(Error::Validation(_))));
    let tiny = WitnessOptions { max_q: 16, ..opts() };
    assert!(matches!(build_q_witness(64, 10, &tiny), Err(Error::ResourceLimit(_))));
}

#[test]
fn normalized_q_64() {
    let w = build_normalized_q(1, QSchedule::Fixed(64), 12, &opts()).unwrap();
    assert!(w.norm.contains(&Dyadic::one()));
    // 2 / ||q_64||_1
    let ratio = 2.0 / l1q(64).unwrap().to_f64();
    assert!((w.sample_l1.to_f64() - ratio).abs() < 1e-8);
}

#[test]
fn schedules() {
    assert_eq!(QSchedule::Scaled.big_n(0).unwrap(), 512);
    assert_eq!(QSchedule::Scaled.big_n(1).unwrap(), 2048);
    assert!(matches!(QSchedule::Steep.big_n(1), Err(Error::ResourceLimit(_))));
    assert!(matches!(
        build_normalized_q(1, QSchedule::Steep, 10, &opts()),
        Err(Error::ResourceLimit(_))
    ));
}

#[test]
fn gated_point_value() {
    let m = Machine::parse(&counter_program(37)).unwrap();
    let f = build_gated_family(&m, GateMode::PointValue, 6, 20, &opts()).unwrap();
    assert_eq!(f.h, vec![5, 9, 17, 33, 37, 37, 37]);
    assert_eq!(f.freeze_k, Some(4));
    assert_eq!(f.halting_step, Some(37));
    assert!(f.frozen_value.as_ref().unwrap().contains(&Dyadic::one()));
    assert!(f.rows.iter().all(|r| r.ok()));
    assert!(f.rows[4..].iter().all(|r| r.bound.is_none()));
    assert!(!f.partial());
    // the emitted document carries the frozen gate
    assert!(f.description.serialize().contains("frozen 37"));
}

#[test]
fn gated_loop_both_modes() {
    let m = Machine::parse(LOOP_PROGRAM).unwrap();
    for mode in [GateMode::PointValue, GateMode::Norm] {
        let f = build_gated_family(&m, mode, 6, 20, &opts()).unwrap();
        assert!(f.partial() && f.freeze_k.is_none() && f.frozen_value.is_none());
        for r in &f.rows {
            let b = Dyadic::pow2(-(r.k as i64) - 2);
            assert!(r.sample_norm.hi() <= &b, "k = {}: {}", r.k, r.sample_norm);
        }
        assert!(f.description.serialize().contains("partial"));
    }
}

#[test]
fn gate_table_is_a_step_count() {
    // h(m, k) counts l in 0..=2^(k+2) with the machine still running
    for s in [0u64, 1, 4, 5, 6, 100] {
        let m = Machine::parse(&counter_program(s)).unwrap();
        let (h, _) = gate_table(&m, 5).unwrap();
        for (k, hk) in h.iter().enumerate() {
            let direct = (0..=(1u64 << (k + 2))).filter(|&l| !m.halts_within(l)).count() as u64;
            assert_eq!(*hk, direct, "s = {s}, k = {k}");
        }
    }
    let m = Machine::parse(LOOP_PROGRAM).unwrap();
    assert!(matches!(gate_table(&m, 41), Err(Error::ResourceLimit(_))));
}

#[test]
fn divergence_rows() {
    let rows = divergence_table(&Family::G, 2, 20, &opts()).unwrap();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!(r.ratio_lo.as_ref().unwrap() >= &Dyadic::from_int(r.n as i64));
    }
    let csv = divergence_csv(&rows, 8);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), DIVERGENCE_COLUMNS.join(","));
    assert!(lines.next().unwrap().starts_with("1,2^8,"));
    assert_eq!(csv, divergence_csv(&rows, 8));
    assert!(divergence_text(&rows, 8).contains("ratio_lo"));
}
