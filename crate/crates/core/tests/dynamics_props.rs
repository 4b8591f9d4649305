mod common;

use giant_bic::analytics::obs_trajectory;
use giant_bic::darkstates::{HalfInt, ObsPoint};
use giant_bic::dynamics::*;
use giant_bic::{Error, InitialAtomState, SystemConfig, Topology, C64};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

fn point(top: Topology, n: usize, m2: i64, p2: i64, q: u32) -> ObsPoint {
    ObsPoint::new(top, n, HalfInt::from_twice(m2), HalfInt::from_twice(p2), q).unwrap()
}

#[test]
fn field_respects_the_light_cone() {
    let cfg = SystemConfig::new(Topology::Separate, 2, 14.0, 0.4).unwrap();
    let a = InitialAtomState::new(C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0)).unwrap();
    let b = InitialAtomState::new(C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, FRAC_1_SQRT_2)).unwrap();
    let (ta, tb) = (evolve(&cfg, &a, 3.0, 80).unwrap(), evolve(&cfg, &b, 3.0, 80).unwrap());
    let atom2 = cfg.layout().positions(1);
    let grid: Vec<f64> = (0..=400).map(|i| -5.0 + 0.025 * i as f64).collect();
    for t in [0.4, 0.9, 2.3] {
        let (fa, fb) = (field_snapshot(&cfg, &ta, t, &grid).unwrap(), field_snapshot(&cfg, &tb, t, &grid).unwrap());
        for (i, &x) in grid.iter().enumerate() {
            // atom 1 first hears atom 2 after one delay, so before that the
            // difference is confined to atom 2's own light cone
            let reach = if t < 1.0 { t } else { t + 10.0 };
            if atom2.iter().all(|p| (x - p).abs() > reach + 1e-9) {
                assert!((fa.phi[i] - fb.phi[i]).norm() < 1e-12, "t={t} x={x}");
            }
            if x.abs() > 1.5 + t + 1e-9 {
                assert_eq!(fa.phi[i], C64::new(0.0, 0.0));
            }
        }
    }
}

#[test]
fn fourth_order_convergence() {
    let cfg = SystemConfig::new(Topology::Braided, 3, 12.0, 0.25).unwrap();
    let init = InitialAtomState::eg();
    let t = 7.0;
    let beta = |m: usize| evolve(&cfg, &init, t, m).unwrap().beta_at(t).unwrap()[0].norm();
    let reference = beta(640);
    let e40 = (beta(40) - reference).abs();
    let e80 = (beta(80) - reference).abs();
    let e160 = (beta(160) - reference).abs();
    assert!(e40 / e80 >= 8.0, "{e40} {e80}");
    assert!(e80 / e160 >= 8.0, "{e80} {e160}");
}

#[test]
fn parity_is_conserved() {
    for top in [Topology::Separate, Topology::Braided] {
        let cfg = SystemConfig::new(top, 3, 9.0, 0.3).unwrap();
        for (init, sign) in [(InitialAtomState::plus(), 1.0), (InitialAtomState::minus(), -1.0)] {
            let tr = evolve(&cfg, &init, 30.0, 80).unwrap();
            for k in 0..tr.len() {
                assert!((tr.beta1[k] - tr.beta2[k] * sign).norm() < 1e-12);
            }
            let grid: Vec<f64> = (0..=200).map(|i| -8.0 + 0.08 * i as f64).collect();
            let snap = field_snapshot(&cfg, &tr, 6.3, &grid).unwrap();
            let int = snap.intensity();
            for i in 0..grid.len() {
                assert!((int[i] - int[grid.len() - 1 - i]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn excitation_sum_rule_on_expanding_windows() {
    // Omega tau = 9 pi keeps the right/left interference in int |phi|^2 near 1e-4
    let cfg = SystemConfig::from_over_2pi(Topology::Separate, 2, 4.5, 0.06).unwrap();
    let tr = evolve(&cfg, &InitialAtomState::eg(), 20.0, 80).unwrap();
    let half = cfg.layout().half_span();
    for t in [0.5, 2.0, 5.0, 10.0, 19.5] {
        let ex = excitations(&cfg, &tr, t, (-t - half - 1.0, t + half + 1.0)).unwrap();
        assert!((ex.it - 1.0).abs() < 1e-3, "t={t}: {ex:?}");
        assert!((ex.ia + ex.ip_directional - 1.0).abs() < 1e-8, "t={t}: {ex:?}");
    }
}

#[test]
fn directional_photon_number_is_exactly_conserved_at_low_frequency() {
    let cfg = SystemConfig::new(Topology::Braided, 2, 2.0, 0.5).unwrap();
    let tr = evolve(&cfg, &InitialAtomState::eg(), 12.0, 80).unwrap();
    for t in [1.0, 4.0, 11.0] {
        let ex = excitations_with(&cfg, &tr, t, (-t - 3.0, t + 3.0), 400.0).unwrap();
        assert!((ex.ia + ex.ip_directional - 1.0).abs() < 1e-9, "{ex:?}");
    }
}

#[test]
fn window_must_cover_the_coupling_span() {
    let cfg = SystemConfig::new(Topology::Separate, 2, 10.0, 0.1).unwrap();
    let tr = evolve(&cfg, &InitialAtomState::eg(), 2.0, 40).unwrap();
    assert!(matches!(excitations(&cfg, &tr, 1.0, (-1.0, 1.0)), Err(Error::InvalidConfig(_))));
}

#[test]
fn atomic_population_never_exceeds_one() {
    let cfg = SystemConfig::new(Topology::Braided, 3, 5.0, 0.8).unwrap();
    let tr = evolve(&cfg, &InitialAtomState::eg(), 40.0, 80).unwrap();
    assert!(tr.atomic_excitation().iter().all(|&p| p <= 1.0 + 1e-12));
}

/// DDE against the long-time closed forms. The approach to the limit is
/// governed by the slowest lossy pole, so the window starts at `200 tau`.
#[test]
fn long_time_matches_closed_forms() {
    let cases = [
        (point(Topology::Separate, 2, 52, 2, 1), InitialAtomState::plus()),
        (point(Topology::Separate, 2, 52, 2, 1), InitialAtomState::eg()),
        (point(Topology::Separate, 2, 138, 4, 1), InitialAtomState::plus()),
        (point(Topology::Separate, 2, 138, 4, 1), InitialAtomState::eg()),
        (point(Topology::Braided, 2, 60, 2, 1), InitialAtomState::eg()),
        (point(Topology::Braided, 3, 51, 1, 1), InitialAtomState::eg()),
    ];
    for (pt, init) in cases {
        let cfg = pt.config();
        let form = obs_trajectory(&pt, &init).unwrap();
        let tr = evolve(&cfg, &init, 300.0, substeps_for(&cfg)).unwrap();
        let (p1, p2) = (tr.p1(), tr.p2());
        let mut peak = 0.0f64;
        let mut dev = 0.0f64;
        for k in tr.index_at(200.0)..tr.len() {
            let want = form.probabilities(tr.time(k));
            peak = peak.max(want[0]).max(want[1]);
            dev = dev.max((p1[k] - want[0]).abs()).max((p2[k] - want[1]).abs());
        }
        assert!(dev / peak < 0.02, "m={} p={} {:?}: {dev} / {peak}", pt.m, pt.p, init.kind());
    }
}

#[test]
fn static_plateau_equals_amplitude_squared() {
    let cfg = SystemConfig::from_over_2pi(Topology::Separate, 2, 4.5, 0.06).unwrap();
    let a = 1.0 / (1.0 + 0.12 * PI);
    let tr = evolve(&cfg, &InitialAtomState::plus(), 120.0, 80).unwrap();
    let k = tr.index_at(100.0);
    assert!((tr.p1()[k] - a * a / 2.0).abs() < 1e-10);
    assert!((tr.p2()[k] - a * a / 2.0).abs() < 1e-10);
}

#[test]
fn csv_rows_are_lossless() {
    let cfg = SystemConfig::new(Topology::Separate, 2, 10.0, 0.1).unwrap();
    let tr = evolve(&cfg, &InitialAtomState::eg(), 2.0, 40).unwrap();
    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, &tr, 10).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(TRAJECTORY_HEADER));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[4][1], tr.beta1[40].re);
    assert_eq!(rows[4][5], tr.beta1[40].norm_sqr());
}
