mod common;

use common::{positions, sigma_direct};
use giant_bic::selfenergy::{closed_form, sigma_cross_atom, sigma_same_atom};
use giant_bic::{BranchSign, SelfEnergy, SystemConfig, Topology, C64};
use proptest::prelude::*;
use std::f64::consts::PI;

fn topology() -> impl Strategy<Value = Topology> {
    prop_oneof![Just(Topology::Separate), Just(Topology::Braided)]
}

fn branch() -> impl Strategy<Value = BranchSign> {
    prop_oneof![Just(BranchSign::Plus), Just(BranchSign::Minus)]
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn finite_sums_match_positions(top in topology(), n in 2usize..7, g in 0.0..2.0f64,
                                   re in -3.0..0.5f64, im in -60.0..60.0f64, b in branch()) {
        let cfg = SystemConfig::new(top, n, 10.0, g).unwrap();
        let s = C64::new(re, im);
        prop_assert!(rel(SelfEnergy::new(&cfg).pm(s, b), sigma_direct(s, top, n, g, b)) < 1e-12);
    }

    #[test]
    fn periodic_in_two_pi(top in topology(), n in 2usize..7, g in 0.01..2.0f64,
                          re in -3.0..0.5f64, im in -60.0..60.0f64, k in -2i32..=2, b in branch()) {
        let se = SelfEnergy::new(&SystemConfig::new(top, n, 10.0, g).unwrap());
        let s = C64::new(re, im);
        let shifted = s + C64::new(0.0, 2.0 * PI * k as f64);
        prop_assert!(rel(se.pm(shifted, b), se.pm(s, b)) < 1e-12);
    }

    #[test]
    fn braided_half_period_swaps_branches(n in 2usize..7, g in 0.01..2.0f64,
                                          re in -3.0..0.5f64, im in -60.0..60.0f64, k in -2i32..=2, b in branch()) {
        let se = SelfEnergy::new(&SystemConfig::new(Topology::Braided, n, 10.0, g).unwrap());
        let s = C64::new(re, im);
        let shifted = s + C64::new(0.0, (2 * k - 1) as f64 * PI);
        prop_assert!(rel(se.pm(shifted, b), se.pm(s, b.flip())) < 1e-12);
    }

    #[test]
    fn closed_forms_match_sums(top in topology(), n in 2usize..7, g in 0.01..2.0f64,
                               re in -3.0..0.5f64, im in -60.0..60.0f64, b in branch()) {
        let s = C64::new(re, im);
        let e = s.exp();
        prop_assume!((e - 1.0).norm() > 0.1 && (e + 1.0).norm() > 0.1);
        let cfg = SystemConfig::new(top, n, 10.0, g).unwrap();
        let sum = SelfEnergy::new(&cfg).pm(s, b);
        let closed = closed_form::sigma_pm(s, b, n, g, top);
        prop_assert!((sum - closed).norm() <= 1e-10 * sum.norm().max(1e-3), "{sum} vs {closed}");
    }

    #[test]
    fn derivative_matches_central_difference(top in topology(), n in 2usize..7, g in 0.01..2.0f64,
                                             re in -2.0..0.5f64, im in -30.0..30.0f64, b in branch()) {
        let se = SelfEnergy::new(&SystemConfig::new(top, n, 10.0, g).unwrap());
        let s = C64::new(re, im);
        let h = 1e-6;
        let fd = (se.pm(s + h, b) - se.pm(s - h, b)) / (2.0 * h);
        let d = se.pm_deriv(s, b);
        prop_assert!((fd - d).norm() <= 1e-6 * d.norm().max(1.0));
    }

    #[test]
    fn conjugation_symmetry(top in topology(), n in 2usize..7, g in 0.01..2.0f64,
                            re in -3.0..0.5f64, im in -60.0..60.0f64, b in branch()) {
        let se = SelfEnergy::new(&SystemConfig::new(top, n, 10.0, g).unwrap());
        let s = C64::new(re, im);
        prop_assert!(rel(se.pm(s.conj(), b), se.pm(s, b).conj()) < 1e-13);
    }
}

#[test]
fn multiplicities_sum_to_n_squared() {
    for top in [Topology::Separate, Topology::Braided] {
        for n in 2..=8usize {
            let cfg = SystemConfig::new(top, n, 10.0, 0.3).unwrap();
            let layout = cfg.layout();
            assert_eq!(layout.same_atom_delays().total() as usize, n * n);
            assert_eq!(layout.cross_atom_delays().total() as usize, n * n);
            // at s = 0 every pair contributes gamma/2
            let zero = C64::new(0.0, 0.0);
            assert!((sigma_same_atom(zero, &cfg).re - 0.15 * (n * n) as f64).abs() < 1e-12);
            assert!((sigma_cross_atom(zero, &cfg).re - 0.15 * (n * n) as f64).abs() < 1e-12);
        }
    }
}

#[test]
fn layouts_are_mirror_images() {
    for top in [Topology::Separate, Topology::Braided] {
        for n in 1..=8usize {
            if top == Topology::Braided && n == 1 {
                continue;
            }
            let layout = SystemConfig::new(top, n, 10.0, 0.3).unwrap().layout();
            let [a, b] = [layout.positions(0), layout.positions(1)];
            assert_eq!([a.clone(), b.clone()], positions(top, n));
            for j in 0..n {
                assert_eq!(a[j], -b[n - 1 - j]);
            }
        }
    }
}

#[test]
fn single_point_separate_is_two_small_atoms() {
    let cfg = SystemConfig::new(Topology::Separate, 1, 10.0, 0.4).unwrap();
    let s = C64::new(-0.1, 2.0);
    assert!((sigma_same_atom(s, &cfg) - 0.2).norm() < 1e-15);
    assert!((sigma_cross_atom(s, &cfg) - 0.2 * (-s).exp()).norm() < 1e-15);
}
