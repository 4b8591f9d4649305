//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use giant_bic::{BranchSign, Topology, C64};
use rustfft::FftPlanner;

/// Coupling points from the layout rule, written out independently.
pub fn positions(top: Topology, n: usize) -> [Vec<f64>; 2] {
    let all: Vec<f64> = (0..2 * n).map(|k| k as f64 - (2 * n - 1) as f64 / 2.0).collect();
    match top {
        Topology::Separate => [all[..n].to_vec(), all[n..].to_vec()],
        Topology::Braided => [all.iter().step_by(2).copied().collect(), all.iter().skip(1).step_by(2).copied().collect()],
    }
}

/// `(gamma/2) sum exp(-s |x - x'|)` over point pairs, straight from the positions.
pub fn sigma_direct(s: C64, top: Topology, n: usize, gamma: f64, branch: BranchSign) -> C64 {
    let [a, b] = positions(top, n);
    let pair_sum = |u: &[f64], v: &[f64]| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for x in u {
            for y in v {
                acc += (-s * (x - y).abs()).exp();
            }
        }
        acc
    };
    (pair_sum(&a, &a) + pair_sum(&a, &b) * branch.sign()) * (gamma / 2.0)
}

/// Composite Simpson on `[a, b]` with an even number of panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Angular frequency of the strongest spectral line of `x` sampled at `dt`,
/// with zero padding and a parabolic refinement of the peak.
pub fn fft_peak(x: &[f64], dt: f64, pad: usize) -> f64 {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let len = x.len() * pad;
    let mut buf: Vec<C64> = (0..len)
        .map(|i| {
            if i < x.len() {
                let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (x.len() - 1) as f64).cos();
                C64::new((x[i] - mean) * w, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let mags: Vec<f64> = buf[..len / 2].iter().map(|c| c.norm()).collect();
    let k = (1..mags.len() - 1).max_by(|&i, &j| mags[i].total_cmp(&mags[j])).unwrap();
    let (a, b, c) = (mags[k - 1].ln(), mags[k].ln(), mags[k + 1].ln());
    let shift = 0.5 * (a - c) / (a - 2.0 * b + c);
    2.0 * std::f64::consts::PI * (k as f64 + shift) / (len as f64 * dt)
}

/// Largest `|a_i - b_i|` over paired samples.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
