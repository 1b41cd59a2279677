//! Brute-force oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use gfra_core::airlink::{ActivityVector, PilotBook, PowerProfile};
use gfra_core::numerics::{Complex64, ComplexMatrix};

/// Probability that a random positive outranks a random negative, ties
/// counted as one half, by enumerating every pair.
pub fn pairwise_auc(scores: &[f64], truth: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if !truth[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if truth[j] {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Noise-free received block, one explicit sum per entry.
pub fn triple_loop_synthesis(
    pilots: &PilotBook,
    activity: &ActivityVector,
    power: &PowerProfile,
    gains: &ComplexMatrix,
) -> ComplexMatrix {
    let (l_len, k_len) = pilots.matrix().shape();
    let n_len = gains.cols();
    let mut y = ComplexMatrix::zeros(l_len, n_len);
    for l in 0..l_len {
        for n in 0..n_len {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..k_len {
                let a = if activity.is_active(k) { 1.0 } else { 0.0 };
                acc += pilots.matrix().get(l, k) * a * power.rho[k].sqrt() * gains.get(k, n);
            }
            y.set(l, n, acc);
        }
    }
    y
}

/// Active when at least half the voters (a strict majority for odd counts) say so.
pub fn majority_by_counting(votes: &[bool]) -> bool {
    let yes = votes.iter().filter(|&&v| v).count();
    2 * yes >= votes.len()
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(mut sample: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    s / n as f64
}
