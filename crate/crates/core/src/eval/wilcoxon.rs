//! Wilcoxon signed-rank test for paired samples.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Largest number of non-zero differences for which the exact null
/// distribution is enumerated; larger samples use the normal approximation.
pub const EXACT_LIMIT: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WilcoxonMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WilcoxonResult {
    /// W = min(W+, W-), the smaller of the signed rank sums.
    pub statistic: f64,
    /// Number of pairs that survive the zero-difference drop.
    pub n_effective: usize,
    pub p_value: f64,
    pub method: WilcoxonMethod,
}

/// Two-sided Wilcoxon signed-rank test on paired observations.
///
/// Zero differences are dropped; tied absolute differences receive their
/// average rank. Up to [`EXACT_LIMIT`] effective pairs the p-value comes from
/// enumerating the exact (conditional, tie-aware) null distribution of the
/// rank sum; beyond that a normal approximation with continuity correction
/// and tie-corrected variance is used.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::Evaluation(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Err(Error::DegenerateTest(
            "all paired differences are zero".into(),
        ));
    }
    let n = diffs.len();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diffs[i].abs().total_cmp(&diffs[j].abs()));

    // Doubled ranks stay integral even when tie groups average to .5 values.
    let mut doubled_ranks = vec![0u64; n];
    let mut tie_sizes = Vec::new();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && diffs[order[end]].abs() == diffs[order[start]].abs() {
            end += 1;
        }
        let doubled = (start + 1 + end) as u64;
        for &idx in &order[start..end] {
            doubled_ranks[idx] = doubled;
        }
        tie_sizes.push(end - start);
        start = end;
    }

    let mut w_plus_doubled = 0u64;
    for (d, &r) in diffs.iter().zip(&doubled_ranks) {
        if *d > 0.0 {
            w_plus_doubled += r;
        }
    }
    let total_doubled = (n * (n + 1)) as u64;
    let w_minus_doubled = total_doubled - w_plus_doubled;
    let w_doubled = w_plus_doubled.min(w_minus_doubled);
    let statistic = w_doubled as f64 / 2.0;

    let (p_value, method) = if n <= EXACT_LIMIT {
        (
            exact_p(&doubled_ranks, w_doubled),
            WilcoxonMethod::Exact,
        )
    } else {
        (
            approx_p(n, statistic, &tie_sizes)?,
            WilcoxonMethod::NormalApprox,
        )
    };
    Ok(WilcoxonResult {
        statistic,
        n_effective: n,
        p_value,
        method,
    })
}

/// 2 * P(S <= w) under the null that every rank carries a random sign, via a
/// subset-sum count over the doubled ranks. The null distribution is
/// symmetric, so doubling the lower tail gives the two-sided value.
fn exact_p(doubled_ranks: &[u64], w_doubled: u64) -> f64 {
    let total: u64 = doubled_ranks.iter().sum();
    let mut ways = vec![0.0f64; total as usize + 1];
    ways[0] = 1.0;
    let mut reach = 0usize;
    for &r in doubled_ranks {
        let r = r as usize;
        reach += r;
        for s in (r..=reach).rev() {
            ways[s] += ways[s - r];
        }
    }
    let tail: f64 = ways[..=(w_doubled as usize)].iter().sum();
    let p = 2.0 * tail / 2f64.powi(doubled_ranks.len() as i32);
    p.min(1.0)
}

fn approx_p(n: usize, w: f64, tie_sizes: &[usize]) -> Result<f64> {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = tie_sizes
        .iter()
        .map(|&t| {
            let t = t as f64;
            (t * t * t - t) / 48.0
        })
        .sum();
    let variance = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
    if variance <= 0.0 {
        return Err(Error::DegenerateTest(
            "rank variance vanished under ties".into(),
        ));
    }
    let z = (w - mean + 0.5) / variance.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    Ok((2.0 * normal.cdf(z)).min(1.0))
}
