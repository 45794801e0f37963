//! Correlation, multiple-testing correction, bootstrap contrasts, split-half
//! reliability, and calibration binning.
//!
//! Everything here is pure given (inputs, seed). Randomized routines take a
//! [`StreamRng`] and draw replicate `k` from substream `k`, so confidence
//! intervals are reproducible bit-for-bit and replicates could evaluate in
//! any order.

pub mod dist;

use alloc::vec::Vec;
use core::fmt;

use crate::corpus::RatingMatrix;
use crate::math;
use crate::metrics;
use crate::rng::StreamRng;

/// Pearson or Spearman correlation with its exact two-sided p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    pub r: f64,
    pub p_two_sided: f64,
    pub n: usize,
    /// Filled by [`bonferroni`]-style adjustment downstream.
    pub p_adjusted: Option<f64>,
}

/// Sample Pearson correlation; p from `t = r sqrt((n-2)/(1-r^2))` against
/// Student-t with n-2 degrees of freedom, two-sided.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFewPoints { n, min: 3 });
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let nf = n as f64;
    let mean_x = x.iter().sum::<f64>() / nf;
    let mean_y = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y.iter()) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let r = (sxy / math::sqrt(sxx * syy)).clamp(-1.0, 1.0);
    let df = nf - 2.0;
    let p = if math::abs(r) >= 1.0 {
        0.0
    } else {
        let t = r * math::sqrt(df / (1.0 - r * r));
        dist::student_t_two_sided_p(t, df)
    };
    Ok(CorrelationResult {
        r,
        p_two_sided: p,
        n,
        p_adjusted: None,
    })
}

/// Average ranks (ties share the mean of their rank range).
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = alloc::vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation: Pearson on average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Bonferroni adjustment: `min(1, p * m)` with `m` the family size.
pub fn bonferroni(p_values: &[f64]) -> Vec<f64> {
    let m = p_values.len() as f64;
    p_values.iter().map(|&p| (p * m).min(1.0)).collect()
}

/// Percentile with linear interpolation on an already-sorted slice
/// (`q` in [0, 1]).
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty() && (0.0..=1.0).contains(&q));
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Group mean difference with percentile bootstrap confidence intervals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapContrast {
    /// mean(group A) - mean(group B) on the unresampled data.
    pub mean_diff: f64,
    pub ci50: (f64, f64),
    pub ci95: (f64, f64),
    pub n_replicates: usize,
    /// Replicates redrawn because a resample emptied one group.
    pub n_redrawn: usize,
}

/// Bootstraps the difference in group means by resampling the full item list
/// with replacement. Replicate `k` draws from substream `k`; a replicate that
/// empties either group is redrawn within its substream and counted.
pub fn bootstrap_mean_difference(
    values: &[f64],
    in_group_a: &[bool],
    n_replicates: usize,
    rng: &StreamRng,
) -> Result<BootstrapContrast, StatsError> {
    if values.len() != in_group_a.len() {
        return Err(StatsError::LengthMismatch {
            left: values.len(),
            right: in_group_a.len(),
        });
    }
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    if n_replicates == 0 {
        return Err(StatsError::TooFewPoints { n: 0, min: 1 });
    }
    let n = values.len();
    let n_a = in_group_a.iter().filter(|&&g| g).count();
    if n_a == 0 || n_a == n {
        return Err(StatsError::EmptyGroup);
    }

    let group_diff = |idx: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let (mut sum_a, mut cnt_a, mut sum_b, mut cnt_b) = (0.0, 0usize, 0.0, 0usize);
        for i in idx {
            if in_group_a[i] {
                sum_a += values[i];
                cnt_a += 1;
            } else {
                sum_b += values[i];
                cnt_b += 1;
            }
        }
        if cnt_a == 0 || cnt_b == 0 {
            None
        } else {
            Some(sum_a / cnt_a as f64 - sum_b / cnt_b as f64)
        }
    };

    let mean_diff = group_diff(&mut (0..n)).expect("both groups non-empty");

    let mut diffs = Vec::with_capacity(n_replicates);
    let mut n_redrawn = 0usize;
    for k in 0..n_replicates {
        let mut stream = rng.stream(k as u64);
        loop {
            let mut draw = (0..n).map(|_| stream.index_below(n));
            match group_diff(&mut draw) {
                Some(d) => {
                    diffs.push(d);
                    break;
                }
                None => n_redrawn += 1,
            }
        }
    }
    diffs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(BootstrapContrast {
        mean_diff,
        ci50: (
            percentile_sorted(&diffs, 0.25),
            percentile_sorted(&diffs, 0.75),
        ),
        ci95: (
            percentile_sorted(&diffs, 0.025),
            percentile_sorted(&diffs, 0.975),
        ),
        n_replicates,
        n_redrawn,
    })
}

/// Split-half reliability of per-statement commonsensicality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitHalfResult {
    pub mean_r: f64,
    /// 2.5 / 97.5 percentiles of r across repeats.
    pub ci95: (f64, f64),
    pub n_repeats_used: usize,
    /// Repeats dropped because the two halves shared no scorable statements
    /// or the correlation was degenerate.
    pub n_repeats_dropped: usize,
}

/// Repeatedly partitions respondents into two halves (sizes ⌊n/2⌋ and ⌈n/2⌉),
/// computes per-statement commonsensicality within each half, and correlates
/// the two over statements rated in both halves. Repeat `k` shuffles with
/// substream `k`; statements lacking raters in either half are dropped
/// pairwise from that repeat.
pub fn split_half_reliability(
    matrix: &RatingMatrix,
    repeats: usize,
    rng: &StreamRng,
) -> Result<SplitHalfResult, StatsError> {
    let n_resp = matrix.n_respondents();
    if n_resp < 4 {
        return Err(StatsError::TooFewPoints { n: n_resp, min: 4 });
    }
    if repeats == 0 {
        return Err(StatsError::TooFewPoints { n: 0, min: 1 });
    }

    let mut rs = Vec::with_capacity(repeats);
    let mut dropped = 0usize;
    let mut in_first = alloc::vec![false; n_resp];
    for k in 0..repeats {
        let mut stream = rng.stream(k as u64);
        let mut order: Vec<u32> = (0..n_resp as u32).collect();
        stream.shuffle(&mut order);
        let half = n_resp / 2;
        for f in in_first.iter_mut() {
            *f = false;
        }
        for &j in &order[..half] {
            in_first[j as usize] = true;
        }

        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in matrix.rated_statements() {
            let (mut ya1, mut yb1, mut n1) = (0usize, 0usize, 0usize);
            let (mut ya2, mut yb2, mut n2) = (0usize, 0usize, 0usize);
            for &(j, ans) in matrix.raters_of(i) {
                if in_first[j as usize] {
                    n1 += 1;
                    ya1 += ans.agree as usize;
                    yb1 += ans.predict_agree as usize;
                } else {
                    n2 += 1;
                    ya2 += ans.agree as usize;
                    yb2 += ans.predict_agree as usize;
                }
            }
            if n1 > 0 && n2 > 0 {
                xs.push(metrics::aggregate_scores(ya1, yb1, n1).1.commonsensicality);
                ys.push(metrics::aggregate_scores(ya2, yb2, n2).1.commonsensicality);
            }
        }
        match pearson(&xs, &ys) {
            Ok(c) => rs.push(c.r),
            Err(_) => dropped += 1,
        }
    }
    if rs.is_empty() {
        return Err(StatsError::NoUsableRepeats { dropped });
    }
    let mean_r = rs.iter().sum::<f64>() / rs.len() as f64;
    rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(SplitHalfResult {
        mean_r,
        ci95: (
            percentile_sorted(&rs, 0.025),
            percentile_sorted(&rs, 0.975),
        ),
        n_repeats_used: rs.len(),
        n_repeats_dropped: dropped,
    })
}

/// One calibration bin over the human-frequency axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub q25: Option<f64>,
    pub q50: Option<f64>,
    pub q75: Option<f64>,
    pub mean_model: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSummary {
    pub bins: Vec<CalibrationBin>,
    pub rmse: f64,
    /// Undefined when either side has zero variance.
    pub r: Option<f64>,
}

/// Bins paired (human frequency, model probability) points into `n_bins`
/// equal-width bins on the human axis (last bin right-closed), and reports
/// global RMSE and Pearson r.
pub fn calibration_bins(
    human: &[f64],
    model: &[f64],
    n_bins: usize,
) -> Result<CalibrationSummary, StatsError> {
    if human.len() != model.len() {
        return Err(StatsError::LengthMismatch {
            left: human.len(),
            right: model.len(),
        });
    }
    if human.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if n_bins == 0 {
        return Err(StatsError::TooFewPoints { n: 0, min: 1 });
    }
    if human
        .iter()
        .chain(model.iter())
        .any(|v| !v.is_finite() || !(0.0..=1.0).contains(v))
    {
        return Err(StatsError::NonFinite);
    }

    let mut members = alloc::vec![Vec::new(); n_bins];
    for (&h, &m) in human.iter().zip(model.iter()) {
        let b = ((h * n_bins as f64) as usize).min(n_bins - 1);
        members[b].push(m);
    }
    let width = 1.0 / n_bins as f64;
    let bins = members
        .into_iter()
        .enumerate()
        .map(|(b, mut vals)| {
            let (lo, hi) = (b as f64 * width, (b as f64 + 1.0) * width);
            if vals.is_empty() {
                CalibrationBin {
                    lo,
                    hi,
                    count: 0,
                    q25: None,
                    q50: None,
                    q75: None,
                    mean_model: None,
                }
            } else {
                vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mean = vals.iter().sum::<f64>() / vals.len() as f64;
                CalibrationBin {
                    lo,
                    hi,
                    count: vals.len(),
                    q25: Some(percentile_sorted(&vals, 0.25)),
                    q50: Some(percentile_sorted(&vals, 0.50)),
                    q75: Some(percentile_sorted(&vals, 0.75)),
                    mean_model: Some(mean),
                }
            }
        })
        .collect();

    let mse = human
        .iter()
        .zip(model.iter())
        .map(|(&h, &m)| (m - h) * (m - h))
        .sum::<f64>()
        / human.len() as f64;
    let r = pearson(human, model).ok().map(|c| c.r);
    Ok(CalibrationSummary {
        bins,
        rmse: math::sqrt(mse),
        r,
    })
}

/// Mean absolute error and root mean squared error of paired vectors.
pub fn mae_rmse(m_model: &[f64], m_human: &[f64]) -> Result<(f64, f64), StatsError> {
    if m_model.len() != m_human.len() {
        return Err(StatsError::LengthMismatch {
            left: m_model.len(),
            right: m_human.len(),
        });
    }
    if m_model.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let n = m_model.len() as f64;
    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    for (&a, &b) in m_model.iter().zip(m_human.iter()) {
        let d = a - b;
        abs_sum += math::abs(d);
        sq_sum += d * d;
    }
    Ok((abs_sum / n, math::sqrt(sq_sum / n)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatsError {
    LengthMismatch { left: usize, right: usize },
    TooFewPoints { n: usize, min: usize },
    NonFinite,
    ZeroVariance,
    EmptyInput,
    EmptyGroup,
    NoUsableRepeats { dropped: usize },
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::LengthMismatch { left, right } => {
                write!(f, "paired vectors have lengths {left} and {right}")
            }
            StatsError::TooFewPoints { n, min } => {
                write!(f, "{n} points given, at least {min} required")
            }
            StatsError::NonFinite => write!(f, "input contains non-finite or out-of-range values"),
            StatsError::ZeroVariance => write!(f, "correlation undefined: zero variance"),
            StatsError::EmptyInput => write!(f, "empty input"),
            StatsError::EmptyGroup => write!(f, "both groups must be non-empty"),
            StatsError::NoUsableRepeats { dropped } => {
                write!(f, "all {dropped} repeats were degenerate")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for StatsError {}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pearson_perfect_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let c = pearson(&x, &y).unwrap();
        assert_eq!(c.r, 1.0);
        assert_eq!(c.p_two_sided, 0.0);
    }

    #[test]
    fn pearson_hand_oracle() {
        // Direct covariance/variance evaluation, frozen.
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [2.0, 1.0, 4.0, 3.0, 5.0];
        let c = pearson(&x, &y).unwrap();
        assert!((c.r - 0.8).abs() < 1e-12);
        assert!((c.p_two_sided - 0.104088038661828).abs() < 1e-12);
    }

    #[test]
    fn pearson_zero_variance_errors() {
        let x = [1.0, 1.0, 1.0, 1.0];
        let y = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(pearson(&x, &y).unwrap_err(), StatsError::ZeroVariance);
    }

    #[test]
    fn bonferroni_cases() {
        assert_eq!(bonferroni(&[0.01]), alloc::vec![0.01]);
        let adj = bonferroni(&alloc::vec![0.002; 35]);
        assert!((adj[0] - 0.07).abs() < 1e-12);
        let raw = [0.1, 0.5, 0.9];
        let adj = bonferroni(&raw);
        for (a, r) in adj.iter().zip(raw.iter()) {
            assert!(a >= r);
            assert!(*a <= 1.0);
        }
    }

    #[test]
    fn spearman_with_ties() {
        let x = [1.0, 2.0, 2.0, 3.0];
        let y = [10.0, 20.0, 20.0, 30.0];
        let c = spearman(&x, &y).unwrap();
        assert!((c.r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bootstrap_constant_groups() {
        let values = [3.0, 3.0, 3.0, 3.0, 3.0, 3.0];
        let groups = [true, true, true, false, false, false];
        let rng = StreamRng::new(11);
        let c = bootstrap_mean_difference(&values, &groups, 200, &rng).unwrap();
        assert_eq!(c.mean_diff, 0.0);
        assert_eq!(c.ci50, (0.0, 0.0));
        assert_eq!(c.ci95, (0.0, 0.0));
    }

    #[test]
    fn bootstrap_point_estimate_is_direct_difference() {
        // 20 items, group A the first 8.
        let values: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let groups: Vec<bool> = (0..20).map(|i| i < 8).collect();
        let mean_a = values[..8].iter().sum::<f64>() / 8.0;
        let mean_b = values[8..].iter().sum::<f64>() / 12.0;
        let rng = StreamRng::new(5);
        let c = bootstrap_mean_difference(&values, &groups, 500, &rng).unwrap();
        assert!((c.mean_diff - (mean_a - mean_b)).abs() < 1e-15);
        assert!(c.ci95.0 <= c.ci50.0 && c.ci50.1 <= c.ci95.1);
        assert!(c.ci50.0 <= c.ci50.1);
    }

    #[test]
    fn bootstrap_deterministic_per_seed() {
        let values: Vec<f64> = (0..30).map(|i| libm::sin(i as f64 * 0.37)).collect();
        let groups: Vec<bool> = (0..30).map(|i| i % 3 == 0).collect();
        let a = bootstrap_mean_difference(&values, &groups, 300, &StreamRng::new(9)).unwrap();
        let b = bootstrap_mean_difference(&values, &groups, 300, &StreamRng::new(9)).unwrap();
        assert_eq!(a, b);
        let c = bootstrap_mean_difference(&values, &groups, 300, &StreamRng::new(10)).unwrap();
        assert_ne!(a.ci95, c.ci95);
    }

    #[test]
    fn bootstrap_empty_group_errors() {
        let values = [1.0, 2.0];
        let groups = [true, true];
        assert_eq!(
            bootstrap_mean_difference(&values, &groups, 10, &StreamRng::new(0)).unwrap_err(),
            StatsError::EmptyGroup
        );
    }

    #[test]
    fn calibration_identity_and_flip() {
        let h: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
        let s = calibration_bins(&h, &h, 10).unwrap();
        assert_eq!(s.rmse, 0.0);
        assert_eq!(s.r, Some(1.0));
        assert_eq!(s.bins.len(), 10);
        assert_eq!(s.bins.iter().map(|b| b.count).sum::<usize>(), 50);

        let flipped: Vec<f64> = h.iter().map(|&x| 1.0 - x).collect();
        let s = calibration_bins(&h, &flipped, 10).unwrap();
        let want = math::sqrt(
            h.iter()
                .map(|&x| (1.0 - 2.0 * x) * (1.0 - 2.0 * x))
                .sum::<f64>()
                / 50.0,
        );
        assert!((s.rmse - want).abs() < 1e-12);
        assert_eq!(s.r, Some(-1.0));
    }

    #[test]
    fn calibration_hand_dataset() {
        // 12 pairs; RMSE evaluated by the in-test loop below.
        let h = [
            0.05, 0.12, 0.22, 0.31, 0.40, 0.47, 0.55, 0.63, 0.71, 0.82, 0.90, 0.99,
        ];
        let m = [
            0.10, 0.05, 0.30, 0.28, 0.55, 0.44, 0.52, 0.70, 0.65, 0.85, 0.95, 0.90,
        ];
        let mut sq = 0.0;
        for i in 0..12 {
            sq += (m[i] - h[i]) * (m[i] - h[i]);
        }
        let want = math::sqrt(sq / 12.0);
        let s = calibration_bins(&h, &m, 10).unwrap();
        assert!((s.rmse - want).abs() < 1e-15);
        // Last bin is right-closed: both 0.90 and 0.99 land in bin 9.
        assert_eq!(s.bins[9].count, 2);
    }

    #[test]
    fn calibration_errors() {
        assert_eq!(
            calibration_bins(&[], &[], 10).unwrap_err(),
            StatsError::EmptyInput
        );
        assert_eq!(
            calibration_bins(&[0.5], &[1.5], 10).unwrap_err(),
            StatsError::NonFinite
        );
    }

    #[test]
    fn mae_rmse_cases() {
        assert_eq!(mae_rmse(&[0.2, 0.4], &[0.2, 0.4]).unwrap(), (0.0, 0.0));
        let (mae, rmse) = mae_rmse(&[1.0, 1.0], &[0.5, 0.5]).unwrap();
        assert_eq!((mae, rmse), (0.5, 0.5));
        assert_eq!(
            mae_rmse(&[1.0], &[1.0, 2.0]).unwrap_err(),
            StatsError::LengthMismatch { left: 1, right: 2 }
        );
    }

    #[test]
    fn percentile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile_sorted(&v, 0.0), 1.0);
        assert_eq!(percentile_sorted(&v, 1.0), 4.0);
        assert_eq!(percentile_sorted(&v, 0.5), 2.5);
    }

    proptest! {
        #[test]
        fn rmse_at_least_mae(
            pairs in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..40)
        ) {
            let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let (mae, rmse) = mae_rmse(&a, &b).unwrap();
            prop_assert!(rmse >= mae - 1e-12);
        }

        #[test]
        fn pearson_symmetric(
            pairs in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..30)
        ) {
            let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let a = pearson(&x, &y);
            let b = pearson(&y, &x);
            match (a, b) {
                (Ok(ca), Ok(cb)) => {
                    prop_assert_eq!(ca.r, cb.r);
                    prop_assert_eq!(ca.p_two_sided, cb.p_two_sided);
                }
                (Err(ea), Err(eb)) => prop_assert_eq!(ea, eb),
                _ => prop_assert!(false, "one side errored"),
            }
        }

        #[test]
        fn bonferroni_never_below_raw(ps in proptest::collection::vec(0.0f64..=1.0, 1..50)) {
            let adj = bonferroni(&ps);
            for (a, p) in adj.iter().zip(ps.iter()) {
                prop_assert!(a >= p);
                prop_assert!(*a <= 1.0);
            }
        }
    }
}
