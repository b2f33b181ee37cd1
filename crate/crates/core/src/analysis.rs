//! Peak detection, wave classification, infection-timing statistics, the
//! release-impact metrics X and Y, and Pearson correlation.

use serde::Serialize;

use crate::epidemic::TrialResult;
use crate::error::{Error, Result};

/// Window-maximum peak detection parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakParams {
    /// Half-window in weeks.
    pub delta_t: usize,
    /// Minimum height for a peak to count.
    pub min_height: f64,
}

impl Default for PeakParams {
    fn default() -> Self {
        Self {
            delta_t: 5,
            min_height: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub week: usize,
    pub height: f64,
}

/// Detect peaks: week t is a peak iff its value is maximal over the window
/// `[t - delta_t, t + delta_t]` (clipped to the series), reaches
/// `min_height`, and is the earliest week of any plateau of equal values
/// inside the window. Returned in week order.
pub fn detect_peaks(series: &[f64], params: &PeakParams) -> Vec<Peak> {
    let len = series.len();
    let mut peaks = Vec::new();
    'weeks: for t in 0..len {
        let height = series[t];
        if height < params.min_height {
            continue;
        }
        let lo = t.saturating_sub(params.delta_t);
        let hi = (t + params.delta_t).min(len - 1);
        for s in lo..=hi {
            if series[s] > height {
                continue 'weeks;
            }
            if s < t && series[s] == height {
                // plateau: only its earliest week counts
                continue 'weeks;
            }
        }
        peaks.push(Peak { week: t, height });
    }
    peaks
}

/// Wave classification of a weekly case series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveReport {
    pub peaks: Vec<Peak>,
    pub second_peak_exists: bool,
    pub second_higher_than_first: bool,
    /// Minimum of the series strictly between the first two peak weeks,
    /// divided by the first peak height. Absent with fewer than two peaks.
    pub trough_ratio_before_second: Option<f64>,
}

pub fn classify_waves(peaks: &[Peak], series: &[f64]) -> WaveReport {
    if peaks.len() < 2 {
        return WaveReport {
            peaks: peaks.to_vec(),
            second_peak_exists: false,
            second_higher_than_first: false,
            trough_ratio_before_second: None,
        };
    }
    let first = peaks[0];
    let second = peaks[1];
    let between = &series[first.week + 1..second.week];
    let trough_ratio = if between.is_empty() {
        None
    } else {
        let trough = between.iter().copied().fold(f64::INFINITY, f64::min);
        Some(trough / first.height)
    };
    WaveReport {
        peaks: peaks.to_vec(),
        second_peak_exists: true,
        second_higher_than_first: second.height > first.height,
        trough_ratio_before_second: trough_ratio,
    }
}

/// Mean infection week over all non-seed infections (seeds are week 0 by
/// construction). Returns 0 when only the seeds were infected.
pub fn average_infection_timing(result: &TrialResult) -> f64 {
    mean_infection_week(&result.cases)
}

/// Same statistic computed straight from a weekly case series.
pub fn mean_infection_week(cases: &[u32]) -> f64 {
    let mut weighted = 0.0;
    let mut count = 0.0;
    for (week, &cases) in cases.iter().enumerate().skip(1) {
        weighted += week as f64 * cases as f64;
        count += cases as f64;
    }
    if count == 0.0 {
        0.0
    } else {
        weighted / count
    }
}

/// Release-impact metrics: X measures how close the baseline's highest peak
/// is to the release week (1 when the after-release window still contains
/// the global maximum), Y the released after-wave height relative to the
/// baseline's overall peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReleaseMetrics {
    pub x: f64,
    pub y: f64,
}

pub fn release_metrics(
    baseline: &[f64],
    released: &[f64],
    release_week: usize,
) -> Result<ReleaseMetrics> {
    if baseline.len() != released.len() {
        return Err(Error::InvalidParams(format!(
            "series lengths differ: {} vs {}",
            baseline.len(),
            released.len()
        )));
    }
    if release_week >= baseline.len() {
        return Err(Error::InvalidParams(format!(
            "release week {release_week} outside series of length {}",
            baseline.len()
        )));
    }
    let overall = max_of(baseline);
    if overall <= 0.0 {
        return Err(Error::UndefinedMetric(
            "baseline series has no cases; X and Y are undefined".into(),
        ));
    }
    Ok(ReleaseMetrics {
        x: max_of(&baseline[release_week..]) / overall,
        y: max_of(&released[release_week..]) / overall,
    })
}

fn max_of(series: &[f64]) -> f64 {
    series.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Week of the series' global maximum (earliest week on ties).
pub fn argmax_week(series: &[f64]) -> usize {
    let mut best = 0;
    for (week, &v) in series.iter().enumerate() {
        if v > series[best] {
            best = week;
        }
    }
    best
}

/// Standard Pearson product-moment correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidParams(format!(
            "sample lengths differ: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::UndefinedMetric(
            "correlation needs at least two samples".into(),
        ));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        cov += (x - mean_x) * (y - mean_y);
        var_x += (x - mean_x) * (x - mean_x);
        var_y += (y - mean_y) * (y - mean_y);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(Error::UndefinedMetric(
            "correlation undefined with zero variance".into(),
        ));
    }
    Ok(cov / (var_x.sqrt() * var_y.sqrt()))
}

/// Per-trial summary statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialStats {
    /// Highest weekly case count of the trial (week 0 included; it counts
    /// the two seeds).
    pub peak_cases: f64,
    /// Mean infection week of all non-seed infections.
    pub mean_infection_week: f64,
}

/// Trial-set aggregate: the week-wise mean curve plus the per-trial table.
/// Peak statistics are meaningful on both and are reported separately.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialAggregate {
    pub mean_cases: Vec<f64>,
    pub per_trial: Vec<TrialStats>,
}

pub fn aggregate_trials(results: &[TrialResult]) -> Result<TrialAggregate> {
    if results.is_empty() {
        return Err(Error::InvalidParams("no trials to aggregate".into()));
    }
    let len = results[0].cases.len();
    if results.iter().any(|r| r.cases.len() != len) {
        return Err(Error::InvalidParams(
            "trials have different horizons".into(),
        ));
    }
    let mut mean_cases = vec![0.0; len];
    for result in results {
        for (acc, &c) in mean_cases.iter_mut().zip(&result.cases) {
            *acc += c as f64;
        }
    }
    for v in &mut mean_cases {
        *v /= results.len() as f64;
    }
    let per_trial = results
        .iter()
        .map(|r| TrialStats {
            peak_cases: r.cases.iter().copied().max().unwrap_or(0) as f64,
            mean_infection_week: average_infection_timing(r),
        })
        .collect();
    Ok(TrialAggregate {
        mean_cases,
        per_trial,
    })
}
