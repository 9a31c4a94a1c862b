// SPDX-License-Identifier: Apache-2.0

//! Small helpers for reading structure out of sweep traces.

/// Index of the largest finite value.
pub fn argmax(y: &[f64]) -> Option<usize> {
    y.iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
}

pub fn argmin(y: &[f64]) -> Option<usize> {
    let neg: Vec<f64> = y.iter().map(|v| -v).collect();
    argmax(&neg)
}

/// Interior local maxima that rise above `min + fraction·(max − min)`.
pub fn find_peaks(y: &[f64], fraction: f64) -> Vec<usize> {
    if y.len() < 3 {
        return Vec::new();
    }
    let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let threshold = lo + fraction * (hi - lo);
    (1..y.len() - 1)
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] > threshold)
        .collect()
}

/// Vertex of the parabola through the three samples around `i`. Assumes a
/// uniform grid; falls back to `x[i]` at the edges or on flat tops.
pub fn refine_peak(x: &[f64], y: &[f64], i: usize) -> f64 {
    if i == 0 || i + 1 >= x.len() {
        return x[i];
    }
    let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
    let denom = a - 2.0 * b + c;
    if denom == 0.0 {
        return x[i];
    }
    let h = 0.5 * (x[i + 1] - x[i - 1]);
    x[i] + 0.5 * h * (a - c) / denom
}

/// Mean spacing of a comb of peak positions: positions are assigned integer
/// indices from the median gap (so missing peaks are tolerated) and the
/// spacing is the least-squares slope.
pub fn comb_spacing(positions: &[f64]) -> Option<f64> {
    if positions.len() < 2 {
        return None;
    }
    let mut gaps: Vec<f64> = positions.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_by(f64::total_cmp);
    let d0 = gaps[gaps.len() / 2];
    if !(d0 > 0.0) {
        return None;
    }
    let n: Vec<f64> = positions.iter().map(|p| ((p - positions[0]) / d0).round()).collect();
    let mn = n.iter().sum::<f64>() / n.len() as f64;
    let mp = positions.iter().sum::<f64>() / n.len() as f64;
    let sxy: f64 = n.iter().zip(positions).map(|(a, b)| (a - mn) * (b - mp)).sum();
    let sxx: f64 = n.iter().map(|a| (a - mn) * (a - mn)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// A comb spacing identified with a Larmor period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodMatch {
    pub species: usize,
    /// Number of comb teeth per period.
    pub harmonic: u32,
    pub relative_error: f64,
}

/// Best match of `harmonic·spacing` to one of `periods`, for harmonics
/// 1..=`max_harmonic`, if within `tolerance` (relative).
pub fn match_period(spacing: f64, periods: &[f64], max_harmonic: u32, tolerance: f64) -> Option<PeriodMatch> {
    let mut best: Option<PeriodMatch> = None;
    for (species, &t) in periods.iter().enumerate() {
        for harmonic in 1..=max_harmonic {
            let relative_error = (harmonic as f64 * spacing - t).abs() / t;
            if best.is_none_or(|b| relative_error < b.relative_error) {
                best = Some(PeriodMatch {
                    species,
                    harmonic,
                    relative_error,
                });
            }
        }
    }
    best.filter(|b| b.relative_error <= tolerance)
}

/// max − min of a trace.
pub fn range(y: &[f64]) -> f64 {
    let lo = y.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Root mean square of a set of standard errors.
pub fn pooled_stderr(se: &[f64]) -> f64 {
    if se.is_empty() {
        return 0.0;
    }
    (se.iter().map(|s| s * s).sum::<f64>() / se.len() as f64).sqrt()
}
