//! Detector for periodic firing in a rate trace.

/// Peaks lower than this fraction of the trace's range above their
/// surroundings are ignored.
pub const MIN_PROMINENCE: f64 = 0.05;
/// Fraction of the trace dropped as transient.
pub const TRANSIENT: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct OscillationReport {
    /// `(t, N)` of every retained local maximum.
    pub maxima: Vec<(f64, f64)>,
    /// Mean spacing of the maxima.
    pub period: Option<f64>,
    /// Largest deviation of a spacing from the mean, relative to the mean.
    pub spacing_spread: Option<f64>,
    /// Slope of a least-squares line through the peak heights.
    pub amplitude_trend: Option<f64>,
    pub sustained: bool,
}

impl OscillationReport {
    pub fn summary(&self) -> String {
        match (self.sustained, self.period) {
            (true, Some(p)) => format!(
                "sustained oscillation, period {p:.6}, {} maxima",
                self.maxima.len()
            ),
            _ => "no sustained oscillation".to_string(),
        }
    }
}

/// Finds 3-point local maxima after the transient, keeps those standing out
/// by at least [`MIN_PROMINENCE`] of the range, and calls the trace
/// oscillating when three or more remain.
pub fn oscillation_report(series: &[(f64, f64)]) -> OscillationReport {
    let start = (series.len() as f64 * TRANSIENT).floor() as usize;
    let tail = &series[start.min(series.len())..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| {
            (lo.min(y), hi.max(y))
        });
    let range = hi - lo;
    let mut candidates = Vec::new();
    for k in 1..tail.len().saturating_sub(1) {
        let (y0, y1, y2) = (tail[k - 1].1, tail[k].1, tail[k + 1].1);
        if y1 > y0 && y1 >= y2 {
            candidates.push(k);
        }
    }
    let maxima: Vec<(f64, f64)> = if range > 0.0 && range.is_finite() {
        candidates
            .iter()
            .filter(|&&k| prominence(tail, k) >= MIN_PROMINENCE * range)
            .map(|&k| tail[k])
            .collect()
    } else {
        Vec::new()
    };

    let mut report = OscillationReport {
        maxima,
        period: None,
        spacing_spread: None,
        amplitude_trend: None,
        sustained: false,
    };
    if report.maxima.len() < 3 {
        return report;
    }
    let spacings: Vec<f64> = report.maxima.windows(2).map(|w| w[1].0 - w[0].0).collect();
    let period = spacings.iter().sum::<f64>() / spacings.len() as f64;
    let spread = spacings
        .iter()
        .map(|s| (s - period).abs())
        .fold(0.0, f64::max)
        / period;
    report.period = Some(period);
    report.spacing_spread = Some(spread);
    report.amplitude_trend = Some(slope(&report.maxima));
    report.sustained = true;
    report
}

/// Height of the peak above the higher of the two minima separating it from
/// taller terrain (or the trace ends).
fn prominence(s: &[(f64, f64)], k: usize) -> f64 {
    let peak = s[k].1;
    let mut left_min = peak;
    for j in (0..k).rev() {
        if s[j].1 > peak {
            break;
        }
        left_min = left_min.min(s[j].1);
    }
    let mut right_min = peak;
    for &(_, y) in &s[k + 1..] {
        if y > peak {
            break;
        }
        right_min = right_min.min(y);
    }
    peak - left_min.max(right_min)
}

fn slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx > 0.0 {
        sxy / sxx
    } else {
        0.0
    }
}
