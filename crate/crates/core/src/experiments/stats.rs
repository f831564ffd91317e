//! Small statistics used by study summaries and gates.

use std::collections::BTreeMap;

use crate::normed_spaces::least_squares;

/// OLS slope of `ys` against `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    least_squares(xs, ys).0
}

/// Slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    ols_slope(&lx, &ly)
}

pub fn min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub fn median(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// `max / min` of positive values.
pub fn band(v: &[f64]) -> f64 {
    max(v) / min(v)
}

/// Smallest ratio of consecutive values; `> 1` iff strictly increasing.
pub fn min_step_ratio(v: &[f64]) -> f64 {
    v.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min)
}

/// Inserts `{prefix}.min/.max/.median/.band` of `v`.
pub fn describe(summary: &mut BTreeMap<String, f64>, prefix: &str, v: &[f64]) {
    summary.insert(format!("{prefix}.min"), min(v));
    summary.insert(format!("{prefix}.max"), max(v));
    summary.insert(format!("{prefix}.median"), median(v));
    summary.insert(format!("{prefix}.band"), band(v));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(band(&[2.0, 8.0, 4.0]), 4.0);
        assert!(min_step_ratio(&[1.0, 2.0, 3.0]) > 1.0);
        assert!(min_step_ratio(&[1.0, 2.0, 1.5]) < 1.0);
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.5)).collect();
        assert!((log_log_slope(&xs, &ys) + 0.5).abs() < 1e-12);
    }
}
