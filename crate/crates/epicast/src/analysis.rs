//! Linear relationships between drivers and the target: Pearson correlation,
//! lag scans, and per-variable summary statistics.

use crate::table::{TableError, TimeSeriesTable};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("series too short: {got} values, need at least {need}")]
    TooShort { got: usize, need: usize },
    #[error("series {0:?} has zero variance")]
    ZeroVariance(String),
    #[error("overlap after shifting by {lag} days is {got}, need at least 3")]
    InsufficientOverlap { lag: usize, got: usize },
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Correlation of one variable against the target at each lag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagCorrelation {
    pub lag: usize,
    pub r: f64,
}

/// Result of a lag scan: all (lag, r) pairs plus the lag of maximal |r|.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagCorrelationReport {
    pub variable: String,
    pub best_lag: usize,
    pub best_r: f64,
    pub correlations: Vec<LagCorrelation>,
}

impl LagCorrelationReport {
    /// Plot-ready CSV of (lag, r) rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lag,r\n");
        for c in &self.correlations {
            out.push_str(&format!("{},{}\n", c.lag, c.r));
        }
        out
    }
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(AnalysisError::TooShort { got: x.len(), need: 3 });
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 {
        return Err(AnalysisError::ZeroVariance("x".into()));
    }
    if var_y == 0.0 {
        return Err(AnalysisError::ZeroVariance("y".into()));
    }
    Ok(cov / (var_x.sqrt() * var_y.sqrt()))
}

/// Correlates `variable` at day d against `target` at day d+L for each lag
/// L in 0..=max_lag over the maximal aligned overlap, and reports the lag of
/// maximal |r|. Ties break toward the smaller lag.
pub fn lag_scan(
    table: &TimeSeriesTable,
    variable: &str,
    target: &str,
    max_lag: usize,
) -> Result<LagCorrelationReport, AnalysisError> {
    let x = table.column_values(variable)?;
    let y = table.column_values(target)?;
    let len = x.len();
    if max_lag + 3 > len {
        return Err(AnalysisError::InsufficientOverlap {
            lag: max_lag,
            got: len.saturating_sub(max_lag),
        });
    }
    let mut correlations = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        let overlap = len - lag;
        if overlap < 3 {
            return Err(AnalysisError::InsufficientOverlap { lag, got: overlap });
        }
        let r = pearson(&x[..overlap], &y[lag..])?;
        correlations.push(LagCorrelation { lag, r });
    }
    // strict inequality keeps the smaller lag on ties
    let mut best = &correlations[0];
    for c in &correlations[1..] {
        if c.r.abs() > best.r.abs() {
            best = c;
        }
    }
    Ok(LagCorrelationReport {
        variable: variable.to_string(),
        best_lag: best.lag,
        best_r: best.r,
        correlations,
    })
}

/// Per-variable summary statistics over present values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSummary {
    pub name: String,
    pub present: usize,
    pub missing_fraction: f64,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
    pub stdev: Option<f64>,
}

/// Summarizes every variable: min, max, mean, sample standard deviation, and
/// missing fraction.
pub fn summarize(table: &TimeSeriesTable) -> Vec<VariableSummary> {
    table
        .variables()
        .iter()
        .map(|meta| {
            let col = table.column(&meta.name).expect("meta name is valid");
            let values: Vec<f64> = col.iter().flatten().copied().collect();
            let n = values.len();
            if n == 0 {
                return VariableSummary {
                    name: meta.name.clone(),
                    present: 0,
                    missing_fraction: meta.missing_fraction,
                    min: None,
                    max: None,
                    mean: None,
                    stdev: None,
                };
            }
            let mean = values.iter().sum::<f64>() / n as f64;
            let stdev = if n > 1 {
                (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            VariableSummary {
                name: meta.name.clone(),
                present: n,
                missing_fraction: meta.missing_fraction,
                min: values.iter().copied().reduce(f64::min),
                max: values.iter().copied().reduce(f64::max),
                mean: Some(mean),
                stdev: Some(stdev),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{synth_generate_with, SynthConfig, IRH_LAG, TEMPERATURE_LAG};
    use crate::table::parse_table;

    /// Direct textbook evaluation used as an independent check.
    fn pearson_oracle(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let sx: f64 = x.iter().sum();
        let sy: f64 = y.iter().sum();
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
        let sxx: f64 = x.iter().map(|a| a * a).sum();
        let syy: f64 = y.iter().map(|b| b * b).sum();
        (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
    }

    #[test]
    fn exact_positive_linearity() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 3.0).collect();
        assert!((pearson(&x, &y).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_negative_linearity() {
        let x = [1.0, 2.0, 5.0];
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &y).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_direct_formula() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 2.0, 3.0, 100.0];
        let got = pearson(&x, &y).unwrap();
        assert!((got - pearson_oracle(&x, &y)).abs() < 1e-12);
    }

    #[test]
    fn symmetric_in_arguments() {
        let x = [0.3, -1.2, 4.4, 2.0, 9.5];
        let y = [7.0, 3.3, -0.5, 1.1, 2.2];
        let a = pearson(&x, &y).unwrap();
        let b = pearson(&y, &x).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn invariant_under_positive_affine_maps() {
        let x = [0.3, -1.2, 4.4, 2.0, 9.5, 3.1];
        let y = [7.0, 3.3, -0.5, 1.1, 2.2, 8.8];
        let x2: Vec<f64> = x.iter().map(|v| 3.5 * v - 11.0).collect();
        let r = pearson(&x, &y).unwrap();
        let r2 = pearson(&x2, &y).unwrap();
        assert!((r - r2).abs() < 1e-9);
    }

    #[test]
    fn constant_series_rejected() {
        let x = [1.0, 1.0, 1.0];
        let y = [1.0, 2.0, 3.0];
        assert!(matches!(pearson(&x, &y), Err(AnalysisError::ZeroVariance(_))));
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(matches!(
            pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]),
            Err(AnalysisError::LengthMismatch(3, 2))
        ));
    }

    fn shift_table(len: usize, shift: usize) -> TimeSeriesTable {
        // target is the driver shifted `shift` days later
        let mut text = String::from("date,x,y\n");
        let start = chrono::NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
        let series: Vec<f64> = (0..len).map(|i| ((i * 37) % 11) as f64 + 0.5).collect();
        for i in 0..len {
            let d = start + chrono::Duration::days(i as i64);
            let y = if i >= shift { series[i - shift] } else { series[0] };
            text.push_str(&format!("{},{},{}\n", d.format("%Y-%m-%d"), series[i], y));
        }
        parse_table(&text, "date").unwrap()
    }

    #[test]
    fn recovers_exact_shift() {
        let table = shift_table(60, 4);
        let report = lag_scan(&table, "x", "y", 10).unwrap();
        assert_eq!(report.best_lag, 4);
        assert!((report.best_r - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_max_lag_degenerates_to_pearson() {
        let table = shift_table(30, 0);
        let report = lag_scan(&table, "x", "y", 0).unwrap();
        assert_eq!(report.correlations.len(), 1);
        let x = table.column_values("x").unwrap();
        let y = table.column_values("y").unwrap();
        assert_eq!(report.correlations[0].r, pearson(&x, &y).unwrap());
    }

    #[test]
    fn lag_scan_matches_hand_shifted_pearson() {
        let table = synth_generate_with(&SynthConfig::new(5, 120)).unwrap();
        let x = table.column_values("avg_temperature").unwrap();
        let y = table.column_values("daily_cases").unwrap();
        let report = lag_scan(&table, "avg_temperature", "daily_cases", 15).unwrap();
        for c in &report.correlations {
            let overlap = x.len() - c.lag;
            let oracle = pearson(&x[..overlap], &y[c.lag..]).unwrap();
            assert!((c.r - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn best_lag_invariant_under_affine_rescale() {
        let table = shift_table(80, 6);
        let base = lag_scan(&table, "x", "y", 12).unwrap();
        // rescale the driver column and re-scan
        let x = table.column_values("x").unwrap();
        let mut text = String::from("date,x,y\n");
        let y = table.column_values("y").unwrap();
        for i in 0..x.len() {
            let d = table.date_at(i);
            text.push_str(&format!(
                "{},{},{}\n",
                d.format("%Y-%m-%d"),
                10.0 * x[i] + 3.0,
                y[i]
            ));
        }
        let rescaled = parse_table(&text, "date").unwrap();
        let report = lag_scan(&rescaled, "x", "y", 12).unwrap();
        assert_eq!(report.best_lag, base.best_lag);
    }

    #[test]
    fn overlap_shorter_than_three_rejected() {
        let table = shift_table(10, 0);
        assert!(matches!(
            lag_scan(&table, "x", "y", 8),
            Err(AnalysisError::InsufficientOverlap { .. })
        ));
    }

    #[test]
    fn known_lag_structure_recovered_from_noise_free_synthetic() {
        let table = synth_generate_with(&SynthConfig::new(0, 306).with_noise(0.0)).unwrap();
        let temp = lag_scan(&table, "avg_temperature", "daily_cases", 20).unwrap();
        assert_eq!(temp.best_lag, TEMPERATURE_LAG);
        assert!(temp.best_r < 0.0);
        let irh = lag_scan(&table, "irh", "daily_cases", 20).unwrap();
        assert_eq!(irh.best_lag, IRH_LAG);
        assert!(irh.best_r < 0.0);
    }

    #[test]
    fn summary_of_constant_series() {
        let table = parse_table("date,c\n2020-01-01,5\n2020-01-02,5\n2020-01-03,5\n", "date").unwrap();
        let s = &summarize(&table)[0];
        assert_eq!(s.min, Some(5.0));
        assert_eq!(s.max, Some(5.0));
        assert_eq!(s.mean, Some(5.0));
        assert_eq!(s.stdev, Some(0.0));
    }

    #[test]
    fn summary_of_two_points() {
        let table = parse_table("date,c\n2020-01-01,0\n2020-01-02,10\n", "date").unwrap();
        let s = &summarize(&table)[0];
        assert_eq!(s.mean, Some(5.0));
        assert_eq!(s.max, Some(10.0));
    }

    #[test]
    fn summary_mean_matches_accumulate_and_divide() {
        let table = synth_generate_with(&SynthConfig::new(9, 90)).unwrap();
        for s in summarize(&table) {
            let values = table.column_values(&s.name).unwrap();
            let mut acc = 0.0;
            for v in &values {
                acc += v;
            }
            let oracle = acc / values.len() as f64;
            assert!((s.mean.unwrap() - oracle).abs() < 1e-9);
        }
    }
}
