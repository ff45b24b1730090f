//! Log-log slope fits over sweep output.
//!
//! For each `n` the mean `total_bits` over seeds is divided by `log2(n)^k`
//! and the slope of `log2` of that against `log2 n` is estimated by ordinary
//! least squares. `k` soaks up polylogarithmic factors the asymptotic bounds
//! leave unspecified.

use std::collections::BTreeMap;
use std::io::Read;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::sweep::{SweepRow, CSV_COLUMNS};

#[derive(Debug, thiserror::Error)]
pub enum FitError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("rows from several protocols ({0}); select one with --protocol")]
    MixedProtocols(String),
    #[error("no rows for protocol `{0}`")]
    NoRows(String),
    #[error("need at least 3 distinct n, got {0}")]
    TooFewPoints(usize),
    #[error("at n = {n} rows disagree on {field}")]
    MixedGrid { n: usize, field: &'static str },
    #[error("non-positive mean communication at n = {0}")]
    NonPositive(usize),
}

#[derive(Clone, Debug)]
pub struct FitOptions {
    pub polylog_k: f64,
    pub confidence: f64,
    pub protocol: Option<String>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            polylog_k: 1.0,
            confidence: 0.95,
            protocol: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitPoint {
    pub n: usize,
    pub h: usize,
    pub runs: usize,
    pub mean_total_bits: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub protocol: String,
    pub polylog_k: f64,
    /// Slope after dividing by `log2(n)^k`.
    pub slope: f64,
    pub intercept: f64,
    pub confidence: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Slope of the uncorrected means.
    pub raw_slope: f64,
    /// Corrected-fit residuals, one per point, in `n` order.
    pub residuals: Vec<f64>,
    pub r_squared: f64,
    pub points: Vec<FitPoint>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ols {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; zero with two points.
    pub slope_se: f64,
    pub residuals: Vec<f64>,
    pub r_squared: f64,
}

/// Least squares line through `(xs, ys)`. Needs two distinct `x`.
pub fn ols(xs: &[f64], ys: &[f64]) -> Ols {
    assert_eq!(xs.len(), ys.len());
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| y - (intercept + slope * x)).collect();
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let slope_se = if xs.len() > 2 {
        (sse / (m - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ols {
        slope,
        intercept,
        slope_se,
        residuals,
        r_squared,
    }
}

/// Reads a sweep CSV, insisting on the exact documented header.
pub fn read_rows<R: Read>(input: R) -> Result<Vec<SweepRow>, FitError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = rdr.headers()?.clone();
    let got: Vec<&str> = header.iter().collect();
    if got != CSV_COLUMNS {
        return Err(FitError::Schema(format!(
            "header is `{}`, expected `{}`",
            got.join(","),
            CSV_COLUMNS.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize().enumerate() {
        let row: SweepRow = rec.map_err(|e| FitError::Schema(format!("data row {}: {e}", i + 1)))?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn fit_rows(rows: &[SweepRow], opts: &FitOptions) -> Result<FitResult, FitError> {
    let protocol = match &opts.protocol {
        Some(p) => p.clone(),
        None => {
            let mut names: Vec<&str> = rows.iter().map(|r| r.protocol.as_str()).collect();
            names.sort_unstable();
            names.dedup();
            match names.as_slice() {
                [] => return Err(FitError::NoRows("<any>".into())),
                [one] => one.to_string(),
                many => return Err(FitError::MixedProtocols(many.join(", "))),
            }
        }
    };

    let mut by_n: BTreeMap<usize, Vec<&SweepRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.protocol == protocol) {
        by_n.entry(r.n).or_default().push(r);
    }
    if by_n.is_empty() {
        return Err(FitError::NoRows(protocol));
    }
    if by_n.len() < 3 {
        return Err(FitError::TooFewPoints(by_n.len()));
    }

    let mut points = Vec::with_capacity(by_n.len());
    for (&n, group) in &by_n {
        let first = group[0];
        let same = |field: &'static str, ok: bool| if ok { Ok(()) } else { Err(FitError::MixedGrid { n, field }) };
        same("h", group.iter().all(|r| r.h == first.h))?;
        same("alpha", group.iter().all(|r| r.alpha == first.alpha))?;
        same("lambda", group.iter().all(|r| r.lambda == first.lambda))?;
        same("D", group.iter().all(|r| r.depth == first.depth))?;
        let mean = group.iter().map(|r| r.total_bits as f64).sum::<f64>() / group.len() as f64;
        if !(mean > 0.0) {
            return Err(FitError::NonPositive(n));
        }
        points.push(FitPoint {
            n,
            h: first.h,
            runs: group.len(),
            mean_total_bits: mean,
        });
    }

    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).log2()).collect();
    let raw: Vec<f64> = points.iter().map(|p| p.mean_total_bits.log2()).collect();
    let corrected: Vec<f64> = points
        .iter()
        .zip(&xs)
        .map(|(p, lg)| p.mean_total_bits.log2() - opts.polylog_k * lg.log2())
        .collect();
    let fit = ols(&xs, &corrected);
    let raw_fit = ols(&xs, &raw);

    let df = (points.len() - 2) as f64;
    let t = StudentsT::new(0.0, 1.0, df)
        .expect("df is positive")
        .inverse_cdf(1.0 - (1.0 - opts.confidence) / 2.0);
    Ok(FitResult {
        protocol,
        polylog_k: opts.polylog_k,
        slope: fit.slope,
        intercept: fit.intercept,
        confidence: opts.confidence,
        ci_low: fit.slope - t * fit.slope_se,
        ci_high: fit.slope + t * fit.slope_se,
        raw_slope: raw_fit.slope,
        residuals: fit.residuals,
        r_squared: fit.r_squared,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, bits: u64) -> SweepRow {
        SweepRow {
            protocol: "p".into(),
            n,
            h: n / 2,
            alpha: 1.0,
            lambda: 4,
            depth: 8,
            seed: 0,
            total_bits: bits,
            max_locality: 1,
            aborted_honest_count: 0,
            consistency_ok: true,
            wallclock_ms: 0,
        }
    }

    #[test]
    fn exact_power_law() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let f = ols(&xs, &ys);
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
        assert!(f.slope_se.abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn polylog_correction_recovers_exponent() {
        // bits = n^2 * log2 n exactly.
        let rows: Vec<SweepRow> = [64usize, 128, 256, 512]
            .iter()
            .map(|&n| row(n, (n * n) as u64 * (n as f64).log2() as u64))
            .collect();
        let f = fit_rows(&rows, &FitOptions::default()).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-9, "{}", f.slope);
        assert!(f.raw_slope > 2.1);
        assert!(f.ci_low <= f.slope && f.slope <= f.ci_high);
    }

    #[test]
    fn two_points_is_too_few() {
        let rows = vec![row(64, 10), row(128, 20)];
        assert!(matches!(fit_rows(&rows, &FitOptions::default()), Err(FitError::TooFewPoints(2))));
    }

    #[test]
    fn interval_uses_student_t() {
        // Residuals +e, -2e, +e around a slope-1 line: se is known in closed form.
        let e = 0.1;
        let xs = [0.0, 1.0, 2.0];
        let ys = [e, 1.0 - 2.0 * e, 2.0 + e];
        let f = ols(&xs, &ys);
        assert!((f.slope - 1.0).abs() < 1e-12);
        let se = (6.0 * e * e / 1.0 / 2.0f64).sqrt();
        assert!((f.slope_se - se).abs() < 1e-12);
    }
}
