//! Irradiance forecasting with autoregressive models, harvested-energy
//! conversion, and wait-until-feasible scheduling.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ForecastError {
    #[error("series too short: need at least {needed} observations, got {got}")]
    SeriesTooShort { needed: usize, got: usize },
    #[error("regression is rank-deficient; fit failed")]
    FitFailed,
    #[error("unsupported differencing order {0}; only 0 and 1 are supported")]
    UnsupportedDifferencing(usize),
    #[error("moving-average terms are not supported")]
    MovingAverageUnsupported,
    #[error("model history too short to forecast")]
    ColdModel,
    #[error("forecast horizon cannot cover the requested energy")]
    InfeasibleWithinHorizon,
    #[error("bad trace line {line}: {reason}")]
    BadTrace { line: usize, reason: String },
}

/// Autoregressive integrated model, AR coefficients fitted by ordinary
/// least squares on the differenced series. Moving-average terms are
/// reserved in the interface but unsupported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaModel {
    pub p: usize,
    pub d: usize,
    pub phi: Vec<f64>,
    /// Most recent observations, newest last; at least p + d are kept.
    history: Vec<f64>,
}

impl ArimaModel {
    /// Model with known coefficients (e.g. imported from a config).
    pub fn from_coefficients(p: usize, d: usize, phi: Vec<f64>) -> Result<Self, ForecastError> {
        if d > 1 {
            return Err(ForecastError::UnsupportedDifferencing(d));
        }
        assert_eq!(phi.len(), p, "coefficient count must equal p");
        Ok(ArimaModel { p, d, phi, history: Vec::new() })
    }

    /// Push one observation into the history ring.
    pub fn observe(&mut self, value: f64) {
        self.history.push(value);
        let keep = self.p + self.d + 1;
        if self.history.len() > 4 * keep.max(8) {
            let start = self.history.len() - keep;
            self.history.drain(..start);
        }
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }

    /// Recursive multi-step forecast of the next `horizon` values.
    /// Outputs are clamped at zero; irradiance cannot be negative.
    pub fn forecast(&self, horizon: usize) -> Result<Vec<f64>, ForecastError> {
        if self.history.len() < self.p + self.d {
            return Err(ForecastError::ColdModel);
        }
        let mut levels = self.history.clone();
        let mut out = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            let next = if self.d == 0 {
                self.ar_predict(&levels)
            } else {
                let diffs: Vec<f64> =
                    levels.windows(2).map(|w| w[1] - w[0]).collect();
                let dnext = self.ar_predict(&diffs);
                levels[levels.len() - 1] + dnext
            };
            levels.push(next);
            out.push(next.max(0.0));
        }
        Ok(out)
    }

    /// One-step AR prediction from the tail of `series`.
    fn ar_predict(&self, series: &[f64]) -> f64 {
        let n = series.len();
        self.phi
            .iter()
            .enumerate()
            .map(|(lag, &coef)| {
                if lag < n {
                    coef * series[n - 1 - lag]
                } else {
                    0.0
                }
            })
            .sum()
    }
}

/// Least-squares AR fit on the d-times differenced series.
///
/// Needs `2p + d` observations so the regression has at least p rows.
/// A zero-variance differenced series yields all-zero coefficients (the
/// random-walk model); any other rank deficiency is a fit failure.
pub fn arima_fit(series: &[f64], p: usize, d: usize) -> Result<ArimaModel, ForecastError> {
    if d > 1 {
        return Err(ForecastError::UnsupportedDifferencing(d));
    }
    let needed = 2 * p + d;
    if series.len() < needed {
        return Err(ForecastError::SeriesTooShort { needed, got: series.len() });
    }

    let work: Vec<f64> = if d == 0 {
        series.to_vec()
    } else {
        series.windows(2).map(|w| w[1] - w[0]).collect()
    };

    let phi = if p == 0 {
        Vec::new()
    } else {
        let rows = work.len() - p;
        // Normal equations X'X phi = X'y with X rows of p lagged values.
        let mut xtx = vec![vec![0.0; p]; p];
        let mut xty = vec![0.0; p];
        for r in 0..rows {
            let y = work[r + p];
            for i in 0..p {
                let xi = work[r + p - 1 - i];
                xty[i] += xi * y;
                for j in 0..p {
                    xtx[i][j] += xi * work[r + p - 1 - j];
                }
            }
        }
        let scale = xtx.iter().flat_map(|row| row.iter()).fold(0.0f64, |a, &b| a.max(b.abs()));
        if scale == 0.0 {
            // Constant (zero after differencing) series: random walk.
            vec![0.0; p]
        } else {
            solve_linear(xtx, xty).ok_or(ForecastError::FitFailed)?
        }
    };

    let mut model = ArimaModel { p, d, phi, history: Vec::new() };
    for &v in series {
        model.observe(v);
    }
    Ok(model)
}

/// Gaussian elimination with partial pivoting; None on rank deficiency.
#[allow(clippy::needless_range_loop)]
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |acc, &x| acc.max(x.abs()))
        .max(1e-300);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot_row][col].abs() < 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut sum = b[row];
        for k in row + 1..n {
            sum -= a[row][k] * x[k];
        }
        x[row] = sum / a[row][row];
    }
    Some(x)
}

/// Solar panel and power-management parameters for converting irradiance
/// forecasts into expected harvested energy per slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanelSpec {
    pub area_m2: f64,
    pub pv_efficiency: f64,
    pub pmu_efficiency: f64,
    /// Slot duration, also the forecast sampling period.
    pub slot_s: f64,
}

impl PanelSpec {
    pub fn violations(&self, prefix: &str) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.area_m2 > 0.0) {
            out.push(format!("{prefix}.area_m2: must be > 0"));
        }
        for (name, v) in [("pv_efficiency", self.pv_efficiency), ("pmu_efficiency", self.pmu_efficiency)] {
            if !(v > 0.0 && v <= 1.0) {
                out.push(format!("{prefix}.{name}: must be in (0, 1]"));
            }
        }
        if !(self.slot_s > 0.0) {
            out.push(format!("{prefix}.slot_s: must be > 0"));
        }
        out
    }
}

/// Expected harvested energy over one slot from the irradiance forecast at
/// the slot's start and end (trapezoid):
///
/// ```text
/// E_H = (I0 + I1)/2 * T * A_pv * xi_pv * xi_pmu
/// ```
pub fn irradiance_to_energy(i0_w_m2: f64, i1_w_m2: f64, panel: &PanelSpec) -> f64 {
    0.5 * (i0_w_m2 + i1_w_m2)
        * panel.slot_s
        * panel.area_m2
        * panel.pv_efficiency
        * panel.pmu_efficiency
}

/// Smallest N such that the first N forecast energies cover `e_task`;
/// 0 when the task needs no energy.
pub fn waiting_slots(e_task: f64, forecast_energies: &[f64]) -> Result<usize, ForecastError> {
    if e_task <= 0.0 {
        return Ok(0);
    }
    let mut acc = 0.0;
    for (i, &e) in forecast_energies.iter().enumerate() {
        acc += e;
        if acc >= e_task {
            return Ok(i + 1);
        }
    }
    Err(ForecastError::InfeasibleWithinHorizon)
}

/// Parse a two-column irradiance trace: `timestamp_s,irradiance_wm2` per
/// line, `#` comments and a non-numeric header line allowed.
pub fn parse_irradiance_csv(text: &str) -> Result<Vec<(f64, f64)>, ForecastError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let a = parts.next().unwrap_or("").trim();
        let b = parts.next().unwrap_or("").trim();
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(t), Ok(irr)) => out.push((t, irr)),
            _ if idx == 0 => continue, // header row
            _ => {
                return Err(ForecastError::BadTrace {
                    line: idx + 1,
                    reason: format!("expected two numeric columns, got {line:?}"),
                })
            }
        }
    }
    Ok(out)
}
