//! Closed-form weight functions of the RMST and log-rank statistics under
//! exponential control survival and uniform-recruitment administrative censoring.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentialSurvival {
    rate: f64,
}

impl ExponentialSurvival {
    pub fn new(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidInput(format!("hazard rate must be positive, got {rate}")));
        }
        Ok(Self { rate })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn survival(&self, t: f64) -> f64 {
        (-self.rate * t).exp()
    }
}

/// Uniform recruitment over `[0, t_r]`, everyone censored at calendar time `t_h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensoringModel {
    t_r: f64,
    t_h: f64,
}

impl CensoringModel {
    pub fn new(t_r: f64, t_h: f64) -> Result<Self> {
        if !(t_h.is_finite() && t_h > 0.0) || !(t_r.is_finite() && (0.0..=t_h).contains(&t_r)) {
            return Err(Error::InvalidInput(format!(
                "need 0 <= t_R <= t_H with t_H > 0, got t_R = {t_r}, t_H = {t_h}"
            )));
        }
        Ok(Self { t_r, t_h })
    }

    pub fn recruitment(&self) -> f64 {
        self.t_r
    }

    pub fn horizon(&self) -> f64 {
        self.t_h
    }
}

/// Probability of still being under follow-up (uncensored) at time `t`.
pub fn censoring_survival(model: &CensoringModel, t: f64) -> f64 {
    let CensoringModel { t_r, t_h } = *model;
    if t >= t_h {
        0.0
    } else if t <= t_h - t_r {
        1.0
    } else {
        (t_h - t) / t_r
    }
}

/// `w_D(t) = integral_t^tau S_0 / integral_0^tau S_0`.
pub fn weight_rmst(s0: &ExponentialSurvival, tau: f64, t: f64) -> Result<f64> {
    if !(tau > 0.0) || t < 0.0 || t > tau {
        return Err(Error::InvalidInput(format!(
            "weight_rmst needs 0 <= t <= tau, got t = {t}, tau = {tau}"
        )));
    }
    let rate = s0.rate();
    // (e^{-rt} - e^{-r tau}) / (1 - e^{-r tau}), written with expm1 for small rates
    let num = -(-rate * (tau - t)).exp_m1() * (-rate * t).exp();
    let den = -(-rate * tau).exp_m1();
    Ok(num / den)
}

/// `w_theta(t) = S_C(t) S_0(t)`.
pub fn weight_ph(s0: &ExponentialSurvival, cens: &CensoringModel, t: f64) -> f64 {
    censoring_survival(cens, t) * s0.survival(t)
}

/// A weight function sampled on a grid, raw and standardized to trapezoidal mean 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightCurve {
    pub grid: Vec<f64>,
    pub raw: Vec<f64>,
    pub values: Vec<f64>,
}

impl WeightCurve {
    fn standardize(grid: Vec<f64>, raw: Vec<f64>) -> Self {
        let mean = trapezoid_mean(&grid, &raw);
        let values = raw.iter().map(|v| v / mean).collect();
        Self { grid, raw, values }
    }

    pub fn mean(&self) -> f64 {
        trapezoid_mean(&self.grid, &self.values)
    }
}

pub fn trapezoid_mean(grid: &[f64], values: &[f64]) -> f64 {
    let span = grid[grid.len() - 1] - grid[0];
    let area: f64 = grid
        .windows(2)
        .zip(values.windows(2))
        .map(|(g, v)| 0.5 * (v[0] + v[1]) * (g[1] - g[0]))
        .sum();
    area / span
}

/// Inputs for one weight-function panel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightSetting {
    pub control: ExponentialSurvival,
    pub censoring: CensoringModel,
    pub tau: f64,
}

/// `(w_D, w_theta)` on a uniform grid over `[0, tau]`, each standardized.
pub fn standardized_curves(setting: &WeightSetting, grid_size: usize) -> Result<(WeightCurve, WeightCurve)> {
    if grid_size < 2 {
        return Err(Error::InvalidInput(format!("grid_size must be >= 2, got {grid_size}")));
    }
    let tau = setting.tau;
    let grid: Vec<f64> = (0..grid_size)
        .map(|i| tau * i as f64 / (grid_size - 1) as f64)
        .collect();
    let w_d = grid
        .iter()
        .map(|&t| weight_rmst(&setting.control, tau, t))
        .collect::<Result<Vec<_>>>()?;
    let w_theta = grid
        .iter()
        .map(|&t| weight_ph(&setting.control, &setting.censoring, t))
        .collect();
    Ok((
        WeightCurve::standardize(grid.clone(), w_d),
        WeightCurve::standardize(grid, w_theta),
    ))
}

/// Largest pointwise distance between two standardized curves on the same grid.
pub fn max_gap(a: &WeightCurve, b: &WeightCurve) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
