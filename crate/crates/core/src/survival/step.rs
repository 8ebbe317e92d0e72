use crate::error::{Error, Result};

/// Right-continuous piecewise-constant function on `[0, inf)`.
///
/// The value on `[0, breakpoints[0])` is `initial_value`; from `breakpoints[i]`
/// up to the next breakpoint it is `values[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
    initial_value: f64,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>, initial_value: f64) -> Result<Self> {
        if breakpoints.len() != values.len() {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::InvalidInput(
                "breakpoints must be finite and nonnegative".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            breakpoints,
            values,
            initial_value,
        })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            breakpoints: Vec::new(),
            values: Vec::new(),
            initial_value: value,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn initial_value(&self) -> f64 {
        self.initial_value
    }

    /// Value attached to the largest breakpoint `<= t`, else the initial value.
    pub fn eval(&self, t: f64) -> f64 {
        match self.breakpoints.partition_point(|&b| b <= t) {
            0 => self.initial_value,
            k => self.values[k - 1],
        }
    }

    /// Value just before `t` (left limit).
    pub fn eval_left(&self, t: f64) -> f64 {
        match self.breakpoints.partition_point(|&b| b < t) {
            0 => self.initial_value,
            k => self.values[k - 1],
        }
    }

    /// Jump sizes `f(b_i) - f(b_i-)` at each breakpoint.
    pub fn jumps(&self) -> Vec<f64> {
        let mut prev = self.initial_value;
        self.values
            .iter()
            .map(|&v| {
                let j = v - prev;
                prev = v;
                j
            })
            .collect()
    }
}

/// Exact `integral_a^b f(t) dt` for a step function.
pub fn restricted_integral(f: &StepFunction, a: f64, b: f64) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput("integration limits must be finite".into()));
    }
    if a > b {
        return Err(Error::InvalidInput(format!(
            "integration limits reversed: a = {a} > b = {b}"
        )));
    }
    let bps = &f.breakpoints;
    let mut k = bps.partition_point(|&x| x <= a);
    let mut level = if k == 0 { f.initial_value } else { f.values[k - 1] };
    let mut left = a;
    let mut total = 0.0;
    while k < bps.len() && bps[k] < b {
        total += level * (bps[k] - left);
        left = bps[k];
        level = f.values[k];
        k += 1;
    }
    total += level * (b - left);
    Ok(total)
}
