//! Finite-horizon and long-time averaging operators ⟨·⟩_T and ⟨·⟩_∞.
//!
//! ⟨φ⟩_T is the trapezoidal time integral over [0, T] divided by T. The
//! long-time average ⟨·⟩_∞ (a lim sup) is not computable from a finite
//! record; the surrogate used throughout is the supremum of the running
//! averages ⟨φ⟩_T over a trailing window of the record (default: the final
//! 50%), reported alongside the plain final-T average.

use crate::error::{Error, Result};

pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;

/// Scalar time series on a uniform time grid.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(Error::validation(
                "time series needs >= 2 samples and matching times/values lengths",
            ));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::validation("time series contains non-finite values"));
        }
        let dt = times[1] - times[0];
        if !(dt > 0.0) {
            return Err(Error::validation("time series must be increasing"));
        }
        for w in times.windows(2) {
            let d = w[1] - w[0];
            if (d - dt).abs() > 1e-9 * dt.abs().max(1.0) {
                return Err(Error::validation("time series spacing is not uniform"));
            }
        }
        Ok(TimeSeries { times, values })
    }

    pub fn from_dt(t0: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        let times = (0..values.len()).map(|i| t0 + i as f64 * dt).collect();
        Self::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Record length measured from the first sample.
    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    pub fn same_time_grid(&self, other: &TimeSeries) -> bool {
        self.len() == other.len()
            && self
                .times
                .iter()
                .zip(other.times.iter())
                .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0))
    }

    /// Pointwise map, same time grid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<TimeSeries> {
        TimeSeries::new(self.times.clone(), self.values.iter().map(|v| f(*v)).collect())
    }

    /// Pointwise product of two series on the same grid.
    pub fn product(&self, other: &TimeSeries) -> Result<TimeSeries> {
        if !self.same_time_grid(other) {
            return Err(Error::validation("time grids do not match"));
        }
        TimeSeries::new(
            self.times.clone(),
            self.values.iter().zip(other.values.iter()).map(|(a, b)| a * b).collect(),
        )
    }
}

/// Trapezoidal mean over the first `k` intervals, computed about the first
/// sample so constant series average to their value exactly.
fn trap_mean(values: &[f64], k: usize) -> f64 {
    debug_assert!(k >= 1 && k < values.len());
    let base = values[0];
    let mut acc = 0.0;
    for i in 1..=k {
        acc += (values[i - 1] - base) + (values[i] - base);
    }
    base + acc / (2.0 * k as f64)
}

/// Number of intervals covered by horizon `T` (relative to the record start).
/// T must be positive and within the record; if T does not align with the
/// sample grid within Δt/2, the largest sample time <= T is used.
fn intervals_for_horizon(s: &TimeSeries, t_horizon: f64) -> Result<usize> {
    if !(t_horizon > 0.0) {
        return Err(Error::range(format!("averaging horizon T = {t_horizon} must be > 0")));
    }
    let dt = s.dt();
    if t_horizon > s.horizon() + 0.5 * dt {
        return Err(Error::range(format!(
            "averaging horizon T = {t_horizon} exceeds the record length {}",
            s.horizon()
        )));
    }
    let k = (t_horizon / dt).round();
    let k = if (k * dt - t_horizon).abs() <= 0.5 * dt {
        k as usize
    } else {
        (t_horizon / dt).floor() as usize
    };
    Ok(k.clamp(1, s.len() - 1))
}

/// Finite-horizon average ⟨φ⟩_T (trapezoidal rule over [t0, t0 + T]).
pub fn avg_t(s: &TimeSeries, t_horizon: f64) -> Result<f64> {
    let k = intervals_for_horizon(s, t_horizon)?;
    Ok(trap_mean(&s.values, k))
}

/// Result of the ⟨·⟩_∞ surrogate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfAverage {
    /// Supremum of the running averages over the trailing window.
    pub lim_sup: f64,
    /// Plain average over the whole record, ⟨φ⟩_{T_final}.
    pub final_avg: f64,
}

/// Long-time average surrogate: sup of ⟨φ⟩_T over T in the final
/// `tail_fraction` of the record.
pub fn avg_inf(s: &TimeSeries, tail_fraction: f64) -> Result<InfAverage> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::range(format!(
            "tail_fraction = {tail_fraction} must be in (0, 1]"
        )));
    }
    let n = s.len() - 1; // intervals
    let start = ((1.0 - tail_fraction) * n as f64).ceil() as usize;
    let start = start.clamp(1, n);
    // Running trapezoid sums about the first sample, one pass.
    let base = s.values[0];
    let mut acc = 0.0;
    let mut sup = f64::NEG_INFINITY;
    let mut final_avg = 0.0;
    for k in 1..=n {
        acc += (s.values[k - 1] - base) + (s.values[k] - base);
        let mean = base + acc / (2.0 * k as f64);
        if k >= start {
            sup = sup.max(mean);
        }
        if k == n {
            final_avg = mean;
        }
    }
    Ok(InfAverage { lim_sup: sup, final_avg })
}

/// Both sides of the Cauchy-Schwarz inequality in time:
/// ⟨φψ⟩_T <= ⟨|φ|²⟩_T^{1/2} ⟨|ψ|²⟩_T^{1/2}.
pub fn cs_in_time(a: &TimeSeries, b: &TimeSeries, t_horizon: f64) -> Result<(f64, f64)> {
    if !a.same_time_grid(b) {
        return Err(Error::validation("cs_in_time: time grids do not match"));
    }
    let k = intervals_for_horizon(a, t_horizon)?;
    let prod: Vec<f64> = a.values.iter().zip(b.values.iter()).map(|(x, y)| x * y).collect();
    let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<f64>>();
    let lhs = trap_mean(&prod, k);
    let rhs = trap_mean(&sq(&a.values), k).max(0.0).sqrt()
        * trap_mean(&sq(&b.values), k).max(0.0).sqrt();
    Ok((lhs, rhs))
}
