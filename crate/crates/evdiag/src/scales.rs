//! Nondimensionalizing flow scales F, U, U', L, Re and the turbulent
//! intensity I(u).
//!
//! The force scale is implemented as F = ((1/|Ω|)‖f‖²)^{1/2}, the
//! volume-normalized root mean square. Long-time averages use the tail-window
//! supremum surrogate from [`crate::timestats`]; the plain final-T values are
//! carried alongside.

use crate::error::{Error, Result};
use crate::field::{self, Field, SnapshotSeries};
use crate::timestats::{self, InfAverage, TimeSeries};

/// Computed nondimensionalizing bundle. Force-dependent entries (`f_scale`,
/// `l`, `re`) are absent when no forcing is supplied.
#[derive(Debug, Clone)]
pub struct FlowScales {
    pub f_scale: Option<f64>,
    pub u: f64,
    pub u_final: f64,
    pub u_prime: Option<f64>,
    pub u_prime_final: Option<f64>,
    /// I(u) = (U'/U)².
    pub i_u: Option<f64>,
    pub l: Option<f64>,
    pub re: Option<f64>,
    pub nu: f64,
    pub h: f64,
    pub warnings: Vec<String>,
}

/// L = min of the three candidates of the force length-scale definition,
/// with the residuals of the two accompanying inequalities.
#[derive(Debug, Clone, Copy)]
pub struct LengthScale {
    pub l: f64,
    /// [|Ω|^{1/3}, F/‖∇f‖_∞, F/((1/|Ω|)‖∇f‖²)]
    pub candidates: [f64; 3],
    /// F/L - ‖∇f‖_∞ (must be >= 0 up to rounding)
    pub residual_inf: f64,
    /// F²/L² - (1/|Ω|)‖∇f‖² (must be >= 0 up to rounding)
    pub residual_l2: f64,
}

/// F = ((1/|Ω|) ‖f‖²)^{1/2}. Returns a warning (not an error) when the
/// forcing is not solenoidal within 1e-8·‖∇f‖.
pub fn compute_f(f: &Field) -> Result<(f64, Option<String>)> {
    if f.rank() != 1 {
        return Err(Error::validation("forcing must be a rank-1 field"));
    }
    let grad = field::gradient(f)?;
    let grad_norm = field::l2_norm_sq(&grad).sqrt();
    let div_norm = field::l2_norm_sq(&field::divergence(f)?).sqrt();
    let warning = if div_norm > 1e-8 * grad_norm.max(f64::MIN_POSITIVE) {
        Some(format!(
            "forcing is not solenoidal: ||div f|| = {div_norm:.3e} exceeds 1e-8 ||grad f|| = {:.3e}",
            1e-8 * grad_norm
        ))
    } else {
        None
    };
    let f_scale = (field::l2_norm_sq(f) / f.grid().volume()).sqrt();
    Ok((f_scale, warning))
}

/// L = min{ |Ω|^{1/3}, F/‖∇f‖_∞, F/((1/|Ω|)‖∇f‖²) } with ‖∇f‖_∞ the max
/// cell Frobenius magnitude of the discrete gradient.
pub fn compute_l(f: &Field) -> Result<LengthScale> {
    let (f_scale, _) = compute_f(f)?;
    if f_scale == 0.0 {
        return Err(Error::UndefinedScale(
            "L is undefined: forcing has zero RMS (no forcing)".into(),
        ));
    }
    let grad = field::gradient(f)?;
    let grad_inf = grad.max_magnitude();
    let grad_l2_mean = field::l2_norm_sq(&grad) / f.grid().volume();
    let vol_cand = f.grid().volume().cbrt();
    let inf_cand = if grad_inf > 0.0 { f_scale / grad_inf } else { f64::INFINITY };
    let l2_cand = if grad_l2_mean > 0.0 { f_scale / grad_l2_mean } else { f64::INFINITY };
    let l = vol_cand.min(inf_cand).min(l2_cand);
    Ok(LengthScale {
        l,
        candidates: [vol_cand, inf_cand, l2_cand],
        residual_inf: f_scale / l - grad_inf,
        residual_l2: (f_scale / l).powi(2) - grad_l2_mean,
    })
}

/// The volume-normalized kinetic energy series (1/|Ω|)‖u‖² of a record.
pub fn energy_series(series: &SnapshotSeries) -> Result<TimeSeries> {
    let vol = series.grid().volume();
    let vals = series.reduce(|s| Ok(field::l2_norm_sq(&s.velocity) / vol))?;
    TimeSeries::new(series.times().to_vec(), vals)
}

/// U = ⟨(1/|Ω|)‖u‖²⟩_∞^{1/2} (tail-supremum surrogate plus final-T value).
pub fn compute_u(series: &SnapshotSeries, tail_fraction: f64) -> Result<InfAverage> {
    let e = energy_series(series)?;
    let ia = timestats::avg_inf(&e, tail_fraction)?;
    Ok(InfAverage { lim_sup: ia.lim_sup.max(0.0).sqrt(), final_avg: ia.final_avg.max(0.0).sqrt() })
}

/// Pointwise time mean of the velocity over the record (trapezoidal weights).
pub fn time_mean_velocity(series: &SnapshotSeries) -> Result<Field> {
    let n = series.len();
    let mut mean = Field::zeros(*series.grid(), 1, series.times()[0]);
    let w_end = 0.5 / (n - 1) as f64;
    let w_mid = 1.0 / (n - 1) as f64;
    for (i, s) in series.snapshots().iter().enumerate() {
        let w = if i == 0 || i == n - 1 { w_end } else { w_mid };
        mean.axpy(w, &s.velocity)?;
    }
    Ok(mean)
}

/// U' and I(u) from the fluctuation u' = u - ū about the pointwise time mean.
pub fn compute_u_prime(series: &SnapshotSeries, tail_fraction: f64) -> Result<(InfAverage, f64)> {
    if series.len() < 10 {
        return Err(Error::validation(
            "fluctuation decomposition needs at least 10 snapshots",
        ));
    }
    let mean = time_mean_velocity(series)?;
    let vol = series.grid().volume();
    let vals = series.reduce(|s| {
        let mut fluct = s.velocity.clone();
        fluct.axpy(-1.0, &mean)?;
        Ok(field::l2_norm_sq(&fluct) / vol)
    })?;
    let fluct_series = TimeSeries::new(series.times().to_vec(), vals)?;
    let ia = timestats::avg_inf(&fluct_series, tail_fraction)?;
    let u_prime = InfAverage {
        lim_sup: ia.lim_sup.max(0.0).sqrt(),
        final_avg: ia.final_avg.max(0.0).sqrt(),
    };
    let u = compute_u(series, tail_fraction)?.lim_sup;
    if u == 0.0 {
        return Err(Error::UndefinedScale("I(u) undefined: zero-energy record".into()));
    }
    let intensity = (u_prime.lim_sup / u).powi(2);
    Ok((u_prime, intensity))
}

/// Assemble the full scale bundle from a record and optional forcing.
pub fn compute_scales(
    series: &SnapshotSeries,
    forcing: Option<&Field>,
    nu: f64,
    tail_fraction: f64,
) -> Result<FlowScales> {
    if !(nu > 0.0) {
        return Err(Error::range(format!("kinematic viscosity nu = {nu} must be > 0")));
    }
    let mut warnings = Vec::new();
    let u = compute_u(series, tail_fraction)?;
    let (f_scale, l, re) = match forcing {
        Some(f) => {
            let (fs, warn) = compute_f(f)?;
            if let Some(w) = warn {
                warnings.push(w);
            }
            if fs == 0.0 {
                warnings.push("forcing has zero RMS; L and Re are unavailable".into());
                (None, None, None)
            } else {
                let ls = compute_l(f)?;
                let re = ls.l * u.lim_sup / nu;
                (Some(fs), Some(ls.l), Some(re))
            }
        }
        None => (None, None, None),
    };
    let (u_prime, u_prime_final, i_u) = if series.len() >= 10 && u.lim_sup > 0.0 {
        let (up, i) = compute_u_prime(series, tail_fraction)?;
        (Some(up.lim_sup), Some(up.final_avg), Some(i))
    } else {
        warnings.push(
            "fluctuation statistics unavailable (short record or zero energy)".into(),
        );
        (None, None, None)
    };
    Ok(FlowScales {
        f_scale,
        u: u.lim_sup,
        u_final: u.final_avg,
        u_prime,
        u_prime_final,
        i_u,
        l,
        re,
        nu,
        h: series.grid().meshwidth(),
        warnings,
    })
}
