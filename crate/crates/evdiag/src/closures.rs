//! Eddy-viscosity parameterizations and their aggregate statistics.
//!
//! Every closure factors (where possible) through the Kolmogorov-Prandtl
//! assembly ν_turb = √2·μ·l·√k'. Built-ins are a constant eddy viscosity and
//! Smagorinsky; externally produced (l, k') or ν_turb fields ride in on the
//! snapshots (the data-driven ingestion path). When ν_turb is prescribed
//! directly without the (l, k') factoring, the factored statistics are
//! reported unavailable.

use crate::error::{Error, Result};
use crate::field::{self, Field, Snapshot, SnapshotSeries};
use crate::scales::FlowScales;
use crate::timestats::{self, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosureKind {
    /// ν_turb = nu_t everywhere (nu_t = 0 recovers the plain NSE).
    ConstantNu { nu_t: f64 },
    /// l = Cs·h, k' = ½ l² |∇ˢu|², so ν_turb = √2 μ l √k' = μ (Cs h)² |∇ˢu|.
    Smagorinsky { cs: f64 },
    /// Per-snapshot (l, k') or ν_turb fields supplied with the input data.
    PrescribedFields,
}

/// A parameterization producing (μ, l, k') per snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosureSpec {
    pub kind: ClosureKind,
    /// Calibration parameter μ >= 0.
    pub mu: f64,
}

impl ClosureSpec {
    pub fn constant_nu(nu_t: f64) -> Result<Self> {
        if !(nu_t >= 0.0) {
            return Err(Error::ClosureInput(format!("nu_t = {nu_t} must be >= 0")));
        }
        Ok(ClosureSpec { kind: ClosureKind::ConstantNu { nu_t }, mu: 1.0 })
    }

    pub fn smagorinsky(cs: f64) -> Result<Self> {
        Self::smagorinsky_with_mu(cs, 1.0)
    }

    pub fn smagorinsky_with_mu(cs: f64, mu: f64) -> Result<Self> {
        if !(cs > 0.0) {
            return Err(Error::ClosureInput(format!("Cs = {cs} must be > 0")));
        }
        if !(mu >= 0.0) {
            return Err(Error::ClosureInput(format!("mu = {mu} must be >= 0")));
        }
        Ok(ClosureSpec { kind: ClosureKind::Smagorinsky { cs }, mu })
    }

    pub fn prescribed(mu: f64) -> Result<Self> {
        if !(mu >= 0.0) {
            return Err(Error::ClosureInput(format!("mu = {mu} must be >= 0")));
        }
        Ok(ClosureSpec { kind: ClosureKind::PrescribedFields, mu })
    }

    /// The zero closure (no model).
    pub fn none() -> Self {
        ClosureSpec { kind: ClosureKind::ConstantNu { nu_t: 0.0 }, mu: 1.0 }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, ClosureKind::ConstantNu { nu_t } if nu_t == 0.0)
    }
}

/// Kolmogorov-Prandtl assembly: pointwise √2·μ·l·√k'.
pub fn nu_turb_field(l: &Field, kprime: &Field, mu: f64) -> Result<Field> {
    if l.rank() != 0 || kprime.rank() != 0 {
        return Err(Error::validation("l and k' must be rank-0 fields"));
    }
    if l.grid() != kprime.grid() {
        return Err(Error::validation("l and k' grids do not match"));
    }
    if !(mu >= 0.0) {
        return Err(Error::ClosureInput(format!("mu = {mu} must be >= 0")));
    }
    let lv = l.component(0);
    let kv = kprime.component(0);
    if let Some(v) = lv.iter().find(|v| **v < 0.0) {
        return Err(Error::ClosureInput(format!("negative mixing length l = {v}")));
    }
    if let Some(v) = kv.iter().find(|v| **v < 0.0) {
        return Err(Error::ClosureInput(format!("negative turbulent kinetic energy k' = {v}")));
    }
    let root2 = std::f64::consts::SQRT_2;
    let vals = lv
        .iter()
        .zip(kv.iter())
        .map(|(a, b)| root2 * mu * a * b.sqrt())
        .collect();
    Field::scalar(*l.grid(), vals, l.time())
}

/// Smagorinsky factoring: l = Cs·h, k' = ½ l² |∇ˢu|².
pub fn smagorinsky_fields(u: &Field, cs: f64) -> Result<(Field, Field)> {
    if !(cs > 0.0) {
        return Err(Error::ClosureInput(format!("Cs = {cs} must be > 0")));
    }
    let grid = *u.grid();
    let l_val = cs * grid.meshwidth();
    let s = field::sym_gradient(u)?;
    let kvals: Vec<f64> = s.magnitude_sq().into_iter().map(|m2| 0.5 * l_val * l_val * m2).collect();
    let l = Field::scalar(grid, vec![l_val; grid.ncells()], u.time())?;
    let kprime = Field::scalar(grid, kvals, u.time())?;
    Ok((l, kprime))
}

/// ν_turb with, when the parameterization factors, its (l, k') split.
#[derive(Debug, Clone)]
pub struct ResolvedClosure {
    pub nu_turb: Field,
    pub factoring: Option<(Field, Field)>,
}

/// Evaluate a closure on one snapshot.
pub fn resolve(spec: &ClosureSpec, snap: &Snapshot) -> Result<ResolvedClosure> {
    match spec.kind {
        ClosureKind::ConstantNu { nu_t } => {
            let grid = *snap.velocity.grid();
            let nu_turb =
                Field::scalar(grid, vec![nu_t; grid.ncells()], snap.velocity.time())?;
            Ok(ResolvedClosure { nu_turb, factoring: None })
        }
        ClosureKind::Smagorinsky { cs } => {
            let (l, kprime) = smagorinsky_fields(&snap.velocity, cs)?;
            let nu_turb = nu_turb_field(&l, &kprime, spec.mu)?;
            Ok(ResolvedClosure { nu_turb, factoring: Some((l, kprime)) })
        }
        ClosureKind::PrescribedFields => match (&snap.l, &snap.kprime) {
            (Some(l), Some(kprime)) => {
                let nu_turb = nu_turb_field(l, kprime, spec.mu)?;
                Ok(ResolvedClosure {
                    nu_turb,
                    factoring: Some((l.clone(), kprime.clone())),
                })
            }
            _ => match &snap.nu_turb {
                Some(nu_turb) => {
                    if let Some(v) = nu_turb.component(0).iter().find(|v| **v < 0.0) {
                        return Err(Error::ClosureInput(format!(
                            "negative prescribed eddy viscosity {v}"
                        )));
                    }
                    Ok(ResolvedClosure { nu_turb: nu_turb.clone(), factoring: None })
                }
                None => Err(Error::ClosureInput(
                    "prescribed_fields closure needs per-snapshot (l, k') or nu_turb".into(),
                )),
            },
        },
    }
}

/// Closure-level statistics: avg(ν_turb), avg(l), U'_model, I_model and the
/// monitoring ratio avg(ν_turb)/(L·U).
#[derive(Debug, Clone)]
pub struct ClosureStats {
    pub mu: f64,
    pub avg_nu_turb: f64,
    pub avg_nu_turb_final: f64,
    pub avg_l: Option<f64>,
    pub u_prime_model: Option<f64>,
    pub i_model: Option<f64>,
    pub ratio_nu: f64,
}

/// Aggregate closure statistics over a record. Needs L and U from the scales.
pub fn closure_stats(
    series: &SnapshotSeries,
    spec: &ClosureSpec,
    scales: &FlowScales,
    tail_fraction: f64,
) -> Result<ClosureStats> {
    let l_scale = scales.l.ok_or_else(|| {
        Error::UndefinedScale("closure statistics need the force length scale L".into())
    })?;
    if !(scales.u > 0.0) || !(l_scale > 0.0) {
        return Err(Error::UndefinedScale(
            "closure statistics need U > 0 and L > 0".into(),
        ));
    }
    let vol = series.grid().volume();
    let cell = series.grid().cell_volume();
    let mut nu_means = Vec::with_capacity(series.len());
    let mut l_sq_means = Vec::with_capacity(series.len());
    let mut k_means = Vec::with_capacity(series.len());
    let mut factored = true;
    for snap in series.snapshots() {
        let resolved = resolve(spec, snap)?;
        let nu_abs: f64 =
            resolved.nu_turb.component(0).iter().map(|v| v.abs()).sum::<f64>() * cell / vol;
        nu_means.push(nu_abs);
        match resolved.factoring {
            Some((l, kprime)) => {
                l_sq_means.push(field::l2_norm_sq(&l) / vol);
                let twice_k: f64 =
                    kprime.component(0).iter().map(|v| 2.0 * v).sum::<f64>() * cell / vol;
                k_means.push(twice_k);
            }
            None => factored = false,
        }
    }
    let times = series.times().to_vec();
    let avg_nu = timestats::avg_inf(&TimeSeries::new(times.clone(), nu_means)?, tail_fraction)?;
    let (avg_l, u_prime_model, i_model) = if factored {
        let al = timestats::avg_inf(&TimeSeries::new(times.clone(), l_sq_means)?, tail_fraction)?
            .lim_sup
            .max(0.0)
            .sqrt();
        let upm = timestats::avg_inf(&TimeSeries::new(times, k_means)?, tail_fraction)?
            .lim_sup
            .max(0.0)
            .sqrt();
        (Some(al), Some(upm), Some((upm / scales.u).powi(2)))
    } else {
        (None, None, None)
    };
    Ok(ClosureStats {
        mu: spec.mu,
        avg_nu_turb: avg_nu.lim_sup,
        avg_nu_turb_final: avg_nu.final_avg,
        avg_l,
        u_prime_model,
        i_model,
        ratio_nu: avg_nu.lim_sup / (l_scale * scales.u),
    })
}
