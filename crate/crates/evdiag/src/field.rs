//! Field containers and the discrete differential operators / norms that the
//! rest of the toolkit is built on.
//!
//! Gradients are second-order central differences with wrap-around stencils on
//! periodic axes and one-sided second-order stencils at non-periodic
//! boundaries. Integrals use the midpoint rule (cell value times cell volume),
//! which keeps the central stencils skew-adjoint on periodic grids. Tensor
//! magnitudes are Frobenius.

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Scalar (rank 0), vector (rank 1) or tensor (rank 2) field on a uniform grid.
///
/// Component storage is row-major with x fastest-varying. A rank-2 field
/// stores component (i, j) = ∂u_i/∂x_j at flat index `i*ndim + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    rank: usize,
    components: Vec<Vec<f64>>,
    time: f64,
}

impl Field {
    pub fn new(grid: Grid, rank: usize, components: Vec<Vec<f64>>, time: f64) -> Result<Self> {
        if rank > 2 {
            return Err(Error::validation(format!("rank must be 0, 1 or 2, got {rank}")));
        }
        let expect = grid.ndim().pow(rank as u32);
        if components.len() != expect {
            return Err(Error::validation(format!(
                "rank-{rank} field on a {}D grid needs {expect} components, got {}",
                grid.ndim(),
                components.len()
            )));
        }
        let n = grid.ncells();
        for (c, comp) in components.iter().enumerate() {
            if comp.len() != n {
                return Err(Error::validation(format!(
                    "component {c} has {} values, grid has {n} cells",
                    comp.len()
                )));
            }
            if !comp.iter().all(|v| v.is_finite()) {
                return Err(Error::validation(format!(
                    "component {c} contains non-finite values"
                )));
            }
        }
        Ok(Field { grid, rank, components, time })
    }

    pub fn scalar(grid: Grid, values: Vec<f64>, time: f64) -> Result<Self> {
        Self::new(grid, 0, vec![values], time)
    }

    pub fn vector(grid: Grid, components: Vec<Vec<f64>>, time: f64) -> Result<Self> {
        Self::new(grid, 1, components, time)
    }

    pub fn zeros(grid: Grid, rank: usize, time: f64) -> Self {
        let ncomp = grid.ndim().pow(rank as u32);
        let n = grid.ncells();
        Field { grid, rank, components: vec![vec![0.0; n]; ncomp], time }
    }

    /// Build a 2D field by evaluating per-component functions of (x, y).
    pub fn from_fn_2d(
        grid: Grid,
        rank: usize,
        time: f64,
        f: impl Fn(usize, f64, f64) -> f64,
    ) -> Result<Self> {
        let [nx, ny, _] = grid.shape();
        let ncomp = grid.ndim().pow(rank as u32);
        let mut components = Vec::with_capacity(ncomp);
        for c in 0..ncomp {
            let mut vals = vec![0.0; grid.ncells()];
            for j in 0..ny {
                let y = grid.coord(1, j);
                for i in 0..nx {
                    let x = grid.coord(0, i);
                    vals[grid.idx(i, j, 0)] = f(c, x, y);
                }
            }
            components.push(vals);
        }
        Self::new(grid, rank, components, time)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn ncomp(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.components[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.components[c]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    /// Pointwise Frobenius magnitude squared, one value per cell.
    pub fn magnitude_sq(&self) -> Vec<f64> {
        let n = self.grid.ncells();
        let mut out = vec![0.0; n];
        for comp in &self.components {
            for (o, v) in out.iter_mut().zip(comp.iter()) {
                *o += v * v;
            }
        }
        out
    }

    /// Max over cells of the Frobenius magnitude.
    pub fn max_magnitude(&self) -> f64 {
        self.magnitude_sq().into_iter().fold(0.0f64, f64::max).sqrt()
    }

    pub fn scale(&mut self, c: f64) {
        for comp in &mut self.components {
            for v in comp.iter_mut() {
                *v *= c;
            }
        }
    }

    /// self += c * other (same grid, same rank).
    pub fn axpy(&mut self, c: f64, other: &Field) -> Result<()> {
        check_compatible(self, other)?;
        for (a, b) in self.components.iter_mut().zip(other.components.iter()) {
            for (x, y) in a.iter_mut().zip(b.iter()) {
                *x += c * y;
            }
        }
        Ok(())
    }
}

fn check_compatible(a: &Field, b: &Field) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::validation("fields live on different grids"));
    }
    if a.rank != b.rank {
        return Err(Error::validation(format!(
            "rank mismatch: {} vs {}",
            a.rank, b.rank
        )));
    }
    Ok(())
}

/// d/dx_axis of one component, second order.
fn derivative_axis(vals: &[f64], grid: &Grid, axis: usize) -> Vec<f64> {
    let [nx, ny, nz] = grid.shape();
    let n_ax = grid.shape()[axis];
    let h = grid.spacing()[axis];
    let periodic = grid.periodic()[axis];
    let stride = match axis {
        0 => 1,
        1 => nx,
        _ => nx * ny,
    };
    let inv2h = 1.0 / (2.0 * h);
    let mut out = vec![0.0; vals.len()];
    // Iterate lines along `axis`; `base` is the flat index of the line start.
    let (outer1, outer2, s1, s2) = match axis {
        0 => (ny, nz, nx, nx * ny),
        1 => (nx, nz, 1, nx * ny),
        _ => (nx, ny, 1, nx),
    };
    for b in 0..outer2 {
        for a in 0..outer1 {
            let base = a * s1 + b * s2;
            if periodic {
                for i in 0..n_ax {
                    let ip = if i + 1 == n_ax { 0 } else { i + 1 };
                    let im = if i == 0 { n_ax - 1 } else { i - 1 };
                    out[base + i * stride] =
                        (vals[base + ip * stride] - vals[base + im * stride]) * inv2h;
                }
            } else {
                out[base] = (-3.0 * vals[base] + 4.0 * vals[base + stride]
                    - vals[base + 2 * stride])
                    * inv2h;
                for i in 1..n_ax - 1 {
                    out[base + i * stride] =
                        (vals[base + (i + 1) * stride] - vals[base + (i - 1) * stride]) * inv2h;
                }
                let e = base + (n_ax - 1) * stride;
                out[e] = (3.0 * vals[e] - 4.0 * vals[e - stride] + vals[e - 2 * stride]) * inv2h;
            }
        }
    }
    out
}

/// Discrete gradient. Rank 0 → rank 1; rank 1 → rank 2 with
/// component (i, j) = ∂u_i/∂x_j.
pub fn gradient(v: &Field) -> Result<Field> {
    if v.rank() > 1 {
        return Err(Error::validation("gradient expects a rank-0 or rank-1 field"));
    }
    let ndim = v.grid().ndim();
    let mut components = Vec::with_capacity(v.ncomp() * ndim);
    for comp in v.components() {
        for axis in 0..ndim {
            components.push(derivative_axis(comp, v.grid(), axis));
        }
    }
    Field::new(*v.grid(), v.rank() + 1, components, v.time())
}

/// (∇v + ∇vᵀ)/2; symmetric by construction.
pub fn sym_gradient(v: &Field) -> Result<Field> {
    if v.rank() != 1 {
        return Err(Error::validation("sym_gradient expects a rank-1 field"));
    }
    let g = gradient(v)?;
    let ndim = v.grid().ndim();
    let n = v.grid().ncells();
    let mut components = vec![vec![0.0; n]; ndim * ndim];
    for i in 0..ndim {
        for j in 0..=i {
            let a = g.component(i * ndim + j);
            let b = g.component(j * ndim + i);
            let mut s = vec![0.0; n];
            for c in 0..n {
                s[c] = 0.5 * (a[c] + b[c]);
            }
            if i != j {
                components[j * ndim + i] = s.clone();
            }
            components[i * ndim + j] = s;
        }
    }
    Field::new(*v.grid(), 2, components, v.time())
}

/// Trace of the discrete gradient.
pub fn divergence(v: &Field) -> Result<Field> {
    if v.rank() != 1 {
        return Err(Error::validation("divergence expects a rank-1 field"));
    }
    let ndim = v.grid().ndim();
    let n = v.grid().ncells();
    let mut out = vec![0.0; n];
    for i in 0..ndim {
        let d = derivative_axis(v.component(i), v.grid(), i);
        for c in 0..n {
            out[c] += d[c];
        }
    }
    Field::scalar(*v.grid(), out, v.time())
}

/// Midpoint quadrature of ∫_Ω |v|² dx (Frobenius magnitude for tensors).
pub fn l2_norm_sq(v: &Field) -> f64 {
    let mut acc = 0.0;
    for comp in v.components() {
        for x in comp {
            acc += x * x;
        }
    }
    acc * v.grid().cell_volume()
}

/// Midpoint quadrature of ∫_Ω a·b dx (componentwise contraction).
pub fn inner_product(a: &Field, b: &Field) -> Result<f64> {
    check_compatible(a, b)?;
    let mut acc = 0.0;
    for (ca, cb) in a.components().iter().zip(b.components().iter()) {
        for (x, y) in ca.iter().zip(cb.iter()) {
            acc += x * y;
        }
    }
    Ok(acc * a.grid().cell_volume())
}

/// One solver/ingestion time level: velocity plus optional closure fields.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub velocity: Field,
    pub nu_turb: Option<Field>,
    pub l: Option<Field>,
    pub kprime: Option<Field>,
}

impl Snapshot {
    pub fn velocity_only(velocity: Field) -> Self {
        Snapshot { velocity, nu_turb: None, l: None, kprime: None }
    }
}

/// Relative tolerance on Δt uniformity across a snapshot record.
pub const DT_UNIFORMITY_TOL: f64 = 1e-9;

/// Time-ordered snapshot record with uniform time step.
#[derive(Debug, Clone)]
pub struct SnapshotSeries {
    grid: Grid,
    times: Vec<f64>,
    snapshots: Vec<Snapshot>,
}

impl SnapshotSeries {
    pub fn new(snapshots: Vec<Snapshot>) -> Result<Self> {
        if snapshots.len() < 2 {
            return Err(Error::validation("a snapshot series needs at least 2 snapshots"));
        }
        let grid = *snapshots[0].velocity.grid();
        let times: Vec<f64> = snapshots.iter().map(|s| s.velocity.time()).collect();
        for s in &snapshots {
            if *s.velocity.grid() != grid {
                return Err(Error::validation("snapshots do not share one grid"));
            }
            if s.velocity.rank() != 1 {
                return Err(Error::validation("snapshot velocity must be a rank-1 field"));
            }
            for f in [&s.nu_turb, &s.l, &s.kprime].into_iter().flatten() {
                if *f.grid() != grid {
                    return Err(Error::validation("closure field grid mismatch"));
                }
            }
        }
        let dt = times[1] - times[0];
        if !(dt > 0.0) {
            return Err(Error::validation("snapshot times must be increasing"));
        }
        for w in times.windows(2) {
            let d = w[1] - w[0];
            if (d - dt).abs() > DT_UNIFORMITY_TOL * dt.abs().max(1.0) {
                return Err(Error::validation(format!(
                    "non-uniform snapshot spacing: {d} vs {dt}"
                )));
            }
        }
        Ok(SnapshotSeries { grid, times, snapshots })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn velocities(&self) -> impl Iterator<Item = &Field> {
        self.snapshots.iter().map(|s| &s.velocity)
    }

    /// Reduce each snapshot to one scalar (statistics are time averages of
    /// spatial reductions, computed in that order).
    pub fn reduce(&self, f: impl Fn(&Snapshot) -> Result<f64>) -> Result<Vec<f64>> {
        self.snapshots.iter().map(f).collect()
    }
}
