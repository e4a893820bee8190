//! A desk-scale 2D incompressible flow solver with an eddy-viscosity term on
//! the periodic box [0,2π]², used to generate verifiable snapshot records.
//!
//! Pseudo-spectral in space: the nonlinear term and the variable-coefficient
//! stress ∇·(ν_turb ∇ˢu) are assembled in physical space from spectrally exact
//! gradients and projected onto divergence-free modes per wavenumber. The
//! constant molecular diffusion is integrated exactly by an integrating
//! factor; everything else is advanced with Williamson's low-storage
//! third-order Runge-Kutta scheme.

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::closures::{self, ClosureKind, ClosureSpec};
use crate::error::{Error, Result};
use crate::field::{Field, Snapshot, SnapshotSeries};
use crate::grid::Grid;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Body force options. Both are divergence-free by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Forcing {
    None,
    /// f = (χ sin(k_f y), 0).
    Kolmogorov { chi: f64, k_f: u32 },
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Grid is N×N on [0,2π]²; power of two, N >= 16.
    pub n: usize,
    pub nu: f64,
    pub closure: ClosureSpec,
    pub forcing: Forcing,
    pub t_end: f64,
    /// Advective CFL number in (0,1).
    pub cfl: f64,
    /// 2/3-rule dealiasing of the state and the nonlinear term.
    pub dealias: bool,
    /// Outer steps between emitted snapshots.
    pub snapshot_every: usize,
    /// Seed for the initial-data perturbation.
    pub seed: u64,
    /// Max-amplitude of the seeded solenoidal perturbation added to the
    /// initial vortex (0 disables it; forced runs use it to break symmetry).
    pub perturbation: f64,
}

impl SolverConfig {
    pub fn new(n: usize, nu: f64, t_end: f64) -> Result<Self> {
        let cfg = SolverConfig {
            n,
            nu,
            closure: ClosureSpec::none(),
            forcing: Forcing::None,
            t_end,
            cfl: 0.5,
            dealias: true,
            snapshot_every: 1,
            seed: 0,
            perturbation: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 16 || !self.n.is_power_of_two() {
            return Err(Error::validation(format!(
                "grid size N = {} must be a power of two >= 16",
                self.n
            )));
        }
        if !(self.nu > 0.0) {
            return Err(Error::range(format!("nu = {} must be > 0", self.nu)));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::range(format!("t_end = {} must be > 0", self.t_end)));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::range(format!("cfl = {} must be in (0, 1)", self.cfl)));
        }
        if self.snapshot_every == 0 {
            return Err(Error::validation("snapshot_every must be >= 1"));
        }
        if matches!(self.closure.kind, ClosureKind::PrescribedFields) {
            return Err(Error::validation(
                "the solver evaluates built-in closures only (constant_nu, smagorinsky)",
            ));
        }
        if let Forcing::Kolmogorov { chi, k_f } = self.forcing {
            if !chi.is_finite() || k_f == 0 || k_f as usize >= self.n / 2 {
                return Err(Error::validation(format!(
                    "kolmogorov forcing needs finite chi and 0 < k_f < N/2, got chi = {chi}, \
                     k_f = {k_f}"
                )));
            }
        }
        Ok(())
    }
}

type Cvec = Vec<Complex<f64>>;

/// Planned transforms and wavenumber tables for an N×N periodic box.
struct Spectral {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex<f64>>,
    /// Signed integer wavenumbers by index.
    k: Vec<f64>,
    /// 2/3-rule survivor mask.
    keep: Vec<bool>,
}

impl Spectral {
    fn new(n: usize) -> Spectral {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        let k: Vec<f64> = (0..n)
            .map(|i| if i <= n / 2 { i as f64 } else { i as f64 - n as f64 })
            .collect();
        let kmax = (n as f64) / 3.0;
        let keep: Vec<bool> = (0..n * n)
            .map(|idx| {
                let kx = k[idx % n].abs();
                let ky = k[idx / n].abs();
                kx <= kmax && ky <= kmax
            })
            .collect();
        Spectral { n, fwd, inv, scratch: vec![Complex::ZERO; scratch_len], k, keep }
    }

    fn transform_rows(&mut self, a: &mut [Complex<f64>], forward: bool) {
        let plan = if forward { &self.fwd } else { &self.inv };
        for row in a.chunks_mut(self.n) {
            plan.process_with_scratch(row, &mut self.scratch);
        }
    }

    fn transpose(&self, a: &mut [Complex<f64>], tmp: &mut Cvec) {
        let n = self.n;
        tmp.clear();
        tmp.extend_from_slice(a);
        for j in 0..n {
            for i in 0..n {
                a[i * n + j] = tmp[j * n + i];
            }
        }
    }

    /// In-place 2D FFT (unnormalized forward; inverse carries the 1/N²).
    fn fft2(&mut self, a: &mut Cvec, tmp: &mut Cvec) {
        self.transform_rows(a, true);
        self.transpose(a, tmp);
        self.transform_rows(a, true);
        self.transpose(a, tmp);
    }

    fn ifft2(&mut self, a: &mut Cvec, tmp: &mut Cvec) {
        self.transform_rows(a, false);
        self.transpose(a, tmp);
        self.transform_rows(a, false);
        self.transpose(a, tmp);
        let scale = 1.0 / (self.n * self.n) as f64;
        for v in a.iter_mut() {
            *v *= scale;
        }
    }

    /// Two Hermitian-symmetric spectra in one inverse transform: the packed
    /// inverse carries a's samples in the real parts and b's in the imaginary.
    fn ifft2_pair_into(
        &mut self,
        a: &Cvec,
        b: &Cvec,
        pack: &mut Cvec,
        tmp: &mut Cvec,
        out_a: &mut [f64],
        out_b: &mut [f64],
    ) {
        let i1 = Complex::new(0.0, 1.0);
        pack.clear();
        pack.extend(a.iter().zip(b.iter()).map(|(x, y)| x + i1 * y));
        self.ifft2(pack, tmp);
        for (i, c) in pack.iter().enumerate() {
            out_a[i] = c.re;
            out_b[i] = c.im;
        }
    }

    fn ifft2_re_into(&mut self, a: &Cvec, pack: &mut Cvec, tmp: &mut Cvec, out: &mut [f64]) {
        pack.clear();
        pack.extend_from_slice(a);
        self.ifft2(pack, tmp);
        for (i, c) in pack.iter().enumerate() {
            out[i] = c.re;
        }
    }

    /// Two real fields in one forward transform, split back out through the
    /// Hermitian symmetry of each half.
    fn fft2_pair_into(
        &mut self,
        x: &[f64],
        y: &[f64],
        pack: &mut Cvec,
        tmp: &mut Cvec,
        fa: &mut Cvec,
        fb: &mut Cvec,
    ) {
        let n = self.n;
        pack.clear();
        pack.extend(x.iter().zip(y.iter()).map(|(a, b)| Complex::new(*a, *b)));
        self.fft2(pack, tmp);
        for j in 0..n {
            let jm = (n - j) % n;
            for i in 0..n {
                let im = (n - i) % n;
                let pk = pack[j * n + i];
                let pmk = pack[jm * n + im].conj();
                fa[j * n + i] = 0.5 * (pk + pmk);
                fb[j * n + i] = Complex::new(0.0, -0.5) * (pk - pmk);
            }
        }
    }

    /// Spectral derivative along x (axis 0) or y (axis 1).
    fn deriv_into(&self, a: &Cvec, axis: usize, out: &mut Cvec) {
        let n = self.n;
        for j in 0..n {
            for i in 0..n {
                let kk = if axis == 0 { self.k[i] } else { self.k[j] };
                out[j * n + i] = Complex::new(0.0, kk) * a[j * n + i];
            }
        }
    }

    fn deriv(&self, a: &Cvec, axis: usize) -> Cvec {
        let mut out = vec![Complex::ZERO; self.n * self.n];
        self.deriv_into(a, axis, &mut out);
        out
    }

    /// Remove the discrete divergence: û ← û − k(k·û)/|k|² per mode.
    fn project(&self, ux: &mut Cvec, uy: &mut Cvec) {
        let n = self.n;
        for j in 0..n {
            let ky = self.k[j];
            for i in 0..n {
                let kx = self.k[i];
                let k2 = kx * kx + ky * ky;
                if k2 == 0.0 {
                    continue;
                }
                let idx = j * n + i;
                let d = (kx * ux[idx] + ky * uy[idx]) / k2;
                ux[idx] -= kx * d;
                uy[idx] -= ky * d;
            }
        }
    }

    fn dealias(&self, a: &mut Cvec) {
        for (v, keep) in a.iter_mut().zip(self.keep.iter()) {
            if !keep {
                *v = Complex::ZERO;
            }
        }
    }

    /// Max spectral divergence magnitude, for the projection invariant.
    fn divergence_inf(&self, ux: &Cvec, uy: &Cvec) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let idx = j * n + i;
                let d = self.k[i] * ux[idx] + self.k[j] * uy[idx];
                worst = worst.max(d.norm());
            }
        }
        worst
    }
}

/// Williamson's three-stage low-storage coefficients.
const RK_A: [f64; 3] = [0.0, -5.0 / 9.0, -153.0 / 128.0];
const RK_B: [f64; 3] = [1.0 / 3.0, 15.0 / 16.0, 8.0 / 15.0];
const RK_C: [f64; 4] = [0.0, 1.0 / 3.0, 3.0 / 4.0, 1.0];

/// Stepping statistics accumulated over a run.
#[derive(Debug, Clone, Default)]
pub struct RunStats {
    pub outer_steps: usize,
    /// Outer steps that needed internal sub-stepping to respect the CFL or
    /// the explicit-diffusion limit, with the largest subdivision used.
    pub substepped_steps: usize,
    pub max_substeps: usize,
    pub log: Vec<String>,
}

pub struct Solver {
    cfg: SolverConfig,
    grid: Grid,
    sp: Spectral,
    uh: [Cvec; 2],
    fh: [Cvec; 2],
    f_phys: Option<Field>,
    t: f64,
    step_index: usize,
    /// max|u| and max ν_turb observed at the latest RHS evaluation; used to
    /// pick the sub-step count for the next outer step.
    last_max_u: f64,
    last_max_nut: f64,
    /// Cached integrating-factor tables for the current sub-step size.
    exp_dt: f64,
    exp_tables: [Vec<f64>; 3],
    tmp: Cvec,
    scratch: Scratch,
}

struct StageMax {
    max_u: f64,
    max_nut: f64,
}

/// Persistent work buffers for the tendency evaluation. Reusing them keeps
/// the inner loop allocation-free, which matters at resolutions where fresh
/// buffers would be serviced by mmap on every call.
struct Scratch {
    pack: Cvec,
    tmp: Cvec,
    da: Cvec,
    db: Cvec,
    u: Vec<f64>,
    v: Vec<f64>,
    ux: Vec<f64>,
    uy: Vec<f64>,
    vx: Vec<f64>,
    gx_p: Vec<f64>,
    gy_p: Vec<f64>,
    txx_p: Vec<f64>,
    txy_p: Vec<f64>,
    g: [Cvec; 2],
    q: [Cvec; 2],
}

impl Scratch {
    fn new(n: usize) -> Scratch {
        let n2 = n * n;
        let c = || vec![Complex::ZERO; n2];
        let r = || vec![0.0f64; n2];
        Scratch {
            pack: c(),
            tmp: c(),
            da: c(),
            db: c(),
            u: r(),
            v: r(),
            ux: r(),
            uy: r(),
            vx: r(),
            gx_p: r(),
            gy_p: r(),
            txx_p: r(),
            txy_p: r(),
            g: [c(), c()],
            q: [c(), c()],
        }
    }
}

impl Solver {
    pub fn new(cfg: SolverConfig) -> Result<Solver> {
        cfg.validate()?;
        let n = cfg.n;
        let grid = Grid::periodic_square(n, 2.0 * std::f64::consts::PI)?;
        let mut sp = Spectral::new(n);
        let mut tmp = vec![Complex::ZERO; n * n];

        let u0 = initial_velocity(&cfg, grid)?;
        let mut uh = [to_complex(u0.component(0)), to_complex(u0.component(1))];
        sp.fft2(&mut uh[0], &mut tmp);
        sp.fft2(&mut uh[1], &mut tmp);
        let (ua, ub) = uh.split_at_mut(1);
        sp.project(&mut ua[0], &mut ub[0]);
        if cfg.dealias {
            sp.dealias(&mut uh[0]);
            sp.dealias(&mut uh[1]);
        }

        let (fh, f_phys) = match cfg.forcing {
            Forcing::None => ([vec![Complex::ZERO; n * n], vec![Complex::ZERO; n * n]], None),
            Forcing::Kolmogorov { chi, k_f } => {
                let f = Field::from_fn_2d(grid, 1, 0.0, |c, _, y| {
                    if c == 0 {
                        chi * (k_f as f64 * y).sin()
                    } else {
                        0.0
                    }
                })?;
                let mut fx = to_complex(f.component(0));
                let mut fy = to_complex(f.component(1));
                sp.fft2(&mut fx, &mut tmp);
                sp.fft2(&mut fy, &mut tmp);
                ([fx, fy], Some(f))
            }
        };

        let last_max_u = u0.max_magnitude();
        Ok(Solver {
            cfg,
            grid,
            sp,
            uh,
            fh,
            f_phys,
            t: 0.0,
            step_index: 0,
            last_max_u,
            last_max_nut: 0.0,
            exp_dt: f64::NAN,
            exp_tables: [Vec::new(), Vec::new(), Vec::new()],
            tmp,
            scratch: Scratch::new(n),
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn forcing_field(&self) -> Option<&Field> {
        self.f_phys.as_ref()
    }

    /// Spectral divergence of the current state (projection invariant).
    pub fn divergence_inf(&self) -> f64 {
        self.sp.divergence_inf(&self.uh[0], &self.uh[1])
    }

    fn ensure_exp_tables(&mut self, dt: f64) {
        if self.exp_dt == dt {
            return;
        }
        let n = self.cfg.n;
        let nu = self.cfg.nu;
        for (s, table) in self.exp_tables.iter_mut().enumerate() {
            let d = (RK_C[s + 1] - RK_C[s]) * dt;
            table.clear();
            table.reserve(n * n);
            for j in 0..n {
                let ky = self.sp.k[j];
                for i in 0..n {
                    let kx = self.sp.k[i];
                    table.push((-nu * (kx * kx + ky * ky) * d).exp());
                }
            }
        }
        self.exp_dt = dt;
    }

    /// Projected, dealiased tendency: nonlinearity + eddy stress + forcing.
    /// The molecular term is handled by the integrating factor, not here.
    /// Writes into scr.g; all work buffers persist across calls so the inner
    /// loop performs no large allocations.
    fn rhs(
        sp: &mut Spectral,
        cfg: &SolverConfig,
        meshwidth: f64,
        uh: &[Cvec; 2],
        fh: &[Cvec; 2],
        scr: &mut Scratch,
    ) -> StageMax {
        let n = sp.n;
        let (pack, tmp) = (&mut scr.pack, &mut scr.tmp);
        sp.ifft2_pair_into(&uh[0], &uh[1], pack, tmp, &mut scr.u, &mut scr.v);
        sp.deriv_into(&uh[0], 0, &mut scr.da);
        sp.deriv_into(&uh[0], 1, &mut scr.db);
        sp.ifft2_pair_into(&scr.da, &scr.db, pack, tmp, &mut scr.ux, &mut scr.uy);
        sp.deriv_into(&uh[1], 0, &mut scr.da);
        sp.ifft2_re_into(&scr.da, pack, tmp, &mut scr.vx);
        // incompressibility: ∂y v = −∂x u pointwise

        let mut max_u2 = 0.0f64;
        let mut max_nut = 0.0f64;
        let (cs2h2, nu_const) = match cfg.closure.kind {
            ClosureKind::Smagorinsky { cs } => {
                let l = cs * meshwidth;
                (cfg.closure.mu * l * l, 0.0)
            }
            ClosureKind::ConstantNu { nu_t } => (0.0, nu_t),
            ClosureKind::PrescribedFields => unreachable!("rejected by validate"),
        };
        // eddy stress components τxx = ν_t Sxx, τxy = ν_t Sxy (τyy = −τxx)
        for idx in 0..n * n {
            let (ur, vr) = (scr.u[idx], scr.v[idx]);
            let (uxr, uyr, vxr) = (scr.ux[idx], scr.uy[idx], scr.vx[idx]);
            let vyr = -uxr;
            max_u2 = max_u2.max(ur * ur + vr * vr);
            scr.gx_p[idx] = -(ur * uxr + vr * uyr);
            scr.gy_p[idx] = -(ur * vxr + vr * vyr);
            let sxx = uxr;
            let sxy = 0.5 * (uyr + vxr);
            let nut = if cs2h2 > 0.0 {
                let smag = (2.0 * sxx * sxx + 2.0 * sxy * sxy).sqrt();
                cs2h2 * smag
            } else {
                nu_const
            };
            max_nut = max_nut.max(nut);
            scr.txx_p[idx] = nut * sxx;
            scr.txy_p[idx] = nut * sxy;
        }

        let (pack, tmp) = (&mut scr.pack, &mut scr.tmp);
        let [gx, gy] = &mut scr.g;
        sp.fft2_pair_into(&scr.gx_p, &scr.gy_p, pack, tmp, gx, gy);
        sp.fft2_pair_into(&scr.txx_p, &scr.txy_p, pack, tmp, &mut scr.da, &mut scr.db);
        let (txx, txy) = (&scr.da, &scr.db);
        // ∇·τ with τ = [[τxx, τxy], [τxy, −τxx]]; the model stress is
        // ν_t ∇ˢu, applied exactly as written
        for j in 0..n {
            let ky = sp.k[j];
            for i in 0..n {
                let kx = sp.k[i];
                let idx = j * n + i;
                let ikx = Complex::new(0.0, kx);
                let iky = Complex::new(0.0, ky);
                gx[idx] += ikx * txx[idx] + iky * txy[idx] + fh[0][idx];
                gy[idx] += ikx * txy[idx] - iky * txx[idx] + fh[1][idx];
            }
        }
        if cfg.dealias {
            sp.dealias(gx);
            sp.dealias(gy);
        }
        sp.project(gx, gy);
        StageMax { max_u: max_u2.sqrt(), max_nut }
    }

    fn substep(&mut self, dt: f64) -> StageMax {
        self.ensure_exp_tables(dt);
        let n2 = self.cfg.n * self.cfg.n;
        let h = self.grid.meshwidth();
        for c in 0..2 {
            self.scratch.q[c].iter_mut().for_each(|v| *v = Complex::ZERO);
        }
        let mut worst = StageMax { max_u: 0.0, max_nut: 0.0 };
        for s in 0..3 {
            let m = Self::rhs(&mut self.sp, &self.cfg, h, &self.uh, &self.fh, &mut self.scratch);
            worst.max_u = worst.max_u.max(m.max_u);
            worst.max_nut = worst.max_nut.max(m.max_nut);
            for c in 0..2 {
                let (a, b) = (RK_A[s], RK_B[s]);
                let table = &self.exp_tables[s];
                let qc = &mut self.scratch.q[c];
                let uc = &mut self.uh[c];
                let gc = &self.scratch.g[c];
                for i in 0..n2 {
                    // accumulate the register, advance, then carry both to
                    // the next stage time through the integrating factor
                    qc[i] = a * qc[i] + dt * gc[i];
                    let e = table[i];
                    uc[i] = e * (uc[i] + b * qc[i]);
                    qc[i] *= e;
                }
            }
        }
        worst
    }

    /// Advance one outer step of size dt_outer, sub-stepping internally when
    /// the advective CFL or the explicit-diffusion limit demands it.
    pub fn step(&mut self, dt_outer: f64, stats: &mut RunStats) -> Result<()> {
        let h = self.grid.meshwidth();
        let mut dt_allowed = self.cfg.cfl * h / self.last_max_u.max(1e-8);
        if self.last_max_nut > 0.0 {
            dt_allowed = dt_allowed.min(0.25 * h * h / self.last_max_nut);
        }
        let n_sub = ((dt_outer / dt_allowed).ceil() as usize).max(1);
        if n_sub > 1 {
            stats.substepped_steps += 1;
            stats.max_substeps = stats.max_substeps.max(n_sub);
            if stats.log.len() < 64 {
                stats.log.push(format!(
                    "step {}: dt {:.3e} exceeds stability limit {:.3e}; {} sub-steps",
                    self.step_index, dt_outer, dt_allowed, n_sub
                ));
            }
        }
        let dt = dt_outer / n_sub as f64;
        let mut worst = StageMax { max_u: self.last_max_u, max_nut: self.last_max_nut };
        for _ in 0..n_sub {
            let m = self.substep(dt);
            worst = m;
        }
        self.last_max_u = worst.max_u;
        self.last_max_nut = worst.max_nut;
        self.step_index += 1;
        self.t = self.step_index as f64 * dt_outer;
        stats.outer_steps += 1;
        if !self.uh[0][0].re.is_finite() || !worst.max_u.is_finite() {
            return Err(Error::Solver {
                step: self.step_index as u64,
                msg: "state is no longer finite (NaN/inf)".into(),
            });
        }
        Ok(())
    }

    /// Current velocity (and closure fields) as a physical-space snapshot.
    pub fn snapshot(&mut self) -> Result<Snapshot> {
        let n = self.cfg.n;
        let mut u = self.uh[0].clone();
        let mut v = self.uh[1].clone();
        self.sp.ifft2(&mut u, &mut self.tmp);
        self.sp.ifft2(&mut v, &mut self.tmp);
        let comps = vec![
            u.iter().map(|c| c.re).collect::<Vec<f64>>(),
            v.iter().map(|c| c.re).collect::<Vec<f64>>(),
        ];
        debug_assert_eq!(comps[0].len(), n * n);
        let velocity = Field::vector(self.grid, comps, self.t)?;
        let snap = match self.cfg.closure.kind {
            ClosureKind::ConstantNu { nu_t } if nu_t == 0.0 => Snapshot::velocity_only(velocity),
            _ => {
                let resolved = closures::resolve(&self.cfg.closure, &Snapshot::velocity_only(velocity.clone()))?;
                let (l, kprime) = match resolved.factoring {
                    Some((l, k)) => (Some(l), Some(k)),
                    None => (None, None),
                };
                Snapshot { velocity, nu_turb: Some(resolved.nu_turb), l, kprime }
            }
        };
        Ok(snap)
    }
}

fn to_complex(re: &[f64]) -> Cvec {
    re.iter().map(|v| Complex::new(*v, 0.0)).collect()
}

/// Taylor-Green vortex, optionally perturbed by a seeded random solenoidal
/// field (low-pass filtered stream-function noise) to break symmetry.
fn initial_velocity(cfg: &SolverConfig, grid: Grid) -> Result<Field> {
    let mut u0 = Field::from_fn_2d(grid, 1, 0.0, |c, x, y| {
        if c == 0 {
            x.cos() * y.sin()
        } else {
            -x.sin() * y.cos()
        }
    })?;
    if cfg.perturbation > 0.0 {
        let n = cfg.n;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut psi: Cvec = (0..n * n)
            .map(|_| Complex::new(rng.random_range(-1.0..1.0), 0.0))
            .collect();
        let mut sp = Spectral::new(n);
        let mut tmp = vec![Complex::ZERO; n * n];
        sp.fft2(&mut psi, &mut tmp);
        for j in 0..n {
            for i in 0..n {
                let (kx, ky) = (sp.k[i], sp.k[j]);
                if kx.abs() > 4.0 || ky.abs() > 4.0 {
                    psi[j * n + i] = Complex::ZERO;
                }
            }
        }
        // u' = (∂y ψ, −∂x ψ) is divergence-free for any ψ
        let mut pu = sp.deriv(&psi, 1);
        let mut pv = sp.deriv(&psi, 0);
        sp.ifft2(&mut pu, &mut tmp);
        sp.ifft2(&mut pv, &mut tmp);
        let amp = pu
            .iter()
            .zip(pv.iter())
            .map(|(a, b)| (a.re * a.re + b.re * b.re).sqrt())
            .fold(0.0f64, f64::max);
        if amp > 0.0 {
            let scale = cfg.perturbation / amp;
            for (dst, src) in u0.component_mut(0).iter_mut().zip(pu.iter()) {
                *dst += scale * src.re;
            }
            for (dst, src) in u0.component_mut(1).iter_mut().zip(pv.iter()) {
                *dst -= scale * src.re;
            }
        }
    }
    Ok(u0)
}

/// Time-step cfg.t_end worth of dynamics, emitting a uniform snapshot record.
pub fn run(cfg: &SolverConfig) -> Result<SnapshotSeries> {
    run_with_stats(cfg).map(|(s, _)| s)
}

pub fn run_with_stats(cfg: &SolverConfig) -> Result<(SnapshotSeries, RunStats)> {
    let mut solver = Solver::new(cfg.clone())?;
    let h = solver.grid.meshwidth();
    let dt_raw = cfg.cfl * h / solver.last_max_u.max(1e-8);
    let mut n_steps = (cfg.t_end / dt_raw).ceil() as usize;
    n_steps = n_steps.max(cfg.snapshot_every);
    // land snapshots exactly on t_end with a uniform outer step
    n_steps = n_steps.div_ceil(cfg.snapshot_every) * cfg.snapshot_every;
    let dt_outer = cfg.t_end / n_steps as f64;

    let mut stats = RunStats::default();
    let mut snaps = Vec::with_capacity(n_steps / cfg.snapshot_every + 1);
    snaps.push(solver.snapshot()?);
    for step in 1..=n_steps {
        solver.step(dt_outer, &mut stats)?;
        if step % cfg.snapshot_every == 0 {
            snaps.push(solver.snapshot()?);
        }
    }
    Ok((SnapshotSeries::new(snaps)?, stats))
}

/// The decaying-vortex reference run: unforced, no model, analytic solution
/// u = (cos x sin y, −sin x cos y)·e^{−2νt}.
pub fn taylor_green(n: usize, nu: f64, t_end: f64) -> Result<SnapshotSeries> {
    let mut cfg = SolverConfig::new(n, nu, t_end)?;
    // ~100 snapshots regardless of resolution
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let est_steps = (t_end / (cfg.cfl * h)).ceil() as usize;
    cfg.snapshot_every = (est_steps / 100).max(1);
    run(&cfg)
}
