//! On-disk interchange: the EVDG binary snapshot format, flat `key = value`
//! config/manifest text, and the deterministic JSON report writer.
//!
//! EVDG layout (all little-endian): magic "EVDG", version u32 = 1, ndim u32,
//! nx/ny/nz u32, dx/dy/dz f64, time f64, field_mask u32, then the masked
//! fields in ascending bit order, each component as nx·ny·nz f64 values
//! row-major with x fastest. Bit 0 velocity (ndim components), bit 1 nu_turb,
//! bit 2 l, bit 3 kprime (scalars), bit 4 forcing (ndim components), bit 5
//! dissipation density (scalar; extension used by the analysis dump).

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::closures::{ClosureKind, ClosureSpec};
use crate::diagnostics::DiagnosticsReport;
use crate::error::{Error, Result};
use crate::field::{Field, Snapshot, SnapshotSeries};
use crate::grid::Grid;
use crate::solver::{Forcing, SolverConfig};

pub const MAGIC: [u8; 4] = *b"EVDG";
pub const VERSION: u32 = 1;

pub const MASK_VELOCITY: u32 = 1 << 0;
pub const MASK_NU_TURB: u32 = 1 << 1;
pub const MASK_L: u32 = 1 << 2;
pub const MASK_KPRIME: u32 = 1 << 3;
pub const MASK_FORCING: u32 = 1 << 4;
pub const MASK_DISSIPATION: u32 = 1 << 5;

const HEADER_LEN: usize = 4 + 4 + 4 * 4 + 8 * 4 + 4;

/// Contents of one EVDG file.
#[derive(Debug, Clone)]
pub struct SnapshotFile {
    pub grid: Grid,
    pub time: f64,
    pub velocity: Option<Field>,
    pub nu_turb: Option<Field>,
    pub l: Option<Field>,
    pub kprime: Option<Field>,
    pub forcing: Option<Field>,
    pub dissipation: Option<Field>,
}

impl SnapshotFile {
    pub fn from_snapshot(snap: &Snapshot) -> SnapshotFile {
        SnapshotFile {
            grid: *snap.velocity.grid(),
            time: snap.velocity.time(),
            velocity: Some(snap.velocity.clone()),
            nu_turb: snap.nu_turb.clone(),
            l: snap.l.clone(),
            kprime: snap.kprime.clone(),
            forcing: None,
            dissipation: None,
        }
    }

    pub fn into_snapshot(self) -> Result<Snapshot> {
        let velocity = self
            .velocity
            .ok_or_else(|| Error::validation("snapshot file carries no velocity field"))?;
        Ok(Snapshot { velocity, nu_turb: self.nu_turb, l: self.l, kprime: self.kprime })
    }

    fn mask(&self) -> u32 {
        let mut m = 0;
        if self.velocity.is_some() {
            m |= MASK_VELOCITY;
        }
        if self.nu_turb.is_some() {
            m |= MASK_NU_TURB;
        }
        if self.l.is_some() {
            m |= MASK_L;
        }
        if self.kprime.is_some() {
            m |= MASK_KPRIME;
        }
        if self.forcing.is_some() {
            m |= MASK_FORCING;
        }
        if self.dissipation.is_some() {
            m |= MASK_DISSIPATION;
        }
        m
    }
}

fn field_slots(sf: &SnapshotFile) -> [(&'static str, Option<&Field>); 6] {
    [
        ("velocity", sf.velocity.as_ref()),
        ("nu_turb", sf.nu_turb.as_ref()),
        ("l", sf.l.as_ref()),
        ("kprime", sf.kprime.as_ref()),
        ("forcing", sf.forcing.as_ref()),
        ("dissipation", sf.dissipation.as_ref()),
    ]
}

pub fn write_snapshot(path: &Path, sf: &SnapshotFile) -> Result<()> {
    let g = &sf.grid;
    for (name, field) in field_slots(sf).iter() {
        if let Some(f) = field {
            if f.grid() != g {
                return Err(Error::validation(format!("field {name} is not on the file grid")));
            }
            if f.components().iter().any(|c| c.iter().any(|v| !v.is_finite())) {
                return Err(Error::validation(format!("field {name} contains non-finite values")));
            }
        }
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let [nx, ny, nz] = g.shape();
    let [dx, dy, dz] = g.spacing();
    w.write_all(&(g.ndim() as u32).to_le_bytes())?;
    for n in [nx, ny, nz] {
        w.write_all(&(n as u32).to_le_bytes())?;
    }
    for d in [dx, dy, dz] {
        w.write_all(&d.to_le_bytes())?;
    }
    w.write_all(&sf.time.to_le_bytes())?;
    w.write_all(&sf.mask().to_le_bytes())?;
    for (_, field) in field_slots(sf).iter() {
        if let Some(f) = field {
            for comp in f.components() {
                for v in comp {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

struct Reader<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(|_| Error::Format {
            offset: self.offset,
            msg: format!("truncated file while reading {what}"),
        })?;
        self.offset += N as u64;
        Ok(buf)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes::<4>(what)?))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes::<8>(what)?))
    }
}

pub fn read_snapshot(path: &Path) -> Result<SnapshotFile> {
    let file = fs::File::open(path)?;
    let mut r = Reader { inner: BufReader::new(file), offset: 0 };

    let magic = r.bytes::<4>("magic")?;
    if magic != MAGIC {
        return Err(Error::Format { offset: 0, msg: format!("bad magic {magic:02x?}") });
    }
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::Format { offset: 4, msg: format!("unsupported version {version}") });
    }
    let ndim = r.u32("ndim")? as usize;
    let nx = r.u32("nx")? as usize;
    let ny = r.u32("ny")? as usize;
    let nz = r.u32("nz")? as usize;
    let dx = r.f64("dx")?;
    let dy = r.f64("dy")?;
    let dz = r.f64("dz")?;
    let time = r.f64("time")?;
    let mask = r.u32("field_mask")?;
    if mask >> 6 != 0 {
        return Err(Error::Format {
            offset: (HEADER_LEN - 4) as u64,
            msg: format!("unknown field_mask bits {mask:#x}"),
        });
    }
    if !time.is_finite() {
        return Err(Error::validation("snapshot time is not finite"));
    }
    let grid = match ndim {
        2 => {
            if nz != 1 {
                return Err(Error::validation(format!("ndim = 2 requires nz = 1, got {nz}")));
            }
            Grid::new_2d(nx, ny, dx, dy, [true, true])?
        }
        3 => Grid::new_3d([nx, ny, nz], [dx, dy, dz], [true, true, true])?,
        _ => return Err(Error::validation(format!("ndim = {ndim} is not 2 or 3"))),
    };

    let ncells = grid.ncells();
    let mut read_field = |name: &str, ncomp: usize| -> Result<Field> {
        let mut comps = Vec::with_capacity(ncomp);
        for _ in 0..ncomp {
            let mut vals = Vec::with_capacity(ncells);
            for _ in 0..ncells {
                vals.push(r.f64(name)?);
            }
            if let Some(v) = vals.iter().find(|v| !v.is_finite()) {
                return Err(Error::validation(format!("field {name} contains non-finite {v}")));
            }
            comps.push(vals);
        }
        let rank = if ncomp == 1 { 0 } else { 1 };
        Field::new(grid, rank, comps, time)
    };

    let velocity =
        if mask & MASK_VELOCITY != 0 { Some(read_field("velocity", ndim)?) } else { None };
    let nu_turb = if mask & MASK_NU_TURB != 0 { Some(read_field("nu_turb", 1)?) } else { None };
    let l = if mask & MASK_L != 0 { Some(read_field("l", 1)?) } else { None };
    let kprime = if mask & MASK_KPRIME != 0 { Some(read_field("kprime", 1)?) } else { None };
    let forcing = if mask & MASK_FORCING != 0 { Some(read_field("forcing", ndim)?) } else { None };
    let dissipation =
        if mask & MASK_DISSIPATION != 0 { Some(read_field("dissipation", 1)?) } else { None };

    let mut trailing = [0u8; 1];
    if r.inner.read(&mut trailing).unwrap_or(0) != 0 {
        return Err(Error::Format {
            offset: r.offset,
            msg: "trailing bytes after declared payload".into(),
        });
    }
    Ok(SnapshotFile { grid, time, velocity, nu_turb, l, kprime, forcing, dissipation })
}

/// Parse flat `key = value` text: one pair per line, `#` comments, dotted key
/// prefixes for grouping. Returns pairs in file order.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected `key = value`, got {raw:?}", lineno + 1))
        })?;
        let key = k.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
        }
        out.push((key.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub struct KvMap {
    pairs: Vec<(String, String)>,
}

impl KvMap {
    pub fn from_text(text: &str) -> Result<KvMap> {
        Ok(KvMap { pairs: parse_kv(text)? })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.pairs.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    pub fn f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Config(format!("key `{key}`: `{v}` is not a number")))
            })
            .transpose()
    }

    pub fn usize(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| Error::Config(format!("key `{key}`: `{v}` is not an integer")))
            })
            .transpose()
    }

    pub fn bool(&self, key: &str) -> Result<Option<bool>> {
        self.get(key)
            .map(|v| match v {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(Error::Config(format!("key `{key}`: `{v}` is not a boolean"))),
            })
            .transpose()
    }

    /// Comma-separated list of numbers.
    pub fn f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim().parse::<f64>().map_err(|_| {
                            Error::Config(format!("key `{key}`: `{s}` is not a number"))
                        })
                    })
                    .collect()
            })
            .transpose()
    }

    /// Values of `prefix.<index>` keys in ascending index order.
    pub fn indexed(&self, prefix: &str) -> Result<Vec<String>> {
        let mut items: Vec<(usize, String)> = Vec::new();
        for (k, v) in &self.pairs {
            if let Some(suffix) = k.strip_prefix(prefix).and_then(|s| s.strip_prefix('.')) {
                let idx = suffix.parse::<usize>().map_err(|_| {
                    Error::Config(format!("key `{k}`: `{suffix}` is not an index"))
                })?;
                items.push((idx, v.clone()));
            }
        }
        items.sort_by_key(|(i, _)| *i);
        Ok(items.into_iter().map(|(_, v)| v).collect())
    }
}

fn closure_from_kv(kv: &KvMap) -> Result<ClosureSpec> {
    let kind = kv.get("closure.kind").unwrap_or("none");
    let mu = kv.f64("closure.mu")?;
    match kind {
        "none" => {
            if mu.is_some() {
                return Err(Error::Config("closure.mu is meaningless for closure.kind = none".into()));
            }
            Ok(ClosureSpec::none())
        }
        "constant_nu" => {
            let nu_t = kv
                .f64("closure.nu_t")?
                .ok_or_else(|| Error::Config("closure.kind = constant_nu needs closure.nu_t".into()))?;
            ClosureSpec::constant_nu(nu_t)
        }
        "smagorinsky" => {
            let cs = kv
                .f64("closure.cs")?
                .ok_or_else(|| Error::Config("closure.kind = smagorinsky needs closure.cs".into()))?;
            ClosureSpec::smagorinsky_with_mu(cs, mu.unwrap_or(1.0))
        }
        "prescribed" => ClosureSpec::prescribed(mu.unwrap_or(1.0)),
        other => Err(Error::Config(format!("unknown closure.kind `{other}`"))),
    }
}

fn closure_to_kv(spec: &ClosureSpec, out: &mut String) {
    match spec.kind {
        ClosureKind::ConstantNu { nu_t } => {
            if nu_t == 0.0 {
                out.push_str("closure.kind = none\n");
            } else {
                out.push_str("closure.kind = constant_nu\n");
                out.push_str(&format!("closure.nu_t = {}\n", fmt_f64(nu_t)));
            }
        }
        ClosureKind::Smagorinsky { cs } => {
            out.push_str("closure.kind = smagorinsky\n");
            out.push_str(&format!("closure.cs = {}\n", fmt_f64(cs)));
            out.push_str(&format!("closure.mu = {}\n", fmt_f64(spec.mu)));
        }
        ClosureKind::PrescribedFields => {
            out.push_str("closure.kind = prescribed\n");
            out.push_str(&format!("closure.mu = {}\n", fmt_f64(spec.mu)));
        }
    }
}

/// A solver run description parsed from a config file.
pub fn solver_config_from_text(text: &str) -> Result<SolverConfig> {
    let kv = KvMap::from_text(text)?;
    let n = kv
        .usize("solver.n")?
        .ok_or_else(|| Error::Config("missing required key `solver.n`".into()))?;
    let nu = kv
        .f64("solver.nu")?
        .ok_or_else(|| Error::Config("missing required key `solver.nu`".into()))?;
    let t_end = kv
        .f64("solver.t_end")?
        .ok_or_else(|| Error::Config("missing required key `solver.t_end`".into()))?;
    let mut cfg = SolverConfig::new(n, nu, t_end)?;
    if let Some(cfl) = kv.f64("solver.cfl")? {
        cfg.cfl = cfl;
    }
    if let Some(d) = kv.bool("solver.dealias")? {
        cfg.dealias = d;
    }
    if let Some(s) = kv.usize("solver.snapshot_every")? {
        cfg.snapshot_every = s;
    }
    if let Some(s) = kv.usize("solver.seed")? {
        cfg.seed = s as u64;
    }
    if let Some(p) = kv.f64("solver.perturbation")? {
        cfg.perturbation = p;
    }
    cfg.closure = closure_from_kv(&kv)?;
    cfg.forcing = match kv.get("forcing.kind").unwrap_or("none") {
        "none" => Forcing::None,
        "kolmogorov" => {
            let chi = kv
                .f64("forcing.chi")?
                .ok_or_else(|| Error::Config("kolmogorov forcing needs forcing.chi".into()))?;
            let k_f = kv
                .usize("forcing.k_f")?
                .ok_or_else(|| Error::Config("kolmogorov forcing needs forcing.k_f".into()))?;
            Forcing::Kolmogorov { chi, k_f: k_f as u32 }
        }
        other => return Err(Error::Config(format!("unknown forcing.kind `{other}`"))),
    };
    if cfg.perturbation == 0.0 && cfg.forcing != Forcing::None {
        // forced runs need broken symmetry to leave the vortex manifold
        cfg.perturbation = 1e-3;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Analysis inputs assembled from a manifest and its referenced files.
pub struct LoadedManifest {
    pub series: SnapshotSeries,
    pub forcing: Option<Field>,
    pub nu: f64,
    pub closure: ClosureSpec,
    pub flag_threshold: Option<f64>,
    pub beta: Option<Vec<f64>>,
    pub tail_fraction: Option<f64>,
    /// Raw bytes digested for report provenance (manifest + snapshot files).
    pub digest_hex: String,
}

pub fn load_manifest(path: &Path) -> Result<LoadedManifest> {
    use sha2::{Digest, Sha256};
    let text = fs::read_to_string(path)?;
    let kv = KvMap::from_text(&text)?;
    let dir = path.parent().unwrap_or(Path::new("."));

    let nu = kv
        .f64("nu")?
        .ok_or_else(|| Error::Config("manifest is missing required key `nu`".into()))?;
    let closure = closure_from_kv(&kv)?;
    let flag_threshold = kv.f64("flag_threshold")?;
    let beta = kv.f64_list("beta")?;
    let tail_fraction = kv.f64("averaging.tail_fraction")?;

    let snap_paths = kv.indexed("snapshot")?;
    if snap_paths.len() < 2 {
        return Err(Error::Config(format!(
            "manifest lists {} snapshots; at least 2 are required",
            snap_paths.len()
        )));
    }

    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let mut snaps = Vec::with_capacity(snap_paths.len());
    for p in &snap_paths {
        let full: PathBuf = dir.join(p);
        hasher.update(fs::read(&full)?);
        snaps.push(read_snapshot(&full)?.into_snapshot()?);
    }
    let series = SnapshotSeries::new(snaps)?;

    let forcing = match kv.get("forcing.file") {
        Some(p) => {
            let full = dir.join(p);
            hasher.update(fs::read(&full)?);
            let sf = read_snapshot(&full)?;
            let f = sf.forcing.or(sf.velocity).ok_or_else(|| {
                Error::validation("forcing file carries neither a forcing nor a velocity field")
            })?;
            Some(f)
        }
        None => None,
    };

    let digest_hex: String =
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect();
    Ok(LoadedManifest {
        series,
        forcing,
        nu,
        closure,
        flag_threshold,
        beta,
        tail_fraction,
        digest_hex,
    })
}

/// Write a solver run to `dir`: per-snapshot EVDG files, the forcing field,
/// and a manifest tying them together.
pub fn write_run(
    dir: &Path,
    series: &SnapshotSeries,
    forcing: Option<&Field>,
    nu: f64,
    closure: &ClosureSpec,
) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut manifest = String::new();
    manifest.push_str(&format!("nu = {}\n", fmt_f64(nu)));
    closure_to_kv(closure, &mut manifest);
    if let Some(f) = forcing {
        let sf = SnapshotFile {
            grid: *f.grid(),
            time: 0.0,
            velocity: None,
            nu_turb: None,
            l: None,
            kprime: None,
            forcing: Some(f.clone()),
            dissipation: None,
        };
        write_snapshot(&dir.join("forcing.evdg"), &sf)?;
        manifest.push_str("forcing.file = forcing.evdg\n");
    }
    for (i, snap) in series.snapshots().iter().enumerate() {
        let name = format!("snap_{i:06}.evdg");
        write_snapshot(&dir.join(&name), &SnapshotFile::from_snapshot(snap))?;
        manifest.push_str(&format!("snapshot.{i} = {name}\n"));
    }
    let manifest_path = dir.join("manifest");
    fs::write(&manifest_path, manifest)?;
    Ok(manifest_path)
}

/// 17-significant-digit float formatting: every finite f64 re-parses to the
/// same bits, and equal inputs render byte-identically.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_string()
    }
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn opt(v: Option<f64>) -> String {
    match v {
        Some(v) => fmt_f64(v),
        None => "null".to_string(),
    }
}

/// Render the report as JSON with a fixed key order. Unavailable statistics
/// appear as nulls so the schema is stable across partial inputs.
pub fn render_report(report: &DiagnosticsReport) -> String {
    let mut s = String::with_capacity(4096);
    s.push_str("{\n");
    s.push_str("  \"schema\": \"evdiag-report/1\",\n");
    s.push_str(&format!("  \"provenance\": \"{}\",\n", json_escape(&report.provenance)));

    let f = &report.scales;
    s.push_str("  \"scales\": {\n");
    s.push_str(&format!("    \"F\": {},\n", opt(f.f_scale)));
    s.push_str(&format!("    \"U\": {},\n", fmt_f64(f.u)));
    s.push_str(&format!("    \"U_final\": {},\n", fmt_f64(f.u_final)));
    s.push_str(&format!("    \"U_prime\": {},\n", opt(f.u_prime)));
    s.push_str(&format!("    \"U_prime_final\": {},\n", opt(f.u_prime_final)));
    s.push_str(&format!("    \"I_u\": {},\n", opt(f.i_u)));
    s.push_str(&format!("    \"L\": {},\n", opt(f.l)));
    s.push_str(&format!("    \"Re\": {},\n", opt(f.re)));
    s.push_str(&format!("    \"nu\": {},\n", fmt_f64(f.nu)));
    s.push_str(&format!("    \"h\": {}\n", fmt_f64(f.h)));
    s.push_str("  },\n");

    match &report.closure_stats {
        Some(c) => {
            s.push_str("  \"closure\": {\n");
            s.push_str(&format!("    \"mu\": {},\n", fmt_f64(c.mu)));
            s.push_str(&format!("    \"avg_nu_turb\": {},\n", fmt_f64(c.avg_nu_turb)));
            s.push_str(&format!(
                "    \"avg_nu_turb_final\": {},\n",
                fmt_f64(c.avg_nu_turb_final)
            ));
            s.push_str(&format!("    \"avg_l\": {},\n", opt(c.avg_l)));
            s.push_str(&format!("    \"U_prime_model\": {},\n", opt(c.u_prime_model)));
            s.push_str(&format!("    \"I_model\": {},\n", opt(c.i_model)));
            s.push_str(&format!("    \"ratio_nu\": {}\n", fmt_f64(c.ratio_nu)));
            s.push_str("  },\n");
        }
        None => s.push_str("  \"closure\": null,\n"),
    }

    let d = &report.dissipation;
    s.push_str("  \"dissipation\": {\n");
    for (i, (name, avg)) in
        [("eps0", d.eps0), ("eps_turb", d.eps_turb), ("eps_total", d.eps_total)]
            .iter()
            .enumerate()
    {
        let sep = if i == 2 { "" } else { "," };
        s.push_str(&format!(
            "    \"{name}\": {{ \"lim_sup\": {}, \"final\": {} }}{sep}\n",
            fmt_f64(avg.lim_sup),
            fmt_f64(avg.final_avg)
        ));
    }
    s.push_str("  },\n");

    s.push_str(&format!("  \"lambda_T\": {},\n", opt(report.lambda_t)));

    match &report.resolution {
        Some(r) => {
            s.push_str("  \"resolution\": {\n");
            s.push_str(&format!("    \"lambda_T\": {},\n", fmt_f64(r.lambda_t)));
            s.push_str(&format!("    \"h\": {},\n", fmt_f64(r.h)));
            s.push_str(&format!("    \"threshold_stmt\": {},\n", fmt_f64(r.threshold_stmt)));
            s.push_str(&format!("    \"threshold_proof\": {},\n", fmt_f64(r.threshold_proof)));
            s.push_str(&format!("    \"lambda_criterion\": {},\n", fmt_f64(r.lambda_criterion)));
            s.push_str(&format!(
                "    \"under_dissipation_bound\": {},\n",
                fmt_f64(r.under_dissipation_bound)
            ));
            s.push_str(&format!("    \"C_I\": {},\n", fmt_f64(r.c_i)));
            s.push_str(&format!("    \"C_E\": {},\n", fmt_f64(r.c_e)));
            s.push_str(&format!("    \"verdict\": \"{}\"\n", r.verdict.as_str()));
            s.push_str("  },\n");
        }
        None => s.push_str("  \"resolution\": null,\n"),
    }

    s.push_str("  \"bounds\": [");
    for (i, b) in report.bounds.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str("\n    { ");
        s.push_str(&format!("\"beta\": {}, ", fmt_f64(b.beta)));
        s.push_str(&format!("\"lhs\": {}, ", fmt_f64(b.lhs)));
        s.push_str(&format!("\"lhs_final\": {}, ", fmt_f64(b.lhs_final)));
        s.push_str(&format!("\"rhs_thm2\": {}, ", fmt_f64(b.rhs_thm2)));
        s.push_str(&format!("\"rhs_cor_a\": {}, ", opt(b.rhs_cor_a)));
        s.push_str(&format!("\"rhs_cor_b\": {}, ", opt(b.rhs_cor_b)));
        s.push_str(&format!("\"margin\": {} }}", fmt_f64(b.margin)));
    }
    if report.bounds.is_empty() {
        s.push_str("],\n");
    } else {
        s.push_str("\n  ],\n");
    }

    s.push_str(&format!("  \"energy_residual\": {},\n", opt(report.energy_residual)));
    s.push_str(&format!(
        "  \"force_balance_residual\": {},\n",
        opt(report.force_balance_residual)
    ));

    let m = &report.monitoring;
    s.push_str("  \"monitoring\": {\n");
    s.push_str(&format!("    \"ratio_nu\": {},\n", opt(m.ratio_nu)));
    s.push_str(&format!("    \"avg_l_over_L\": {},\n", opt(m.avg_l_over_l)));
    s.push_str(&format!("    \"I_model\": {},\n", opt(m.i_model)));
    s.push_str(&format!("    \"flag_threshold\": {},\n", fmt_f64(m.flag_threshold)));
    s.push_str(&format!(
        "    \"flags\": {{ \"ratio_nu\": {}, \"avg_l_over_L\": {}, \"I_model\": {} }}\n",
        m.ratio_nu_flagged, m.avg_l_flagged, m.i_model_flagged
    ));
    s.push_str("  },\n");

    s.push_str(&format!("  \"overall\": \"{}\",\n", json_escape(&report.overall)));
    s.push_str("  \"warnings\": [");
    for (i, w) in report.warnings.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&format!("\n    \"{}\"", json_escape(w)));
    }
    if report.warnings.is_empty() {
        s.push_str("]\n");
    } else {
        s.push_str("\n  ]\n");
    }
    s.push_str("}\n");
    s
}

pub fn write_report(report: &DiagnosticsReport, path: &Path) -> Result<()> {
    fs::write(path, render_report(report))?;
    Ok(())
}
