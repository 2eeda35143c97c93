//! Configuration-driven studies: parse a flat key-path config, enumerate
//! the case grid, run each case through the full pipeline and emit CSV
//! tables plus mode-shape grids.
//!
//! The config format is one `key = value` pair per line, `#` comments,
//! comma-separated lists where a list is allowed. See the repository
//! `configs/` directory for annotated examples.

use crate::material::{FgmSpec, PhaseMaterial, PoissonMode, TemperatureCoefficients, ThermalState};
use crate::mesh::{aligned_divisions, build_mesh, Mesh, PlateGeometry};
use crate::section::{integrate_section, SectionProperties, DEFAULT_THICKNESS_GAUSS};
use crate::solver::{
    apply_bcs, apply_skew_transform, assemble, assemble_geometric, compute_element_matrices,
    nondimensionalize, solve_modes, solve_prestress, BoundaryCondition, ModalResult, NondimRefs,
    NondimScheme, SkewBcFrame,
};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Fully resolved study definition.
#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub fgm: FgmSpec,
    /// Absolute plate side length a, m. Frequencies are reported
    /// nondimensionally, so this only scales omega.
    pub a: f64,
    pub a_over_b: Vec<f64>,
    pub a_over_h: Vec<f64>,
    pub psi_deg: Vec<f64>,
    pub crack_ratios: Vec<f64>,
    pub gradient_indices: Vec<f64>,
    /// (Tc, Tm) pairs, K.
    pub thermal_cases: Vec<(f64, f64)>,
    pub t0: f64,
    pub bcs: Vec<BoundaryCondition>,
    /// Target element divisions for cracked plates (snapped to crack
    /// alignment) .. and for uncracked plates.
    pub mesh_level: usize,
    pub mesh_level_uncracked: usize,
    pub n_modes: usize,
    pub nondim: NondimScheme,
    pub skew_bc_frame: SkewBcFrame,
    pub output_dir: String,
    pub dump_meshes: bool,
}

/// One point of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseParams {
    pub a_over_b: f64,
    pub a_over_h: f64,
    pub n: f64,
    pub crack_ratio: f64,
    pub psi_deg: f64,
    pub tc: f64,
    pub tm: f64,
    pub bc: BoundaryCondition,
}

impl CaseParams {
    pub fn id(&self) -> String {
        format!(
            "ab{}_ah{}_n{}_ca{}_psi{}_tc{}_tm{}_{}",
            fmt_num(self.a_over_b),
            fmt_num(self.a_over_h),
            fmt_num(self.n),
            fmt_num(self.crack_ratio),
            fmt_num(self.psi_deg),
            fmt_num(self.tc),
            fmt_num(self.tm),
            self.bc.label()
        )
    }
}

/// One CSV row: a single mode of a single case, or a case-level error.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub case_id: String,
    pub params: CaseParams,
    /// 1-based mode number; 0 on error rows.
    pub mode_index: usize,
    pub omega_rad_s: Option<f64>,
    pub omega_nd: Option<f64>,
    pub error: Option<String>,
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

// ---------------------------------------------------------------------
// config parsing
// ---------------------------------------------------------------------

struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
    consumed: std::cell::RefCell<std::collections::BTreeSet<String>>,
}

impl RawConfig {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("line {}", lineno + 1), "expected `key = value`"))?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Error::config(format!("line {}", lineno + 1), "empty key"));
            }
            if entries.insert(key.clone(), (value.trim().to_string(), lineno + 1)).is_some() {
                return Err(Error::config(key, "duplicate key"));
            }
        }
        Ok(Self { entries, consumed: Default::default() })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.consumed.borrow_mut().insert(key.to_string());
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn f64(&self, key: &str) -> Result<Option<f64>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::config(key, format!("`{v}` is not a number"))),
        }
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    fn require_f64(&self, key: &str) -> Result<f64> {
        self.f64(key)?.ok_or_else(|| Error::config(key, "missing required key"))
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| Error::config(key, format!("`{v}` is not a non-negative integer"))),
        }
    }

    fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => {
                let mut out = Vec::new();
                for item in v.split(',') {
                    let item = item.trim();
                    if item.is_empty() {
                        continue;
                    }
                    out.push(
                        item.parse::<f64>()
                            .map_err(|_| Error::config(key, format!("`{item}` is not a number")))?,
                    );
                }
                if out.is_empty() {
                    return Err(Error::config(key, "list must not be empty"));
                }
                Ok(out)
            }
        }
    }

    fn unknown_keys(&self) -> Vec<String> {
        let consumed = self.consumed.borrow();
        self.entries.keys().filter(|k| !consumed.contains(*k)).cloned().collect()
    }
}

fn parse_phase(raw: &RawConfig, which: &str) -> Result<PhaseMaterial> {
    let base = format!("material.{which}");
    let coeffs = |prop: &str| -> Result<TemperatureCoefficients> {
        Ok(TemperatureCoefficients {
            p0: raw.require_f64(&format!("{base}.{prop}.P0"))?,
            pm1: raw.f64_or(&format!("{base}.{prop}.Pm1"), 0.0)?,
            p1: raw.f64_or(&format!("{base}.{prop}.P1"), 0.0)?,
            p2: raw.f64_or(&format!("{base}.{prop}.P2"), 0.0)?,
            p3: raw.f64_or(&format!("{base}.{prop}.P3"), 0.0)?,
        })
    };
    let phase = PhaseMaterial {
        name: raw.get(&format!("{base}.name")).unwrap_or(which).to_string(),
        e_coeffs: coeffs("E")?,
        alpha_coeffs: coeffs("alpha")?,
        rho: raw.require_f64(&format!("{base}.rho"))?,
        kappa: raw.require_f64(&format!("{base}.kappa"))?,
        nu: raw.require_f64(&format!("{base}.nu"))?,
    };
    phase.validate().map_err(|e| Error::config(base, e.to_string()))?;
    Ok(phase)
}

/// Parse a configuration file.
pub fn parse_config(path: &Path) -> Result<StudyConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(path.display().to_string(), format!("cannot read: {e}")))?;
    parse_config_str(&text)
}

/// Parse configuration text. Missing optional keys fall back to the
/// documented defaults (T0 = 300 K, 16/8 mesh levels, 10 modes, ceramic
/// scheme, global skew constraint frame).
pub fn parse_config_str(text: &str) -> Result<StudyConfig> {
    let raw = RawConfig::parse(text)?;
    let ceramic = parse_phase(&raw, "ceramic")?;
    let metal = parse_phase(&raw, "metal")?;
    let poisson = match raw.get("fgm.poisson") {
        None => PoissonMode::Constant(0.28),
        Some(v) => {
            let v = v.trim();
            if v.eq_ignore_ascii_case("mori-tanaka") {
                PoissonMode::MoriTanaka
            } else if let Some(rest) = v.strip_prefix("constant:") {
                let value = rest
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::config("fgm.poisson", format!("`{rest}` is not a number")))?;
                PoissonMode::Constant(value)
            } else {
                return Err(Error::config(
                    "fgm.poisson",
                    format!("`{v}` is neither `constant:<value>` nor `mori-tanaka`"),
                ));
            }
        }
    };
    let mut fgm = FgmSpec::new(ceramic, metal, 1.0).map_err(|e| Error::config("material", e.to_string()))?;
    fgm.poisson_mode = poisson;

    let thermal_cases = match raw.get("thermal.cases") {
        None => vec![(300.0, 300.0)],
        Some(v) => {
            let mut out = Vec::new();
            for item in v.split(',') {
                let item = item.trim();
                if item.is_empty() {
                    continue;
                }
                let (tc, tm) = item.split_once(':').ok_or_else(|| {
                    Error::config("thermal.cases", format!("`{item}` is not of the form Tc:Tm"))
                })?;
                let tc = tc
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::config("thermal.cases", format!("`{tc}` is not a number")))?;
                let tm = tm
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::config("thermal.cases", format!("`{tm}` is not a number")))?;
                out.push((tc, tm));
            }
            if out.is_empty() {
                return Err(Error::config("thermal.cases", "list must not be empty"));
            }
            out
        }
    };

    let bcs = match raw.get("bc") {
        None => vec![BoundaryCondition::Ssss],
        Some(v) => {
            let mut out = Vec::new();
            for item in v.split(',') {
                let item = item.trim();
                if item.is_empty() {
                    continue;
                }
                out.push(BoundaryCondition::parse(item).map_err(|e| Error::config("bc", e.to_string()))?);
            }
            if out.is_empty() {
                return Err(Error::config("bc", "list must not be empty"));
            }
            out
        }
    };

    let nondim = match raw.get("nondim") {
        None => NondimScheme::CeramicRigidity,
        Some(v) => NondimScheme::parse(v).map_err(|e| Error::config("nondim", e.to_string()))?,
    };
    let skew_bc_frame = match raw.get("skew.bc_frame") {
        None => SkewBcFrame::Global,
        Some(v) if v.eq_ignore_ascii_case("global") => SkewBcFrame::Global,
        Some(v) if v.eq_ignore_ascii_case("local") => SkewBcFrame::Local,
        Some(v) => return Err(Error::config("skew.bc_frame", format!("`{v}` is neither global nor local"))),
    };

    let cfg = StudyConfig {
        fgm,
        a: raw.f64_or("geometry.a", 1.0)?,
        a_over_b: raw.list_or("geometry.a_over_b", &[1.0])?,
        a_over_h: raw.list_or("geometry.a_over_h", &[10.0])?,
        psi_deg: raw.list_or("geometry.psi_deg", &[0.0])?,
        crack_ratios: raw.list_or("crack.ratios", &[0.0])?,
        gradient_indices: raw.list_or("grading.indices", &[1.0])?,
        thermal_cases,
        t0: raw.f64_or("thermal.t0", 300.0)?,
        bcs,
        mesh_level: raw.usize_or("mesh.level", 16)?,
        mesh_level_uncracked: raw.usize_or("mesh.level_uncracked", 8)?,
        n_modes: raw.usize_or("modes", 10)?,
        nondim,
        skew_bc_frame,
        output_dir: raw.get("output.dir").unwrap_or("out").to_string(),
        dump_meshes: matches!(raw.get("mesh.dump"), Some("true") | Some("1") | Some("yes")),
    };
    let unknown = raw.unknown_keys();
    if let Some(k) = unknown.first() {
        return Err(Error::config(k.clone(), "unknown key"));
    }
    validate_config(&cfg)?;
    Ok(cfg)
}

fn validate_config(cfg: &StudyConfig) -> Result<()> {
    if !(cfg.a > 0.0) {
        return Err(Error::config("geometry.a", "must be positive"));
    }
    for (key, list) in [
        ("geometry.a_over_b", &cfg.a_over_b),
        ("geometry.a_over_h", &cfg.a_over_h),
    ] {
        if list.iter().any(|&v| v <= 0.0) {
            return Err(Error::config(key, "entries must be positive"));
        }
    }
    if cfg.psi_deg.iter().any(|&v| !(0.0..90.0).contains(&v)) {
        return Err(Error::config("geometry.psi_deg", "angles must lie in [0, 90)"));
    }
    if cfg.crack_ratios.iter().any(|&v| !(0.0..1.0).contains(&v)) {
        return Err(Error::config("crack.ratios", "ratios must lie in [0, 1)"));
    }
    if cfg.gradient_indices.iter().any(|&v| v < 0.0) {
        return Err(Error::config("grading.indices", "indices must be >= 0"));
    }
    if cfg.thermal_cases.iter().any(|&(tc, tm)| tc <= 0.0 || tm <= 0.0) || cfg.t0 <= 0.0 {
        return Err(Error::config("thermal", "temperatures must be positive"));
    }
    if cfg.n_modes == 0 {
        return Err(Error::config("modes", "must request at least one mode"));
    }
    if cfg.mesh_level < 2 || cfg.mesh_level_uncracked < 2 {
        return Err(Error::config("mesh.level", "mesh levels must be at least 2"));
    }
    Ok(())
}

// ---------------------------------------------------------------------
// case pipeline
// ---------------------------------------------------------------------

/// The case grid in deterministic lexicographic order.
pub fn enumerate_cases(cfg: &StudyConfig) -> Vec<CaseParams> {
    let mut cases = Vec::new();
    for &ab in &cfg.a_over_b {
        for &ah in &cfg.a_over_h {
            for &n in &cfg.gradient_indices {
                for &ca in &cfg.crack_ratios {
                    for &psi in &cfg.psi_deg {
                        for &(tc, tm) in &cfg.thermal_cases {
                            for &bc in &cfg.bcs {
                                cases.push(CaseParams {
                                    a_over_b: ab,
                                    a_over_h: ah,
                                    n,
                                    crack_ratio: ca,
                                    psi_deg: psi,
                                    tc,
                                    tm,
                                    bc,
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    cases
}

/// Element divisions for one case: the uncracked level as-is, the cracked
/// level snapped up to the nearest crack-aligned even count. `ny` keeps
/// elements near-square and even.
pub fn case_divisions(cfg: &StudyConfig, p: &CaseParams) -> Result<(usize, usize)> {
    let nx = if p.crack_ratio > 0.0 {
        aligned_divisions(cfg.mesh_level, p.crack_ratio)?
    } else {
        cfg.mesh_level_uncracked.max(2)
    };
    let b_over_a = 1.0 / p.a_over_b;
    let ny = ((nx as f64 * b_over_a / 2.0).round() as usize).max(1) * 2;
    Ok((nx, ny.max(2)))
}

/// Everything produced for one case; kept around for mode-shape export.
pub struct CaseRun {
    pub params: CaseParams,
    pub geometry: PlateGeometry,
    pub mesh: Mesh,
    pub section: SectionProperties,
    pub modal: ModalResult,
    pub rows: Vec<ResultRow>,
}

/// Run a single case through material, section, mesh, prestress and the
/// eigensolve.
pub fn run_case(cfg: &StudyConfig, p: &CaseParams) -> Result<CaseRun> {
    let fgm = cfg.fgm.with_index(p.n);
    let thermal = ThermalState::new(p.tc, p.tm, cfg.t0)?;
    let geometry = PlateGeometry {
        a: cfg.a,
        b: cfg.a / p.a_over_b,
        h: cfg.a / p.a_over_h,
        psi: p.psi_deg.to_radians(),
        crack_ratio: p.crack_ratio,
    };
    let (nx, ny) = case_divisions(cfg, p)?;
    let mesh = build_mesh(&geometry, nx, ny)?;
    let section = integrate_section(&fgm, &thermal, geometry.h, DEFAULT_THICKNESS_GAUSS)?;
    let elems = compute_element_matrices(&section, &mesh)?;
    let mut sys = assemble(&mesh, &elems)?;
    if geometry.psi != 0.0 && cfg.skew_bc_frame == SkewBcFrame::Local {
        apply_skew_transform(&mut sys, &mesh, geometry.psi);
    }
    apply_bcs(&mut sys, &mesh, p.bc)?;
    if !thermal.is_stress_free() {
        let states = solve_prestress(&sys, &mesh, &section)?;
        assemble_geometric(&mut sys, &mesh, &section, &states)?;
    }
    let modal = solve_modes(&sys, cfg.n_modes)?;
    let refs = NondimRefs::from_fgm(&fgm)?;
    let case_id = p.id();
    let rows = modal
        .omegas
        .iter()
        .enumerate()
        .map(|(k, &omega)| {
            let nd = nondimensionalize(omega, cfg.nondim, geometry.a, geometry.h, &refs)?;
            Ok(ResultRow {
                case_id: case_id.clone(),
                params: *p,
                mode_index: k + 1,
                omega_rad_s: Some(omega),
                omega_nd: Some(nd),
                error: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CaseRun { params: *p, geometry, mesh, section, modal, rows })
}

/// Run the whole sweep. Case failures become error rows; the sweep
/// continues. Rows come back sorted by case order, then mode.
pub fn run_study(cfg: &StudyConfig) -> Vec<ResultRow> {
    let cases = enumerate_cases(cfg);
    let run_one = |p: &CaseParams| -> Vec<ResultRow> {
        match run_case(cfg, p) {
            Ok(run) => run.rows,
            Err(e) => vec![ResultRow {
                case_id: p.id(),
                params: *p,
                mode_index: 0,
                omega_rad_s: None,
                omega_nd: None,
                error: Some(e.to_string()),
            }],
        }
    };
    #[cfg(feature = "parallel")]
    let per_case: Vec<Vec<ResultRow>> = cases.par_iter().map(run_one).collect();
    #[cfg(not(feature = "parallel"))]
    let per_case: Vec<Vec<ResultRow>> = cases.iter().map(run_one).collect();
    per_case.into_concat()
}

trait ConcatRows {
    fn into_concat(self) -> Vec<ResultRow>;
}

impl ConcatRows for Vec<Vec<ResultRow>> {
    fn into_concat(self) -> Vec<ResultRow> {
        let mut out = Vec::with_capacity(self.iter().map(Vec::len).sum());
        for chunk in self {
            out.extend(chunk);
        }
        out
    }
}

// ---------------------------------------------------------------------
// output
// ---------------------------------------------------------------------

const CSV_HEADER: &str = "case_id,a_b,a_h,n,c_a,psi_deg,tc_k,tm_k,bc,mode,omega_rad_s,omega_nd,error";

fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Render the full-precision results table.
pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{CSV_HEADER}");
    for r in rows {
        let p = &r.params;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.case_id,
            fmt_num(p.a_over_b),
            fmt_num(p.a_over_h),
            fmt_num(p.n),
            fmt_num(p.crack_ratio),
            fmt_num(p.psi_deg),
            fmt_num(p.tc),
            fmt_num(p.tm),
            p.bc.label(),
            r.mode_index,
            r.omega_rad_s.map(sig9).unwrap_or_default(),
            r.omega_nd.map(sig9).unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        );
    }
    s
}

/// Render the companion table with nondimensional values rounded to three
/// decimals for visual comparison against published tables.
pub fn paper_table_csv(rows: &[ResultRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "case_id,a_b,a_h,n,c_a,psi_deg,tc_k,tm_k,bc,mode,omega_nd");
    for r in rows {
        if r.error.is_some() {
            continue;
        }
        let p = &r.params;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{:.3}",
            r.case_id,
            fmt_num(p.a_over_b),
            fmt_num(p.a_over_h),
            fmt_num(p.n),
            fmt_num(p.crack_ratio),
            fmt_num(p.psi_deg),
            fmt_num(p.tc),
            fmt_num(p.tm),
            p.bc.label(),
            r.mode_index,
            r.omega_nd.unwrap_or(f64::NAN),
        );
    }
    s
}

/// Write `results.csv` and `paper_table.csv` (and mesh dumps when asked)
/// under the configured output directory. Returns the number of failed
/// cases.
pub fn write_outputs(cfg: &StudyConfig, rows: &[ResultRow]) -> Result<usize> {
    let dir = Path::new(&cfg.output_dir);
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("results.csv"), results_csv(rows))?;
    std::fs::write(dir.join("paper_table.csv"), paper_table_csv(rows))?;
    if cfg.dump_meshes {
        for p in enumerate_cases(cfg) {
            if let Ok((nx, ny)) = case_divisions(cfg, &p) {
                let geometry = PlateGeometry {
                    a: cfg.a,
                    b: cfg.a / p.a_over_b,
                    h: cfg.a / p.a_over_h,
                    psi: p.psi_deg.to_radians(),
                    crack_ratio: p.crack_ratio,
                };
                if let Ok(mesh) = build_mesh(&geometry, nx, ny) {
                    std::fs::write(dir.join(format!("mesh_{}.txt", p.id())), mesh.dump())?;
                }
            }
        }
    }
    Ok(rows.iter().filter(|r| r.error.is_some()).count())
}

/// Sample the transverse deflection of one mode on a regular grid over
/// the planform; values are scaled so `max |w| = 1`. Lines are
/// `x y w` in physical coordinates.
pub fn export_mode_shape(run: &CaseRun, mode_index: usize, resolution: usize) -> Result<String> {
    if mode_index == 0 || mode_index > run.modal.modes.len() {
        return Err(Error::ModeIndex { requested: mode_index, available: run.modal.modes.len() });
    }
    let resolution = resolution.max(2);
    let mode = &run.modal.modes[mode_index - 1];
    let g = &run.geometry;
    let (sn, cs) = g.psi.sin_cos();
    let mut samples = Vec::with_capacity((resolution + 1) * (resolution + 1));
    let mut wmax = 0.0f64;
    for jy in 0..=resolution {
        let y = g.b * jy as f64 / resolution as f64;
        for ix in 0..=resolution {
            let x = g.a * ix as f64 / resolution as f64;
            let (e, xi, eta) = run.mesh.locate(x, y)?;
            let sf = crate::element::shape_functions(xi, eta);
            let mut w = 0.0;
            for (k, &node) in run.mesh.elements[e].iter().enumerate() {
                w += sf.n[k] * mode[crate::DOF_PER_NODE * node + 2];
            }
            wmax = wmax.max(w.abs());
            samples.push((x + y * sn, y * cs, w));
        }
    }
    let scale = if wmax > 0.0 { wmax } else { 1.0 };
    let mut s = String::new();
    for (x, y, w) in samples {
        let _ = writeln!(s, "{:.9e} {:.9e} {:.9e}", x, y, w / scale);
    }
    Ok(s)
}

/// Opening displacement of a mode across the crack: max |w_top - w_bottom|
/// over the duplicated pairs, in the mode's own normalization.
pub fn crack_opening(run: &CaseRun, mode_index: usize) -> Result<f64> {
    if mode_index == 0 || mode_index > run.modal.modes.len() {
        return Err(Error::ModeIndex { requested: mode_index, available: run.modal.modes.len() });
    }
    let mode = &run.modal.modes[mode_index - 1];
    let mut gap = 0.0f64;
    for &(orig, dup) in &run.mesh.crack_pairs {
        let w0 = mode[crate::DOF_PER_NODE * orig + 2];
        let w1 = mode[crate::DOF_PER_NODE * dup + 2];
        gap = gap.max((w0 - w1).abs());
    }
    Ok(gap)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
# minimal study: isotropic-equivalent pair, one ambient case
material.ceramic.E.P0 = 200e9
material.ceramic.alpha.P0 = 1.0e-5
material.ceramic.rho = 8000
material.ceramic.kappa = 40
material.ceramic.nu = 0.3
material.metal.E.P0 = 200e9
material.metal.alpha.P0 = 1.0e-5
material.metal.rho = 8000
material.metal.kappa = 40
material.metal.nu = 0.3
fgm.poisson = constant:0.3
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config_str(MINIMAL).unwrap();
        assert_eq!(cfg.t0, 300.0);
        assert_eq!(cfg.mesh_level, 16);
        assert_eq!(cfg.mesh_level_uncracked, 8);
        assert_eq!(cfg.n_modes, 10);
        assert_eq!(cfg.nondim, NondimScheme::CeramicRigidity);
        assert_eq!(cfg.bcs, vec![BoundaryCondition::Ssss]);
        assert_eq!(enumerate_cases(&cfg).len(), 1);
    }

    #[test]
    fn sweep_grid_enumeration_counts() {
        let mut text = MINIMAL.to_string();
        text.push_str(
            "grading.indices = 0, 0.5, 1, 2, 5, 10\n\
             crack.ratios = 0.2, 0.4, 0.6\n\
             thermal.cases = 300:300, 400:300, 600:300\n\
             geometry.a_over_b = 1, 2\n\
             geometry.a_over_h = 10, 20\n\
             geometry.psi_deg = 0, 15, 30, 45\n\
             bc = ssss, cccc\n",
        );
        let cfg = parse_config_str(&text).unwrap();
        assert_eq!(enumerate_cases(&cfg).len(), 6 * 3 * 3 * 2 * 2 * 4 * 2);
    }

    #[test]
    fn malformed_numeric_names_the_key() {
        let text = MINIMAL.replace("material.metal.rho = 8000", "material.metal.rho = eight");
        let err = parse_config_str(&text).unwrap_err();
        match err {
            Error::Config { path, .. } => assert_eq!(path, "material.metal.rho"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn missing_material_key_reported() {
        let text = MINIMAL.replace("material.ceramic.kappa = 40\n", "");
        let err = parse_config_str(&text).unwrap_err();
        match err {
            Error::Config { path, .. } => assert_eq!(path, "material.ceramic.kappa"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let mut text = MINIMAL.to_string();
        text.push_str("geometry.unknown_knob = 3\n");
        assert!(matches!(parse_config_str(&text), Err(Error::Config { .. })));
    }

    #[test]
    fn bad_enums_rejected() {
        let mut text = MINIMAL.to_string();
        text.push_str("bc = simply\n");
        assert!(parse_config_str(&text).is_err());
        let mut text = MINIMAL.to_string();
        text.push_str("nondim = banana\n");
        assert!(parse_config_str(&text).is_err());
        let mut text = MINIMAL.to_string();
        text.push_str("geometry.psi_deg = 95\n");
        assert!(parse_config_str(&text).is_err());
    }

    #[test]
    fn case_ids_are_stable() {
        let p = CaseParams {
            a_over_b: 1.0,
            a_over_h: 10.0,
            n: 0.5,
            crack_ratio: 0.2,
            psi_deg: 30.0,
            tc: 600.0,
            tm: 300.0,
            bc: BoundaryCondition::Ssss,
        };
        assert_eq!(p.id(), "ab1_ah10_n0.5_ca0.2_psi30_tc600_tm300_ssss");
    }

    #[test]
    fn divisions_snap_to_crack_alignment() {
        let cfg = parse_config_str(MINIMAL).unwrap();
        let mut p = CaseParams {
            a_over_b: 1.0,
            a_over_h: 10.0,
            n: 0.0,
            crack_ratio: 0.2,
            psi_deg: 0.0,
            tc: 300.0,
            tm: 300.0,
            bc: BoundaryCondition::Ssss,
        };
        assert_eq!(case_divisions(&cfg, &p).unwrap(), (20, 20));
        p.crack_ratio = 0.0;
        assert_eq!(case_divisions(&cfg, &p).unwrap(), (8, 8));
        p.a_over_b = 2.0;
        assert_eq!(case_divisions(&cfg, &p).unwrap(), (8, 4));
    }

    #[test]
    fn trivial_case_produces_mode_rows() {
        let mut text = MINIMAL.to_string();
        text.push_str("modes = 2\ngeometry.a_over_h = 20\n");
        let cfg = parse_config_str(&text).unwrap();
        let rows = run_study(&cfg);
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.error.is_none()));
        assert!(rows[0].omega_nd.unwrap() < rows[1].omega_nd.unwrap());
        let csv = results_csv(&rows);
        assert!(csv.starts_with("case_id,"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn csv_is_deterministic() {
        let mut text = MINIMAL.to_string();
        text.push_str("modes = 2\n");
        let cfg = parse_config_str(&text).unwrap();
        let a = results_csv(&run_study(&cfg));
        let b = results_csv(&run_study(&cfg));
        assert_eq!(a, b);
    }
}
