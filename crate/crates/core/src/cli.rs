//! Command-line front end: config resolution, subcommand dispatch,
//! deterministic file output, and the exit-code contract
//! (0 success, 1 numerical failure, 2 usage error).

use crate::analytics::{
    asymmetry, collider_estimates, density_grid, lifetime, variance_z_closed, DensityGrid, Frame,
    Normalization, StateKind,
};
use crate::algebra::current;
use crate::error::{Error, Result};
use crate::fields::{FieldProfile, RindlerPoint, SpacetimePoint};
use crate::specfun::QuadratureSpec;
use crate::states::{decompose_boost_rotation, rest_frame_spinor, PacketParams};
use crate::verify::{
    residual_free, residual_planewave, residual_rindler, residual_transformed, ResidualReport,
};
use crate::analytics::FS_PER_COMPTON;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Parser, Debug)]
#[command(name = "nonspread", version, about = "Nonspreading relativistic wavepacket toolkit")]
pub struct Cli {
    /// flat key = value config file; flags override file values
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// CSV output path (a .json sidecar is written next to it)
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// worker threads for grid evaluation (default: available parallelism)
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// seed for randomized verification sampling
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[arg(long, global = true, value_enum)]
    pub unit_system: Option<UnitSystem>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum UnitSystem {
    /// Compton units throughout (hbar = m = c = 1)
    Compton,
    /// Compton units for coordinates, SI seconds/GeV for derived times
    SiMixed,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// probability density on a coordinate grid
    Density(DensityArgs),
    /// frame-norm asymmetry at a lab time
    Asymmetry(AsymmetryArgs),
    /// closed-form position moments of the free packet
    Variance(VarianceArgs),
    /// Dirac residual gate suite
    Verify(VerifyArgs),
    /// nonspreading window in both time conventions
    Lifetime(LifetimeArgs),
    /// gamma-ray collider feasibility numbers
    Collider(ColliderArgs),
    /// rotation/boost split of the field kick
    Decompose(DecomposeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StateArg {
    Free,
    Laser,
    Eigenstate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FrameArg {
    Lab,
    Rindler,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Off,
    Linear,
    Circular,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NormalizeArg {
    Raw,
    Unit,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub abar: Option<f64>,
    #[arg(long, value_enum)]
    pub state: Option<StateArg>,
    #[arg(long, value_enum)]
    pub frame: Option<FrameArg>,
    /// axis1_lo,axis1_hi,axis2_lo,axis2_hi (Z,T in the lab; u,eta in the wedge)
    #[arg(long)]
    pub window: Option<String>,
    /// N or N1xN2 grid points
    #[arg(long)]
    pub res: Option<String>,
    #[arg(long, value_enum)]
    pub field: Option<FieldArg>,
    #[arg(long)]
    pub a0: Option<f64>,
    #[arg(long)]
    pub omega_bar: Option<f64>,
    #[arg(long, value_enum)]
    pub normalize: Option<NormalizeArg>,
}

#[derive(Args, Debug)]
pub struct AsymmetryArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    /// comma-separated list of envelope sizes
    #[arg(long)]
    pub abar: Option<String>,
    /// lab time with unit tag: "1fs" or "776397.5tc" (Compton times)
    #[arg(long)]
    pub t: Option<String>,
}

#[derive(Args, Debug)]
pub struct VarianceArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub abar: Option<f64>,
    /// comma-separated list of lab times (Compton units)
    #[arg(long)]
    pub tbar: Option<String>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// all | free | laser | volkov | eigenstate | transformed | rest-current
    #[arg(long)]
    pub suite: Option<String>,
    #[arg(long)]
    pub h: Option<f64>,
}

#[derive(Args, Debug)]
pub struct LifetimeArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub abar: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ColliderArgs {
    #[arg(long)]
    pub omega_over_m: Option<f64>,
    #[arg(long)]
    pub a0: Option<f64>,
    #[arg(long)]
    pub gamma0: Option<f64>,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[arg(long, value_enum)]
    pub field: Option<FieldArg>,
    #[arg(long)]
    pub a0: Option<f64>,
    #[arg(long)]
    pub omega_bar: Option<f64>,
    /// comma-separated list of laser phases
    #[arg(long)]
    pub xi: Option<String>,
}

// ---------------------------------------------------------------------------
// config file resolution
// ---------------------------------------------------------------------------

/// Flat `key = value` file; '#' starts a comment; keys match the long flags.
fn load_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Usage(format!("config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Usage(format!("config line {}: expected key = value", lineno + 1))
        })?;
        let key = k.trim().to_string();
        if map.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Usage(format!("config: duplicate key '{key}'")));
        }
    }
    Ok(map)
}

/// Resolves each option as flag-over-file and records the final value for
/// the sidecar echo; rejects file keys the active command does not accept.
struct Resolver {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
    allowed: Vec<&'static str>,
}

impl Resolver {
    fn new(file: BTreeMap<String, String>, allowed: &[&'static str]) -> Resolver {
        Resolver {
            file,
            resolved: BTreeMap::new(),
            allowed: allowed.to_vec(),
        }
    }

    fn check_keys(&self) -> Result<()> {
        for k in self.file.keys() {
            if !self.allowed.contains(&k.as_str()) {
                return Err(Error::Usage(format!(
                    "config: unknown key '{k}' (accepted: {})",
                    self.allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    fn opt<T: FromStr + ToString + Clone>(&mut self, flag: &Option<T>, key: &'static str) -> Result<Option<T>> {
        debug_assert!(self.allowed.contains(&key));
        let v = match flag {
            Some(v) => Some(v.clone()),
            None => match self.file.get(key) {
                Some(raw) => Some(raw.parse::<T>().map_err(|_| {
                    Error::Usage(format!("config: key '{key}' has unparsable value '{raw}'"))
                })?),
                None => None,
            },
        };
        if let Some(ref v) = v {
            self.resolved.insert(key.to_string(), v.to_string());
        }
        Ok(v)
    }

    fn req<T: FromStr + ToString + Clone>(&mut self, flag: &Option<T>, key: &'static str) -> Result<T> {
        self.opt(flag, key)?
            .ok_or_else(|| Error::Usage(format!("missing required value '{key}'")))
    }

    fn or_default<T: FromStr + ToString + Clone>(
        &mut self,
        flag: &Option<T>,
        key: &'static str,
        default: T,
    ) -> Result<T> {
        let v = self.opt(flag, key)?.unwrap_or(default);
        self.resolved.insert(key.to_string(), v.to_string());
        Ok(v)
    }
}

fn parse_list(raw: &str, key: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("'{key}': bad number '{s}'")))
        })
        .collect()
}

fn parse_window(raw: &str) -> Result<(f64, f64, f64, f64)> {
    let v = parse_list(raw, "window")?;
    if v.len() != 4 {
        return Err(Error::Usage("'window' needs 4 comma-separated numbers".into()));
    }
    Ok((v[0], v[1], v[2], v[3]))
}

fn parse_res(raw: &str) -> Result<(usize, usize)> {
    let parse_one = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| Error::Usage(format!("'res': bad integer '{s}'")))
    };
    match raw.split_once('x') {
        Some((a, b)) => Ok((parse_one(a)?, parse_one(b)?)),
        None => {
            let n = parse_one(raw)?;
            Ok((n, n))
        }
    }
}

/// Lab time with a unit tag: "1fs" (femtoseconds) or "3.5tc" (Compton
/// times); a bare number means femtoseconds.
fn parse_time_fs(raw: &str) -> Result<f64> {
    let s = raw.trim();
    let (num, scale) = if let Some(n) = s.strip_suffix("fs") {
        (n, 1.0)
    } else if let Some(n) = s.strip_suffix("tc") {
        (n, 1.0 / FS_PER_COMPTON)
    } else {
        (s, 1.0)
    };
    num.trim()
        .parse::<f64>()
        .map(|v| v * scale)
        .map_err(|_| Error::Usage(format!("bad time '{raw}' (use e.g. 1fs or 3.5tc)")))
}

fn require_packet_abar(abar: f64) -> Result<f64> {
    if abar > 0.0 {
        Ok(abar)
    } else {
        Err(Error::Usage(
            "packet commands require abar > 0 (the envelope provides the exponential damping)".into(),
        ))
    }
}

// ---------------------------------------------------------------------------
// output
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SidecarConventions {
    phi_sign: &'static str,
    component_order: &'static str,
    omega_sign: &'static str,
    lifetime_convention: &'static str,
}

const CONVENTIONS: SidecarConventions = SidecarConventions {
    phi_sign: "phase carries -i e^b phi_pos with phi_pos = +(1/(2 omega_bar)) int_0^xi (f1'^2+f2'^2); primed coords T-Phi, Z+Phi with Phi = -phi_pos",
    component_order: "F_minus_first (components 1 and 3 carry F-, F+)",
    omega_sign: "+1 (Omega = +alpha)",
    lifetime_convention: "reduced = (hbar/mc^2)(alpha^2-abar^2)/(2 abar); the quoted femtosecond numbers match 2*pi*reduced; both are always reported",
};

#[derive(Serialize)]
struct MaskStats {
    cells: usize,
    masked: usize,
}

#[derive(Serialize)]
struct Sidecar {
    command: String,
    config: BTreeMap<String, String>,
    seed: u64,
    unit_system: String,
    conventions: SidecarConventions,
    normalization_constant: f64,
    mask_stats: MaskStats,
    results: serde_json::Value,
}

fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, content).map_err(|e| Error::Io(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

/// CSV rows are "coord1,coord2,value,mask"; the per-command meaning of the
/// coordinate columns is documented in the repository README.
fn csv_from_rows(rows: &[(f64, f64, f64, bool)]) -> String {
    let mut out = String::from("coord1,coord2,value,mask\n");
    for &(c1, c2, v, m) in rows {
        let _ = writeln!(out, "{c1:.17e},{c2:.17e},{v:.17e},{}", u8::from(m));
    }
    out
}

fn grid_rows(grid: &DensityGrid) -> Vec<(f64, f64, f64, bool)> {
    let mut rows = Vec::with_capacity(grid.values.len());
    for (i2, &c2) in grid.axis2.iter().enumerate() {
        for (i1, &c1) in grid.axis1.iter().enumerate() {
            rows.push((c1, c2, grid.value(i1, i2), grid.masked(i1, i2)));
        }
    }
    rows
}

struct Emission {
    rows: Option<Vec<(f64, f64, f64, bool)>>,
    mask_stats: MaskStats,
    normalization_constant: f64,
    results: serde_json::Value,
    stdout: String,
}

fn emit(cli: &Cli, command: &str, config: BTreeMap<String, String>, em: Emission) -> Result<()> {
    print!("{}", em.stdout);
    if let Some(path) = &cli.output {
        let rows = em.rows.unwrap_or_default();
        write_atomic(path, &csv_from_rows(&rows))?;
        let sidecar = Sidecar {
            command: command.to_string(),
            config,
            seed: cli.seed.unwrap_or(0),
            unit_system: match cli.unit_system.unwrap_or(UnitSystem::Compton) {
                UnitSystem::Compton => "compton".to_string(),
                UnitSystem::SiMixed => "si-mixed".to_string(),
            },
            conventions: CONVENTIONS,
            normalization_constant: em.normalization_constant,
            mask_stats: em.mask_stats,
            results: em.results,
        };
        let json = serde_json::to_string_pretty(&sidecar)
            .map_err(|e| Error::Io(format!("sidecar: {e}")))?;
        write_atomic(&path.with_extension("json"), &(json + "\n"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// subcommand runners
// ---------------------------------------------------------------------------

fn profile_from(field: FieldArg, a0: Option<f64>, omega_bar: Option<f64>) -> Result<Option<FieldProfile>> {
    match field {
        FieldArg::Off => Ok(None),
        _ => {
            let a0 = a0.ok_or_else(|| Error::Usage("field on: missing 'a0'".into()))?;
            let ob = omega_bar.ok_or_else(|| Error::Usage("field on: missing 'omega-bar'".into()))?;
            if a0 <= 0.0 || ob <= 0.0 {
                return Err(Error::Usage("field: a0 and omega-bar must be positive".into()));
            }
            Ok(Some(match field {
                FieldArg::Linear => FieldProfile::linear(a0, ob),
                FieldArg::Circular => FieldProfile::circular(a0, ob),
                FieldArg::Off => unreachable!(),
            }))
        }
    }
}

fn run_density(cli: &Cli, args: &DensityArgs, file: BTreeMap<String, String>) -> Result<()> {
    let mut r = Resolver::new(
        file,
        &["alpha", "abar", "state", "frame", "window", "res", "field", "a0", "omega-bar", "normalize"],
    );
    r.check_keys()?;
    let alpha = r.req(&args.alpha, "alpha")?;
    let abar = r.req(&args.abar, "abar")?;
    let state_s = r.or_default(&args.state.map(|s| format!("{s:?}").to_lowercase()), "state", "free".into())?;
    let frame_s = r.or_default(&args.frame.map(|s| format!("{s:?}").to_lowercase()), "frame", "lab".into())?;
    let window = parse_window(&r.req(&args.window, "window")?)?;
    let res = parse_res(&r.or_default(&args.res, "res", "200".into())?)?;
    let field_s = r.or_default(&args.field.map(|s| format!("{s:?}").to_lowercase()), "field", "off".into())?;
    let a0 = r.opt(&args.a0, "a0")?;
    let omega_bar = r.opt(&args.omega_bar, "omega-bar")?;
    let norm_s = r.or_default(&args.normalize.map(|s| format!("{s:?}").to_lowercase()), "normalize", "raw".into())?;

    let kind = match state_s.as_str() {
        "free" => StateKind::Free,
        "laser" => StateKind::Laser,
        "eigenstate" => StateKind::RindlerEigenstate,
        other => return Err(Error::Usage(format!("unknown state '{other}'"))),
    };
    let frame = match frame_s.as_str() {
        "lab" => Frame::Lab,
        "rindler" => Frame::Rindler,
        other => return Err(Error::Usage(format!("unknown frame '{other}'"))),
    };
    let field = match field_s.as_str() {
        "off" => FieldArg::Off,
        "linear" => FieldArg::Linear,
        "circular" => FieldArg::Circular,
        other => return Err(Error::Usage(format!("unknown field '{other}'"))),
    };
    let normalization = match norm_s.as_str() {
        "raw" => Normalization::Raw,
        "unit" => Normalization::UnitIntegral,
        other => return Err(Error::Usage(format!("unknown normalize '{other}'"))),
    };
    if kind != StateKind::RindlerEigenstate {
        require_packet_abar(abar)?;
    }
    let profile = profile_from(field, a0, omega_bar)?;
    if kind == StateKind::Laser && profile.is_none() {
        return Err(Error::Usage("state laser requires a field (linear|circular)".into()));
    }

    let params = PacketParams::new(alpha, abar);
    let grid = density_grid(
        kind,
        frame,
        &params,
        profile.as_ref(),
        window,
        res,
        normalization,
        &QuadratureSpec::default(),
    )?;
    let masked = grid.masked_count();
    let stdout = format!(
        "density: {}x{} grid, {} masked cells, norm constant {:.6e}\n",
        res.0,
        res.1,
        masked,
        grid.norm_constant
    );
    emit(
        cli,
        "density",
        r.resolved.clone(),
        Emission {
            mask_stats: MaskStats {
                cells: grid.values.len(),
                masked,
            },
            normalization_constant: grid.norm_constant,
            results: serde_json::json!({ "masked_cells": masked }),
            rows: Some(grid_rows(&grid)),
            stdout,
        },
    )
}

fn run_asymmetry(cli: &Cli, args: &AsymmetryArgs, file: BTreeMap<String, String>) -> Result<()> {
    let mut r = Resolver::new(file, &["alpha", "abar", "t"]);
    r.check_keys()?;
    let alpha = r.req(&args.alpha, "alpha")?;
    let abars = parse_list(&r.req(&args.abar, "abar")?, "abar")?;
    let t_fs = parse_time_fs(&r.or_default(&args.t, "t", "1fs".into())?)?;
    let spec = QuadratureSpec::default();
    let mut rows = Vec::new();
    let mut stdout = String::new();
    let mut values = Vec::new();
    for &abar in &abars {
        require_packet_abar(abar)?;
        let a = asymmetry(&PacketParams::new(alpha, abar), t_fs, &spec)?;
        let _ = writeln!(stdout, "asymmetry(alpha={alpha}, abar={abar}, t={t_fs} fs) = {a:.12}");
        rows.push((abar, t_fs, a, false));
        values.push(a);
    }
    emit(
        cli,
        "asymmetry",
        r.resolved.clone(),
        Emission {
            mask_stats: MaskStats { cells: rows.len(), masked: 0 },
            normalization_constant: 1.0,
            results: serde_json::json!({ "abar": abars, "asymmetry": values }),
            rows: Some(rows),
            stdout,
        },
    )
}

fn run_variance(cli: &Cli, args: &VarianceArgs, file: BTreeMap<String, String>) -> Result<()> {
    let mut r = Resolver::new(file, &["alpha", "abar", "tbar"]);
    r.check_keys()?;
    let alpha = r.req(&args.alpha, "alpha")?;
    let abar = require_packet_abar(r.req(&args.abar, "abar")?)?;
    let tbars = parse_list(&r.or_default(&args.tbar, "tbar", "0".into())?, "tbar")?;
    let params = PacketParams::new(alpha, abar);
    let spec = QuadratureSpec::default();
    let mut rows = Vec::new();
    let mut stdout = String::new();
    let mut out = Vec::new();
    for &tbar in &tbars {
        let v = variance_z_closed(&params, tbar, &spec)?;
        let _ = writeln!(
            stdout,
            "variance(tbar={tbar}): <Z> = {:.12e}, <Z^2> = {:.12e}, delta2 = {:.12e}",
            v.mean, v.second_moment, v.delta2
        );
        // coord2 indexes the moment: 0 mean, 1 second moment, 2 delta2
        rows.push((tbar, 0.0, v.mean, false));
        rows.push((tbar, 1.0, v.second_moment, false));
        rows.push((tbar, 2.0, v.delta2, false));
        out.push(serde_json::json!({
            "tbar": tbar, "mean": v.mean, "second_moment": v.second_moment, "delta2": v.delta2
        }));
    }
    emit(
        cli,
        "variance",
        r.resolved.clone(),
        Emission {
            mask_stats: MaskStats { cells: rows.len(), masked: 0 },
            normalization_constant: 1.0,
            results: serde_json::Value::Array(out),
            rows: Some(rows),
            stdout,
        },
    )
}

fn run_lifetime(cli: &Cli, args: &LifetimeArgs, file: BTreeMap<String, String>) -> Result<()> {
    let mut r = Resolver::new(file, &["alpha", "abar"]);
    r.check_keys()?;
    let alpha = r.req(&args.alpha, "alpha")?;
    let abar = require_packet_abar(r.req(&args.abar, "abar")?)?;
    let l = lifetime(&PacketParams::new(alpha, abar))?;
    let stdout = format!(
        "lifetime(alpha={alpha}, abar={abar}):\n  reduced convention: {:.6e} s\n  2*pi convention:    {:.6e} s\n",
        l.t_reduced_s, l.t_paper_s
    );
    emit(
        cli,
        "lifetime",
        r.resolved.clone(),
        Emission {
            mask_stats: MaskStats { cells: 2, masked: 0 },
            normalization_constant: 1.0,
            results: serde_json::json!({
                "t_reduced_s": l.t_reduced_s,
                "t_2pi_s": l.t_paper_s,
                "note": "the two conventions differ by exactly 2*pi; the quoted femtosecond numbers follow the 2*pi convention"
            }),
            rows: Some(vec![(alpha, abar, l.t_reduced_s, false), (alpha, abar, l.t_paper_s, false)]),
            stdout,
        },
    )
}

fn run_collider(cli: &Cli, args: &ColliderArgs, file: BTreeMap<String, String>) -> Result<()> {
    let mut r = Resolver::new(file, &["omega-over-m", "a0", "gamma0"]);
    r.check_keys()?;
    let om = r.req(&args.omega_over_m, "omega-over-m")?;
    let a0 = r.req(&args.a0, "a0")?;
    let gamma0 = r.opt(&args.gamma0, "gamma0")?;
    let c = collider_estimates(om, a0, gamma0)?;
    let stdout = format!(
        "collider(omega/m={om:e}, a0={a0}, gamma0={}):\n  \
         gamma_rf            = {:.4}\n  \
         Omega0              = {:.4} GeV\n  \
         recollision (T/g)   = {:.4e} s\n  \
         recollision (T/2g)  = {:.4e} s\n  \
         leak time           = {:.4e} s\n  \
         rad. react. frac.   = {:.5}\n",
        gamma0.unwrap_or(1e3),
        c.gamma_rf,
        c.omega0_gev,
        c.recollision_time_s,
        c.recollision_time_half_s,
        c.leak_time_s,
        c.rr_fraction
    );
    emit(
        cli,
        "collider",
        r.resolved.clone(),
        Emission {
            mask_stats: MaskStats { cells: 6, masked: 0 },
            normalization_constant: 1.0,
            results: serde_json::json!({
                "gamma_rf": c.gamma_rf,
                "omega0_gev": c.omega0_gev,
                "recollision_time_s": c.recollision_time_s,
                "recollision_time_half_s": c.recollision_time_half_s,
                "leak_time_s": c.leak_time_s,
                "rr_fraction": c.rr_fraction
            }),
            rows: Some(vec![
                (0.0, 0.0, c.gamma_rf, false),
                (1.0, 0.0, c.omega0_gev, false),
                (2.0, 0.0, c.recollision_time_s, false),
                (3.0, 0.0, c.recollision_time_half_s, false),
                (4.0, 0.0, c.leak_time_s, false),
                (5.0, 0.0, c.rr_fraction, false),
            ]),
            stdout,
        },
    )
}

fn run_decompose(cli: &Cli, args: &DecomposeArgs, file: BTreeMap<String, String>) -> Result<()> {
    let mut r = Resolver::new(file, &["field", "a0", "omega-bar", "xi"]);
    r.check_keys()?;
    let field_s = r.or_default(&args.field.map(|s| format!("{s:?}").to_lowercase()), "field", "linear".into())?;
    let field = match field_s.as_str() {
        "linear" => FieldArg::Linear,
        "circular" => FieldArg::Circular,
        other => return Err(Error::Usage(format!("decompose: field must be linear|circular, got '{other}'"))),
    };
    let a0 = r.opt(&args.a0, "a0")?;
    let omega_bar = r.opt(&args.omega_bar, "omega-bar")?;
    let profile = profile_from(field, a0, omega_bar)?.expect("field is on");
    let xis = parse_list(&r.req(&args.xi, "xi")?, "xi")?;
    let mut rows = Vec::new();
    let mut stdout = String::new();
    for &xi in &xis {
        let d = decompose_boost_rotation(&profile, xi)?;
        let _ = writeln!(
            stdout,
            "xi={xi}: theta = {:.12e}, w = {:.12e}, V = ({:.6e}, {:.6e}, {:.6e})",
            d.theta, d.w, d.v[0], d.v[1], d.v[2]
        );
        // coord2 indexes the component: 0 theta, 1 w, 2..4 rotation axis V
        rows.push((xi, 0.0, d.theta, false));
        rows.push((xi, 1.0, d.w, false));
        for (k, &vk) in d.v.iter().enumerate() {
            rows.push((xi, 2.0 + k as f64, vk, false));
        }
    }
    emit(
        cli,
        "decompose",
        r.resolved.clone(),
        Emission {
            mask_stats: MaskStats { cells: rows.len(), masked: 0 },
            normalization_constant: 1.0,
            results: serde_json::json!({ "xi": xis }),
            rows: Some(rows),
            stdout,
        },
    )
}

// ---------------------------------------------------------------------------
// verify suite
// ---------------------------------------------------------------------------

struct Gate {
    name: &'static str,
    report: Result<ResidualReport>,
    gate: f64,
}

fn verify_gates(suite: &str, h: f64, spec: &QuadratureSpec) -> Result<Vec<Gate>> {
    let mut gates = Vec::new();
    let all = suite == "all";
    if all || suite == "free" {
        let p = PacketParams::new(2.0, 1.0);
        for (t, z) in [(0.3, 2.0), (2.0, 0.5)] {
            gates.push(Gate {
                name: "free packet",
                report: residual_free(&p, &SpacetimePoint::new(t, z), h, spec),
                gate: 1e-6,
            });
        }
    }
    if all || suite == "eigenstate" {
        for (om, eta, u) in [(0.0, 0.3, 2.0), (3.0, 0.2, 14.0), (5.0, -0.4, 36.0)] {
            gates.push(Gate {
                name: "wedge eigenstate",
                report: residual_rindler(om, &RindlerPoint::new(eta, u), h, spec),
                gate: 1e-6,
            });
        }
    }
    if all || suite == "volkov" {
        let p = PacketParams::new(2.0, 1.0);
        for prof in [FieldProfile::linear(0.3, 0.2), FieldProfile::circular(0.3, 0.2)] {
            for b in [-1.0, 0.0, 1.0] {
                gates.push(Gate {
                    name: "volkov",
                    report: residual_planewave(Some(b), &p, &prof, &SpacetimePoint::new(0.6, 1.7), h, spec),
                    gate: 1e-6,
                });
            }
        }
    }
    if all || suite == "laser" {
        let p = PacketParams::new(2.0, 1.0);
        let prof = FieldProfile::circular(0.3, 0.2);
        for (t, z) in [(0.6, 1.7), (1.5, 0.2)] {
            gates.push(Gate {
                name: "laser packet",
                report: residual_planewave(None, &p, &prof, &SpacetimePoint::new(t, z), h, spec),
                gate: 1e-6,
            });
        }
    }
    if all || suite == "transformed" {
        let p = PacketParams::new(1.5, 0.6);
        let prof = FieldProfile::circular(0.9, 0.4);
        for (t, z) in [(0.8, 2.3), (0.2, 1.1)] {
            gates.push(Gate {
                name: "transformed frame",
                report: residual_transformed(&p, &prof, &SpacetimePoint::new(t, z), h, spec),
                gate: 1e-4,
            });
        }
    }
    if gates.is_empty() && suite != "rest-current" {
        return Err(Error::Usage(format!(
            "unknown suite '{suite}' (all|free|laser|volkov|eigenstate|transformed|rest-current)"
        )));
    }
    Ok(gates)
}

/// Spatial-to-temporal current ratio of the rest-frame spinor at seeded
/// random points; returns (checked, worst ratio).
fn rest_current_check(seed: u64, n: usize, spec: &QuadratureSpec) -> Result<(usize, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = PacketParams::new(2.0, 1.0);
    let prof_on = FieldProfile::circular(0.6, 0.3);
    let prof_off = FieldProfile::off();
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut attempts = 0;
    while checked < n {
        attempts += 1;
        if attempts > 20 * n {
            return Err(Error::Coverage("rest-current: too many masked samples".into()));
        }
        let t: f64 = rng.gen_range(-2.0..2.0);
        let z: f64 = rng.gen_range(-3.0..3.0);
        let on = attempts % 2 == 0;
        let prof = if on { &prof_on } else { &prof_off };
        let psi = match rest_frame_spinor(&params, prof, &SpacetimePoint::new(t, z), spec) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let j = current(&psi);
        if j.t == 0.0 {
            continue;
        }
        let spatial = (j.x * j.x + j.y * j.y + j.z * j.z).sqrt();
        worst = worst.max(spatial / j.t);
        checked += 1;
    }
    Ok((checked, worst))
}

fn run_verify(cli: &Cli, args: &VerifyArgs, file: BTreeMap<String, String>) -> Result<i32> {
    let mut r = Resolver::new(file, &["suite", "h"]);
    r.check_keys()?;
    let suite = r.or_default(&args.suite, "suite", "all".into())?;
    let h = r.or_default(&args.h, "h", 1e-3)?;
    let spec = QuadratureSpec::default();
    let gates = verify_gates(&suite, h, &spec)?;
    let mut failed = 0usize;
    let mut stdout = String::new();
    let _ = writeln!(
        stdout,
        "{:<20} {:>18} {:>12} {:>7} {:>9} {:>6}",
        "gate", "point", "residual", "order", "limit", "pass"
    );
    let mut rows = Vec::new();
    for g in &gates {
        match &g.report {
            Ok(rep) => {
                let ok = rep.residual_norm < g.gate;
                if !ok {
                    failed += 1;
                }
                let _ = writeln!(
                    stdout,
                    "{:<20} ({:>7.3},{:>7.3}) {:>12.3e} {:>7.2} {:>9.0e} {:>6}",
                    g.name, rep.point.0, rep.point.1, rep.residual_norm, rep.order_estimate, g.gate,
                    if ok { "yes" } else { "NO" }
                );
                rows.push((rep.point.0, rep.point.1, rep.residual_norm, !ok));
            }
            Err(e) => {
                failed += 1;
                let _ = writeln!(stdout, "{:<20} failed to evaluate: {e}", g.name);
            }
        }
    }
    if suite == "all" || suite == "rest-current" {
        let (checked, worst) = rest_current_check(cli.seed.unwrap_or(0), 100, &spec)?;
        let ok = worst < 1e-8;
        if !ok {
            failed += 1;
        }
        let _ = writeln!(
            stdout,
            "{:<20} {checked} random points        {worst:>12.3e}            1e-8 {:>6}",
            "rest current",
            if ok { "yes" } else { "NO" }
        );
    }
    emit(
        cli,
        "verify",
        r.resolved.clone(),
        Emission {
            mask_stats: MaskStats { cells: rows.len(), masked: 0 },
            normalization_constant: 1.0,
            results: serde_json::json!({ "failed_gates": failed }),
            rows: Some(rows),
            stdout,
        },
    )?;
    Ok(if failed == 0 { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// entry point
// ---------------------------------------------------------------------------

fn dispatch(cli: &Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Usage("threads must be >= 1".into()));
        }
        // ignore the error if a global pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let file = match &cli.config {
        Some(p) => load_config(p)?,
        None => BTreeMap::new(),
    };
    match &cli.command {
        Command::Density(a) => run_density(cli, a, file).map(|()| 0),
        Command::Asymmetry(a) => run_asymmetry(cli, a, file).map(|()| 0),
        Command::Variance(a) => run_variance(cli, a, file).map(|()| 0),
        Command::Lifetime(a) => run_lifetime(cli, a, file).map(|()| 0),
        Command::Collider(a) => run_collider(cli, a, file).map(|()| 0),
        Command::Decompose(a) => run_decompose(cli, a, file).map(|()| 0),
        Command::Verify(a) => run_verify(cli, a, file),
    }
}

/// Full CLI entry: parses argv, runs, maps errors onto the exit contract.
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version with success exit
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e @ Error::Usage(_)) => {
            eprintln!("{e}");
            2
        }
        Err(e) => {
            eprintln!("{e}");
            1
        }
    }
}
