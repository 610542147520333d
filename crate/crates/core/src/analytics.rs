//! Derived observables: density grids with fringe detection, frame-norm
//! asymmetry, position variances (closed-form and quadrature moments),
//! large-eta asymptotics, packet lifetime, and the collider feasibility
//! calculator.

use crate::algebra::ETA;
use crate::error::{Error, Result};
use crate::fields::{rindler_from_lab, FieldProfile, RindlerPoint, SpacetimePoint};
use crate::quad::adaptive_gk_real;
use crate::specfun::{bessel_k, struve_l, ComplexOrder, QuadratureSpec};
use crate::states::{
    f_pm, f_pm_rindler, laser_nonspreading, rindler_eigenstate, PacketParams,
};
use crate::{ALPHA_FS, COMPTON_TIME_S, ELECTRON_MASS_MEV};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// femtoseconds -> Compton time units
pub const FS_PER_COMPTON: f64 = 1.0e-15 / COMPTON_TIME_S;

// ---------------------------------------------------------------------------
// pointwise densities
// ---------------------------------------------------------------------------

/// Lab-frame density of the free packet, parametrized by wedge coordinates
/// (cancellation-free at large eta where T and Z individually explode).
pub fn lab_density_rindler(
    params: &PacketParams,
    rp: &RindlerPoint,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let fm = f_pm_rindler(params.alpha, params.abar, rp.eta, rp.ubar, -1.0, spec)?;
    let fp = f_pm_rindler(params.alpha, params.abar, rp.eta, rp.ubar, 1.0, spec)?;
    Ok(fm.norm_sqr() + fp.norm_sqr())
}

/// Rest-frame density 2 |F- F+|: the boost e^{eta'} and the field factor
/// cancel exactly, leaving the geometric mean of the two components.
pub fn rest_density(
    params: &PacketParams,
    rp: &RindlerPoint,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let fm = f_pm_rindler(params.alpha, params.abar, rp.eta, rp.ubar, -1.0, spec)?;
    let fp = f_pm_rindler(params.alpha, params.abar, rp.eta, rp.ubar, 1.0, spec)?;
    Ok(2.0 * (fm * fp).norm())
}

/// ln of the rest-frame density: the product |F- F+| underflows f64 deep in
/// the wedge even when the factors are representable, so sum the logs.
pub fn rest_log_density(
    params: &PacketParams,
    rp: &RindlerPoint,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let fm = f_pm_rindler(params.alpha, params.abar, rp.eta, rp.ubar, -1.0, spec)?;
    let fp = f_pm_rindler(params.alpha, params.abar, rp.eta, rp.ubar, 1.0, spec)?;
    if fm.norm() == 0.0 || fp.norm() == 0.0 {
        return Err(Error::Range("rest_log_density: component underflowed".into()));
    }
    Ok(2f64.ln() + fm.norm().ln() + fp.norm().ln())
}

/// Lab-frame density of the free packet at a lab point.
pub fn lab_density(
    params: &PacketParams,
    point: &SpacetimePoint,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let fm = f_pm(params.alpha, params.abar, point.tbar, point.zbar, -1.0, spec)?;
    let fp = f_pm(params.alpha, params.abar, point.tbar, point.zbar, 1.0, spec)?;
    Ok(fm.norm_sqr() + fp.norm_sqr())
}

// ---------------------------------------------------------------------------
// density grids and fringe detection
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Free,
    Laser,
    RindlerEigenstate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Lab,
    Rindler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    UnitIntegral,
    Raw,
}

/// Sampled probability density.  Lab frame: axis1 = Zbar (columns), axis2 =
/// Tbar (rows).  Rindler frame: axis1 = ubar, axis2 = eta.  `values` is
/// row-major over (axis2, axis1); `mask[k]` true marks cells that could not
/// be evaluated (light-cone band, wedge exterior, underflowed quadrature).
#[derive(Debug, Clone)]
pub struct DensityGrid {
    pub frame: Frame,
    pub axis1: Vec<f64>,
    pub axis2: Vec<f64>,
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
    pub normalization: Normalization,
    /// divisor applied to reach the stored values (1.0 for raw)
    pub norm_constant: f64,
}

impl DensityGrid {
    pub fn value(&self, i1: usize, i2: usize) -> f64 {
        self.values[i2 * self.axis1.len() + i1]
    }
    pub fn masked(&self, i1: usize, i2: usize) -> bool {
        self.mask[i2 * self.axis1.len() + i1]
    }
    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

pub fn density_grid(
    kind: StateKind,
    frame: Frame,
    params: &PacketParams,
    profile: Option<&FieldProfile>,
    window: (f64, f64, f64, f64),
    res: (usize, usize),
    normalization: Normalization,
    spec: &QuadratureSpec,
) -> Result<DensityGrid> {
    let (a1_lo, a1_hi, a2_lo, a2_hi) = window;
    if !(a1_hi > a1_lo) || !(a2_hi > a2_lo) || res.0 < 2 || res.1 < 2 {
        return Err(Error::Domain("density_grid: degenerate window".into()));
    }
    if kind == StateKind::Laser && profile.is_none() {
        return Err(Error::Domain("density_grid: laser state needs a field".into()));
    }
    let axis1 = linspace(a1_lo, a1_hi, res.0);
    let axis2 = linspace(a2_lo, a2_hi, res.1);
    let eval = |c1: f64, c2: f64| -> Result<f64> {
        match (frame, kind) {
            (Frame::Lab, StateKind::Free) => {
                lab_density(params, &SpacetimePoint::new(c2, c1), spec)
            }
            (Frame::Lab, StateKind::Laser) => {
                let s = laser_nonspreading(
                    params,
                    profile.expect("checked"),
                    &SpacetimePoint::new(c2, c1),
                    spec,
                )?;
                Ok(s.density())
            }
            (Frame::Lab, StateKind::RindlerEigenstate) => {
                let rp = rindler_from_lab(&SpacetimePoint::new(c2, c1))?;
                Ok(rindler_eigenstate(params.omega, &rp, spec)?.density())
            }
            // the rest-frame field factor is unit-triangular and drops out
            // of the density, so free and laser share the rest evaluator
            (Frame::Rindler, StateKind::Free) | (Frame::Rindler, StateKind::Laser) => {
                rest_density(params, &RindlerPoint::new(c2, c1), spec)
            }
            (Frame::Rindler, StateKind::RindlerEigenstate) => {
                Ok(rindler_eigenstate(params.omega, &RindlerPoint::new(c2, c1), spec)?.density())
            }
        }
    };
    let rows: Vec<Vec<(f64, bool)>> = axis2
        .par_iter()
        .map(|&c2| {
            axis1
                .iter()
                .map(|&c1| match eval(c1, c2) {
                    Ok(v) => (v, false),
                    Err(_) => (0.0, true),
                })
                .collect()
        })
        .collect();
    let mut values = Vec::with_capacity(res.0 * res.1);
    let mut mask = Vec::with_capacity(res.0 * res.1);
    for row in rows {
        for (v, m) in row {
            values.push(v);
            mask.push(m);
        }
    }
    if mask.iter().all(|&m| m) {
        return Err(Error::Coverage("density_grid: window fully masked".into()));
    }
    let mut norm_constant = 1.0;
    if normalization == Normalization::UnitIntegral {
        let d1 = (a1_hi - a1_lo) / (res.0 - 1) as f64;
        let d2 = (a2_hi - a2_lo) / (res.1 - 1) as f64;
        let total: f64 = values
            .iter()
            .zip(mask.iter())
            .filter(|(_, &m)| !m)
            .map(|(v, _)| v)
            .sum::<f64>()
            * d1
            * d2;
        if total > 0.0 {
            norm_constant = total;
            for v in &mut values {
                *v /= total;
            }
        }
    }
    Ok(DensityGrid {
        frame,
        axis1,
        axis2,
        values,
        mask,
        normalization,
        norm_constant,
    })
}

/// Fringe structure of one lab-frame grid row (fixed Tbar).
#[derive(Debug, Clone)]
pub struct FringeRow {
    pub tbar: f64,
    /// refined positions of density maxima outside the light cone, as
    /// ubar = sqrt(Z^2 - T^2)
    pub maxima_u: Vec<f64>,
    /// mean (max-min)/(max+min) over adjacent extremum pairs outside the cone
    pub contrast: f64,
    /// count of comparably prominent maxima strictly inside the cone
    pub inside_maxima: usize,
}

fn local_extrema(z: &[f64], v: &[f64]) -> (Vec<(f64, f64)>, Vec<f64>) {
    // returns (refined maxima (z*, value), minima values) over the slice
    let mut maxima = Vec::new();
    let mut minima = Vec::new();
    for j in 1..z.len().saturating_sub(1) {
        if v[j] > v[j - 1] && v[j] >= v[j + 1] {
            let denom = v[j - 1] - 2.0 * v[j] + v[j + 1];
            let dz = z[1] - z[0];
            let off = if denom.abs() > 0.0 {
                (0.5 * (v[j - 1] - v[j + 1]) / denom).clamp(-0.5, 0.5)
            } else {
                0.0
            };
            maxima.push((z[j] + off * dz, v[j]));
        }
        if v[j] < v[j - 1] && v[j] <= v[j + 1] {
            minima.push(v[j]);
        }
    }
    (maxima, minima)
}

/// Scan each row of a lab grid for fringes; maxima closer than `u_floor` to
/// the light cone are discarded (sub-cell fringe spacing there).
pub fn fringe_rows(grid: &DensityGrid, u_floor: f64) -> Result<Vec<FringeRow>> {
    if grid.frame != Frame::Lab {
        return Err(Error::Domain("fringe_rows: lab grids only".into()));
    }
    let n1 = grid.axis1.len();
    let dz = grid.axis1[1] - grid.axis1[0];
    let mut out = Vec::new();
    for (i2, &t) in grid.axis2.iter().enumerate() {
        let row: Vec<f64> = (0..n1).map(|i1| grid.value(i1, i2)).collect();
        // outside-cone region with ubar above the floor; the prominence
        // floor is relative to this region's own peak — the near-cone body
        // of the packet sits many decades above the exterior fringes
        let z_out = (t * t + u_floor * u_floor).sqrt() + 2.0 * dz;
        let out_idx: Vec<usize> = (0..n1)
            .filter(|&i| grid.axis1[i] > z_out && !grid.masked(i, i2))
            .collect();
        let (mut maxima_u, mut contrast) = (Vec::new(), 0.0);
        if out_idx.len() >= 5 {
            let zs: Vec<f64> = out_idx.iter().map(|&i| grid.axis1[i]).collect();
            let vs: Vec<f64> = out_idx.iter().map(|&i| row[i]).collect();
            let region_max = vs.iter().cloned().fold(0.0f64, f64::max);
            let (maxima, minima) = local_extrema(&zs, &vs);
            let sig: Vec<&(f64, f64)> = maxima
                .iter()
                .filter(|(_, v)| *v > 1e-6 * region_max)
                .collect();
            maxima_u = sig
                .iter()
                .map(|(z, _)| (z * z - t * t).max(0.0).sqrt())
                .collect();
            // pair each max with the deepest neighboring min for contrast
            let mut cs = Vec::new();
            for (k, (_, vmax)) in sig.iter().enumerate() {
                if k < minima.len() {
                    let vmin = minima[k];
                    if vmax + vmin > 0.0 {
                        cs.push((vmax - vmin) / (vmax + vmin));
                    }
                }
            }
            if !cs.is_empty() {
                contrast = cs.iter().sum::<f64>() / cs.len() as f64;
            }
        }
        // inside-cone maxima (|Z| < T), comparable prominence
        let z_in = (t - 2.0 * dz).max(0.0);
        let in_idx: Vec<usize> = (0..n1)
            .filter(|&i| grid.axis1[i] < z_in && !grid.masked(i, i2))
            .collect();
        let mut inside_maxima = 0;
        if in_idx.len() >= 5 {
            let zs: Vec<f64> = in_idx.iter().map(|&i| grid.axis1[i]).collect();
            let vs: Vec<f64> = in_idx.iter().map(|&i| row[i]).collect();
            let inside_max = vs.iter().cloned().fold(0.0f64, f64::max);
            let (maxima, _) = local_extrema(&zs, &vs);
            inside_maxima = maxima
                .iter()
                .filter(|(_, v)| *v > 1e-6 * inside_max)
                .count();
        }
        out.push(FringeRow {
            tbar: t,
            maxima_u,
            contrast,
            inside_maxima,
        });
    }
    Ok(out)
}

/// Worst fringe drift between adjacent rows, in units of one grid cell
/// mapped through the hyperbola (a fringe at fixed ubar moves by
/// dZ = du * Z/u, so one Z-cell corresponds to du = dz * u/Z).
pub fn fringe_alignment_dev(rows: &[FringeRow], dz: f64) -> f64 {
    let mut worst = 0.0f64;
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        for &u in &a.maxima_u {
            // nearest fringe in the next row
            if let Some(&u2) = b
                .maxima_u
                .iter()
                .min_by(|x, y| (*x - u).abs().partial_cmp(&(*y - u).abs()).unwrap())
            {
                let z = (u * u + b.tbar * b.tbar).sqrt();
                let cell_u = dz * u / z;
                let dev = (u2 - u).abs() / cell_u.max(1e-300);
                // unmatched fringes (entering/leaving the window) excluded
                if dev < 5.0 {
                    worst = worst.max(dev);
                }
            }
        }
    }
    worst
}

// ---------------------------------------------------------------------------
// frame norms and asymmetry
// ---------------------------------------------------------------------------

fn u_splits(abar: f64) -> Vec<f64> {
    // the density plateaus below u ~ abar/alpha (the prefactor phase gives
    // e^{-2 alpha u / abar} decay), so the panels must reach u = 0
    let lo = abar.ln() - 12.0;
    let mut v = vec![0.0];
    v.extend((0..=48).map(|i| (lo - lo * i as f64 / 48.0).exp()));
    v.extend_from_slice(&[2.0, 5.0, 15.0, 40.0, 90.0]);
    v
}

fn z_splits(abar: f64, tbar: f64) -> Vec<f64> {
    let lo = abar.ln() - 6.0;
    let hi = (tbar.abs() + 80.0).ln();
    let pos: Vec<f64> = (0..=60)
        .map(|i| (lo + (hi - lo) * i as f64 / 60.0).exp())
        .collect();
    let mut v: Vec<f64> = pos.iter().map(|&x| -x).rev().collect();
    v.extend(pos);
    v
}

/// Rest-frame norm at fixed eta: int_0^inf du 2|F- F+|.
pub fn rest_norm(params: &PacketParams, eta: f64, spec: &QuadratureSpec) -> Result<f64> {
    let f = |u: f64| rest_density(params, &RindlerPoint::new(eta, u), spec).unwrap_or(0.0);
    let (v, _) = adaptive_gk_real(&f, &u_splits(params.abar), 1e-300, 1e-8, 4000)?;
    Ok(v)
}

/// Lab-frame norm at fixed Tbar: int dZ (|F-|^2 + |F+|^2).  Conserved in
/// time; equals 8 pi K_0(2 abar) (checked against quadrature in tests).
pub fn lab_norm(params: &PacketParams, tbar: f64, spec: &QuadratureSpec) -> Result<f64> {
    let f = |z: f64| lab_density(params, &SpacetimePoint::new(tbar, z), spec).unwrap_or(0.0);
    let (v, _) = adaptive_gk_real(&f, &z_splits(params.abar, tbar), 1e-300, 1e-8, 4000)?;
    Ok(v)
}

/// Wedge time reached at lab time Tbar along the packet's central
/// hyperbola u = alpha: sinh(eta) = Tbar / alpha.
pub fn eta_at_lab_time(alpha: f64, tbar: f64) -> f64 {
    (tbar / alpha).asinh()
}

/// Norm asymmetry between the frames at lab time T (femtoseconds), each
/// norm normalized to its own T = 0 value; the lab norm is conserved
/// exactly, so only the rest-frame ratio is integrated.
pub fn asymmetry(params: &PacketParams, t_lab_fs: f64, spec: &QuadratureSpec) -> Result<f64> {
    if params.abar <= 0.0 {
        return Err(Error::Domain("asymmetry: abar must be positive".into()));
    }
    let tbar = t_lab_fs * FS_PER_COMPTON;
    let eta = eta_at_lab_time(params.alpha, tbar);
    let r0 = rest_norm(params, 0.0, spec)?;
    let rt = rest_norm(params, eta, spec)?;
    if r0 <= 0.0 {
        return Err(Error::Range("asymmetry: rest norm underflowed".into()));
    }
    let rhat = rt / r0;
    Ok((1.0 - rhat) / (1.0 + rhat))
}

/// Envelope size at which the asymmetry crosses `level`, by bisection in
/// ln(abar); the asymmetry is monotone increasing in abar.
pub fn astar_for_level(
    alpha: f64,
    level: f64,
    t_lab_fs: f64,
    abar_lo: f64,
    abar_hi: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let mut lo = abar_lo.ln();
    let mut hi = abar_hi.ln();
    let a_at = |l: f64, s: &QuadratureSpec| asymmetry(&PacketParams::new(alpha, l.exp()), t_lab_fs, s);
    let (alo, ahi) = (a_at(lo, spec)?, a_at(hi, spec)?);
    if !(alo < level && level < ahi) {
        return Err(Error::Domain(format!(
            "astar_for_level: level {level} not bracketed by [{alo}, {ahi}]"
        )));
    }
    for _ in 0..24 {
        let mid = 0.5 * (lo + hi);
        if a_at(mid, spec)? < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

// ---------------------------------------------------------------------------
// variances
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct VarianceZ {
    pub mean: f64,
    pub second_moment: f64,
    /// spreading difference deltaZ(alpha)^2 - deltaZ(0)^2 (time-independent)
    pub delta2: f64,
}

fn real_bessel_k(order: f64, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(bessel_k(ComplexOrder::new(order, 0.0), Complex64::new(x, 0.0), spec)?.re)
}

/// Closed-form position moments of the free packet (Bessel/Struve forms).
pub fn variance_z_closed(
    params: &PacketParams,
    tbar: f64,
    spec: &QuadratureSpec,
) -> Result<VarianceZ> {
    if params.abar <= 0.0 {
        return Err(Error::Domain("variance_z_closed: abar must be positive".into()));
    }
    let (alpha, abar) = (params.alpha, params.abar);
    let x = 2.0 * abar;
    let k0 = real_bessel_k(0.0, x, spec)?;
    let k1 = real_bessel_k(1.0, x, spec)?;
    let l0 = struve_l(0, x)?;
    let lm1 = struve_l(-1, x)?;
    let (a2, t2) = (alpha * alpha, tbar * tbar);
    let second_moment = k1 * abar * (4.0 * (a2 - t2) + 4.0 * PI * abar * l0 * (a2 - t2) + 1.0)
        / (2.0 * k0)
        - 2.0 * PI * abar * abar * lm1 * (t2 - a2)
        + PI * abar * (t2 - a2) / k0
        + t2;
    let mean = PI * alpha * (abar * lm1 + (2.0 * abar * l0 * k1 - 1.0) / (2.0 * k0));
    let delta2 = PI
        * a2
        * (abar * abar * lm1 * (2.0 - PI * lm1)
            - PI * (1.0 - 2.0 * abar * l0 * k1).powi(2) / (4.0 * k0 * k0)
            + abar * (PI * lm1 - 1.0) / k0
            + abar * (2.0 / PI - 2.0 * abar * (PI * lm1 - 1.0) * l0) * k1 / k0);
    Ok(VarianceZ {
        mean,
        second_moment,
        delta2,
    })
}

/// Quadrature moments of the lab density at fixed Tbar: (mean, second).
pub fn variance_z_numeric(
    params: &PacketParams,
    tbar: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let splits = z_splits(params.abar, tbar);
    let moment = |k: i32| -> Result<f64> {
        let f = |z: f64| {
            lab_density(params, &SpacetimePoint::new(tbar, z), spec).unwrap_or(0.0) * z.powi(k)
        };
        Ok(adaptive_gk_real(&f, &splits, 1e-300, 1e-9, 4000)?.0)
    };
    let n = moment(0)?;
    if n <= 0.0 {
        return Err(Error::Range("variance_z_numeric: norm underflowed".into()));
    }
    Ok((moment(1)? / n, moment(2)? / n))
}

/// Accelerated-frame width delta_u = sqrt(<u^2> - <u>^2) at fixed eta.
///
/// Moments of psi_R^dag psi_R = e^{eta} |F-|^2 + e^{-eta} |F+|^2 over
/// u in [1, inf).  The spreading part of the packet hugs the light cone
/// (its scale is abar/alpha) and is excluded by the one-Compton-wavelength
/// cut; what remains is the hyperbolic-lobe structure near u ~ alpha whose
/// width this measures.
pub fn variance_u_numeric(
    params: &PacketParams,
    eta: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let abar = params.abar;
    if abar <= 0.0 {
        return Err(Error::Domain("variance_u_numeric: abar must be positive".into()));
    }
    // K_{iOmega}(u) turns exponential past u ~ Omega; a few widths beyond
    // alpha the integrands are dead
    let u_hi = 3.0 * params.alpha.max(1.0) + 40.0;
    let mut splits = vec![1.0, 2.0, 5.0];
    let mut u = 10.0;
    while u < u_hi {
        splits.push(u);
        u *= 1.6;
    }
    splits.push(u_hi);
    let rho = |u: f64| -> f64 {
        let fm = f_pm_rindler(params.alpha, params.abar, eta, u, -1.0, spec);
        let fp = f_pm_rindler(params.alpha, params.abar, eta, u, 1.0, spec);
        match (fm, fp) {
            (Ok(fm), Ok(fp)) => eta.exp() * fm.norm_sqr() + (-eta).exp() * fp.norm_sqr(),
            _ => 0.0,
        }
    };
    let moment = |k: i32| -> Result<f64> {
        let f = |u: f64| rho(u) * u.powi(k);
        // the outer tolerance must sit above the pointwise density accuracy
        // or the subdivision chases integrand noise
        Ok(adaptive_gk_real(&f, &splits, 1e-300, 1e-8, spec.max_subdivisions)?.0)
    };
    let n = moment(0)?;
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Range(format!(
            "variance_u_numeric: density underflowed at eta = {eta}"
        )));
    }
    let m1 = moment(1)? / n;
    let m2 = moment(2)? / n;
    let var = m2 - m1 * m1;
    if var <= 0.0 {
        return Err(Error::Range(format!(
            "variance_u_numeric: negative variance at eta = {eta}"
        )));
    }
    Ok(var.sqrt())
}

// ---------------------------------------------------------------------------
// asymptotics
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AsymptoticFrame {
    Lab,
    Rindler,
}

/// Large-eta closed forms: lab |psi|^2 ~ e^{-2 sqrt(e^eta abar u) - pi
/// alpha/2} / (sqrt2 u); rest |psi_R|^2 ~ e^{-2u + pi Omega/2} / (sqrt2 u).
pub fn asymptotic_density(
    frame: AsymptoticFrame,
    alpha_or_omega: f64,
    abar: f64,
    rp: &RindlerPoint,
) -> Result<f64> {
    Ok(asymptotic_log_density(frame, alpha_or_omega, abar, rp)?.exp())
}

/// ln of the asymptotic density; the plain value underflows f64 deep in the
/// wedge, and comparisons are made on the exponent anyway.
pub fn asymptotic_log_density(
    frame: AsymptoticFrame,
    alpha_or_omega: f64,
    abar: f64,
    rp: &RindlerPoint,
) -> Result<f64> {
    if rp.eta < 5.0 {
        return Err(Error::Domain(format!(
            "asymptotic_density: eta = {} below the applicability floor 5",
            rp.eta
        )));
    }
    if rp.ubar <= 0.0 {
        return Err(Error::Wedge { t: 0.0, z: rp.ubar });
    }
    let v = match frame {
        AsymptoticFrame::Lab => {
            -2.0 * (rp.eta.exp() * abar * rp.ubar).sqrt() - 0.5 * PI * alpha_or_omega
                - (2f64.sqrt() * rp.ubar).ln()
        }
        AsymptoticFrame::Rindler => {
            -2.0 * rp.ubar + 0.5 * PI * alpha_or_omega - (2f64.sqrt() * rp.ubar).ln()
        }
    };
    Ok(v)
}

/// ln(exact)/ln(asymptotic) for the lab density; the densities span
/// hundreds of decades, so agreement is judged on the exponent.
pub fn lab_log_ratio(
    params: &PacketParams,
    rp: &RindlerPoint,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let exact = lab_density_rindler(params, rp, spec)?;
    let asym_ln = asymptotic_log_density(AsymptoticFrame::Lab, params.alpha, params.abar, rp)?;
    if exact <= 0.0 {
        return Err(Error::Range("lab_log_ratio: density underflowed".into()));
    }
    Ok(exact.ln() / asym_ln)
}

/// Upper edge of the agreement region at fixed eta: the largest ubar (on a
/// log scan around e^eta abar) whose log-ratio stays within 20% of 1.  The
/// coincidence condition predicts this edge near ubar ~ e^eta abar.
pub fn coincidence_boundary(
    params: &PacketParams,
    eta: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let u_ref = eta.exp() * params.abar;
    let mut best: Option<f64> = None;
    for k in -12..=12 {
        let u = u_ref * 2f64.powf(k as f64 / 4.0);
        if let Ok(r) = lab_log_ratio(params, &RindlerPoint::new(eta, u), spec) {
            if (r - 1.0).abs() <= 0.2 {
                best = Some(u);
            }
        }
    }
    best.ok_or_else(|| {
        Error::Coverage(format!(
            "coincidence_boundary: no agreement region at eta = {eta}"
        ))
    })
}

// ---------------------------------------------------------------------------
// lifetime, collider, bounds
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct Lifetime {
    /// (hbar / m c^2) (alpha^2 - abar^2) / (2 abar)
    pub t_reduced_s: f64,
    /// 2 pi times the reduced value (matches the quoted numbers)
    pub t_paper_s: f64,
}

pub fn lifetime(params: &PacketParams) -> Result<Lifetime> {
    if params.abar <= 0.0 {
        return Err(Error::Domain("lifetime: abar must be positive".into()));
    }
    if params.alpha <= params.abar {
        return Err(Error::Domain(
            "lifetime: requires alpha > abar (positive lifetime)".into(),
        ));
    }
    let t = COMPTON_TIME_S * (params.alpha * params.alpha - params.abar * params.abar)
        / (2.0 * params.abar);
    Ok(Lifetime {
        t_reduced_s: t,
        t_paper_s: 2.0 * PI * t,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ColliderEstimate {
    pub gamma_rf: f64,
    pub omega0_gev: f64,
    /// laser cycle 1/omega over gamma
    pub recollision_time_s: f64,
    /// same with the doubled Doppler factor
    pub recollision_time_half_s: f64,
    pub leak_time_s: f64,
    pub rr_fraction: f64,
}

pub fn collider_estimates(
    omega_over_m: f64,
    a0: f64,
    gamma0: Option<f64>,
) -> Result<ColliderEstimate> {
    if omega_over_m <= 0.0 || a0 <= 0.0 {
        return Err(Error::Domain("collider_estimates: inputs must be positive".into()));
    }
    let gamma0 = gamma0.unwrap_or(1e3);
    if gamma0 <= 0.0 {
        return Err(Error::Domain("collider_estimates: gamma0 must be positive".into()));
    }
    let gamma_rf = 1.0 / (2.0 * 2f64.sqrt() * a0 * a0 * omega_over_m);
    let omega0_gev = 2f64.sqrt() * gamma_rf * a0 * ELECTRON_MASS_MEV * 1e-3;
    let cycle_s = COMPTON_TIME_S / omega_over_m;
    // nonspreading window for the reference packet (alpha, abar) = (30, 0.01)
    let leak = lifetime(&PacketParams::new(30.0, 0.01))?;
    Ok(ColliderEstimate {
        gamma_rf,
        omega0_gev,
        recollision_time_s: cycle_s / gamma_rf,
        recollision_time_half_s: cycle_s / (2.0 * gamma_rf),
        leak_time_s: leak.t_paper_s,
        rr_fraction: 2.0 * ALPHA_FS * a0 * a0 * gamma0 * omega_over_m,
    })
}

/// Spatial shift of the momentum-p component from the chirp phase:
/// d/dp [alpha asinh(p)] = alpha / sqrt(1 + p^2).
pub fn chirp_delay(alpha: f64, p: f64) -> f64 {
    alpha / (1.0 + p * p).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundFlag {
    Satisfied,
    Marginal,
    Violated,
}

#[derive(Debug, Clone, Copy)]
pub struct WavelengthBound {
    /// rest-frame laser wavelength in Compton lengths (head-on Doppler)
    pub lambda_rest: f64,
    pub a_max: f64,
    pub flag: BoundFlag,
}

/// Packet-size bound abar <= lambda' with lambda' = 2 pi / (2 gamma omega).
pub fn rest_wavelength_bound(abar: f64, omega_bar: f64, gamma_rf: f64) -> Result<WavelengthBound> {
    if abar <= 0.0 || omega_bar <= 0.0 || gamma_rf <= 0.0 {
        return Err(Error::Domain("rest_wavelength_bound: inputs must be positive".into()));
    }
    let lambda_rest = PI / (gamma_rf * omega_bar);
    let flag = if abar <= 0.99 * lambda_rest {
        BoundFlag::Satisfied
    } else if abar <= 1.01 * lambda_rest {
        BoundFlag::Marginal
    } else {
        BoundFlag::Violated
    };
    Ok(WavelengthBound {
        lambda_rest,
        a_max: lambda_rest,
        flag,
    })
}

/// Consistency guard for the metric signs used in moment bookkeeping.
pub fn wedge_interval_sq(point: &SpacetimePoint) -> f64 {
    ETA[0] * point.tbar * point.tbar + ETA[3] * point.zbar * point.zbar
}
