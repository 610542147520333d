//! Spinor constructors: Rindler eigenstate, free and laser-dressed
//! nonspreading packets, Volkov states, the pointwise Lorentz map to the
//! local rest frame, and the transverse boost/rotation decomposition.
//!
//! Every closed form here is shadowed by a rapidity-line quadrature oracle
//! (`free_packet_oracle`, `laser_packet_oracle`).  The oracle integrates the
//! raw superposition exponent on a deformed contour: a double-double flat
//! tilt in the right wedge of the primed chart (where the e^{pi alpha / 2}
//! cancellation is worst) and a bent f64 contour elsewhere.

use crate::algebra::{boost_z, expm, gamma_set, FourVector, Matrix4C, Spinor4};
use crate::dd::{Cdd, Dd};
use crate::error::{Error, Result};
use crate::fields::{FieldProfile, RindlerPoint, SpacetimePoint};
use crate::quad::{contour_trapezoid, contour_trapezoid_dd, TiltContour};
use crate::specfun::{bessel_k, ComplexOrder, QuadratureSpec};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

type C = Complex64;

/// Packet parameters in Compton units.
#[derive(Debug, Clone, Copy)]
pub struct PacketParams {
    /// momentum chirp alpha
    pub alpha: f64,
    /// envelope size parameter abar > 0
    pub abar: f64,
    /// Rindler eigenenergy Omega (used where the packet degenerates to an
    /// eigenstate; the artifact pins alpha = +Omega, see `omega_sign`)
    pub omega: f64,
}

impl PacketParams {
    pub fn new(alpha: f64, abar: f64) -> PacketParams {
        PacketParams {
            alpha,
            abar,
            omega: alpha,
        }
    }
}

/// Resolved sign convention relating the chirp alpha to the Rindler
/// eigenenergy; pinned by the accelerated-frame residual gate.
pub const OMEGA_SIGN: f64 = 1.0;

/// The square-root argument of the envelope Bessel factor, with the branch
/// actually taken recorded.
#[derive(Debug, Clone, Copy)]
pub struct ZetaArg {
    pub value: C,
    /// true when the principal branch put the value in Im >= 0
    pub branch_upper: bool,
}

pub fn zeta_lab(abar: f64, tbar: f64, zbar: f64) -> ZetaArg {
    let v = (C::new(abar, tbar).powi(2) + zbar * zbar).sqrt();
    ZetaArg {
        value: v,
        branch_upper: v.im >= 0.0,
    }
}

pub fn zeta_rindler(abar: f64, eta: f64, ubar: f64) -> ZetaArg {
    let v = (C::new(abar * abar + ubar * ubar, 2.0 * abar * ubar * eta.sinh())).sqrt();
    ZetaArg {
        value: v,
        branch_upper: v.im >= 0.0,
    }
}

/// Envelope factor F_{i alpha + sign/2}(zeta) =
/// 2 ((i abar - T - Z)/(i abar - T + Z))^{sign/4 + i alpha/2} K_{sign/2 + i alpha}(zeta).
pub fn f_pm(
    alpha: f64,
    abar: f64,
    tbar: f64,
    zbar: f64,
    sign: f64,
    spec: &QuadratureSpec,
) -> Result<C> {
    let ia = C::new(0.0, abar);
    let pref = (ia - tbar - zbar) / (ia - tbar + zbar);
    let zeta = zeta_lab(abar, tbar, zbar);
    let p = pref.powc(C::new(sign * 0.25, 0.5 * alpha));
    let k = bessel_k(ComplexOrder::new(0.5 * sign, alpha), zeta.value, spec)?;
    Ok(2.0 * p * k)
}

/// Same envelope factor in Rindler variables (cancellation-free at large
/// eta, where T and Z individually explode).
pub fn f_pm_rindler(
    alpha: f64,
    abar: f64,
    eta: f64,
    ubar: f64,
    sign: f64,
    spec: &QuadratureSpec,
) -> Result<C> {
    let ia = C::new(0.0, abar);
    let pref = (ia - ubar * eta.exp()) / (ia + ubar * (-eta).exp());
    let zeta = zeta_rindler(abar, eta, ubar);
    let p = pref.powc(C::new(sign * 0.25, 0.5 * alpha));
    let k = bessel_k(ComplexOrder::new(0.5 * sign, alpha), zeta.value, spec)?;
    Ok(2.0 * p * k)
}

/// Accelerated-frame eigenstate of eigenenergy Omega.
pub fn rindler_eigenstate(omega: f64, point: &RindlerPoint, spec: &QuadratureSpec) -> Result<Spinor4> {
    if point.ubar <= 0.0 {
        return Err(Error::Wedge {
            t: 0.0,
            z: point.ubar,
        });
    }
    let om = OMEGA_SIGN * omega;
    let kp = bessel_k(ComplexOrder::new(0.5, om), C::new(point.ubar, 0.0), spec)?;
    let km = bessel_k(ComplexOrder::new(-0.5, om), C::new(point.ubar, 0.0), spec)?;
    let norm = 2.0 * 2f64.sqrt() * (0.5 * PI * om).exp() / C::new(0.0, PI);
    let rot_m = C::from_polar(1.0, -FRAC_PI_4);
    let rot_p = C::from_polar(1.0, FRAC_PI_4);
    let phase = C::from_polar(1.0, -om * point.eta);
    Ok(Spinor4::new(
        norm * rot_m * kp * phase,
        C::new(0.0, 0.0),
        norm * rot_p * km * phase,
        C::new(0.0, 0.0),
    ))
}

/// Free nonspreading packet (F_{i alpha - 1/2}, 0, F_{i alpha + 1/2}, 0).
pub fn free_nonspreading(
    params: &PacketParams,
    point: &SpacetimePoint,
    spec: &QuadratureSpec,
) -> Result<Spinor4> {
    if params.abar <= 0.0 {
        return Err(Error::Domain("free packet requires abar > 0".into()));
    }
    let fm = f_pm(params.alpha, params.abar, point.tbar, point.zbar, -1.0, spec)?;
    let fp = f_pm(params.alpha, params.abar, point.tbar, point.zbar, 1.0, spec)?;
    Ok(Spinor4::new(fm, C::new(0.0, 0.0), fp, C::new(0.0, 0.0)))
}

/// Volkov state of rapidity b: prefactor-dressed boosted plane wave with the
/// p-independent accumulated phase reinstated as e^b phi.
pub fn volkov(
    b: f64,
    profile: &FieldProfile,
    point: &SpacetimePoint,
) -> Result<Spinor4> {
    let xi = profile.xi_at(point);
    let fc = profile.fdot_c(xi)?;
    let phi_pos = -profile.phi_accumulated(xi)?;
    let eb = b.exp();
    let phase = (C::new(
        0.0,
        -(b.cosh() * point.tbar - b.sinh() * point.zbar) - eb * phi_pos,
    ))
    .exp();
    Ok(Spinor4::new(
        C::new((-0.5 * b).exp(), 0.0) * phase,
        fc * (0.5 * b).exp() * phase,
        C::new((0.5 * b).exp(), 0.0) * phase,
        C::new(0.0, 0.0),
    ))
}

/// Laser-dressed nonspreading packet: the free closed form in primed
/// coordinates with the Volkov prefactor column.
pub fn laser_nonspreading(
    params: &PacketParams,
    profile: &FieldProfile,
    point: &SpacetimePoint,
    spec: &QuadratureSpec,
) -> Result<Spinor4> {
    if params.abar <= 0.0 {
        return Err(Error::Domain("laser packet requires abar > 0".into()));
    }
    let xi = profile.xi_at(point);
    let fc = profile.fdot_c(xi)?;
    let pp = profile.primed_coords(point)?;
    let fm = f_pm(params.alpha, params.abar, pp.tbar, pp.zbar, -1.0, spec)?;
    let fp = f_pm(params.alpha, params.abar, pp.tbar, pp.zbar, 1.0, spec)?;
    Ok(Spinor4::new(fm, fc * fp, fp, C::new(0.0, 0.0)))
}

/// The pointwise Lorentz map to the local rest frame and its pieces.
#[derive(Debug, Clone)]
pub struct Crdi {
    pub r_bar: Matrix4C,
    pub eta_prime: f64,
    /// unit-triangular field factor (identity when the field is off)
    pub field_part: Matrix4C,
    pub d_star: C,
}

/// R_bar = boost_z(eta') * (unit-triangular field matrix).
pub fn crdi_matrix(
    params: &PacketParams,
    profile: &FieldProfile,
    point: &SpacetimePoint,
    spec: &QuadratureSpec,
) -> Result<Crdi> {
    if params.abar <= 0.0 {
        return Err(Error::Domain("crdi requires abar > 0".into()));
    }
    let xi = profile.xi_at(point);
    let fc = profile.fdot_c(xi)?;
    let pp = profile.primed_coords(point)?;
    let fm = f_pm(params.alpha, params.abar, pp.tbar, pp.zbar, -1.0, spec)?;
    let fp = f_pm(params.alpha, params.abar, pp.tbar, pp.zbar, 1.0, spec)?;
    if fm.norm() < 1e-300 || fp.norm() < 1e-300 {
        return Err(Error::Masked {
            zeta_abs: fm.norm().min(fp.norm()),
        });
    }
    let ratio = fp / fm;
    let eta_prime = ratio.norm().ln();
    if !eta_prime.is_finite() {
        return Err(Error::Masked { zeta_abs: ratio.norm() });
    }
    // d* 2 omega = F_+' / F_-'; exact cancellation of the second rest column
    let d_star = ratio / (2.0 * profile.omega_bar);
    let mut field_part = Matrix4C::identity();
    field_part.m[1][0] = -d_star * 2.0 * profile.omega_bar * fc;
    field_part.m[2][3] = d_star.conj() * 2.0 * profile.omega_bar * fc.conj();
    let r_bar = boost_z(eta_prime).mul(&field_part);
    Ok(Crdi {
        r_bar,
        eta_prime,
        field_part,
        d_star,
    })
}

/// psi_R = R_bar psi_L; spatial current vanishes by construction of d*, eta'.
pub fn rest_frame_spinor(
    params: &PacketParams,
    profile: &FieldProfile,
    point: &SpacetimePoint,
    spec: &QuadratureSpec,
) -> Result<Spinor4> {
    let crdi = crdi_matrix(params, profile, point, spec)?;
    let psi_l = laser_nonspreading(params, profile, point, spec)?;
    Ok(crdi.r_bar.mul_spinor(&psi_l))
}

/// Inverse map: R_bar^{-1} psi_R recovers the lab packet.
pub fn lab_from_rest(
    params: &PacketParams,
    profile: &FieldProfile,
    point: &SpacetimePoint,
    spec: &QuadratureSpec,
) -> Result<Spinor4> {
    let crdi = crdi_matrix(params, profile, point, spec)?;
    let psi_r = rest_frame_spinor(params, profile, point, spec)?;
    Ok(crdi.r_bar.inverse()?.mul_spinor(&psi_r))
}

/// Rotation/boost split of the transverse field kick at phase xi.
#[derive(Debug, Clone, Copy)]
pub struct Decomposition {
    pub theta: f64,
    pub w: f64,
    pub v: [f64; 3],
    pub proper_velocity: FourVector,
}

pub fn decompose_boost_rotation(profile: &FieldProfile, xi: f64) -> Result<Decomposition> {
    let (f1, f2) = profile.fdot(xi)?;
    let f = (f1 * f1 + f2 * f2).sqrt();
    if f == 0.0 {
        return Ok(Decomposition {
            theta: 0.0,
            w: 0.0,
            v: [0.0; 3],
            proper_velocity: FourVector::new(1.0, 0.0, 0.0, 0.0),
        });
    }
    let theta = (0.5 * f).atan();
    let w = theta.sin().atanh();
    let (f1h, f2h) = (f1 / f, f2 / f);
    let v = [f1h * theta.cos(), f2h * theta.cos(), theta.sin()];
    let gamma = 1.0 + 0.5 * f * f;
    Ok(Decomposition {
        theta,
        w,
        v,
        proper_velocity: FourVector::new(gamma, f1, f2, 0.5 * f * f),
    })
}

/// Rebuild U * B from a decomposition; equals the unit-triangular Volkov
/// prefactor matrix at b = 0 (entries fc and -conj(fc)).
pub fn reconstruct_ub(dec: &Decomposition) -> Matrix4C {
    if dec.theta == 0.0 {
        return Matrix4C::identity();
    }
    let gs = gamma_set();
    let ct = dec.theta.cos();
    let (f1h, f2h) = (dec.v[0] / ct, dec.v[1] / ct);
    let gen_u = gs.g[1]
        .mul(&gs.g[3])
        .scale(C::new(-dec.theta * f1h, 0.0))
        .add(&gs.g[2].mul(&gs.g[3]).scale(C::new(-dec.theta * f2h, 0.0)));
    let gen_b = gs.g[0]
        .mul(&gs.g[1])
        .scale(C::new(-dec.w * dec.v[0], 0.0))
        .add(&gs.g[0].mul(&gs.g[2]).scale(C::new(-dec.w * dec.v[1], 0.0)))
        .add(&gs.g[0].mul(&gs.g[3]).scale(C::new(-dec.w * dec.v[2], 0.0)));
    expm(&gen_u).mul(&expm(&gen_b))
}

// ---------------------------------------------------------------------------
// rapidity-line quadrature oracles
// ---------------------------------------------------------------------------

/// One spinor component of the superposition integral
/// int db e^{i alpha b + wk b/2 - (abar + iT) cosh b + i Z sinh b - i e^b phi}.
fn rapidity_component(
    alpha: f64,
    abar: f64,
    tbar: f64,
    zbar: f64,
    phi_pos: f64,
    tp: f64,
    zp: f64,
    wk: f64,
    rel_tol: f64,
) -> Result<C> {
    if abar <= 0.0 {
        return Err(Error::NoDamping);
    }
    if zp > tp.abs() {
        // right wedge of the primed chart: flat tilt near pi/2, summed in
        // double-double to survive the e^{pi alpha/2} cancellation
        let mrg = (3.0 / alpha.abs().max(1.0)).clamp(0.08, 0.5);
        let theta = FRAC_PI_2 - mrg;
        let center = (tp / zp).atanh().clamp(-20.0, 20.0);
        let thd = Dd::from_f64(theta);
        let (sn, cs) = thd.sin_cos();
        let (al_d, a_d) = (Dd::from_f64(alpha), Dd::from_f64(abar));
        let (t_d, z_d) = (Dd::from_f64(tbar), Dd::from_f64(zbar));
        let (phi_d, wk_d) = (Dd::from_f64(phi_pos), Dd::from_f64(wk));
        let exponent = move |s: Dd| -> Cdd {
            let (sh, ch) = s.sinh_cosh();
            let es = ch + sh;
            let re = -(al_d * thd) + (wk_d * s).mul_pwr2(0.5) - a_d * ch * cs + t_d * sh * sn
                - z_d * ch * sn
                + phi_d * es * sn;
            let im = al_d * s + (wk_d * thd).mul_pwr2(0.5) - a_d * sh * sn - t_d * ch * cs
                + z_d * sh * cs
                - phi_d * es * cs;
            Cdd::new(re, im)
        };
        // double-double leaves ~1e-12 relative headroom after the
        // e^{pi alpha/2} cancellation, so honor the caller's tolerance
        // instead of clamping it tighter
        let (v, _) = contour_trapezoid_dd(&exponent, center, rel_tol, 16)?;
        Ok(v)
    } else {
        // inside the light cone / left region: flat real-line plateau with
        // end bends chosen against the e^{|s|} growth directions
        let delta = (6.0 / alpha.abs().max(1.0)).min(0.45);
        let c_r = 0.5 * (tp - zp);
        let c_l = -0.5 * (tp + zp);
        let th_r = if c_r == 0.0 { -delta } else { -delta * c_r.signum() };
        let th_l = if c_l == 0.0 { -delta } else { -delta * c_l.signum() };
        // plateau must cover the stationary-phase points and the magnitude peak
        let gp = |s: f64| alpha - tp * s.sinh() + zp * s.cosh();
        let mut root_lo = f64::INFINITY;
        let mut root_hi = f64::NEG_INFINITY;
        let mut prev = gp(-40.0);
        let mut s = -40.0;
        while s < 40.0 {
            let s2 = s + 0.25;
            let v = gp(s2);
            if prev.signum() != v.signum() {
                root_lo = root_lo.min(s);
                root_hi = root_hi.max(s2);
            }
            prev = v;
            s = s2;
        }
        let pk = (1.0 / (2.0 * abar)).asinh().abs() + 1.0;
        let s_lo = (-2.0f64).min(if root_lo.is_finite() { root_lo - 2.0 } else { 0.0 }).min(-pk);
        let s_hi = (2.0f64).max(if root_hi.is_finite() { root_hi + 2.0 } else { 0.0 }).max(pk);
        let contour = TiltContour {
            theta_c: 0.0,
            theta_l: th_l,
            theta_r: th_r,
            s_lo,
            s_hi,
            lambda: 1.0,
            center: 0.0,
        };
        let exponent = move |b: C| -> C {
            C::i() * alpha * b + 0.5 * wk * b - C::new(abar, tbar) * b.cosh()
                + C::i() * zbar * b.sinh()
                - C::i() * phi_pos * b.exp()
        };
        let (v, _) = contour_trapezoid(&exponent, &contour, rel_tol, 14)?;
        Ok(v)
    }
}

/// Quadrature oracle for `free_nonspreading`.
pub fn free_packet_oracle(
    params: &PacketParams,
    point: &SpacetimePoint,
    rel_tol: f64,
) -> Result<Spinor4> {
    let c1 = rapidity_component(
        params.alpha,
        params.abar,
        point.tbar,
        point.zbar,
        0.0,
        point.tbar,
        point.zbar,
        -1.0,
        rel_tol,
    )?;
    let c3 = rapidity_component(
        params.alpha,
        params.abar,
        point.tbar,
        point.zbar,
        0.0,
        point.tbar,
        point.zbar,
        1.0,
        rel_tol,
    )?;
    Ok(Spinor4::new(c1, C::new(0.0, 0.0), c3, C::new(0.0, 0.0)))
}

/// Quadrature oracle for `laser_nonspreading`: integrates the raw Volkov
/// superposition (accumulated phase kept as -i e^b phi, not folded into
/// shifted coordinates), so it pins the primed-coordinate identity.
pub fn laser_packet_oracle(
    params: &PacketParams,
    profile: &FieldProfile,
    point: &SpacetimePoint,
    rel_tol: f64,
) -> Result<Spinor4> {
    let xi = profile.xi_at(point);
    let fc = profile.fdot_c(xi)?;
    let phi_pos = -profile.phi_accumulated(xi)?;
    let pp = profile.primed_coords(point)?;
    let c1 = rapidity_component(
        params.alpha,
        params.abar,
        point.tbar,
        point.zbar,
        phi_pos,
        pp.tbar,
        pp.zbar,
        -1.0,
        rel_tol,
    )?;
    let c3 = rapidity_component(
        params.alpha,
        params.abar,
        point.tbar,
        point.zbar,
        phi_pos,
        pp.tbar,
        pp.zbar,
        1.0,
        rel_tol,
    )?;
    Ok(Spinor4::new(c1, fc * c3, c3, C::new(0.0, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::current;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn rel(a: C, b: C) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn free_packet_frozen_values() {
        // reference values computed at 30 digits from the closed form
        let cases: [(f64, f64, f64, f64, C, C); 5] = [
            (30.0, 0.005, 1.0, 35.0,
             C::new(1.0188836034534580e-42, -4.5988350108887231e-43),
             C::new(-6.1857540534805435e-43, 9.6979554842362136e-43)),
            (2.0, 1.0, 0.3, 2.0,
             C::new(0.0057626949845229034, -0.0063892717217029115),
             C::new(0.0048846389305113791, 0.0089256932267238773)),
            (2.0, 1.0, 2.0, 0.5,
             C::new(-0.024119093546336756, -0.19957364833293686),
             C::new(0.18999692784048480, -0.44492252239825598)),
            (30.0, 0.005, 20.0, 10.0,
             C::new(-0.021392136674334131, 0.16337015388788922),
             C::new(-0.15194954689500252, 1.0541347066298584)),
            (30.0, 0.005, 10.0, 60.0,
             C::new(-6.1162825223685212e-51, -7.0514814902500069e-51),
             C::new(1.0849372034596448e-50, -2.0684171467543917e-51)),
        ];
        for (al, ab, t, z, fm_want, fp_want) in cases {
            let s = free_nonspreading(
                &PacketParams::new(al, ab),
                &SpacetimePoint::new(t, z),
                &spec(),
            )
            .unwrap();
            assert!(rel(s.c[0], fm_want) < 3e-10, "Fm at ({al},{ab},{t},{z}): {:e}", rel(s.c[0], fm_want));
            assert!(rel(s.c[2], fp_want) < 3e-10, "Fp at ({al},{ab},{t},{z}): {:e}", rel(s.c[2], fp_want));
        }
    }

    #[test]
    fn free_packet_origin_closed_form() {
        // alpha=0, abar=1, origin: both components 2 K_{±1/2}(1)
        let s = free_nonspreading(&PacketParams::new(0.0, 1.0), &SpacetimePoint::new(0.0, 0.0), &spec())
            .unwrap();
        let want = 2.0 * (PI / 2.0).sqrt() * (-1.0f64).exp();
        assert!((s.c[0].re - want).abs() < 1e-11 && s.c[0].im.abs() < 1e-12);
        assert!((s.c[2].re - want).abs() < 1e-11);
    }

    #[test]
    fn free_oracle_matches_closed_form() {
        for (al, ab, t, z) in [
            (2.0, 1.0, 0.3, 2.0),   // right wedge -> dd path
            (2.0, 1.0, 2.0, 0.5),   // inside cone -> bent f64 path
            (30.0, 0.005, 20.0, 10.0), // inside cone, strong chirp
            (30.0, 0.005, 1.0, 35.0),  // far wedge, heavy cancellation
        ] {
            let p = PacketParams::new(al, ab);
            let pt = SpacetimePoint::new(t, z);
            let closed = free_nonspreading(&p, &pt, &spec()).unwrap();
            let oracle = free_packet_oracle(&p, &pt, 1e-10).unwrap();
            let e = closed.sub(&oracle).norm() / closed.norm();
            assert!(e < 1e-8, "({al},{ab},{t},{z}): rel {e:e}");
        }
    }

    #[test]
    fn mirror_symmetry_via_rapidity_substitution() {
        // Z -> -Z with alpha -> -alpha leaves the density invariant
        let s1 = free_nonspreading(&PacketParams::new(5.0, 0.4), &SpacetimePoint::new(1.2, 3.0), &spec()).unwrap();
        let s2 = free_nonspreading(&PacketParams::new(-5.0, 0.4), &SpacetimePoint::new(1.2, -3.0), &spec()).unwrap();
        assert!((s1.density() - s2.density()).abs() < 1e-10 * s1.density());
    }

    #[test]
    fn rindler_eigenstate_frozen_and_stationary() {
        let s = rindler_eigenstate(3.0, &RindlerPoint::new(0.4, 1.5), &spec()).unwrap();
        assert!(rel(s.c[0], C::new(-1.1383122182669352, -1.0919391442204899)) < 1e-9);
        assert!(rel(s.c[2], C::new(-1.5769489633973266, 0.036301071290855016)) < 1e-9);
        // density eta-independent
        let d0 = rindler_eigenstate(3.0, &RindlerPoint::new(0.0, 2.0), &spec()).unwrap().density();
        let d5 = rindler_eigenstate(3.0, &RindlerPoint::new(5.0, 2.0), &spec()).unwrap().density();
        assert!((d0 - d5).abs() < 1e-12 * d0);
        // Omega=0, ubar=1: both Bessel factors sqrt(pi/2) e^{-1}
        let s = rindler_eigenstate(0.0, &RindlerPoint::new(0.0, 1.0), &spec()).unwrap();
        assert!((s.c[0].norm() - s.c[2].norm()).abs() < 1e-12);
        assert!(matches!(
            rindler_eigenstate(1.0, &RindlerPoint::new(0.0, -1.0), &spec()),
            Err(Error::Wedge { .. })
        ));
    }

    #[test]
    fn volkov_trivial_cases() {
        let off = FieldProfile::off();
        let s = volkov(0.0, &off, &SpacetimePoint::new(2.0, 0.0)).unwrap();
        let phase = C::from_polar(1.0, -2.0);
        assert!(rel(s.c[0], phase) < 1e-14 && rel(s.c[2], phase) < 1e-14);
        assert!(s.c[1].norm() == 0.0 && s.c[3].norm() == 0.0);
        let s = volkov(1.0, &off, &SpacetimePoint::new(0.0, 0.0)).unwrap();
        assert!((s.c[0].re - (-0.5f64).exp()).abs() < 1e-14);
        assert!((s.c[2].re - 0.5f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn laser_packet_frozen_values() {
        let p = PacketParams::new(30.0, 0.005);
        let prof = FieldProfile::linear(1.0, 0.1);
        let s = laser_nonspreading(&p, &prof, &SpacetimePoint::new(10.0, 40.0), &spec()).unwrap();
        assert!(rel(s.c[0], C::new(1.8779442182427118e-46, 1.5479142713611253e-46)) < 3e-10);
        assert!(rel(s.c[1], C::new(2.5079214780665151e-46, -5.1169508427865325e-47)) < 3e-10);
        assert!(rel(s.c[2], C::new(-2.5332732184117713e-46, 5.1686763893238886e-47)) < 3e-10);
        let s = laser_nonspreading(&p, &prof, &SpacetimePoint::new(30.0, 12.0), &spec()).unwrap();
        assert!(rel(s.c[0], C::new(0.10539095325503582, -0.19247457804460745)) < 3e-10);
        assert!(rel(s.c[1], C::new(-0.069930314863100948, 0.12541416960151886)) < 3e-10);
        assert!(rel(s.c[2], C::new(0.30778904110706105, -0.55199389675932754)) < 3e-10);
        // component ratio reads off the prefactor
        let xi = prof.xi_at(&SpacetimePoint::new(30.0, 12.0));
        let fc = prof.fdot_c(xi).unwrap();
        assert!(rel(s.c[1] / s.c[2], fc) < 1e-12);
    }

    #[test]
    fn laser_field_off_reduces_to_free() {
        let p = PacketParams::new(4.0, 0.3);
        let pt = SpacetimePoint::new(1.0, 2.5);
        let a = laser_nonspreading(&p, &FieldProfile::off(), &pt, &spec()).unwrap();
        let b = free_nonspreading(&p, &pt, &spec()).unwrap();
        assert!(a.sub(&b).norm() < 1e-14 * b.norm());
    }

    #[test]
    fn laser_oracle_matches_closed_form() {
        let p = PacketParams::new(30.0, 0.005);
        let prof = FieldProfile::linear(1.0, 0.1);
        for (t, z) in [(10.0, 40.0), (30.0, 12.0)] {
            let pt = SpacetimePoint::new(t, z);
            let closed = laser_nonspreading(&p, &prof, &pt, &spec()).unwrap();
            let oracle = laser_packet_oracle(&p, &prof, &pt, 1e-10).unwrap();
            let e = closed.sub(&oracle).norm() / closed.norm();
            assert!(e < 1e-8, "({t},{z}): rel {e:e}");
        }
    }

    #[test]
    fn crdi_frozen_values_and_det() {
        let p = PacketParams::new(1.5, 0.6);
        let prof = FieldProfile::circular(0.9, 0.4);
        let crdi = crdi_matrix(&p, &prof, &SpacetimePoint::new(0.8, 2.3), &spec()).unwrap();
        assert!(rel(crdi.d_star, C::new(-0.32735953428072328, 1.2987332779301455)) < 1e-9);
        assert!((crdi.eta_prime - 0.069044763990447794).abs() < 1e-9);
        assert!((crdi.r_bar.det() - C::new(1.0, 0.0)).norm() < 1e-10);
        // field off: strictly diagonal boost
        let crdi = crdi_matrix(&p, &FieldProfile::off(), &SpacetimePoint::new(0.8, 2.3), &spec()).unwrap();
        assert_eq!(crdi.field_part.m[1][0], C::new(0.0, 0.0));
        assert_eq!(crdi.field_part.m[2][3], C::new(0.0, 0.0));
    }

    #[test]
    fn crdi_small_abar_limit_is_wedge_boost() {
        // field off, alpha=0: eta' -> atanh(T/Z) as abar -> 0+
        let pt = SpacetimePoint::new(0.8, 2.3);
        let want = (0.8f64 / 2.3).atanh();
        let mut prev_gap = f64::INFINITY;
        for ab in [1e-3, 1e-4, 1e-5] {
            let p = PacketParams::new(0.0, ab);
            let crdi = crdi_matrix(&p, &FieldProfile::off(), &pt, &spec()).unwrap();
            let gap = (crdi.eta_prime - want).abs();
            assert!(gap < prev_gap, "limit not improving at abar={ab}");
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-4);
    }

    #[test]
    fn rest_frame_current_vanishes() {
        let p = PacketParams::new(1.5, 0.6);
        let prof = FieldProfile::circular(0.9, 0.4);
        for (t, z) in [(0.8, 2.3), (0.0, 1.0), (2.0, 0.3), (-1.0, 4.0)] {
            let psi = rest_frame_spinor(&p, &prof, &SpacetimePoint::new(t, z), &spec()).unwrap();
            let j = current(&psi);
            assert!(j.x.abs() < 1e-8 * j.t, "j1 at ({t},{z})");
            assert!(j.y.abs() < 1e-8 * j.t, "j2 at ({t},{z})");
            assert!(j.z.abs() < 1e-8 * j.t, "j3 at ({t},{z})");
            // column pattern of the rest spinor
            assert!(psi.c[1].norm() < 1e-10 * psi.norm());
            assert!(psi.c[3].norm() < 1e-10 * psi.norm());
        }
    }

    #[test]
    fn lab_from_rest_round_trips() {
        let pt = SpacetimePoint::new(1.0, 2.5);
        // field off: exact inverse against the free closed form
        let p = PacketParams::new(4.0, 0.3);
        let back = lab_from_rest(&p, &FieldProfile::off(), &pt, &spec()).unwrap();
        let free = free_nonspreading(&p, &pt, &spec()).unwrap();
        assert!(back.sub(&free).norm() < 1e-12 * free.norm());
        // laser on: inverse against the laser closed form
        let prof = FieldProfile::circular(0.9, 0.4);
        let back = lab_from_rest(&p, &prof, &pt, &spec()).unwrap();
        let laser = laser_nonspreading(&p, &prof, &pt, &spec()).unwrap();
        assert!(back.sub(&laser).norm() < 1e-10 * laser.norm());
    }

    #[test]
    fn decompose_examples() {
        let off = FieldProfile::off();
        let d = decompose_boost_rotation(&off, 1.0).unwrap();
        assert_eq!(d.theta, 0.0);
        assert_eq!(d.w, 0.0);
        assert_eq!(d.proper_velocity, FourVector::new(1.0, 0.0, 0.0, 0.0));
        // linear a0=2, xi=0: gamma = 3, beta3 = 2/3
        let lin = FieldProfile::linear(2.0, 0.1);
        let d = decompose_boost_rotation(&lin, 0.0).unwrap();
        let u = d.proper_velocity;
        assert!((u.t - 3.0).abs() < 1e-14);
        assert!((u.z / u.t - 2.0 / 3.0).abs() < 1e-14);
        assert!((u.minkowski_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decompose_proper_velocity_normalized() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let circ = FieldProfile::circular(1.7, 0.4);
        for _ in 0..100 {
            let xi: f64 = rng.gen_range(-20.0..20.0);
            let d = decompose_boost_rotation(&circ, xi).unwrap();
            assert!((d.proper_velocity.minkowski_sq() - 1.0).abs() < 1e-12);
            let vnorm: f64 = d.v.iter().map(|x| x * x).sum::<f64>();
            assert!((vnorm - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn decompose_reconstruction_matches_field_factor() {
        // U B equals the b=0 Volkov prefactor matrix (the field factor of
        // the lab-to-rest map at a = alpha = 0)
        let circ = FieldProfile::circular(0.9, 0.4);
        for xi in [-0.6, 0.3, 2.0] {
            let d = decompose_boost_rotation(&circ, xi).unwrap();
            let ub = reconstruct_ub(&d);
            let fc = circ.fdot_c(xi).unwrap();
            let mut want = Matrix4C::identity();
            want.m[1][0] = fc;
            want.m[2][3] = -fc.conj();
            assert!(ub.sub(&want).max_abs() < 1e-10, "xi={xi}");
        }
    }

    #[test]
    fn abar_zero_rejected() {
        let p = PacketParams::new(1.0, 0.0);
        assert!(free_nonspreading(&p, &SpacetimePoint::new(0.0, 1.0), &spec()).is_err());
        assert!(matches!(
            rapidity_component(1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1e-10),
            Err(Error::NoDamping)
        ));
    }
}
