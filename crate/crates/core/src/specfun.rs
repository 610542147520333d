//! Modified Bessel K of complex order and argument, modified Struve L_0 and
//! L_{-1}, and the generic rapidity-line quadrature.
//!
//! K_nu(z) is evaluated from its integral representation
//! K_nu(z) = 1/2 int_{-inf}^{inf} e^{-z cosh t + nu t} dt by a trapezoid sum
//! on a tilted contour t(s) = s + i theta(s) chosen from the saddle
//! asinh(nu/z); the tilt trades the e^{pi |Im nu| / 2} oscillatory
//! cancellation of the real-line integrand for mild end-point growth.

use crate::algebra::Spinor4;
use crate::error::{Error, Result};
use crate::quad::{adaptive_gk, contour_trapezoid, TiltContour};
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

/// Order nu = re + i*im; re is +-1/2 in all wavepacket uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexOrder {
    pub re: f64,
    pub im: f64,
}

impl ComplexOrder {
    pub fn new(re: f64, im: f64) -> ComplexOrder {
        ComplexOrder { re, im }
    }

    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Quadrature control shared by the Bessel and rapidity integrals.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// panel-subdivision budget for the adaptive rule; also caps the
    /// step-halving depth of the contour trapezoid (at 14)
    pub max_subdivisions: usize,
    /// relative integrand level below which the infinite rapidity line is cut
    pub truncation_rule: f64,
}

impl Default for QuadratureSpec {
    fn default() -> QuadratureSpec {
        QuadratureSpec {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 4000,
            truncation_rule: 1e-14,
        }
    }
}

/// Points with |z| below this are tagged near-singular (light-cone mask).
pub const LIGHT_CONE_MASK: f64 = 1e-6;

/// Lanczos g = 7, n = 9 log-gamma for Re z > 0.
fn ln_gamma_c(z: Complex64) -> Complex64 {
    use std::f64::consts::PI;
    if z.re < 0.5 {
        // reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        return (PI / (PI * z).sin()).ln() - ln_gamma_c(1.0 - z);
    }
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let zm = z - 1.0;
    let mut a = Complex64::new(C[0], 0.0);
    for (k, &c) in C.iter().enumerate().skip(1) {
        a += c / (zm + k as f64);
    }
    let t = zm + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (zm + 0.5) * t.ln() - t + a.ln()
}

/// K_nu(z) for small |z| via K = pi/2 (I_{-nu} - I_nu)/sin(pi nu).
/// Requires nu away from the integers (sin pole); the wavepacket orders
/// +-1/2 + i alpha always are.
fn bessel_k_series(nu: Complex64, z: Complex64) -> Complex64 {
    let half_ln = (0.5 * z).ln();
    let q = 0.25 * z * z;
    let mut s = Complex64::new(0.0, 0.0);
    for &sgn in &[-1.0, 1.0] {
        let v = sgn * nu;
        // (z/2)^v / Gamma(v+1) * sum_k q^k / (k! (v+1)_k)
        let mut term = (v * half_ln - ln_gamma_c(v + 1.0)).exp();
        let mut acc = term;
        for k in 0..40 {
            let kf = k as f64;
            term *= q / ((kf + 1.0) * (v + (kf + 1.0)));
            acc += term;
            if term.norm() < 1e-18 * acc.norm() {
                break;
            }
        }
        s += sgn * acc;
    }
    -FRAC_PI_2 * s / (std::f64::consts::PI * nu).sin()
}

/// Modified Bessel function K_nu(z) for complex order, Re z >= 0.
pub fn bessel_k(nu: ComplexOrder, z: Complex64, spec: &QuadratureSpec) -> Result<Complex64> {
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::Domain("bessel_k: z = 0".into()));
    }
    if z.norm() < LIGHT_CONE_MASK {
        return Err(Error::Masked { zeta_abs: z.norm() });
    }
    if z.re < 0.0 {
        return Err(Error::Domain(format!("bessel_k: Re z = {} < 0", z.re)));
    }
    if nu.im < 0.0 {
        let v = bessel_k(ComplexOrder::new(nu.re, -nu.im), z.conj(), spec)?;
        return Ok(v.conj());
    }
    // tiny arguments: the power series beats the contour (which would have
    // to resolve ~ln(2/|z|) oscillation periods); needs nu off the integers
    if z.norm() < 0.1 && (nu.im.abs() > 0.05 || (nu.re - nu.re.round()).abs() > 0.05) {
        return Ok(bessel_k_series(nu.to_c64(), z));
    }
    let nu_c = nu.to_c64();
    let al = nu.im;
    let phi = z.arg();
    // saddle of -z cosh t + nu t
    let ts = (nu_c / z).asinh();
    let mrg = (3.0 / al.max(1.0)).clamp(0.08, 0.5);
    let thc = ts.im.clamp(0.0, FRAC_PI_2 - mrg);
    // end tilts obeying the decay budgets |phi - thL| < pi/2, |phi + thR| < pi/2
    let endm = 0.15;
    let mut th_l = (phi - FRAC_PI_2 + endm).max(thc).min(phi + FRAC_PI_2 - endm);
    let mut th_r = (-phi - FRAC_PI_2 + endm).max(thc).min(-phi + FRAC_PI_2 - endm);
    // cap downward tilts (they amplify e^{al |theta|})
    let cap = (8.0 / al.max(1.0)).min(0.6);
    if th_l < 0.0 {
        th_l = th_l.max(-cap);
    }
    if th_r < 0.0 {
        th_r = th_r.max(-cap);
    }
    let sr = ts.re.abs();
    let contour = TiltContour {
        theta_c: thc,
        theta_l: th_l,
        theta_r: th_r,
        s_lo: -sr - 2.0,
        s_hi: sr + 2.0,
        lambda: 1.0,
        center: 0.0,
    };
    // e^{-z} factored out for scale safety; reinstated below
    let w = |t: Complex64| -z * (t.cosh() - 1.0) + nu_c * t;
    let rtol = spec.rel_tol.min(1e-11);
    let (i, _est) = contour_trapezoid(&w, &contour, rtol, spec.max_subdivisions.min(14))?;
    Ok(0.5 * i * (-z).exp())
}

/// Modified Struve function L_0 or L_{-1} by its all-positive power series.
pub fn struve_l(order: i32, x: f64) -> Result<f64> {
    if order != 0 && order != -1 {
        return Err(Error::Domain(format!("struve_l: order {order} not in {{0,-1}}")));
    }
    if x < 0.0 {
        return Err(Error::Domain("struve_l: x < 0".into()));
    }
    if x > 700.0 {
        return Err(Error::Range(format!("struve_l: x = {x} overflows the series")));
    }
    let h = 0.5 * x;
    let h2 = h * h;
    // L_nu(x) = sum_k (x/2)^{2k+nu+1} / (Gamma(k+3/2) Gamma(k+nu+3/2))
    // leading terms: nu=0: (x/2)/Gamma(3/2)^2 = 2x/pi;  nu=-1: 2/pi
    let mut term = if order == 0 {
        2.0 * x / std::f64::consts::PI
    } else {
        2.0 / std::f64::consts::PI
    };
    let mut sum = term;
    for k in 0..2000usize {
        let kf = k as f64;
        let ratio = if order == 0 {
            h2 / ((kf + 1.5) * (kf + 1.5))
        } else {
            h2 / ((kf + 1.5) * (kf + 0.5))
        };
        term *= ratio;
        sum += term;
        if term <= 1e-17 * sum {
            return Ok(sum);
        }
    }
    Err(Error::Range(format!("struve_l: series did not converge for x = {x}")))
}

/// Componentwise adaptive quadrature of weight(b) * e^{phase(b)} over the
/// truncated rapidity line.  Returns the spinor and the summed error
/// estimate.  Refuses when the phase provides no exponential damping
/// (the abar = 0 case, where the representation diverges).
pub fn rapidity_integral<W, P>(
    weight: &W,
    phase: &P,
    spec: &QuadratureSpec,
) -> Result<(Spinor4, f64)>
where
    W: Fn(f64) -> [Complex64; 4] + ?Sized,
    P: Fn(f64) -> Complex64 + ?Sized,
{
    const B_SCAN: f64 = 120.0;
    let step = 0.25;
    let n = (B_SCAN / step) as i64;
    let mut max_re = f64::NEG_INFINITY;
    let mut re_at = Vec::with_capacity((2 * n + 1) as usize);
    for k in -n..=n {
        let b = k as f64 * step;
        let re = phase(b).re;
        re_at.push((b, re));
        if re > max_re {
            max_re = re;
        }
    }
    let cut = max_re + spec.truncation_rule.ln();
    let first = re_at.iter().find(|(_, re)| *re >= cut);
    let last = re_at.iter().rev().find(|(_, re)| *re >= cut);
    let (bl, br) = match (first, last) {
        (Some(&(bl, _)), Some(&(br, _))) => (bl - 1.0, br + 1.0),
        _ => return Err(Error::NoDamping),
    };
    if bl <= -B_SCAN || br >= B_SCAN {
        return Err(Error::NoDamping);
    }
    // seed panels at 0.5 spacing; the adaptive rule resolves oscillations
    let mut splits = Vec::new();
    let mut b = bl;
    while b < br {
        splits.push(b);
        b += 0.5;
    }
    splits.push(br);
    let mut out = Spinor4::ZERO;
    let mut err_total = 0.0;
    for i in 0..4 {
        let f = |b: f64| weight(b)[i] * (phase(b) - max_re).exp();
        let (v, e) = adaptive_gk(&f, &splits, spec.abs_tol, spec.rel_tol, spec.max_subdivisions)?;
        out.c[i] = v * max_re.exp();
        err_total += e * max_re.exp();
    }
    Ok((out, err_total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn k(re: f64, im: f64, z: C64) -> C64 {
        bessel_k(ComplexOrder::new(re, im), z, &spec()).unwrap()
    }

    #[test]
    fn half_order_closed_form() {
        for &x in &[0.1, 1.0, 1.6, 5.0, 29.0, 50.0] {
            let z = C64::new(x, 0.0);
            let want = (PI / (2.0 * x)).sqrt() * (-x).exp();
            let got = k(0.5, 0.0, z);
            assert!((got - want).norm() < 1e-11 * want.abs(), "x={x}");
            // K_{1/2} = K_{-1/2}
            let got_m = k(-0.5, 0.0, z);
            assert!((got_m - want).norm() < 1e-11 * want.abs());
        }
    }

    #[test]
    fn frozen_reference_values() {
        // high-precision reference values for representative (nu, z)
        let cases: [(f64, f64, C64, C64); 7] = [
            (0.5, 2.0, C64::new(1.0, 0.5), C64::new(0.14943627927600011, 0.082418764460013158)),
            (0.5, 30.0, C64::new(5.0, 0.0), C64::new(2.1015731964777465e-21, 2.0714675538822641e-21)),
            (-0.5, 30.0, C64::new(0.016, 19.0), C64::new(0.074448614180102557, 0.080888268380871353)),
            (0.5, 3.0, C64::new(0.01, 0.0), C64::new(-0.14006056380872147, -0.076138716777191419)),
            (0.0, 0.0, C64::new(1.6, 0.0), C64::new(0.18795475196933230, 0.0)),
            (1.0, 0.0, C64::new(1.6, 0.0), C64::new(0.24063391135761183, 0.0)),
            (0.5, 30.0, C64::new(0.04, 776397.5), C64::new(-0.00096735077487963317, 0.00096537062508517224)),
        ];
        for (re, im, z, want) in cases {
            let got = k(re, im, z);
            let rel = (got - want).norm() / want.norm();
            assert!(rel < 5e-10, "nu=({re},{im}) z={z}: rel={rel:e}");
        }
    }

    #[test]
    fn order_symmetry_and_reflection() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let sig = if rng.gen_bool(0.5) { 0.5 } else { -0.5 };
            let al: f64 = rng.gen_range(0.0..40.0);
            let z = C64::new(rng.gen_range(0.05..20.0), rng.gen_range(-20.0..20.0));
            let a = k(sig, al, z);
            let b = k(-sig, -al, z);
            assert!((a - b).norm() <= 1e-9 * a.norm().max(1e-300), "sym nu=({sig},{al}) z={z}");
            let c = k(sig, -al, z.conj());
            assert!((a.conj() - c).norm() <= 1e-9 * a.norm().max(1e-300), "refl");
        }
    }

    #[test]
    fn recurrence_complex_order() {
        // K_{nu-1}(z) - K_{nu+1}(z) = -(2 nu / z) K_nu(z)
        for &(sig, al) in &[(0.5, 2.0), (0.5, 30.0), (-0.5, 12.0)] {
            for &z in &[C64::new(1.0, 0.5), C64::new(4.0, -3.0), C64::new(0.3, 7.0)] {
                let nu = C64::new(sig, al);
                let km = k(sig - 1.0, al, z);
                let kp = k(sig + 1.0, al, z);
                let kc = k(sig, al, z);
                let lhs = km - kp;
                let rhs = -2.0 * nu / z * kc;
                assert!(
                    (lhs - rhs).norm() < 1e-9 * rhs.norm().max(kc.norm()),
                    "nu=({sig},{al}) z={z}"
                );
            }
        }
    }

    #[test]
    fn brute_force_trapezoid_cross_check() {
        // independent plain trapezoid of the defining integral on [-40, 40]
        let nu = C64::new(0.5, 2.0);
        let z = C64::new(1.0, 0.5);
        let h = 1e-3;
        let n = (40.0 / h) as i64;
        let mut sum = C64::new(0.0, 0.0);
        for j in -n..=n {
            let t = j as f64 * h;
            sum += (-z * t.cosh() + nu * t).exp();
        }
        let brute = 0.5 * sum * h;
        let got = k(0.5, 2.0, z);
        assert!((got - brute).norm() < 1e-8 * brute.norm());
    }

    #[test]
    fn domain_and_mask_errors() {
        let s = spec();
        assert!(matches!(
            bessel_k(ComplexOrder::new(0.5, 0.0), C64::new(0.0, 0.0), &s),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            bessel_k(ComplexOrder::new(0.5, 0.0), C64::new(1e-8, 0.0), &s),
            Err(Error::Masked { .. })
        ));
        assert!(matches!(
            bessel_k(ComplexOrder::new(0.5, 0.0), C64::new(-1.0, 0.0), &s),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn struve_values() {
        assert_eq!(struve_l(0, 0.0).unwrap(), 0.0);
        assert!((struve_l(-1, 0.0).unwrap() - 2.0 / PI).abs() < 1e-16);
        let cases = [
            (0, 2.0, 1.9374337579914457),
            (-1, 2.0, 1.7393795597352972),
            (0, 0.016, 0.010186206093580138),
            (-1, 0.016, 0.6366740981819749),
            (0, 30.0, 781672297823.95625),
            (-1, 30.0, 768532038938.95771),
        ];
        for (ord, x, want) in cases {
            let got = struve_l(ord, x).unwrap();
            assert!((got - want).abs() < 1e-12 * want.abs().max(1.0), "L{ord}({x})");
        }
        assert!(matches!(struve_l(0, 800.0), Err(Error::Range(_))));
        assert!(matches!(struve_l(2, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn struve_integral_representation_oracle() {
        // L_0(x) = (2/pi) int_0^{pi/2} sinh(x cos t) dt, checked by GK
        let x = 2.0;
        let f = |t: f64| C64::new((x * t.cos()).sinh(), 0.0);
        let (v, _) = adaptive_gk(&f, &[0.0, PI / 2.0], 1e-13, 1e-12, 200).unwrap();
        let want = 2.0 / PI * v.re;
        assert!((struve_l(0, x).unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn rapidity_closed_form_at_origin() {
        // alpha=0, abar=1, (T,Z)=(0,0): components are 2 K_{-1/2}(1), 2 K_{1/2}(1)
        let weight = |b: f64| {
            [
                C64::new((-0.5 * b).exp(), 0.0),
                C64::new(0.0, 0.0),
                C64::new((0.5 * b).exp(), 0.0),
                C64::new(0.0, 0.0),
            ]
        };
        let phase = |b: f64| C64::new(-b.cosh(), 0.0);
        let (s, _) = rapidity_integral(&weight, &phase, &spec()).unwrap();
        let want = 2.0 * (PI / 2.0).sqrt() * (-1.0f64).exp();
        assert!((s.c[0] - want).norm() < 1e-9);
        assert!((s.c[2] - want).norm() < 1e-9);
        assert!(s.c[1].norm() < 1e-14 && s.c[3].norm() < 1e-14);
    }

    #[test]
    fn rapidity_no_damping() {
        let weight = |_b: f64| [C64::new(1.0, 0.0); 4];
        let phase = |b: f64| C64::new(0.0, 2.0 * b); // pure oscillation
        assert!(matches!(
            rapidity_integral(&weight, &phase, &spec()),
            Err(Error::NoDamping)
        ));
    }
}
