//! Pinned chiral gamma-matrix algebra: 4x4 complex matrices, z-boosts,
//! bilinear currents, the trace-formula vierbein and its finite-difference
//! spinor connection.
//!
//! Convention gates (signature +,-,-,-):
//!   gamma0 = offdiag(1,1) blocks, gamma^k = blocks(0, sigma^k; -sigma^k, 0),
//!   so gamma0 (1,0,1,0)^T = (1,0,1,0)^T and
//!   exp(gamma0 gamma3 b/2)(1,0,1,0)^T = (e^{-b/2},0,e^{b/2},0)^T.

use crate::error::{Error, Result};
use num_complex::Complex64;

type C = Complex64;

#[inline]
fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Four complex chiral components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spinor4 {
    pub c: [C; 4],
}

impl Spinor4 {
    pub const ZERO: Spinor4 = Spinor4 {
        c: [C::new(0.0, 0.0); 4],
    };

    pub fn new(c1: C, c2: C, c3: C, c4: C) -> Spinor4 {
        Spinor4 { c: [c1, c2, c3, c4] }
    }

    /// Euclidean norm sqrt(psi^dag psi).
    pub fn norm(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// psi^dag psi.
    pub fn density(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn scale(&self, k: C) -> Spinor4 {
        let mut r = *self;
        for v in &mut r.c {
            *v *= k;
        }
        r
    }

    pub fn add(&self, o: &Spinor4) -> Spinor4 {
        let mut r = *self;
        for i in 0..4 {
            r.c[i] += o.c[i];
        }
        r
    }

    pub fn sub(&self, o: &Spinor4) -> Spinor4 {
        let mut r = *self;
        for i in 0..4 {
            r.c[i] -= o.c[i];
        }
        r
    }
}

/// Row-major 4x4 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix4C {
    pub m: [[C; 4]; 4],
}

impl Matrix4C {
    pub const ZERO: Matrix4C = Matrix4C {
        m: [[C::new(0.0, 0.0); 4]; 4],
    };

    pub fn identity() -> Matrix4C {
        let mut r = Matrix4C::ZERO;
        for i in 0..4 {
            r.m[i][i] = c(1.0, 0.0);
        }
        r
    }

    pub fn from_rows(rows: [[C; 4]; 4]) -> Matrix4C {
        Matrix4C { m: rows }
    }

    pub fn mul(&self, o: &Matrix4C) -> Matrix4C {
        let mut r = Matrix4C::ZERO;
        for i in 0..4 {
            for k in 0..4 {
                let a = self.m[i][k];
                if a == c(0.0, 0.0) {
                    continue;
                }
                for j in 0..4 {
                    r.m[i][j] += a * o.m[k][j];
                }
            }
        }
        r
    }

    pub fn mul_spinor(&self, s: &Spinor4) -> Spinor4 {
        let mut r = Spinor4::ZERO;
        for i in 0..4 {
            for j in 0..4 {
                r.c[i] += self.m[i][j] * s.c[j];
            }
        }
        r
    }

    pub fn add(&self, o: &Matrix4C) -> Matrix4C {
        let mut r = *self;
        for i in 0..4 {
            for j in 0..4 {
                r.m[i][j] += o.m[i][j];
            }
        }
        r
    }

    pub fn sub(&self, o: &Matrix4C) -> Matrix4C {
        let mut r = *self;
        for i in 0..4 {
            for j in 0..4 {
                r.m[i][j] -= o.m[i][j];
            }
        }
        r
    }

    pub fn scale(&self, k: C) -> Matrix4C {
        let mut r = *self;
        for i in 0..4 {
            for j in 0..4 {
                r.m[i][j] *= k;
            }
        }
        r
    }

    pub fn trace(&self) -> C {
        self.m[0][0] + self.m[1][1] + self.m[2][2] + self.m[3][3]
    }

    /// Max-abs entry; cheap matrix scale for convergence checks.
    pub fn max_abs(&self) -> f64 {
        self.m
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    fn minor3(&self, skip_r: usize, skip_c: usize) -> C {
        let mut a = [[c(0.0, 0.0); 3]; 3];
        let (mut ri, mut ci);
        ri = 0;
        for i in 0..4 {
            if i == skip_r {
                continue;
            }
            ci = 0;
            for j in 0..4 {
                if j == skip_c {
                    continue;
                }
                a[ri][ci] = self.m[i][j];
                ci += 1;
            }
            ri += 1;
        }
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }

    pub fn det(&self) -> C {
        let mut d = c(0.0, 0.0);
        for j in 0..4 {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            d += self.m[0][j] * self.minor3(0, j) * c(sign, 0.0);
        }
        d
    }

    /// Cofactor-expansion inverse; errors on |det| <= 1e-12 * scale^4.
    pub fn inverse(&self) -> Result<Matrix4C> {
        let d = self.det();
        let scale = self.max_abs().max(1e-300);
        if d.norm() <= 1e-12 * scale.powi(4) {
            return Err(Error::Singular { det_abs: d.norm() });
        }
        let inv_d = d.inv();
        let mut r = Matrix4C::ZERO;
        for i in 0..4 {
            for j in 0..4 {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                // adjugate: transpose of cofactor matrix
                r.m[j][i] = self.minor3(i, j) * c(sign, 0.0) * inv_d;
            }
        }
        Ok(r)
    }

    pub fn adjoint(&self) -> Matrix4C {
        let mut r = Matrix4C::ZERO;
        for i in 0..4 {
            for j in 0..4 {
                r.m[i][j] = self.m[j][i].conj();
            }
        }
        r
    }
}

/// Matrix exponential by scaling and squaring with a Taylor core.
pub fn expm(a: &Matrix4C) -> Matrix4C {
    let norm = a.max_abs();
    let s = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let b = a.scale(c(0.5f64.powi(s), 0.0));
    // Taylor: sum b^k / k!
    let mut term = Matrix4C::identity();
    let mut sum = Matrix4C::identity();
    for k in 1..=18 {
        term = term.mul(&b).scale(c(1.0 / k as f64, 0.0));
        sum = sum.add(&term);
    }
    let mut r = sum;
    for _ in 0..s {
        r = r.mul(&r);
    }
    r
}

/// Real four-vector (t, x, y, z), signature (+,-,-,-).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourVector {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FourVector {
    pub fn new(t: f64, x: f64, y: f64, z: f64) -> FourVector {
        FourVector { t, x, y, z }
    }

    pub fn minkowski_sq(&self) -> f64 {
        self.t * self.t - self.x * self.x - self.y * self.y - self.z * self.z
    }

    pub fn get(&self, mu: usize) -> f64 {
        match mu {
            0 => self.t,
            1 => self.x,
            2 => self.y,
            _ => self.z,
        }
    }

    pub fn with(&self, mu: usize, v: f64) -> FourVector {
        let mut r = *self;
        match mu {
            0 => r.t = v,
            1 => r.x = v,
            2 => r.y = v,
            _ => r.z = v,
        }
        r
    }
}

/// Metric signs eta_{mu mu}.
pub const ETA: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// The pinned gamma matrices.
pub struct GammaSet {
    /// gamma^0..gamma^3
    pub g: [Matrix4C; 4],
    pub g5: Matrix4C,
}

pub fn gamma_set() -> GammaSet {
    let o = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    let g0 = Matrix4C::from_rows([
        [o, o, one, o],
        [o, o, o, one],
        [one, o, o, o],
        [o, one, o, o],
    ]);
    let g1 = Matrix4C::from_rows([
        [o, o, o, one],
        [o, o, one, o],
        [o, -one, o, o],
        [-one, o, o, o],
    ]);
    let g2 = Matrix4C::from_rows([
        [o, o, o, -i],
        [o, o, i, o],
        [o, i, o, o],
        [-i, o, o, o],
    ]);
    let g3 = Matrix4C::from_rows([
        [o, o, one, o],
        [o, o, o, -one],
        [-one, o, o, o],
        [o, one, o, o],
    ]);
    let g5 = Matrix4C::from_rows([
        [-one, o, o, o],
        [o, -one, o, o],
        [o, o, one, o],
        [o, o, o, one],
    ]);
    GammaSet {
        g: [g0, g1, g2, g3],
        g5,
    }
}

impl GammaSet {
    /// gamma_mu = eta_{mu nu} gamma^nu (no sum; diagonal metric).
    pub fn lower(&self, mu: usize) -> Matrix4C {
        self.g[mu].scale(c(ETA[mu], 0.0))
    }
}

/// exp(-gamma0 gamma3 w/2) = diag(e^{w/2}, e^{-w/2}, e^{-w/2}, e^{w/2}).
pub fn boost_z(w: f64) -> Matrix4C {
    let ep = (0.5 * w).exp();
    let em = (-0.5 * w).exp();
    let mut r = Matrix4C::ZERO;
    r.m[0][0] = c(ep, 0.0);
    r.m[1][1] = c(em, 0.0);
    r.m[2][2] = c(em, 0.0);
    r.m[3][3] = c(ep, 0.0);
    r
}

/// j^mu = psi^dag gamma0 gamma^mu psi (real by construction).
pub fn current(psi: &Spinor4) -> FourVector {
    let gs = gamma_set();
    let mut j = [0.0f64; 4];
    for mu in 0..4 {
        let gpsi = gs.g[0].mul(&gs.g[mu]).mul_spinor(psi);
        let mut acc = c(0.0, 0.0);
        for i in 0..4 {
            acc += psi.c[i].conj() * gpsi.c[i];
        }
        j[mu] = acc.re;
    }
    FourVector::new(j[0], j[1], j[2], j[3])
}

/// Frame field from the trace formula.
#[derive(Debug, Clone, Copy)]
pub struct Tetrad {
    /// e^a_mu (frame index first)
    pub e_up: [[f64; 4]; 4],
    /// e^mu_a (coordinate index first)
    pub e_down: [[f64; 4]; 4],
}

/// e^a_mu = 1/4 Tr[R^{-1} gamma^a R gamma_mu], e^mu_a = 1/4 Tr[R gamma^mu R^{-1} gamma_a].
pub fn vierbein(r: &Matrix4C) -> Result<Tetrad> {
    let rinv = r.inverse()?;
    let gs = gamma_set();
    let mut e_up = [[0.0f64; 4]; 4];
    let mut e_down = [[0.0f64; 4]; 4];
    for a in 0..4 {
        let left = rinv.mul(&gs.g[a]).mul(r);
        for mu in 0..4 {
            e_up[a][mu] = 0.25 * left.mul(&gs.lower(mu)).trace().re;
        }
    }
    for mu in 0..4 {
        let left = r.mul(&gs.g[mu]).mul(&rinv);
        for a in 0..4 {
            e_down[mu][a] = 0.25 * left.mul(&gs.lower(a)).trace().re;
        }
    }
    Ok(Tetrad { e_up, e_down })
}

/// Omega_mu = 1/4 Omega_{ij mu} gamma^i gamma^j with
/// Omega^i_{j mu} = -sum_nu e^nu_j d_mu e^i_nu (4th-order central differences).
pub fn spinor_connection<F>(
    tetrad_field: &F,
    point: &FourVector,
    h: f64,
) -> Result<[Matrix4C; 4]>
where
    F: Fn(&FourVector) -> Result<Tetrad> + ?Sized,
{
    let center = tetrad_field(point)?;
    let gs = gamma_set();
    let mut out = [Matrix4C::ZERO; 4];
    for mu in 0..4 {
        let x = point.get(mu);
        let tp2 = tetrad_field(&point.with(mu, x + 2.0 * h))?;
        let tp1 = tetrad_field(&point.with(mu, x + h))?;
        let tm1 = tetrad_field(&point.with(mu, x - h))?;
        let tm2 = tetrad_field(&point.with(mu, x - 2.0 * h))?;
        let mut de = [[0.0f64; 4]; 4]; // d_mu e^i_nu
        for i in 0..4 {
            for nu in 0..4 {
                de[i][nu] = (-tp2.e_up[i][nu] + 8.0 * tp1.e_up[i][nu] - 8.0 * tm1.e_up[i][nu]
                    + tm2.e_up[i][nu])
                    / (12.0 * h);
            }
        }
        let mut omega_mat = Matrix4C::ZERO;
        for i in 0..4 {
            for j in 0..4 {
                let mut om_up = 0.0; // Omega^i_{j mu}
                for nu in 0..4 {
                    om_up -= center.e_down[nu][j] * de[i][nu];
                }
                let om_low = ETA[i] * om_up; // Omega_{ij mu}
                if om_low != 0.0 {
                    omega_mat =
                        omega_mat.add(&gs.g[i].mul(&gs.g[j]).scale(c(0.25 * om_low, 0.0)));
                }
            }
        }
        out[mu] = omega_mat;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: C, b: C, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn clifford_closure() {
        let gs = gamma_set();
        for mu in 0..4 {
            for nu in 0..4 {
                let anti = gs.g[mu].mul(&gs.g[nu]).add(&gs.g[nu].mul(&gs.g[mu]));
                let want = if mu == nu { 2.0 * ETA[mu] } else { 0.0 };
                for i in 0..4 {
                    for j in 0..4 {
                        let w = if i == j { c(want, 0.0) } else { c(0.0, 0.0) };
                        assert!(approx(anti.m[i][j], w, 1e-15), "{{g{mu},g{nu}}}");
                    }
                }
            }
        }
    }

    #[test]
    fn gamma5_pinned() {
        let gs = gamma_set();
        // g5 = i g0 g1 g2 g3 and squares to identity
        let prod = gs.g[0]
            .mul(&gs.g[1])
            .mul(&gs.g[2])
            .mul(&gs.g[3])
            .scale(c(0.0, 1.0));
        assert!(prod.sub(&gs.g5).max_abs() < 1e-15);
        assert!(gs.g5.mul(&gs.g5).sub(&Matrix4C::identity()).max_abs() < 1e-15);
    }

    #[test]
    fn rest_spinor_gates() {
        let gs = gamma_set();
        let rest = Spinor4::new(c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        let g0r = gs.g[0].mul_spinor(&rest);
        assert!(g0r.sub(&rest).norm() < 1e-15);
        // exp(+g0 g3 b/2) rest = (e^{-b/2},0,e^{b/2},0)
        let b = 0.7;
        let g03 = gs.g[0].mul(&gs.g[3]).scale(c(0.5 * b, 0.0));
        let got = expm(&g03).mul_spinor(&rest);
        assert!((got.c[0] - c((-0.5 * b).exp(), 0.0)).norm() < 1e-13);
        assert!((got.c[2] - c((0.5 * b).exp(), 0.0)).norm() < 1e-13);
    }

    #[test]
    fn boost_properties() {
        let id = boost_z(0.0);
        assert!(id.sub(&Matrix4C::identity()).max_abs() < 1e-15);
        let w1 = 0.4;
        let w2 = -1.1;
        let comp = boost_z(w1).mul(&boost_z(w2));
        assert!(comp.sub(&boost_z(w1 + w2)).max_abs() < 1e-13);
        let rest = Spinor4::new(c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        let got = boost_z(w1).mul_spinor(&rest);
        assert!((got.c[0].re - (0.5 * w1).exp()).abs() < 1e-14);
        assert!((got.c[2].re - (-0.5 * w1).exp()).abs() < 1e-14);
        // matches expm(-g0 g3 w/2)
        let gs = gamma_set();
        let gen = gs.g[0].mul(&gs.g[3]).scale(c(-0.5 * w1, 0.0));
        assert!(expm(&gen).sub(&boost_z(w1)).max_abs() < 1e-12);
    }

    #[test]
    fn current_examples() {
        let rest = Spinor4::new(c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0));
        let j = current(&rest);
        assert!((j.t - 2.0).abs() < 1e-14 && j.x.abs() < 1e-14 && j.z.abs() < 1e-14);
        let b = 0.9f64;
        let boosted = Spinor4::new(
            c((-0.5 * b).exp(), 0.0),
            c(0.0, 0.0),
            c((0.5 * b).exp(), 0.0),
            c(0.0, 0.0),
        );
        let j = current(&boosted);
        assert!((j.t - 2.0 * b.cosh()).abs() < 1e-12);
        assert!((j.z - 2.0 * b.sinh()).abs() < 1e-12);
    }

    #[test]
    fn current_cauchy_schwarz_and_covariance() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let mut s = Spinor4::ZERO;
            for i in 0..4 {
                s.c[i] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
            let j = current(&s);
            assert!(j.minkowski_sq() >= -1e-12);
            assert!(j.t >= j.z.abs() - 1e-12);
            let w: f64 = rng.gen_range(-3.0..3.0);
            let jb = current(&boost_z(w).mul_spinor(&s));
            // boost_z(w) carries a +z-moving current toward rest: rapidity -w
            let jt = j.t * w.cosh() - j.z * w.sinh();
            let jz = j.z * w.cosh() - j.t * w.sinh();
            assert!((jb.t - jt).abs() < 1e-10 * jt.abs().max(1.0));
            assert!((jb.z - jz).abs() < 1e-10 * jt.abs().max(1.0));
        }
    }

    #[test]
    fn inverse_round_trip() {
        let mut a = Matrix4C::identity();
        a.m[0][1] = c(0.3, -0.2);
        a.m[2][0] = c(-1.1, 0.4);
        a.m[3][2] = c(0.0, 2.0);
        a.m[1][3] = c(0.5, 0.5);
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).sub(&Matrix4C::identity()).max_abs() < 1e-13);
        let sing = Matrix4C::ZERO;
        assert!(matches!(sing.inverse(), Err(Error::Singular { .. })));
    }

    #[test]
    fn vierbein_identity_and_boost() {
        let t = vierbein(&Matrix4C::identity()).unwrap();
        for a in 0..4 {
            for mu in 0..4 {
                let want = if a == mu { 1.0 } else { 0.0 };
                assert!((t.e_up[a][mu] - want).abs() < 1e-14);
            }
        }
        let w = 0.8;
        let t = vierbein(&boost_z(w)).unwrap();
        assert!((t.e_up[0][0] - w.cosh()).abs() < 1e-12);
        assert!((t.e_up[0][3] + w.sinh()).abs() < 1e-12);
        assert!((t.e_up[3][0] + w.sinh()).abs() < 1e-12);
        assert!((t.e_up[3][3] - w.cosh()).abs() < 1e-12);
        assert!((t.e_up[1][1] - 1.0).abs() < 1e-12);
        // mutual inverse
        for mu in 0..4 {
            for nu in 0..4 {
                let mut s = 0.0;
                for a in 0..4 {
                    s += t.e_down[mu][a] * t.e_up[a][nu];
                }
                let want = if mu == nu { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn connection_of_constant_field_vanishes() {
        let w = 1.3;
        let field = move |_: &FourVector| vierbein(&boost_z(w));
        let om = spinor_connection(&field, &FourVector::new(0.0, 0.0, 0.0, 1.0), 1e-3).unwrap();
        for mu in 0..4 {
            assert!(om[mu].max_abs() < 1e-11);
        }
    }

    #[test]
    fn connection_antisymmetry() {
        // position-dependent boost field: w = 0.3 T + 0.2 Z
        let gs = gamma_set();
        let field = |p: &FourVector| vierbein(&boost_z(0.3 * p.t + 0.2 * p.z));
        let om = spinor_connection(&field, &FourVector::new(0.5, 0.0, 0.0, 2.0), 1e-3).unwrap();
        let g0 = gs.g[0];
        for mu in 0..4 {
            // gamma0 Omega^dag gamma0 = -Omega
            let lhs = g0.mul(&om[mu].adjoint()).mul(&g0);
            assert!(lhs.add(&om[mu]).max_abs() < 1e-10);
        }
        // nonzero where it should be
        assert!(om[0].max_abs() > 1e-3);
    }

    #[test]
    fn expm_matches_closed_form() {
        // exp(theta * G) with G^2 = -F^2/4 * structure checked against boost_z
        let gs = gamma_set();
        let w = -0.6;
        let gen = gs.g[0].mul(&gs.g[3]).scale(c(-0.5 * w, 0.0));
        assert!(expm(&gen).sub(&boost_z(w)).max_abs() < 1e-13);
    }
}
