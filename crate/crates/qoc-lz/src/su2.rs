//! Exact special-unitary 2x2 algebra.
//!
//! Everything a two-level drive produces lives in SU(2): segment propagators
//! are closed-form exponentials of a*sigma3 + b*sigma1, and any element can be
//! written as the three-factor product
//!
//!   U = exp(-i sigma3 tau3/2) exp(-i sigma1 tau1/2) exp(-i sigma2 tau2/2).
//!
//! This module provides the exponential, the composition and the (canonical,
//! deterministic) decomposition into those angles.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::tol::Tolerances;

/// A 2x2 special-unitary matrix, row-major: [[a, b], [c, d]].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2 {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

/// Angles of the sigma3 * sigma1 * sigma2 factorization, in radians.
///
/// Canonical ranges produced by [`euler_decompose`]: `tau1` in [-pi/2, pi/2],
/// `tau2` in (-pi, pi] (exactly 0 at the gimbal-locked fibre |cos tau1| = 0),
/// and `tau3` in (-2*pi, 2*pi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub tau3: f64,
    pub tau1: f64,
    pub tau2: f64,
}

impl EulerAngles {
    pub fn new(tau3: f64, tau1: f64, tau2: f64) -> Self {
        Self { tau3, tau1, tau2 }
    }
}

impl Unitary2 {
    pub const IDENTITY: Unitary2 = Unitary2 {
        a: C64::new(1.0, 0.0),
        b: C64::new(0.0, 0.0),
        c: C64::new(0.0, 0.0),
        d: C64::new(1.0, 0.0),
    };

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self { a, b, c, d }
    }

    /// Matrix product `self * rhs` (self acts after rhs).
    pub fn mul(&self, rhs: &Unitary2) -> Unitary2 {
        Unitary2 {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    /// Conjugate transpose (= inverse for unitaries).
    pub fn adjoint(&self) -> Unitary2 {
        Unitary2 {
            a: self.a.conj(),
            b: self.c.conj(),
            c: self.b.conj(),
            d: self.d.conj(),
        }
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    /// Apply to a column vector.
    pub fn mul_vec(&self, v: [C64; 2]) -> [C64; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    /// Largest entrywise deviation of U†U from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        let g = self.adjoint().mul(self);
        let one = C64::new(1.0, 0.0);
        (g.a - one)
            .norm()
            .max(g.b.norm())
            .max(g.c.norm())
            .max((g.d - one).norm())
    }

    /// Combined defect: max of the unitarity defect and |det - 1|.
    pub fn special_unitarity_defect(&self) -> f64 {
        self.unitarity_defect()
            .max((self.det() - C64::new(1.0, 0.0)).norm())
    }

    /// Largest entrywise distance to another matrix.
    pub fn max_entry_dist(&self, other: &Unitary2) -> f64 {
        (self.a - other.a)
            .norm()
            .max((self.b - other.b).norm())
            .max((self.c - other.c).norm())
            .max((self.d - other.d).norm())
    }

    /// Spectral (operator 2-) norm of `self - other`.
    ///
    /// For a 2x2 matrix E this is the square root of the larger eigenvalue of
    /// E†E, available in closed form from its trace and determinant.
    pub fn op_norm_dist(&self, other: &Unitary2) -> f64 {
        let e = Unitary2 {
            a: self.a - other.a,
            b: self.b - other.b,
            c: self.c - other.c,
            d: self.d - other.d,
        };
        let trace = e.a.norm_sqr() + e.b.norm_sqr() + e.c.norm_sqr() + e.d.norm_sqr();
        let det_sq = e.det().norm_sqr();
        let disc = (trace * trace - 4.0 * det_sq).max(0.0);
        (0.5 * (trace + disc.sqrt())).sqrt()
    }
}

fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// sin(x)/x with the series branch for small |x|.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        // sin(x)/x = 1 - x^2/6 + O(x^4); the next term is below 1e-33 here.
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Closed-form propagator `exp(-i (a*sigma3 + b*sigma1) t)`.
///
/// With s = sqrt(a^2 + b^2) this equals
/// cos(s t) 1 - i sin(s t) (a*sigma3 + b*sigma1)/s, and the identity for
/// s = 0. Unit determinant holds by construction.
pub fn expm_pauli(a: f64, b: f64, t: f64) -> Result<Unitary2> {
    check_finite(&[a, b, t], "expm_pauli coefficients")?;
    let s = a.hypot(b);
    let phase = s * t;
    let cos = phase.cos();
    // sin(s t)/s, continuous through s = 0 where it equals t.
    let k = t * sinc(phase);
    Ok(Unitary2 {
        a: C64::new(cos, -a * k),
        b: C64::new(0.0, -b * k),
        c: C64::new(0.0, -b * k),
        d: C64::new(cos, a * k),
    })
}

/// Instantaneous sigma3 rotation `exp(-i area sigma3)` = diag(e^{-i area}, e^{+i area}).
pub fn sigma3_pulse(area: f64) -> Unitary2 {
    Unitary2 {
        a: C64::from_polar(1.0, -area),
        b: C64::new(0.0, 0.0),
        c: C64::new(0.0, 0.0),
        d: C64::from_polar(1.0, area),
    }
}

/// Product of the three factor exponentials, in closed form.
pub fn euler_compose(angles: EulerAngles) -> Result<Unitary2> {
    check_finite(&[angles.tau3, angles.tau1, angles.tau2], "Euler angles")?;
    let (s1, c1) = (0.5 * angles.tau1).sin_cos();
    let (s2, c2) = (0.5 * angles.tau2).sin_cos();
    let z = C64::from_polar(1.0, -0.5 * angles.tau3);
    let zc = z.conj();
    Ok(Unitary2 {
        a: z * C64::new(c1 * c2, -s1 * s2),
        b: -z * C64::new(c1 * s2, s1 * c2),
        c: zc * C64::new(c1 * s2, -s1 * c2),
        d: zc * C64::new(c1 * c2, s1 * s2),
    })
}

const GIMBAL_EPS: f64 = 1e-12;

/// Factor `u` into Euler angles such that [`euler_compose`] reproduces it.
///
/// Deterministic canonical branch: cos(tau1) >= 0, so tau1 lands in
/// [-pi/2, pi/2]; tau2 = atan2 of the remaining pair, in (-pi, pi]; tau3
/// carries the residual phase, in (-2*pi, 2*pi]. On the gimbal-locked fibre
/// (|cos tau1| = 0, where only tau3 + tau2 or tau3 - tau2 is determined) the
/// representative with tau2 = 0 is returned.
pub fn euler_decompose(u: &Unitary2) -> Result<EulerAngles> {
    euler_decompose_with(u, &Tolerances::DEFAULT)
}

/// [`euler_decompose`] with an explicit tolerance record for the input check.
pub fn euler_decompose_with(u: &Unitary2, tol: &Tolerances) -> Result<EulerAngles> {
    let defect = u.special_unitarity_defect();
    if !defect.is_finite() || defect > tol.unitarity_input {
        return Err(Error::NotUnitary {
            defect,
            tol: tol.unitarity_input,
        });
    }

    // With U = Z(tau3) X(tau1) Y(tau2) one finds, independent of tau3:
    //   u00 * u10          = (cos(tau1) sin(tau2) - i sin(tau1)) / 2
    //   |u00|^2 - |u10|^2  =  cos(tau1) cos(tau2)
    let m = u.a * u.c;
    let sin_t1 = (-2.0 * m.im).clamp(-1.0, 1.0);
    let p = 2.0 * m.re;
    let q = u.a.norm_sqr() - u.c.norm_sqr();
    let r = p.hypot(q);

    let (tau1, tau2) = if r < GIMBAL_EPS {
        (sin_t1.atan2(r), 0.0)
    } else {
        (sin_t1.atan2(r), p.atan2(q))
    };

    let (s1, c1) = (0.5 * tau1).sin_cos();
    let (s2, c2) = (0.5 * tau2).sin_cos();
    // tau3-free factors of u00 and u10; at least one has modulus >= 1/sqrt(2).
    let w = C64::new(c1 * c2, -s1 * s2);
    let v = C64::new(c1 * s2, -s1 * c2);
    let tau3 = if u.a.norm() >= u.c.norm() {
        -2.0 * (u.a * w.conj()).arg()
    } else {
        2.0 * (u.c * v.conj()).arg()
    };

    Ok(EulerAngles { tau3, tau1, tau2 })
}

/// Ideal sigma3 delta rotation reached by `expm_pauli(g, omega, area/g)` as
/// |g| grows: the off-axis coupling drops out in that limit.
pub fn delta_pulse_limit_error(area: f64, omega: f64, gamma: f64) -> f64 {
    let approx = expm_pauli(gamma, omega, area / gamma).expect("finite inputs");
    approx.op_norm_dist(&sigma3_pulse(area))
}

/// Wrap an angle into (-pi, pi].
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x % (2.0 * PI);
    if y <= -PI {
        y += 2.0 * PI;
    } else if y > PI {
        y -= 2.0 * PI;
    }
    y
}
