//! Qubit states, drive parameters, eigenstates of the two-level Hamiltonian,
//! overlaps and fidelity.
//!
//! Basis convention: sigma3 |0> = +|0>, sigma3 |1> = -|1>, so the Hamiltonian
//! g*sigma3 + w*sigma1 is the matrix [[g, w], [w, -g]] in this basis.

use num_complex::Complex64 as C64;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::su2::Unitary2;

const SQRT_2_INV: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A normalized pure state of the two-level system, in the sigma3 eigenbasis.
///
/// Construction renormalizes; callers who care whether their input was
/// normalized can check [`QubitState::norm_defect`] first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    c0: C64,
    c1: C64,
}

impl QubitState {
    /// Build a state from amplitudes on |0> and |1>, renormalizing.
    ///
    /// A zero or non-finite vector is a domain error. Inputs that are merely
    /// unnormalized are accepted and scaled to unit norm (eigenvector
    /// formulas naturally produce unnormalized components); a warning is
    /// logged when the defect is above rounding noise.
    pub fn new(c0: C64, c1: C64) -> Result<QubitState> {
        if !(c0.re.is_finite() && c0.im.is_finite() && c1.re.is_finite() && c1.im.is_finite()) {
            return Err(Error::NonFinite("state amplitudes"));
        }
        let norm = (c0.norm_sqr() + c1.norm_sqr()).sqrt();
        if norm == 0.0 {
            return Err(Error::domain("state amplitudes must not both be zero"));
        }
        let defect = Self::norm_defect(c0, c1);
        if defect > 1e-12 {
            log::warn!("state ({c0}, {c1}) renormalized (norm defect {defect:.3e})");
        }
        Ok(QubitState {
            c0: c0 / norm,
            c1: c1 / norm,
        })
    }

    /// |norm - 1| of the raw amplitude pair.
    pub fn norm_defect(c0: C64, c1: C64) -> f64 {
        ((c0.norm_sqr() + c1.norm_sqr()).sqrt() - 1.0).abs()
    }

    /// The sigma3 = +1 basis state |0>.
    pub fn basis0() -> QubitState {
        QubitState {
            c0: C64::new(1.0, 0.0),
            c1: C64::new(0.0, 0.0),
        }
    }

    /// The sigma3 = -1 basis state |1>.
    pub fn basis1() -> QubitState {
        QubitState {
            c0: C64::new(0.0, 0.0),
            c1: C64::new(1.0, 0.0),
        }
    }

    pub fn c0(&self) -> C64 {
        self.c0
    }

    pub fn c1(&self) -> C64 {
        self.c1
    }

    pub fn amplitudes(&self) -> [C64; 2] {
        [self.c0, self.c1]
    }

    /// Apply a unitary; the result is renormalized to absorb rounding drift.
    pub fn evolve(&self, u: &Unitary2) -> QubitState {
        let v = u.mul_vec([self.c0, self.c1]);
        let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        QubitState {
            c0: v[0] / norm,
            c1: v[1] / norm,
        }
    }

    /// Multiply by a global phase (physically irrelevant, useful in tests).
    pub fn with_phase(&self, phase: f64) -> QubitState {
        let p = C64::from_polar(1.0, phase);
        QubitState {
            c0: self.c0 * p,
            c1: self.c1 * p,
        }
    }
}

impl fmt::Display for QubitState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn part(z: C64) -> String {
            if z.im == 0.0 {
                format!("{}", z.re)
            } else if z.im > 0.0 {
                format!("{}+{}i", z.re, z.im)
            } else {
                format!("{}{}i", z.re, z.im)
            }
        }
        write!(f, "{},{}", part(self.c0), part(self.c1))
    }
}

/// Which eigenstate of the two-level Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Ground,
    Excited,
}

/// Drive parameters: asymmetry `gamma`, coupling `omega`, and the optional
/// bounds `c` on |Gamma(t)| and `omega_max` on |omega(t)|. All are angular
/// frequencies.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LzParams {
    pub gamma: f64,
    pub omega: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
}

impl LzParams {
    pub fn new(gamma: f64, omega: f64) -> Result<LzParams> {
        if !gamma.is_finite() || !omega.is_finite() {
            return Err(Error::NonFinite("drive parameters"));
        }
        if omega <= 0.0 {
            return Err(Error::domain(format!("omega must be > 0, got {omega}")));
        }
        Ok(LzParams {
            gamma,
            omega,
            c: None,
            omega_max: None,
        })
    }

    pub fn with_bound(mut self, c: f64) -> Result<LzParams> {
        if !c.is_finite() {
            return Err(Error::NonFinite("drive bound c"));
        }
        if c <= 0.0 {
            return Err(Error::domain(format!("bound c must be > 0, got {c}")));
        }
        self.c = Some(c);
        Ok(self)
    }

    pub fn with_omega_max(mut self, omega_max: f64) -> Result<LzParams> {
        if !omega_max.is_finite() {
            return Err(Error::NonFinite("omega_max"));
        }
        if omega_max <= 0.0 {
            return Err(Error::domain(format!(
                "omega_max must be > 0, got {omega_max}"
            )));
        }
        self.omega_max = Some(omega_max);
        Ok(self)
    }

    /// Coupling to use in minimal-time formulas: when the coupling itself is
    /// a bounded control, the optimum pins it at `omega_max`.
    pub fn effective_coupling(&self) -> f64 {
        self.omega_max.unwrap_or(self.omega)
    }
}

/// Normalized eigenvector of `gamma*sigma3 + omega*sigma1`.
///
/// The ground eigenvalue is -sqrt(gamma^2 + omega^2); the (unnormalized)
/// eigenvector for eigenvalue lambda is (omega, lambda - gamma).
pub fn lz_eigenstate(gamma: f64, omega: f64, level: Level) -> Result<QubitState> {
    if !gamma.is_finite() || !omega.is_finite() {
        return Err(Error::NonFinite("eigenstate parameters"));
    }
    if omega <= 0.0 {
        return Err(Error::domain(format!("omega must be > 0, got {omega}")));
    }
    let s = gamma.hypot(omega);
    let lambda = match level {
        Level::Ground => -s,
        Level::Excited => s,
    };
    QubitState::new(C64::new(omega, 0.0), C64::new(lambda - gamma, 0.0))
}

/// Inner product <a|b> (conjugation on the first argument).
pub fn overlap(a: &QubitState, b: &QubitState) -> C64 {
    a.c0.conj() * b.c0 + a.c1.conj() * b.c1
}

/// Amplitude fidelity |<target|achieved>|, insensitive to global phases.
pub fn fidelity(achieved: &QubitState, target: &QubitState) -> f64 {
    overlap(target, achieved).norm()
}

/// Squared fidelity |<target|achieved>|^2.
pub fn fidelity_squared(achieved: &QubitState, target: &QubitState) -> f64 {
    overlap(target, achieved).norm_sqr()
}

/// Re-express a state in the sigma1 eigenbasis {(|0>+|1>)/sqrt2, (|0>-|1>)/sqrt2}.
///
/// The map is its own inverse.
pub fn to_sigma1_basis(s: &QubitState) -> QubitState {
    QubitState {
        c0: (s.c0 + s.c1) * SQRT_2_INV,
        c1: (s.c0 - s.c1) * SQRT_2_INV,
    }
}

/// Parse a state literal `"re+imi,re+imi"`, e.g. `"0.5+0.5i,0.70710678"`.
///
/// Returns the state and the norm defect of the literal as written (0 when
/// the user supplied normalized amplitudes).
pub fn parse_state_literal(s: &str) -> Result<(QubitState, f64)> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Parse(format!(
            "state literal must have two comma-separated amplitudes, got {s:?}"
        )));
    }
    let c0 = parse_complex(parts[0])?;
    let c1 = parse_complex(parts[1])?;
    let defect = QubitState::norm_defect(c0, c1);
    Ok((QubitState::new(c0, c1)?, defect))
}

/// Parse one complex literal: `a`, `bi`, `a+bi`, `a-bi` (exponents allowed).
pub fn parse_complex(s: &str) -> Result<C64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(Error::Parse("empty complex literal".into()));
    }
    let bad = |_| Error::Parse(format!("invalid complex literal {s:?}"));
    if let Some(body) = t.strip_suffix(['i', 'I']) {
        // Split off the real part, if any: the last '+'/'-' that is neither
        // the leading sign nor an exponent sign starts the imaginary part.
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let c = bytes[k];
            if (c == b'+' || c == b'-') && !matches!(bytes[k - 1], b'e' | b'E') {
                split = Some(k);
                break;
            }
        }
        let (re_str, im_str) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("", body),
        };
        let re = if re_str.is_empty() {
            0.0
        } else {
            re_str.parse::<f64>().map_err(bad)?
        };
        let im = match im_str {
            "" | "+" => 1.0,
            "-" => -1.0,
            _ => im_str.parse::<f64>().map_err(bad)?,
        };
        Ok(C64::new(re, im))
    } else {
        Ok(C64::new(t.parse::<f64>().map_err(bad)?, 0.0))
    }
}

impl FromStr for QubitState {
    type Err = Error;

    fn from_str(s: &str) -> Result<QubitState> {
        parse_state_literal(s).map(|(state, _)| state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::expm_pauli;

    fn apply_h(gamma: f64, omega: f64, v: &QubitState) -> [C64; 2] {
        [
            C64::new(gamma, 0.0) * v.c0() + C64::new(omega, 0.0) * v.c1(),
            C64::new(omega, 0.0) * v.c0() - C64::new(gamma, 0.0) * v.c1(),
        ]
    }

    #[test]
    fn ground_of_pure_sigma1() {
        let v = lz_eigenstate(0.0, 1.0, Level::Ground).unwrap();
        assert!((v.c0().re - SQRT_2_INV).abs() < 1e-15);
        assert!((v.c1().re + SQRT_2_INV).abs() < 1e-15);
    }

    #[test]
    fn eigenvalue_residual_over_parameter_sweep() {
        // ||H v - lambda v|| < 1e-12 across a deterministic (gamma, omega) grid.
        for i in 0..40 {
            for j in 1..40 {
                let gamma = -8.0 + 16.0 * (i as f64 + 0.31) / 40.0;
                let omega = 6.0 * (j as f64 + 0.17) / 40.0;
                for (level, sign) in [(Level::Ground, -1.0), (Level::Excited, 1.0)] {
                    let v = lz_eigenstate(gamma, omega, level).unwrap();
                    let lambda = sign * gamma.hypot(omega);
                    let hv = apply_h(gamma, omega, &v);
                    let r0 = hv[0] - C64::new(lambda, 0.0) * v.c0();
                    let r1 = hv[1] - C64::new(lambda, 0.0) * v.c1();
                    let res = (r0.norm_sqr() + r1.norm_sqr()).sqrt();
                    assert!(res < 1e-12, "residual {res:.3e} at ({gamma}, {omega})");
                }
            }
        }
    }

    #[test]
    fn ground_and_excited_are_orthogonal() {
        for &(g, w) in &[(2.0, 1.0), (-3.0, 0.5), (0.7, 4.0)] {
            let a = lz_eigenstate(g, w, Level::Ground).unwrap();
            let b = lz_eigenstate(g, w, Level::Excited).unwrap();
            assert!(overlap(&a, &b).norm() < 1e-12);
        }
    }

    #[test]
    fn paper_eigenvector_components() {
        // Ground of -gamma*sigma3 + omega*sigma1 is prop. to (omega, lambda + gamma)
        // with lambda = -sqrt(gamma^2 + omega^2).
        let (gamma, omega) = (2.0, 1.0);
        let v = lz_eigenstate(-gamma, omega, Level::Ground).unwrap();
        let lambda = -gamma.hypot(omega);
        let raw = [C64::new(omega, 0.0), C64::new(lambda + gamma, 0.0)];
        let norm = (raw[0].norm_sqr() + raw[1].norm_sqr()).sqrt();
        assert!((v.c0() - raw[0] / norm).norm() < 1e-15);
        assert!((v.c1() - raw[1] / norm).norm() < 1e-15);
    }

    #[test]
    fn overlap_of_opposite_asymmetry_grounds() {
        // At gamma/omega = 2 the grounds of H_{-gamma} and H_{+gamma} overlap
        // by cos(arctan 2) = 1/sqrt(5).
        let a = lz_eigenstate(-2.0, 1.0, Level::Ground).unwrap();
        let b = lz_eigenstate(2.0, 1.0, Level::Ground).unwrap();
        let direct = overlap(&a, &b).norm();
        assert!((direct - 0.4472135954999579).abs() < 1e-12);
        assert!((direct - (2.0f64.atan()).cos()).abs() < 1e-12);
    }

    #[test]
    fn overlap_basics_and_conjugate_symmetry() {
        let z0 = QubitState::basis0();
        let z1 = QubitState::basis1();
        assert_eq!(overlap(&z0, &z0), C64::new(1.0, 0.0));
        assert_eq!(overlap(&z0, &z1), C64::new(0.0, 0.0));

        let a = QubitState::new(C64::new(0.6, 0.1), C64::new(-0.3, 0.73)).unwrap();
        let b = QubitState::new(C64::new(0.2, -0.5), C64::new(0.8, 0.27)).unwrap();
        let ab = overlap(&a, &b);
        let ba = overlap(&b, &a);
        assert!((ab - ba.conj()).norm() < 1e-15);
    }

    #[test]
    fn fidelity_phase_invariance() {
        let a = QubitState::new(C64::new(0.6, 0.1), C64::new(-0.3, 0.73)).unwrap();
        let b = QubitState::new(C64::new(0.2, -0.5), C64::new(0.8, 0.27)).unwrap();
        let f = fidelity(&a, &b);
        for &phi in &[0.4, 1.9, -2.7] {
            assert!((fidelity(&a.with_phase(phi), &b) - f).abs() < 1e-14);
            assert!((fidelity(&a, &b.with_phase(phi)) - f).abs() < 1e-14);
        }
        assert!((fidelity(&a, &a) - 1.0).abs() < 1e-15);
        assert!((fidelity_squared(&a, &b) - f * f).abs() < 1e-15);
    }

    #[test]
    fn fidelity_extremes() {
        let z0 = QubitState::basis0();
        let z1 = QubitState::basis1();
        assert_eq!(fidelity(&z0, &z0), 1.0);
        assert_eq!(fidelity(&z0, &z1), 0.0);
    }

    #[test]
    fn sigma1_basis_change() {
        let plus = to_sigma1_basis(&QubitState::basis0());
        assert!((plus.c0().re - SQRT_2_INV).abs() < 1e-15);
        assert!((plus.c1().re - SQRT_2_INV).abs() < 1e-15);

        let x_plus = QubitState::new(C64::new(1.0, 0.0), C64::new(1.0, 0.0)).unwrap();
        let mapped = to_sigma1_basis(&x_plus);
        assert!((mapped.c0().re - 1.0).abs() < 1e-15);
        assert!(mapped.c1().norm() < 1e-15);
    }

    #[test]
    fn sigma1_basis_change_is_involutive() {
        let s = QubitState::new(C64::new(0.31, -0.4), C64::new(0.62, 0.59)).unwrap();
        let twice = to_sigma1_basis(&to_sigma1_basis(&s));
        assert!((twice.c0() - s.c0()).norm() < 1e-12);
        assert!((twice.c1() - s.c1()).norm() < 1e-12);
    }

    #[test]
    fn construction_normalizes_and_rejects_zero() {
        let s = QubitState::new(C64::new(3.0, 0.0), C64::new(0.0, 4.0)).unwrap();
        assert!((s.c0().norm_sqr() + s.c1().norm_sqr() - 1.0).abs() < 1e-12);
        assert!(QubitState::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0)).is_err());
        assert!(QubitState::new(C64::new(f64::NAN, 0.0), C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(LzParams::new(1.0, 0.0).is_err());
        assert!(LzParams::new(1.0, -1.0).is_err());
        let p = LzParams::new(2.0, 1.0).unwrap();
        assert!(p.with_bound(0.0).is_err());
        let p = LzParams::new(2.0, 1.0).unwrap().with_bound(5.0).unwrap();
        assert_eq!(p.c, Some(5.0));
        assert_eq!(p.effective_coupling(), 1.0);
        let p = p.with_omega_max(3.0).unwrap();
        assert_eq!(p.effective_coupling(), 3.0);
    }

    #[test]
    fn evolve_preserves_norm() {
        let s = QubitState::basis0();
        let u = expm_pauli(1.3, 0.7, 2.1).unwrap();
        let out = s.evolve(&u);
        assert!((out.c0().norm_sqr() + out.c1().norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_literal_parsing() {
        assert_eq!(parse_complex("1").unwrap(), C64::new(1.0, 0.0));
        assert_eq!(parse_complex("-0.5").unwrap(), C64::new(-0.5, 0.0));
        assert_eq!(parse_complex("2i").unwrap(), C64::new(0.0, 2.0));
        assert_eq!(parse_complex("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(parse_complex("0.5+0.5i").unwrap(), C64::new(0.5, 0.5));
        assert_eq!(parse_complex("1-2i").unwrap(), C64::new(1.0, -2.0));
        assert_eq!(parse_complex("1e-3+2e-4i").unwrap(), C64::new(1e-3, 2e-4));
        assert_eq!(parse_complex(" 0.1 + 0.9i ").unwrap(), C64::new(0.1, 0.9));
        assert!(parse_complex("").is_err());
        assert!(parse_complex("1+2j").is_err());
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn state_literal_parsing() {
        let (s, defect) = parse_state_literal("1,0").unwrap();
        assert_eq!(s, QubitState::basis0());
        assert_eq!(defect, 0.0);

        let (s, defect) = parse_state_literal("1,1").unwrap();
        assert!(defect > 0.1);
        assert!((s.c0().re - SQRT_2_INV).abs() < 1e-15);

        assert!(parse_state_literal("1").is_err());
        assert!(parse_state_literal("1,2,3").is_err());

        let s: QubitState = "0.70710678,0.70710678i".parse().unwrap();
        assert!((s.c0().re - SQRT_2_INV).abs() < 1e-8);
        assert!((s.c1().im - SQRT_2_INV).abs() < 1e-8);
    }
}
