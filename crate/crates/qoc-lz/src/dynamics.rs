//! Propagation of protocols and drives.
//!
//! Piecewise-constant protocols are propagated exactly through closed-form
//! segment exponentials; ramps use a fixed 64-substep midpoint-exponential
//! product (unitary by construction, second-order accurate). Arbitrary
//! drives integrate through an embedded Dormand-Prince 4(5) scheme. The
//! Euler-angle system
//!
//!   tau1' = 2 omega cos(tau3)
//!   tau2' = -2 omega sin(tau3) / cos(tau1)
//!   tau3' = 2 Gamma + 2 omega sin(tau3) sin(tau1) / cos(tau1)
//!
//! is integrated forward from (0, 0, 0), and inverted: prescribing tau3(t)
//! determines tau1 by quadrature and then Gamma(t) from the third equation.

use num_complex::Complex64 as C64;
use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::protocol::{Protocol, Segment};
use crate::states::QubitState;
use crate::su2::{expm_pauli, sigma3_pulse, EulerAngles, Unitary2};

/// Substeps used for one ramp segment.
const RAMP_SUBSTEPS: usize = 64;

/// Guard threshold for the tau1 = pi/2 coordinate singularity.
const SINGULARITY_LIMIT: f64 = 1e-6;

/// Switching-ramp profiles on [0, 1]; all run from 0 to 1.
pub mod shape {
    use std::f64::consts::PI;

    pub fn linear(u: f64) -> f64 {
        u
    }

    pub fn cosine(u: f64) -> f64 {
        0.5 * (1.0 - (PI * u).cos())
    }

    pub fn smoothstep(u: f64) -> f64 {
        u * u * (3.0 - 2.0 * u)
    }
}

/// Propagator of one segment; `ramp_shape` maps [0,1] to [0,1].
fn segment_propagator(seg: &Segment, ramp_shape: &dyn Fn(f64) -> f64) -> Unitary2 {
    match *seg {
        Segment::DeltaPulse { area } => sigma3_pulse(area),
        Segment::Constant { gamma, omega, duration } => {
            expm_pauli(gamma, omega, duration).expect("validated segment")
        }
        Segment::Ramp { gamma_start, gamma_end, omega, duration } => {
            let dt = duration / RAMP_SUBSTEPS as f64;
            let mut u = Unitary2::IDENTITY;
            for k in 0..RAMP_SUBSTEPS {
                let frac = (k as f64 + 0.5) / RAMP_SUBSTEPS as f64;
                let gamma = gamma_start + (gamma_end - gamma_start) * ramp_shape(frac);
                u = expm_pauli(gamma, omega, dt)
                    .expect("validated segment")
                    .mul(&u);
            }
            u
        }
    }
}

/// Exact propagator of a whole protocol (linear ramp profile).
pub fn protocol_propagator(p: &Protocol) -> Unitary2 {
    protocol_propagator_shaped(p, &shape::linear)
}

/// Exact propagator with an explicit ramp profile.
pub fn protocol_propagator_shaped(p: &Protocol, ramp_shape: &dyn Fn(f64) -> f64) -> Unitary2 {
    let mut u = Unitary2::IDENTITY;
    for seg in p.segments() {
        u = segment_propagator(seg, ramp_shape).mul(&u);
    }
    u
}

/// Apply each segment's exact propagator to `initial`, left to right in time
/// order. Unitarity of every factor keeps the norm at 1 to rounding.
pub fn propagate_protocol(p: &Protocol, initial: &QubitState) -> QubitState {
    propagate_protocol_shaped(p, initial, &shape::linear)
}

/// [`propagate_protocol`] with an explicit ramp profile.
pub fn propagate_protocol_shaped(
    p: &Protocol,
    initial: &QubitState,
    ramp_shape: &dyn Fn(f64) -> f64,
) -> QubitState {
    initial.evolve(&protocol_propagator_shaped(p, ramp_shape))
}

/// A time-dependent drive (Gamma(t), omega(t)) on [0, horizon].
pub struct DriveFunction {
    gamma: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    omega: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    horizon: f64,
}

impl fmt::Debug for DriveFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DriveFunction")
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

impl DriveFunction {
    pub fn new(
        gamma: impl Fn(f64) -> f64 + Send + Sync + 'static,
        omega: impl Fn(f64) -> f64 + Send + Sync + 'static,
        horizon: f64,
    ) -> Result<DriveFunction> {
        if !horizon.is_finite() || horizon < 0.0 {
            return Err(Error::domain(format!(
                "horizon must be finite and >= 0, got {horizon}"
            )));
        }
        Ok(DriveFunction {
            gamma: Box::new(gamma),
            omega: Box::new(omega),
            horizon,
        })
    }

    pub fn constant(gamma: f64, omega: f64, horizon: f64) -> Result<DriveFunction> {
        if !gamma.is_finite() || !omega.is_finite() {
            return Err(Error::NonFinite("drive coefficients"));
        }
        DriveFunction::new(move |_| gamma, move |_| omega, horizon)
    }

    /// View a piecewise-constant/ramped protocol as a drive. Protocols with
    /// delta pulses have no finite drive representation.
    pub fn from_protocol(p: &Protocol, ramp_shape: fn(f64) -> f64) -> Result<DriveFunction> {
        let mut table: Vec<(f64, f64, Segment)> = Vec::new();
        let mut t = 0.0;
        for seg in p.segments() {
            match seg {
                Segment::DeltaPulse { .. } => {
                    return Err(Error::domain(
                        "a protocol with delta pulses cannot be expressed as a finite drive"
                            .to_string(),
                    ))
                }
                _ => {
                    let d = seg.duration();
                    table.push((t, t + d, *seg));
                    t += d;
                }
            }
        }
        let horizon = t;
        let lookup = move |t: f64| -> (f64, f64) {
            let t = t.clamp(0.0, horizon);
            let row = table
                .iter()
                .find(|(a, b, _)| t >= *a && t < *b)
                .or(table.last());
            match row {
                Some((_, _, Segment::Constant { gamma, omega, .. })) => (*gamma, *omega),
                Some((a, b, Segment::Ramp { gamma_start, gamma_end, omega, .. })) => {
                    let frac = if b > a { (t - a) / (b - a) } else { 1.0 };
                    (
                        gamma_start + (gamma_end - gamma_start) * ramp_shape(frac.clamp(0.0, 1.0)),
                        *omega,
                    )
                }
                _ => (0.0, 0.0),
            }
        };
        let lookup2 = lookup.clone();
        DriveFunction::new(move |t| lookup(t).0, move |t| lookup2(t).1, horizon)
    }

    pub fn gamma(&self, t: f64) -> f64 {
        (self.gamma)(t)
    }

    pub fn omega(&self, t: f64) -> f64 {
        (self.omega)(t)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }
}

// Dormand-Prince 4(5) tableau.
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand-Prince integration of y' = rhs(t, y) from t0 to t1.
/// `on_step` observes every accepted step (including the initial state), may
/// project the state back onto a constraint manifold, and may abort the
/// integration by returning an error.
fn rk45<const N: usize>(
    rhs: &mut dyn FnMut(f64, &[f64; N]) -> [f64; N],
    y0: [f64; N],
    t0: f64,
    t1: f64,
    atol: f64,
    rtol: f64,
    on_step: &mut dyn FnMut(f64, &mut [f64; N]) -> Result<()>,
) -> Result<[f64; N]> {
    let span = t1 - t0;
    if span == 0.0 {
        let mut y = y0;
        on_step(t0, &mut y)?;
        return Ok(y);
    }
    let mut t = t0;
    let mut y = y0;
    let mut h = span * 1e-2;
    let h_min = span * 1e-14;
    on_step(t, &mut y)?;

    let mut k = [[0.0; N]; 7];
    let done = span.abs() * 1e-13;
    for _ in 0..2_000_000u32 {
        if t1 - t <= done {
            return Ok(y);
        }
        h = h.min(t1 - t);
        k[0] = rhs(t, &y);
        for stage in 0..6 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                let a = DP_A[stage][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[stage + 1] = rhs(t + DP_C[stage] * h, &ys);
        }
        // 5th-order solution reuses the last coefficient row.
        let mut y5 = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let a = DP_A[5][j];
            if a != 0.0 {
                for i in 0..N {
                    y5[i] += h * a * kj[i];
                }
            }
        }
        let mut err = [0.0; N];
        for (j, kj) in k.iter().enumerate() {
            let db = (if j < 6 { DP_A[5][j] } else { 0.0 }) - DP_B4[j];
            if db != 0.0 {
                for i in 0..N {
                    err[i] += h * db * kj[i];
                }
            }
        }
        let mut scaled = 0.0;
        for i in 0..N {
            let scale = atol + rtol * y[i].abs().max(y5[i].abs());
            scaled += (err[i] / scale).powi(2);
        }
        let err_norm = (scaled / N as f64).sqrt();

        if err_norm <= 1.0 || h.abs() <= h_min.abs() {
            t += h;
            y = y5;
            on_step(t, &y)?;
        }
        let factor = if err_norm > 0.0 {
            (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
        if h.abs() < h_min.abs() && t1 - t > done {
            return Err(Error::StepUnderflow { t, dt: h });
        }
    }
    Err(Error::Internal(
        "integration exceeded the step budget".to_string(),
    ))
}

fn schrodinger_rhs(gamma: f64, omega: f64, y: &[f64; 4]) -> [f64; 4] {
    // y = [Re c0, Im c0, Re c1, Im c1]; i y' = H y with
    // H = [[gamma, omega], [omega, -gamma]].
    [
        gamma * y[1] + omega * y[3],
        -gamma * y[0] - omega * y[2],
        omega * y[1] - gamma * y[3],
        -omega * y[0] + gamma * y[2],
    ]
}

/// Integrate i psi' = (Gamma(t) sigma3 + omega(t) sigma1) psi over the drive
/// horizon with local error control `tol` (used as both absolute and
/// relative tolerance).
pub fn integrate_schrodinger(
    drive: &DriveFunction,
    initial: &QubitState,
    tol: f64,
) -> Result<QubitState> {
    let (state, _) = integrate_schrodinger_impl(drive, initial, tol, false)?;
    Ok(state)
}

/// Like [`integrate_schrodinger`], also recording the state at every accepted
/// step.
pub fn integrate_schrodinger_trajectory(
    drive: &DriveFunction,
    initial: &QubitState,
    tol: f64,
) -> Result<StateTrajectory> {
    let (_, traj) = integrate_schrodinger_impl(drive, initial, tol, true)?;
    Ok(traj)
}

fn integrate_schrodinger_impl(
    drive: &DriveFunction,
    initial: &QubitState,
    tol: f64,
    record: bool,
) -> Result<(QubitState, StateTrajectory)> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::domain(format!("tolerance must be > 0, got {tol}")));
    }
    let y0 = [
        initial.c0().re,
        initial.c0().im,
        initial.c1().re,
        initial.c1().im,
    ];
    let mut traj = StateTrajectory {
        times: Vec::new(),
        amplitudes: Vec::new(),
    };
    let mut rhs = |t: f64, y: &[f64; 4]| schrodinger_rhs(drive.gamma(t), drive.omega(t), y);
    let mut on_step = |t: f64, y: &[f64; 4]| {
        if record {
            traj.times.push(t);
            traj.amplitudes
                .push([C64::new(y[0], y[1]), C64::new(y[2], y[3])]);
        }
        Ok(())
    };
    let y = rk45(&mut rhs, y0, 0.0, drive.horizon(), tol, tol, &mut on_step)?;
    let norm = (y.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let drift = (norm - 1.0).abs();
    if drift > 100.0 * tol {
        return Err(Error::Internal(format!(
            "norm drifted by {drift:.3e}, exceeding the error control"
        )));
    }
    let state = QubitState::new(C64::new(y[0], y[1]), C64::new(y[2], y[3]))?;
    Ok((state, traj))
}

/// Propagator of a drive, assembled by integrating both basis columns.
pub fn integrate_propagator(drive: &DriveFunction, tol: f64) -> Result<Unitary2> {
    let col0 = integrate_schrodinger(drive, &QubitState::basis0(), tol)?;
    let col1 = integrate_schrodinger(drive, &QubitState::basis1(), tol)?;
    Ok(Unitary2::new(
        col0.c0(),
        col1.c0(),
        col0.c1(),
        col1.c1(),
    ))
}

/// Sampled state history from an integration.
#[derive(Debug, Clone)]
pub struct StateTrajectory {
    pub times: Vec<f64>,
    pub amplitudes: Vec<[C64; 2]>,
}

impl StateTrajectory {
    /// CSV columns: t, Re c0, Im c0, Re c1, Im c1.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,re_c0,im_c0,re_c1,im_c1")?;
        for (t, a) in self.times.iter().zip(&self.amplitudes) {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                t, a[0].re, a[0].im, a[1].re, a[1].im
            )?;
        }
        Ok(())
    }
}

/// Sampled solution of the Euler-angle system.
#[derive(Debug, Clone)]
pub struct EulerTrajectory {
    pub times: Vec<f64>,
    pub tau1: Vec<f64>,
    pub tau2: Vec<f64>,
    pub tau3: Vec<f64>,
}

impl EulerTrajectory {
    pub fn end_angles(&self) -> EulerAngles {
        let n = self.times.len() - 1;
        EulerAngles::new(self.tau3[n], self.tau1[n], self.tau2[n])
    }

    /// CSV columns: t, tau1, tau2, tau3.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,tau1,tau2,tau3")?;
        for i in 0..self.times.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[i], self.tau1[i], self.tau2[i], self.tau3[i]
            )?;
        }
        Ok(())
    }
}

fn euler_rhs(gamma: f64, omega: f64, y: &[f64; 3]) -> [f64; 3] {
    // y = [tau1, tau2, tau3]; the cosine is kept away from zero only to keep
    // the arithmetic finite — the singularity guard reports the crossing.
    let cos1 = y[0].cos();
    let safe = if cos1.abs() < 1e-12 {
        1e-12 * if cos1 < 0.0 { -1.0 } else { 1.0 }
    } else {
        cos1
    };
    let (sin3, cos3) = y[2].sin_cos();
    [
        2.0 * omega * cos3,
        -2.0 * omega * sin3 / safe,
        2.0 * gamma + 2.0 * omega * sin3 * y[0].sin() / safe,
    ]
}

/// Integrate the Euler-angle system from (0, 0, 0) over the drive horizon.
///
/// Fails with a singularity report when |cos tau1| falls below 1e-6 anywhere
/// the integrator looks (the tau1 = pi/2 chart boundary); no chart switching
/// is attempted.
pub fn integrate_euler_angles(drive: &DriveFunction, tol: f64) -> Result<EulerTrajectory> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::domain(format!("tolerance must be > 0, got {tol}")));
    }
    let singular_at = std::cell::Cell::new(f64::NAN);
    let mut rhs = |t: f64, y: &[f64; 3]| {
        if y[0].cos().abs() < SINGULARITY_LIMIT && singular_at.get().is_nan() {
            singular_at.set(t);
        }
        euler_rhs(drive.gamma(t), drive.omega(t), y)
    };
    let mut traj = EulerTrajectory {
        times: Vec::new(),
        tau1: Vec::new(),
        tau2: Vec::new(),
        tau3: Vec::new(),
    };
    let mut on_step = |t: f64, y: &[f64; 3]| {
        if !singular_at.get().is_nan() || y[0].cos().abs() < SINGULARITY_LIMIT {
            let at = if singular_at.get().is_nan() {
                t
            } else {
                singular_at.get()
            };
            return Err(Error::EulerSingularity {
                t: at,
                limit: SINGULARITY_LIMIT,
            });
        }
        traj.times.push(t);
        traj.tau1.push(y[0]);
        traj.tau2.push(y[1]);
        traj.tau3.push(y[2]);
        Ok(())
    };
    rk45(
        &mut rhs,
        [0.0, 0.0, 0.0],
        0.0,
        drive.horizon(),
        tol,
        tol,
        &mut on_step,
    )?;
    Ok(traj)
}

/// Engineer a drive realizing a prescribed tau3(t): tau1 follows by
/// integrating tau1' = 2 omega cos(tau3), and
///
///   Gamma(t) = tau3'(t)/2 - omega sin(tau3) sin(tau1)/cos(tau1).
///
/// `tau3` must be smooth on a neighborhood of [0, horizon] (the derivative is
/// taken by central differences with step horizon * 1e-6) and must keep tau1
/// away from the pi/2 singularity.
pub fn inverse_engineer(
    tau3: impl Fn(f64) -> f64 + Send + Sync + 'static,
    omega: f64,
    horizon: f64,
) -> Result<DriveFunction> {
    if !omega.is_finite() || omega <= 0.0 {
        return Err(Error::domain(format!("omega must be > 0, got {omega}")));
    }
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::domain(format!(
            "horizon must be > 0, got {horizon}"
        )));
    }
    let h = horizon * 1e-6;

    // tau1 by quadrature on a fixed fine grid, then linear interpolation;
    // tau1' = 2 omega cos(tau3(t)) has no tau1 dependence, so the RK4 stages
    // collapse to Simpson's rule.
    let n = 8192usize;
    let dt = horizon / n as f64;
    let mut tau1 = Vec::with_capacity(n + 1);
    tau1.push(0.0);
    let mut y = 0.0f64;
    for k in 0..n {
        let t = k as f64 * dt;
        let f = |t: f64| 2.0 * omega * tau3(t).cos();
        y += dt / 6.0 * (f(t) + 4.0 * f(t + 0.5 * dt) + f(t + dt));
        if !y.is_finite() {
            return Err(Error::NonFinite("tau1 quadrature"));
        }
        if y.cos().abs() < SINGULARITY_LIMIT {
            return Err(Error::EulerSingularity {
                t: (k + 1) as f64 * dt,
                limit: SINGULARITY_LIMIT,
            });
        }
        tau1.push(y);
    }
    for k in 0..=n {
        let t = k as f64 * dt;
        let d = (tau3(t + h) - tau3(t - h)) / (2.0 * h);
        if !d.is_finite() {
            return Err(Error::NonFinite("tau3 derivative"));
        }
    }

    let gamma = move |t: f64| -> f64 {
        let t_cl = t.clamp(0.0, horizon);
        let x = t_cl / dt;
        let i = (x.floor() as usize).min(n - 1);
        let frac = x - i as f64;
        let t1 = tau1[i] * (1.0 - frac) + tau1[i + 1] * frac;
        let d3 = (tau3(t_cl + h) - tau3(t_cl - h)) / (2.0 * h);
        0.5 * d3 - omega * tau3(t_cl).sin() * t1.sin() / t1.cos()
    };
    DriveFunction::new(gamma, move |_| omega, horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::protocol::{apply_switching, build_bang_off_bang, build_composite};
    use crate::states::{fidelity, lz_eigenstate, Level};
    use crate::su2::euler_compose;
    use std::f64::consts::PI;

    #[test]
    fn empty_protocol_is_identity() {
        let s = QubitState::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8)).unwrap();
        let out = propagate_protocol(&Protocol::empty(), &s);
        assert_eq!(out, s);
    }

    #[test]
    fn composite_matches_direct_product() {
        let (ain, af, omega, t) = (0.37, -1.1, 1.3, 0.8);
        let p = build_composite(ain, af, omega, t).unwrap();
        let u = protocol_propagator(&p);
        let direct = analytic::composite_propagator(ain, af, omega, t).unwrap();
        assert!(u.max_entry_dist(&direct) < 1e-15);
    }

    #[test]
    fn composite_drives_eigenstate_pair() {
        let i = lz_eigenstate(-2.0, 1.0, Level::Ground).unwrap();
        let f = lz_eigenstate(2.0, 1.0, Level::Ground).unwrap();
        let p = build_composite(PI / 4.0, -PI / 4.0, 1.0, 2f64.atan()).unwrap();
        let out = propagate_protocol(&p, &i);
        assert!(fidelity(&out, &f) >= 1.0 - 1e-9);
    }

    #[test]
    fn splitting_a_constant_segment_changes_nothing() {
        let s = QubitState::basis0();
        let whole = Protocol::from_segments(vec![Segment::Constant {
            gamma: 1.7,
            omega: 0.9,
            duration: 2.0,
        }])
        .unwrap();
        let split = Protocol::from_segments(vec![
            Segment::Constant { gamma: 1.7, omega: 0.9, duration: 0.731 },
            Segment::Constant { gamma: 1.7, omega: 0.9, duration: 2.0 - 0.731 },
        ])
        .unwrap();
        let a = propagate_protocol(&whole, &s);
        let b = propagate_protocol(&split, &s);
        assert!((a.c0() - b.c0()).norm() < 1e-12);
        assert!((a.c1() - b.c1()).norm() < 1e-12);
    }

    #[test]
    fn schrodinger_pure_sigma1_half_flip() {
        // Gamma = 0, omega const, t = pi/(2 omega): |0> -> -i|1> up to phase.
        let d = DriveFunction::constant(0.0, 1.0, PI / 2.0).unwrap();
        let out = integrate_schrodinger(&d, &QubitState::basis0(), 1e-10).unwrap();
        assert!(out.c0().norm() < 1e-9);
        assert!((out.c1().norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn schrodinger_matches_closed_form() {
        let (gamma, omega, t) = (1.4, 0.8, 2.3);
        let d = DriveFunction::constant(gamma, omega, t).unwrap();
        let u_ode = integrate_propagator(&d, 1e-11).unwrap();
        let u = expm_pauli(gamma, omega, t).unwrap();
        assert!(u_ode.max_entry_dist(&u) < 1e-9);
    }

    #[test]
    fn schrodinger_norm_preservation() {
        let d = DriveFunction::new(|t: f64| (3.0 * t).sin(), |_| 1.0, 5.0).unwrap();
        let traj =
            integrate_schrodinger_trajectory(&d, &QubitState::basis0(), 1e-10).unwrap();
        for a in &traj.amplitudes {
            let norm = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
            assert!((norm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn ramp_substepping_agrees_with_ode() {
        let p = apply_switching(&build_bang_off_bang(2.0, 1.0, 5.0).unwrap(), 1e-2, true).unwrap();
        let i = lz_eigenstate(-2.0, 1.0, Level::Ground).unwrap();
        let exact = propagate_protocol(&p, &i);
        let d = DriveFunction::from_protocol(&p, shape::linear).unwrap();
        let ode = integrate_schrodinger(&d, &i, 1e-10).unwrap();
        assert!(fidelity(&exact, &ode) > 1.0 - 1e-9);
        assert!((exact.c0() - ode.c0()).norm() < 1e-8);
        assert!((exact.c1() - ode.c1()).norm() < 1e-8);
    }

    #[test]
    fn euler_angles_decoupled_case() {
        // Gamma = 0: tau3 = tau2 = 0 and tau1 = 2 omega t.
        let omega = 0.9;
        let d = DriveFunction::constant(0.0, omega, 0.6).unwrap();
        let traj = integrate_euler_angles(&d, 1e-10).unwrap();
        let end = traj.end_angles();
        assert!(end.tau3.abs() < 1e-12);
        assert!(end.tau2.abs() < 1e-12);
        assert!((end.tau1 - 2.0 * omega * 0.6).abs() < 1e-9);
    }

    #[test]
    fn euler_angles_match_constant_propagator() {
        let (gamma, omega, t) = (0.7, 1.3, 0.5);
        let d = DriveFunction::constant(gamma, omega, t).unwrap();
        let traj = integrate_euler_angles(&d, 1e-11).unwrap();
        let u = euler_compose(traj.end_angles()).unwrap();
        let direct = expm_pauli(gamma, omega, t).unwrap();
        assert!(u.max_entry_dist(&direct) < 1e-8);
    }

    #[test]
    fn euler_angles_match_time_dependent_propagator() {
        let d = DriveFunction::new(|t: f64| 0.8 * (2.0 * t).cos(), |_| 1.1, 0.7).unwrap();
        let traj = integrate_euler_angles(&d, 1e-11).unwrap();
        let u = euler_compose(traj.end_angles()).unwrap();
        let d2 = DriveFunction::new(|t: f64| 0.8 * (2.0 * t).cos(), |_| 1.1, 0.7).unwrap();
        let direct = integrate_propagator(&d2, 1e-11).unwrap();
        assert!(u.max_entry_dist(&direct) < 1e-8);
    }

    #[test]
    fn euler_singularity_is_reported() {
        // Gamma = 0 drives tau1 = 2 omega t through pi/2 at t = pi/4.
        let d = DriveFunction::constant(0.0, 1.0, 1.0).unwrap();
        let err = integrate_euler_angles(&d, 1e-10).unwrap_err();
        match err {
            Error::EulerSingularity { t, .. } => {
                assert!((t - PI / 4.0).abs() < 0.05, "reported t = {t}");
            }
            other => panic!("expected singularity, got {other}"),
        }
    }

    #[test]
    fn inverse_engineer_stationary_tau3() {
        let d = inverse_engineer(|_| 0.0, 1.0, 0.5).unwrap();
        for &t in &[0.0, 0.1, 0.25, 0.49] {
            assert_eq!(d.gamma(t), 0.0);
            assert_eq!(d.omega(t), 1.0);
        }
    }

    #[test]
    fn inverse_engineer_roundtrip() {
        let eps = 0.05;
        let d = inverse_engineer(move |t: f64| eps * (2.0 * t).sin(), 1.0, 0.6).unwrap();
        let traj = integrate_euler_angles(&d, 1e-11).unwrap();
        let mut worst = 0.0f64;
        for (t, tau3) in traj.times.iter().zip(&traj.tau3) {
            worst = worst.max((tau3 - eps * (2.0 * t).sin()).abs());
        }
        assert!(worst < 1e-6, "round-trip residual {worst:.3e}");
    }

    #[test]
    fn inverse_engineer_end_to_end_propagator() {
        let eps = 0.08;
        let tau3 = move |t: f64| eps * (1.0 - (3.0 * t).cos());
        let d = inverse_engineer(tau3, 1.0, 0.55).unwrap();
        let traj = integrate_euler_angles(&d, 1e-11).unwrap();
        let u_euler = euler_compose(traj.end_angles()).unwrap();
        let d2 = inverse_engineer(tau3, 1.0, 0.55).unwrap();
        let u_direct = integrate_propagator(&d2, 1e-11).unwrap();
        assert!(u_euler.max_entry_dist(&u_direct) < 1e-7);
    }

    #[test]
    fn trajectory_csv_headers() {
        let d = DriveFunction::constant(0.3, 1.0, 0.2).unwrap();
        let traj = integrate_schrodinger_trajectory(&d, &QubitState::basis0(), 1e-9).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,re_c0,im_c0,re_c1,im_c1\n"));

        let traj = integrate_euler_angles(&d, 1e-9).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,tau1,tau2,tau3\n"));
    }
}
