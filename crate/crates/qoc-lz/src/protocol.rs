//! Driving protocols: instantaneous sigma3 pulses, constant-drive segments
//! and ramped switches, plus builders for the three optimal families.
//!
//! Delta pulses are stored symbolically as (axis sigma3, area); they are
//! never approximated by large-Gamma segments. The large-Gamma limit is a
//! validation concern (see `oracle::verify_delta_limit`), not a
//! representation.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::analytic::{self, Regime};
use crate::error::{Error, Result};
use crate::states::LzParams;

/// One piece of a protocol, in time order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    /// Instantaneous sigma3 rotation exp(-i area sigma3); zero duration.
    DeltaPulse { area: f64 },
    /// Constant drive gamma*sigma3 + omega*sigma1 for `duration`.
    Constant { gamma: f64, omega: f64, duration: f64 },
    /// Switching ramp: gamma moves from `gamma_start` to `gamma_end` over
    /// `duration` (linear by default; the shape is chosen at propagation
    /// time).
    Ramp {
        gamma_start: f64,
        gamma_end: f64,
        omega: f64,
        duration: f64,
    },
}

impl Segment {
    pub fn duration(&self) -> f64 {
        match *self {
            Segment::DeltaPulse { .. } => 0.0,
            Segment::Constant { duration, .. } | Segment::Ramp { duration, .. } => duration,
        }
    }

    fn validate(&self) -> Result<()> {
        let all_finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match *self {
            Segment::DeltaPulse { area } => {
                if !area.is_finite() {
                    return Err(Error::NonFinite("delta pulse area"));
                }
            }
            Segment::Constant { gamma, omega, duration } => {
                if !all_finite(&[gamma, omega, duration]) {
                    return Err(Error::NonFinite("constant segment parameters"));
                }
                if duration < 0.0 {
                    return Err(Error::domain(format!(
                        "segment duration must be >= 0, got {duration}"
                    )));
                }
            }
            Segment::Ramp { gamma_start, gamma_end, omega, duration } => {
                if !all_finite(&[gamma_start, gamma_end, omega, duration]) {
                    return Err(Error::NonFinite("ramp segment parameters"));
                }
                if duration < 0.0 {
                    return Err(Error::domain(format!(
                        "ramp duration must be >= 0, got {duration}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// An ordered sequence of segments with optional provenance metadata.
///
/// The JSON form is the bare segment list; metadata is not part of the wire
/// format and is absent on protocols loaded from files.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Protocol {
    segments: Vec<Segment>,
    pub regime: Option<Regime>,
    pub params: Option<LzParams>,
}

impl Protocol {
    pub fn from_segments(segments: Vec<Segment>) -> Result<Protocol> {
        for seg in &segments {
            seg.validate()?;
        }
        Ok(Protocol {
            segments,
            regime: None,
            params: None,
        })
    }

    pub fn empty() -> Protocol {
        Protocol::default()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }

    fn with_meta(mut self, regime: Regime, params: LzParams) -> Protocol {
        self.regime = Some(regime);
        self.params = Some(params);
        self
    }
}

/// Composite protocol: delta(alpha_in), free evolution under omega*sigma1 for
/// time `t`, delta(alpha_f). Its propagator is
/// exp(-i alpha_f sigma3) exp(-i omega sigma1 t) exp(-i alpha_in sigma3).
pub fn build_composite(alpha_in: f64, alpha_f: f64, omega: f64, t: f64) -> Result<Protocol> {
    if !(alpha_in.is_finite() && alpha_f.is_finite() && omega.is_finite() && t.is_finite()) {
        return Err(Error::NonFinite("composite protocol parameters"));
    }
    if omega <= 0.0 {
        return Err(Error::domain(format!("omega must be > 0, got {omega}")));
    }
    if t < 0.0 {
        return Err(Error::domain(format!("duration must be >= 0, got {t}")));
    }
    let p = Protocol::from_segments(vec![
        Segment::DeltaPulse { area: alpha_in },
        Segment::Constant { gamma: 0.0, omega, duration: t },
        Segment::DeltaPulse { area: alpha_f },
    ])?;
    Ok(p.with_meta(Regime::Unconstrained, LzParams::new(0.0, omega)?))
}

/// Bang-off-bang protocol for the eigenstate pair of -+gamma under the bound
/// |Gamma| <= c: (+c for t_c, 0 for t_off, -c for t_c) with durations from
/// the closed forms. Requires c > omega^2/gamma.
pub fn build_bang_off_bang(gamma: f64, omega: f64, c: f64) -> Result<Protocol> {
    match analytic::regime(gamma, omega, Some(c))? {
        Regime::BangOffBang => {}
        other => {
            return Err(Error::WrongRegime {
                message: format!(
                    "(gamma={gamma}, omega={omega}, c={c}) is in the {other} regime; \
                     use build_bang_bang for c <= omega^2/gamma"
                ),
            })
        }
    }
    let (t_c, t_off) = analytic::bang_off_bang_times(gamma, omega, c)?;
    let p = Protocol::from_segments(vec![
        Segment::Constant { gamma: c, omega, duration: t_c },
        Segment::Constant { gamma: 0.0, omega, duration: t_off },
        Segment::Constant { gamma: -c, omega, duration: t_c },
    ])?;
    Ok(p.with_meta(
        Regime::BangOffBang,
        LzParams::new(gamma, omega)?.with_bound(c)?,
    ))
}

/// Bang-bang protocol (+c for t_c, -c for t_c), the optimum for
/// c <= omega^2/gamma where no free-evolution arc appears.
pub fn build_bang_bang(gamma: f64, omega: f64, c: f64) -> Result<Protocol> {
    match analytic::regime(gamma, omega, Some(c))? {
        Regime::BangBang => {}
        other => {
            return Err(Error::WrongRegime {
                message: format!(
                    "(gamma={gamma}, omega={omega}, c={c}) is in the {other} regime; \
                     use build_bang_off_bang for c > omega^2/gamma"
                ),
            })
        }
    }
    let t_c = analytic::bang_bang_time(gamma, omega, c)?;
    let p = Protocol::from_segments(vec![
        Segment::Constant { gamma: c, omega, duration: t_c },
        Segment::Constant { gamma: -c, omega, duration: t_c },
    ])?;
    Ok(p.with_meta(
        Regime::BangBang,
        LzParams::new(gamma, omega)?.with_bound(c)?,
    ))
}

/// Replace each interior Gamma discontinuity by a switching ramp of duration
/// `epsilon`.
///
/// Uncorrected, the constant segments keep their ideal durations and the
/// fidelity obeys F > 1 - 2(omega*eps + c*eps) for any ramp shape. With
/// `corrected` set, every constant segment is shortened by eps/2 per adjacent
/// ramp (t_c - eps/2 and t_off - eps for the bang-off-bang layout), which
/// removes the error to second order in omega*eps and c*eps for linear ramps.
pub fn apply_switching(p: &Protocol, epsilon: f64, corrected: bool) -> Result<Protocol> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::domain(format!(
            "switching time must be finite and >= 0, got {epsilon}"
        )));
    }
    if epsilon == 0.0 {
        return Ok(p.clone());
    }
    let consts: Vec<(f64, f64, f64)> = p
        .segments
        .iter()
        .map(|s| match *s {
            Segment::Constant { gamma, omega, duration } => Ok((gamma, omega, duration)),
            _ => Err(Error::domain(
                "switching ramps apply to piecewise-constant protocols only".to_string(),
            )),
        })
        .collect::<Result<_>>()?;

    let mut out = Vec::new();
    for (k, &(gamma, omega, duration)) in consts.iter().enumerate() {
        let ramp_before = k > 0 && consts[k - 1].0 != gamma;
        let ramp_after = k + 1 < consts.len() && consts[k + 1].0 != gamma;
        if ramp_before {
            let (g_prev, w_prev, _) = consts[k - 1];
            if w_prev != omega {
                return Err(Error::domain(
                    "switching ramps require a common coupling across the switch".to_string(),
                ));
            }
            out.push(Segment::Ramp {
                gamma_start: g_prev,
                gamma_end: gamma,
                omega,
                duration: epsilon,
            });
        }
        let mut d = duration;
        if corrected {
            let adjacent = usize::from(ramp_before) + usize::from(ramp_after);
            d -= 0.5 * epsilon * adjacent as f64;
            if d < 0.0 {
                return Err(Error::domain(format!(
                    "corrected segment duration went negative ({d}); epsilon = {epsilon} is too \
                     large for this protocol"
                )));
            }
        }
        out.push(Segment::Constant { gamma, omega, duration: d });
    }

    let mut result = Protocol::from_segments(out)?;
    result.regime = p.regime;
    result.params = p.params;
    Ok(result)
}

#[derive(Serialize, Deserialize)]
struct SegmentWire {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    duration: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    area: Option<f64>,
}

impl From<&Segment> for SegmentWire {
    fn from(seg: &Segment) -> SegmentWire {
        match *seg {
            Segment::DeltaPulse { area } => SegmentWire {
                kind: "delta_pulse".into(),
                gamma_start: None,
                gamma_end: None,
                omega: None,
                duration: None,
                area: Some(area),
            },
            Segment::Constant { gamma, omega, duration } => SegmentWire {
                kind: "constant".into(),
                gamma_start: Some(gamma),
                gamma_end: Some(gamma),
                omega: Some(omega),
                duration: Some(duration),
                area: None,
            },
            Segment::Ramp { gamma_start, gamma_end, omega, duration } => SegmentWire {
                kind: "ramp".into(),
                gamma_start: Some(gamma_start),
                gamma_end: Some(gamma_end),
                omega: Some(omega),
                duration: Some(duration),
                area: None,
            },
        }
    }
}

impl TryFrom<SegmentWire> for Segment {
    type Error = String;

    fn try_from(w: SegmentWire) -> std::result::Result<Segment, String> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| format!("segment kind {:?} requires field {name}", w.kind))
        };
        match w.kind.as_str() {
            "delta_pulse" => Ok(Segment::DeltaPulse { area: need(w.area, "area")? }),
            "constant" => {
                let gs = need(w.gamma_start, "gamma_start")?;
                let ge = need(w.gamma_end, "gamma_end")?;
                if gs != ge {
                    return Err(format!(
                        "constant segment must have gamma_start == gamma_end, got {gs} and {ge}"
                    ));
                }
                Ok(Segment::Constant {
                    gamma: gs,
                    omega: need(w.omega, "omega")?,
                    duration: need(w.duration, "duration")?,
                })
            }
            "ramp" => Ok(Segment::Ramp {
                gamma_start: need(w.gamma_start, "gamma_start")?,
                gamma_end: need(w.gamma_end, "gamma_end")?,
                omega: need(w.omega, "omega")?,
                duration: need(w.duration, "duration")?,
            }),
            other => Err(format!("unknown segment kind {other:?}")),
        }
    }
}

impl Serialize for Segment {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SegmentWire::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Segment {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Segment, D::Error> {
        let wire = SegmentWire::deserialize(deserializer)?;
        Segment::try_from(wire).map_err(D::Error::custom)
    }
}

impl Serialize for Protocol {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.segments.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Protocol {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Protocol, D::Error> {
        let segments = Vec::<Segment>::deserialize(deserializer)?;
        Protocol::from_segments(segments).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_layout_and_duration() {
        let p = build_composite(0.2, -0.3, 1.0, 1.5).unwrap();
        assert_eq!(p.segments().len(), 3);
        assert_eq!(p.total_duration(), 1.5);
        assert_eq!(p.regime, Some(Regime::Unconstrained));
        assert!(matches!(p.segments()[0], Segment::DeltaPulse { area } if area == 0.2));
    }

    #[test]
    fn builder_durations_match_analytic() {
        let r = analytic::tmin_constrained(2.0, 1.0, 5.0).unwrap();
        let p = build_bang_off_bang(2.0, 1.0, 5.0).unwrap();
        assert_eq!(p.total_duration(), r.t_min);
        assert_eq!(p.segments().len(), 3);

        let r = analytic::tmin_constrained(2.0, 1.0, 0.4).unwrap();
        let p = build_bang_bang(2.0, 1.0, 0.4).unwrap();
        assert_eq!(p.total_duration(), r.t_min);
        assert_eq!(p.segments().len(), 2);
    }

    #[test]
    fn builders_reject_wrong_regime() {
        let err = build_bang_off_bang(2.0, 1.0, 0.4).unwrap_err();
        assert!(err.to_string().contains("build_bang_bang"));
        let err = build_bang_bang(2.0, 1.0, 5.0).unwrap_err();
        assert!(err.to_string().contains("build_bang_off_bang"));
    }

    #[test]
    fn boundary_c_is_bang_bang_but_continuous() {
        let p = build_bang_bang(2.0, 1.0, 0.5).unwrap();
        let just_above = build_bang_off_bang(2.0, 1.0, 0.5 + 1e-9).unwrap();
        assert!((p.total_duration() - just_above.total_duration()).abs() < 1e-7);
    }

    #[test]
    fn switching_zero_epsilon_is_identity() {
        let p = build_bang_off_bang(2.0, 1.0, 5.0).unwrap();
        let q = apply_switching(&p, 0.0, false).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn switching_inserts_ramps_at_discontinuities() {
        let p = build_bang_off_bang(2.0, 1.0, 5.0).unwrap();
        let q = apply_switching(&p, 1e-3, false).unwrap();
        assert_eq!(q.segments().len(), 5);
        assert!(matches!(q.segments()[1], Segment::Ramp { gamma_start, gamma_end, .. }
            if gamma_start == 5.0 && gamma_end == 0.0));
        assert!(matches!(q.segments()[3], Segment::Ramp { gamma_start, gamma_end, .. }
            if gamma_start == 0.0 && gamma_end == -5.0));
        assert!((q.total_duration() - (p.total_duration() + 2e-3)).abs() < 1e-15);

        let bb = build_bang_bang(2.0, 1.0, 0.4).unwrap();
        let qb = apply_switching(&bb, 1e-3, false).unwrap();
        assert_eq!(qb.segments().len(), 3);
    }

    #[test]
    fn corrected_switching_restores_total_duration() {
        let p = build_bang_off_bang(2.0, 1.0, 5.0).unwrap();
        let q = apply_switching(&p, 1e-2, true).unwrap();
        assert!((q.total_duration() - p.total_duration()).abs() < 1e-15);
        // t_c - eps/2 on the outer segments, t_off - eps in the middle.
        let (t_c, t_off) = analytic::bang_off_bang_times(2.0, 1.0, 5.0).unwrap();
        match q.segments()[0] {
            Segment::Constant { duration, .. } => assert!((duration - (t_c - 5e-3)).abs() < 1e-15),
            _ => panic!("expected constant"),
        }
        match q.segments()[2] {
            Segment::Constant { duration, .. } => assert!((duration - (t_off - 1e-2)).abs() < 1e-15),
            _ => panic!("expected constant"),
        }
    }

    #[test]
    fn corrected_switching_rejects_oversized_epsilon() {
        let p = build_bang_bang(2.0, 1.0, 0.4).unwrap();
        let t_c = analytic::bang_bang_time(2.0, 1.0, 0.4).unwrap();
        assert!(apply_switching(&p, 2.1 * t_c, true).is_err());
    }

    #[test]
    fn switching_rejects_delta_pulses() {
        let p = build_composite(0.2, -0.2, 1.0, 1.0).unwrap();
        assert!(apply_switching(&p, 1e-3, false).is_err());
    }

    #[test]
    fn json_wire_format_roundtrip() {
        let p = apply_switching(&build_bang_off_bang(2.0, 1.0, 5.0).unwrap(), 1e-3, true).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        let back: Protocol = serde_json::from_str(&json).unwrap();
        assert_eq!(p.segments(), back.segments());
        assert!(back.regime.is_none());

        let composite = build_composite(0.25, -0.25, 1.0, 0.5).unwrap();
        let json = serde_json::to_string(&composite).unwrap();
        assert!(json.contains("\"kind\":\"delta_pulse\""));
        assert!(json.contains("\"area\":0.25"));
        let back: Protocol = serde_json::from_str(&json).unwrap();
        assert_eq!(composite.segments(), back.segments());
    }

    #[test]
    fn json_rejects_malformed_segments() {
        assert!(serde_json::from_str::<Protocol>(r#"[{"kind":"constant","gamma_start":1.0,"gamma_end":2.0,"omega":1.0,"duration":0.1}]"#).is_err());
        assert!(serde_json::from_str::<Protocol>(r#"[{"kind":"nope"}]"#).is_err());
        assert!(serde_json::from_str::<Protocol>(r#"[{"kind":"delta_pulse"}]"#).is_err());
    }
}
