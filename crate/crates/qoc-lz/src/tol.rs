//! Centralized tolerance configuration.
//!
//! Every numerical threshold used across the crate lives in one record so
//! that tests and callers agree on what "equal" means at each layer. The
//! `QOC_LZ_TOL` environment variable overrides the runtime-facing entries
//! (integration accuracy and oracle-vs-formula comparison) without touching
//! the structural ones.

/// Tolerance record shared by all modules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Entrywise bound for U†U = 1 and |det U - 1| on generated unitaries.
    pub unitarity: f64,
    /// Acceptable defect when *validating* a caller-supplied unitary.
    pub unitarity_input: f64,
    /// Entrywise bound for the Euler compose/decompose round trip.
    pub euler_roundtrip: f64,
    /// How far outside [-1, 1] an arccos/arcsin argument may stray before it
    /// is an error rather than rounding noise.
    pub inverse_trig_slack: f64,
    /// Default local error control for the adaptive integrator.
    pub integration: f64,
    /// Fidelity that analytically constructed protocols must reach.
    pub protocol_fidelity: f64,
    /// Fidelity threshold for brute-force searches (grid points straddle the
    /// exact optimum, so this is looser than `protocol_fidelity`).
    pub search_fidelity: f64,
    /// Absolute resolution of refined time coordinates in searches.
    pub time_refine: f64,
    /// Oracle-vs-formula agreement required by the `verify` command.
    pub verify: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        unitarity: 1e-12,
        unitarity_input: 1e-8,
        euler_roundtrip: 1e-10,
        inverse_trig_slack: 1e-12,
        integration: 1e-10,
        protocol_fidelity: 1e-9,
        search_fidelity: 1e-6,
        time_refine: 1e-6,
        verify: 1e-3,
    };

    /// Default tolerances, with `QOC_LZ_TOL` (if set and parseable) applied
    /// to the integration and verification entries.
    pub fn from_env() -> Tolerances {
        let mut tol = Self::DEFAULT;
        if let Ok(s) = std::env::var("QOC_LZ_TOL") {
            if let Ok(x) = s.trim().parse::<f64>() {
                if x.is_finite() && x > 0.0 {
                    tol.integration = x;
                    tol.verify = x;
                }
            }
        }
        tol
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
