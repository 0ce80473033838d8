//! PD haptic guidance on near/far-point errors with a hard torque limit.
//!
//! Error derivatives come from a first-order filtered differentiator
//! `s / (τ_d s + 1)`. The closed-loop simulator integrates it in continuous
//! form ([`DerivativeFilter`]); [`guidance_torque`] is the sampled
//! (backward-Euler) version of the same filter for stand-alone use.

use crate::error::ParamError;
use crate::road::PerceptionErrors;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceParams {
    /// Gain on e'_y.
    pub a1p: f64,
    /// Gain on de'_y/dt.
    pub a2p: f64,
    /// Gain on e'_θ.
    pub a3p: f64,
    /// Gain on de'_θ/dt.
    pub a4p: f64,
    /// Overall gain.
    pub k_1: f64,
    pub t_np: f64,
    pub t_fp: f64,
    /// Torque limit (N·m).
    pub t_max: f64,
    /// Derivative filter time constant (s).
    pub tau_d: f64,
    pub enabled: bool,
}

impl Default for GuidanceParams {
    fn default() -> Self {
        Self {
            a1p: 2.0,
            a2p: 0.05,
            a3p: 40.0,
            a4p: 1.0,
            k_1: 0.25,
            t_np: 0.3,
            t_fp: 0.7,
            t_max: 5.0,
            tau_d: 0.05,
            enabled: true,
        }
    }
}

impl GuidanceParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, value) in [
            ("a1p", self.a1p),
            ("a2p", self.a2p),
            ("a3p", self.a3p),
            ("a4p", self.a4p),
            ("K_1", self.k_1),
        ] {
            ParamError::require_finite(name, value)?;
        }
        ParamError::require_positive("t_np", self.t_np)?;
        ParamError::require_positive("t_fp", self.t_fp)?;
        ParamError::require_positive("T_max", self.t_max)?;
        ParamError::require_positive("tau_d", self.tau_d)?;
        if self.t_fp < self.t_np {
            return Err(ParamError::new("t_fp", self.t_fp, "must be >= t_np"));
        }
        Ok(())
    }

    /// Saturated PD torque for given errors and error rates.
    pub fn torque(&self, err: &PerceptionErrors, de_y: f64, de_theta: f64) -> f64 {
        if !self.enabled {
            return 0.0;
        }
        let raw = self.k_1 * (self.a1p * err.e_y + self.a2p * de_y + self.a3p * err.e_theta + self.a4p * de_theta);
        raw.clamp(-self.t_max, self.t_max)
    }
}

pub fn set_enabled(gp: GuidanceParams, enabled: bool) -> GuidanceParams {
    GuidanceParams { enabled, ..gp }
}

/// Sampled differentiator memory.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GuidanceState {
    pub prev_e_y: f64,
    pub prev_e_theta: f64,
    pub filt_dey: f64,
    pub filt_detheta: f64,
}

/// Guidance torque for one sample of period `dt`, updating the filtered
/// backward differences in `gs`.
pub fn guidance_torque(err: &PerceptionErrors, gs: &mut GuidanceState, gp: &GuidanceParams, dt: f64) -> f64 {
    debug_assert!(dt > 0.0);
    let tau = gp.tau_d;
    gs.filt_dey = (tau * gs.filt_dey + (err.e_y - gs.prev_e_y)) / (tau + dt);
    gs.filt_detheta = (tau * gs.filt_detheta + (err.e_theta - gs.prev_e_theta)) / (tau + dt);
    gs.prev_e_y = err.e_y;
    gs.prev_e_theta = err.e_theta;
    gp.torque(err, gs.filt_dey, gs.filt_detheta)
}

/// Continuous filtered differentiator: state `w` tracks the input with lag
/// `τ`, and `(e − w)/τ` estimates `de/dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeFilter {
    pub tau: f64,
}

impl DerivativeFilter {
    /// Returns `(derivative estimate, dw/dt)`; the two coincide.
    pub fn evaluate(&self, input: f64, w: f64) -> (f64, f64) {
        let rate = (input - w) / self.tau;
        (rate, rate)
    }
}
