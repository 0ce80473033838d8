//! Two-point visual driver with a first-order Padé processing delay and a
//! neuromuscular stage that weights visual (`K_d`) against haptic (`K_hg`)
//! guidance.
//!
//! Continuous state `x = (∫e_y dt, Padé state, T_d)`, inputs
//! `u = (e_y, e_θ, φ, T_h)` and outputs `y = (T_d, φ')`.

use nalgebra::{Matrix2x3, Matrix2x4, Matrix3, Matrix3x4, Vector3, Vector4};

use crate::error::ParamError;
use crate::road::PerceptionErrors;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriverParams {
    /// Gain on near-point lateral error (rad/m).
    pub a1: f64,
    /// Gain on the lateral-error integral (rad/(m·s)).
    pub a2: f64,
    /// Gain on far-point heading error.
    pub a3: f64,
    /// Processing delay (s).
    pub t_p: f64,
    /// Target-angle to torque gain (N·m/rad).
    pub k_d: f64,
    /// Reaction gain to the felt guidance torque, 0 (full reliance) to 1.
    pub k_hg: f64,
    /// Neuromuscular reflex gain (N·m/rad).
    pub k_nms: f64,
    /// Neuromuscular time constant (s).
    pub t_nms: f64,
    /// Near-point look-ahead time (s).
    pub t_n: f64,
    /// Far-point look-ahead time (s).
    pub t_f: f64,
}

impl DriverParams {
    /// Starting point used by identification.
    pub const IDENT_DEFAULT: DriverParams = DriverParams {
        a1: 0.1,
        a2: 0.01,
        a3: 3.7,
        t_p: 0.1,
        k_d: 3.0,
        k_hg: 0.5,
        k_nms: 1.0,
        t_nms: 0.1,
        t_n: 0.3,
        t_f: 1.0,
    };

    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, value) in [("a1", self.a1), ("a2", self.a2), ("a3", self.a3), ("K_d", self.k_d)] {
            ParamError::require_finite(name, value)?;
        }
        ParamError::require_positive("t_p", self.t_p)?;
        ParamError::require_positive("t_nms", self.t_nms)?;
        ParamError::require_non_negative("K_nms", self.k_nms)?;
        ParamError::require_positive("t_n", self.t_n)?;
        ParamError::require_positive("t_f", self.t_f)?;
        if !(0.0..=1.0).contains(&self.k_hg) {
            return Err(ParamError::new("K_hg", self.k_hg, "must lie in [0, 1]"));
        }
        if self.t_f < self.t_n {
            return Err(ParamError::new("t_f", self.t_f, "must be >= t_n"));
        }
        Ok(())
    }
}

/// Simulation values: visual gains and look-ahead of the evaluation study,
/// mid-range `K_d`/`K_hg` and a 0.1 s delay.
impl Default for DriverParams {
    fn default() -> Self {
        Self {
            a1: 0.1,
            a2: 0.05,
            a3: 3.7,
            t_p: 0.1,
            k_d: 3.0,
            k_hg: 0.5,
            k_nms: 1.0,
            t_nms: 0.1,
            t_n: 0.3,
            t_f: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DriverState {
    /// ∫e_y dt (m·s).
    pub z_int: f64,
    /// Padé internal state (rad).
    pub z_pade: f64,
    /// Driver torque (N·m).
    pub t_d: f64,
}

impl DriverState {
    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.z_int, self.z_pade, self.t_d)
    }
}

/// Target angle before the processing delay.
pub fn visual_command(dp: &DriverParams, err: &PerceptionErrors, z_int: f64) -> f64 {
    dp.a1 * err.e_y + dp.a2 * z_int + dp.a3 * err.e_theta
}

/// All-pass first-order realisation of `e^{-t_p s}`:
/// returns `(φ', dz/dt)`.
pub fn pade_delay(u_vis: f64, z_pade: f64, t_p: f64) -> (f64, f64) {
    (2.0 * z_pade - u_vis, 2.0 / t_p * (u_vis - z_pade))
}

/// Frequency response of `(1 − t_p s/2) / (1 + t_p s/2)` at `s = jω`.
pub fn pade_frequency_response(omega: f64, t_p: f64) -> nalgebra::Complex<f64> {
    use nalgebra::Complex;
    let half = Complex::new(0.0, 0.5 * t_p * omega);
    (Complex::new(1.0, 0.0) - half) / (Complex::new(1.0, 0.0) + half)
}

pub fn neuromuscular_rate(phi_target: f64, phi: f64, t_h: f64, t_d: f64, dp: &DriverParams) -> f64 {
    (dp.k_d * phi_target + dp.k_nms * (phi_target - phi) - dp.k_hg * t_h - t_d) / dp.t_nms
}

/// Scalar cascade: derivative of the driver state and the current target
/// angle. Used by the closed-loop simulator.
pub fn driver_derivatives(
    dp: &DriverParams,
    state: &DriverState,
    err: &PerceptionErrors,
    phi: f64,
    t_h: f64,
) -> (DriverState, f64) {
    let u_vis = visual_command(dp, err, state.z_int);
    let (phi_target, dz_pade) = pade_delay(u_vis, state.z_pade, dp.t_p);
    let dt_d = neuromuscular_rate(phi_target, phi, t_h, state.t_d, dp);
    (
        DriverState {
            z_int: err.e_y,
            z_pade: dz_pade,
            t_d: dt_d,
        },
        phi_target,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriverStateSpace {
    pub a: Matrix3<f64>,
    pub b: Matrix3x4<f64>,
    pub c: Matrix2x3<f64>,
    pub d: Matrix2x4<f64>,
}

impl DriverStateSpace {
    pub fn derivative(&self, x: &Vector3<f64>, u: &Vector4<f64>) -> Vector3<f64> {
        self.a * x + self.b * u
    }

    pub fn output(&self, x: &Vector3<f64>, u: &Vector4<f64>) -> nalgebra::Vector2<f64> {
        self.c * x + self.d * u
    }
}

/// Linear state-space form of the cascade visual command → Padé → neuromuscular.
pub fn assemble_state_space(dp: &DriverParams) -> DriverStateSpace {
    let DriverParams {
        a1,
        a2,
        a3,
        t_p,
        k_d,
        k_hg,
        k_nms,
        t_nms,
        ..
    } = *dp;
    let w = 2.0 / t_p;
    let g = (k_d + k_nms) / t_nms;
    #[rustfmt::skip]
    let a = Matrix3::new(
        0.0,       0.0,     0.0,
        a2 * w,   -w,       0.0,
        -a2 * g,   2.0 * g, -1.0 / t_nms,
    );
    #[rustfmt::skip]
    let b = Matrix3x4::new(
        1.0,      0.0,      0.0,            0.0,
        a1 * w,   a3 * w,   0.0,            0.0,
        -a1 * g,  -a3 * g,  -k_nms / t_nms, -k_hg / t_nms,
    );
    #[rustfmt::skip]
    let c = Matrix2x3::new(
        0.0, 0.0, 1.0,
        -a2, 2.0, 0.0,
    );
    #[rustfmt::skip]
    let d = Matrix2x4::new(
        0.0, 0.0, 0.0, 0.0,
        -a1, -a3, 0.0, 0.0,
    );
    DriverStateSpace { a, b, c, d }
}
