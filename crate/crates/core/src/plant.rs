//! Linear bicycle model, self-aligning torque and steering-column dynamics.
//!
//! Sign convention: positive steering angle, yaw rate and lateral offset all
//! point to the left (counter-clockwise seen from above).

use nalgebra::{Matrix2, Vector2};

use crate::error::ParamError;

/// |β| above this is flagged as outside the linear tyre range.
pub const LINEAR_SLIP_LIMIT: f64 = 0.2;

/// Chassis constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleParams {
    /// Mass (kg).
    pub m: f64,
    /// Yaw moment of inertia (kg·m²).
    pub i_z: f64,
    /// CG to front axle (m).
    pub l_f: f64,
    /// CG to rear axle (m).
    pub l_r: f64,
    /// Front cornering stiffness per tyre (N/rad).
    pub k_f: f64,
    /// Rear cornering stiffness per tyre (N/rad).
    pub k_r: f64,
    /// Kingpin spring constant (N·m/rad).
    pub k_s: f64,
    /// Pneumatic plus castor trail.
    pub e_t: f64,
    /// Longitudinal speed (m/s).
    pub v: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            m: 1100.0,
            i_z: 2940.0,
            l_f: 1.0,
            l_r: 1.635,
            k_f: 53300.0,
            k_r: 117000.0,
            k_s: 48510.0,
            e_t: 0.026,
            v: 60.0 / 3.6,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, value) in [
            ("m", self.m),
            ("I", self.i_z),
            ("l_f", self.l_f),
            ("l_r", self.l_r),
            ("K_f", self.k_f),
            ("K_r", self.k_r),
            ("K_s", self.k_s),
            ("v", self.v),
        ] {
            ParamError::require_positive(name, value)?;
        }
        ParamError::require_non_negative("E_t", self.e_t)
    }
}

/// Steering column constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringParams {
    /// Column inertia (kg·m²).
    pub j_s: f64,
    /// Column damping (N·m·s/rad).
    pub b_s: f64,
    /// Steering-wheel to road-wheel ratio.
    pub k_t: f64,
}

impl Default for SteeringParams {
    fn default() -> Self {
        Self {
            j_s: 0.11,
            b_s: 0.57,
            k_t: 1.0 / 17.0,
        }
    }
}

impl SteeringParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        ParamError::require_positive("J_s", self.j_s)?;
        ParamError::require_non_negative("B_s", self.b_s)?;
        ParamError::require_positive("K_t", self.k_t)?;
        if self.k_t > 1.0 {
            return Err(ParamError::new("K_t", self.k_t, "must not exceed 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VehicleState {
    /// Side-slip angle (rad).
    pub beta: f64,
    /// Yaw rate (rad/s).
    pub r: f64,
    pub x: f64,
    pub y: f64,
    /// World heading (rad).
    pub psi: f64,
}

impl VehicleState {
    /// Direction of the CG velocity, ψ + β.
    pub fn course_angle(&self) -> f64 {
        self.psi + self.beta
    }

    pub fn out_of_linear_range(&self) -> bool {
        self.beta.abs() > LINEAR_SLIP_LIMIT
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SteeringState {
    /// Steering-wheel angle (rad).
    pub phi: f64,
    /// Steering-wheel rate (rad/s).
    pub phi_dot: f64,
}

/// Self-aligning stiffness, including kingpin compliance.
pub fn aligning_stiffness(vp: &VehicleParams, sp: &SteeringParams) -> f64 {
    let trail_force = 2.0 * vp.e_t * vp.k_f;
    trail_force * sp.k_t / (1.0 + trail_force / vp.k_s)
}

pub fn aligning_torque(vs: &VehicleState, delta: f64, vp: &VehicleParams, sp: &SteeringParams) -> f64 {
    aligning_stiffness(vp, sp) * (vs.beta + vp.l_f * vs.r / vp.v - delta)
}

/// (dβ/dt, dr/dt) from the two lateral/yaw balance equations.
pub fn lateral_yaw_derivatives(vs: &VehicleState, delta: f64, vp: &VehicleParams) -> (f64, f64) {
    LateralModel::new(vp).derivatives(vs.beta, vs.r, delta)
}

pub fn steering_acceleration(ss: &SteeringState, t_d: f64, t_h: f64, t_a: f64, sp: &SteeringParams) -> f64 {
    (t_d + t_h + t_a - sp.b_s * ss.phi_dot) / sp.j_s
}

pub fn front_wheel_angle(phi: f64, sp: &SteeringParams) -> f64 {
    sp.k_t * phi
}

/// (dX/dt, dY/dt, dψ/dt) along the course angle ψ + β.
pub fn world_kinematics(vs: &VehicleState, vp: &VehicleParams) -> (f64, f64, f64) {
    let course = vs.course_angle();
    (vp.v * course.cos(), vp.v * course.sin(), vs.r)
}

/// The lateral/yaw equations rearranged once into `ẋ = M x + N δ`
/// with `x = (β, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LateralModel {
    pub m: Matrix2<f64>,
    pub n: Vector2<f64>,
}

impl LateralModel {
    pub fn new(vp: &VehicleParams) -> Self {
        let VehicleParams {
            m,
            i_z,
            l_f,
            l_r,
            k_f,
            k_r,
            v,
            ..
        } = *vp;
        let mv = m * v;
        let yaw_coupling = 2.0 * (l_f * k_f - l_r * k_r);
        let m_mat = Matrix2::new(
            -2.0 * (k_f + k_r) / mv,
            -(mv + yaw_coupling / v) / mv,
            -yaw_coupling / i_z,
            -2.0 * (l_f * l_f * k_f + l_r * l_r * k_r) / (v * i_z),
        );
        let n = Vector2::new(2.0 * k_f / mv, 2.0 * l_f * k_f / i_z);
        Self { m: m_mat, n }
    }

    pub fn derivatives(&self, beta: f64, r: f64, delta: f64) -> (f64, f64) {
        let d = self.m * Vector2::new(beta, r) + self.n * delta;
        (d[0], d[1])
    }

    /// Equilibrium (β, r) for a constant road-wheel angle, or `None` when the
    /// system matrix is singular.
    pub fn steady_state(&self, delta: f64) -> Option<(f64, f64)> {
        let x = self.m.lu().solve(&(-self.n * delta))?;
        Some((x[0], x[1]))
    }

    pub fn eigenvalues(&self) -> [nalgebra::Complex<f64>; 2] {
        let ev = self.m.complex_eigenvalues();
        [ev[0], ev[1]]
    }
}
