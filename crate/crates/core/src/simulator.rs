//! Fixed-step closed-loop integration of vehicle, steering column, driver and
//! guidance over a [`RoadPath`], with reliance presets, guidance failure
//! injection, logging and metrics.

use std::str::FromStr;

use rayon::prelude::*;

use crate::driver::{driver_derivatives, DriverParams, DriverState};
use crate::error::{MetricsError, SimError};
use crate::guidance::{DerivativeFilter, GuidanceParams};
use crate::plant::{
    aligning_stiffness, front_wheel_angle, world_kinematics, LateralModel, SteeringParams, VehicleParams, VehicleState,
};
use crate::road::{default_course, PerceptionErrors, Pose2, RoadPath, LANE_HALF_WIDTH};

/// Log sample rate of the driving simulator (Hz).
pub const DEFAULT_LOG_RATE: f64 = 120.0;
/// Four RK4 steps per log sample.
pub const DEFAULT_DT: f64 = 1.0 / 480.0;
pub const DEFAULT_DURATION: f64 = 120.0;
/// Any state beyond this magnitude aborts the run.
pub const DIVERGENCE_LIMIT: f64 = 1e6;
/// Processing delays of the three evaluation drivers (s).
pub const DRIVER_DELAYS: [f64; 3] = [0.1, 0.3, 0.5];
/// `K_d` used once the driver has taken over manually.
pub const MANUAL_K_D: f64 = 4.0;

pub const FLAG_NONLINEAR_SLIP: u32 = 1;
pub const FLAG_LANE_DEPARTURE: u32 = 2;
pub const FLAG_GUIDANCE_FAILED: u32 = 4;
pub const FLAG_DRIVER_MANUAL: u32 = 8;

const STATE_NAMES: [&str; STATE_LEN] = [
    "beta",
    "r",
    "X",
    "Y",
    "psi",
    "phi",
    "phi_dot",
    "z_int",
    "z_pade",
    "T_d",
    "w_e_y_guid",
    "w_e_theta_guid",
];
const STATE_LEN: usize = 12;
type State = [f64; STATE_LEN];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reliance {
    High,
    Mid,
    Low,
    Manual,
}

impl Reliance {
    /// From least to most reliant.
    pub const ORDERED: [Reliance; 4] = [Reliance::Manual, Reliance::Low, Reliance::Mid, Reliance::High];

    pub fn as_str(self) -> &'static str {
        match self {
            Reliance::High => "high",
            Reliance::Mid => "mid",
            Reliance::Low => "low",
            Reliance::Manual => "manual",
        }
    }
}

impl std::fmt::Display for Reliance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Reliance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "high" => Ok(Reliance::High),
            "mid" => Ok(Reliance::Mid),
            "low" => Ok(Reliance::Low),
            "manual" => Ok(Reliance::Manual),
            other => Err(format!(
                "unknown reliance level `{other}` (expected high|mid|low|manual)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelianceGains {
    pub k_d: f64,
    /// `None` for manual driving, where no guidance torque is felt.
    pub k_hg: Option<f64>,
    pub guidance_enabled: bool,
}

pub fn reliance_preset(level: Reliance) -> RelianceGains {
    match level {
        Reliance::High => RelianceGains {
            k_d: 2.0,
            k_hg: Some(0.0),
            guidance_enabled: true,
        },
        Reliance::Mid => RelianceGains {
            k_d: 3.0,
            k_hg: Some(0.5),
            guidance_enabled: true,
        },
        Reliance::Low => RelianceGains {
            k_d: 4.0,
            k_hg: Some(1.0),
            guidance_enabled: true,
        },
        Reliance::Manual => RelianceGains {
            k_d: MANUAL_K_D,
            k_hg: None,
            guidance_enabled: false,
        },
    }
}

/// Sets `K_d`, `K_hg` (unless manual) and the guidance switch for `level`.
pub fn apply_reliance(level: Reliance, driver: &mut DriverParams, guidance: &mut GuidanceParams) {
    let gains = reliance_preset(level);
    driver.k_d = gains.k_d;
    if let Some(k_hg) = gains.k_hg {
        driver.k_hg = k_hg;
    }
    guidance.enabled = gains.guidance_enabled;
}

/// Guidance stops at `t_fail`; the driver switches to manual parameters
/// `t_response` later.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FailureSpec {
    pub t_fail: f64,
    pub t_response: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub course: RoadPath,
    pub vehicle: VehicleParams,
    pub steering: SteeringParams,
    pub driver_guided: DriverParams,
    pub driver_manual: DriverParams,
    pub guidance: GuidanceParams,
    pub duration: f64,
    pub dt: f64,
    pub log_rate: f64,
    pub failure: Option<FailureSpec>,
    pub reliance: Option<Reliance>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self::new(default_course(), DriverParams::default())
    }
}

impl Scenario {
    /// Guided driving with `driver` on `course`; manual take-over keeps the
    /// driver's parameters but uses the manual `K_d`, and `K_hg = 0` since no
    /// guidance torque is felt.
    pub fn new(course: RoadPath, driver: DriverParams) -> Self {
        Self {
            course,
            vehicle: VehicleParams::default(),
            steering: SteeringParams::default(),
            driver_guided: driver,
            driver_manual: DriverParams {
                k_d: MANUAL_K_D,
                k_hg: 0.0,
                ..driver
            },
            guidance: GuidanceParams::default(),
            duration: DEFAULT_DURATION,
            dt: DEFAULT_DT,
            log_rate: DEFAULT_LOG_RATE,
            failure: None,
            reliance: None,
        }
    }

    /// Applies a reliance preset to the guided driver and the guidance switch.
    pub fn with_reliance(mut self, level: Reliance) -> Self {
        apply_reliance(level, &mut self.driver_guided, &mut self.guidance);
        self.reliance = Some(level);
        self
    }

    pub fn with_failure(mut self, t_fail: f64, t_response: f64) -> Self {
        self.failure = Some(FailureSpec { t_fail, t_response });
        self
    }

    /// Sets the processing delay of both guided and manual driver.
    pub fn with_delay(mut self, t_p: f64) -> Self {
        self.driver_guided.t_p = t_p;
        self.driver_manual.t_p = t_p;
        self
    }

    pub fn substeps(&self) -> usize {
        (1.0 / (self.log_rate * self.dt)).round() as usize
    }

    pub fn sample_count(&self) -> usize {
        (self.duration * self.log_rate).round() as usize
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.vehicle.validate()?;
        self.steering.validate()?;
        self.driver_guided.validate()?;
        self.driver_manual.validate()?;
        self.guidance.validate()?;
        let cfg = |msg: String| Err(SimError::Config(msg));
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return cfg(format!("duration {} must be > 0", self.duration));
        }
        if !(self.log_rate.is_finite() && self.log_rate > 0.0) {
            return cfg(format!("log_rate {} must be > 0", self.log_rate));
        }
        if !(self.dt > 0.0 && self.dt <= 1.0 / self.log_rate + 1e-15) {
            return cfg(format!("dt {} must lie in (0, 1/log_rate]", self.dt));
        }
        let ratio = 1.0 / (self.log_rate * self.dt);
        if (ratio - ratio.round()).abs() > 1e-9 {
            return cfg(format!("1/log_rate must be an integer multiple of dt (ratio {ratio})"));
        }
        if self.sample_count() == 0 {
            return cfg("duration shorter than one log sample".into());
        }
        if let Some(f) = self.failure {
            if !(f.t_fail >= 0.0 && f.t_response >= 0.0) {
                return cfg("failure times must be non-negative".into());
            }
            if f.t_fail + f.t_response >= self.duration {
                return cfg(format!(
                    "t_fail + t_response = {} must be < duration {}",
                    f.t_fail + f.t_response,
                    self.duration
                ));
            }
        }
        Ok(())
    }
}

/// One logged sample.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub beta: f64,
    pub r: f64,
    pub phi: f64,
    pub phi_dot: f64,
    pub delta: f64,
    pub e_y: f64,
    pub e_theta: f64,
    pub e_y_guid: f64,
    pub e_theta_guid: f64,
    pub t_d: f64,
    pub t_h: f64,
    pub t_a: f64,
    /// Signed CG offset from the centreline, positive left.
    pub lateral_error: f64,
    pub flags: u32,
    /// Driver target angle φ'. Kept in memory only; not part of the CSV log.
    pub phi_target: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimLog {
    pub log_rate: f64,
    pub rows: Vec<LogRow>,
}

impl SimLog {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, f: impl Fn(&LogRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Mode<'a> {
    driver: &'a DriverParams,
    guidance_on: bool,
    flags: u32,
}

/// Everything computed at one state evaluation.
#[derive(Debug, Clone, Copy)]
struct Signals {
    driver_err: PerceptionErrors,
    guid_err: PerceptionErrors,
    delta: f64,
    t_h: f64,
    t_a: f64,
    phi_target: f64,
}

struct ClosedLoop<'a> {
    sc: &'a Scenario,
    lateral: LateralModel,
    k_aln: f64,
    filter: DerivativeFilter,
}

impl<'a> ClosedLoop<'a> {
    fn new(sc: &'a Scenario) -> Self {
        Self {
            sc,
            lateral: LateralModel::new(&sc.vehicle),
            k_aln: aligning_stiffness(&sc.vehicle, &sc.steering),
            filter: DerivativeFilter { tau: sc.guidance.tau_d },
        }
    }

    fn errors(
        &self,
        x: &State,
        dp: &DriverParams,
    ) -> Result<(PerceptionErrors, PerceptionErrors), crate::error::RoadError> {
        let pose = Pose2::new(x[2], x[3], x[4]);
        let v = self.sc.vehicle.v;
        let gp = &self.sc.guidance;
        let driver = self.sc.course.perception_errors(pose, x[0], v, dp.t_n, dp.t_f)?;
        let guid = self.sc.course.perception_errors(pose, x[0], v, gp.t_np, gp.t_fp)?;
        Ok((driver, guid))
    }

    fn derivative(&self, x: &State, mode: &Mode) -> Result<(State, Signals), crate::error::RoadError> {
        let vp = &self.sc.vehicle;
        let sp = &self.sc.steering;
        let vs = VehicleState {
            beta: x[0],
            r: x[1],
            x: x[2],
            y: x[3],
            psi: x[4],
        };
        let (phi, phi_dot) = (x[5], x[6]);
        let ds = DriverState {
            z_int: x[7],
            z_pade: x[8],
            t_d: x[9],
        };
        let (driver_err, guid_err) = self.errors(x, mode.driver)?;
        let (de_y, dw_y) = self.filter.evaluate(guid_err.e_y, x[10]);
        let (de_theta, dw_theta) = self.filter.evaluate(guid_err.e_theta, x[11]);
        let t_h = if mode.guidance_on {
            self.sc.guidance.torque(&guid_err, de_y, de_theta)
        } else {
            0.0
        };

        let delta = front_wheel_angle(phi, sp);
        let t_a = self.k_aln * (vs.beta + vp.l_f * vs.r / vp.v - delta);
        let phi_ddot = (ds.t_d + t_h + t_a - sp.b_s * phi_dot) / sp.j_s;
        let (dbeta, dr) = self.lateral.derivatives(vs.beta, vs.r, delta);
        let (dx, dy, dpsi) = world_kinematics(&vs, vp);
        let (dds, phi_target) = driver_derivatives(mode.driver, &ds, &driver_err, phi, t_h);

        let deriv = [
            dbeta, dr, dx, dy, dpsi, phi_dot, phi_ddot, dds.z_int, dds.z_pade, dds.t_d, dw_y, dw_theta,
        ];
        let signals = Signals {
            driver_err,
            guid_err,
            delta,
            t_h,
            t_a,
            phi_target,
        };
        Ok((deriv, signals))
    }
}

fn axpy(x: &State, h: f64, k: &State) -> State {
    let mut out = *x;
    for (o, ki) in out.iter_mut().zip(k) {
        *o += h * ki;
    }
    out
}

/// Integrates the scenario with classical RK4 and logs every `1/log_rate`.
pub fn run(sc: &Scenario) -> Result<SimLog, SimError> {
    sc.validate()?;
    let system = ClosedLoop::new(sc);
    let dt = sc.dt;
    let substeps = sc.substeps();
    let samples = sc.sample_count();

    let origin = sc.course.origin();
    let mut x: State = [0.0; STATE_LEN];
    x[2] = origin.x;
    x[3] = origin.y;
    x[4] = origin.heading;
    let (_, guid0) = system
        .errors(&x, &sc.driver_guided)
        .map_err(|source| SimError::Road { t: 0.0, source })?;
    x[10] = guid0.e_y;
    x[11] = guid0.e_theta;

    // Mode switches happen on integration-step boundaries.
    let step_of = |t: f64| (t / dt - 1e-9).ceil().max(0.0) as usize;
    let (fail_step, manual_step) = match sc.failure {
        Some(f) => (step_of(f.t_fail), step_of(f.t_fail + f.t_response)),
        None => (usize::MAX, usize::MAX),
    };
    let mode_at = |step: usize| {
        let failed = step >= fail_step;
        let manual = step >= manual_step;
        let mut flags = 0;
        if failed {
            flags |= FLAG_GUIDANCE_FAILED;
        }
        if manual {
            flags |= FLAG_DRIVER_MANUAL;
        }
        Mode {
            driver: if manual { &sc.driver_manual } else { &sc.driver_guided },
            guidance_on: sc.guidance.enabled && !failed,
            flags,
        }
    };

    let mut rows = Vec::with_capacity(samples);
    for sample in 0..samples {
        let t = sample as f64 / sc.log_rate;
        let step0 = sample * substeps;
        let mode = mode_at(step0);
        let (_, sig) = system
            .derivative(&x, &mode)
            .map_err(|source| SimError::Road { t, source })?;
        rows.push(log_row(sc, &x, &sig, t, mode.flags)?);

        if sample + 1 == samples {
            break;
        }
        for sub in 0..substeps {
            let step = step0 + sub;
            let mode = mode_at(step);
            let ts = step as f64 * dt;
            let eval = |state: &State| {
                system
                    .derivative(state, &mode)
                    .map(|(d, _)| d)
                    .map_err(|source| SimError::Road { t: ts, source })
            };
            let k1 = eval(&x)?;
            let k2 = eval(&axpy(&x, 0.5 * dt, &k1))?;
            let k3 = eval(&axpy(&x, 0.5 * dt, &k2))?;
            let k4 = eval(&axpy(&x, dt, &k3))?;
            for i in 0..STATE_LEN {
                x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            if let Some(i) = x.iter().position(|v| !(v.abs() <= DIVERGENCE_LIMIT)) {
                return Err(SimError::Divergence {
                    state: STATE_NAMES[i],
                    value: x[i],
                    t: (step + 1) as f64 * dt,
                    sample: (step + 1) / substeps,
                });
            }
        }
    }
    Ok(SimLog {
        log_rate: sc.log_rate,
        rows,
    })
}

fn log_row(sc: &Scenario, x: &State, sig: &Signals, t: f64, mut flags: u32) -> Result<LogRow, SimError> {
    let lateral_error = sc
        .course
        .project(x[2], x[3])
        .map_err(|source| SimError::Road { t, source })?
        .offset;
    if x[0].abs() > crate::plant::LINEAR_SLIP_LIMIT {
        flags |= FLAG_NONLINEAR_SLIP;
    }
    if lateral_error.abs() > LANE_HALF_WIDTH {
        flags |= FLAG_LANE_DEPARTURE;
    }
    Ok(LogRow {
        t,
        x: x[2],
        y: x[3],
        psi: x[4],
        beta: x[0],
        r: x[1],
        phi: x[5],
        phi_dot: x[6],
        delta: sig.delta,
        e_y: sig.driver_err.e_y,
        e_theta: sig.driver_err.e_theta,
        e_y_guid: sig.guid_err.e_y,
        e_theta_guid: sig.guid_err.e_theta,
        t_d: x[9],
        t_h: sig.t_h,
        t_a: sig.t_a,
        lateral_error,
        flags,
        phi_target: sig.phi_target,
    })
}

/// Runs scenarios in parallel; results come back in input order.
pub fn run_many(scenarios: &[Scenario]) -> Vec<Result<SimLog, SimError>> {
    scenarios.par_iter().map(run).collect()
}

/// Failure semantics are applied inside [`run`]; this attaches them to a
/// scenario after checking the timing against its duration.
pub fn inject_failure(sc: Scenario, t_fail: f64, t_response: f64) -> Result<Scenario, SimError> {
    let sc = sc.with_failure(t_fail, t_response);
    sc.validate()?;
    Ok(sc)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub mean_abs_lateral: f64,
    pub max_abs_lateral: f64,
    pub mean_abs_td: f64,
    pub traj_mae_vs_ref: Option<f64>,
    pub lane_departure: bool,
}

pub fn compute_metrics(log: &SimLog, reference: Option<&SimLog>) -> Result<Metrics, MetricsError> {
    if log.is_empty() {
        return Err(MetricsError::Empty);
    }
    let n = log.len() as f64;
    let mean_abs_lateral = log.rows.iter().map(|r| r.lateral_error.abs()).sum::<f64>() / n;
    let max_abs_lateral = log.rows.iter().map(|r| r.lateral_error.abs()).fold(0.0, f64::max);
    let mean_abs_td = log.rows.iter().map(|r| r.t_d.abs()).sum::<f64>() / n;
    let traj_mae_vs_ref = match reference {
        None => None,
        Some(reference) => {
            if reference.len() != log.len() {
                return Err(MetricsError::LengthMismatch {
                    log: log.len(),
                    reference: reference.len(),
                });
            }
            let total: f64 = log
                .rows
                .iter()
                .zip(&reference.rows)
                .map(|(a, b)| (a.x - b.x).hypot(a.y - b.y))
                .sum();
            Some(total / n)
        }
    };
    Ok(Metrics {
        mean_abs_lateral,
        max_abs_lateral,
        mean_abs_td,
        traj_mae_vs_ref,
        lane_departure: max_abs_lateral > LANE_HALF_WIDTH,
    })
}

/// Time window `[start, end)` during which the CG nominally travels the
/// first arc segment of the course at constant speed.
pub fn first_curve_window(course: &RoadPath, v: f64) -> Option<(f64, f64)> {
    let idx = course
        .segments()
        .iter()
        .position(|s| s.kind == crate::road::SegmentKind::Arc)?;
    let (s0, s1) = course.segment_span(idx);
    Some((s0 / v, s1 / v))
}

/// Mean |lateral error| over samples with `start <= t < end`.
pub fn window_mean_abs_lateral(log: &SimLog, start: f64, end: f64) -> f64 {
    let (sum, count) = log
        .rows
        .iter()
        .filter(|r| r.t >= start && r.t < end)
        .fold((0.0, 0usize), |(s, c), r| (s + r.lateral_error.abs(), c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Peak |lateral error| over samples with `t >= start`.
pub fn peak_abs_lateral_after(log: &SimLog, start: f64) -> f64 {
    log.rows
        .iter()
        .filter(|r| r.t >= start)
        .map(|r| r.lateral_error.abs())
        .fold(0.0, f64::max)
}

/// Peak |lateral error| over samples with `start <= t < end`.
pub fn window_peak_abs_lateral(log: &SimLog, start: f64, end: f64) -> f64 {
    log.rows
        .iter()
        .filter(|r| r.t >= start && r.t < end)
        .map(|r| r.lateral_error.abs())
        .fold(0.0, f64::max)
}

/// One cell of the driver × reliance evaluation grid.
#[derive(Debug, Clone)]
pub struct GridRun {
    /// 1-based driver number.
    pub driver: usize,
    pub reliance: Reliance,
    pub scenario: Scenario,
}

/// The three evaluation drivers crossed with the four reliance levels, in
/// driver-major, least-to-most-reliant order.
pub fn attention_grid(base: &Scenario, failure: Option<FailureSpec>) -> Vec<GridRun> {
    let mut runs = Vec::with_capacity(DRIVER_DELAYS.len() * Reliance::ORDERED.len());
    for (i, &t_p) in DRIVER_DELAYS.iter().enumerate() {
        for level in Reliance::ORDERED {
            let mut sc = base.clone().with_delay(t_p).with_reliance(level);
            // Manual driving has nothing to fail.
            sc.failure = if level == Reliance::Manual { None } else { failure };
            runs.push(GridRun {
                driver: i + 1,
                reliance: level,
                scenario: sc,
            });
        }
    }
    runs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::road::RoadSegment;

    fn straight_scenario() -> Scenario {
        let course = RoadPath::build(vec![RoadSegment::straight(2000.0)], Pose2::default()).unwrap();
        Scenario {
            duration: 5.0,
            ..Scenario::new(course, DriverParams::default())
        }
    }

    #[test]
    fn reliance_presets() {
        assert_eq!(
            reliance_preset(Reliance::High),
            RelianceGains {
                k_d: 2.0,
                k_hg: Some(0.0),
                guidance_enabled: true
            }
        );
        assert_eq!(reliance_preset(Reliance::Low).k_hg, Some(1.0));
        let manual = reliance_preset(Reliance::Manual);
        assert_eq!((manual.k_d, manual.guidance_enabled), (4.0, false));
        assert!("bogus".parse::<Reliance>().is_err());
        assert_eq!("MID".parse::<Reliance>(), Ok(Reliance::Mid));
    }

    #[test]
    fn straight_course_stays_at_equilibrium() {
        let log = run(&straight_scenario()).unwrap();
        assert_eq!(log.len(), 600);
        assert!(log
            .rows
            .iter()
            .all(|r| r.lateral_error == 0.0 && r.t_d == 0.0 && r.t_h == 0.0));
    }

    #[test]
    fn log_times_are_uniform() {
        let log = run(&straight_scenario()).unwrap();
        for (k, row) in log.rows.iter().enumerate() {
            assert_eq!(row.t, k as f64 / 120.0);
        }
    }

    #[test]
    fn validation_errors() {
        let mut sc = straight_scenario();
        sc.dt = 1.0 / 100.0;
        assert!(matches!(run(&sc), Err(SimError::Config(_))));
        let mut sc = straight_scenario();
        sc.dt = 1.0 / 500.0;
        assert!(matches!(run(&sc), Err(SimError::Config(_))));
        let sc = straight_scenario();
        assert!(inject_failure(sc, 4.5, 1.0).is_err());
    }

    #[test]
    fn divergence_is_reported() {
        let mut sc = straight_scenario();
        sc.course = RoadPath::build(
            vec![
                RoadSegment::straight(50.0),
                RoadSegment::arc(20.0, 90.0),
                RoadSegment::straight(3000.0),
            ],
            Pose2::default(),
        )
        .unwrap();
        // A strongly oversteering vehicle is open-loop unstable at speed.
        sc.vehicle.k_r = 500.0;
        sc.vehicle.v = 40.0;
        sc.duration = 30.0;
        match run(&sc) {
            Err(SimError::Divergence { .. }) | Err(SimError::Road { .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn metrics_basic() {
        let log = run(&straight_scenario()).unwrap();
        let m = compute_metrics(&log, Some(&log)).unwrap();
        assert_eq!(m.traj_mae_vs_ref, Some(0.0));
        assert!(!m.lane_departure);
        let mut shifted = log.clone();
        for r in &mut shifted.rows {
            r.y += 0.2;
        }
        let m = compute_metrics(&log, Some(&shifted)).unwrap();
        assert!((m.traj_mae_vs_ref.unwrap() - 0.2).abs() < 1e-12);
        shifted.rows.pop();
        assert!(matches!(
            compute_metrics(&log, Some(&shifted)),
            Err(MetricsError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn grid_shape() {
        let grid = attention_grid(&Scenario::default(), None);
        assert_eq!(grid.len(), 12);
        assert_eq!(grid[11].driver, 3);
        assert_eq!(grid[11].reliance, Reliance::High);
        assert_eq!(grid[11].scenario.driver_guided.t_p, 0.5);
    }
}
