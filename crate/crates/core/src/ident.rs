//! Grey-box identification of the driver model: zero-order-hold
//! discretisation, output prediction, normalised-RMSE fitness, and bounded
//! Gauss-Newton minimisation of the prediction error with Levenberg damping.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix3x4, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::driver::{assemble_state_space, DriverParams};
use crate::error::IdentError;
use crate::simulator::{run, Scenario};

/// Identification inputs `(e_y, e_θ, φ, T_h)` and outputs `(T_d, φ'_obs)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataMode {
    Manual,
    Haptic,
}

impl DataMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DataMode::Manual => "manual",
            DataMode::Haptic => "haptic",
        }
    }
}

impl std::str::FromStr for DataMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "manual" => Ok(DataMode::Manual),
            "haptic" => Ok(DataMode::Haptic),
            other => Err(format!("unknown data mode `{other}` (expected manual|haptic)")),
        }
    }
}

/// Minimum record length (s).
pub const MIN_DATA_SECONDS: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub sample_rate: f64,
    pub mode: DataMode,
    pub inputs: Vec<[f64; 4]>,
    pub outputs: Vec<[f64; 2]>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn validate(&self) -> Result<(), IdentError> {
        let bad = |m: String| Err(IdentError::Dataset(m));
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return bad(format!("sample rate {} must be > 0", self.sample_rate));
        }
        if self.inputs.len() != self.outputs.len() {
            return Err(IdentError::LengthMismatch(self.inputs.len(), self.outputs.len()));
        }
        let min_len = (MIN_DATA_SECONDS * self.sample_rate).ceil() as usize;
        if self.len() < min_len {
            return bad(format!(
                "{} samples is shorter than {MIN_DATA_SECONDS} s at {} Hz",
                self.len(),
                self.sample_rate
            ));
        }
        for (k, (u, y)) in self.inputs.iter().zip(&self.outputs).enumerate() {
            if u.iter().chain(y).any(|v| !v.is_finite()) {
                return bad(format!("non-finite value at sample {k}"));
            }
            if self.mode == DataMode::Manual && u[3] != 0.0 {
                return bad(format!("manual-mode data has T_h = {} at sample {k}", u[3]));
            }
        }
        Ok(())
    }

    pub fn output_channel(&self, channel: usize) -> Vec<f64> {
        self.outputs.iter().map(|y| y[channel]).collect()
    }
}

/// Zero-order-hold discretisation via the exponential of the augmented
/// matrix `[[A, B], [0, 0]]·dt`.
pub fn discretize_zoh(a: &DMatrix<f64>, b: &DMatrix<f64>, dt: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let m = b.ncols();
    assert_eq!(a.ncols(), n, "A must be square");
    assert_eq!(b.nrows(), n, "B must have as many rows as A");
    let mut aug = DMatrix::zeros(n + m, n + m);
    aug.view_mut((0, 0), (n, n)).copy_from(&(a * dt));
    aug.view_mut((0, n), (n, m)).copy_from(&(b * dt));
    let e = aug.exp();
    (e.view((0, 0), (n, n)).into_owned(), e.view((0, n), (n, m)).into_owned())
}

/// Discrete driver model at a fixed sample period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteDriver {
    pub a: Matrix3<f64>,
    pub b: Matrix3x4<f64>,
    pub c: nalgebra::Matrix2x3<f64>,
    pub d: nalgebra::Matrix2x4<f64>,
}

impl DiscreteDriver {
    pub fn new(dp: &DriverParams, dt: f64) -> Self {
        let ss = assemble_state_space(dp);
        let a = DMatrix::from_column_slice(3, 3, ss.a.as_slice());
        let b = DMatrix::from_column_slice(3, 4, ss.b.as_slice());
        let (ad, bd) = discretize_zoh(&a, &b, dt);
        Self {
            a: Matrix3::from_column_slice(ad.as_slice()),
            b: Matrix3x4::from_column_slice(bd.as_slice()),
            c: ss.c,
            d: ss.d,
        }
    }

    /// Simulates from `x0` over the input record.
    pub fn simulate(&self, inputs: &[[f64; 4]], x0: Vector3<f64>) -> Vec<[f64; 2]> {
        let mut x = x0;
        inputs
            .iter()
            .map(|u| {
                let u = Vector4::from_column_slice(u);
                let y = self.c * x + self.d * u;
                x = self.a * x + self.b * u;
                [y[0], y[1]]
            })
            .collect()
    }
}

/// Predicted `(T_d, φ')` for the dataset inputs from a zero initial state.
pub fn predict(dp: &DriverParams, data: &Dataset) -> Vec<[f64; 2]> {
    predict_from(dp, data, Vector3::zeros())
}

pub fn predict_from(dp: &DriverParams, data: &Dataset, x0: Vector3<f64>) -> Vec<[f64; 2]> {
    DiscreteDriver::new(dp, 1.0 / data.sample_rate).simulate(&data.inputs, x0)
}

/// Normalised-RMSE fit: `100·(1 − ‖y − ŷ‖ / ‖y − mean(y)‖)`.
pub fn fit_percent(y: &[f64], y_hat: &[f64]) -> Result<f64, IdentError> {
    if y.len() != y_hat.len() {
        return Err(IdentError::LengthMismatch(y.len(), y_hat.len()));
    }
    if y.is_empty() {
        return Err(IdentError::ConstantReference);
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let spread = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>().sqrt();
    if spread == 0.0 {
        return Err(IdentError::ConstantReference);
    }
    let err = y.iter().zip(y_hat).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    Ok(100.0 * (1.0 - err / spread))
}

/// Identifiable driver parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FreeParam {
    A1,
    A2,
    A3,
    Tp,
    Kd,
    Khg,
}

impl FreeParam {
    pub const ALL: [FreeParam; 6] = [
        FreeParam::A1,
        FreeParam::A2,
        FreeParam::A3,
        FreeParam::Tp,
        FreeParam::Kd,
        FreeParam::Khg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FreeParam::A1 => "a1",
            FreeParam::A2 => "a2",
            FreeParam::A3 => "a3",
            FreeParam::Tp => "t_p",
            FreeParam::Kd => "K_d",
            FreeParam::Khg => "K_hg",
        }
    }

    pub fn get(self, dp: &DriverParams) -> f64 {
        match self {
            FreeParam::A1 => dp.a1,
            FreeParam::A2 => dp.a2,
            FreeParam::A3 => dp.a3,
            FreeParam::Tp => dp.t_p,
            FreeParam::Kd => dp.k_d,
            FreeParam::Khg => dp.k_hg,
        }
    }

    pub fn set(self, dp: &mut DriverParams, value: f64) {
        match self {
            FreeParam::A1 => dp.a1 = value,
            FreeParam::A2 => dp.a2 = value,
            FreeParam::A3 => dp.a3 = value,
            FreeParam::Tp => dp.t_p = value,
            FreeParam::Kd => dp.k_d = value,
            FreeParam::Khg => dp.k_hg = value,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Relative weights of the `(T_d, φ'_obs)` channels in the loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputWeights {
    /// Each channel divided by its sample variance.
    InverseVariance,
    Fixed([f64; 2]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentConfig {
    /// `[lo, hi]` per [`FreeParam`], indexed in `FreeParam::ALL` order.
    pub bounds: [(f64, f64); 6],
    /// Start point; also supplies the fixed `K_nms`, `t_nms` and look-ahead times.
    pub start: DriverParams,
    /// Total number of starts, the first being `start`.
    pub multistart: usize,
    pub seed: u64,
    /// Stop once the Gauss-Newton predicted loss reduction falls below this
    /// fraction of the current loss.
    pub stop_threshold: f64,
    pub max_iterations: usize,
    pub weights: OutputWeights,
    /// Also estimate the initial driver state.
    pub estimate_x0: bool,
    /// Symmetric bound on each initial-state component when estimated.
    pub x0_bound: f64,
}

impl Default for IdentConfig {
    fn default() -> Self {
        Self {
            bounds: [(0.0, 0.5), (0.0, 0.1), (3.0, 5.0), (0.01, 0.3), (1.0, 5.0), (0.0, 1.0)],
            start: DriverParams::IDENT_DEFAULT,
            multistart: 1,
            seed: 0,
            stop_threshold: 1e-4,
            max_iterations: 100,
            weights: OutputWeights::InverseVariance,
            estimate_x0: false,
            x0_bound: 10.0,
        }
    }
}

impl IdentConfig {
    pub fn bound(&self, p: FreeParam) -> (f64, f64) {
        self.bounds[p.index()]
    }

    pub fn validate(&self) -> Result<(), IdentError> {
        let bad = |m: String| Err(IdentError::Config(m));
        for p in FreeParam::ALL {
            let (lo, hi) = self.bound(p);
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return bad(format!("bounds of {} must satisfy lo < hi, got [{lo}, {hi}]", p.name()));
            }
            let v = p.get(&self.start);
            if !(lo..=hi).contains(&v) {
                return bad(format!("start {} = {v} lies outside [{lo}, {hi}]", p.name()));
            }
        }
        if self.bound(FreeParam::Tp).0 <= 0.0 {
            return bad("t_p lower bound must be > 0".into());
        }
        let (k_lo, k_hi) = self.bound(FreeParam::Khg);
        if k_lo < 0.0 || k_hi > 1.0 {
            return bad("K_hg bounds must lie within [0, 1]".into());
        }
        if self.multistart == 0 {
            return bad("multistart must be >= 1".into());
        }
        if !(self.stop_threshold > 0.0) {
            return bad("stop_threshold must be > 0".into());
        }
        if let OutputWeights::Fixed(w) = self.weights {
            if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || w.iter().all(|v| *v == 0.0) {
                return bad(format!("output weights {w:?} must be non-negative and not all zero"));
            }
        }
        if self.estimate_x0 && !(self.x0_bound > 0.0) {
            return bad("x0_bound must be > 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentResult {
    /// Identified parameters; `k_hg` is meaningless when not estimated.
    pub params: DriverParams,
    pub free: Vec<FreeParam>,
    /// Free parameters that ended on a bound.
    pub at_bound: Vec<FreeParam>,
    /// Fit percentage of `(T_d, φ'_obs)`.
    pub fitness: [f64; 2],
    pub loss: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Loss at the start and after every accepted step of the winning start.
    pub loss_history: Vec<f64>,
    /// `y − ŷ` per sample.
    pub residuals: Vec<[f64; 2]>,
    pub start: DriverParams,
    /// Index of the winning start.
    pub start_index: usize,
    pub x0: Option<[f64; 3]>,
}

impl IdentResult {
    pub fn estimates_k_hg(&self) -> bool {
        self.free.contains(&FreeParam::Khg)
    }
}

const FD_RELATIVE_STEP: f64 = 1e-6;
const FD_MIN_STEP: f64 = 1e-8;
const LAMBDA_START: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e12;

/// Prediction-error problem in coordinates normalised to `[0, 1]` per bound.
struct Problem<'a> {
    data: &'a Dataset,
    cfg: &'a IdentConfig,
    free: Vec<FreeParam>,
    sqrt_w: [f64; 2],
}

impl Problem<'_> {
    fn dim(&self) -> usize {
        self.free.len() + if self.cfg.estimate_x0 { 3 } else { 0 }
    }

    fn bounds(&self, i: usize) -> (f64, f64) {
        match self.free.get(i) {
            Some(p) => self.cfg.bound(*p),
            None => (-self.cfg.x0_bound, self.cfg.x0_bound),
        }
    }

    fn to_physical(&self, z: &DVector<f64>) -> (DriverParams, Vector3<f64>) {
        let mut dp = self.cfg.start;
        if !self.free.contains(&FreeParam::Khg) {
            dp.k_hg = 0.0;
        }
        let mut x0 = Vector3::zeros();
        for i in 0..self.dim() {
            let (lo, hi) = self.bounds(i);
            let v = lo + z[i] * (hi - lo);
            match self.free.get(i) {
                Some(p) => p.set(&mut dp, v),
                None => x0[i - self.free.len()] = v,
            }
        }
        (dp, x0)
    }

    fn to_normalised(&self, dp: &DriverParams) -> DVector<f64> {
        DVector::from_fn(self.dim(), |i, _| {
            let (lo, hi) = self.bounds(i);
            let v = self.free.get(i).map_or(0.0, |p| p.get(dp));
            ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
        })
    }

    fn outputs(&self, z: &DVector<f64>) -> Vec<[f64; 2]> {
        let (dp, x0) = self.to_physical(z);
        predict_from(&dp, self.data, x0)
    }

    /// Weighted residuals scaled so that `‖r‖²` is the mean weighted squared error.
    fn residuals(&self, z: &DVector<f64>) -> DVector<f64> {
        let n = self.data.len();
        let scale = 1.0 / (n as f64).sqrt();
        let y_hat = self.outputs(z);
        let mut r = DVector::zeros(2 * n);
        for (k, (y, yh)) in self.data.outputs.iter().zip(&y_hat).enumerate() {
            r[k] = self.sqrt_w[0] * scale * (y[0] - yh[0]);
            r[n + k] = self.sqrt_w[1] * scale * (y[1] - yh[1]);
        }
        r
    }

    fn jacobian(&self, z: &DVector<f64>, r: &DVector<f64>) -> DMatrix<f64> {
        let columns: Vec<DVector<f64>> = (0..self.dim())
            .into_par_iter()
            .map(|i| {
                let (lo, hi) = self.bounds(i);
                let phys = lo + z[i] * (hi - lo);
                let h = (FD_RELATIVE_STEP * phys.abs()).max(FD_MIN_STEP) / (hi - lo);
                // Step inward at the upper bound.
                let h = if z[i] + h > 1.0 { -h } else { h };
                let mut zp = z.clone();
                zp[i] += h;
                (self.residuals(&zp) - r) / h
            })
            .collect();
        DMatrix::from_columns(&columns)
    }
}

fn project_unit(z: &DVector<f64>) -> DVector<f64> {
    z.map(|v| v.clamp(0.0, 1.0))
}

/// Solves `(JᵀJ + λ·diag(JᵀJ)) δ = −Jᵀr` over the `inactive` coordinates in
/// the least-squares sense; the other components of `δ` are zero.
fn damped_step(jtj: &DMatrix<f64>, jtr: &DVector<f64>, inactive: &[usize], lambda: f64) -> Option<DVector<f64>> {
    if inactive.is_empty() {
        return None;
    }
    let mut h = jtj.select_rows(inactive).select_columns(inactive);
    for i in 0..h.nrows() {
        h[(i, i)] += lambda * h[(i, i)].max(1e-12);
    }
    let svd = h.svd(true, true);
    let tol = 1e-12 * svd.singular_values.max();
    let g = -jtr.select_rows(inactive);
    let reduced = svd.solve(&g, tol).ok()?;
    let mut step = DVector::zeros(jtr.len());
    for (k, &i) in inactive.iter().enumerate() {
        step[i] = reduced[k];
    }
    Some(step)
}

/// Coordinates free to move: those not on a bound with the descent
/// direction pointing outward.
fn inactive_set(z: &DVector<f64>, jtr: &DVector<f64>) -> Vec<usize> {
    (0..z.len())
        .filter(|&i| !((z[i] <= 0.0 && jtr[i] > 0.0) || (z[i] >= 1.0 && jtr[i] < 0.0)))
        .collect()
}

/// Loss reduction predicted by the linearised model for the Gauss-Newton
/// step over the coordinates not held at a bound by the gradient.
fn gauss_newton_gain(j: &DMatrix<f64>, r: &DVector<f64>, inactive: &[usize]) -> f64 {
    if inactive.is_empty() {
        return 0.0;
    }
    let jr = j.select_columns(inactive);
    let Ok(step) = jr.clone().svd(true, true).solve(&(-r), 1e-12) else {
        return 0.0;
    };
    r.norm_squared() - (r + &jr * step).norm_squared()
}

struct LocalFit {
    z: DVector<f64>,
    loss: f64,
    history: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn local_fit(problem: &Problem, z0: DVector<f64>) -> Result<LocalFit, IdentError> {
    let mut z = z0;
    let mut r = problem.residuals(&z);
    let mut loss = r.norm_squared();
    if !loss.is_finite() {
        return Err(IdentError::NonFiniteLoss);
    }
    let mut history = vec![loss];
    let mut lambda = LAMBDA_START;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < problem.cfg.max_iterations {
        if loss == 0.0 {
            converged = true;
            break;
        }
        let j = problem.jacobian(&z, &r);
        let jt = j.transpose();
        let jtj = &jt * &j;
        let jtr = &jt * &r;

        let inactive = inactive_set(&z, &jtr);
        if gauss_newton_gain(&j, &r, &inactive) / loss < problem.cfg.stop_threshold {
            converged = true;
            break;
        }

        iterations += 1;
        let mut accepted = false;
        while lambda <= LAMBDA_MAX {
            let Some(step) = damped_step(&jtj, &jtr, &inactive, lambda) else {
                lambda *= 10.0;
                continue;
            };
            let z_new = project_unit(&(&z + step));
            let r_new = problem.residuals(&z_new);
            let loss_new = r_new.norm_squared();
            if loss_new.is_finite() && loss_new < loss {
                z = z_new;
                r = r_new;
                loss = loss_new;
                history.push(loss);
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No descent direction left within the bounds.
            break;
        }
    }
    Ok(LocalFit {
        z,
        loss,
        history,
        iterations,
        converged,
    })
}

fn channel_weights(data: &Dataset, weights: OutputWeights) -> [f64; 2] {
    match weights {
        OutputWeights::Fixed(w) => w,
        OutputWeights::InverseVariance => {
            let mut w = [1.0; 2];
            for (c, wc) in w.iter_mut().enumerate() {
                let y = data.output_channel(c);
                let mean = y.iter().sum::<f64>() / y.len() as f64;
                let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64;
                if var > 0.0 {
                    *wc = 1.0 / var;
                }
            }
            w
        }
    }
}

/// Fits the free driver parameters to `data`. In manual mode `K_hg` is not
/// estimated.
pub fn identify(data: &Dataset, cfg: &IdentConfig) -> Result<IdentResult, IdentError> {
    data.validate()?;
    cfg.validate()?;
    let free: Vec<FreeParam> = FreeParam::ALL
        .into_iter()
        .filter(|p| !(data.mode == DataMode::Manual && *p == FreeParam::Khg))
        .collect();
    let w = channel_weights(data, cfg.weights);
    let problem = Problem {
        data,
        cfg,
        free,
        sqrt_w: [w[0].sqrt(), w[1].sqrt()],
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts = vec![problem.to_normalised(&cfg.start)];
    for _ in 1..cfg.multistart {
        starts.push(DVector::from_fn(problem.dim(), |i, _| {
            if i < problem.free.len() {
                rng.random::<f64>()
            } else {
                0.5
            }
        }));
    }

    let fits: Vec<Result<LocalFit, IdentError>> = starts.par_iter().map(|z0| local_fit(&problem, z0.clone())).collect();
    let mut best: Option<(usize, LocalFit)> = None;
    for (i, fit) in fits.into_iter().enumerate() {
        let fit = fit?;
        if best.as_ref().is_none_or(|(_, b)| fit.loss < b.loss) {
            best = Some((i, fit));
        }
    }
    let (start_index, fit) = best.expect("at least one start");

    let (params, x0) = problem.to_physical(&fit.z);
    let y_hat = problem.outputs(&fit.z);
    let mut fitness = [0.0; 2];
    for (c, f) in fitness.iter_mut().enumerate() {
        let y = data.output_channel(c);
        let yh: Vec<f64> = y_hat.iter().map(|v| v[c]).collect();
        *f = fit_percent(&y, &yh).unwrap_or(f64::NAN);
    }
    let residuals = data
        .outputs
        .iter()
        .zip(&y_hat)
        .map(|(y, yh)| [y[0] - yh[0], y[1] - yh[1]])
        .collect();
    let at_bound = problem
        .free
        .iter()
        .copied()
        .filter(|p| {
            let (lo, hi) = cfg.bound(*p);
            let v = p.get(&params);
            v <= lo + 1e-9 * (hi - lo) || v >= hi - 1e-9 * (hi - lo)
        })
        .collect();
    let (start, _) = problem.to_physical(&starts[start_index]);
    Ok(IdentResult {
        params,
        free: problem.free,
        at_bound,
        fitness,
        loss: fit.loss,
        iterations: fit.iterations,
        converged: fit.converged,
        loss_history: fit.history,
        residuals,
        start,
        start_index,
        x0: cfg.estimate_x0.then(|| [x0[0], x0[1], x0[2]]),
    })
}

/// Which simulator signal stands in for the target-angle output channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleObservation {
    /// The driver model's own target angle φ'.
    TargetAngle,
    /// The measured steering-wheel angle φ.
    SteeringWheel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Standard deviation added to T_d (N·m).
    pub sigma_td: f64,
    /// Standard deviation added to the angle channel (rad).
    pub sigma_angle: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            sigma_td: 0.0,
            sigma_angle: 0.0,
            seed: 0,
        }
    }
}

/// Runs the closed loop with driver `theta` and records the identification
/// signals at the scenario's log rate.
pub fn generate_dataset(
    theta: &DriverParams,
    scenario: &Scenario,
    mode: DataMode,
    observation: AngleObservation,
    noise: &NoiseSpec,
) -> Result<Dataset, IdentError> {
    let mut sc = scenario.clone();
    sc.driver_guided = *theta;
    sc.guidance.enabled = mode == DataMode::Haptic;
    sc.failure = None;
    sc.reliance = None;
    let log = run(&sc)?;

    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut draw = |sigma: f64| -> f64 {
        if sigma > 0.0 {
            Normal::new(0.0, sigma).expect("finite sigma").sample(&mut rng)
        } else {
            0.0
        }
    };
    let mut inputs = Vec::with_capacity(log.len());
    let mut outputs = Vec::with_capacity(log.len());
    for row in &log.rows {
        inputs.push([row.e_y, row.e_theta, row.phi, row.t_h]);
        let angle = match observation {
            AngleObservation::TargetAngle => row.phi_target,
            AngleObservation::SteeringWheel => row.phi,
        };
        outputs.push([row.t_d + draw(noise.sigma_td), angle + draw(noise.sigma_angle)]);
    }
    Ok(Dataset {
        sample_rate: log.log_rate,
        mode,
        inputs,
        outputs,
    })
}
