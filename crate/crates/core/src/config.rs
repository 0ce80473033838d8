//! Sectioned `key = value` configuration.
//!
//! ```text
//! # comment
//! [vehicle]
//! v = 16.666666666666668
//! [course]
//! origin = 0,0,0
//! segment = straight,1000
//! segment = arc,300,90
//! [scenario]
//! reliance = high
//! ```
//!
//! Every section is optional and every key defaults to the built-in
//! parameter values. Unknown sections and keys are rejected. `segment`
//! lines accumulate in order; without any, the default course is used.
//! [`Config::emit`] writes every value with the shortest round-tripping
//! decimal form, so an emitted document parses back to identical values.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::driver::DriverParams;
use crate::error::ConfigError;
use crate::guidance::GuidanceParams;
use crate::ident::{AngleObservation, FreeParam, IdentConfig, NoiseSpec, OutputWeights};
use crate::plant::{SteeringParams, VehicleParams};
use crate::road::{default_segments, Pose2, RoadPath, RoadSegment, SegmentKind};
use crate::simulator::{
    apply_reliance, Reliance, Scenario, DEFAULT_DT, DEFAULT_DURATION, DEFAULT_LOG_RATE, DRIVER_DELAYS, MANUAL_K_D,
};

/// A course segment as written in the config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentSpec {
    Straight {
        length: f64,
    },
    /// Negative `degrees` turn right.
    Arc {
        radius: f64,
        degrees: f64,
    },
}

impl SegmentSpec {
    pub fn to_segment(self) -> RoadSegment {
        match self {
            SegmentSpec::Straight { length } => RoadSegment::straight(length),
            SegmentSpec::Arc { radius, degrees } => RoadSegment::arc(radius, degrees),
        }
    }

    /// Inverse of [`SegmentSpec::to_segment`] up to rounding.
    pub fn from_segment(seg: &RoadSegment) -> Self {
        match seg.kind {
            SegmentKind::Straight => SegmentSpec::Straight { length: seg.length },
            SegmentKind::Arc => SegmentSpec::Arc {
                radius: 1.0 / seg.curvature.abs(),
                degrees: (seg.curvature * seg.length).to_degrees(),
            },
        }
    }
}

impl std::fmt::Display for SegmentSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SegmentSpec::Straight { length } => write!(f, "straight,{length}"),
            SegmentSpec::Arc { radius, degrees } => write!(f, "arc,{radius},{degrees}"),
        }
    }
}

impl FromStr for SegmentSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        match parts.as_slice() {
            ["straight", len] => Ok(SegmentSpec::Straight {
                length: parse_f64(len)?,
            }),
            ["arc", radius, degrees] => Ok(SegmentSpec::Arc {
                radius: parse_f64(radius)?,
                degrees: parse_f64(degrees)?,
            }),
            _ => Err(format!(
                "expected `straight,<length>` or `arc,<radius>,<degrees>`, got `{s}`"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CourseSpec {
    pub origin: Pose2,
    pub segments: Vec<SegmentSpec>,
}

impl Default for CourseSpec {
    fn default() -> Self {
        Self {
            origin: Pose2::default(),
            segments: default_segments().iter().map(SegmentSpec::from_segment).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub duration: f64,
    pub dt: f64,
    pub log_rate: f64,
    pub reliance: Option<Reliance>,
    /// Preset driver 1..=3, selecting the processing delay.
    pub driver: Option<u8>,
    pub t_fail: Option<f64>,
    pub t_response: f64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            duration: DEFAULT_DURATION,
            dt: DEFAULT_DT,
            log_rate: DEFAULT_LOG_RATE,
            reliance: None,
            driver: None,
            t_fail: None,
            t_response: 1.0,
        }
    }
}

/// Identification settings plus the synthetic-data options of `gen-data`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentSpec {
    pub config: IdentConfig,
    pub observation: AngleObservation,
    pub noise: NoiseSpec,
}

impl Default for IdentSpec {
    fn default() -> Self {
        Self {
            config: IdentConfig::default(),
            observation: AngleObservation::TargetAngle,
            noise: NoiseSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub vehicle: VehicleParams,
    pub steering: SteeringParams,
    pub driver: DriverParams,
    /// `K_d` of the manual take-over parameters.
    pub manual_k_d: f64,
    pub guidance: GuidanceParams,
    pub course: CourseSpec,
    pub scenario: ScenarioSpec,
    pub ident: IdentSpec,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            vehicle: VehicleParams::default(),
            steering: SteeringParams::default(),
            driver: DriverParams::default(),
            manual_k_d: MANUAL_K_D,
            guidance: GuidanceParams::default(),
            course: CourseSpec::default(),
            scenario: ScenarioSpec::default(),
            ident: IdentSpec::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Vehicle,
    Steering,
    Driver,
    Guidance,
    Course,
    Scenario,
    Ident,
}

impl Section {
    const ALL: [Section; 7] = [
        Section::Vehicle,
        Section::Steering,
        Section::Driver,
        Section::Guidance,
        Section::Course,
        Section::Scenario,
        Section::Ident,
    ];

    fn name(self) -> &'static str {
        match self {
            Section::Vehicle => "vehicle",
            Section::Steering => "steering",
            Section::Driver => "driver",
            Section::Guidance => "guidance",
            Section::Course => "course",
            Section::Scenario => "scenario",
            Section::Ident => "ident",
        }
    }
}

type Field = (&'static str, fn(&mut Config) -> &mut f64);

/// Plain numeric keys per section, in emission order.
fn numeric_fields(section: Section) -> &'static [Field] {
    match section {
        Section::Vehicle => &[
            ("m", |c| &mut c.vehicle.m),
            ("i_z", |c| &mut c.vehicle.i_z),
            ("l_f", |c| &mut c.vehicle.l_f),
            ("l_r", |c| &mut c.vehicle.l_r),
            ("k_f", |c| &mut c.vehicle.k_f),
            ("k_r", |c| &mut c.vehicle.k_r),
            ("k_s", |c| &mut c.vehicle.k_s),
            ("e_t", |c| &mut c.vehicle.e_t),
            ("v", |c| &mut c.vehicle.v),
        ],
        Section::Steering => &[
            ("j_s", |c| &mut c.steering.j_s),
            ("b_s", |c| &mut c.steering.b_s),
            ("k_t", |c| &mut c.steering.k_t),
        ],
        Section::Driver => &[
            ("a1", |c| &mut c.driver.a1),
            ("a2", |c| &mut c.driver.a2),
            ("a3", |c| &mut c.driver.a3),
            ("t_p", |c| &mut c.driver.t_p),
            ("k_d", |c| &mut c.driver.k_d),
            ("k_hg", |c| &mut c.driver.k_hg),
            ("k_nms", |c| &mut c.driver.k_nms),
            ("t_nms", |c| &mut c.driver.t_nms),
            ("t_n", |c| &mut c.driver.t_n),
            ("t_f", |c| &mut c.driver.t_f),
            ("manual_k_d", |c| &mut c.manual_k_d),
        ],
        Section::Guidance => &[
            ("a1p", |c| &mut c.guidance.a1p),
            ("a2p", |c| &mut c.guidance.a2p),
            ("a3p", |c| &mut c.guidance.a3p),
            ("a4p", |c| &mut c.guidance.a4p),
            ("k_1", |c| &mut c.guidance.k_1),
            ("t_np", |c| &mut c.guidance.t_np),
            ("t_fp", |c| &mut c.guidance.t_fp),
            ("t_max", |c| &mut c.guidance.t_max),
            ("tau_d", |c| &mut c.guidance.tau_d),
        ],
        Section::Course => &[],
        Section::Scenario => &[
            ("duration", |c| &mut c.scenario.duration),
            ("dt", |c| &mut c.scenario.dt),
            ("log_rate", |c| &mut c.scenario.log_rate),
            ("t_response", |c| &mut c.scenario.t_response),
        ],
        Section::Ident => &[
            ("stop_threshold", |c| &mut c.ident.config.stop_threshold),
            ("x0_bound", |c| &mut c.ident.config.x0_bound),
            ("noise_td", |c| &mut c.ident.noise.sigma_td),
            ("noise_phi", |c| &mut c.ident.noise.sigma_angle),
        ],
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{}` is not a number", s.trim()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{}` is not finite", s.trim()))
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        other => Err(format!("`{other}` is not a boolean (true|false)")),
    }
}

fn parse_int<T: FromStr>(s: &str) -> Result<T, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("`{}` is not a non-negative integer", s.trim()))
}

fn parse_list<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got `{}`", s.trim()));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = parse_f64(p)?;
    }
    Ok(out)
}

fn parse_observation(s: &str) -> Result<AngleObservation, String> {
    match s.trim() {
        "phi_target" => Ok(AngleObservation::TargetAngle),
        "phi" => Ok(AngleObservation::SteeringWheel),
        other => Err(format!("unknown observation `{other}` (expected phi_target|phi)")),
    }
}

fn observation_name(o: AngleObservation) -> &'static str {
    match o {
        AngleObservation::TargetAngle => "phi_target",
        AngleObservation::SteeringWheel => "phi",
    }
}

fn free_param_named(name: &str) -> Option<FreeParam> {
    FreeParam::ALL.into_iter().find(|p| p.name().eq_ignore_ascii_case(name))
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        let mut section: Option<Section> = None;
        let mut segments: Vec<SegmentSpec> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::at(line_no, line, "unterminated section header"))?
                    .trim();
                section = Some(
                    Section::ALL
                        .into_iter()
                        .find(|s| s.name() == name)
                        .ok_or_else(|| ConfigError::at(line_no, name, "unknown section"))?,
                );
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::at(line_no, line, "expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            let section = section.ok_or_else(|| ConfigError::at(line_no, key, "key outside any [section]"))?;
            let full_key = format!("{}.{key}", section.name());
            if section == Section::Course && key == "segment" {
                let seg = value
                    .parse::<SegmentSpec>()
                    .map_err(|m| ConfigError::at(line_no, &full_key, m))?;
                segments.push(seg);
                continue;
            }
            cfg.assign(section, key, value)
                .map_err(|m| ConfigError::at(line_no, &full_key, m))?;
        }
        if !segments.is_empty() {
            cfg.course.segments = segments;
        }
        Ok(cfg)
    }

    fn assign(&mut self, section: Section, key: &str, value: &str) -> Result<(), String> {
        if let Some((_, field)) = numeric_fields(section).iter().find(|(k, _)| *k == key) {
            *field(self) = parse_f64(value)?;
            return Ok(());
        }
        match (section, key) {
            (Section::Guidance, "enabled") => self.guidance.enabled = parse_bool(value)?,
            (Section::Course, "origin") => {
                let [x, y, heading] = parse_list::<3>(value)?;
                self.course.origin = Pose2::new(x, y, heading);
            }
            (Section::Scenario, "reliance") => {
                self.scenario.reliance = match value {
                    "none" => None,
                    v => Some(v.parse()?),
                }
            }
            (Section::Scenario, "driver") => {
                self.scenario.driver = match value {
                    "none" => None,
                    v => {
                        let n: u8 = parse_int(v)?;
                        if !(1..=DRIVER_DELAYS.len() as u8).contains(&n) {
                            return Err(format!("driver must be 1..={}, got {n}", DRIVER_DELAYS.len()));
                        }
                        Some(n)
                    }
                }
            }
            (Section::Scenario, "t_fail") => {
                self.scenario.t_fail = match value {
                    "none" => None,
                    v => Some(parse_f64(v)?),
                }
            }
            (Section::Ident, "multistart") => self.ident.config.multistart = parse_int(value)?,
            (Section::Ident, "seed") => self.ident.config.seed = parse_int(value)?,
            (Section::Ident, "noise_seed") => self.ident.noise.seed = parse_int(value)?,
            (Section::Ident, "max_iterations") => self.ident.config.max_iterations = parse_int(value)?,
            (Section::Ident, "estimate_x0") => self.ident.config.estimate_x0 = parse_bool(value)?,
            (Section::Ident, "observation") => self.ident.observation = parse_observation(value)?,
            (Section::Ident, "weights") => {
                self.ident.config.weights = match value {
                    "inverse_variance" => OutputWeights::InverseVariance,
                    v => OutputWeights::Fixed(parse_list::<2>(v).map_err(|m| format!("{m} or `inverse_variance`"))?),
                }
            }
            (Section::Ident, k) if k.starts_with("bound_") => {
                let p = free_param_named(&k["bound_".len()..]).ok_or("unknown key")?;
                let [lo, hi] = parse_list::<2>(value)?;
                self.ident.config.bounds[FreeParam::ALL.iter().position(|q| *q == p).unwrap()] = (lo, hi);
            }
            (Section::Ident, k) if k.starts_with("start_") => {
                let p = free_param_named(&k["start_".len()..]).ok_or("unknown key")?;
                p.set(&mut self.ident.config.start, parse_f64(value)?);
            }
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Writes every value, including defaults.
    pub fn emit(&self) -> String {
        let mut scratch = self.clone();
        let mut out = String::new();
        for section in Section::ALL {
            let _ = writeln!(out, "[{}]", section.name());
            for (key, field) in numeric_fields(section) {
                let _ = writeln!(out, "{key} = {}", *field(&mut scratch));
            }
            match section {
                Section::Guidance => {
                    let _ = writeln!(out, "enabled = {}", self.guidance.enabled);
                }
                Section::Course => {
                    let o = self.course.origin;
                    let _ = writeln!(out, "origin = {},{},{}", o.x, o.y, o.heading);
                    for seg in &self.course.segments {
                        let _ = writeln!(out, "segment = {seg}");
                    }
                }
                Section::Scenario => {
                    let s = &self.scenario;
                    let _ = writeln!(out, "reliance = {}", s.reliance.map_or("none", Reliance::as_str));
                    let _ = writeln!(out, "driver = {}", s.driver.map_or("none".into(), |d| d.to_string()));
                    let _ = writeln!(out, "t_fail = {}", s.t_fail.map_or("none".into(), |t| t.to_string()));
                }
                Section::Ident => {
                    let ic = &self.ident.config;
                    let _ = writeln!(out, "multistart = {}", ic.multistart);
                    let _ = writeln!(out, "seed = {}", ic.seed);
                    let _ = writeln!(out, "max_iterations = {}", ic.max_iterations);
                    let _ = writeln!(out, "estimate_x0 = {}", ic.estimate_x0);
                    match ic.weights {
                        OutputWeights::InverseVariance => {
                            let _ = writeln!(out, "weights = inverse_variance");
                        }
                        OutputWeights::Fixed([a, b]) => {
                            let _ = writeln!(out, "weights = {a},{b}");
                        }
                    }
                    for p in FreeParam::ALL {
                        let (lo, hi) = ic.bound(p);
                        let _ = writeln!(out, "bound_{} = {lo},{hi}", p.name().to_ascii_lowercase());
                    }
                    for p in FreeParam::ALL {
                        let _ = writeln!(out, "start_{} = {}", p.name().to_ascii_lowercase(), p.get(&ic.start));
                    }
                    let _ = writeln!(out, "observation = {}", observation_name(self.ident.observation));
                    let _ = writeln!(out, "noise_seed = {}", self.ident.noise.seed);
                }
                _ => {}
            }
        }
        out
    }

    /// The same document with presets folded into the parameter sections, so
    /// the emitted form shows the values a run actually uses.
    pub fn effective(&self) -> Config {
        let mut cfg = self.clone();
        if let Some(n) = cfg.scenario.driver {
            cfg.driver.t_p = DRIVER_DELAYS[n as usize - 1];
        }
        if let Some(level) = cfg.scenario.reliance {
            apply_reliance(level, &mut cfg.driver, &mut cfg.guidance);
        }
        cfg
    }

    pub fn build_course(&self) -> Result<RoadPath, ConfigError> {
        let segments = self.course.segments.iter().map(|s| s.to_segment()).collect();
        RoadPath::build(segments, self.course.origin).map_err(|e| ConfigError::for_key("course", e.to_string()))
    }

    /// Builds and validates the scenario described by the document.
    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let course = self.build_course()?;
        let mut sc = Scenario::new(course, self.driver);
        sc.driver_manual.k_d = self.manual_k_d;
        sc.vehicle = self.vehicle;
        sc.steering = self.steering;
        sc.guidance = self.guidance;
        sc.duration = self.scenario.duration;
        sc.dt = self.scenario.dt;
        sc.log_rate = self.scenario.log_rate;
        if let Some(n) = self.scenario.driver {
            sc = sc.with_delay(DRIVER_DELAYS[n as usize - 1]);
        }
        if let Some(level) = self.scenario.reliance {
            sc = sc.with_reliance(level);
        }
        if let Some(t_fail) = self.scenario.t_fail {
            sc = sc.with_failure(t_fail, self.scenario.t_response);
        }
        sc.validate().map_err(|e| ConfigError::new(e.to_string()))?;
        Ok(sc)
    }

    pub fn ident_config(&self) -> Result<IdentConfig, ConfigError> {
        let ic = self.ident.config.clone();
        ic.validate()
            .map_err(|e| ConfigError::for_key("ident", e.to_string()))?;
        Ok(ic)
    }
}
