//! Arc-length parameterised lane centreline built from straights and
//! circular arcs, point projection, and the near/far-point errors used by
//! both the driver and the guidance controller.

use std::f64::consts::{PI, TAU};

use crate::error::{ParamError, RoadError};

/// Half of the 3.6 m lane width.
pub const LANE_HALF_WIDTH: f64 = 1.8;
/// Projections farther than this from the path are rejected.
pub const MAX_PROJECTION_DISTANCE: f64 = 100.0;
const MAX_CURVATURE: f64 = 0.1;
const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    Straight,
    Arc,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoadSegment {
    pub kind: SegmentKind,
    /// Arc length (m).
    pub length: f64,
    /// Signed curvature (1/m), positive turning left. Zero for straights.
    pub curvature: f64,
}

impl RoadSegment {
    pub fn straight(length: f64) -> Self {
        Self {
            kind: SegmentKind::Straight,
            length,
            curvature: 0.0,
        }
    }

    /// Circular arc of `radius` sweeping `degrees`; negative sweeps turn right.
    pub fn arc(radius: f64, degrees: f64) -> Self {
        Self {
            kind: SegmentKind::Arc,
            length: radius * degrees.abs().to_radians(),
            curvature: degrees.signum() / radius,
        }
    }

    fn validate(&self, index: usize) -> Result<(), RoadError> {
        let bad = |reason: String| RoadError::BadSegment { index, reason };
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(bad(format!("length {} must be > 0", self.length)));
        }
        match self.kind {
            SegmentKind::Straight if self.curvature != 0.0 => {
                Err(bad("straight segment with non-zero curvature".into()))
            }
            SegmentKind::Arc if !(self.curvature.is_finite() && self.curvature != 0.0) => {
                Err(bad(format!("arc curvature {} must be non-zero", self.curvature)))
            }
            _ if self.curvature.abs() >= MAX_CURVATURE => Err(bad(format!(
                "|curvature| {} must be below {MAX_CURVATURE}",
                self.curvature.abs()
            ))),
            _ if self.curvature.abs() * self.length >= TAU => Err(bad("arc sweeps a full turn or more".into())),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose2 {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self { x, y, heading }
    }
}

/// Near-point lateral error and far-point heading error.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PerceptionErrors {
    /// Lateral error (m); positive when the lane centre is to the left.
    pub e_y: f64,
    /// Heading error (rad) in (−π, π].
    pub e_theta: f64,
}

/// Result of projecting a point onto the path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// Arc length of the foot point. Outside `[0, length]` when the point lies
    /// beyond either end, in which case the end tangent is extended.
    pub s: f64,
    /// Signed lateral offset, positive left of the path tangent.
    pub offset: f64,
    /// Path tangent heading at the foot point.
    pub heading: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadPath {
    segments: Vec<RoadSegment>,
    starts: Vec<f64>,
    start_poses: Vec<Pose2>,
    end_pose: Pose2,
    total: f64,
}

impl RoadPath {
    pub fn build(segments: Vec<RoadSegment>, origin: Pose2) -> Result<Self, RoadError> {
        if segments.is_empty() {
            return Err(RoadError::EmptyCourse);
        }
        ParamError::require_finite("origin.x", origin.x)?;
        ParamError::require_finite("origin.y", origin.y)?;
        ParamError::require_finite("origin.heading", origin.heading)?;
        for (i, seg) in segments.iter().enumerate() {
            seg.validate(i)?;
        }
        let mut starts = Vec::with_capacity(segments.len());
        let mut start_poses = Vec::with_capacity(segments.len());
        let mut s = 0.0;
        let mut pose = origin;
        for seg in &segments {
            starts.push(s);
            start_poses.push(pose);
            pose = advance(pose, seg, seg.length);
            s += seg.length;
        }
        Ok(Self {
            segments,
            starts,
            start_poses,
            end_pose: pose,
            total: s,
        })
    }

    pub fn segments(&self) -> &[RoadSegment] {
        &self.segments
    }

    pub fn origin(&self) -> Pose2 {
        self.start_poses[0]
    }

    pub fn total_length(&self) -> f64 {
        self.total
    }

    /// Arc-length interval `[start, end)` of segment `index`.
    pub fn segment_span(&self, index: usize) -> (f64, f64) {
        let start = self.starts[index];
        (start, start + self.segments[index].length)
    }

    /// Position and tangent heading at arc length `s`; beyond either end the
    /// terminal tangent line is followed.
    pub fn pose_at(&self, s: f64) -> Pose2 {
        if s <= 0.0 {
            let o = self.start_poses[0];
            return Pose2::new(o.x + s * o.heading.cos(), o.y + s * o.heading.sin(), o.heading);
        }
        if s >= self.total {
            let e = self.end_pose;
            let u = s - self.total;
            return Pose2::new(e.x + u * e.heading.cos(), e.y + u * e.heading.sin(), e.heading);
        }
        let idx = self.starts.partition_point(|&start| start <= s) - 1;
        advance(self.start_poses[idx], &self.segments[idx], s - self.starts[idx])
    }

    /// Nearest point on the path to `(x, y)`.
    pub fn project(&self, x: f64, y: f64) -> Result<Projection, RoadError> {
        // (s, distance, is a true perpendicular foot)
        let mut candidates: Vec<(f64, f64, bool)> = Vec::with_capacity(self.segments.len() + 2);
        for (i, seg) in self.segments.iter().enumerate() {
            let (u, perpendicular) = local_foot(self.start_poses[i], seg, x, y);
            candidates.push((self.starts[i] + u, 0.0, perpendicular));
        }
        // Tangent extensions before the start and past the end.
        let o = self.start_poses[0];
        let before = (x - o.x) * o.heading.cos() + (y - o.y) * o.heading.sin();
        if before < 0.0 {
            candidates.push((before, 0.0, true));
        }
        let e = self.end_pose;
        let after = (x - e.x) * e.heading.cos() + (y - e.y) * e.heading.sin();
        if after > 0.0 {
            candidates.push((self.total + after, 0.0, true));
        }
        for c in &mut candidates {
            let p = self.pose_at(c.0);
            c.1 = (x - p.x).hypot(y - p.y);
        }

        let (best_s, best_dist, _) = candidates
            .iter()
            .copied()
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)))
            .expect("at least one segment");
        if best_dist > MAX_PROJECTION_DISTANCE {
            return Err(RoadError::TooFarFromPath {
                distance: best_dist,
                limit: MAX_PROJECTION_DISTANCE,
            });
        }
        // Clamped segment ends are never local minima of their own, so only
        // perpendicular feet can produce a genuine tie.
        let is_tie = |&&(s, d, perpendicular): &&(f64, f64, bool)| {
            perpendicular && (d - best_dist).abs() <= TIE_TOLERANCE && (s - best_s).abs() > TIE_TOLERANCE
        };
        let best_is_foot = candidates
            .iter()
            .any(|&(s, d, perpendicular)| perpendicular && s == best_s && d == best_dist);
        if let Some(&(tied, _, _)) = candidates.iter().find(is_tie).filter(|_| best_is_foot) {
            return Err(RoadError::AmbiguousProjection { s: tied.min(best_s) });
        }
        let foot = self.pose_at(best_s);
        let offset = foot.heading.cos() * (y - foot.y) - foot.heading.sin() * (x - foot.x);
        Ok(Projection {
            s: best_s,
            offset,
            heading: foot.heading,
        })
    }

    /// Near/far-point errors for a vehicle at `pose` whose CG moves along the
    /// course angle `pose.heading + beta`. Preview distances are `v·t_near`
    /// and `v·t_far`.
    pub fn perception_errors(
        &self,
        pose: Pose2,
        beta: f64,
        v: f64,
        t_near: f64,
        t_far: f64,
    ) -> Result<PerceptionErrors, RoadError> {
        if !(t_near > 0.0) {
            return Err(ParamError::new("t_near", t_near, "must be > 0").into());
        }
        if !(t_far >= t_near) {
            return Err(ParamError::new("t_far", t_far, "must be >= t_near").into());
        }
        let course = pose.heading + beta;
        let (sin_c, cos_c) = course.sin_cos();
        let d_near = v * t_near;
        let d_far = v * t_far;
        let near = self.project(pose.x + d_near * cos_c, pose.y + d_near * sin_c)?;
        let far = self.project(pose.x + d_far * cos_c, pose.y + d_far * sin_c)?;
        Ok(PerceptionErrors {
            e_y: -near.offset,
            e_theta: wrap_angle(far.heading - course),
        })
    }
}

/// Straight 1000 m, left 90° arc of radius 300 m, straight 500 m, right 90°
/// arc of radius 300 m, straight 500 m.
pub fn default_course() -> RoadPath {
    RoadPath::build(default_segments(), Pose2::default()).expect("default course is valid")
}

pub fn default_segments() -> Vec<RoadSegment> {
    vec![
        RoadSegment::straight(1000.0),
        RoadSegment::arc(300.0, 90.0),
        RoadSegment::straight(500.0),
        RoadSegment::arc(300.0, -90.0),
        RoadSegment::straight(500.0),
    ]
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

fn advance(start: Pose2, seg: &RoadSegment, u: f64) -> Pose2 {
    let h0 = start.heading;
    match seg.kind {
        SegmentKind::Straight => Pose2::new(start.x + u * h0.cos(), start.y + u * h0.sin(), h0),
        SegmentKind::Arc => {
            let k = seg.curvature;
            let h = h0 + k * u;
            Pose2::new(
                start.x + (h.sin() - h0.sin()) / k,
                start.y - (h.cos() - h0.cos()) / k,
                h,
            )
        }
    }
}

/// Local arc length of the nearest point within one segment, clamped to the
/// segment, and whether it is a true perpendicular foot.
fn local_foot(start: Pose2, seg: &RoadSegment, x: f64, y: f64) -> (f64, bool) {
    let (sin_h, cos_h) = start.heading.sin_cos();
    match seg.kind {
        SegmentKind::Straight => {
            let u = (x - start.x) * cos_h + (y - start.y) * sin_h;
            (u.clamp(0.0, seg.length), (0.0..=seg.length).contains(&u))
        }
        SegmentKind::Arc => {
            let k = seg.curvature;
            let cx = start.x - sin_h / k;
            let cy = start.y + cos_h / k;
            let (wx, wy) = (x - cx, y - cy);
            if wx.hypot(wy) == 0.0 {
                // Every point of the arc is equally near the centre.
                return (0.0, true);
            }
            let start_angle = (start.y - cy).atan2(start.x - cx);
            let swept = (k.signum() * (wy.atan2(wx) - start_angle)).rem_euclid(TAU);
            let sweep = k.abs() * seg.length;
            if swept <= sweep {
                (swept / k.abs(), true)
            } else if swept - sweep < TAU - swept {
                (seg.length, false)
            } else {
                (0.0, false)
            }
        }
    }
}
