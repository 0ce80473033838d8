//! Closed-loop simulation of a driver sharing steering control with a haptic
//! guidance system, and grey-box identification of the driver model from
//! logged data.
//!
//! Modules follow the signal flow: [`road`] geometry feeds the [`driver`]
//! and [`guidance`] controllers, whose torques act on the [`plant`]; the
//! [`simulator`] closes the loop and [`ident`] fits driver parameters to
//! recorded runs.

// `!(x > 0.0)` checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod driver;
pub mod error;
pub mod guidance;
pub mod ident;
pub mod io;
pub mod plant;
pub mod road;
pub mod simulator;
pub mod subjects;

pub use driver::{DriverParams, DriverState, DriverStateSpace};
pub use error::{ConfigError, IdentError, MetricsError, ParamError, RoadError, SimError};
pub use guidance::{GuidanceParams, GuidanceState};
pub use plant::{SteeringParams, SteeringState, VehicleParams, VehicleState};
pub use road::{PerceptionErrors, Pose2, RoadPath, RoadSegment};
pub use simulator::{FailureSpec, LogRow, Metrics, Reliance, Scenario, SimLog};
