//! Pod placement and threshold autoscaling.

mod autoscaler;
mod scheduler;

pub use autoscaler::{autoscale_cycle, cooldown_elapsed, downscale_victim, ScaleDecision, ScalerState};
pub use scheduler::{NodeReservation, Placement, PlacementRules, Scheduler};
