//! Motion-budget and collision-clearance feasibility.

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::geom::CameraView;
use crate::policy::CaptureState;

/// 4 mph in meters per second: the assumed constant drone speed.
pub const MPS_PER_4_MPH: f64 = 1.78816;

/// When the acquisition loop stops and which moves are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminationCriteria {
    /// Total capture budget, counting the two initial base views.
    pub max_captures: Option<usize>,
    /// Motion-time budget in seconds.
    pub time_budget: Option<f64>,
    /// Constant travel speed in meters per second.
    pub speed: f64,
    /// Required straight-line clearance from the reconstruction in meters.
    pub min_clearance: Option<f64>,
}

impl Default for TerminationCriteria {
    fn default() -> Self {
        TerminationCriteria {
            max_captures: Some(10),
            time_budget: None,
            speed: MPS_PER_4_MPH,
            min_clearance: None,
        }
    }
}

impl TerminationCriteria {
    pub fn validate(&self) -> Result<()> {
        if self.max_captures.is_none() && self.time_budget.is_none() {
            return Err(Error::Parameter(
                "at least one of max_captures / time_budget must be set".into(),
            ));
        }
        if !(self.speed > 0.0) {
            return Err(Error::Parameter(format!("speed {} must be > 0", self.speed)));
        }
        if let Some(c) = self.min_clearance {
            if !(c > 0.0) {
                return Err(Error::Parameter(format!("clearance {c} must be > 0")));
            }
        }
        Ok(())
    }
}

/// Exact distance from point `p` to the segment `[a, b]`.
pub fn segment_point_distance(a: &Point3<f64>, b: &Point3<f64>, p: &Point3<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 <= 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (a + ab * t - p).norm()
}

/// A candidate move is feasible iff the remaining time budget covers the
/// straight-line hop and the whole segment keeps `min_clearance` from every
/// reconstruction point. An empty reconstruction constrains nothing.
pub fn feasible(state: &CaptureState, cam_q: &CameraView, term: &TerminationCriteria) -> bool {
    let target = cam_q.position();
    if let Some(budget) = term.time_budget {
        let hop = (target - state.agent_position).norm();
        if state.path_length + hop > term.speed * budget {
            return false;
        }
    }
    if let Some(clearance) = term.min_clearance {
        let from = state.agent_position;
        for p in &state.reconstruction.points {
            if segment_point_distance(&from, &target, p) < clearance {
                return false;
            }
        }
    }
    true
}
