//! Proportional controller for the lander: null the descent rate with the
//! main engine, null angle and lateral drift with the orientation engines.

use crate::envs::lander::{
    ACTION_LEFT_ENGINE, ACTION_MAIN_ENGINE, ACTION_NOOP, ACTION_RIGHT_ENGINE, OBS_ANGLE,
    OBS_ANGULAR_VEL, OBS_VX, OBS_VY, OBS_X, OBS_Y,
};
use crate::mdp::{Action, Policy};

/// Descent-speed envelope: allowed sink rate grows with altitude.
const SINK_BASE: f64 = 0.4;
const SINK_PER_ALTITUDE: f64 = 0.22;
/// Attitude target gains (tilt toward the pad) and control deadband.
const TILT_PER_X: f64 = 0.08;
const TILT_PER_VX: f64 = 0.16;
const TILT_LIMIT: f64 = 0.35;
const ANGULAR_DAMPING: f64 = 0.35;
const DEADBAND: f64 = 0.04;

#[derive(Debug, Clone, Copy, Default)]
pub struct LanderPilot;

impl LanderPilot {
    pub fn new() -> LanderPilot {
        LanderPilot
    }
}

impl Policy for LanderPilot {
    fn act(&self, observation: &[f64]) -> Action {
        let x = observation[OBS_X];
        let y = observation[OBS_Y];
        let vx = observation[OBS_VX];
        let vy = observation[OBS_VY];
        let angle = observation[OBS_ANGLE];
        let angular_vel = observation[OBS_ANGULAR_VEL];

        // braking has priority: fire the main engine when sinking faster
        // than the envelope allows
        let sink_limit = -(SINK_BASE + SINK_PER_ALTITUDE * y.max(0.0));
        if vy < sink_limit {
            return Action::Discrete(ACTION_MAIN_ENGINE);
        }

        let target = (TILT_PER_X * x + TILT_PER_VX * vx).clamp(-TILT_LIMIT, TILT_LIMIT);
        let control = (target - angle) - ANGULAR_DAMPING * angular_vel;
        if control > DEADBAND {
            Action::Discrete(ACTION_LEFT_ENGINE)
        } else if control < -DEADBAND {
            Action::Discrete(ACTION_RIGHT_ENGINE)
        } else {
            Action::Discrete(ACTION_NOOP)
        }
    }
}
