//! Point-mass lander with orientation on a flat terrain with a centred pad.
//!
//! The craft starts at the top centre of the viewport; the solution input is
//! the initial force `(fx, fy)` in `[-1000, 1000]^2`, converted to an initial
//! velocity. Four discrete actions: do nothing, fire the left orientation
//! engine, fire the main engine, fire the right orientation engine.
//!
//! Faults: ground contact with `|vy|` above the crash threshold, `|angle|`
//! above the tip-over threshold, contact outside the pad, or leaving the
//! viewport. Gentle pad contact is the goal.

use rand::Rng;
use rand::RngCore;

use crate::mdp::{
    Action, ActionSpace, EnvId, EpisodeError, InputSpace, Mdp, MutationParams, SolutionInput,
    StepOutcome, StepStatus,
};

/// Observation layout: `[x, y, vx, vy, angle, angular velocity]`.
pub const OBS_X: usize = 0;
pub const OBS_Y: usize = 1;
pub const OBS_VX: usize = 2;
pub const OBS_VY: usize = 3;
pub const OBS_ANGLE: usize = 4;
pub const OBS_ANGULAR_VEL: usize = 5;
pub const OBS_DIM: usize = 6;

pub const ACTION_NOOP: usize = 0;
pub const ACTION_LEFT_ENGINE: usize = 1;
pub const ACTION_MAIN_ENGINE: usize = 2;
pub const ACTION_RIGHT_ENGINE: usize = 3;
pub const N_ACTIONS: usize = 4;

pub const GRAVITY: f64 = 9.8;
pub const DT: f64 = 0.02;
pub const START_X: f64 = 0.0;
pub const START_Y: f64 = 12.0;
/// Initial force -> initial velocity conversion.
pub const FORCE_TO_VELOCITY: f64 = 0.0072;
pub const MAIN_ACCEL: f64 = 18.0;
pub const SIDE_ANGULAR_ACCEL: f64 = 5.0;
pub const SIDE_LATERAL_ACCEL: f64 = 1.5;
pub const CRASH_SPEED: f64 = 4.0;
pub const TIP_ANGLE: f64 = 0.8;
pub const VIEWPORT_X: f64 = 10.0;
pub const VIEWPORT_Y: f64 = 14.0;
pub const PAD_HALF_WIDTH: f64 = 1.0;
pub const INPUT_BOUND: f64 = 1000.0;
const GOAL_REWARD: f64 = 100.0;
const FAULT_REWARD: f64 = -100.0;
const MAX_EPISODE_STEPS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LanderState {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub angle: f64,
    pub angular_vel: f64,
}

impl LanderState {
    fn observation(&self) -> Vec<f64> {
        vec![self.x, self.y, self.vx, self.vy, self.angle, self.angular_vel]
    }

    /// Potential used for reward shaping: distance to the pad centre plus
    /// speed magnitude. The shaping reward is its per-step decrease, so
    /// moving closer and slowing down both pay.
    fn potential(&self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
            + (self.vx * self.vx + self.vy * self.vy).sqrt()
    }
}

pub struct LanderWorld {
    state: Option<LanderState>,
    terminal: bool,
}

impl LanderWorld {
    pub fn new() -> LanderWorld {
        LanderWorld {
            state: None,
            terminal: false,
        }
    }

    #[cfg(test)]
    pub(crate) fn set_state_for_test(&mut self, state: LanderState) {
        self.state = Some(state);
        self.terminal = false;
    }
}

impl Default for LanderWorld {
    fn default() -> Self {
        LanderWorld::new()
    }
}

impl Mdp for LanderWorld {
    fn env_id(&self) -> EnvId {
        EnvId::Lander
    }

    fn observation_dim(&self) -> usize {
        OBS_DIM
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Discrete(N_ACTIONS)
    }

    fn input_space(&self) -> InputSpace {
        InputSpace::Real {
            bounds: vec![(-INPUT_BOUND, INPUT_BOUND), (-INPUT_BOUND, INPUT_BOUND)],
        }
    }

    fn max_episode_steps(&self) -> usize {
        MAX_EPISODE_STEPS
    }

    fn reset(&mut self, input: &SolutionInput, _seed: u64) -> Result<Vec<f64>, EpisodeError> {
        if input.env != EnvId::Lander || !self.input_space().contains(&input.values) {
            return Err(EpisodeError::RejectedInput {
                env: "lander",
                reason: format!("values {:?} outside [-1000, 1000]^2", input.values),
            });
        }
        let state = LanderState {
            x: START_X,
            y: START_Y,
            vx: input.values[0] * FORCE_TO_VELOCITY,
            vy: input.values[1] * FORCE_TO_VELOCITY,
            angle: 0.0,
            angular_vel: 0.0,
        };
        self.state = Some(state);
        self.terminal = false;
        Ok(state.observation())
    }

    fn step(&mut self, action: &Action) -> Result<StepOutcome, EpisodeError> {
        if self.terminal || self.state.is_none() {
            return Err(EpisodeError::EpisodeOver);
        }
        let a = match action {
            Action::Discrete(a) => *a,
            Action::Continuous(_) => unreachable!("action validated by the action space"),
        };
        let mut s = self.state.unwrap();
        let before = s.potential();

        let (sin, cos) = (s.angle.sin(), s.angle.cos());
        let mut ax = 0.0;
        let mut ay = -GRAVITY;
        let mut angular_acc = 0.0;
        match a {
            ACTION_MAIN_ENGINE => {
                ax += MAIN_ACCEL * -sin;
                ay += MAIN_ACCEL * cos;
            }
            ACTION_LEFT_ENGINE => {
                angular_acc += SIDE_ANGULAR_ACCEL;
                ax += SIDE_LATERAL_ACCEL * cos;
                ay += SIDE_LATERAL_ACCEL * sin;
            }
            ACTION_RIGHT_ENGINE => {
                angular_acc -= SIDE_ANGULAR_ACCEL;
                ax -= SIDE_LATERAL_ACCEL * cos;
                ay -= SIDE_LATERAL_ACCEL * sin;
            }
            _ => {}
        }

        // semi-implicit Euler: integrate velocities first
        s.angular_vel += angular_acc * DT;
        s.angle += s.angular_vel * DT;
        s.vx += ax * DT;
        s.vy += ay * DT;
        s.x += s.vx * DT;
        s.y += s.vy * DT;

        let mut reward = before - s.potential();
        let status = if s.y <= 0.0 {
            let gentle = s.vy.abs() <= CRASH_SPEED
                && s.angle.abs() <= TIP_ANGLE
                && s.x.abs() <= PAD_HALF_WIDTH;
            if gentle {
                reward += GOAL_REWARD;
                StepStatus::Goal
            } else {
                reward += FAULT_REWARD;
                StepStatus::Fault
            }
        } else if s.x.abs() > VIEWPORT_X || s.y > VIEWPORT_Y {
            reward += FAULT_REWARD;
            StepStatus::Fault
        } else {
            StepStatus::Running
        };

        self.state = Some(s);
        if status != StepStatus::Running {
            self.terminal = true;
        }
        Ok(StepOutcome {
            observation: s.observation(),
            reward,
            status,
        })
    }

    fn sample_input(&self, rng: &mut dyn RngCore) -> SolutionInput {
        let fx = rng.gen_range(-INPUT_BOUND..=INPUT_BOUND);
        let fy = rng.gen_range(-INPUT_BOUND..=INPUT_BOUND);
        SolutionInput::new(EnvId::Lander, vec![fx, fy])
    }

    /// Adds Gaussian noise (sigma from the mutation parameters) to both
    /// components and clips into the input bounds.
    fn mutate_input(
        &self,
        input: &SolutionInput,
        params: &MutationParams,
        rng: &mut dyn RngCore,
    ) -> SolutionInput {
        let values = input
            .values
            .iter()
            .map(|v| {
                (v + params.lander_sigma * standard_normal(rng))
                    .clamp(-INPUT_BOUND, INPUT_BOUND)
            })
            .collect();
        SolutionInput::new(EnvId::Lander, values)
    }
}

/// Box-Muller standard normal draw (two uniforms per sample).
fn standard_normal(rng: &mut dyn RngCore) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
