//! Stylized two-hip bipedal walker crossing a 15-slot obstacle course.
//!
//! The solution input assigns each slot one of `{0 flat, 1 pit, 2 steps,
//! 3 stump}`. Kinematics are deliberately coarse: an alternating hip gait
//! drives the hull forward, obstacles inject stability shocks into the hull
//! angle, and the episode faults when the hull tips past the fall threshold
//! (the body hits the ground). Pits must be cleared with a jump pattern
//! (both hip commands high while grounded); a jump attempted while the hull
//! is already staggering fails and the walker stumbles into the hazard.
//!
//! Every single-obstacle course is passable by the reference gait controller;
//! faults arise from shock accumulation across obstacle combinations.

use rand::Rng;
use rand::RngCore;

use crate::mdp::{
    Action, ActionSpace, EnvId, EpisodeError, InputSpace, Mdp, MutationParams, SolutionInput,
    StepOutcome, StepStatus, WalkerFeature,
};

/// Observation layout.
pub const OBS_DIST_TO_GOAL: usize = 0;
pub const OBS_HULL_ANGLE: usize = 1;
pub const OBS_HIP1_ANGLE: usize = 2;
pub const OBS_HIP2_ANGLE: usize = 3;
pub const OBS_HIP1_SPEED: usize = 4;
pub const OBS_HIP2_SPEED: usize = 5;
pub const OBS_CONTACT1: usize = 6;
pub const OBS_CONTACT2: usize = 7;
pub const OBS_PHASE: usize = 8;
pub const OBS_NEXT_TYPE: usize = 9;
pub const OBS_NEXT_DIST: usize = 10;
pub const OBS_TORQUE: usize = 11;
pub const OBS_DIM: usize = 12;

pub const OBSTACLE_FLAT: u8 = 0;
pub const OBSTACLE_PIT: u8 = 1;
pub const OBSTACLE_STEPS: u8 = 2;
pub const OBSTACLE_STUMP: u8 = 3;

pub const N_SLOTS: usize = 15;
pub const SLOT_SPACING: f64 = 5.0;
pub const FIRST_SLOT_X: f64 = 6.0;
pub const GOAL_X: f64 = 80.0;

const DT: f64 = 0.05;
const MAX_EPISODE_STEPS: usize = 2000;

const HIP_V_MAX: f64 = 3.0;
const HIP_BLEND: f64 = 0.5;
const HIP_LEAK: f64 = 1.0;
const HIP_CLAMP: f64 = 1.2;
const TOP_SPEED: f64 = 3.0;
const PHASE_RATE: f64 = 1.25;

/// Hull-angle recovery per step (multiplicative decay toward upright).
const ANGLE_RECOVERY: f64 = 0.005;
const FALL_ANGLE: f64 = 0.5;

const PIT_HALF_WIDTH: f64 = 0.8;
const PIT_SHOCK: f64 = 0.2;
const PIT_DRAG: f64 = 0.3;

const STUMP_TRIGGER: f64 = 0.3;
const STUMP_SHOCK: f64 = 0.36;
const SHOCK_SPEED_FLOOR: f64 = 0.35;

const STEPS_HALF_WIDTH: f64 = 1.0;
const STEPS_SHOCK: f64 = 0.02;

const AIR_STEPS: usize = 16;
const AIR_SPEED: f64 = 2.5;
const JUMP_COMMAND: f64 = 0.95;
const JUMP_STABLE_LIMIT: f64 = 0.24;
const STUMBLE_SHOCK: f64 = 0.15;
const STUMBLE_LURCH: f64 = 0.3;

const TORQUE_COST: f64 = 0.02;

#[derive(Debug, Clone)]
struct WalkerState {
    x: f64,
    hull_angle: f64,
    hip: [f64; 2],
    hip_v: [f64; 2],
    phase: f64,
    airborne_left: usize,
    torque_last: f64,
    stump_done: [bool; N_SLOTS],
}

pub struct WalkerWorld {
    course: [u8; N_SLOTS],
    state: Option<WalkerState>,
    terminal: bool,
}

pub fn slot_center(slot: usize) -> f64 {
    FIRST_SLOT_X + SLOT_SPACING * slot as f64
}

impl WalkerWorld {
    pub fn new() -> WalkerWorld {
        WalkerWorld {
            course: [OBSTACLE_FLAT; N_SLOTS],
            state: None,
            terminal: false,
        }
    }

    #[cfg(test)]
    pub(crate) fn force_hull_angle(&mut self, angle: f64) {
        if let Some(s) = self.state.as_mut() {
            s.hull_angle = angle;
        }
    }

    /// Nearest still-relevant non-flat slot: `(type, center - x)`, or
    /// `(0, 10.0)` when none remains ahead.
    fn next_obstacle(&self, x: f64) -> (u8, f64) {
        for (slot, &kind) in self.course.iter().enumerate() {
            if kind == OBSTACLE_FLAT {
                continue;
            }
            let offset = slot_center(slot) - x;
            if offset > -1.0 {
                return (kind, offset.min(10.0));
            }
        }
        (OBSTACLE_FLAT, 10.0)
    }

    fn observation(&self, s: &WalkerState) -> Vec<f64> {
        let (next_type, next_dist) = self.next_obstacle(s.x);
        let airborne = s.airborne_left > 0;
        let (c1, c2) = if airborne {
            (0.0, 0.0)
        } else {
            let sin = (std::f64::consts::TAU * s.phase).sin();
            ((sin <= 0.15) as u8 as f64, (sin >= -0.15) as u8 as f64)
        };
        vec![
            (GOAL_X - s.x).max(0.0),
            s.hull_angle,
            s.hip[0],
            s.hip[1],
            s.hip_v[0],
            s.hip_v[1],
            c1,
            c2,
            s.phase,
            next_type as f64,
            next_dist,
            s.torque_last,
        ]
    }
}

impl Default for WalkerWorld {
    fn default() -> Self {
        WalkerWorld::new()
    }
}

impl Mdp for WalkerWorld {
    fn env_id(&self) -> EnvId {
        EnvId::Walker
    }

    fn observation_dim(&self) -> usize {
        OBS_DIM
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Continuous {
            bounds: vec![(-1.0, 1.0), (-1.0, 1.0)],
        }
    }

    fn input_space(&self) -> InputSpace {
        InputSpace::Integer {
            ranges: vec![(0, 3); N_SLOTS],
        }
    }

    fn max_episode_steps(&self) -> usize {
        MAX_EPISODE_STEPS
    }

    fn reset(&mut self, input: &SolutionInput, _seed: u64) -> Result<Vec<f64>, EpisodeError> {
        if input.env != EnvId::Walker || !self.input_space().contains(&input.values) {
            return Err(EpisodeError::RejectedInput {
                env: "walker",
                reason: format!("values {:?} are not a 15-vector over 0..=3", input.values),
            });
        }
        for (slot, v) in input.values.iter().enumerate() {
            self.course[slot] = *v as u8;
        }
        self.state = Some(WalkerState {
            x: 0.0,
            hull_angle: 0.0,
            hip: [0.0; 2],
            hip_v: [0.0; 2],
            phase: 0.0,
            airborne_left: 0,
            torque_last: 0.0,
            stump_done: [false; N_SLOTS],
        });
        self.terminal = false;
        Ok(self.observation(self.state.as_ref().unwrap()))
    }

    fn step(&mut self, action: &Action) -> Result<StepOutcome, EpisodeError> {
        if self.terminal || self.state.is_none() {
            return Err(EpisodeError::EpisodeOver);
        }
        let (c1, c2) = match action {
            Action::Continuous(v) if v.len() == 2 => (v[0], v[1]),
            _ => unreachable!("action validated by the action space"),
        };
        let mut s = self.state.take().unwrap();
        let x_before = s.x;
        s.torque_last = c1.abs() + c2.abs();

        if s.airborne_left > 0 {
            s.airborne_left -= 1;
            s.x += AIR_SPEED * DT;
        } else {
            let wants_jump = c1 >= JUMP_COMMAND && c2 >= JUMP_COMMAND;
            if wants_jump && s.hull_angle.abs() <= JUMP_STABLE_LIMIT {
                // launch: this step is the first of the flight
                s.airborne_left = AIR_STEPS - 1;
                s.x += AIR_SPEED * DT;
            } else if wants_jump {
                // too unstable to launch: stumble forward into the hazard
                s.hull_angle += STUMBLE_SHOCK;
                s.x += STUMBLE_LURCH;
                self.ground_shocks(&mut s, x_before, 0.0);
            } else {
                for i in 0..2 {
                    let cmd = if i == 0 { c1 } else { c2 };
                    let target = cmd.clamp(-1.0, 1.0) * HIP_V_MAX;
                    s.hip_v[i] += (target - s.hip_v[i]) * HIP_BLEND;
                    s.hip[i] = (s.hip[i] + (s.hip_v[i] - HIP_LEAK * s.hip[i]) * DT)
                        .clamp(-HIP_CLAMP, HIP_CLAMP);
                }
                let mut speed = TOP_SPEED * (s.hip_v[0] - s.hip_v[1]).abs() / (2.0 * HIP_V_MAX);
                if self.in_pit_window(x_before) {
                    speed *= PIT_DRAG;
                }
                s.x += speed * DT;
                s.phase = (s.phase + PHASE_RATE * DT).fract();
                self.ground_shocks(&mut s, x_before, speed);
            }
        }

        s.hull_angle *= 1.0 - ANGLE_RECOVERY;

        let status = if s.hull_angle.abs() > FALL_ANGLE {
            StepStatus::Fault
        } else if s.x >= GOAL_X {
            StepStatus::Goal
        } else {
            StepStatus::Running
        };
        let reward = (s.x - x_before) - TORQUE_COST * s.torque_last;
        let observation = self.observation(&s);
        self.state = Some(s);
        if status != StepStatus::Running {
            self.terminal = true;
        }
        Ok(StepOutcome {
            observation,
            reward,
            status,
        })
    }

    fn sample_input(&self, rng: &mut dyn RngCore) -> SolutionInput {
        let values = (0..N_SLOTS).map(|_| rng.gen_range(0..=3) as f64).collect();
        SolutionInput::new(EnvId::Walker, values)
    }

    /// Changes a random nonempty subset of slots, each redrawn uniformly
    /// among the three *other* obstacle types, so every mutation changes at
    /// least one value. The subset size is geometric (`walker_resample_p`)
    /// capped at 15.
    fn mutate_input(
        &self,
        input: &SolutionInput,
        params: &MutationParams,
        rng: &mut dyn RngCore,
    ) -> SolutionInput {
        let mut size = 1usize;
        while size < N_SLOTS && rng.gen::<f64>() < params.walker_resample_p {
            size += 1;
        }
        // partial Fisher-Yates for `size` distinct slot indices
        let mut slots: [usize; N_SLOTS] = std::array::from_fn(|i| i);
        for i in 0..size {
            let j = rng.gen_range(i..N_SLOTS);
            slots.swap(i, j);
        }
        let mut values = input.values.clone();
        for &slot in &slots[..size] {
            let old = values[slot] as u8;
            values[slot] = ((old + rng.gen_range(1..=3)) % 4) as f64;
        }
        SolutionInput::new(EnvId::Walker, values)
    }
}

impl WalkerWorld {
    fn in_pit_window(&self, x: f64) -> bool {
        self.course.iter().enumerate().any(|(slot, &kind)| {
            kind == OBSTACLE_PIT && (x - slot_center(slot)).abs() < PIT_HALF_WIDTH
        })
    }

    /// Obstacle effects on a grounded walker: pit shocks inside the window,
    /// one stump impulse per slot when its trigger line is crossed, small
    /// repeated shocks across a steps window. Shock sizes scale with the
    /// current speed, so stability hazards stack across close obstacle runs
    /// while any single braced obstacle stays harmless.
    fn ground_shocks(&self, s: &mut WalkerState, x_before: f64, speed: f64) {
        let speed_factor = SHOCK_SPEED_FLOOR + (1.0 - SHOCK_SPEED_FLOOR) * (speed / TOP_SPEED);
        for (slot, &kind) in self.course.iter().enumerate() {
            let center = slot_center(slot);
            match kind {
                OBSTACLE_PIT => {
                    if (s.x - center).abs() < PIT_HALF_WIDTH {
                        s.hull_angle += PIT_SHOCK;
                    }
                }
                OBSTACLE_STUMP => {
                    let trigger = center - STUMP_TRIGGER;
                    if !s.stump_done[slot] && s.x >= trigger {
                        s.stump_done[slot] = true;
                        if x_before < trigger {
                            s.hull_angle += STUMP_SHOCK * speed_factor;
                        }
                    }
                }
                OBSTACLE_STEPS => {
                    if (s.x - center).abs() < STEPS_HALF_WIDTH {
                        let v = speed / TOP_SPEED;
                        s.hull_angle += STEPS_SHOCK * v * v;
                    }
                }
                _ => {}
            }
        }
    }
}

pub fn feature_value(observation: &[f64], feature: WalkerFeature) -> f64 {
    match feature {
        WalkerFeature::Distance => observation[OBS_DIST_TO_GOAL],
        WalkerFeature::HullAngle => observation[OBS_HULL_ANGLE],
        WalkerFeature::Torque => observation[OBS_TORQUE],
        WalkerFeature::Jump => {
            (1.0 - observation[OBS_CONTACT1]) * (1.0 - observation[OBS_CONTACT2])
        }
        WalkerFeature::HipAngle => (observation[OBS_HIP1_ANGLE] + observation[OBS_HIP2_ANGLE]) / 2.0,
        WalkerFeature::HipSpeed => {
            (observation[OBS_HIP1_SPEED].abs() + observation[OBS_HIP2_SPEED].abs()) / 2.0
        }
    }
}

/// Declared behaviour-descriptor bounds, chosen from reference-controller
/// telemetry over 1000 random courses (5th-95th percentile widened by 25%;
/// see the calibration test for the procedure).
pub fn feature_bounds(feature: WalkerFeature) -> (f64, f64) {
    match feature {
        WalkerFeature::Distance => (33.8, 57.1),
        WalkerFeature::HullAngle => (0.047, 0.212),
        WalkerFeature::Torque => (0.861, 1.010),
        WalkerFeature::Jump => (-0.008, 0.101),
        WalkerFeature::HipAngle => (-0.476, -0.132),
        WalkerFeature::HipSpeed => (1.170, 1.443),
    }
}
