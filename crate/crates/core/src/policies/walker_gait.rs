//! Phase-based gait controller for the walker with an obstacle-response
//! mode keyed on the upcoming obstacle type: jump over pits, brace (slow,
//! crouched) for stumps, slow down over steps.

use crate::envs::walker::{
    OBSTACLE_PIT, OBSTACLE_STEPS, OBSTACLE_STUMP, OBS_CONTACT1, OBS_CONTACT2, OBS_NEXT_DIST,
    OBS_NEXT_TYPE, OBS_PHASE,
};
use crate::mdp::{Action, Policy};

const GAIT_AMPLITUDE: f64 = 0.9;
const GLIDE_COMMAND: f64 = 0.3;
const JUMP_TRIGGER_DIST: f64 = 1.0;
const STUMP_BRACE_DIST: f64 = 1.5;
const STUMP_BRACE_SCALE: f64 = 0.45;
const STUMP_CROUCH: f64 = -0.3;
const STEPS_SLOW_DIST: f64 = 2.0;
const STEPS_SLOW_SCALE: f64 = 0.6;
const STEPS_CROUCH: f64 = -0.2;

#[derive(Debug, Clone, Copy, Default)]
pub struct WalkerGait;

impl WalkerGait {
    pub fn new() -> WalkerGait {
        WalkerGait
    }
}

impl Policy for WalkerGait {
    fn act(&self, observation: &[f64]) -> Action {
        let grounded = observation[OBS_CONTACT1] + observation[OBS_CONTACT2] > 0.0;
        if !grounded {
            return Action::Continuous(vec![GLIDE_COMMAND, GLIDE_COMMAND]);
        }
        let next_type = observation[OBS_NEXT_TYPE] as u8;
        let next_dist = observation[OBS_NEXT_DIST];

        if next_type == OBSTACLE_PIT && next_dist <= JUMP_TRIGGER_DIST {
            return Action::Continuous(vec![1.0, 1.0]);
        }
        let (scale, crouch) = match next_type {
            OBSTACLE_STUMP if next_dist <= STUMP_BRACE_DIST => (STUMP_BRACE_SCALE, STUMP_CROUCH),
            OBSTACLE_STEPS if next_dist <= STEPS_SLOW_DIST => (STEPS_SLOW_SCALE, STEPS_CROUCH),
            _ => (1.0, 0.0),
        };
        let swing = GAIT_AMPLITUDE * scale * (std::f64::consts::TAU * observation[OBS_PHASE]).sin();
        Action::Continuous(vec![
            (crouch + swing).clamp(-1.0, 1.0),
            (crouch - swing).clamp(-1.0, 1.0),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::walker::{N_SLOTS, OBS_DIM};
    use crate::envs::WalkerWorld;
    use crate::mdp::{run_episode, EnvId, Mdp, SolutionInput, Termination};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn flat_obs(phase: f64) -> Vec<f64> {
        let mut obs = vec![0.0; OBS_DIM];
        obs[OBS_CONTACT1] = 1.0;
        obs[OBS_CONTACT2] = 1.0;
        obs[OBS_PHASE] = phase;
        obs[OBS_NEXT_DIST] = 10.0;
        obs
    }

    #[test]
    fn same_phase_yields_same_action() {
        let gait = WalkerGait::new();
        for phase in [0.0, 0.1, 0.37, 0.52, 0.9] {
            assert_eq!(gait.act(&flat_obs(phase)), gait.act(&flat_obs(phase)));
        }
        assert_ne!(gait.act(&flat_obs(0.1)), gait.act(&flat_obs(0.4)));
    }

    #[test]
    fn reaches_the_goal_on_the_flat_course() {
        let mut world = WalkerWorld::new();
        let input = SolutionInput::new(EnvId::Walker, vec![0.0; N_SLOTS]);
        let t = run_episode(&mut world, &WalkerGait::new(), &input, 0).unwrap();
        assert_eq!(t.terminated_by, Termination::Goal);
    }

    #[test]
    fn some_random_courses_trigger_faults() {
        let mut world = WalkerWorld::new();
        let gait = WalkerGait::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut faults = 0;
        for _ in 0..1000 {
            let input = world.sample_input(&mut rng);
            let t = run_episode(&mut world, &gait, &input, 0).unwrap();
            if t.terminated_by == Termination::Fault {
                faults += 1;
            }
        }
        assert!(faults >= 1, "the controller must be imperfect, found no faults");
    }
}
