//! The three deterministic environments and their behaviour spaces.
//!
//! Each environment implements [`crate::mdp::Mdp`] with a fixed world layout,
//! a fault oracle, a uniform input sampler and a mutation operator. Behaviour
//! descriptors are registered by name per environment; lookup failures are
//! configuration errors.

pub mod lander;
pub mod taxi;
pub mod walker;

use thiserror::Error;

use crate::mdp::{BehaviorSpace, Descriptor, EnvId, Trajectory, WalkerFeature};

pub use lander::LanderWorld;
pub use taxi::{TaxiMap, TaxiMapError, TaxiWorld};
pub use walker::WalkerWorld;

#[derive(Debug, Error)]
#[error("unknown behaviour space '{name}' for environment '{env}' (available: {available})")]
pub struct UnknownBehaviorSpace {
    pub env: &'static str,
    pub name: String,
    pub available: String,
}

/// Behaviour-space names registered for an environment; the first entry is
/// the default.
pub fn behavior_space_names(env: EnvId) -> &'static [&'static str] {
    match env {
        EnvId::Taxi => &["pickup_dropoff"],
        EnvId::Lander => &["touchdown"],
        EnvId::Walker => &[
            "distance_hull",
            "torque_jump",
            "hip_angle_speed",
            "distance_torque",
        ],
    }
}

/// Looks up a registered behaviour space by name.
pub fn behavior_space(env: EnvId, name: &str) -> Result<BehaviorSpace, UnknownBehaviorSpace> {
    let space = match (env, name) {
        (EnvId::Taxi, "pickup_dropoff") => BehaviorSpace::new(
            name,
            env,
            [(0.0, 400.0), (0.0, 400.0)],
            Descriptor::TaxiPickupDropoff,
        ),
        (EnvId::Lander, "touchdown") => BehaviorSpace::new(
            name,
            env,
            [(-10.0, 10.0), (-8.0, 0.0)],
            Descriptor::LanderTouchdown,
        ),
        (EnvId::Walker, "distance_hull") => walker_pair_space(
            name,
            WalkerFeature::Distance,
            WalkerFeature::HullAngle,
        ),
        (EnvId::Walker, "torque_jump") => {
            walker_pair_space(name, WalkerFeature::Torque, WalkerFeature::Jump)
        }
        (EnvId::Walker, "hip_angle_speed") => {
            walker_pair_space(name, WalkerFeature::HipAngle, WalkerFeature::HipSpeed)
        }
        (EnvId::Walker, "distance_torque") => {
            walker_pair_space(name, WalkerFeature::Distance, WalkerFeature::Torque)
        }
        _ => {
            return Err(UnknownBehaviorSpace {
                env: env.name(),
                name: name.to_string(),
                available: behavior_space_names(env).join(", "),
            })
        }
    };
    Ok(space)
}

pub fn default_behavior_space(env: EnvId) -> BehaviorSpace {
    behavior_space(env, behavior_space_names(env)[0]).expect("default space is registered")
}

fn walker_pair_space(name: &str, a: WalkerFeature, b: WalkerFeature) -> BehaviorSpace {
    BehaviorSpace::new(
        name,
        EnvId::Walker,
        [walker::feature_bounds(a), walker::feature_bounds(b)],
        Descriptor::WalkerPair(a, b),
    )
}

/// Applies the behaviour-descriptor extractor of `bspace` to a trajectory
/// produced by the matching environment. Outputs are clipped into the
/// declared bounds.
pub fn extract_behavior(bspace: &BehaviorSpace, trajectory: &Trajectory) -> [f64; 2] {
    let raw = match bspace.descriptor {
        Descriptor::TaxiPickupDropoff => taxi_pickup_dropoff(trajectory),
        Descriptor::LanderTouchdown => lander_touchdown(trajectory),
        Descriptor::WalkerPair(a, b) => [
            walker_feature_mean(trajectory, a),
            walker_feature_mean(trajectory, b),
        ],
    };
    bspace.clip(raw)
}

/// Steps until pickup and steps from pickup to episode end; a never-picked-up
/// passenger maps to (episode length, 0).
fn taxi_pickup_dropoff(trajectory: &Trajectory) -> [f64; 2] {
    let len = trajectory.len() as f64;
    let in_taxi = taxi::PASSENGER_IN_TAXI as f64;
    match trajectory
        .states
        .iter()
        .position(|s| s[taxi::OBS_PASSENGER] == in_taxi)
    {
        Some(step) => [step as f64, len - step as f64],
        None => [len, 0.0],
    }
}

/// Horizontal position and vertical velocity at first ground contact. Ground
/// contact terminates the episode, so the first contact is the final state;
/// for viewport exits and step-limit episodes the last observed values apply,
/// which is the final state as well.
fn lander_touchdown(trajectory: &Trajectory) -> [f64; 2] {
    let s = trajectory.final_state();
    [s[lander::OBS_X], s[lander::OBS_VY]]
}

fn walker_feature_mean(trajectory: &Trajectory, feature: WalkerFeature) -> f64 {
    let n = trajectory.states.len() as f64;
    let sum: f64 = trajectory
        .states
        .iter()
        .map(|s| walker::feature_value(s, feature))
        .sum();
    sum / n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{Action, Termination};

    fn taxi_traj(states: Vec<Vec<f64>>) -> Trajectory {
        let n = states.len() - 1;
        Trajectory {
            states,
            actions: vec![Action::Discrete(0); n],
            rewards: vec![-1.0; n],
            terminated_by: Termination::Goal,
        }
    }

    #[test]
    fn taxi_behavior_counts_pickup_and_dropoff_steps() {
        // pickup at step 7, episode ends at step 19 -> (7, 12)
        let mut states = Vec::new();
        for i in 0..=19 {
            let passenger = if i >= 7 { 6.0 } else { 2.0 };
            states.push(vec![0.0, 0.0, passenger, 3.0]);
        }
        let bspace = behavior_space(EnvId::Taxi, "pickup_dropoff").unwrap();
        let b = extract_behavior(&bspace, &taxi_traj(states));
        assert_eq!(b, [7.0, 12.0]);
    }

    #[test]
    fn taxi_behavior_without_pickup_is_length_zero() {
        let states = vec![vec![0.0, 0.0, 2.0, 3.0]; 11];
        let bspace = behavior_space(EnvId::Taxi, "pickup_dropoff").unwrap();
        let b = extract_behavior(&bspace, &taxi_traj(states));
        assert_eq!(b, [10.0, 0.0]);
    }

    #[test]
    fn walker_constant_hull_angle_is_its_own_mean() {
        let mut state = vec![0.0; walker::OBS_DIM];
        state[walker::OBS_HULL_ANGLE] = 0.1;
        state[walker::OBS_DIST_TO_GOAL] = 40.0;
        let states = vec![state; 9];
        let t = Trajectory {
            states,
            actions: vec![Action::Continuous(vec![0.0, 0.0]); 8],
            rewards: vec![0.0; 8],
            terminated_by: Termination::StepLimit,
        };
        let bspace = behavior_space(EnvId::Walker, "distance_hull").unwrap();
        let b = extract_behavior(&bspace, &t);
        assert!((b[1] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn unknown_space_is_a_configuration_error() {
        let err = behavior_space(EnvId::Lander, "nope").unwrap_err();
        assert!(err.to_string().contains("lander"));
        assert!(err.to_string().contains("touchdown"));
    }

    #[test]
    fn every_registered_space_resolves() {
        for env in [EnvId::Taxi, EnvId::Lander, EnvId::Walker] {
            for name in behavior_space_names(env) {
                let space = behavior_space(env, name).unwrap();
                assert!(space.bounds.iter().all(|(lo, hi)| lo < hi));
            }
        }
    }
}
