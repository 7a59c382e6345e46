//! Simulator and policy contracts, episode execution, solution evaluation.
//!
//! Everything in this module is deterministic by contract: resetting a
//! simulator with the same input and seed and replaying the same action
//! sequence yields the same trajectory, field by field. Campaign runners
//! and metrics rely on that property.

use std::fmt::Write as _;

use rand::RngCore;
use thiserror::Error;

/// Identifies one of the built-in environments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnvId {
    Taxi,
    Lander,
    Walker,
}

impl EnvId {
    pub fn name(self) -> &'static str {
        match self {
            EnvId::Taxi => "taxi",
            EnvId::Lander => "lander",
            EnvId::Walker => "walker",
        }
    }

    pub fn parse(s: &str) -> Option<EnvId> {
        match s {
            "taxi" => Some(EnvId::Taxi),
            "lander" => Some(EnvId::Lander),
            "walker" => Some(EnvId::Walker),
            _ => None,
        }
    }
}

/// Input-space descriptor: the shape of the simulator parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSpace {
    /// Real-valued vector with inclusive per-dimension bounds.
    Real { bounds: Vec<(f64, f64)> },
    /// Integer-valued vector with inclusive per-dimension ranges.
    Integer { ranges: Vec<(i64, i64)> },
}

impl InputSpace {
    pub fn dim(&self) -> usize {
        match self {
            InputSpace::Real { bounds } => bounds.len(),
            InputSpace::Integer { ranges } => ranges.len(),
        }
    }

    /// Checks length and per-dimension bounds. Integer spaces additionally
    /// require integral values.
    pub fn contains(&self, values: &[f64]) -> bool {
        match self {
            InputSpace::Real { bounds } => {
                values.len() == bounds.len()
                    && values
                        .iter()
                        .zip(bounds)
                        .all(|(v, (lo, hi))| v.is_finite() && *v >= *lo && *v <= *hi)
            }
            InputSpace::Integer { ranges } => {
                values.len() == ranges.len()
                    && values.iter().zip(ranges).all(|(v, (lo, hi))| {
                        v.is_finite() && v.fract() == 0.0 && *v >= *lo as f64 && *v <= *hi as f64
                    })
            }
        }
    }
}

/// A point of the search space: one simulator parameter vector.
///
/// Integer-valued environments store exact integers in the `f64` slots, so
/// equality on the raw bits is exact-input equality for every environment.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionInput {
    pub env: EnvId,
    pub values: Vec<f64>,
}

impl SolutionInput {
    pub fn new(env: EnvId, values: Vec<f64>) -> Self {
        SolutionInput { env, values }
    }

    /// Hashable exact-equality key (used to deduplicate faults).
    pub fn dedup_key(&self) -> (EnvId, Vec<u64>) {
        (self.env, self.values.iter().map(|v| v.to_bits()).collect())
    }
}

/// Action-space descriptor.
#[derive(Debug, Clone, PartialEq)]
pub enum ActionSpace {
    /// `n` discrete actions, numbered `0..n`.
    Discrete(usize),
    /// Continuous vector with inclusive per-dimension bounds.
    Continuous { bounds: Vec<(f64, f64)> },
}

impl ActionSpace {
    pub fn contains(&self, action: &Action) -> bool {
        match (self, action) {
            (ActionSpace::Discrete(n), Action::Discrete(a)) => a < n,
            (ActionSpace::Continuous { bounds }, Action::Continuous(v)) => {
                v.len() == bounds.len()
                    && v.iter()
                        .zip(bounds)
                        .all(|(x, (lo, hi))| x.is_finite() && *x >= *lo && *x <= *hi)
            }
            _ => false,
        }
    }
}

/// A single action emitted by a policy.
#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Discrete(usize),
    Continuous(Vec<f64>),
}

/// How an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Goal,
    Fault,
    StepLimit,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Goal => "goal",
            Termination::Fault => "fault",
            Termination::StepLimit => "step-limit",
        }
    }
}

/// Status returned by one simulator step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    Running,
    Goal,
    Fault,
}

/// Result of one simulator step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub status: StepStatus,
}

/// Environment-specific mutation operator knobs; each environment reads the
/// fields that apply to it.
#[derive(Debug, Clone, PartialEq)]
pub struct MutationParams {
    /// Standard deviation of the Gaussian perturbation (lander).
    pub lander_sigma: f64,
    /// Geometric-distribution parameter for the mutated-slot count (walker).
    pub walker_resample_p: f64,
}

impl Default for MutationParams {
    fn default() -> Self {
        MutationParams {
            lander_sigma: 50.0,
            walker_resample_p: 0.5,
        }
    }
}

/// Deterministic MDP simulator contract.
///
/// Implementations own their episode state. `reset` installs an initial
/// condition derived from a [`SolutionInput`] and a seed; `step` advances
/// the episode and refuses to run past a terminal state. Identical
/// `(input, seed, action sequence)` triples produce identical outputs.
pub trait Mdp {
    fn env_id(&self) -> EnvId;
    fn observation_dim(&self) -> usize;
    fn action_space(&self) -> ActionSpace;
    fn input_space(&self) -> InputSpace;
    fn max_episode_steps(&self) -> usize;

    /// Starts a new episode. Returns the initial observation.
    fn reset(&mut self, input: &SolutionInput, seed: u64) -> Result<Vec<f64>, EpisodeError>;

    /// Advances the episode by one action.
    fn step(&mut self, action: &Action) -> Result<StepOutcome, EpisodeError>;

    /// Draws one input uniformly from the (valid) input space.
    fn sample_input(&self, rng: &mut dyn RngCore) -> SolutionInput;

    /// Environment-specific mutation operator (clips into the valid space).
    fn mutate_input(
        &self,
        input: &SolutionInput,
        params: &MutationParams,
        rng: &mut dyn RngCore,
    ) -> SolutionInput;
}

/// Deterministic policy under test: a pure function from observation to
/// action.
pub trait Policy {
    fn act(&self, observation: &[f64]) -> Action;
}

/// One complete episode record.
///
/// Invariant: `states.len() == actions.len() + 1 == rewards.len() + 1`, and
/// the final state is the last element of `states`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<Vec<f64>>,
    pub actions: Vec<Action>,
    pub rewards: Vec<f64>,
    pub terminated_by: Termination,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory has at least the initial state")
    }

    /// Line-oriented text form used by golden-trace regression tests: one
    /// step per line (`state | action | reward`), then the final state.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# trajectory v1 steps={} terminated={}",
            self.len(),
            self.terminated_by.name()
        );
        for (i, action) in self.actions.iter().enumerate() {
            let state = fmt_vec(&self.states[i]);
            let act = match action {
                Action::Discrete(a) => a.to_string(),
                Action::Continuous(v) => fmt_vec(v),
            };
            let _ = writeln!(out, "{state} | {act} | {}", fmt_f64(self.rewards[i]));
        }
        let _ = writeln!(out, "final: {}", fmt_vec(self.final_state()));
        out
    }
}

/// Deterministic decimal rendering, nine digits after the point. `-0.0` is
/// normalized so reruns produce identical bytes.
pub fn fmt_f64(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.9}")
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| fmt_f64(*x)).collect();
    parts.join(" ")
}

/// Behaviour descriptor extractors. Which one applies is fixed per
/// environment (walker descriptors come in configurable pairs).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Descriptor {
    /// Lander: horizontal position and vertical velocity at first ground
    /// contact (last observed values if the craft leaves the viewport).
    LanderTouchdown,
    /// Taxi: steps until pickup, then steps from pickup to episode end.
    TaxiPickupDropoff,
    /// Walker: a pair of per-step features averaged over the state sequence.
    WalkerPair(WalkerFeature, WalkerFeature),
}

/// Per-step walker features available as behaviour descriptors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkerFeature {
    Distance,
    HullAngle,
    Torque,
    Jump,
    HipAngle,
    HipSpeed,
}

/// A named, bounded two-dimensional behaviour space.
#[derive(Debug, Clone, PartialEq)]
pub struct BehaviorSpace {
    pub name: String,
    pub env: EnvId,
    /// Per-dimension `(lower, upper)` with `lower < upper`.
    pub bounds: [(f64, f64); 2],
    pub descriptor: Descriptor,
}

impl BehaviorSpace {
    pub fn new(
        name: &str,
        env: EnvId,
        bounds: [(f64, f64); 2],
        descriptor: Descriptor,
    ) -> Self {
        assert!(bounds.iter().all(|(lo, hi)| lo < hi), "behaviour bounds must be ordered");
        BehaviorSpace {
            name: name.to_string(),
            env,
            bounds,
            descriptor,
        }
    }

    pub fn clip(&self, b: [f64; 2]) -> [f64; 2] {
        [
            b[0].clamp(self.bounds[0].0, self.bounds[0].1),
            b[1].clamp(self.bounds[1].0, self.bounds[1].1),
        ]
    }
}

/// The triple recorded for every evaluated solution, plus the final state.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub input: SolutionInput,
    pub behavior: [f64; 2],
    pub fitness: f64,
    /// `true` means the episode triggered the environment's fault oracle.
    pub oracle: bool,
    pub final_state: Vec<f64>,
}

/// Episode-level errors. An in-MDP "illegal action" is an oracle matter and
/// is *not* an error; these are contract violations around the simulator.
#[derive(Debug, Error)]
pub enum EpisodeError {
    #[error("rejected input for {env}: {reason}")]
    RejectedInput { env: &'static str, reason: String },
    #[error("policy emitted an out-of-range action at step {step}")]
    ContractViolation { step: usize },
    #[error("step called after the episode terminated")]
    EpisodeOver,
    #[error("gamma must lie in (0, 1], got {0}")]
    BadGamma(f64),
}

/// Runs one full episode: reset, then act greedily with `policy` until a
/// terminal state or the step limit.
pub fn run_episode(
    mdp: &mut dyn Mdp,
    policy: &dyn Policy,
    input: &SolutionInput,
    seed: u64,
) -> Result<Trajectory, EpisodeError> {
    let action_space = mdp.action_space();
    let max_steps = mdp.max_episode_steps();
    let first = mdp.reset(input, seed)?;

    let mut states = Vec::with_capacity(16);
    let mut actions = Vec::with_capacity(16);
    let mut rewards = Vec::with_capacity(16);
    states.push(first);

    loop {
        let action = policy.act(states.last().expect("non-empty"));
        if !action_space.contains(&action) {
            return Err(EpisodeError::ContractViolation { step: actions.len() });
        }
        let out = mdp.step(&action)?;
        actions.push(action);
        rewards.push(out.reward);
        states.push(out.observation);

        let terminated_by = match out.status {
            StepStatus::Goal => Some(Termination::Goal),
            StepStatus::Fault => Some(Termination::Fault),
            StepStatus::Running if actions.len() >= max_steps => Some(Termination::StepLimit),
            StepStatus::Running => None,
        };
        if let Some(terminated_by) = terminated_by {
            return Ok(Trajectory {
                states,
                actions,
                rewards,
                terminated_by,
            });
        }
    }
}

/// Evaluates one solution: runs the episode and characterises it with the
/// behaviour descriptor, the undiscounted reward sum as fitness, and the
/// fault-oracle verdict.
pub fn evaluate(
    mdp: &mut dyn Mdp,
    policy: &dyn Policy,
    input: &SolutionInput,
    bspace: &BehaviorSpace,
    seed: u64,
) -> Result<EvalResult, EpisodeError> {
    let trajectory = run_episode(mdp, policy, input, seed)?;
    let fitness: f64 = trajectory.rewards.iter().sum();
    debug_assert!(fitness.is_finite(), "environments must emit finite rewards");
    let behavior = crate::envs::extract_behavior(bspace, &trajectory);
    let oracle = trajectory.terminated_by == Termination::Fault;
    Ok(EvalResult {
        input: input.clone(),
        behavior,
        fitness,
        oracle,
        final_state: trajectory.final_state().to_vec(),
    })
}

/// Discounted return `sum_t gamma^(t-1) r_t`; `gamma = 1` is the plain sum
/// used as fitness.
pub fn discounted_return(trajectory: &Trajectory, gamma: f64) -> Result<f64, EpisodeError> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(EpisodeError::BadGamma(gamma));
    }
    let mut acc = 0.0;
    let mut weight = 1.0;
    for r in &trajectory.rewards {
        acc += weight * r;
        weight *= gamma;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(rewards: Vec<f64>) -> Trajectory {
        let n = rewards.len();
        Trajectory {
            states: vec![vec![0.0]; n + 1],
            actions: vec![Action::Discrete(0); n],
            rewards,
            terminated_by: Termination::StepLimit,
        }
    }

    #[test]
    fn discounted_return_half_gamma() {
        let t = traj(vec![1.0, 1.0, 1.0]);
        assert_eq!(discounted_return(&t, 0.5).unwrap(), 1.75);
    }

    #[test]
    fn discounted_return_empty_is_zero() {
        let t = traj(vec![]);
        assert_eq!(discounted_return(&t, 0.3).unwrap(), 0.0);
        assert_eq!(discounted_return(&t, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn discounted_return_gamma_one_is_plain_sum() {
        let t = traj(vec![-1.0, -1.0, 20.0]);
        assert_eq!(discounted_return(&t, 1.0).unwrap(), 18.0);
    }

    #[test]
    fn discounted_return_rejects_bad_gamma() {
        let t = traj(vec![1.0]);
        assert!(matches!(discounted_return(&t, 0.0), Err(EpisodeError::BadGamma(_))));
        assert!(matches!(discounted_return(&t, 1.5), Err(EpisodeError::BadGamma(_))));
        assert!(matches!(discounted_return(&t, -0.2), Err(EpisodeError::BadGamma(_))));
    }

    #[test]
    fn fmt_f64_normalizes_negative_zero() {
        assert_eq!(fmt_f64(-0.0), "0.000000000");
        assert_eq!(fmt_f64(1.5), "1.500000000");
    }

    #[test]
    fn input_space_contains_checks_integrality() {
        let space = InputSpace::Integer { ranges: vec![(0, 5), (0, 5)] };
        assert!(space.contains(&[3.0, 5.0]));
        assert!(!space.contains(&[3.5, 5.0]));
        assert!(!space.contains(&[6.0, 0.0]));
        assert!(!space.contains(&[3.0]));
    }

    #[test]
    fn trajectory_lines_roundtrip_shape() {
        let t = traj(vec![-1.0, 2.0]);
        let text = t.to_lines();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4); // header, two steps, final state
        assert!(lines[0].contains("steps=2"));
        assert!(lines[3].starts_with("final:"));
    }
}
