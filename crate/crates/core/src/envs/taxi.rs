//! Grid-world taxi on a fixed 18x13 map with six landmarks.
//!
//! The map is a static, hand-authored layout shipped with the crate. Walls
//! sit on cell edges (plus the border); moving into one is a fault. Illegal
//! pickup and dropoff actions are faults too, and a fault ends the episode.
//!
//! Map glyphs: `+`/`-` border corners and rows, `|` a wall edge (border or
//! between two cells), `:` an open edge, a letter (`R G B Y C M`) a landmark
//! cell in landmark-index order, space a plain cell.

use rand::Rng;
use rand::RngCore;
use thiserror::Error;

use crate::mdp::{
    Action, ActionSpace, EnvId, EpisodeError, InputSpace, Mdp, MutationParams, SolutionInput,
    StepOutcome, StepStatus,
};

/// Observation layout: `[row, col, passenger location, destination]`.
pub const OBS_ROW: usize = 0;
pub const OBS_COL: usize = 1;
pub const OBS_PASSENGER: usize = 2;
pub const OBS_DESTINATION: usize = 3;
pub const OBS_DIM: usize = 4;

/// Passenger-location code meaning "in the taxi" (landmarks are `0..6`).
pub const PASSENGER_IN_TAXI: usize = N_LANDMARKS;
pub const N_LANDMARKS: usize = 6;
pub const N_ACTIONS: usize = 6;

pub const ACTION_NORTH: usize = 0;
pub const ACTION_SOUTH: usize = 1;
pub const ACTION_EAST: usize = 2;
pub const ACTION_WEST: usize = 3;
pub const ACTION_PICKUP: usize = 4;
pub const ACTION_DROPOFF: usize = 5;

const STEP_REWARD: f64 = -1.0;
const ILLEGAL_PENALTY: f64 = -10.0;
const DROPOFF_BONUS: f64 = 20.0;
const MAX_EPISODE_STEPS: usize = 400;

const LANDMARK_GLYPHS: [char; N_LANDMARKS] = ['R', 'G', 'B', 'Y', 'C', 'M'];
const DEFAULT_MAP: &str = include_str!("../../data/taxi_map_18x13.txt");

#[derive(Debug, Error)]
pub enum TaxiMapError {
    #[error("map line {line}, column {col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("map must contain exactly {expected} landmarks, found {found}")]
    LandmarkCount { expected: usize, found: usize },
    #[error("map is not fully connected: {reachable} of {cells} cells reachable")]
    Disconnected { reachable: usize, cells: usize },
}

/// The static world layout: dimensions, vertical edge walls between adjacent
/// cells, and the landmark cells in glyph order.
#[derive(Debug, Clone)]
pub struct TaxiMap {
    pub width: usize,
    pub height: usize,
    /// `wall_right[row * (width-1) + col]` blocks movement between
    /// `(row, col)` and `(row, col+1)`.
    wall_right: Vec<bool>,
    pub landmarks: Vec<(usize, usize)>,
    content_hash: u64,
}

impl TaxiMap {
    /// The layout shipped with the crate.
    pub fn builtin() -> TaxiMap {
        TaxiMap::parse(DEFAULT_MAP).expect("builtin map parses")
    }

    /// Parses the plain-text grid format. Errors carry line/column positions
    /// (both 1-based).
    pub fn parse(text: &str) -> Result<TaxiMap, TaxiMapError> {
        let err = |line: usize, col: usize, message: String| TaxiMapError::Parse {
            line,
            col,
            message,
        };
        let lines: Vec<&str> = text.lines().collect();
        if lines.len() < 3 {
            return Err(err(1, 1, "map needs a border and at least one row".into()));
        }
        let height = lines.len() - 2;
        let interior = lines[0].len().saturating_sub(2);
        if interior == 0 || interior % 2 == 0 {
            return Err(err(1, 1, "top border width does not fit `cell sep cell ...`".into()));
        }
        let width = (interior + 1) / 2;

        for (idx, border) in [(0, lines[0]), (lines.len() - 1, lines[lines.len() - 1])] {
            let ok = border.len() == interior + 2
                && border.starts_with('+')
                && border.ends_with('+')
                && border[1..border.len() - 1].chars().all(|c| c == '-');
            if !ok {
                return Err(err(idx + 1, 1, "border must be `+---...---+`".into()));
            }
        }

        let mut wall_right = vec![false; height * (width - 1)];
        let mut found: Vec<Option<(usize, usize)>> = vec![None; N_LANDMARKS];
        let mut n_found = 0usize;
        for (row, raw) in lines[1..=height].iter().enumerate() {
            let line_no = row + 2;
            let chars: Vec<char> = raw.chars().collect();
            if chars.len() != interior + 2 || chars[0] != '|' || chars[interior + 1] != '|' {
                return Err(err(
                    line_no,
                    1,
                    format!("row must be `|` + {interior} glyphs + `|`"),
                ));
            }
            for (i, &ch) in chars[1..=interior].iter().enumerate() {
                let col_no = i + 2;
                if i % 2 == 0 {
                    // cell glyph
                    let cell = (row, i / 2);
                    match ch {
                        ' ' => {}
                        c => match LANDMARK_GLYPHS.iter().position(|&g| g == c) {
                            Some(idx) => {
                                if found[idx].is_some() {
                                    return Err(err(
                                        line_no,
                                        col_no,
                                        format!("duplicate landmark glyph '{c}'"),
                                    ));
                                }
                                found[idx] = Some(cell);
                                n_found += 1;
                            }
                            None => {
                                return Err(err(
                                    line_no,
                                    col_no,
                                    format!("unknown cell glyph '{c}'"),
                                ))
                            }
                        },
                    }
                } else {
                    // edge glyph between cell i/2 and i/2 + 1
                    match ch {
                        ':' => {}
                        '|' => wall_right[row * (width - 1) + i / 2] = true,
                        c => {
                            return Err(err(
                                line_no,
                                col_no,
                                format!("unknown edge glyph '{c}' (expected ':' or '|')"),
                            ))
                        }
                    }
                }
            }
        }
        if n_found != N_LANDMARKS {
            return Err(TaxiMapError::LandmarkCount {
                expected: N_LANDMARKS,
                found: n_found,
            });
        }
        let map = TaxiMap {
            width,
            height,
            wall_right,
            landmarks: found.into_iter().map(|c| c.unwrap()).collect(),
            content_hash: fnv1a64(text.as_bytes()),
        };
        let reachable = map.reachable_cells();
        if reachable != map.width * map.height {
            return Err(TaxiMapError::Disconnected {
                reachable,
                cells: map.width * map.height,
            });
        }
        Ok(map)
    }

    /// FNV-1a hash of the map source text; persisted Q-tables are pinned to it.
    pub fn content_hash(&self) -> u64 {
        self.content_hash
    }

    /// Whether moving from `(row, col)` one step in `action` direction hits a
    /// wall (border included).
    pub fn blocked(&self, row: usize, col: usize, action: usize) -> bool {
        match action {
            ACTION_NORTH => row == 0,
            ACTION_SOUTH => row + 1 == self.height,
            ACTION_EAST => col + 1 == self.width || self.wall_right[row * (self.width - 1) + col],
            ACTION_WEST => col == 0 || self.wall_right[row * (self.width - 1) + col - 1],
            _ => false,
        }
    }

    fn reachable_cells(&self) -> usize {
        let mut seen = vec![false; self.width * self.height];
        let mut queue = vec![(0usize, 0usize)];
        seen[0] = true;
        let mut count = 1;
        while let Some((row, col)) = queue.pop() {
            for action in [ACTION_NORTH, ACTION_SOUTH, ACTION_EAST, ACTION_WEST] {
                if self.blocked(row, col, action) {
                    continue;
                }
                let (nr, nc) = neighbor(row, col, action);
                if !seen[nr * self.width + nc] {
                    seen[nr * self.width + nc] = true;
                    count += 1;
                    queue.push((nr, nc));
                }
            }
        }
        count
    }
}

fn neighbor(row: usize, col: usize, action: usize) -> (usize, usize) {
    match action {
        ACTION_NORTH => (row - 1, col),
        ACTION_SOUTH => (row + 1, col),
        ACTION_EAST => (row, col + 1),
        ACTION_WEST => (row, col - 1),
        _ => (row, col),
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Episode state: taxi cell, passenger location code and destination index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaxiState {
    pub row: usize,
    pub col: usize,
    /// `0..N_LANDMARKS` landmark index, or [`PASSENGER_IN_TAXI`].
    pub passenger: usize,
    pub destination: usize,
}

impl TaxiState {
    pub fn observation(&self) -> Vec<f64> {
        vec![
            self.row as f64,
            self.col as f64,
            self.passenger as f64,
            self.destination as f64,
        ]
    }
}

/// Pure transition function shared by the simulator and the Q-learning
/// trainer.
pub fn taxi_transition(
    map: &TaxiMap,
    state: TaxiState,
    action: usize,
) -> (TaxiState, f64, StepStatus) {
    let mut next = state;
    match action {
        ACTION_NORTH | ACTION_SOUTH | ACTION_EAST | ACTION_WEST => {
            if map.blocked(state.row, state.col, action) {
                return (next, STEP_REWARD + ILLEGAL_PENALTY, StepStatus::Fault);
            }
            let (nr, nc) = neighbor(state.row, state.col, action);
            next.row = nr;
            next.col = nc;
            (next, STEP_REWARD, StepStatus::Running)
        }
        ACTION_PICKUP => {
            let here = (state.row, state.col);
            let legal = state.passenger < N_LANDMARKS && map.landmarks[state.passenger] == here;
            if legal {
                next.passenger = PASSENGER_IN_TAXI;
                (next, STEP_REWARD, StepStatus::Running)
            } else {
                (next, STEP_REWARD + ILLEGAL_PENALTY, StepStatus::Fault)
            }
        }
        ACTION_DROPOFF => {
            let here = (state.row, state.col);
            let legal =
                state.passenger == PASSENGER_IN_TAXI && map.landmarks[state.destination] == here;
            if legal {
                next.passenger = state.destination;
                (next, STEP_REWARD + DROPOFF_BONUS, StepStatus::Goal)
            } else {
                (next, STEP_REWARD + ILLEGAL_PENALTY, StepStatus::Fault)
            }
        }
        _ => unreachable!("action validated by the action space"),
    }
}

/// The taxi simulator. Input: `(taxi row, taxi col, passenger landmark,
/// destination landmark)` with passenger != destination.
pub struct TaxiWorld {
    map: TaxiMap,
    state: Option<TaxiState>,
    terminal: bool,
}

impl TaxiWorld {
    pub fn new(map: TaxiMap) -> TaxiWorld {
        TaxiWorld {
            map,
            state: None,
            terminal: false,
        }
    }

    pub fn builtin() -> TaxiWorld {
        TaxiWorld::new(TaxiMap::builtin())
    }

    pub fn map(&self) -> &TaxiMap {
        &self.map
    }

    fn parse_input(&self, input: &SolutionInput) -> Result<TaxiState, EpisodeError> {
        let reject = |reason: String| EpisodeError::RejectedInput {
            env: "taxi",
            reason,
        };
        if input.env != EnvId::Taxi {
            return Err(reject(format!("input tagged for '{}'", input.env.name())));
        }
        if !self.input_space().contains(&input.values) {
            return Err(reject(format!(
                "values {:?} outside the input space",
                input.values
            )));
        }
        let state = TaxiState {
            row: input.values[0] as usize,
            col: input.values[1] as usize,
            passenger: input.values[2] as usize,
            destination: input.values[3] as usize,
        };
        if state.passenger == state.destination {
            return Err(reject("passenger and destination landmarks coincide".into()));
        }
        Ok(state)
    }
}

impl Mdp for TaxiWorld {
    fn env_id(&self) -> EnvId {
        EnvId::Taxi
    }

    fn observation_dim(&self) -> usize {
        OBS_DIM
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Discrete(N_ACTIONS)
    }

    fn input_space(&self) -> InputSpace {
        InputSpace::Integer {
            ranges: vec![
                (0, self.map.height as i64 - 1),
                (0, self.map.width as i64 - 1),
                (0, N_LANDMARKS as i64 - 1),
                (0, N_LANDMARKS as i64 - 1),
            ],
        }
    }

    fn max_episode_steps(&self) -> usize {
        MAX_EPISODE_STEPS
    }

    fn reset(&mut self, input: &SolutionInput, _seed: u64) -> Result<Vec<f64>, EpisodeError> {
        let state = self.parse_input(input)?;
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
        let (next, reward, status) = taxi_transition(&self.map, self.state.unwrap(), a);
        self.state = Some(next);
        if status != StepStatus::Running {
            self.terminal = true;
        }
        Ok(StepOutcome {
            observation: next.observation(),
            reward,
            status,
        })
    }

    fn sample_input(&self, rng: &mut dyn RngCore) -> SolutionInput {
        let row = rng.gen_range(0..self.map.height) as f64;
        let col = rng.gen_range(0..self.map.width) as f64;
        let passenger = rng.gen_range(0..N_LANDMARKS);
        let dest_raw = rng.gen_range(0..N_LANDMARKS - 1);
        let destination = if dest_raw >= passenger { dest_raw + 1 } else { dest_raw };
        SolutionInput::new(
            EnvId::Taxi,
            vec![row, col, passenger as f64, destination as f64],
        )
    }

    /// Increments or decrements one input component, clipped to its range;
    /// draws that would make passenger and destination coincide are redrawn.
    fn mutate_input(
        &self,
        input: &SolutionInput,
        _params: &MutationParams,
        rng: &mut dyn RngCore,
    ) -> SolutionInput {
        let maxima = [
            self.map.height as f64 - 1.0,
            self.map.width as f64 - 1.0,
            N_LANDMARKS as f64 - 1.0,
            N_LANDMARKS as f64 - 1.0,
        ];
        loop {
            let component = rng.gen_range(0..4);
            let delta = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let value = (input.values[component] + delta).clamp(0.0, maxima[component]);
            let mut values = input.values.clone();
            values[component] = value;
            if values[2] == values[3] {
                continue;
            }
            return SolutionInput::new(EnvId::Taxi, values);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{run_episode, Policy, Termination};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    struct Fixed(usize);
    impl Policy for Fixed {
        fn act(&self, _obs: &[f64]) -> Action {
            Action::Discrete(self.0)
        }
    }

    fn input(row: usize, col: usize, p: usize, d: usize) -> SolutionInput {
        SolutionInput::new(
            EnvId::Taxi,
            vec![row as f64, col as f64, p as f64, d as f64],
        )
    }

    #[test]
    fn builtin_map_has_expected_shape() {
        let map = TaxiMap::builtin();
        assert_eq!(map.width, 18);
        assert_eq!(map.height, 13);
        assert_eq!(map.landmarks.len(), 6);
        assert_eq!(map.reachable_cells(), 18 * 13);
    }

    #[test]
    fn parse_reports_line_and_column() {
        let bad = "+---+\n|R?G|\n+---+\n";
        match TaxiMap::parse(bad) {
            Err(TaxiMapError::Parse { line, col, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(col, 3);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn move_without_wall_costs_step_penalty() {
        let map = TaxiMap::builtin();
        let state = TaxiState { row: 5, col: 2, passenger: 0, destination: 1 };
        let (next, reward, status) = taxi_transition(&map, state, ACTION_NORTH);
        assert_eq!(next.row, 4);
        assert_eq!(reward, -1.0);
        assert_eq!(status, StepStatus::Running);
    }

    #[test]
    fn moving_into_border_wall_is_a_fault() {
        let map = TaxiMap::builtin();
        let state = TaxiState { row: 0, col: 5, passenger: 0, destination: 1 };
        let (next, reward, status) = taxi_transition(&map, state, ACTION_NORTH);
        assert_eq!(next, state);
        assert_eq!(reward, -11.0);
        assert_eq!(status, StepStatus::Fault);
    }

    #[test]
    fn dropoff_while_empty_is_a_fault() {
        let map = TaxiMap::builtin();
        let state = TaxiState { row: 3, col: 3, passenger: 2, destination: 0 };
        let (_, reward, status) = taxi_transition(&map, state, ACTION_DROPOFF);
        assert_eq!(status, StepStatus::Fault);
        assert_eq!(reward, -11.0);
    }

    #[test]
    fn pickup_away_from_passenger_is_a_fault() {
        let map = TaxiMap::builtin();
        // landmark 0 is at (0,0); the taxi is elsewhere
        let state = TaxiState { row: 4, col: 4, passenger: 0, destination: 1 };
        let (_, _, status) = taxi_transition(&map, state, ACTION_PICKUP);
        assert_eq!(status, StepStatus::Fault);
    }

    #[test]
    fn wall_collision_ends_episode_with_length_one() {
        // Taxi starts adjacent to the top border; the policy drives north.
        let mut world = TaxiWorld::builtin();
        let t = run_episode(&mut world, &Fixed(ACTION_NORTH), &input(0, 7, 0, 1), 0).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.terminated_by, Termination::Fault);
    }

    /// Breadth-first search over (cell, carrying) with pickup/dropoff edges;
    /// independent oracle for scripted-episode step counts.
    fn bfs_plan(map: &TaxiMap, start: TaxiState) -> Vec<usize> {
        use std::collections::VecDeque;
        let idx = |s: &TaxiState| {
            ((s.row * map.width + s.col) * (N_LANDMARKS + 1) + s.passenger) * N_LANDMARKS
                + s.destination
        };
        let n = map.width * map.height * (N_LANDMARKS + 1) * N_LANDMARKS;
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        seen[idx(&start)] = true;
        queue.push_back(start);
        while let Some(s) = queue.pop_front() {
            for a in 0..N_ACTIONS {
                let (next, _, status) = taxi_transition(map, s, a);
                if status == StepStatus::Fault {
                    continue;
                }
                if status == StepStatus::Goal {
                    // unwind
                    let mut actions = vec![a];
                    let mut cur = idx(&s);
                    while let Some((p, pa)) = prev[cur] {
                        actions.push(pa);
                        cur = p;
                    }
                    actions.reverse();
                    return actions;
                }
                if !seen[idx(&next)] {
                    seen[idx(&next)] = true;
                    prev[idx(&next)] = Some((idx(&s), a));
                    queue.push_back(next);
                }
            }
        }
        panic!("no plan found");
    }

    struct Scripted(std::cell::RefCell<std::vec::IntoIter<usize>>);
    impl Policy for Scripted {
        fn act(&self, _obs: &[f64]) -> Action {
            Action::Discrete(self.0.borrow_mut().next().expect("script long enough"))
        }
    }

    #[test]
    fn scripted_optimal_episode_scores_twenty_minus_steps() {
        let map = TaxiMap::builtin();
        let start = TaxiState { row: 2, col: 2, passenger: 0, destination: 3 };
        let plan = bfs_plan(&map, start);
        let steps = plan.len();
        let mut world = TaxiWorld::new(map);
        let policy = Scripted(std::cell::RefCell::new(plan.into_iter()));
        let t = run_episode(&mut world, &policy, &input(2, 2, 0, 3), 0).unwrap();
        assert_eq!(t.terminated_by, Termination::Goal);
        assert_eq!(t.len(), steps);
        let fitness: f64 = t.rewards.iter().sum();
        assert_eq!(fitness, 20.0 - steps as f64);
    }

    #[test]
    fn mutate_changes_one_component_by_one_on_interior_inputs() {
        let world = TaxiWorld::builtin();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        // interior input: taxi away from borders, |passenger - dest| >= 2
        let base = input(6, 8, 1, 4);
        for _ in 0..10_000 {
            let m = world.mutate_input(&base, &MutationParams::default(), &mut rng);
            let diffs: Vec<usize> = (0..4)
                .filter(|&i| m.values[i] != base.values[i])
                .collect();
            assert_eq!(diffs.len(), 1, "exactly one component changes: {m:?}");
            let i = diffs[0];
            assert_eq!((m.values[i] - base.values[i]).abs(), 1.0);
            assert_ne!(m.values[2], m.values[3]);
        }
    }

    #[test]
    fn mutate_clips_at_range_boundary() {
        let world = TaxiWorld::builtin();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = input(12, 17, 0, 5);
        for _ in 0..2_000 {
            let m = world.mutate_input(&base, &MutationParams::default(), &mut rng);
            assert!(world.input_space().contains(&m.values));
            assert!(m.values[1] <= 17.0);
        }
    }

    #[test]
    fn sampled_inputs_are_valid() {
        let world = TaxiWorld::builtin();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..5_000 {
            let s = world.sample_input(&mut rng);
            assert!(world.input_space().contains(&s.values));
            assert_ne!(s.values[2], s.values[3]);
        }
    }

    #[test]
    fn reset_rejects_coinciding_passenger_and_destination() {
        let mut world = TaxiWorld::builtin();
        let err = world.reset(&input(0, 0, 2, 2), 0).unwrap_err();
        assert!(matches!(err, EpisodeError::RejectedInput { .. }));
    }

    #[test]
    fn step_after_terminal_is_rejected() {
        let mut world = TaxiWorld::builtin();
        world.reset(&input(0, 7, 0, 1), 0).unwrap();
        world.step(&Action::Discrete(ACTION_NORTH)).unwrap(); // fault
        let err = world.step(&Action::Discrete(ACTION_SOUTH)).unwrap_err();
        assert!(matches!(err, EpisodeError::EpisodeOver));
    }
}
