//! Structured MAP-Elites container: a regular grid over the behaviour space
//! where each cell holds at most one elite. Fitness is minimised, so a
//! candidate replaces the incumbent only with strictly lower fitness.

use crate::mdp::{BehaviorSpace, EvalResult, SolutionInput};

/// Grid geometry shared by the elite archive and the metrics result grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridGeom {
    pub bounds: [(f64, f64); 2],
    pub resolution: [usize; 2],
}

impl GridGeom {
    pub fn new(bounds: [(f64, f64); 2], resolution: usize) -> GridGeom {
        assert!(resolution >= 1);
        assert!(bounds.iter().all(|(lo, hi)| lo < hi));
        GridGeom {
            bounds,
            resolution: [resolution, resolution],
        }
    }

    pub fn from_space(space: &BehaviorSpace, resolution: usize) -> GridGeom {
        GridGeom::new(space.bounds, resolution)
    }

    pub fn cells(&self) -> usize {
        self.resolution[0] * self.resolution[1]
    }

    /// Bin index per dimension: `floor((b - lo) / (hi - lo) * res)`, clamped
    /// into `[0, res - 1]` so boundary and out-of-range behaviours land in
    /// the edge bins.
    pub fn bin_index(&self, behavior: [f64; 2]) -> (usize, usize) {
        let bin = |d: usize| -> usize {
            let (lo, hi) = self.bounds[d];
            let res = self.resolution[d];
            let scaled = (behavior[d] - lo) / (hi - lo) * res as f64;
            if scaled < 0.0 {
                0
            } else {
                (scaled.floor() as usize).min(res - 1)
            }
        };
        (bin(0), bin(1))
    }

    pub fn flat_index(&self, behavior: [f64; 2]) -> usize {
        let (i, j) = self.bin_index(behavior);
        i * self.resolution[1] + j
    }
}

/// The best (lowest-fitness) solution seen so far in one niche.
#[derive(Debug, Clone, PartialEq)]
pub struct Elite {
    pub input: SolutionInput,
    pub behavior: [f64; 2],
    pub fitness: f64,
    pub oracle: bool,
    /// 1-based evaluation index at which this elite was stored.
    pub discovery_index: usize,
}

/// What happened when a candidate was submitted to the archive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddOutcome {
    InsertedNew,
    ReplacedElite,
    Rejected,
}

#[derive(Debug, Clone)]
pub struct GridArchive {
    geom: GridGeom,
    cells: Vec<Option<Elite>>,
    /// Flat indices of occupied cells in insertion order; parents are drawn
    /// uniformly from this list.
    occupied: Vec<usize>,
}

impl GridArchive {
    pub fn new(geom: GridGeom) -> GridArchive {
        let cells = vec![None; geom.cells()];
        GridArchive {
            geom,
            cells,
            occupied: Vec::new(),
        }
    }

    pub fn geom(&self) -> &GridGeom {
        &self.geom
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    pub fn cell(&self, flat_index: usize) -> Option<&Elite> {
        self.cells[flat_index].as_ref()
    }

    /// Occupied cells in discovery order.
    pub fn elites(&self) -> impl Iterator<Item = &Elite> {
        self.occupied
            .iter()
            .map(move |&i| self.cells[i].as_ref().expect("occupied cell"))
    }

    /// Uniform parent pick over the current elites (discovery order is the
    /// stable enumeration; index supplied by the caller's RNG).
    pub fn elite_by_rank(&self, rank: usize) -> &Elite {
        let flat = self.occupied[rank];
        self.cells[flat].as_ref().expect("occupied cell")
    }

    /// Local competition: empty target cell inserts, strictly lower fitness
    /// replaces, ties keep the incumbent.
    pub fn attempt_add(&mut self, result: &EvalResult, discovery_index: usize) -> AddOutcome {
        let flat = self.geom.flat_index(result.behavior);
        match &self.cells[flat] {
            None => {
                self.cells[flat] = Some(Elite {
                    input: result.input.clone(),
                    behavior: result.behavior,
                    fitness: result.fitness,
                    oracle: result.oracle,
                    discovery_index,
                });
                self.occupied.push(flat);
                AddOutcome::InsertedNew
            }
            Some(elite) if result.fitness < elite.fitness => {
                self.cells[flat] = Some(Elite {
                    input: result.input.clone(),
                    behavior: result.behavior,
                    fitness: result.fitness,
                    oracle: result.oracle,
                    discovery_index,
                });
                AddOutcome::ReplacedElite
            }
            Some(_) => AddOutcome::Rejected,
        }
    }
}
