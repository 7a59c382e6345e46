//! Novelty scores and the unstructured novelty archive.

/// Mean Euclidean distance from `candidate` to its `k` nearest points in
/// `references`. Fewer than `k` references average over all of them; an
/// empty reference set is maximally novel (`+inf`).
pub fn novelty_score(candidate: [f64; 2], references: &[[f64; 2]], k: usize) -> f64 {
    novelty_score_excluding(candidate, references, k, None)
}

/// Same as [`novelty_score`], but skips the reference at `exclude` — used
/// when the candidate itself is a member of the reference set.
pub fn novelty_score_excluding(
    candidate: [f64; 2],
    references: &[[f64; 2]],
    k: usize,
    exclude: Option<usize>,
) -> f64 {
    let mut distances: Vec<f64> = references
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(_, r)| {
            let dx = candidate[0] - r[0];
            let dy = candidate[1] - r[1];
            (dx * dx + dy * dy).sqrt()
        })
        .collect();
    if distances.is_empty() {
        return f64::INFINITY;
    }
    distances.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    let k = k.min(distances.len());
    distances[..k].iter().sum::<f64>() / k as f64
}

/// Unstructured container of behaviour descriptors. A behaviour is appended
/// only if its novelty score at insertion time exceeded the threshold.
#[derive(Debug, Clone)]
pub struct NoveltyArchive {
    behaviors: Vec<[f64; 2]>,
    threshold: f64,
    k: usize,
}

impl NoveltyArchive {
    pub fn new(threshold: f64, k: usize) -> NoveltyArchive {
        NoveltyArchive {
            behaviors: Vec::new(),
            threshold,
            k,
        }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn behaviors(&self) -> &[[f64; 2]] {
        &self.behaviors
    }

    pub fn len(&self) -> usize {
        self.behaviors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.behaviors.is_empty()
    }

    /// Unconditional append; the insertion decision (score vs threshold) is
    /// made by the search loop, which scores against archive and population
    /// together.
    pub fn push(&mut self, behavior: [f64; 2]) {
        self.behaviors.push(behavior);
    }
}
