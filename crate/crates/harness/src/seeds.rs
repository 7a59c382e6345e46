//! Deterministic campaign-seed derivation.
//!
//! Every RNG stream is keyed by a SHA-256 digest of labelled fields (joined
//! with a unit separator), truncated to the first eight little-endian bytes.
//! This is stable across platforms, Rust versions and process runs.
//!
//! Two streams are derived per campaign:
//! - the *initialisation* stream from `(master seed, method, seed index)` —
//!   deliberately independent of the behaviour space, so campaigns that
//!   differ only in behaviour space draw identical random-phase inputs;
//! - the *search* stream from `(master seed, method, seed index, behaviour
//!   space)`, which drives selection and mutation afterwards.

use qdtest_core::qd::{CampaignSeeds, Method};
use sha2::{Digest, Sha256};

fn h64(parts: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    for (i, p) in parts.iter().enumerate() {
        if i > 0 {
            hasher.update([0x1f]);
        }
        hasher.update(p.as_bytes());
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is long enough"))
}

pub fn derive_seeds(
    master_seed: u64,
    method: Method,
    seed_index: u64,
    behavior_space: &str,
) -> CampaignSeeds {
    let master = master_seed.to_string();
    let index = seed_index.to_string();
    CampaignSeeds {
        init: h64(&["init", &master, method.name(), &index]),
        search: h64(&["search", &master, method.name(), &index, behavior_space]),
    }
}
