//! Comparison baselines: random testing and a GMM-guided fuzzer.

pub mod gmm;
pub mod mdpfuzz;
pub mod random_testing;

pub use gmm::{gmm_fit, gmm_loglik, GmmError, GmmFit, GmmModel};
pub use mdpfuzz::{mdpfuzz_run, MdpFuzzOutcome, SeedEntry, SeedPool};
pub use random_testing::random_testing_run;
