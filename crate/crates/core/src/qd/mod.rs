//! Quality-diversity campaign runners and containers.

pub mod archive;
pub mod campaign;
pub mod map_elites;
pub mod novelty;
pub mod novelty_search;

pub use archive::{AddOutcome, Elite, GridArchive, GridGeom};
pub use campaign::{
    default_novelty_threshold, faults_from_log, CampaignConfig, CampaignError, CampaignLog,
    CampaignSeeds, CsvError, EvalRecord, Method,
};
pub use map_elites::map_elites_run;
pub use novelty::{novelty_score, novelty_score_excluding, NoveltyArchive};
pub use novelty_search::novelty_search_run;
