//! Census ingestion, corpus generation, splitting, and evaluation items.

mod census;
pub mod corpus;
pub mod export;
pub mod items;
pub mod prompts;
mod split;
mod tasks;

pub use census::{ingest_census, is_alternating, planned_count, CensusError, CensusIngest, LineError, Prototype, RcRow};
pub use corpus::{generate, pd_digest, Corpus, GenerateConfig, GenerateError, ManifestRecord};
pub use items::{build_all, build_items, counts_with, ItemBuild, ItemConfig, Lockfile, Pool, Shortfall};
pub use prompts::{render_prompt, template_digest, Prompt};
pub use split::{make_split, Split, SplitAssignment, UnknownPrototype};
pub use tasks::{AnswerKind, EvalItem, Modality, Stratum, TaskId, UnknownTask};
