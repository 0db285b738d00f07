//! Configuration, manifests, synthetic corpora and the end-to-end run.

pub mod assess;
pub mod config;
pub mod manifest;
pub mod synthetic;

pub use assess::{run_assessment, Assessment, CaseResult, Version};
pub use config::RunConfig;
pub use manifest::{read_manifest, CaseManifestEntry};
pub use synthetic::{generate_synthetic, SyntheticSpec, TextureKind};
