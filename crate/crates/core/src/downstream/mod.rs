//! Tasks that measure attack damage: clustering and classification on
//! embeddings, plus two community detectors that never see an embedding.

mod classify;
mod community;
mod kmeans;
mod metrics;

pub use classify::{loss_and_grad, stratified_split, train_logistic, LogisticConfig, LogisticModel};
pub use community::{em_communities, is_lpa_fixed_point, lpa, modularity, SpectralCommunities};
pub use kmeans::{kmeans, kmeans_run, KmeansRun};
pub use metrics::{f1_report, nmi, ClassScore, ClassificationReport};
