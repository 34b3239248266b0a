//! Dataset loading, annotation aggregation, metrics and the batch harness.

mod harness;
pub mod metrics;
mod wtr;

pub use harness::{
    evaluate_pipeline, evaluate_processed, process_records, training_set, AggregatorMetrics,
    BreakdownRow, EvalConfig, EvaluationBundle, IrrelevantFraction, Processed, RecordSummary,
    RecordVerdict, RelevanceCorrelation, BREAKDOWN_SUBSETS, BUNDLE_FORMAT, BUNDLE_VERSION,
};
pub use metrics::{
    classification_metrics, fleiss_kappa, pearson_r, roc_auc, Averages, ClassMetrics,
    MetricsError, MetricsReport,
};
pub use wtr::{
    crowd_label, load_wtr, majority_vote, map_author_label, read_wtr, vote_counts, write_wtr,
    AuthorLabel, CrowdExclusion, EvidenceAnnotation, SetAnnotation, Task, Vote, WtrDataset,
    WtrError, WtrRecord, WTR_FORMAT, WTR_VERSION,
};
