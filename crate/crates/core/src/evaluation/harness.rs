//! Batch evaluation of the pipeline over an annotated dataset.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::metrics::{classification_metrics, fleiss_kappa, pearson_r, roc_auc, MetricsReport};
use super::wtr::{crowd_label, vote_counts, AuthorLabel, CrowdExclusion, Task, WtrRecord};
use crate::backend::{call_relevance, Scorer};
use crate::kg::{AggregatorKind, Stance, VerdictReport};
use crate::pipeline::{run, PipelineConfig, PipelineRun};
use crate::retrieval::{Fetcher, RuleSegmenter};
use crate::selection::all_likely_irrelevant;
use crate::verification::{
    cross_val_predict, features_from_evidence, kfold_indices, AggregationModel, FeatureVector,
    ForestParams, StanceClassifier,
};

pub const BUNDLE_FORMAT: &str = "prove-evaluation";
pub const BUNDLE_VERSION: u32 = 1;

/// Author-label subsets reported in the per-support-type breakdown.
pub const BREAKDOWN_SUBSETS: [Option<AuthorLabel>; 4] = [
    Some(AuthorLabel::A1),
    Some(AuthorLabel::B1),
    Some(AuthorLabel::D1),
    None,
];

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub pipeline: PipelineConfig,
    pub folds: usize,
    pub seed: u64,
    pub forest: ForestParams,
    pub jobs: usize,
    pub tasks: Vec<Task>,
    /// Used for the classifier instead of cross-validation when present.
    pub model: Option<AggregationModel>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            pipeline: PipelineConfig::default(),
            folds: 5,
            seed: 0,
            forest: ForestParams::default(),
            jobs: 1,
            tasks: vec![Task::Ternary, Task::Binary],
            model: None,
        }
    }
}

/// Pipeline output for one record.
#[derive(Debug, Clone)]
pub struct Processed {
    pub run: PipelineRun,
    pub features: FeatureVector,
    pub weighted_sum: VerdictReport,
    pub malon: VerdictReport,
    /// (model relevance, share of substantive T1 votes that were SUPP or REF)
    pub relevance_pairs: Vec<(f64, f64)>,
}

fn process(record: &WtrRecord, cfg: &PipelineConfig, backend: &dyn Scorer) -> Result<Processed, String> {
    let triple = record.triple()?;
    if record.html.is_none() {
        return Err("record has no stored html".into());
    }
    let reference = record.reference();
    // Stored html is authoritative: the fetcher is offline so nothing is refetched.
    let fetcher = Fetcher::new(Duration::from_secs(1), true);
    let run = run(
        &triple,
        &reference,
        record.verbalisation.as_deref(),
        cfg,
        backend,
        &fetcher,
        &RuleSegmenter,
    )
    .map_err(|e| e.to_string())?;
    let weighted_sum = run
        .verdict(AggregatorKind::WeightedSum, None)
        .map_err(|e| e.to_string())?;
    let malon = run.verdict(AggregatorKind::Malon, None).map_err(|e| e.to_string())?;

    let mut texts = Vec::new();
    let mut shares = Vec::new();
    for a in &record.t1_annotations {
        let c = vote_counts(&a.votes);
        let substantive = c[0] + c[1] + c[2];
        if substantive > 0 {
            texts.push(a.evidence.clone());
            shares.push((c[0] + c[1]) as f64 / substantive as f64);
        }
    }
    let rho = call_relevance(backend, run.verbalisation.text(), &texts).map_err(|e| e.to_string())?;
    Ok(Processed {
        features: features_from_evidence(&run.evidence),
        weighted_sum,
        malon,
        relevance_pairs: rho.into_iter().zip(shares).collect(),
        run,
    })
}

/// Runs the pipeline on every record with up to `jobs` threads. Results are
/// in input order.
pub fn process_records(
    records: &[WtrRecord],
    cfg: &PipelineConfig,
    backend: &dyn Scorer,
    jobs: usize,
) -> Vec<Result<Processed, String>> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<Processed, String>>>> =
        Mutex::new((0..records.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, records.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(r) = records.get(i) else { break };
                let out = process(r, cfg, backend);
                if let Err(e) = &out {
                    log::warn!("record {i} ({}): {e}", r.reference_id);
                }
                slots.lock().expect("result lock")[i] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("result lock")
        .into_iter()
        .map(|o| o.expect("every record processed"))
        .collect()
}

/// Feature vectors paired with crowd labels, skipping failed and unlabelled
/// records.
pub fn training_set(records: &[WtrRecord], processed: &[Result<Processed, String>]) -> Vec<(FeatureVector, Stance)> {
    records
        .iter()
        .zip(processed)
        .filter_map(|(r, p)| Some((p.as_ref().ok()?.features, crowd_label(r).ok()?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordVerdict {
    pub aggregator: AggregatorKind,
    pub final_class: Stance,
    pub support_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordSummary {
    pub index: usize,
    pub reference_id: String,
    pub claim_id: String,
    pub author_label: AuthorLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crowd_label: Option<Stance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crowd_exclusion: Option<CrowdExclusion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claim: Option<String>,
    pub verdicts: Vec<RecordVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatorMetrics {
    pub aggregator: AggregatorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ternary: Option<MetricsReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binary: Option<MetricsReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownRow {
    pub aggregator: AggregatorKind,
    /// Author label kept alongside all non-supporting records, or `ALL`.
    pub subset: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceCorrelation {
    pub n_passages: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pearson_r: Option<f64>,
}

/// Share of records whose passages all score at or below the relevance
/// threshold, over all configured windows and over single segments only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrrelevantFraction {
    pub n_records: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub all_windows: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub single_segments: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationBundle {
    pub format: String,
    pub version: u32,
    pub backend: String,
    pub seed: u64,
    pub folds: usize,
    /// `cross_validation` or `pretrained`.
    pub classifier_mode: String,
    pub n_records: usize,
    pub n_errors: usize,
    pub n_crowd_ties_excluded: usize,
    pub n_crowd_not_sure_excluded: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fleiss_kappa_t1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fleiss_kappa_t2: Option<f64>,
    /// Against the crowd's collective labels.
    pub crowd: Vec<AggregatorMetrics>,
    /// Against the authors' reference-level labels.
    pub author: Vec<AggregatorMetrics>,
    pub author_breakdown: Vec<BreakdownRow>,
    pub relevance_correlation: RelevanceCorrelation,
    pub irrelevant_fraction: IrrelevantFraction,
    pub records: Vec<RecordSummary>,
}

/// Predicted class probabilities or (class, support) for one record.
#[derive(Debug, Clone, Copy)]
struct Pred {
    class: usize,
    support: f64,
}

fn metrics_for(preds: &[Pred], labels: &[usize], task: Task) -> Option<MetricsReport> {
    if preds.is_empty() {
        return None;
    }
    let classes: Vec<usize> = preds.iter().map(|p| p.class).collect();
    let mut m = classification_metrics(&classes, labels, task.classes()).ok()?;
    if task == Task::Binary {
        let scores: Vec<f64> = preds.iter().map(|p| p.support).collect();
        let pos: Vec<bool> = labels.iter().map(|&l| l == 0).collect();
        m.auc = roc_auc(&scores, &pos).ok();
    }
    Some(m)
}

fn rule_pred(v: &VerdictReport, task: Task) -> Pred {
    Pred {
        class: task.class_of(v.final_class),
        support: v.support_probability,
    }
}

fn theta_pred(theta: &[f64], task: Task) -> Pred {
    let z = Stance::argmax([theta[0], theta[1], theta[2]]);
    Pred {
        class: task.class_of(z),
        support: theta[0],
    }
}

struct Evaluator<'a> {
    cfg: &'a EvalConfig,
    records: &'a [WtrRecord],
    processed: &'a [Result<Processed, String>],
}

impl Evaluator<'_> {
    fn ok(&self, i: usize) -> Option<&Processed> {
        self.processed[i].as_ref().ok()
    }

    /// Out-of-fold probabilities, or `None` when the subset is too small or
    /// has one class.
    fn cv_probs(&self, idx: &[usize], labels: &[usize], n_classes: usize) -> Option<Vec<Vec<f64>>> {
        let distinct = labels.iter().collect::<std::collections::BTreeSet<_>>().len();
        if idx.len() < 2 || distinct < 2 {
            return None;
        }
        let folds = kfold_indices(idx.len(), self.cfg.folds.min(idx.len()), self.cfg.seed).ok()?;
        let x: Vec<Vec<f64>> = idx
            .iter()
            .map(|&i| self.ok(i).map(|p| p.features.values().to_vec()))
            .collect::<Option<_>>()?;
        cross_val_predict(&x, labels, n_classes, &folds, &self.cfg.forest, self.cfg.seed).ok()
    }

    /// Classifier predictions for `idx` against `labels`.
    fn classifier_preds(&self, idx: &[usize], labels: &[usize], task: Task) -> Option<Vec<Pred>> {
        match &self.cfg.model {
            Some(m) => idx
                .iter()
                .map(|&i| Some(theta_pred(&m.predict_proba(self.ok(i)?.features.values()), task)))
                .collect(),
            None => {
                let n = task.classes().len();
                let probs = self.cv_probs(idx, labels, n)?;
                Some(
                    probs
                        .iter()
                        .map(|p| match task {
                            Task::Ternary => theta_pred(p, task),
                            Task::Binary => Pred {
                                class: usize::from(p[1] > p[0]),
                                support: p[0],
                            },
                        })
                        .collect(),
                )
            }
        }
    }

    fn preds(&self, kind: AggregatorKind, idx: &[usize], labels: &[usize], task: Task) -> Option<Vec<Pred>> {
        match kind {
            AggregatorKind::WeightedSum => idx
                .iter()
                .map(|&i| Some(rule_pred(&self.ok(i)?.weighted_sum, task)))
                .collect(),
            AggregatorKind::Malon => idx
                .iter()
                .map(|&i| Some(rule_pred(&self.ok(i)?.malon, task)))
                .collect(),
            AggregatorKind::Classifier => self.classifier_preds(idx, labels, task),
        }
    }

    fn metrics_block(&self, idx: &[usize], label_of: impl Fn(usize) -> Stance) -> Vec<AggregatorMetrics> {
        AggregatorKind::ALL
            .iter()
            .map(|&kind| {
                let mut out = AggregatorMetrics {
                    aggregator: kind,
                    ternary: None,
                    binary: None,
                };
                for &task in &self.cfg.tasks {
                    let labels: Vec<usize> = idx.iter().map(|&i| task.class_of(label_of(i))).collect();
                    let m = self
                        .preds(kind, idx, &labels, task)
                        .and_then(|p| metrics_for(&p, &labels, task));
                    match task {
                        Task::Ternary => out.ternary = m,
                        Task::Binary => out.binary = m,
                    }
                }
                out
            })
            .collect()
    }

    fn breakdown(&self, ok_idx: &[usize]) -> Vec<BreakdownRow> {
        let mut rows = Vec::new();
        for kind in AggregatorKind::ALL {
            for subset in BREAKDOWN_SUBSETS {
                let idx: Vec<usize> = ok_idx
                    .iter()
                    .copied()
                    .filter(|&i| {
                        let l = self.records[i].author_label;
                        subset.is_none_or(|s| l == s || !l.is_supporting())
                    })
                    .collect();
                let labels: Vec<usize> = idx
                    .iter()
                    .map(|&i| Task::Binary.class_of(self.records[i].author_label.ternary()))
                    .collect();
                let metrics = self
                    .preds(kind, &idx, &labels, Task::Binary)
                    .and_then(|p| metrics_for(&p, &labels, Task::Binary));
                rows.push(BreakdownRow {
                    aggregator: kind,
                    subset: subset.map_or("ALL".to_owned(), |s| s.as_str().to_owned()),
                    n: idx.len(),
                    metrics,
                });
            }
        }
        rows
    }
}

/// Runs the pipeline on every record and scores all three aggregators.
///
/// A record that fails is reported with its error and left out of every
/// metric. Records without a usable crowd label are left out of the crowd
/// metrics only.
pub fn evaluate_pipeline(records: &[WtrRecord], cfg: &EvalConfig, backend: &dyn Scorer) -> EvaluationBundle {
    let processed = process_records(records, &cfg.pipeline, backend, cfg.jobs);
    evaluate_processed(records, &processed, cfg, backend.name())
}

/// Scores already-processed records.
pub fn evaluate_processed(
    records: &[WtrRecord],
    processed: &[Result<Processed, String>],
    cfg: &EvalConfig,
    backend_name: &str,
) -> EvaluationBundle {
    let ev = Evaluator {
        cfg,
        records,
        processed,
    };
    let ok_idx: Vec<usize> = (0..records.len()).filter(|&i| ev.ok(i).is_some()).collect();
    let crowd: Vec<Result<Stance, CrowdExclusion>> = records.iter().map(crowd_label).collect();
    let crowd_idx: Vec<usize> = ok_idx.iter().copied().filter(|&i| crowd[i].is_ok()).collect();
    let excluded = |what: CrowdExclusion| {
        ok_idx
            .iter()
            .filter(|&&i| crowd[i].as_ref().err() == Some(&what))
            .count()
    };
    let (n_ties, n_not_sure) = (excluded(CrowdExclusion::UnresolvedTie), excluded(CrowdExclusion::NotSure));
    if n_ties + n_not_sure > 0 {
        log::warn!("{n_ties} tied and {n_not_sure} not-sure records left out of crowd metrics");
    }

    let crowd_metrics = ev.metrics_block(&crowd_idx, |i| *crowd[i].as_ref().expect("filtered"));
    let author_metrics = ev.metrics_block(&ok_idx, |i| records[i].author_label.ternary());
    let author_breakdown = ev.breakdown(&ok_idx);

    // Per-record classifier verdicts against the crowd's ternary labels.
    let crowd_labels: Vec<usize> = crowd_idx
        .iter()
        .map(|&i| crowd[i].as_ref().expect("filtered").index())
        .collect();
    let classifier_theta: Vec<Option<Vec<f64>>> = match &cfg.model {
        Some(m) => (0..records.len())
            .map(|i| ev.ok(i).map(|p| m.predict_proba(p.features.values())))
            .collect(),
        None => {
            let mut out = vec![None; records.len()];
            if let Some(probs) = ev.cv_probs(&crowd_idx, &crowd_labels, 3) {
                for (&i, p) in crowd_idx.iter().zip(probs) {
                    out[i] = Some(p);
                }
            }
            out
        }
    };

    let mut summaries = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        let mut s = RecordSummary {
            index: i,
            reference_id: r.reference_id.clone(),
            claim_id: r.claim_id.clone(),
            author_label: r.author_label,
            crowd_label: crowd[i].ok(),
            crowd_exclusion: crowd[i].err(),
            error: processed[i].as_ref().err().cloned(),
            claim: None,
            verdicts: Vec::new(),
        };
        if let Ok(p) = &processed[i] {
            s.claim = Some(p.run.verbalisation.text().to_owned());
            for v in [&p.weighted_sum, &p.malon] {
                s.verdicts.push(RecordVerdict {
                    aggregator: v.aggregator,
                    final_class: v.final_class,
                    support_probability: v.support_probability,
                });
            }
            if let Some(theta) = &classifier_theta[i] {
                s.verdicts.push(RecordVerdict {
                    aggregator: AggregatorKind::Classifier,
                    final_class: Stance::argmax([theta[0], theta[1], theta[2]]),
                    support_probability: theta[0],
                });
            }
        }
        summaries.push(s);
    }

    let pairs: Vec<(f64, f64)> = ok_idx
        .iter()
        .flat_map(|&i| ev.ok(i).expect("ok").relevance_pairs.iter().copied())
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
    let relevance_correlation = RelevanceCorrelation {
        n_passages: pairs.len(),
        pearson_r: pearson_r(&xs, &ys).ok(),
    };

    let with_passages: Vec<&Processed> = ok_idx
        .iter()
        .map(|&i| ev.ok(i).expect("ok"))
        .filter(|p| !p.run.scored.is_empty())
        .collect();
    let frac = |pred: &dyn Fn(&Processed) -> Option<bool>| {
        let flags: Vec<bool> = with_passages.iter().filter_map(|p| pred(p)).collect();
        (!flags.is_empty()).then(|| flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64)
    };
    let irrelevant_fraction = IrrelevantFraction {
        n_records: with_passages.len(),
        all_windows: frac(&|p| Some(p.run.all_likely_irrelevant())),
        single_segments: frac(&|p| {
            let singles: Vec<_> = p
                .run
                .scored
                .iter()
                .filter(|s| s.passage().window_size() == 1)
                .cloned()
                .collect();
            (!singles.is_empty()).then(|| all_likely_irrelevant(&singles))
        }),
    };

    let t1_items: Vec<Vec<usize>> = records
        .iter()
        .flat_map(|r| r.t1_annotations.iter().map(|a| vote_counts(&a.votes)))
        .collect();
    let t2_items: Vec<Vec<usize>> = records
        .iter()
        .map(|r| vote_counts(&r.t2_annotations.votes))
        .collect();

    EvaluationBundle {
        format: BUNDLE_FORMAT.to_owned(),
        version: BUNDLE_VERSION,
        backend: backend_name.to_owned(),
        seed: cfg.seed,
        folds: cfg.folds,
        classifier_mode: if cfg.model.is_some() {
            "pretrained"
        } else {
            "cross_validation"
        }
        .to_owned(),
        n_records: records.len(),
        n_errors: records.len() - ok_idx.len(),
        n_crowd_ties_excluded: n_ties,
        n_crowd_not_sure_excluded: n_not_sure,
        fleiss_kappa_t1: fleiss_kappa(&t1_items),
        fleiss_kappa_t2: fleiss_kappa(&t2_items),
        crowd: crowd_metrics,
        author: author_metrics,
        author_breakdown,
        relevance_correlation,
        irrelevant_fraction,
        records: summaries,
    }
}

fn fmt3(x: Option<f64>) -> String {
    x.map_or("-".to_owned(), |v| format!("{v:.3}"))
}

fn metrics_row(out: &mut String, head: &str, m: Option<&MetricsReport>) {
    match m {
        Some(m) => {
            let _ = writeln!(
                out,
                "{head} {:>5} {:>6.3} | {:>6.3} {:>6.3} {:>6.3} | {:>6.3} {:>6.3} {:>6.3} | {:>6}",
                m.n,
                m.accuracy,
                m.macro_avg.precision,
                m.macro_avg.recall,
                m.macro_avg.f1,
                m.weighted_avg.precision,
                m.weighted_avg.recall,
                m.weighted_avg.f1,
                fmt3(m.auc),
            );
        }
        None => {
            let _ = writeln!(out, "{head}     -   (not enough data)");
        }
    }
}

const TABLE_HEAD: &str =
    "    n    acc |  mac-P  mac-R mac-F1 |  wtd-P  wtd-R wtd-F1 |    AUC";

impl EvaluationBundle {
    /// Plain-text tables: aggregator comparison against crowd labels, the
    /// same against author labels, and the binary per-support-type
    /// breakdown.
    pub fn to_tables(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "records: {} evaluated, {} errors; crowd exclusions: {} ties, {} not sure",
            self.n_records - self.n_errors,
            self.n_errors,
            self.n_crowd_ties_excluded,
            self.n_crowd_not_sure_excluded
        );
        for (title, block) in [
            ("Aggregators vs crowd labels", &self.crowd),
            ("Aggregators vs author labels", &self.author),
        ] {
            let _ = writeln!(out, "\n{title}");
            let _ = writeln!(out, "{:<8} {:<12} {TABLE_HEAD}", "task", "aggregator");
            for task in [Task::Ternary, Task::Binary] {
                for m in block {
                    let r = match task {
                        Task::Ternary => m.ternary.as_ref(),
                        Task::Binary => m.binary.as_ref(),
                    };
                    if r.is_none() && !self.has_task(task) {
                        continue;
                    }
                    let head = format!(
                        "{:<8} {:<12}",
                        match task {
                            Task::Ternary => "ternary",
                            Task::Binary => "binary",
                        },
                        m.aggregator.as_str()
                    );
                    metrics_row(&mut out, &head, r);
                }
            }
        }
        let _ = writeln!(out, "\nBinary performance per support type (author labels)");
        let _ = writeln!(out, "{:<12} {:<6} {TABLE_HEAD}", "aggregator", "subset");
        for row in &self.author_breakdown {
            let head = format!("{:<12} {:<6}", row.aggregator.as_str(), row.subset);
            metrics_row(&mut out, &head, row.metrics.as_ref());
        }
        let _ = writeln!(
            out,
            "\nrelevance vs % relevant votes: Pearson r = {} over {} passages",
            fmt3(self.relevance_correlation.pearson_r),
            self.relevance_correlation.n_passages
        );
        let _ = writeln!(
            out,
            "records with only likely-irrelevant passages: {} (all windows), {} (single segments), of {}",
            fmt3(self.irrelevant_fraction.all_windows),
            fmt3(self.irrelevant_fraction.single_segments),
            self.irrelevant_fraction.n_records
        );
        let _ = writeln!(
            out,
            "Fleiss' kappa: T1 {}, T2 {}",
            fmt3(self.fleiss_kappa_t1),
            fmt3(self.fleiss_kappa_t2)
        );
        out
    }

    fn has_task(&self, task: Task) -> bool {
        self.crowd.iter().chain(&self.author).any(|m| match task {
            Task::Ternary => m.ternary.is_some(),
            Task::Binary => m.binary.is_some(),
        })
    }

    /// One row per record and aggregator.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "index",
            "reference_id",
            "claim_id",
            "author_label",
            "crowd_label",
            "aggregator",
            "final_class",
            "support_probability",
            "error",
        ])?;
        for r in &self.records {
            let crowd = r.crowd_label.map(|s| s.as_str()).unwrap_or("");
            let base = [
                r.index.to_string(),
                r.reference_id.clone(),
                r.claim_id.clone(),
                r.author_label.to_string(),
                crowd.to_owned(),
            ];
            if r.verdicts.is_empty() {
                let mut row = base.to_vec();
                row.extend(["".into(), "".into(), "".into(), r.error.clone().unwrap_or_default()]);
                w.write_record(&row)?;
            }
            for v in &r.verdicts {
                let mut row = base.to_vec();
                row.extend([
                    v.aggregator.as_str().to_owned(),
                    v.final_class.as_str().to_owned(),
                    format!("{:.6}", v.support_probability),
                    String::new(),
                ]);
                w.write_record(&row)?;
            }
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }
}
