//! Automated verification of knowledge-graph triples against the web pages
//! cited as their references.
//!
//! A triple is turned into a natural-language claim, the reference page is
//! cleaned and split into sentence windows, the windows are ranked by
//! relevance to the claim, the best few are scored for stance, and the
//! stances are aggregated into a verdict: supports, refutes, or not enough
//! information.
//!
//! ```
//! use prove::backend::BaselineScorer;
//! use prove::kg::{AggregatorKind, ObjectDatatype, Reference, Stance, Triple, TripleComponent};
//! use prove::pipeline::{verify, PipelineConfig};
//! use prove::retrieval::{Fetcher, RuleSegmenter};
//!
//! let triple = Triple::new(
//!     "t1",
//!     TripleComponent::new("Q90", "Paris"),
//!     TripleComponent::new("P17", "country"),
//!     TripleComponent::new("Q142", "France"),
//!     ObjectDatatype::Entity,
//! );
//! let page = Reference::document("r1", "Paris's country is France. It rains a lot.");
//! let report = verify(
//!     &triple,
//!     &page,
//!     None,
//!     &PipelineConfig::default(),
//!     &BaselineScorer::new(),
//!     &Fetcher::default(),
//!     &RuleSegmenter,
//!     &[AggregatorKind::WeightedSum],
//!     None,
//! )
//! .unwrap();
//! assert_eq!(report.verdicts[0].final_class, Stance::Supp);
//! ```

pub mod backend;
pub mod commands;
pub mod config;
pub mod evaluation;
pub mod kg;
pub mod pipeline;
pub mod retrieval;
pub mod selection;
pub mod verbalisation;
pub mod verification;
