//! Domain types shared by every pipeline stage.
//!
//! Everything here is an immutable value object. Constructors validate the
//! invariants so that downstream stages can rely on them without rechecking.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when checking that a stance distribution sums to one.
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KgError {
    #[error("component `{0}` has an empty main label")]
    MissingLabel(String),
    #[error("object datatype `{0}` cannot be verbalised")]
    UnverbalisableObject(ObjectDatatype),
    #[error("component `{id}` lists alias `{alias}` more than once or repeats its main label")]
    DuplicateAlias { id: String, alias: String },
    #[error("passage span is inconsistent: window {window_size}, start {start}, end {end}")]
    InvalidSpan {
        window_size: usize,
        start: usize,
        end: usize,
    },
    #[error("relevance score {0} is outside [-1, 1]")]
    RelevanceOutOfRange(f64),
    #[error("stance distribution ({0}, {1}, {2}) is not a probability distribution")]
    NotADistribution(f64, f64, f64),
    #[error("verbalisation text is empty")]
    EmptyVerbalisation,
}

/// The three stance classes, in tie-break order.
///
/// Whenever an argmax over stances is ambiguous the class with the lowest
/// index wins, so `Supp` beats `Ref` beats `Nei`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stance {
    #[serde(rename = "SUPP")]
    Supp,
    #[serde(rename = "REF")]
    Ref,
    #[serde(rename = "NEI")]
    Nei,
}

impl Stance {
    pub const ALL: [Stance; 3] = [Stance::Supp, Stance::Ref, Stance::Nei];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Stance> {
        Stance::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stance::Supp => "SUPP",
            Stance::Ref => "REF",
            Stance::Nei => "NEI",
        }
    }

    /// Argmax over per-class values with the fixed tie-break order.
    pub fn argmax(values: [f64; 3]) -> Stance {
        let mut best = 0;
        for i in 1..3 {
            if values[i] > values[best] {
                best = i;
            }
        }
        Stance::ALL[best]
    }
}

impl fmt::Display for Stance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleComponent {
    pub id: String,
    pub main_label: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl TripleComponent {
    pub fn new(id: impl Into<String>, main_label: impl Into<String>) -> Self {
        TripleComponent {
            id: id.into(),
            main_label: main_label.into(),
            aliases: Vec::new(),
            description: None,
        }
    }

    pub fn with_aliases<I, S>(mut self, aliases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.aliases = aliases.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = Some(description.into());
        self
    }

    pub fn validate(&self) -> Result<(), KgError> {
        if self.main_label.trim().is_empty() {
            return Err(KgError::MissingLabel(self.id.clone()));
        }
        for (i, alias) in self.aliases.iter().enumerate() {
            if *alias == self.main_label || self.aliases[..i].contains(alias) {
                return Err(KgError::DuplicateAlias {
                    id: self.id.clone(),
                    alias: alias.clone(),
                });
            }
        }
        Ok(())
    }

    /// True when `label` is the main label or one of the aliases.
    pub fn knows_label(&self, label: &str) -> bool {
        self.main_label == label || self.aliases.iter().any(|a| a == label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectDatatype {
    Entity,
    String,
    Quantity,
    Datetime,
    Url,
    GlobeCoordinate,
    ExternalId,
    Image,
}

impl ObjectDatatype {
    pub fn is_verbalisable(self) -> bool {
        matches!(
            self,
            ObjectDatatype::Entity
                | ObjectDatatype::String
                | ObjectDatatype::Quantity
                | ObjectDatatype::Datetime
        )
    }

    /// Maps Wikidata datatype names onto the artifact's datatype set.
    pub fn from_wikidata(name: &str) -> Option<ObjectDatatype> {
        Some(match name {
            "wikibase-item" | "wikibase-entityid" | "wikibase-property" | "entity" => {
                ObjectDatatype::Entity
            }
            "string" | "monolingualtext" => ObjectDatatype::String,
            "quantity" => ObjectDatatype::Quantity,
            "time" | "datetime" => ObjectDatatype::Datetime,
            "url" => ObjectDatatype::Url,
            "globe-coordinate" | "globecoordinate" => ObjectDatatype::GlobeCoordinate,
            "external-id" => ObjectDatatype::ExternalId,
            "commonsMedia" | "image" => ObjectDatatype::Image,
            _ => return None,
        })
    }
}

impl fmt::Display for ObjectDatatype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ObjectDatatype::Entity => "entity",
            ObjectDatatype::String => "string",
            ObjectDatatype::Quantity => "quantity",
            ObjectDatatype::Datetime => "datetime",
            ObjectDatatype::Url => "url",
            ObjectDatatype::GlobeCoordinate => "globe_coordinate",
            ObjectDatatype::ExternalId => "external_id",
            ObjectDatatype::Image => "image",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Triple {
    pub id: String,
    pub subject: TripleComponent,
    pub predicate: TripleComponent,
    pub object: TripleComponent,
    pub object_datatype: ObjectDatatype,
}

impl Triple {
    pub fn new(
        id: impl Into<String>,
        subject: TripleComponent,
        predicate: TripleComponent,
        object: TripleComponent,
        object_datatype: ObjectDatatype,
    ) -> Self {
        Triple {
            id: id.into(),
            subject,
            predicate,
            object,
            object_datatype,
        }
    }

    pub fn components(&self) -> [&TripleComponent; 3] {
        [&self.subject, &self.predicate, &self.object]
    }
}

/// Checks that a triple is fit for verification: every component carries a
/// label and the object is of a type that can be expressed in a sentence.
pub fn validate_triple(t: &Triple) -> Result<(), KgError> {
    if !t.object_datatype.is_verbalisable() {
        return Err(KgError::UnverbalisableObject(t.object_datatype));
    }
    for c in t.components() {
        c.validate()?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceSource {
    Url(String),
    Document(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reference {
    pub id: String,
    pub source: ReferenceSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub html: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub netloc: Option<String>,
}

impl Reference {
    pub fn url(id: impl Into<String>, url: impl Into<String>) -> Self {
        let url = url.into();
        let netloc = url::Url::parse(&url)
            .ok()
            .and_then(|u| u.host_str().map(str::to_owned));
        Reference {
            id: id.into(),
            source: ReferenceSource::Url(url),
            final_url: None,
            html: None,
            netloc,
        }
    }

    pub fn document(id: impl Into<String>, text: impl Into<String>) -> Self {
        Reference {
            id: id.into(),
            source: ReferenceSource::Document(text.into()),
            final_url: None,
            html: None,
            netloc: None,
        }
    }

    /// Records the outcome of fetching a URL reference. Document references
    /// never carry HTML, so they are returned unchanged.
    pub fn with_fetched(mut self, final_url: impl Into<String>, html: impl Into<String>) -> Self {
        if let ReferenceSource::Url(_) = self.source {
            self.final_url = Some(final_url.into());
            self.html = Some(html.into());
        }
        self
    }

    pub fn is_fetched(&self) -> bool {
        self.html.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerbalisationOrigin {
    Backend,
    Template,
    Override,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labels {
    pub subject: String,
    pub predicate: String,
    pub object: String,
}

impl Labels {
    pub fn new(
        subject: impl Into<String>,
        predicate: impl Into<String>,
        object: impl Into<String>,
    ) -> Self {
        Labels {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
        }
    }

    pub fn is_complete(&self) -> bool {
        [&self.subject, &self.predicate, &self.object]
            .iter()
            .all(|l| !l.trim().is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verbalisation {
    text: String,
    labels_used: Labels,
    origin: VerbalisationOrigin,
}

impl Verbalisation {
    pub fn new(
        text: impl Into<String>,
        labels_used: Labels,
        origin: VerbalisationOrigin,
    ) -> Result<Self, KgError> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(KgError::EmptyVerbalisation);
        }
        Ok(Verbalisation {
            text,
            labels_used,
            origin,
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn labels_used(&self) -> &Labels {
        &self.labels_used
    }

    pub fn origin(&self) -> VerbalisationOrigin {
        self.origin
    }
}

/// A window of `window_size` consecutive segments starting at `start_index`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Passage {
    text: String,
    window_size: usize,
    start_index: usize,
    end_index: usize,
}

impl Passage {
    /// Builds the passage covering `segments[start..start + window_size]`.
    ///
    /// Returns `None` when the window does not fit inside `segments`.
    pub fn from_segments<S: AsRef<str>>(
        segments: &[S],
        start: usize,
        window_size: usize,
    ) -> Option<Passage> {
        if window_size == 0 || start + window_size > segments.len() {
            return None;
        }
        let text = segments[start..start + window_size]
            .iter()
            .map(AsRef::as_ref)
            .collect::<Vec<_>>()
            .join(" ");
        Some(Passage {
            text,
            window_size,
            start_index: start,
            end_index: start + window_size - 1,
        })
    }

    /// Builds a passage from already-joined text. The span must be consistent.
    pub fn new(
        text: impl Into<String>,
        window_size: usize,
        start_index: usize,
        end_index: usize,
    ) -> Result<Passage, KgError> {
        if window_size == 0 || end_index < start_index || end_index - start_index + 1 != window_size
        {
            return Err(KgError::InvalidSpan {
                window_size,
                start: start_index,
                end: end_index,
            });
        }
        Ok(Passage {
            text: text.into(),
            window_size,
            start_index,
            end_index,
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn window_size(&self) -> usize {
        self.window_size
    }

    pub fn start_index(&self) -> usize {
        self.start_index
    }

    pub fn end_index(&self) -> usize {
        self.end_index
    }

    pub fn overlaps(&self, other: &Passage) -> bool {
        self.start_index <= other.end_index && other.start_index <= self.end_index
    }

    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPassage {
    passage: Passage,
    relevance: f64,
}

impl ScoredPassage {
    pub fn new(passage: Passage, relevance: f64) -> Result<Self, KgError> {
        if !(-1.0..=1.0).contains(&relevance) {
            return Err(KgError::RelevanceOutOfRange(relevance));
        }
        Ok(ScoredPassage { passage, relevance })
    }

    pub fn passage(&self) -> &Passage {
        &self.passage
    }

    pub fn relevance(&self) -> f64 {
        self.relevance
    }
}

/// Probabilities over (SUPP, REF, NEI).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct StanceDistribution {
    supp: f64,
    refute: f64,
    nei: f64,
}

impl StanceDistribution {
    pub fn new(supp: f64, refute: f64, nei: f64) -> Result<Self, KgError> {
        let in_unit = |p: f64| (0.0..=1.0).contains(&p);
        let sum = supp + refute + nei;
        if !(in_unit(supp) && in_unit(refute) && in_unit(nei))
            || (sum - 1.0).abs() > DISTRIBUTION_TOLERANCE
        {
            return Err(KgError::NotADistribution(supp, refute, nei));
        }
        Ok(StanceDistribution { supp, refute, nei })
    }

    pub fn supp(&self) -> f64 {
        self.supp
    }

    pub fn refute(&self) -> f64 {
        self.refute
    }

    pub fn nei(&self) -> f64 {
        self.nei
    }

    pub fn get(&self, k: Stance) -> f64 {
        match k {
            Stance::Supp => self.supp,
            Stance::Ref => self.refute,
            Stance::Nei => self.nei,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.supp, self.refute, self.nei]
    }

    pub fn argmax(&self) -> Stance {
        Stance::argmax(self.as_array())
    }
}

impl TryFrom<[f64; 3]> for StanceDistribution {
    type Error = KgError;

    fn try_from(v: [f64; 3]) -> Result<Self, Self::Error> {
        StanceDistribution::new(v[0], v[1], v[2])
    }
}

impl From<StanceDistribution> for [f64; 3] {
    fn from(d: StanceDistribution) -> Self {
        d.as_array()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub scored: ScoredPassage,
    pub stance: StanceDistribution,
    pub length_chars: usize,
}

impl Evidence {
    pub fn new(scored: ScoredPassage, stance: StanceDistribution) -> Self {
        let length_chars = scored.passage().char_len();
        Evidence {
            scored,
            stance,
            length_chars,
        }
    }

    pub fn relevance(&self) -> f64 {
        self.scored.relevance()
    }

    pub fn text(&self) -> &str {
        self.scored.passage().text()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregatorKind {
    WeightedSum,
    Malon,
    Classifier,
}

impl AggregatorKind {
    pub const ALL: [AggregatorKind; 3] = [
        AggregatorKind::WeightedSum,
        AggregatorKind::Malon,
        AggregatorKind::Classifier,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AggregatorKind::WeightedSum => "weighted_sum",
            AggregatorKind::Malon => "malon",
            AggregatorKind::Classifier => "classifier",
        }
    }
}

impl fmt::Display for AggregatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The final verdict for one triple-reference pair under one aggregator.
///
/// `aggregate_values` holds the per-class weighted sums for the weighted-sum
/// aggregator, the 0/1 rule indicators for Malon's rule, and the predicted
/// class probabilities for the classifier. For the weighted sum the raw
/// support value `aggregate_values[SUPP]` can exceed one; `support_probability`
/// then carries the normalised share and `raw_support` the unnormalised one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub final_class: Stance,
    pub support_probability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_support: Option<f64>,
    pub evidence: Vec<Evidence>,
    pub aggregator: AggregatorKind,
    pub aggregate_values: [f64; 3],
}
