//! The annotated triple-reference dataset in line-JSON form.
//!
//! A file starts with a header line `{"format": "prove-wtr", "version": 1}`
//! followed by one record per line. Blank lines are ignored. A completely
//! empty file is an empty dataset.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kg::{ObjectDatatype, Reference, Stance, Triple, TripleComponent};

pub const WTR_FORMAT: &str = "prove-wtr";
pub const WTR_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum WtrError {
    #[error("reading dataset: {0}")]
    Io(#[from] std::io::Error),
    #[error("line 1: bad header: {0}")]
    Header(String),
    #[error("line {line}: field `{path}`: {message}")]
    Schema {
        line: usize,
        path: String,
        message: String,
    },
}

/// A crowd vote.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Vote {
    Supp = 0,
    Ref = 1,
    Nei = 2,
    NotSure = 3,
}

impl Vote {
    pub const ALL: [Vote; 4] = [Vote::Supp, Vote::Ref, Vote::Nei, Vote::NotSure];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn stance(self) -> Option<Stance> {
        Stance::from_index(self as usize)
    }
}

impl TryFrom<u8> for Vote {
    type Error = String;

    fn try_from(code: u8) -> Result<Self, Self::Error> {
        Vote::ALL
            .get(code as usize)
            .copied()
            .ok_or_else(|| format!("unknown vote code {code}; expected 0-3"))
    }
}

impl From<Vote> for u8 {
    fn from(v: Vote) -> u8 {
        v.code()
    }
}

/// How a reference supports its triple, as judged by the dataset authors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AuthorLabel {
    /// Support stated explicitly in natural text.
    #[serde(rename = "1A")]
    A1,
    /// Support in text that is not naturally written, such as lists or tables.
    #[serde(rename = "1B")]
    B1,
    /// Support that is not textual.
    #[serde(rename = "1C")]
    C1,
    /// Support that must be inferred from the text.
    #[serde(rename = "1D")]
    D1,
    /// The reference refutes the triple.
    #[serde(rename = "2A")]
    A2,
    /// The reference neither supports nor refutes the triple.
    #[serde(rename = "2B")]
    B2,
}

impl AuthorLabel {
    pub const ALL: [AuthorLabel; 6] = [
        AuthorLabel::A1,
        AuthorLabel::B1,
        AuthorLabel::C1,
        AuthorLabel::D1,
        AuthorLabel::A2,
        AuthorLabel::B2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AuthorLabel::A1 => "1A",
            AuthorLabel::B1 => "1B",
            AuthorLabel::C1 => "1C",
            AuthorLabel::D1 => "1D",
            AuthorLabel::A2 => "2A",
            AuthorLabel::B2 => "2B",
        }
    }

    pub fn is_supporting(self) -> bool {
        matches!(
            self,
            AuthorLabel::A1 | AuthorLabel::B1 | AuthorLabel::C1 | AuthorLabel::D1
        )
    }

    pub fn ternary(self) -> Stance {
        match self {
            AuthorLabel::A2 => Stance::Ref,
            AuthorLabel::B2 => Stance::Nei,
            _ => Stance::Supp,
        }
    }
}

impl fmt::Display for AuthorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Ternary,
    Binary,
}

impl Task {
    pub fn classes(self) -> &'static [&'static str] {
        match self {
            Task::Ternary => &crate::verification::TERNARY_CLASSES,
            Task::Binary => &crate::verification::BINARY_CLASSES,
        }
    }

    /// Class index of a stance under this task. Binary index 0 is
    /// "supporting".
    pub fn class_of(self, s: Stance) -> usize {
        match self {
            Task::Ternary => s.index(),
            Task::Binary => usize::from(s != Stance::Supp),
        }
    }
}

/// Class index of an author label: SUPP/REF/NEI for the ternary task,
/// supporting/not supporting for the binary one.
pub fn map_author_label(l: AuthorLabel, task: Task) -> usize {
    task.class_of(l.ternary())
}

/// Votes on one piece of evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceAnnotation {
    pub evidence: String,
    #[serde(default)]
    pub worker_ids: Vec<String>,
    pub votes: Vec<Vote>,
    #[serde(default)]
    pub not_sure_reasons: Vec<String>,
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregated: Option<Vote>,
}

/// Votes on the evidence set as a whole.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetAnnotation {
    pub evidence: Vec<String>,
    #[serde(default)]
    pub worker_ids: Vec<String>,
    pub votes: Vec<Vote>,
    #[serde(default)]
    pub not_sure_reasons: Vec<String>,
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregated: Option<Vote>,
    /// Label chosen by an adjudicator when the vote is tied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tie_break: Option<Stance>,
}

/// One annotated triple-reference pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WtrRecord {
    pub reference_id: String,
    pub reference_property_id: String,
    /// `url` or `external_id`.
    pub reference_datatype: String,
    pub url: String,
    pub netloc: String,
    pub netloc_group: String,
    pub final_url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub html: Option<String>,
    pub claim_id: String,
    pub rank: String,
    /// Wikidata datatype name of the object, e.g. `wikibase-item`.
    pub datatype: String,
    pub subject: TripleComponent,
    pub predicate: TripleComponent,
    pub object: TripleComponent,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verbalisation: Option<String>,
    pub t1_annotations: Vec<EvidenceAnnotation>,
    pub t2_annotations: SetAnnotation,
    pub author_label: AuthorLabel,
}

impl WtrRecord {
    pub fn triple(&self) -> Result<Triple, String> {
        let dt = ObjectDatatype::from_wikidata(&self.datatype)
            .ok_or_else(|| format!("unknown datatype `{}`", self.datatype))?;
        Ok(Triple::new(
            self.claim_id.clone(),
            self.subject.clone(),
            self.predicate.clone(),
            self.object.clone(),
            dt,
        ))
    }

    /// The stored page. Carries no HTML when none was recorded.
    pub fn reference(&self) -> Reference {
        let r = Reference::url(self.reference_id.clone(), self.url.clone());
        let mut r = match &self.html {
            Some(html) => r.with_fetched(self.final_url.clone(), html.clone()),
            None => r,
        };
        r.netloc = Some(self.netloc.clone());
        r
    }

    fn dedup_key(&self) -> (String, String) {
        let claim = self.verbalisation.clone().unwrap_or_else(|| {
            format!(
                "{}\u{1f}{}\u{1f}{}",
                self.subject.main_label, self.predicate.main_label, self.object.main_label
            )
        });
        let url = if self.final_url.is_empty() {
            self.url.clone()
        } else {
            self.final_url.clone()
        };
        (claim, url)
    }

    fn check(&self) -> Result<(), (String, String)> {
        if self.t1_annotations.len() > 5 {
            return Err((
                "t1_annotations".into(),
                format!("{} evidence entries; at most 5 allowed", self.t1_annotations.len()),
            ));
        }
        for (i, a) in self.t1_annotations.iter().enumerate() {
            if a.votes.is_empty() {
                return Err((format!("t1_annotations[{i}].votes"), "no votes".into()));
            }
        }
        if self.t2_annotations.votes.is_empty() {
            return Err(("t2_annotations.votes".into(), "no votes".into()));
        }
        if self.t2_annotations.evidence.len() > 5 {
            return Err((
                "t2_annotations.evidence".into(),
                "at most 5 evidence entries allowed".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    version: u32,
}

/// Records that survived loading.
#[derive(Debug, Clone, PartialEq)]
pub struct WtrDataset {
    pub records: Vec<WtrRecord>,
    /// Records dropped for repeating an earlier (claim, final URL) pair.
    pub duplicates_dropped: usize,
}

/// Parses a dataset, dropping records whose claim and final URL repeat an
/// earlier record.
pub fn read_wtr<R: BufRead>(reader: R) -> Result<WtrDataset, WtrError> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    let mut duplicates_dropped = 0;
    let mut header_seen = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let lineno = i + 1;
        if !header_seen {
            let h: Header =
                serde_json::from_str(&line).map_err(|e| WtrError::Header(e.to_string()))?;
            if h.format != WTR_FORMAT {
                return Err(WtrError::Header(format!("unknown format `{}`", h.format)));
            }
            if h.version != WTR_VERSION {
                return Err(WtrError::Header(format!("unsupported version {}", h.version)));
            }
            header_seen = true;
            continue;
        }
        let de = &mut serde_json::Deserializer::from_str(&line);
        let rec: WtrRecord = serde_path_to_error::deserialize(de).map_err(|e| WtrError::Schema {
            line: lineno,
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        rec.check().map_err(|(path, message)| WtrError::Schema {
            line: lineno,
            path,
            message,
        })?;
        if seen.insert(rec.dedup_key()) {
            records.push(rec);
        } else {
            duplicates_dropped += 1;
        }
    }
    if duplicates_dropped > 0 {
        log::info!("dropped {duplicates_dropped} duplicate claim-URL records");
    }
    Ok(WtrDataset {
        records,
        duplicates_dropped,
    })
}

pub fn load_wtr(path: &Path) -> Result<WtrDataset, WtrError> {
    let f = std::fs::File::open(path)?;
    read_wtr(std::io::BufReader::new(f))
}

/// Writes the header and one line per record.
pub fn write_wtr<W: Write>(records: &[WtrRecord], mut w: W) -> std::io::Result<()> {
    let header = Header {
        format: WTR_FORMAT.to_owned(),
        version: WTR_VERSION,
    };
    serde_json::to_writer(&mut w, &header)?;
    writeln!(w)?;
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    Ok(())
}

/// Modal vote and whether the mode was shared.
///
/// NotSure votes only count when no substantive vote exists. A tie reports
/// the first tied class in SUPP, REF, NEI order. Returns `None` for an empty
/// list.
pub fn majority_vote(votes: &[Vote]) -> Option<(Vote, bool)> {
    if votes.is_empty() {
        return None;
    }
    let mut counts = [0usize; 4];
    votes.iter().for_each(|v| counts[v.code() as usize] += 1);
    if counts[..3].iter().all(|&c| c == 0) {
        return Some((Vote::NotSure, false));
    }
    let best = *counts[..3].iter().max()?;
    let mut winners = (0..3).filter(|&i| counts[i] == best);
    let first = winners.next()?;
    Some((Vote::ALL[first], winners.next().is_some()))
}

/// Why a record has no usable crowd label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrowdExclusion {
    UnresolvedTie,
    NotSure,
}

/// The collective crowd label of a record: the T2 majority, or the
/// recorded tie-break when the majority is tied.
pub fn crowd_label(r: &WtrRecord) -> Result<Stance, CrowdExclusion> {
    match majority_vote(&r.t2_annotations.votes) {
        None | Some((Vote::NotSure, _)) => Err(CrowdExclusion::NotSure),
        Some((_, true)) => r.t2_annotations.tie_break.ok_or(CrowdExclusion::UnresolvedTie),
        Some((v, false)) => v.stance().ok_or(CrowdExclusion::NotSure),
    }
}

/// Per-category vote counts, in vote-code order.
pub fn vote_counts(votes: &[Vote]) -> Vec<usize> {
    let mut c = vec![0; 4];
    votes.iter().for_each(|v| c[v.code() as usize] += 1);
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(codes: &[u8]) -> Vec<Vote> {
        codes.iter().map(|&c| Vote::try_from(c).unwrap()).collect()
    }

    pub(crate) fn record(id: &str, url: &str) -> WtrRecord {
        WtrRecord {
            reference_id: id.into(),
            reference_property_id: "P854".into(),
            reference_datatype: "url".into(),
            url: url.into(),
            netloc: "example.org".into(),
            netloc_group: "OTHER".into(),
            final_url: url.into(),
            html: Some("<p>Text.</p>".into()),
            claim_id: format!("C{id}"),
            rank: "normal".into(),
            datatype: "wikibase-item".into(),
            subject: TripleComponent::new("Q1", "Paris"),
            predicate: TripleComponent::new("P17", "country"),
            object: TripleComponent::new("Q142", "France"),
            verbalisation: None,
            t1_annotations: vec![EvidenceAnnotation {
                evidence: "Text.".into(),
                worker_ids: vec!["w1".into()],
                votes: v(&[2]),
                not_sure_reasons: vec![],
                times: vec![3.5],
                aggregated: Some(Vote::Nei),
            }],
            t2_annotations: SetAnnotation {
                evidence: vec!["Text.".into()],
                worker_ids: vec![],
                votes: v(&[0, 0, 2]),
                not_sure_reasons: vec![],
                times: vec![],
                aggregated: None,
                tie_break: None,
            },
            author_label: AuthorLabel::A1,
        }
    }

    #[test]
    fn majority_examples() {
        assert_eq!(majority_vote(&v(&[0, 0, 2, 2, 1])), Some((Vote::Supp, true)));
        assert_eq!(majority_vote(&v(&[0, 0, 0, 2, 1])), Some((Vote::Supp, false)));
        assert_eq!(majority_vote(&v(&[3, 3, 1])), Some((Vote::Ref, false)));
        assert_eq!(majority_vote(&v(&[3, 3])), Some((Vote::NotSure, false)));
        assert_eq!(majority_vote(&v(&[1, 2])), Some((Vote::Ref, true)));
        assert_eq!(majority_vote(&[]), None);
    }

    #[test]
    fn author_label_mapping() {
        assert_eq!(map_author_label(AuthorLabel::D1, Task::Ternary), Stance::Supp.index());
        assert_eq!(map_author_label(AuthorLabel::A2, Task::Binary), 1);
        assert_eq!(map_author_label(AuthorLabel::B2, Task::Ternary), Stance::Nei.index());
        assert_eq!(map_author_label(AuthorLabel::C1, Task::Binary), 0);
    }

    #[test]
    fn round_trip_and_dedup() {
        let a = record("1", "http://a/");
        let mut b = record("2", "http://a/");
        b.reference_id = "2".into();
        let c = record("3", "http://c/");
        let mut buf = Vec::new();
        write_wtr(&[a.clone(), b, c.clone()], &mut buf).unwrap();
        let ds = read_wtr(buf.as_slice()).unwrap();
        assert_eq!(ds.duplicates_dropped, 1);
        assert_eq!(ds.records, vec![a, c]);

        let mut again = Vec::new();
        write_wtr(&ds.records, &mut again).unwrap();
        assert_eq!(read_wtr(again.as_slice()).unwrap().records, ds.records);
    }

    #[test]
    fn unknown_vote_code_names_the_field() {
        let mut buf = Vec::new();
        write_wtr(&[record("1", "http://a/")], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap().replace("\"votes\":[0,0,2]", "\"votes\":[0,4,2]");
        let err = read_wtr(text.as_bytes()).unwrap_err();
        match err {
            WtrError::Schema { line, path, .. } => {
                assert_eq!(line, 2);
                assert_eq!(path, "t2_annotations.votes[1]");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn empty_inputs() {
        assert!(read_wtr("".as_bytes()).unwrap().records.is_empty());
        let header = "{\"format\":\"prove-wtr\",\"version\":1}\n";
        assert!(read_wtr(header.as_bytes()).unwrap().records.is_empty());
        assert!(matches!(
            read_wtr("{\"format\":\"x\",\"version\":1}".as_bytes()),
            Err(WtrError::Header(_))
        ));
    }

    #[test]
    fn crowd_label_uses_tie_break() {
        let mut r = record("1", "http://a/");
        r.t2_annotations.votes = v(&[0, 2]);
        assert_eq!(crowd_label(&r), Err(CrowdExclusion::UnresolvedTie));
        r.t2_annotations.tie_break = Some(Stance::Nei);
        assert_eq!(crowd_label(&r), Ok(Stance::Nei));
        r.t2_annotations.votes = v(&[3]);
        assert_eq!(crowd_label(&r), Err(CrowdExclusion::NotSure));
    }
}
