//! Preferred-label selection and claim verbalisation.
//!
//! Curators steer label choice through a [`LabelPolicy`]: a map from
//! component id to one of that component's aliases. Without an override the
//! main label is used.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::backend::{call_verbalise, BackendError, Scorer};
use crate::kg::{KgError, Labels, Triple, TripleComponent, Verbalisation, VerbalisationOrigin};

#[derive(Debug, Error)]
pub enum VerbalisationError {
    #[error("override `{alias}` for component `{id}` is neither its main label nor an alias")]
    OverrideNotAnAlias { id: String, alias: String },
    #[error("label override file line {line}: {message}")]
    OverrideFile { line: usize, message: String },
    #[error("labels must be non-empty")]
    EmptyLabel,
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Kg(#[from] KgError),
    #[error("reading label overrides: {0}")]
    Io(#[from] std::io::Error),
}

/// Chooses which label stands for each triple component.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelPolicy {
    overrides: BTreeMap<String, String>,
}

impl LabelPolicy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_override(mut self, component_id: impl Into<String>, label: impl Into<String>) -> Self {
        self.overrides.insert(component_id.into(), label.into());
        self
    }

    pub fn overrides(&self) -> &BTreeMap<String, String> {
        &self.overrides
    }

    /// Parses `component_id<TAB>alias` lines. Blank lines and lines starting
    /// with `#` are skipped; a later line for the same id wins.
    pub fn parse(text: &str) -> Result<Self, VerbalisationError> {
        let mut policy = LabelPolicy::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (id, alias) = line.split_once('\t').ok_or(VerbalisationError::OverrideFile {
                line: i + 1,
                message: "expected `component_id<TAB>alias`".into(),
            })?;
            let (id, alias) = (id.trim(), alias.trim());
            if id.is_empty() || alias.is_empty() {
                return Err(VerbalisationError::OverrideFile {
                    line: i + 1,
                    message: "empty component id or alias".into(),
                });
            }
            policy.overrides.insert(id.to_owned(), alias.to_owned());
        }
        Ok(policy)
    }

    pub fn load(path: &Path) -> Result<Self, VerbalisationError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_file_string(&self) -> String {
        self.overrides
            .iter()
            .map(|(id, alias)| format!("{id}\t{alias}\n"))
            .collect()
    }

    fn label_for(&self, c: &TripleComponent) -> Result<String, VerbalisationError> {
        match self.overrides.get(&c.id) {
            Some(alias) if c.knows_label(alias) => Ok(alias.clone()),
            Some(alias) => Err(VerbalisationError::OverrideNotAnAlias {
                id: c.id.clone(),
                alias: alias.clone(),
            }),
            None => Ok(c.main_label.clone()),
        }
    }
}

/// Returns the preferred (subject, predicate, object) labels.
pub fn select_labels(t: &Triple, policy: &LabelPolicy) -> Result<Labels, VerbalisationError> {
    Ok(Labels::new(
        policy.label_for(&t.subject)?,
        policy.label_for(&t.predicate)?,
        policy.label_for(&t.object)?,
    ))
}

/// `"<subject>'s <predicate> is <object>."`
pub fn template_verbalise(labels: &Labels) -> Result<Verbalisation, VerbalisationError> {
    if !labels.is_complete() {
        return Err(VerbalisationError::EmptyLabel);
    }
    let text = format!(
        "{}'s {} is {}.",
        labels.subject.trim(),
        labels.predicate.trim(),
        labels.object.trim()
    );
    Ok(Verbalisation::new(text, labels.clone(), VerbalisationOrigin::Template)?)
}

/// Asks the backend for a sentence; falls back to the template when the
/// backend cannot be reached. Malformed answers are errors, not fallbacks.
pub fn verbalise(labels: &Labels, backend: &dyn Scorer) -> Result<Verbalisation, VerbalisationError> {
    if !labels.is_complete() {
        return Err(VerbalisationError::EmptyLabel);
    }
    match call_verbalise(backend, labels) {
        Ok(text) => Ok(Verbalisation::new(
            text,
            labels.clone(),
            VerbalisationOrigin::Backend,
        )?),
        Err(e) if e.is_unavailability() => {
            log::debug!("verbaliser unavailable ({e}); using template");
            template_verbalise(labels)
        }
        Err(e) => Err(e.into()),
    }
}

/// Wraps a curator-written sentence.
pub fn override_verbalisation(
    text: &str,
    labels: &Labels,
) -> Result<Verbalisation, VerbalisationError> {
    Ok(Verbalisation::new(
        text.trim(),
        labels.clone(),
        VerbalisationOrigin::Override,
    )?)
}

const MONTHS: [&str; 12] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];

/// Renders a Wikidata-style timestamp (`+1929-06-01T00:00:00Z`) by its
/// granularity: `1 June 1929`, `June 1929` or `1929`. Zero month or day
/// fields mark coarser precision. Returns `None` if the value is not a
/// timestamp.
pub fn format_datetime(value: &str) -> Option<String> {
    let v = value.trim();
    let (negative, v) = match v.as_bytes().first() {
        Some(b'+') => (false, &v[1..]),
        Some(b'-') => (true, &v[1..]),
        _ => (false, v),
    };
    let date = v.split('T').next()?;
    let mut parts = date.splitn(3, '-');
    let year: i64 = parts.next()?.parse().ok()?;
    let month: usize = parts.next().map_or(Some(0), |m| m.parse().ok())?;
    let day: u32 = parts.next().map_or(Some(0), |d| d.parse().ok())?;
    if month > 12 || day > 31 {
        return None;
    }
    let year = if negative {
        format!("{year} BC")
    } else {
        year.to_string()
    };
    Some(match (month, day) {
        (0, _) => year,
        (m, 0) => format!("{} {year}", MONTHS[m - 1]),
        (m, d) => format!("{d} {} {year}", MONTHS[m - 1]),
    })
}

/// Quantity label: the amount without a leading `+`, followed by the unit's
/// label when the quantity has one.
pub fn quantity_label(amount: &str, unit: Option<&str>) -> String {
    let amount = amount.trim().trim_start_matches('+');
    match unit.map(str::trim).filter(|u| !u.is_empty() && *u != "1") {
        Some(u) => format!("{amount} {u}"),
        None => amount.to_owned(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::BaselineScorer;
    use crate::kg::ObjectDatatype;

    fn parent_triple() -> Triple {
        Triple::new(
            "t1",
            TripleComponent::new("Q1", "John"),
            TripleComponent::new("P40", "child").with_aliases(["has child", "offspring"]),
            TripleComponent::new("Q2", "Paul"),
            ObjectDatatype::Entity,
        )
    }

    #[test]
    fn main_labels_by_default() {
        let l = select_labels(&parent_triple(), &LabelPolicy::new()).unwrap();
        assert_eq!(l, Labels::new("John", "child", "Paul"));
    }

    #[test]
    fn predicate_alias_override() {
        let policy = LabelPolicy::new().with_override("P40", "has child");
        let l = select_labels(&parent_triple(), &policy).unwrap();
        assert_eq!(l.predicate, "has child");
        assert_eq!(l, select_labels(&parent_triple(), &policy).unwrap());
    }

    #[test]
    fn override_must_be_a_known_label() {
        let policy = LabelPolicy::new().with_override("P40", "father of");
        assert!(matches!(
            select_labels(&parent_triple(), &policy),
            Err(VerbalisationError::OverrideNotAnAlias { .. })
        ));
    }

    #[test]
    fn template_pattern() {
        let v = template_verbalise(&Labels::new("A", "child", "B")).unwrap();
        assert_eq!(v.text(), "A's child is B.");
        assert_eq!(v.origin(), VerbalisationOrigin::Template);
        let v = template_verbalise(&Labels::new("X", "inception", "1890")).unwrap();
        assert_eq!(v.text(), "X's inception is 1890.");
        assert!(template_verbalise(&Labels::new("X", "", "1890")).is_err());
    }

    #[test]
    fn offline_backend_falls_back_to_template() {
        let labels = Labels::new(
            "Librarian of Congress",
            "position holder",
            "James H. Billington",
        );
        let v = verbalise(&labels, &BaselineScorer::new()).unwrap();
        assert_eq!(
            v.text(),
            "Librarian of Congress's position holder is James H. Billington."
        );
        assert_eq!(v.origin(), VerbalisationOrigin::Template);
    }

    #[test]
    fn override_file_round_trip() {
        let text = "# curated\nP40\thas child\n\nP571\tfounded\n";
        let policy = LabelPolicy::parse(text).unwrap();
        assert_eq!(policy.overrides().len(), 2);
        assert_eq!(LabelPolicy::parse(&policy.to_file_string()).unwrap(), policy);
        assert!(matches!(
            LabelPolicy::parse("P40 has child"),
            Err(VerbalisationError::OverrideFile { line: 1, .. })
        ));
    }

    #[test]
    fn datetime_granularity() {
        assert_eq!(format_datetime("+1929-06-01T00:00:00Z").unwrap(), "1 June 1929");
        assert_eq!(format_datetime("+1929-06-00T00:00:00Z").unwrap(), "June 1929");
        assert_eq!(format_datetime("+1929-00-00T00:00:00Z").unwrap(), "1929");
        assert_eq!(format_datetime("-0044-03-15T00:00:00Z").unwrap(), "15 March 44 BC");
        assert_eq!(format_datetime("1987").unwrap(), "1987");
        assert!(format_datetime("yesterday").is_none());
        assert!(format_datetime("+1929-13-01").is_none());
    }

    #[test]
    fn quantity_with_and_without_unit() {
        assert_eq!(quantity_label("+72", Some("kilogram")), "72 kilogram");
        assert_eq!(quantity_label("+3", None), "3");
        assert_eq!(quantity_label("+3", Some("1")), "3");
    }
}
