use std::collections::HashSet;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

const ABBREVIATIONS_FILE: &str = include_str!("../../data/abbreviations.txt");

const TERMINAL: &[char] = &['.', '!', '?', '…'];
const CLOSERS: &[char] = &['"', '\'', ')', ']', '”', '’', '»'];
const OPENERS: &[char] = &['"', '\'', '(', '[', '“', '‘', '«'];

/// Sentence segments in document order. No segment is blank.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SegmentList {
    segments: Vec<String>,
}

impl SegmentList {
    /// Trims each segment and drops blank ones.
    pub fn new<I, S>(segments: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        SegmentList {
            segments: segments
                .into_iter()
                .map(|s| s.into().trim().to_owned())
                .filter(|s| !s.is_empty())
                .collect(),
        }
    }

    pub fn as_slice(&self) -> &[String] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &String> {
        self.segments.iter()
    }
}

pub trait Segmenter: Send + Sync {
    fn segment(&self, text: &str) -> SegmentList;
}

fn abbreviations() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        ABBREVIATIONS_FILE
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

/// True when a word followed by a full stop should not end a sentence.
///
/// `word` is the text between the preceding whitespace and the period and
/// `prev` the word before it, if any. Listed abbreviations and dotted
/// initialisms such as `J.R.R` are always guarded. A lone letter is guarded
/// as a name initial when it opens the text or follows a capitalised word,
/// so "James H. Billington" stays whole while "A is B. C is D." splits.
pub fn is_guarded(word: &str, prev: Option<&str>) -> bool {
    let w = word.trim_start_matches(OPENERS).to_lowercase();
    if w.is_empty() {
        return false;
    }
    if abbreviations().contains(w.as_str()) {
        return true;
    }
    let parts: Vec<&str> = w.split('.').collect();
    if !parts
        .iter()
        .all(|part| part.chars().count() == 1 && part.chars().all(char::is_alphabetic))
    {
        return false;
    }
    if parts.len() > 1 {
        return true;
    }
    prev.is_none_or(|p| {
        p.trim_start_matches(OPENERS)
            .chars()
            .next()
            .is_some_and(char::is_uppercase)
    })
}

/// Splits after `.`, `!`, `?` or `…` (plus any closing quotes or brackets)
/// when whitespace follows and the next word starts with an uppercase letter
/// or a digit. Blank lines are hard boundaries.
#[derive(Debug, Default, Clone, Copy)]
pub struct RuleSegmenter;

impl RuleSegmenter {
    pub fn new() -> Self {
        RuleSegmenter
    }

    fn split_paragraph(paragraph: &str, out: &mut Vec<String>) {
        let words: Vec<&str> = paragraph.split_whitespace().collect();
        let mut current: Vec<&str> = Vec::new();
        for (i, word) in words.iter().enumerate() {
            current.push(word);
            let Some(next) = words.get(i + 1) else {
                break;
            };
            let prev = i.checked_sub(1).map(|j| words[j]);
            if ends_segment(word, prev) && starts_segment(next) {
                out.push(current.join(" "));
                current.clear();
            }
        }
        if !current.is_empty() {
            out.push(current.join(" "));
        }
    }
}

fn ends_segment(word: &str, prev: Option<&str>) -> bool {
    let core = word.trim_end_matches(CLOSERS);
    if !core.ends_with(TERMINAL) {
        return false;
    }
    if core.ends_with('.') && !core.ends_with("..") {
        return !is_guarded(&core[..core.len() - 1], prev);
    }
    true
}

fn starts_segment(word: &str) -> bool {
    word.trim_start_matches(OPENERS)
        .chars()
        .next()
        .is_some_and(|c| c.is_uppercase() || c.is_ascii_digit())
}

impl Segmenter for RuleSegmenter {
    fn segment(&self, text: &str) -> SegmentList {
        let mut out = Vec::new();
        let mut paragraph = String::new();
        for line in text.lines() {
            if line.trim().is_empty() {
                Self::split_paragraph(&paragraph, &mut out);
                paragraph.clear();
            } else {
                paragraph.push_str(line);
                paragraph.push(' ');
            }
        }
        Self::split_paragraph(&paragraph, &mut out);
        SegmentList::new(out)
    }
}

/// Segments with the default rule-based segmenter.
pub fn segment(text: &str) -> SegmentList {
    RuleSegmenter.segment(text)
}
