//! From a reference to the passage set: fetch, clean, segment, window.

mod clean;
mod fetch;
mod segment;
mod window;

use serde::Serialize;

use crate::kg::{Passage, Reference, ReferenceSource};

pub use clean::{clean_html, ends_sentence, fix_spacing};
pub use fetch::{FetchError, Fetched, Fetcher};
pub use segment::{is_guarded, segment, RuleSegmenter, SegmentList, Segmenter};
pub use window::{window, WindowConfig, WindowConfigError};

/// Text pulled out of one reference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extraction {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_url: Option<String>,
    pub segments: SegmentList,
    pub passages: Vec<Passage>,
}

/// Segments and windows the text of a reference.
///
/// URL references use their stored HTML when present and are fetched
/// otherwise. Document references skip HTML cleaning and go straight to
/// segmentation.
pub fn extract(
    reference: &Reference,
    fetcher: &Fetcher,
    segmenter: &dyn Segmenter,
    windows: &WindowConfig,
) -> Result<Extraction, FetchError> {
    let (final_url, text) = match &reference.source {
        ReferenceSource::Document(text) => (None, text.clone()),
        ReferenceSource::Url(url) => match &reference.html {
            Some(html) => (
                Some(reference.final_url.clone().unwrap_or_else(|| url.clone())),
                clean_html(html),
            ),
            None => {
                let fetched = fetcher.fetch(url)?;
                (Some(fetched.final_url), clean_html(&fetched.html))
            }
        },
    };
    let segments = segmenter.segment(&text);
    let passages = window(&segments, windows);
    Ok(Extraction {
        final_url,
        segments,
        passages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn document_reference_skips_html_cleaning() {
        let r = Reference::document("d", "<b>Not markup.</b> Second one.");
        let e = extract(&r, &Fetcher::default(), &RuleSegmenter, &WindowConfig::default()).unwrap();
        assert_eq!(e.segments.as_slice(), ["<b>Not markup.</b> Second one."]);
        let r = Reference::document("d", "First one. Second one.");
        let e = extract(&r, &Fetcher::default(), &RuleSegmenter, &WindowConfig::default()).unwrap();
        assert_eq!(e.passages.len(), 3);
        assert!(e.final_url.is_none());
    }

    #[test]
    fn stored_html_is_used_without_fetching() {
        let r = Reference::url("r", "http://unreachable.invalid/")
            .with_fetched("http://unreachable.invalid/final", "<p>Stored page</p>");
        let offline = Fetcher::new(std::time::Duration::from_secs(1), true);
        let e = extract(&r, &offline, &RuleSegmenter, &WindowConfig::default()).unwrap();
        assert_eq!(e.segments.as_slice(), ["Stored page."]);
        assert_eq!(e.final_url.as_deref(), Some("http://unreachable.invalid/final"));
    }
}
