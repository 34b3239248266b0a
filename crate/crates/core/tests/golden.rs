mod common;

#[test]
fn html_fixtures_match_pinned_extraction() {
    let n = common::check_goldens().unwrap();
    assert!(n >= 10, "only {n} fixtures");
}

#[test]
fn rendering_is_stable_across_runs() {
    for name in common::html_fixtures() {
        let html = std::fs::read_to_string(common::fixture(&format!("html/{name}.html"))).unwrap();
        assert_eq!(common::render_extraction(&html), common::render_extraction(&html));
    }
}

#[test]
fn verdict_report_matches_pinned_json() {
    use prove::backend::BaselineScorer;
    use prove::kg::{AggregatorKind, Reference, Triple};
    use prove::pipeline::{verify, PipelineConfig};
    use prove::retrieval::{Fetcher, RuleSegmenter};

    let triple: Triple = serde_json::from_str(
        &std::fs::read_to_string(common::fixture("triples/billington.json")).unwrap(),
    )
    .unwrap();
    let html = std::fs::read_to_string(common::fixture("html/06_librarian.html")).unwrap();
    let url = "https://www.loc.gov/about/about-the-librarian/previous-librarians-of-congress/";
    let page = Reference::url("ref-1", url).with_fetched(url, html);
    let report = verify(
        &triple,
        &page,
        None,
        &PipelineConfig::default(),
        &BaselineScorer,
        &Fetcher::new(std::time::Duration::from_secs(1), true),
        &RuleSegmenter,
        &[AggregatorKind::WeightedSum, AggregatorKind::Malon],
        None,
    )
    .unwrap();
    let got = serde_json::to_string_pretty(&report).unwrap() + "\n";
    let path = common::fixture("golden/billington_verdict.json");
    if std::env::var("PROVE_BLESS").is_ok_and(|v| v == "1") {
        std::fs::write(&path, &got).unwrap();
    }
    assert_eq!(got, std::fs::read_to_string(&path).unwrap());
}
