mod common;

use proptest::prelude::*;

use prove::evaluation::{
    majority_vote, read_wtr, roc_auc, write_wtr, Vote, WtrRecord,
};
use prove::kg::{Evidence, Passage, ScoredPassage, StanceDistribution};
use prove::retrieval::{clean_html, is_guarded, segment, window, SegmentList, WindowConfig};
use prove::selection::{dedup_overlaps, select_evidence};
use prove::verification::{
    features_from_evidence, kfold_indices, AggregationModel, ForestParams, RandomForest,
};

fn word() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z]{1,8}",
        "[A-Z][a-z]{0,7}",
        "[0-9]{1,4}",
        Just("Dr.".to_owned()),
        Just("U.S.".to_owned()),
        Just("H.".to_owned()),
        Just("e.g.".to_owned()),
        "[A-Z][a-z]{0,6}[.!?]",
        "[a-z]{1,6}[.,;]",
        Just("\"Yes.\"".to_owned()),
    ]
}

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec(word(), 0..40).prop_map(|ws| ws.join(" "))
}

fn html_block() -> impl Strategy<Value = String> {
    let inner = prop::collection::vec(word(), 1..10).prop_map(|ws| ws.join(" "));
    (
        prop::sample::select(vec!["p", "div", "li", "span", "h2", "td", "nav", "script", "b"]),
        inner,
    )
        .prop_map(|(tag, body)| format!("<{tag}>{body}</{tag}>"))
}

fn html() -> impl Strategy<Value = String> {
    prop::collection::vec(html_block(), 0..12).prop_map(|bs| format!("<html><body>{}</body></html>", bs.join("\n")))
}

fn scored(max: usize) -> impl Strategy<Value = Vec<ScoredPassage>> {
    (1usize..=max).prop_flat_map(|n_seg| {
        let spans: Vec<(usize, usize)> = (1..=2)
            .flat_map(|w| (0..=n_seg.saturating_sub(w)).filter(move |_| w <= n_seg).map(move |i| (w, i)))
            .collect();
        let len = spans.len();
        (Just(spans), prop::collection::vec(-100i32..=100, len))
    })
    .prop_map(|(spans, rs)| {
        spans
            .into_iter()
            .zip(rs)
            .map(|((w, i), r)| {
                let p = Passage::new(format!("p{i}w{w}"), w, i, i + w - 1).unwrap();
                ScoredPassage::new(p, r as f64 / 100.0).unwrap()
            })
            .collect()
    })
}

fn distribution() -> impl Strategy<Value = StanceDistribution> {
    (1u32..100, 1u32..100, 1u32..100).prop_map(|(a, b, c)| {
        let t = (a + b + c) as f64;
        let (s, r) = (a as f64 / t, b as f64 / t);
        StanceDistribution::new(s, r, 1.0 - s - r).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn windowing_law(segs in prop::collection::vec("[a-z]{1,5}", 0..30)) {
        let list = SegmentList::new(segs.clone());
        let ps = window(&list, &WindowConfig::default());
        for n in [1usize, 2] {
            let pn: Vec<&Passage> = ps.iter().filter(|p| p.window_size() == n).collect();
            prop_assert_eq!(pn.len(), (segs.len() + 1).saturating_sub(n));
            for (i, p) in pn.iter().enumerate() {
                prop_assert_eq!(p.start_index(), i);
                prop_assert_eq!(p.end_index(), i + n - 1);
                prop_assert_eq!(p.text(), segs[i..i + n].join(" "));
            }
        }
    }

    #[test]
    fn segmentation_keeps_every_word_and_respects_the_guard(t in text()) {
        let segs = segment(&t);
        let rejoined: Vec<String> = segs.iter().flat_map(|s| s.split_whitespace().map(str::to_owned)).collect();
        let original: Vec<String> = t.split_whitespace().map(str::to_owned).collect();
        prop_assert_eq!(rejoined, original);
        for s in segs.iter() {
            prop_assert!(!s.trim().is_empty());
            let words: Vec<&str> = s.split_whitespace().collect();
            for i in 0..words.len().saturating_sub(1) {
                let w = words[i].trim_end_matches(['"', '\'', ')', ']']);
                let next_capital = words[i + 1]
                    .trim_start_matches(['"', '\'', '(', '['])
                    .chars()
                    .next()
                    .is_some_and(|c| c.is_uppercase() || c.is_ascii_digit());
                if !next_capital {
                    continue;
                }
                prop_assert!(!w.ends_with('!') && !w.ends_with('?'), "missed boundary in {s:?}");
                if w.ends_with('.') && !w.ends_with("..") {
                    let prev = i.checked_sub(1).map(|j| words[j]);
                    prop_assert!(is_guarded(&w[..w.len() - 1], prev), "unguarded boundary in {s:?}");
                }
            }
        }
    }

    #[test]
    fn cleaning_is_idempotent(h in html()) {
        let once = clean_html(&h);
        prop_assert_eq!(clean_html(&once), once.clone());
        prop_assert!(!once.contains('<') || h.contains("&lt;"));
    }

    #[test]
    fn dedup_keeps_only_undominated_passages(ps in scored(8)) {
        let kept = dedup_overlaps(&ps);
        for p in &ps {
            let dominated = ps.iter().any(|q| q.passage().overlaps(p.passage()) && q.relevance() > p.relevance());
            prop_assert_eq!(kept.contains(p), !dominated);
        }
        let e = select_evidence(&kept, 5);
        prop_assert!(e.len() <= 5);
        for w in e.items().windows(2) {
            prop_assert!(w[0].relevance() >= w[1].relevance());
        }
    }

    #[test]
    fn kfold_is_a_partition(n in 2usize..200, k in 2usize..10, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let folds = kfold_indices(n, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        prop_assert_eq!(folds.clone(), kfold_indices(n, k, seed).unwrap());
    }

    #[test]
    fn auc_is_invariant_under_monotone_transforms(
        pairs in prop::collection::vec((-50i32..50, any::<bool>()), 2..60),
    ) {
        let scores: Vec<f64> = pairs.iter().map(|p| p.0 as f64 / 10.0).collect();
        let labels: Vec<bool> = pairs.iter().map(|p| p.1).collect();
        prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
        let a = roc_auc(&scores, &labels).unwrap();
        let shifted: Vec<f64> = scores.iter().map(|s| 3.0 * s.powi(3) + 7.0).collect();
        prop_assert!((a - roc_auc(&shifted, &labels).unwrap()).abs() < 1e-12);
        let flipped: Vec<f64> = scores.iter().map(|s| -s).collect();
        prop_assert!((1.0 - a - roc_auc(&flipped, &labels).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn majority_vote_ignores_order(votes in prop::collection::vec(0u8..4, 1..12), seed in any::<u64>()) {
        let vs: Vec<Vote> = votes.iter().map(|&c| Vote::try_from(c).unwrap()).collect();
        let mut shuffled = vs.clone();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut rng);
        prop_assert_eq!(majority_vote(&vs), majority_vote(&shuffled));
    }

    #[test]
    fn features_ignore_evidence_order(
        rs in prop::collection::vec(-100i32..=100, 0..6),
        ds in prop::collection::vec(distribution(), 6),
        seed in any::<u64>(),
    ) {
        let ev: Vec<Evidence> = rs.iter().enumerate().map(|(i, &r)| {
            let p = Passage::new("x".repeat(i * 500), 1, i, i).unwrap();
            Evidence::new(ScoredPassage::new(p, r as f64 / 100.0).unwrap(), ds[i])
        }).collect();
        let mut shuffled = ev.clone();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut rng);
        let f = features_from_evidence(&ev);
        prop_assert_eq!(f, features_from_evidence(&shuffled));
        prop_assert!(f.values().iter().skip(5 * ev.len().min(5)).all(|&v| v == 0.0));
        prop_assert!(f.values().iter().all(|v| (-1.0..=1.0).contains(v)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn model_file_round_trips(rows in prop::collection::vec((prop::collection::vec(-1.0f64..1.0, 25), 0usize..3), 6..40), seed in any::<u64>()) {
        let x: Vec<Vec<f64>> = rows.iter().map(|r| r.0.clone()).collect();
        let y: Vec<usize> = rows.iter().map(|r| r.1).collect();
        let params = ForestParams { n_trees: 5, max_depth: 4, ..ForestParams::default() };
        let model = AggregationModel::new(RandomForest::fit(&x, &y, 3, &params, seed).unwrap());
        let json = model.to_json();
        let back = AggregationModel::from_json(&json).unwrap();
        prop_assert_eq!(&back, &model);
        prop_assert_eq!(back.to_json(), json);
    }

    #[test]
    fn dataset_file_round_trips(votes in prop::collection::vec(prop::collection::vec(0u8..4, 1..6), 5), label in 0usize..5) {
        let base = std::fs::read_to_string(common::fixture("wtr/five_records.jsonl")).unwrap();
        let mut ds = read_wtr(base.as_bytes()).unwrap();
        for (r, v) in ds.records.iter_mut().zip(&votes) {
            r.t2_annotations.votes = v.iter().map(|&c| Vote::try_from(c).unwrap()).collect();
        }
        ds.records.rotate_left(label);
        let mut buf = Vec::new();
        write_wtr(&ds.records, &mut buf).unwrap();
        let back = read_wtr(buf.as_slice()).unwrap();
        prop_assert_eq!(&back.records, &ds.records);
        let mut again = Vec::new();
        write_wtr(&back.records, &mut again).unwrap();
        prop_assert_eq!(again, buf);
    }
}

#[test]
fn duplicate_records_are_dropped() {
    let base = std::fs::read_to_string(common::fixture("wtr/five_records.jsonl")).unwrap();
    let ds = read_wtr(base.as_bytes()).unwrap();
    let mut recs: Vec<WtrRecord> = ds.records.clone();
    recs.push(ds.records[2].clone());
    let mut buf = Vec::new();
    write_wtr(&recs, &mut buf).unwrap();
    let back = read_wtr(buf.as_slice()).unwrap();
    assert_eq!(back.records, ds.records);
    assert_eq!(back.duplicates_dropped, 1);
}
