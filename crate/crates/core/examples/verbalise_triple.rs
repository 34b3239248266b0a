//! Turn triples into claims: label choice, curator overrides, value
//! formatting and the template fallback.
//!
//! Run with `cargo run --example verbalise_triple`.

use prove::backend::BaselineScorer;
use prove::kg::{ObjectDatatype, Triple, TripleComponent};
use prove::verbalisation::{
    format_datetime, override_verbalisation, quantity_label, select_labels, verbalise, LabelPolicy,
};

fn main() {
    let born = Triple::new(
        "t1",
        TripleComponent::new("Q7186", "Marie Curie").with_aliases(["Maria Skłodowska-Curie"]),
        TripleComponent::new("P569", "date of birth"),
        TripleComponent::new("+1867-11-07T00:00:00Z", format_datetime("+1867-11-07T00:00:00Z").unwrap()),
        ObjectDatatype::Datetime,
    );

    let labels = select_labels(&born, &LabelPolicy::default()).unwrap();
    // The baseline backend has no verbaliser, so the template is used.
    let v = verbalise(&labels, &BaselineScorer).unwrap();
    println!("{:?}: {}", v.origin(), v.text());

    let policy = LabelPolicy::default().with_override("Q7186", "Maria Skłodowska-Curie");
    let labels = select_labels(&born, &policy).unwrap();
    println!("with alias: {}", verbalise(&labels, &BaselineScorer).unwrap().text());

    let o = override_verbalisation("Marie Curie was born on 7 November 1867.", &labels).unwrap();
    println!("{:?}: {}", o.origin(), o.text());

    println!("quantity label: {}", quantity_label("+8848", Some("metre")));
}
