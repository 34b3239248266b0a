//! Clean an HTML page, split it into sentences and build sliding windows.
//!
//! Run with `cargo run --example extract_passages [page.html]`.

use prove::retrieval::{clean_html, segment, window, WindowConfig};

const DEFAULT: &str = "<html><body><nav>Home | News</nav>\
<p><span>Dr. Ada</span> <span>Lovelace wrote the first program.</span></p>\
<p>It ran on the Analytical Engine. The engine was never built</p>\
<script>track()</script></body></html>";

fn main() {
    let html = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path).expect("readable file"),
        None => DEFAULT.to_owned(),
    };
    let text = clean_html(&html);
    println!("clean text: {text}\n");

    let segments = segment(&text);
    for (i, s) in segments.iter().enumerate() {
        println!("segment {i}: {s}");
    }

    let cfg = WindowConfig::parse("1,2").unwrap();
    println!();
    for p in window(&segments, &cfg) {
        println!("n={} [{}..={}] {}", p.window_size(), p.start_index(), p.end_index(), p.text());
    }
}
