#![allow(dead_code)]

use std::path::{Path, PathBuf};

use prove::retrieval::{clean_html, extract, Fetcher, RuleSegmenter, WindowConfig};
use prove::kg::Reference;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture(rel: &str) -> PathBuf {
    fixtures().join(rel)
}

/// HTML fixture names, sorted.
pub fn html_fixtures() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(fixture("html"))
        .expect("fixture dir")
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".html"))
        .map(|n| n.trim_end_matches(".html").to_owned())
        .collect();
    names.sort();
    names
}

/// Text rendering of what extraction produces for one HTML page.
pub fn render_extraction(html: &str) -> String {
    let r = Reference::url("golden", "file:///golden.html").with_fetched("file:///golden.html", html);
    let offline = Fetcher::new(std::time::Duration::from_secs(1), true);
    let ex = extract(&r, &offline, &RuleSegmenter, &WindowConfig::default()).expect("stored html");
    let mut s = format!("# text\n{}\n# segments {}\n", clean_html(html), ex.segments.len());
    for (i, seg) in ex.segments.iter().enumerate() {
        s.push_str(&format!("{i}\t{seg}\n"));
    }
    s.push_str(&format!("# passages {}\n", ex.passages.len()));
    for p in &ex.passages {
        s.push_str(&format!(
            "n={} {}..{}\t{}\n",
            p.window_size(),
            p.start_index(),
            p.end_index(),
            p.text()
        ));
    }
    s
}

/// Compares every HTML fixture with its pinned rendering. With
/// `PROVE_BLESS=1` the pinned files are rewritten instead.
pub fn check_goldens() -> Result<usize, String> {
    let bless = std::env::var("PROVE_BLESS").is_ok_and(|v| v == "1");
    let names = html_fixtures();
    let mut failures = Vec::new();
    for name in &names {
        let html = std::fs::read_to_string(fixture(&format!("html/{name}.html"))).unwrap();
        let got = render_extraction(&html);
        let path = fixture(&format!("golden/{name}.txt"));
        if bless {
            std::fs::write(&path, &got).unwrap();
            continue;
        }
        match std::fs::read(&path) {
            Ok(want) if want == got.as_bytes() => {}
            Ok(_) => failures.push(format!("{name}: output differs from pinned file")),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    if failures.is_empty() {
        Ok(names.len())
    } else {
        Err(failures.join("; "))
    }
}

pub mod stub {
    //! A tiny HTTP/1.1 server for tests. Each connection is answered by a
    //! handler and then closed.

    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::{SocketAddr, TcpListener, TcpStream};
    use std::sync::{Arc, Mutex};
    use std::thread;
    use std::time::Duration;

    #[derive(Debug, Clone)]
    pub struct Request {
        pub method: String,
        pub path: String,
        pub body: String,
    }

    #[derive(Debug, Clone)]
    pub struct Response {
        pub status: u16,
        pub headers: Vec<(String, String)>,
        pub body: String,
        pub delay: Duration,
    }

    impl Response {
        pub fn json(body: impl Into<String>) -> Self {
            Response::with_type(200, "application/json", body)
        }

        pub fn html(body: impl Into<String>) -> Self {
            Response::with_type(200, "text/html; charset=utf-8", body)
        }

        pub fn with_type(status: u16, ct: &str, body: impl Into<String>) -> Self {
            Response {
                status,
                headers: vec![("Content-Type".into(), ct.into())],
                body: body.into(),
                delay: Duration::ZERO,
            }
        }

        pub fn status(status: u16) -> Self {
            Response::with_type(status, "text/plain", "")
        }

        pub fn redirect(location: &str) -> Self {
            let mut r = Response::status(302);
            r.headers.push(("Location".into(), location.into()));
            r
        }

        pub fn delayed(mut self, d: Duration) -> Self {
            self.delay = d;
            self
        }
    }

    pub struct Server {
        pub addr: SocketAddr,
        pub requests: Arc<Mutex<Vec<Request>>>,
    }

    impl Server {
        pub fn url(&self, path: &str) -> String {
            format!("http://{}{}", self.addr, path)
        }

        pub fn requests(&self) -> Vec<Request> {
            self.requests.lock().unwrap().clone()
        }
    }

    pub fn serve<F>(handler: F) -> Server
    where
        F: Fn(&Request) -> Response + Send + Sync + 'static,
    {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let requests = Arc::new(Mutex::new(Vec::new()));
        let log = Arc::clone(&requests);
        let handler = Arc::new(handler);
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { continue };
                let handler = Arc::clone(&handler);
                let log = Arc::clone(&log);
                thread::spawn(move || {
                    let _ = answer(stream, &*handler, &log);
                });
            }
        });
        Server { addr, requests }
    }

    fn answer(
        stream: TcpStream,
        handler: &(dyn Fn(&Request) -> Response + Send + Sync),
        log: &Mutex<Vec<Request>>,
    ) -> std::io::Result<()> {
        let mut reader = BufReader::new(stream.try_clone()?);
        let mut line = String::new();
        reader.read_line(&mut line)?;
        let mut parts = line.split_whitespace();
        let method = parts.next().unwrap_or("").to_owned();
        let path = parts.next().unwrap_or("").to_owned();
        let mut len = 0usize;
        loop {
            let mut h = String::new();
            if reader.read_line(&mut h)? == 0 || h == "\r\n" {
                break;
            }
            if let Some((k, v)) = h.split_once(':') {
                if k.eq_ignore_ascii_case("content-length") {
                    len = v.trim().parse().unwrap_or(0);
                }
            }
        }
        let mut body = vec![0; len];
        reader.read_exact(&mut body)?;
        let req = Request {
            method,
            path,
            body: String::from_utf8_lossy(&body).into_owned(),
        };
        log.lock().unwrap().push(req.clone());
        let resp = handler(&req);
        thread::sleep(resp.delay);
        let mut out = stream;
        let mut head = format!("HTTP/1.1 {} X\r\nContent-Length: {}\r\nConnection: close\r\n", resp.status, resp.body.len());
        for (k, v) in &resp.headers {
            head.push_str(&format!("{k}: {v}\r\n"));
        }
        head.push_str("\r\n");
        out.write_all(head.as_bytes())?;
        out.write_all(resp.body.as_bytes())?;
        out.flush()
    }
}

pub mod synthetic {
    //! Feature vectors whose labels follow a fixed threshold rule on the
    //! top-ranked evidence slot: SUPP when its support probability exceeds
    //! one half, REF when its refute probability does, NEI otherwise.

    use prove::kg::{Evidence, Passage, ScoredPassage, Stance, StanceDistribution};
    use prove::verification::{features_from_evidence, FeatureVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub fn rule(f: &FeatureVector) -> Stance {
        let v = f.values();
        if v[1] > 0.5 {
            Stance::Supp
        } else if v[2] > 0.5 {
            Stance::Ref
        } else {
            Stance::Nei
        }
    }

    fn distribution(rng: &mut ChaCha8Rng) -> StanceDistribution {
        let w: [f64; 3] = [rng.random::<f64>().powi(2), rng.random::<f64>().powi(2), rng.random::<f64>().powi(2)];
        let t: f64 = w.iter().sum::<f64>().max(1e-9);
        let (s, r) = (w[0] / t, w[1] / t);
        StanceDistribution::new(s, r, (1.0 - s - r).max(0.0)).unwrap()
    }

    pub fn dataset(n: usize, seed: u64) -> Vec<(FeatureVector, Stance)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let k = rng.random_range(1..=5);
                let ev: Vec<Evidence> = (0..k)
                    .map(|i| {
                        let len = rng.random_range(20..3000);
                        let p = Passage::new("x".repeat(len), 1, i, i).unwrap();
                        let rho = rng.random_range(-1.0..=1.0);
                        Evidence::new(ScoredPassage::new(p, rho).unwrap(), distribution(&mut rng))
                    })
                    .collect();
                let f = features_from_evidence(&ev);
                let y = rule(&f);
                (f, y)
            })
            .collect()
    }

    /// The dataset as `prove train --features` input.
    pub fn to_jsonl(rows: &[(FeatureVector, Stance)]) -> String {
        rows.iter()
            .map(|(f, y)| {
                format!(
                    "{}\n",
                    serde_json::json!({"features": f.values().to_vec(), "label": y})
                )
            })
            .collect()
    }
}
