use std::thread;
use std::time::Duration;

use thiserror::Error;
use ureq::{Agent, ResponseExt};
use url::Url;

const MAX_PAGE_BYTES: u64 = 50 * 1024 * 1024;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FetchError {
    #[error("invalid URL `{0}`")]
    InvalidUrl(String),
    #[error("reference unavailable: {0}")]
    Unavailable(String),
    #[error("content type `{0}` is not HTML")]
    NotHtml(String),
    #[error("fetch timed out after {0} ms")]
    Timeout(u64),
    #[error("network access to {0} refused in offline mode")]
    Offline(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fetched {
    pub final_url: String,
    pub html: String,
}

/// Downloads reference pages. `file:` URLs are read from disk, which makes
/// the whole pipeline usable without network access.
#[derive(Debug, Clone)]
pub struct Fetcher {
    agent: Agent,
    timeout: Duration,
    offline: bool,
}

impl Default for Fetcher {
    fn default() -> Self {
        Fetcher::new(Duration::from_secs(30), false)
    }
}

impl Fetcher {
    pub fn new(timeout: Duration, offline: bool) -> Self {
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .max_redirects(10)
            .user_agent("prove/0.1")
            .build()
            .into();
        Fetcher {
            agent,
            timeout,
            offline,
        }
    }

    pub fn fetch(&self, url: &str) -> Result<Fetched, FetchError> {
        let parsed = Url::parse(url).map_err(|_| FetchError::InvalidUrl(url.to_owned()))?;
        match parsed.scheme() {
            "file" => read_file_url(&parsed, url),
            "http" | "https" if parsed.host_str().is_some() => {
                if self.offline {
                    return Err(FetchError::Offline(url.to_owned()));
                }
                self.fetch_http(url)
            }
            _ => Err(FetchError::InvalidUrl(url.to_owned())),
        }
    }

    fn fetch_http(&self, url: &str) -> Result<Fetched, FetchError> {
        let timeout_ms = self.timeout.as_millis() as u64;
        let mut response = self.agent.get(url).call().map_err(|e| match e {
            ureq::Error::Timeout(_) => FetchError::Timeout(timeout_ms),
            ureq::Error::BadUri(_) => FetchError::InvalidUrl(url.to_owned()),
            other => FetchError::Unavailable(other.to_string()),
        })?;
        let status = response.status().as_u16();
        if status >= 400 {
            return Err(FetchError::Unavailable(format!("HTTP {status}")));
        }
        let final_url = response.get_uri().to_string();
        let content_type = response
            .headers()
            .get("content-type")
            .and_then(|v| v.to_str().ok())
            .unwrap_or("")
            .to_ascii_lowercase();
        let mime = content_type.split(';').next().unwrap_or("").trim();
        if !mime.is_empty() && mime != "text/html" && mime != "application/xhtml+xml" {
            return Err(FetchError::NotHtml(mime.to_owned()));
        }
        let html = response
            .body_mut()
            .with_config()
            .limit(MAX_PAGE_BYTES)
            .lossy_utf8(true)
            .read_to_string()
            .map_err(|e| match e {
                ureq::Error::Timeout(_) => FetchError::Timeout(timeout_ms),
                other => FetchError::Unavailable(other.to_string()),
            })?;
        Ok(Fetched { final_url, html })
    }

    /// Fetches every URL with at most `max_in_flight` downloads running at
    /// once. Results are in input order.
    pub fn fetch_many(&self, urls: &[String], max_in_flight: usize) -> Vec<Result<Fetched, FetchError>> {
        let mut out = Vec::with_capacity(urls.len());
        for wave in urls.chunks(max_in_flight.max(1)) {
            let results: Vec<_> = thread::scope(|s| {
                let handles: Vec<_> = wave.iter().map(|u| s.spawn(|| self.fetch(u))).collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("fetch worker panicked"))
                    .collect()
            });
            out.extend(results);
        }
        out
    }
}

fn read_file_url(parsed: &Url, original: &str) -> Result<Fetched, FetchError> {
    let path = parsed
        .to_file_path()
        .map_err(|_| FetchError::InvalidUrl(original.to_owned()))?;
    let bytes = std::fs::read(&path)
        .map_err(|e| FetchError::Unavailable(format!("{}: {e}", path.display())))?;
    Ok(Fetched {
        final_url: original.to_owned(),
        html: String::from_utf8_lossy(&bytes).into_owned(),
    })
}
