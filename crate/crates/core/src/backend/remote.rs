use std::thread;
use std::time::Duration;

use rand::Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use ureq::Agent;

use super::protocol::{
    RelevanceRequest, RelevanceResponse, StanceRequest, StanceResponse, VerbaliseRequest,
    VerbaliseResponse, RELEVANCE_PATH, STANCE_PATH, VERBALISE_PATH,
};
use super::{BackendError, Scorer, MAX_BATCH};
use crate::kg::Labels;

/// HTTP client for a model server.
///
/// Batches larger than [`MAX_BATCH`] are split and sent with at most
/// `max_in_flight` requests outstanding. Results are reassembled in input
/// order. Transport failures are retried once after a short random delay;
/// timeouts and protocol errors are not retried.
#[derive(Debug, Clone)]
pub struct RemoteScorer {
    endpoint: url::Url,
    agent: Agent,
    timeout: Duration,
    max_in_flight: usize,
}

impl RemoteScorer {
    pub fn new(endpoint: &str, timeout: Duration, max_in_flight: usize) -> Result<Self, BackendError> {
        let mut endpoint = url::Url::parse(endpoint)
            .map_err(|e| BackendError::Config(format!("bad endpoint `{endpoint}`: {e}")))?;
        if !matches!(endpoint.scheme(), "http" | "https") {
            return Err(BackendError::Config(format!(
                "endpoint scheme must be http or https, got `{}`",
                endpoint.scheme()
            )));
        }
        if !endpoint.path().ends_with('/') {
            let p = format!("{}/", endpoint.path());
            endpoint.set_path(&p);
        }
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(RemoteScorer {
            endpoint,
            agent,
            timeout,
            max_in_flight: max_in_flight.max(1),
        })
    }

    fn post<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        path: &str,
        body: &Req,
    ) -> Result<Resp, BackendError> {
        let url = self
            .endpoint
            .join(path)
            .map_err(|e| BackendError::Config(e.to_string()))?;
        match self.post_once(url.as_str(), body) {
            Err(Attempt::Transport(first)) => {
                let jitter = rand::rng().random_range(50..150);
                thread::sleep(Duration::from_millis(jitter));
                self.post_once(url.as_str(), body).map_err(|e| match e {
                    Attempt::Transport(msg) => {
                        BackendError::Unavailable(format!("{first}; retry: {msg}"))
                    }
                    Attempt::Fatal(err) => err,
                })
            }
            Err(Attempt::Fatal(err)) => Err(err),
            Ok(v) => Ok(v),
        }
    }

    fn post_once<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        url: &str,
        body: &Req,
    ) -> Result<Resp, Attempt> {
        let mut response = self.agent.post(url).send_json(body).map_err(|e| match e {
            ureq::Error::Timeout(_) => {
                Attempt::Fatal(BackendError::Timeout(self.timeout.as_millis() as u64))
            }
            ureq::Error::Json(e) => Attempt::Fatal(BackendError::Protocol(e.to_string())),
            other => Attempt::Transport(other.to_string()),
        })?;
        let status = response.status().as_u16();
        if status >= 500 {
            return Err(Attempt::Fatal(BackendError::Unavailable(format!(
                "{url} answered HTTP {status}"
            ))));
        }
        if status != 200 {
            return Err(Attempt::Fatal(BackendError::Protocol(format!(
                "{url} answered HTTP {status}"
            ))));
        }
        let text = response.body_mut().read_to_string().map_err(|e| match e {
            ureq::Error::Timeout(_) => {
                Attempt::Fatal(BackendError::Timeout(self.timeout.as_millis() as u64))
            }
            other => Attempt::Transport(other.to_string()),
        })?;
        serde_json::from_str(&text)
            .map_err(|e| Attempt::Fatal(BackendError::Protocol(format!("{url}: {e}"))))
    }

    /// Splits `items` into batches, runs `call` on each with bounded
    /// concurrency and concatenates the results in input order.
    fn batched<T, F>(&self, items: &[String], call: F) -> Result<Vec<T>, BackendError>
    where
        T: Send,
        F: Fn(&[String]) -> Result<Vec<T>, BackendError> + Sync,
    {
        let batches: Vec<&[String]> = items.chunks(MAX_BATCH).collect();
        let mut out = Vec::with_capacity(items.len());
        for wave in batches.chunks(self.max_in_flight) {
            let results: Vec<Result<Vec<T>, BackendError>> = thread::scope(|s| {
                let handles: Vec<_> = wave.iter().map(|b| s.spawn(|| call(b))).collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("backend worker panicked"))
                    .collect()
            });
            for (batch, r) in wave.iter().zip(results) {
                let r = r?;
                if r.len() != batch.len() {
                    return Err(BackendError::Protocol(format!(
                        "batch of {} items answered with {} results",
                        batch.len(),
                        r.len()
                    )));
                }
                out.extend(r);
            }
        }
        Ok(out)
    }
}

enum Attempt {
    Transport(String),
    Fatal(BackendError),
}

impl Scorer for RemoteScorer {
    fn verbalise(&self, labels: &Labels) -> Result<String, BackendError> {
        let resp: VerbaliseResponse = self.post(
            VERBALISE_PATH,
            &VerbaliseRequest {
                subject: labels.subject.clone(),
                predicate: labels.predicate.clone(),
                object: labels.object.clone(),
            },
        )?;
        Ok(resp.verbalisation)
    }

    fn relevance(&self, claim: &str, passages: &[String]) -> Result<Vec<f64>, BackendError> {
        self.batched(passages, |batch| {
            let resp: RelevanceResponse = self.post(
                RELEVANCE_PATH,
                &RelevanceRequest {
                    claim: claim.to_owned(),
                    passages: batch.to_vec(),
                },
            )?;
            Ok(resp.scores)
        })
    }

    fn stance(&self, claim: &str, evidence: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
        self.batched(evidence, |batch| {
            let resp: StanceResponse = self.post(
                STANCE_PATH,
                &StanceRequest {
                    claim: claim.to_owned(),
                    evidence: batch.to_vec(),
                },
            )?;
            Ok(resp.distributions)
        })
    }

    fn name(&self) -> &str {
        self.endpoint.as_str()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_gets_a_trailing_slash() {
        let r = RemoteScorer::new("http://localhost:8080/api", Duration::from_secs(1), 2).unwrap();
        assert_eq!(r.endpoint.join("stance").unwrap().path(), "/api/stance");
    }

    #[test]
    fn non_http_endpoint_is_rejected() {
        assert!(RemoteScorer::new("ftp://x", Duration::from_secs(1), 1).is_err());
        assert!(RemoteScorer::new("not a url", Duration::from_secs(1), 1).is_err());
    }
}
