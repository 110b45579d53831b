//! Embedding providers available to the CLI: the deterministic in-process
//! mock and a JSON-over-HTTP client for OpenAI-style embedding endpoints.
//!
//! Wire contract: `POST {"model": ..., "input": [prompt, ...]}` answered by
//! `{"data": [{"index": i, "embedding": [f64, ...]}, ...]}`. Responses may
//! arrive in any order; items are restored to input order by `index`.

use crate::config::ProviderConfig;
use anyhow::Context;
use mvmol_core::views::{BackendError, EmbeddingBackend, MockBackend};
use serde::{Deserialize, Serialize};
use std::time::Duration;

pub struct HttpBackend {
    agent: ureq::Agent,
    url: String,
    model: String,
    token: Option<String>,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    input: &'a [&'a str],
}

#[derive(Deserialize)]
struct WireItem {
    index: usize,
    embedding: Vec<f64>,
}

#[derive(Deserialize)]
struct WireResponse {
    data: Vec<WireItem>,
}

impl HttpBackend {
    pub fn new(url: String, model: String, token: Option<String>) -> HttpBackend {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(60)))
            .build();
        HttpBackend {
            agent: config.new_agent(),
            url,
            model,
            token,
        }
    }
}

fn excerpt(body: &str) -> String {
    const LIMIT: usize = 200;
    if body.len() <= LIMIT {
        body.to_string()
    } else {
        let mut end = LIMIT;
        while !body.is_char_boundary(end) {
            end -= 1;
        }
        format!("{}…", &body[..end])
    }
}

impl EmbeddingBackend for HttpBackend {
    fn provider_id(&self) -> &str {
        &self.url
    }

    fn model_id(&self) -> &str {
        &self.model
    }

    fn embed_batch(&self, prompts: &[&str]) -> Result<Vec<Vec<f64>>, BackendError> {
        let payload = serde_json::to_vec(&WireRequest {
            model: &self.model,
            input: prompts,
        })
        .map_err(|e| BackendError::Malformed(format!("serializing the request: {e}")))?;
        let mut request = self
            .agent
            .post(&self.url)
            .header("content-type", "application/json");
        if let Some(token) = &self.token {
            request = request.header("authorization", format!("Bearer {token}"));
        }
        let mut response = request
            .send(&payload[..])
            .map_err(|e| BackendError::Unreachable(e.to_string()))?;
        let status = response.status().as_u16();
        if status == 429 {
            let retry_after_ms = response
                .headers()
                .get("retry-after")
                .and_then(|v| v.to_str().ok())
                .and_then(|s| s.trim().parse::<u64>().ok())
                .map(|secs| secs * 1000);
            return Err(BackendError::RateLimited { retry_after_ms });
        }
        if !(200..300).contains(&status) {
            let body = response.body_mut().read_to_string().unwrap_or_default();
            return Err(BackendError::Remote {
                status,
                body_excerpt: excerpt(&body),
            });
        }
        let parsed: WireResponse = response
            .body_mut()
            .read_json()
            .map_err(|e| BackendError::Malformed(format!("response is not valid JSON: {e}")))?;
        let mut out: Vec<Option<Vec<f64>>> = vec![None; prompts.len()];
        for item in parsed.data {
            let slot = out.get_mut(item.index).ok_or_else(|| {
                BackendError::Malformed(format!(
                    "embedding index {} out of range for {} inputs",
                    item.index,
                    prompts.len()
                ))
            })?;
            if slot.is_some() {
                return Err(BackendError::Malformed(format!(
                    "duplicate embedding index {}",
                    item.index
                )));
            }
            *slot = Some(item.embedding);
        }
        out.into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| BackendError::Malformed(format!("missing embedding for input {i}")))
            })
            .collect()
    }
}

/// Build the embedding backend selected by the run configuration. HTTP
/// credentials are read from the environment variable the configuration
/// names; the secret itself never appears in a config file.
pub fn build_backend(provider: &ProviderConfig) -> anyhow::Result<Box<dyn EmbeddingBackend>> {
    match provider {
        ProviderConfig::Mock { dim, seed, .. } => Ok(Box::new(MockBackend::new(*dim, *seed))),
        ProviderConfig::Http {
            url,
            model,
            auth_env,
            ..
        } => {
            let token = match auth_env {
                Some(name) => Some(std::env::var(name).with_context(|| {
                    format!("environment variable {name} (named by provider.auth_env) is not set")
                })?),
                None => None,
            };
            Ok(Box::new(HttpBackend::new(
                url.clone(),
                model.clone(),
                token,
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{Read, Write};
    use std::net::TcpListener;

    fn canned(status: u16, reason: &str, extra: &[(&str, &str)], body: &str) -> String {
        let mut response = format!("HTTP/1.1 {status} {reason}\r\n");
        for (k, v) in extra {
            response.push_str(&format!("{k}: {v}\r\n"));
        }
        response.push_str(&format!(
            "content-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
            body.len()
        ));
        response
    }

    fn find_subslice(haystack: &[u8], needle: &[u8]) -> Option<usize> {
        haystack.windows(needle.len()).position(|w| w == needle)
    }

    /// One-shot HTTP server: accepts a single connection, reads one full
    /// request, replies with `response`, and hands the raw request back.
    fn serve_once(response: String) -> (String, std::thread::JoinHandle<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let handle = std::thread::spawn(move || {
            let (mut stream, _) = listener.accept().unwrap();
            let mut buf = Vec::new();
            let mut tmp = [0u8; 4096];
            loop {
                let n = stream.read(&mut tmp).unwrap();
                if n == 0 {
                    break;
                }
                buf.extend_from_slice(&tmp[..n]);
                if let Some(pos) = find_subslice(&buf, b"\r\n\r\n") {
                    let headers = String::from_utf8_lossy(&buf[..pos]).to_string();
                    let content_length = headers
                        .lines()
                        .find_map(|l| {
                            let (k, v) = l.split_once(':')?;
                            k.eq_ignore_ascii_case("content-length")
                                .then(|| v.trim().parse::<usize>().ok())
                                .flatten()
                        })
                        .unwrap_or(0);
                    if buf.len() >= pos + 4 + content_length {
                        break;
                    }
                }
            }
            stream.write_all(response.as_bytes()).unwrap();
            stream.flush().unwrap();
            String::from_utf8_lossy(&buf).to_string()
        });
        (format!("http://{addr}/v1/embeddings"), handle)
    }

    #[test]
    fn restores_order_by_index_and_sends_contract_fields() {
        let body =
            r#"{"data":[{"index":1,"embedding":[2.0,2.5]},{"index":0,"embedding":[1.0,1.5]}]}"#;
        let (url, server) = serve_once(canned(200, "OK", &[], body));
        let backend = HttpBackend::new(url, "text-embed-1".into(), Some("sesame".into()));
        let vectors = backend.embed_batch(&["a", "b"]).unwrap();
        assert_eq!(vectors, vec![vec![1.0, 1.5], vec![2.0, 2.5]]);
        let request = server.join().unwrap();
        assert!(request.contains(r#""model":"text-embed-1""#), "{request}");
        assert!(request.contains(r#""input":["a","b"]"#), "{request}");
        assert!(
            request
                .to_ascii_lowercase()
                .contains("authorization: bearer sesame"),
            "{request}"
        );
    }

    #[test]
    fn http_429_maps_to_rate_limited_with_retry_after() {
        let (url, server) = serve_once(canned(
            429,
            "Too Many Requests",
            &[("retry-after", "2")],
            "{}",
        ));
        let backend = HttpBackend::new(url, "m".into(), None);
        let err = backend.embed_batch(&["a"]).unwrap_err();
        match err {
            BackendError::RateLimited { retry_after_ms } => {
                assert_eq!(retry_after_ms, Some(2000));
            }
            other => panic!("expected RateLimited, got {other:?}"),
        }
        server.join().unwrap();
    }

    #[test]
    fn http_500_maps_to_remote_with_body_excerpt() {
        let (url, server) = serve_once(canned(500, "Internal Server Error", &[], "boom"));
        let backend = HttpBackend::new(url, "m".into(), None);
        let err = backend.embed_batch(&["a"]).unwrap_err();
        match err {
            BackendError::Remote {
                status,
                body_excerpt,
            } => {
                assert_eq!(status, 500);
                assert!(body_excerpt.contains("boom"));
            }
            other => panic!("expected Remote, got {other:?}"),
        }
        server.join().unwrap();
    }

    #[test]
    fn duplicate_index_is_malformed() {
        let body = r#"{"data":[{"index":0,"embedding":[1.0]},{"index":0,"embedding":[2.0]}]}"#;
        let (url, server) = serve_once(canned(200, "OK", &[], body));
        let backend = HttpBackend::new(url, "m".into(), None);
        let err = backend.embed_batch(&["a", "b"]).unwrap_err();
        assert!(matches!(err, BackendError::Malformed(_)), "{err:?}");
        server.join().unwrap();
    }

    #[test]
    fn missing_index_is_malformed() {
        let body = r#"{"data":[{"index":0,"embedding":[1.0]}]}"#;
        let (url, server) = serve_once(canned(200, "OK", &[], body));
        let backend = HttpBackend::new(url, "m".into(), None);
        let err = backend.embed_batch(&["a", "b"]).unwrap_err();
        match err {
            BackendError::Malformed(msg) => assert!(msg.contains("missing"), "{msg}"),
            other => panic!("expected Malformed, got {other:?}"),
        }
        server.join().unwrap();
    }

    #[test]
    fn refused_connection_is_unreachable() {
        let port = {
            let listener = TcpListener::bind("127.0.0.1:0").unwrap();
            listener.local_addr().unwrap().port()
        };
        let backend = HttpBackend::new(
            format!("http://127.0.0.1:{port}/v1/embeddings"),
            "m".into(),
            None,
        );
        let err = backend.embed_batch(&["a"]).unwrap_err();
        assert!(matches!(err, BackendError::Unreachable(_)), "{err:?}");
    }

    #[test]
    fn build_backend_mock_and_missing_env() {
        let mock = crate::config::ProviderConfig::Mock {
            dim: 8,
            seed: 4,
            batch_size: 16,
        };
        let backend = build_backend(&mock).unwrap();
        assert_eq!(backend.provider_id(), "mock");
        let http = crate::config::ProviderConfig::Http {
            url: "http://localhost/v1".into(),
            model: "m".into(),
            auth_env: Some("MVMOL_TEST_DEFINITELY_UNSET_VAR".into()),
            batch_size: 16,
        };
        let err = build_backend(&http)
            .err()
            .expect("an unset auth_env variable must fail backend construction");
        assert!(err.to_string().contains("MVMOL_TEST_DEFINITELY_UNSET_VAR"));
    }
}
