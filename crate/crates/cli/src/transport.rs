//! Moving requests to the service and back. [`HttpTransport`] talks to a real
//! endpoint; [`RecordingTransport`] wraps any transport and keeps a log of
//! every exchange.

use std::sync::{Arc, Mutex};
use std::time::Duration;

use reqwest::blocking::{multipart, Client};
use runlog_service::routes::HttpMethod;
use runlog_service::API_PREFIX;
use thiserror::Error;
use url::Url;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Empty,
    Json(Vec<u8>),
    /// Sent as `multipart/form-data` with a single `file` part.
    File { filename: String, media_type: String, bytes: Vec<u8> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiRequest {
    pub method: HttpMethod,
    /// Relative to the API prefix, query string included.
    pub path: String,
    pub token: Option<String>,
    pub payload: Payload,
}

impl ApiRequest {
    pub fn path_only(&self) -> &str {
        self.path.split('?').next().unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiResponse {
    pub status: u16,
    pub content_type: Option<String>,
    pub body: Vec<u8>,
}

impl ApiResponse {
    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }
}

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("cannot reach {url}: {message}")]
    Unreachable { url: String, message: String },
    #[error("cannot build request: {0}")]
    Build(String),
}

pub trait Transport {
    fn send(&mut self, request: &ApiRequest) -> Result<ApiResponse, TransportError>;
}

impl<T: Transport + ?Sized> Transport for Box<T> {
    fn send(&mut self, request: &ApiRequest) -> Result<ApiResponse, TransportError> {
        (**self).send(request)
    }
}

impl<T: Transport + ?Sized> Transport for &mut T {
    fn send(&mut self, request: &ApiRequest) -> Result<ApiResponse, TransportError> {
        (**self).send(request)
    }
}

pub struct HttpTransport {
    client: Client,
    base: String,
}

impl HttpTransport {
    /// `endpoint` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(endpoint: &Url) -> Result<Self, TransportError> {
        let client = Client::builder()
            .timeout(Duration::from_secs(60))
            .build()
            .map_err(|e| TransportError::Build(e.to_string()))?;
        let base = format!("{}{API_PREFIX}", endpoint.as_str().trim_end_matches('/'));
        Ok(HttpTransport { client, base })
    }
}

impl Transport for HttpTransport {
    fn send(&mut self, request: &ApiRequest) -> Result<ApiResponse, TransportError> {
        let url = format!("{}{}", self.base, request.path);
        let method = match request.method {
            HttpMethod::Get => reqwest::Method::GET,
            HttpMethod::Post => reqwest::Method::POST,
            HttpMethod::Patch => reqwest::Method::PATCH,
            HttpMethod::Delete => reqwest::Method::DELETE,
        };
        let mut builder = self.client.request(method, &url);
        if let Some(token) = &request.token {
            builder = builder.bearer_auth(token);
        }
        builder = match &request.payload {
            Payload::Empty => builder,
            Payload::Json(bytes) => builder.header(reqwest::header::CONTENT_TYPE, "application/json").body(bytes.clone()),
            Payload::File { filename, media_type, bytes } => {
                let part = multipart::Part::bytes(bytes.clone())
                    .file_name(filename.clone())
                    .mime_str(media_type)
                    .map_err(|e| TransportError::Build(format!("media type {media_type:?}: {e}")))?;
                builder.multipart(multipart::Form::new().part("file", part))
            }
        };
        let response = builder
            .send()
            .map_err(|e| TransportError::Unreachable { url: url.clone(), message: e.to_string() })?;
        let status = response.status().as_u16();
        let content_type = response
            .headers()
            .get(reqwest::header::CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .map(str::to_string);
        let body = response
            .bytes()
            .map_err(|e| TransportError::Unreachable { url, message: e.to_string() })?
            .to_vec();
        Ok(ApiResponse { status, content_type, body })
    }
}

#[derive(Debug, Clone)]
pub struct Exchange {
    pub request: ApiRequest,
    /// `None` when the transport failed.
    pub response: Option<ApiResponse>,
}

impl Exchange {
    pub fn status(&self) -> Option<u16> {
        self.response.as_ref().map(|r| r.status)
    }
}

/// Shared handle on a recording; clones see the same log.
#[derive(Debug, Clone, Default)]
pub struct Recording(Arc<Mutex<Vec<Exchange>>>);

impl Recording {
    pub fn exchanges(&self) -> Vec<Exchange> {
        self.0.lock().expect("recording lock").clone()
    }

    /// `(method, path)` of every request, query strings included.
    pub fn calls(&self) -> Vec<(HttpMethod, String)> {
        self.exchanges().into_iter().map(|x| (x.request.method, x.request.path)).collect()
    }

    pub fn clear(&self) {
        self.0.lock().expect("recording lock").clear();
    }
}

pub struct RecordingTransport<T> {
    inner: T,
    recording: Recording,
}

impl<T: Transport> RecordingTransport<T> {
    pub fn new(inner: T) -> Self {
        RecordingTransport { inner, recording: Recording::default() }
    }

    pub fn with_recording(inner: T, recording: Recording) -> Self {
        RecordingTransport { inner, recording }
    }

    pub fn recording(&self) -> Recording {
        self.recording.clone()
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn send(&mut self, request: &ApiRequest) -> Result<ApiResponse, TransportError> {
        let result = self.inner.send(request);
        let response = result.as_ref().ok().cloned();
        self.recording.0.lock().expect("recording lock").push(Exchange { request: request.clone(), response });
        result
    }
}
