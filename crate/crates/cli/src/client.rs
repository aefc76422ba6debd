//! Typed calls against the service API.

use runlog_core::domain::{ActorRef, PassStatus, RunEvent};
use runlog_core::simulator::{ReplayTarget, TargetError};
use runlog_core::store::{NewFill, NewLog, NewPass, NewRun, NewTemplate};
use runlog_service::routes::HttpMethod;
use runlog_service::wire::{LogRequest, PassPatch, RunPatch, TagRequest};
use runlog_service::ErrorEnvelope;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::transport::{ApiRequest, ApiResponse, Payload, Transport, TransportError};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("{} ({status}): {}", envelope.code.as_str(), envelope.message)]
    Api { status: u16, envelope: ErrorEnvelope },
    #[error("unexpected response ({status}): {message}")]
    Protocol { status: u16, message: String },
}

pub struct ApiClient<T> {
    transport: T,
    token: Option<String>,
}

impl<T: Transport> ApiClient<T> {
    pub fn new(transport: T, token: Option<String>) -> Self {
        ApiClient { transport, token }
    }

    /// Sends one request. Non-2xx replies become [`ClientError::Api`].
    pub fn send(&mut self, method: HttpMethod, path: &str, payload: Payload) -> Result<ApiResponse, ClientError> {
        let request = ApiRequest { method, path: path.to_string(), token: self.token.clone(), payload };
        let response = self.transport.send(&request)?;
        if response.is_success() {
            return Ok(response);
        }
        match serde_json::from_slice::<ErrorEnvelope>(&response.body) {
            Ok(envelope) => Err(ClientError::Api { status: response.status, envelope }),
            Err(_) => Err(ClientError::Protocol {
                status: response.status,
                message: String::from_utf8_lossy(&response.body).into_owned(),
            }),
        }
    }

    pub fn send_json(&mut self, method: HttpMethod, path: &str, body: &impl Serialize) -> Result<ApiResponse, ClientError> {
        let bytes = serde_json::to_vec(body).expect("request bodies serialize");
        self.send(method, path, Payload::Json(bytes))
    }

    pub fn get(&mut self, path: &str) -> Result<ApiResponse, ClientError> {
        self.send(HttpMethod::Get, path, Payload::Empty)
    }

    pub fn get_json<R: DeserializeOwned>(&mut self, path: &str) -> Result<R, ClientError> {
        let response = self.get(path)?;
        decode(&response)
    }
}

pub fn decode<R: DeserializeOwned>(response: &ApiResponse) -> Result<R, ClientError> {
    serde_json::from_slice(&response.body)
        .map_err(|e| ClientError::Protocol { status: response.status, message: e.to_string() })
}

fn id_field(response: &ApiResponse, field: &str) -> Result<u64, ClientError> {
    let value: Value = decode(response)?;
    value[field].as_u64().ok_or_else(|| ClientError::Protocol {
        status: response.status,
        message: format!("response has no {field}"),
    })
}

/// Replays a simulated dataset through the API. Every entity is attributed
/// to the client's token rather than the dataset's author.
pub struct HttpTarget<T> {
    pub client: ApiClient<T>,
}

fn target_error(e: ClientError) -> TargetError {
    match e {
        ClientError::Transport(TransportError::Unreachable { .. }) => TargetError::Unreachable(e.to_string()),
        other => TargetError::Rejected(other.to_string()),
    }
}

impl<T: Transport> HttpTarget<T> {
    fn create(&mut self, path: &str, body: &impl Serialize, id: &str) -> Result<u64, TargetError> {
        let response = self.client.send_json(HttpMethod::Post, path, body).map_err(target_error)?;
        id_field(&response, id).map_err(target_error)
    }
}

impl<T: Transport> ReplayTarget for HttpTarget<T> {
    fn ping(&mut self) -> Result<(), TargetError> {
        match self.client.get("/health") {
            Ok(_) => Ok(()),
            Err(e) => Err(TargetError::Unreachable(e.to_string())),
        }
    }

    fn create_template(&mut self, t: &NewTemplate) -> Result<(), TargetError> {
        self.client.send_json(HttpMethod::Post, "/templates", t).map(|_| ()).map_err(target_error)
    }

    fn create_fill(&mut self, f: &NewFill) -> Result<u64, TargetError> {
        self.create("/fills", f, "fill_number")
    }

    fn create_run(&mut self, r: &NewRun) -> Result<u64, TargetError> {
        self.create("/runs", r, "run_number")
    }

    fn mutate_run(&mut self, run_number: u64, event: &RunEvent) -> Result<(), TargetError> {
        let path = format!("/runs/{run_number}");
        let result = match event {
            RunEvent::End { end_time } => {
                self.client.send_json(HttpMethod::Patch, &path, &RunPatch::End { end_time: Some(*end_time) })
            }
            RunEvent::SetQuality { quality } => {
                self.client.send_json(HttpMethod::Patch, &path, &RunPatch::SetQuality { quality: *quality })
            }
            RunEvent::AddTag { tag } => {
                self.client.send_json(HttpMethod::Post, &format!("{path}/tags"), &TagRequest { tag: tag.clone() })
            }
            RunEvent::RemoveTag { tag } => {
                self.client.send(HttpMethod::Delete, &format!("{path}/tags/{tag}"), Payload::Empty)
            }
        };
        result.map(|_| ()).map_err(target_error)
    }

    fn create_pass(&mut self, p: &NewPass) -> Result<u64, TargetError> {
        self.create("/passes", p, "pass_id")
    }

    fn set_pass_status(&mut self, pass_id: u64, status: PassStatus) -> Result<(), TargetError> {
        self.client
            .send_json(HttpMethod::Patch, &format!("/passes/{pass_id}"), &PassPatch { status })
            .map(|_| ())
            .map_err(target_error)
    }

    fn create_log(&mut self, l: &NewLog, _author: &ActorRef) -> Result<u64, TargetError> {
        self.create("/logs", &LogRequest::from(l), "log_id")
    }
}
