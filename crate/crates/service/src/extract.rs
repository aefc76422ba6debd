//! Request extractors whose rejections use the error envelope.

use std::collections::HashMap;
use std::str::FromStr;

use axum::extract::{FromRequest, FromRequestParts, Query, Request};
use axum::http::request::Parts;
use axum::Json;
use runlog_core::domain::{ActorRef, EntityRef, Tag, Timestamp};
use runlog_core::store::DEFAULT_PAGE_LIMIT;
use serde::de::DeserializeOwned;

use crate::error::ApiError;
use crate::routes::QueryParam;

/// The authenticated caller. Rejects with 401 when no valid token was sent.
#[derive(Debug, Clone)]
pub struct Actor(pub ActorRef);

impl<S: Send + Sync> FromRequestParts<S> for Actor {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, _: &S) -> Result<Self, Self::Rejection> {
        parts
            .extensions
            .get::<ActorRef>()
            .cloned()
            .map(Actor)
            .ok_or_else(|| ApiError::unauthorized("a bearer token is required"))
    }
}

/// JSON request body.
pub struct Body<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequest<S> for Body<T> {
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(Body(v)),
            Err(rejection) => Err(ApiError::bad_request(format!("request body: {}", rejection.body_text()))),
        }
    }
}

/// Raw query pairs; checked against a route's declared parameters by
/// [`QueryPairs::check`].
pub struct QueryPairs(pub Vec<(String, String)>);

impl<S: Send + Sync> FromRequestParts<S> for QueryPairs {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        Query::<Vec<(String, String)>>::from_request_parts(parts, state)
            .await
            .map(|Query(pairs)| QueryPairs(pairs))
            .map_err(|e| ApiError::bad_request(e.body_text()))
    }
}

/// Validated query parameters, one value per name.
pub struct Params(HashMap<String, String>);

impl QueryPairs {
    pub fn check(self, declared: &[QueryParam]) -> Result<Params, ApiError> {
        let mut map = HashMap::new();
        for (name, value) in self.0 {
            if !declared.iter().any(|p| p.name == name) {
                return Err(ApiError::bad_param(&name, "not supported by this endpoint"));
            }
            if map.insert(name.clone(), value).is_some() {
                return Err(ApiError::bad_param(&name, "given more than once"));
            }
        }
        Ok(Params(map))
    }
}

impl Params {
    pub fn raw(&self, name: &str) -> Option<&str> {
        self.0.get(name).map(String::as_str)
    }

    pub fn parse<T>(&self, name: &str) -> Result<Option<T>, ApiError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        self.raw(name).map(|v| v.parse::<T>().map_err(|e| ApiError::bad_param(name, e))).transpose()
    }

    pub fn timestamp(&self, name: &str) -> Result<Option<Timestamp>, ApiError> {
        self.raw(name).map(|v| Timestamp::parse(v).map_err(|e| ApiError::bad_param(name, e))).transpose()
    }

    pub fn entity_ref(&self, name: &str) -> Result<Option<EntityRef>, ApiError> {
        self.parse(name)
    }

    /// Comma-separated values; `None` when absent, empty items ignored.
    pub fn list<T>(&self, name: &str) -> Result<Option<Vec<T>>, ApiError>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        let Some(raw) = self.raw(name) else { return Ok(None) };
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<T>().map_err(|e| ApiError::bad_param(name, e)))
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }

    pub fn tags(&self, name: &str) -> Result<Option<Vec<Tag>>, ApiError> {
        let Some(raw) = self.raw(name) else { return Ok(None) };
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| Tag::parse(s).map_err(|e| ApiError::bad_param(name, e)))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    pub fn paging(&self) -> Result<(u64, u32), ApiError> {
        let offset = self.parse::<u64>("offset")?.unwrap_or(0);
        let limit = self.parse::<u32>("limit")?.unwrap_or(DEFAULT_PAGE_LIMIT);
        Ok((offset, limit))
    }
}

/// Path parameters.
pub struct PathArgs<T>(pub T);

impl<S: Send + Sync, T: DeserializeOwned + Send> FromRequestParts<S> for PathArgs<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, Self::Rejection> {
        axum::extract::Path::<T>::from_request_parts(parts, state)
            .await
            .map(|axum::extract::Path(v)| PathArgs(v))
            .map_err(|e| ApiError::bad_request(format!("path: {}", e.body_text())))
    }
}
