//! Runs an operation either in-process or against a remote service. Both
//! paths yield the same JSON text: locally the result is serialized with
//! `serde_json::to_string`, remotely the response body is passed through.

use std::fmt;

use polidoxa_service::{ApiError, Caller, ErrorKind, Service};
use reqwest::Url;
use serde::Serialize;

#[derive(Debug)]
pub enum CliError {
    Api(ApiError),
    Connectivity(String),
    Usage(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Api(e) => match e.kind {
                ErrorKind::BadRequest => 3,
                ErrorKind::Unauthenticated => 4,
                ErrorKind::Forbidden => 5,
                ErrorKind::NotFound => 6,
                ErrorKind::Conflict => 7,
                ErrorKind::Internal => 1,
            },
            CliError::Connectivity(_) => 8,
            CliError::Usage(_) => 2,
            CliError::Io(_) => 1,
        }
    }

    pub fn to_json(&self) -> String {
        let (kind, message) = match self {
            CliError::Api(e) => return e.to_json(),
            CliError::Connectivity(m) => ("connectivity", m),
            CliError::Usage(m) => ("usage", m),
            CliError::Io(m) => ("io", m),
        };
        serde_json::json!({ "error": kind, "message": message }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Api(e) => write!(f, "{e}"),
            CliError::Connectivity(m) | CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<ApiError> for CliError {
    fn from(e: ApiError) -> Self {
        CliError::Api(e)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Method {
    Get,
    Post,
    Put,
}

/// The HTTP form of an operation.
#[derive(Debug, Clone)]
pub struct Req {
    method: Method,
    segments: Vec<String>,
    query: Vec<(&'static str, String)>,
    body: Option<String>,
}

impl Req {
    fn new(method: Method, segments: &[&str]) -> Self {
        Req {
            method,
            segments: segments.iter().map(|s| s.to_string()).collect(),
            query: Vec::new(),
            body: None,
        }
    }

    pub fn get(segments: &[&str]) -> Self {
        Self::new(Method::Get, segments)
    }

    pub fn post(segments: &[&str]) -> Self {
        Self::new(Method::Post, segments)
    }

    pub fn put(segments: &[&str]) -> Self {
        Self::new(Method::Put, segments)
    }

    /// Adds `name=value` when `value` is set.
    pub fn param(mut self, name: &'static str, value: Option<&String>) -> Self {
        if let Some(v) = value {
            self.query.push((name, v.clone()));
        }
        self
    }

    pub fn body(mut self, body: impl Into<String>) -> Self {
        self.body = Some(body.into());
        self
    }

    pub fn json<T: Serialize>(self, body: &T) -> Self {
        self.body(serde_json::to_string(body).expect("bodies serialize"))
    }
}

pub struct Local {
    pub svc: Service,
    pub as_user: Option<String>,
    pub token: Option<String>,
}

impl Local {
    /// `--as USER` when given, otherwise the session token.
    pub fn caller(&self) -> Result<Caller, ApiError> {
        match &self.as_user {
            Some(user) => self.svc.local_caller(user),
            None => self.svc.authenticate(self.token.as_deref()).map_err(|e| {
                ApiError::unauthenticated(format!("{}; local mode acts as the user named by --as", e.message))
            }),
        }
    }
}

pub struct Remote {
    pub client: reqwest::blocking::Client,
    pub base: Url,
    pub token: Option<String>,
}

pub enum Backend {
    Local(Box<Local>),
    Remote(Remote),
}

impl Backend {
    pub fn call<T: Serialize>(
        &self,
        req: Req,
        local: impl FnOnce(&Local) -> Result<T, ApiError>,
    ) -> Result<String, CliError> {
        match self {
            Backend::Local(l) => {
                let value = local(l)?;
                Ok(serde_json::to_string(&value).expect("responses serialize"))
            }
            Backend::Remote(r) => r.send(req),
        }
    }
}

impl Remote {
    fn send(&self, req: Req) -> Result<String, CliError> {
        let mut url = self.base.clone();
        url.path_segments_mut()
            .map_err(|_| CliError::Usage(format!("`{}` cannot be a base URL", self.base)))?
            .pop_if_empty()
            .extend(&req.segments);
        let mut builder = match req.method {
            Method::Get => self.client.get(url),
            Method::Post => self.client.post(url),
            Method::Put => self.client.put(url),
        };
        if !req.query.is_empty() {
            builder = builder.query(&req.query);
        }
        if let Some(token) = &self.token {
            builder = builder.bearer_auth(token);
        }
        if let Some(body) = req.body {
            builder = builder.body(body);
        }
        let resp = builder
            .send()
            .map_err(|e| CliError::Connectivity(format!("{}: {e}", self.base)))?;
        let status = resp.status().as_u16();
        let text = resp
            .text()
            .map_err(|e| CliError::Connectivity(format!("reading response: {e}")))?;
        if status == 200 {
            return Ok(text);
        }
        let err = serde_json::from_str::<ApiError>(&text)
            .unwrap_or_else(|_| ApiError::new(ErrorKind::from_status(status), format!("HTTP {status}: {text}")));
        Err(CliError::Api(err))
    }
}
