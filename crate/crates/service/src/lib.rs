//! HTTP service over the polidoxa engine.
//!
//! [`Service`] owns all state behind one lock and exposes every operation as
//! a plain method returning a serializable response; the axum routes in
//! [`http`] and the command-line client's local mode are both thin callers
//! of those methods, so a response body is the same bytes whichever way the
//! operation was invoked.

pub mod accounts;
pub mod api;
pub mod clock;
pub mod config;
pub mod error;
pub mod http;
mod service;
pub mod store;

pub use api::*;
pub use clock::{Clock, ManualClock, SystemClock};
pub use config::{BootstrapAdmin, ServiceConfig};
pub use error::{ApiError, ErrorKind};
pub use service::{Caller, Service};
