//! Front end for the orchestrator: configuration, system assembly, the HTTP
//! API and the interactive console.

pub mod api;
pub mod app;
pub mod config;
pub mod repl;

pub use app::{Readiness, System};
pub use config::Config;
