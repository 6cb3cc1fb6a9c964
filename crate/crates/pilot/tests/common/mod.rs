#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::Router;
use pilot::{api, Config};

pub const TRIP: &str = "Hi Misty, I'd like to plan a day trip to New York City for tomorrow. Please create an itinerary that allows me to enjoy the city and return to my hotel by 7:00 PM.";
pub const SIX_PM: &str = "Actually, change the time to 6 PM";
pub const REMEMBER: &str = "Please remember this plan";
pub const THREE_BINDINGS: &str =
    "when I tap your chin, take a photo; press your forehead to say hi; touch your right side to show sadness";

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Shipped skills and rules, state files under `state`.
pub fn config_in(state: &Path) -> Config {
    let root = repo_root();
    let text = format!(
        r#"
skills_dir = "{skills}"
[provider]
rules = "{rules}"
[memory]
path = "{state}/memory.json"
[scheduler]
period_ms = 200
table_path = "{state}/process_table.json"
"#,
        skills = root.join("skills").display(),
        rules = root.join("config/rules.json").display(),
        state = state.display(),
    );
    let mut c = Config::parse(&text).unwrap();
    c.base_dir = state.to_path_buf();
    c
}

pub async fn spawn(router: Router) -> SocketAddr {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(api::serve(router, listener, std::future::pending()));
    addr
}

pub async fn spawn_system(system: Arc<pilot::System>) -> SocketAddr {
    spawn(api::router(system)).await
}
