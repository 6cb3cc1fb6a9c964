//! Structured-completion gateway.
//!
//! Every agent asks for one of four fixed output schemas. The gateway picks a
//! provider by model tier, validates the raw output against the schema and
//! re-asks with the validation error appended when the output is malformed.

use std::fmt;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use tracing::debug;

use crate::emotion::Script;
use crate::error::{Error, Result};
use crate::types::{ModelTier, PiaCommand, RouteDecision, SiaAction};

pub const DEFAULT_MAX_RETRIES: u32 = 2;
pub const RULE_TABLE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemaId {
    RouteDecision,
    SiaAction,
    PiaCommands,
    Script,
}

impl SchemaId {
    pub fn as_str(self) -> &'static str {
        match self {
            SchemaId::RouteDecision => "route-decision",
            SchemaId::SiaAction => "sia-action",
            SchemaId::PiaCommands => "pia-commands",
            SchemaId::Script => "script",
        }
    }
}

impl fmt::Display for SchemaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub system_prompt: String,
    pub user_content: String,
    pub schema_id: SchemaId,
    pub tier: ModelTier,
}

impl CompletionRequest {
    pub fn new(schema_id: SchemaId, system_prompt: impl Into<String>, user_content: impl Into<String>) -> Self {
        CompletionRequest {
            system_prompt: system_prompt.into(),
            user_content: user_content.into(),
            schema_id,
            tier: ModelTier::Light,
        }
    }

    pub fn with_tier(mut self, tier: ModelTier) -> Self {
        self.tier = tier;
        self
    }
}

/// A parsed, validated provider output.
#[derive(Debug, Clone, PartialEq)]
pub enum StructuredValue {
    Route(RouteDecision),
    Sia(SiaAction),
    Pia(Vec<PiaCommand>),
    Script(Script),
}

impl StructuredValue {
    pub fn schema_id(&self) -> SchemaId {
        match self {
            StructuredValue::Route(_) => SchemaId::RouteDecision,
            StructuredValue::Sia(_) => SchemaId::SiaAction,
            StructuredValue::Pia(_) => SchemaId::PiaCommands,
            StructuredValue::Script(_) => SchemaId::Script,
        }
    }

    pub fn into_route(self) -> Result<RouteDecision> {
        match self {
            StructuredValue::Route(r) => Ok(r),
            other => Err(wrong_schema(SchemaId::RouteDecision, &other)),
        }
    }

    pub fn into_sia(self) -> Result<SiaAction> {
        match self {
            StructuredValue::Sia(a) => Ok(a),
            other => Err(wrong_schema(SchemaId::SiaAction, &other)),
        }
    }

    pub fn into_pia(self) -> Result<Vec<PiaCommand>> {
        match self {
            StructuredValue::Pia(c) => Ok(c),
            other => Err(wrong_schema(SchemaId::PiaCommands, &other)),
        }
    }

    pub fn into_script(self) -> Result<Script> {
        match self {
            StructuredValue::Script(s) => Ok(s),
            other => Err(wrong_schema(SchemaId::Script, &other)),
        }
    }
}

fn wrong_schema(expected: SchemaId, got: &StructuredValue) -> Error {
    Error::schema(expected.as_str(), format!("got a {} value", got.schema_id()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PiaCommandsBody {
    commands: Vec<PiaCommand>,
}

/// Parses and validates raw output against `schema`.
///
/// `pia-commands` accepts either `{"commands": [...]}` or a bare array.
pub fn parse_structured(schema: SchemaId, raw: &Value) -> Result<StructuredValue> {
    let bad = |e: &dyn fmt::Display| Error::schema(schema.as_str(), e.to_string());
    let value = match schema {
        SchemaId::RouteDecision => {
            StructuredValue::Route(serde_json::from_value(raw.clone()).map_err(|e| bad(&e))?)
        }
        SchemaId::SiaAction => {
            let action: SiaAction = serde_json::from_value(raw.clone()).map_err(|e| bad(&e))?;
            action.validate().map_err(|e| bad(&e))?;
            StructuredValue::Sia(action)
        }
        SchemaId::PiaCommands => {
            let commands: Vec<PiaCommand> = if raw.is_array() {
                serde_json::from_value(raw.clone()).map_err(|e| bad(&e))?
            } else {
                serde_json::from_value::<PiaCommandsBody>(raw.clone()).map_err(|e| bad(&e))?.commands
            };
            if commands.is_empty() {
                return Err(bad(&"no commands"));
            }
            for c in &commands {
                c.validate().map_err(|e| bad(&e))?;
            }
            StructuredValue::Pia(commands)
        }
        SchemaId::Script => StructuredValue::Script(serde_json::from_value(raw.clone()).map_err(|e| bad(&e))?),
    };
    Ok(value)
}

/// Source of raw structured output. `feedback` holds validation errors from
/// earlier attempts at the same request.
#[async_trait]
pub trait CompletionProvider: Send + Sync {
    async fn complete(&self, request: &CompletionRequest, feedback: &[String]) -> Result<Value>;
}

/// Tiered provider selection plus validate-and-retry.
#[derive(Clone)]
pub struct Gateway {
    light: Arc<dyn CompletionProvider>,
    heavy: Option<Arc<dyn CompletionProvider>>,
    max_retries: u32,
}

impl Gateway {
    pub fn new(light: Arc<dyn CompletionProvider>) -> Self {
        Gateway { light, heavy: None, max_retries: DEFAULT_MAX_RETRIES }
    }

    pub fn with_heavy(mut self, heavy: Arc<dyn CompletionProvider>) -> Self {
        self.heavy = Some(heavy);
        self
    }

    pub fn with_max_retries(mut self, max_retries: u32) -> Self {
        self.max_retries = max_retries;
        self
    }

    pub fn max_retries(&self) -> u32 {
        self.max_retries
    }

    fn provider(&self, tier: ModelTier) -> &Arc<dyn CompletionProvider> {
        match (tier, &self.heavy) {
            (ModelTier::Heavy, Some(heavy)) => heavy,
            _ => &self.light,
        }
    }

    pub async fn complete_structured(&self, request: &CompletionRequest) -> Result<StructuredValue> {
        self.complete_validated(request, |_| Ok(())).await
    }

    /// Like [`Gateway::complete_structured`] with an extra caller-side check
    /// (e.g. inventory membership). A failing check is retried like any
    /// other validation error; if it is still failing when retries run out,
    /// its error is returned as-is.
    pub async fn complete_validated<F>(&self, request: &CompletionRequest, check: F) -> Result<StructuredValue>
    where
        F: Fn(&StructuredValue) -> Result<()>,
    {
        let provider = self.provider(request.tier);
        let mut feedback: Vec<String> = Vec::new();
        let mut last: Option<Error> = None;
        for attempt in 0..=self.max_retries {
            let outcome = match provider.complete(request, &feedback).await {
                Ok(raw) => parse_structured(request.schema_id, &raw).and_then(|v| check(&v).map(|_| v)),
                Err(e @ Error::ProviderUnavailable(_)) => return Err(e),
                Err(e) => Err(e),
            };
            match outcome {
                Ok(value) => return Ok(value),
                Err(e) => {
                    debug!(schema = %request.schema_id, attempt, error = %e, "rejected provider output");
                    feedback.push(e.to_string());
                    last = Some(e);
                }
            }
        }
        Err(match last {
            Some(e @ (Error::UnknownSkill(_) | Error::UnknownSensor(_))) => e,
            Some(Error::SchemaViolation { schema, reason }) => Error::SchemaViolation { schema, reason },
            Some(other) => Error::schema(request.schema_id.as_str(), other.to_string()),
            None => Error::schema(request.schema_id.as_str(), "no attempts"),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Matcher {
    Exact(String),
    Pattern(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    #[serde(rename = "match")]
    pub matcher: Matcher,
    pub schema_id: SchemaId,
    pub output: Value,
}

/// Versioned rule document backing the scripted provider.
///
/// Exact rules are checked before any pattern; patterns are tried in order
/// and the first match wins. Matching is on case-folded, whitespace-collapsed
/// text. In a pattern `*` matches any run of characters and the captured runs
/// replace `$1`, `$2`, ... inside string values of the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleTable {
    pub version: u32,
    pub rules: Vec<Rule>,
}

impl Default for RuleTable {
    fn default() -> Self {
        RuleTable { version: RULE_TABLE_VERSION, rules: Vec::new() }
    }
}

impl RuleTable {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let table: RuleTable =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("rule table: {e}")))?;
        if table.version != RULE_TABLE_VERSION {
            return Err(Error::InvalidInput(format!("unsupported rule table version {}", table.version)));
        }
        Ok(table)
    }

    pub fn exact(&mut self, schema_id: SchemaId, key: impl Into<String>, output: Value) -> &mut Self {
        self.rules.push(Rule { matcher: Matcher::Exact(key.into()), schema_id, output });
        self
    }

    pub fn pattern(&mut self, schema_id: SchemaId, pattern: impl Into<String>, output: Value) -> &mut Self {
        self.rules.push(Rule { matcher: Matcher::Pattern(pattern.into()), schema_id, output });
        self
    }

    pub fn extend(&mut self, other: RuleTable) {
        self.rules.extend(other.rules);
    }

    pub fn lookup(&self, schema_id: SchemaId, user_content: &str) -> Result<Value> {
        scripted_lookup(self, schema_id, user_content)
    }
}

pub fn normalize(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

pub fn scripted_lookup(table: &RuleTable, schema_id: SchemaId, user_content: &str) -> Result<Value> {
    let input = normalize(user_content);
    let candidates = || table.rules.iter().filter(|r| r.schema_id == schema_id);
    for rule in candidates() {
        if let Matcher::Exact(key) = &rule.matcher {
            if normalize(key) == input {
                return Ok(rule.output.clone());
            }
        }
    }
    for rule in candidates() {
        if let Matcher::Pattern(pattern) = &rule.matcher {
            if let Some(captures) = glob_captures(&normalize(pattern), &input) {
                return Ok(substitute(&rule.output, &captures));
            }
        }
    }
    Err(Error::NoRule(user_content.to_string()))
}

/// Anchored glob match with `*` wildcards; returns the captured runs.
fn glob_captures(pattern: &str, input: &str) -> Option<Vec<String>> {
    let parts: Vec<&str> = pattern.split('*').collect();
    if parts.len() == 1 {
        return (pattern == input).then(Vec::new);
    }
    let first = parts[0];
    let last = parts[parts.len() - 1];
    if !input.starts_with(first) || input.len() < first.len() + last.len() || !input.ends_with(last) {
        return None;
    }
    let mut rest = &input[first.len()..input.len() - last.len()];
    let mut captures = Vec::new();
    // Middle literals match leftmost; each preceding `*` captures the gap.
    for literal in &parts[1..parts.len() - 1] {
        let at = rest.find(literal)?;
        captures.push(rest[..at].trim().to_string());
        rest = &rest[at + literal.len()..];
    }
    captures.push(rest.trim().to_string());
    Some(captures)
}

fn substitute(value: &Value, captures: &[String]) -> Value {
    match value {
        Value::String(s) => {
            let mut out = s.clone();
            // highest index first so $1 does not clobber $10
            for (i, cap) in captures.iter().enumerate().rev() {
                out = out.replace(&format!("${}", i + 1), cap);
            }
            Value::String(out)
        }
        Value::Array(items) => Value::Array(items.iter().map(|v| substitute(v, captures)).collect()),
        Value::Object(map) => {
            Value::Object(map.iter().map(|(k, v)| (k.clone(), substitute(v, captures))).collect())
        }
        other => other.clone(),
    }
}

/// Deterministic provider answering from a [`RuleTable`], with an optional
/// simulated per-call latency.
pub struct ScriptedProvider {
    table: Arc<RuleTable>,
    delay: Duration,
    calls: AtomicU64,
}

impl ScriptedProvider {
    pub fn new(table: RuleTable) -> Self {
        Self::shared(Arc::new(table))
    }

    pub fn shared(table: Arc<RuleTable>) -> Self {
        ScriptedProvider { table, delay: Duration::ZERO, calls: AtomicU64::new(0) }
    }

    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn table(&self) -> &RuleTable {
        &self.table
    }
}

#[async_trait]
impl CompletionProvider for ScriptedProvider {
    async fn complete(&self, request: &CompletionRequest, _feedback: &[String]) -> Result<Value> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        if !self.delay.is_zero() {
            tokio::time::sleep(self.delay).await;
        }
        scripted_lookup(&self.table, request.schema_id, &request.user_content)
    }
}

/// External provider: `POST {system, user, schema}` returning one JSON body.
pub struct HttpProvider {
    client: reqwest::Client,
    endpoint: String,
    api_key: Option<String>,
}

impl HttpProvider {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Result<Self> {
        let client = reqwest::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::ProviderUnavailable(e.to_string()))?;
        Ok(HttpProvider { client, endpoint: endpoint.into(), api_key })
    }
}

#[async_trait]
impl CompletionProvider for HttpProvider {
    async fn complete(&self, request: &CompletionRequest, feedback: &[String]) -> Result<Value> {
        let mut user = request.user_content.clone();
        for (i, err) in feedback.iter().enumerate() {
            user.push_str(&format!("\n\n[attempt {} was rejected: {err}]", i + 1));
        }
        let mut call = self.client.post(&self.endpoint).json(&serde_json::json!({
            "system": request.system_prompt,
            "user": user,
            "schema": request.schema_id,
            "tier": request.tier,
        }));
        if let Some(key) = &self.api_key {
            call = call.bearer_auth(key);
        }
        let resp = call.send().await.map_err(|e| Error::ProviderUnavailable(e.to_string()))?;
        if resp.status().is_server_error() {
            return Err(Error::ProviderUnavailable(format!("status {}", resp.status())));
        }
        resp.json::<Value>().await.map_err(|e| Error::schema(request.schema_id.as_str(), e.to_string()))
    }
}
