//! Socially intelligent agent: task-state tracking, fast/slow script
//! selection and emotion-aligned delivery.

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::emotion::{EmotionLabel, Script};
use crate::error::{Error, Failed, Result};
use crate::llm::{CompletionRequest, Gateway, SchemaId};
use crate::memory::{Lookup, MemoryStore};
use crate::prompts;
use crate::robot::{speech_duration_ms, Robot};
use crate::types::{validate_units, ExecutionTrace, ModelTier, SiaAction, TaskState};

/// Minimum token overlap for an UPDATE/DELETE unit to address an existing one.
pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.5;
pub const DEFAULT_CONTEXT_TURNS: usize = 6;

/// Function names an SIA trace may contain.
pub const SIA_FUNCTIONS: &[&str] = &[
    "parse_action",
    "apply_action",
    "memory.lookup",
    "write_script",
    "memory.store",
    "robot.speak",
    "robot.motion_bundle",
    "deliver",
];

fn tokens(text: &str) -> BTreeSet<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| ",.;:!?\"'()".contains(c)).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

/// Jaccard overlap of the lowercase word sets of `a` and `b`. Two texts with
/// no words have overlap 0.
pub fn token_jaccard(a: &str, b: &str) -> f64 {
    let (a, b) = (tokens(a), tokens(b));
    let union = a.union(&b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

/// Index of the unit with the highest overlap, earliest on ties.
fn best_match(details: &[String], unit: &str) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, d) in details.iter().enumerate() {
        let score = token_jaccard(d, unit);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((i, score));
        }
    }
    best
}

/// Pure state transition. `current` is `None` before the first NEW.
/// UPGRADE/DOWNGRADE on an empty state are handled by the manager since
/// there is no state to carry the tier.
pub fn apply_action(current: Option<&TaskState>, action: &SiaAction, threshold: f64) -> Result<TaskState> {
    action.validate()?;
    match action {
        SiaAction::New { main_task, details } => Ok(TaskState {
            main_task: main_task.trim().to_string(),
            details: details.clone(),
            model_tier: current.map(|s| s.model_tier).unwrap_or_default(),
        }),
        SiaAction::Update { details } => {
            let mut next = current.ok_or(Error::NoActiveTask)?.clone();
            for unit in details {
                match best_match(&next.details, unit) {
                    Some((i, score)) if score >= threshold => next.details[i] = unit.clone(),
                    _ => next.details.push(unit.clone()),
                }
            }
            Ok(next)
        }
        SiaAction::Delete { details } => {
            let mut next = current.ok_or(Error::NoActiveTask)?.clone();
            for unit in details {
                match best_match(&next.details, unit) {
                    Some((i, score)) if score >= threshold => {
                        next.details.remove(i);
                    }
                    _ => return Err(Error::NoMatchingDetail(unit.clone())),
                }
            }
            Ok(next)
        }
        SiaAction::Upgrade | SiaAction::Downgrade => {
            let mut next = current.ok_or(Error::NoActiveTask)?.clone();
            next.model_tier = if matches!(action, SiaAction::Upgrade) { ModelTier::Heavy } else { ModelTier::Light };
            Ok(next)
        }
        SiaAction::Memory => Ok(current.ok_or(Error::NoActiveTask)?.clone()),
    }
}

/// Per-session task state. The model tier lives here so that it survives
/// across tasks and exists before the first one.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TaskStateManager {
    state: Option<TaskState>,
    tier: ModelTier,
    threshold: Option<f64>,
}

impl TaskStateManager {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_threshold(threshold: f64) -> Self {
        TaskStateManager { threshold: Some(threshold), ..Self::default() }
    }

    pub fn state(&self) -> Option<&TaskState> {
        self.state.as_ref()
    }

    pub fn tier(&self) -> ModelTier {
        self.tier
    }

    /// Applies `action` atomically: on error the state is unchanged.
    pub fn apply(&mut self, action: &SiaAction) -> Result<()> {
        let threshold = self.threshold.unwrap_or(DEFAULT_MATCH_THRESHOLD);
        match action {
            SiaAction::Upgrade | SiaAction::Downgrade => {
                action.validate()?;
                self.tier = if matches!(action, SiaAction::Upgrade) { ModelTier::Heavy } else { ModelTier::Light };
                if let Some(s) = self.state.as_mut() {
                    s.model_tier = self.tier;
                }
                Ok(())
            }
            _ => {
                let mut next = apply_action(self.state.as_ref(), action, threshold)?;
                next.model_tier = self.tier;
                debug_assert!(validate_units(&next.details).is_ok());
                self.state = Some(next);
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThinkingPath {
    /// A stored script was replayed.
    Fast,
    /// A new script was written.
    Slow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceReport {
    pub index: usize,
    pub text: String,
    pub emotion: EmotionLabel,
    pub rate: f64,
    pub duration_ms: u64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DeliveryReport {
    pub utterances: Vec<UtteranceReport>,
}

impl DeliveryReport {
    pub fn all_ok(&self) -> bool {
        self.utterances.iter().all(|u| u.error.is_none())
    }
}

#[derive(Debug, Clone, Default)]
pub struct SiaSession {
    pub tsm: TaskStateManager,
    recent: VecDeque<String>,
    last_script: Option<Script>,
}

impl SiaSession {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn last_script(&self) -> Option<&Script> {
        self.last_script.as_ref()
    }

    pub fn recent(&self) -> Vec<String> {
        self.recent.iter().cloned().collect()
    }
}

#[derive(Debug, Clone)]
pub struct SiaTurn {
    pub action: SiaAction,
    pub state: Option<TaskState>,
    pub script: Script,
    pub path: Option<ThinkingPath>,
    pub lookup_distance: Option<f64>,
    pub delivery: DeliveryReport,
    pub trace: ExecutionTrace,
}

#[derive(Debug, Clone)]
pub struct SiaConfig {
    pub match_threshold: f64,
    /// Store every slow-path script without waiting for a MEMORY action.
    pub auto_store: bool,
    pub context_turns: usize,
}

impl Default for SiaConfig {
    fn default() -> Self {
        SiaConfig { match_threshold: DEFAULT_MATCH_THRESHOLD, auto_store: false, context_turns: DEFAULT_CONTEXT_TURNS }
    }
}

pub struct SiaAgent {
    gateway: Gateway,
    memory: Arc<MemoryStore>,
    robot: Arc<dyn Robot>,
    config: SiaConfig,
}

impl SiaAgent {
    pub fn new(gateway: Gateway, memory: Arc<MemoryStore>, robot: Arc<dyn Robot>, config: SiaConfig) -> Self {
        SiaAgent { gateway, memory, robot, config }
    }

    pub fn memory(&self) -> &Arc<MemoryStore> {
        &self.memory
    }

    pub fn new_session(&self) -> SiaSession {
        SiaSession { tsm: TaskStateManager::with_threshold(self.config.match_threshold), ..SiaSession::default() }
    }

    pub async fn parse_action(&self, utterance: &str, current: Option<&TaskState>, tier: ModelTier) -> Result<SiaAction> {
        let request = CompletionRequest::new(SchemaId::SiaAction, prompts::sia_action(current), utterance).with_tier(tier);
        self.gateway.complete_structured(&request).await?.into_sia()
    }

    pub async fn write_script(&self, state: &TaskState, context: &[String]) -> Result<Script> {
        let request = CompletionRequest::new(SchemaId::Script, prompts::script_writer(context), prompts::script_request(state))
            .with_tier(state.model_tier);
        self.gateway.complete_structured(&request).await?.into_script()
    }

    /// Speaks each utterance while running its motion bundle. A failed
    /// request is recorded and delivery moves on to the next utterance.
    pub async fn deliver(&self, script: &Script, trace: &mut ExecutionTrace) -> DeliveryReport {
        let mut report = DeliveryReport::default();
        for (index, u) in script.utterances().iter().enumerate() {
            let (spoken, moved) =
                tokio::join!(self.robot.speak(u.text(), u.rate(), u.emotion()), self.robot.motion_bundle(u.emotion()));
            let params = || [("index", json!(index)), ("emotion", json!(u.emotion()))];
            let mut errors = Vec::new();
            match &spoken {
                Ok(_) => trace.ok("robot.speak", params().into_iter().chain([("rate", json!(u.rate()))]), u.text()),
                Err(e) => {
                    trace.err("robot.speak", params().into_iter().chain([("rate", json!(u.rate()))]), e.to_string());
                    errors.push(format!("speak: {e}"));
                }
            }
            match &moved {
                Ok(_) => trace.ok("robot.motion_bundle", params(), ""),
                Err(e) => {
                    trace.err("robot.motion_bundle", params(), e.to_string());
                    errors.push(format!("motion_bundle: {e}"));
                }
            }
            report.utterances.push(UtteranceReport {
                index,
                text: u.text().to_string(),
                emotion: u.emotion(),
                rate: u.rate(),
                duration_ms: speech_duration_ms(u.text(), u.rate()),
                error: if errors.is_empty() { None } else { Some(errors.join("; ")) },
            });
        }
        let failed = report.utterances.iter().filter(|u| u.error.is_some()).count();
        let params = [("utterances", json!(script.len())), ("failed", json!(failed))];
        if failed == 0 {
            trace.ok("deliver", params, "");
        } else {
            trace.err("deliver", params, format!("{failed} utterance(s) not fully delivered"));
        }
        report
    }

    /// One dialogue turn: parse, update state, pick the fast or slow path,
    /// then deliver.
    pub async fn respond(&self, session: &mut SiaSession, utterance: &str) -> Result<SiaTurn, Failed> {
        let mut trace = ExecutionTrace::new();
        macro_rules! bail {
            ($name:expr, $params:expr, $e:expr) => {{
                let error: Error = $e;
                trace.err($name, $params, error.to_string());
                return Err(Failed { error, trace });
            }};
        }

        let action = match self.parse_action(utterance, session.tsm.state(), session.tsm.tier()).await {
            Ok(a) => a,
            Err(e) => bail!("parse_action", [("utterance", json!(utterance))], e),
        };
        trace.ok("parse_action", [("utterance", json!(utterance))], action.name());

        if let Err(e) = session.tsm.apply(&action) {
            bail!("apply_action", [("action", json!(action))], e);
        }
        let state = session.tsm.state().cloned();
        trace.ok("apply_action", [("action", json!(action))], state.as_ref().map(|s| s.main_task.clone()).unwrap_or_default());

        let mut path = None;
        let mut lookup_distance = None;
        let script = match &action {
            SiaAction::New { .. } | SiaAction::Update { .. } | SiaAction::Delete { .. } => {
                let state = state.clone().expect("content actions leave an active task");
                let params = || [("main_task", json!(state.main_task))];
                let lookup = match self.memory.lookup(&state.main_task).await {
                    Ok(l) => l,
                    Err(e) => bail!("memory.lookup", params(), e),
                };
                lookup_distance = lookup.distance();
                match lookup {
                    Lookup::Hit { index, record, distance } => {
                        trace.ok(
                            "memory.lookup",
                            params().into_iter().chain([("hit", json!(true)), ("distance", json!(distance))]),
                            format!("record {index}"),
                        );
                        path = Some(ThinkingPath::Fast);
                        record.script
                    }
                    Lookup::Miss { min_distance } => {
                        trace.ok(
                            "memory.lookup",
                            params().into_iter().chain([("hit", json!(false)), ("distance", json!(min_distance))]),
                            "miss",
                        );
                        let context = session.recent();
                        let wparams = || [("main_task", json!(state.main_task)), ("tier", json!(state.model_tier))];
                        let script = match self.write_script(&state, &context).await {
                            Ok(s) => s,
                            Err(e) => bail!("write_script", wparams(), e),
                        };
                        trace.ok("write_script", wparams(), format!("{} utterance(s)", script.len()));
                        path = Some(ThinkingPath::Slow);
                        if self.config.auto_store {
                            match self.memory.store(&state.main_task, script.clone()).await {
                                Ok(i) => trace.ok("memory.store", params(), format!("record {i}")),
                                Err(e) => bail!("memory.store", params(), e),
                            }
                        }
                        script
                    }
                }
            }
            SiaAction::Upgrade | SiaAction::Downgrade => {
                let line = match session.tsm.tier() {
                    ModelTier::Heavy => "Switching to the higher-capacity model.",
                    ModelTier::Light => "Switching to the lightweight model.",
                };
                Script::single(line, EmotionLabel::Neutral).expect("non-empty")
            }
            SiaAction::Memory => {
                let state = state.clone().expect("MEMORY requires an active task");
                let params = || [("main_task", json!(state.main_task))];
                let Some(last) = session.last_script.clone() else {
                    bail!("memory.store", params(), Error::InvalidInput("no response to remember yet".into()));
                };
                match self.memory.store(&state.main_task, last).await {
                    Ok(i) => trace.ok("memory.store", params(), format!("record {i}")),
                    Err(e) => bail!("memory.store", params(), e),
                }
                Script::single("Okay, I will remember that.", EmotionLabel::Happiness).expect("non-empty")
            }
        };

        let delivery = self.deliver(&script, &mut trace).await;

        session.recent.push_back(utterance.to_string());
        while session.recent.len() > self.config.context_turns {
            session.recent.pop_front();
        }
        if path.is_some() {
            session.last_script = Some(script.clone());
        }
        Ok(SiaTurn { action, state, script, path, lookup_distance, delivery, trace })
    }
}
