//! Session-aware front door: routes each instruction and runs the chosen
//! agent, serializing turns per session.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};
use std::time::Instant;

use chrono::{DateTime, Utc};
use serde::Serialize;
use serde_json::json;
use tokio::sync::{broadcast, Mutex};
use uuid::Uuid;

use crate::emotion::Script;
use crate::error::{Error, Result};
use crate::llm::Gateway;
use crate::memory::{MemoryStats, MemoryStore};
use crate::pia::{CommandOutcome, PiaAgent};
use crate::robot::Robot;
use crate::router::Router;
use crate::sia::{DeliveryReport, SiaAgent, SiaConfig, SiaSession, ThinkingPath};
use crate::skills::SkillInventory;
use crate::stm::{ProcessTable, Stm};
use crate::types::{ExecutionTrace, ModelTier, PiaCommand, RouteDecision, RouteTarget, SiaAction, TaskInstruction, TaskState};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TurnError {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for TurnError {
    fn from(e: &Error) -> Self {
        TurnError { kind: e.kind().to_string(), message: e.to_string() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TurnResult {
    pub turn_id: Uuid,
    pub session_id: String,
    pub instruction: String,
    pub received_at: DateTime<Utc>,
    pub elapsed_ms: f64,
    pub route: Option<RouteDecision>,
    pub action: Option<SiaAction>,
    pub state: Option<TaskState>,
    pub path: Option<ThinkingPath>,
    pub script: Option<Script>,
    pub delivery: Option<DeliveryReport>,
    pub commands: Vec<PiaCommand>,
    pub outcomes: Vec<CommandOutcome>,
    pub trace: ExecutionTrace,
    pub error: Option<TurnError>,
}

impl TurnResult {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SessionView {
    pub session_id: String,
    pub state: Option<TaskState>,
    pub model_tier: ModelTier,
}

pub struct OrchestratorParts {
    pub gateway: Gateway,
    pub memory: Arc<MemoryStore>,
    pub robot: Arc<dyn Robot>,
    pub inventory: SkillInventory,
    pub stm: Stm,
    pub sia: SiaConfig,
}

pub struct Orchestrator {
    router: Router,
    sia: SiaAgent,
    pia: PiaAgent,
    memory: Arc<MemoryStore>,
    stm: Stm,
    robot: Arc<dyn Robot>,
    inventory: Arc<RwLock<SkillInventory>>,
    sessions: Mutex<HashMap<String, Arc<Mutex<SiaSession>>>>,
    turns: broadcast::Sender<TurnResult>,
}

impl Orchestrator {
    pub fn new(parts: OrchestratorParts) -> Self {
        let inventory = Arc::new(RwLock::new(parts.inventory));
        let (turns, _) = broadcast::channel(256);
        Orchestrator {
            router: Router::new(parts.gateway.clone()),
            sia: SiaAgent::new(parts.gateway.clone(), parts.memory.clone(), parts.robot.clone(), parts.sia),
            pia: PiaAgent::new(parts.gateway, inventory.clone(), parts.stm.clone(), parts.robot.clone()),
            memory: parts.memory,
            stm: parts.stm,
            robot: parts.robot,
            inventory,
            sessions: Mutex::default(),
            turns,
        }
    }

    pub fn memory(&self) -> &Arc<MemoryStore> {
        &self.memory
    }

    pub fn stm(&self) -> &Stm {
        &self.stm
    }

    pub fn robot(&self) -> &Arc<dyn Robot> {
        &self.robot
    }

    pub fn inventory(&self) -> SkillInventory {
        self.inventory.read().unwrap().clone()
    }

    pub fn subscribe_turns(&self) -> broadcast::Receiver<TurnResult> {
        self.turns.subscribe()
    }

    async fn session(&self, session_id: &str) -> Arc<Mutex<SiaSession>> {
        let mut sessions = self.sessions.lock().await;
        sessions.entry(session_id.to_string()).or_insert_with(|| Arc::new(Mutex::new(self.sia.new_session()))).clone()
    }

    pub async fn session_view(&self, session_id: &str) -> Option<SessionView> {
        let session = self.sessions.lock().await.get(session_id).cloned()?;
        let s = session.lock().await;
        Some(SessionView { session_id: session_id.to_string(), state: s.tsm.state().cloned(), model_tier: s.tsm.tier() })
    }

    pub async fn process_table(&self) -> ProcessTable {
        self.stm.snapshot().await
    }

    pub fn memory_stats(&self) -> MemoryStats {
        self.memory.stats()
    }

    /// Writes the memory store and the process table to their configured
    /// paths.
    pub async fn flush(&self) -> Result<()> {
        if self.memory.path().is_some() {
            self.memory.save().await?;
        }
        self.stm.save().await
    }

    /// Runs one turn. Only a blank instruction is rejected up front; every
    /// other failure is reported inside the returned [`TurnResult`].
    pub async fn submit(&self, session_id: &str, text: &str) -> Result<TurnResult> {
        let instruction = TaskInstruction::new(session_id, text)?;
        let started = Instant::now();
        let session = self.session(session_id).await;
        let mut session = session.lock().await;

        let mut result = TurnResult {
            turn_id: instruction.id,
            session_id: session_id.to_string(),
            instruction: instruction.text.clone(),
            received_at: instruction.received_at,
            elapsed_ms: 0.0,
            route: None,
            action: None,
            state: None,
            path: None,
            script: None,
            delivery: None,
            commands: vec![],
            outcomes: vec![],
            trace: ExecutionTrace::new(),
            error: None,
        };

        let summary = session.tsm.state().map(|s| format!("current task: {}", s.main_task));
        match self.router.route(&instruction, summary.as_deref()).await {
            Err(e) => {
                result.trace.err("route", [("instruction", json!(instruction.text))], e.to_string());
                result.error = Some((&e).into());
            }
            Ok(decision) => {
                result.trace.ok("route", [("instruction", json!(instruction.text))], decision.target.to_string());
                let target = decision.target;
                result.route = Some(decision);
                match target {
                    RouteTarget::Sia => match self.sia.respond(&mut session, &instruction.text).await {
                        Ok(turn) => {
                            result.trace.extend(turn.trace);
                            result.action = Some(turn.action);
                            result.state = turn.state;
                            result.path = turn.path;
                            result.script = Some(turn.script);
                            result.delivery = Some(turn.delivery);
                        }
                        Err(failed) => {
                            result.trace.extend(failed.trace);
                            result.error = Some((&failed.error).into());
                            result.state = session.tsm.state().cloned();
                        }
                    },
                    RouteTarget::Pia => match self.pia.respond(&instruction.text).await {
                        Ok(turn) => {
                            result.trace.extend(turn.trace);
                            result.commands = turn.commands;
                            result.outcomes = turn.outcomes;
                        }
                        Err(failed) => {
                            result.trace.extend(failed.trace);
                            result.error = Some((&failed.error).into());
                        }
                    },
                }
            }
        }
        result.elapsed_ms = started.elapsed().as_secs_f64() * 1000.0;
        let _ = self.turns.send(result.clone());
        Ok(result)
    }
}
