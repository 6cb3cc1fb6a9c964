//! Sensor & tool manager: one supervised worker per bound sensor.
//!
//! Each worker is a tokio task that owns its sensor, runs its skill whenever
//! the sensor fires and refreshes a heartbeat. [`Stm::tick`] probes every
//! worker and restarts dead ones; after `burst` consecutive restarts of the
//! same sensor further restarts are delayed with exponential backoff.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex as StdMutex};
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use tokio::sync::{broadcast, Mutex};
use tokio::task::JoinHandle;
use tracing::{debug, warn};

use crate::error::{Error, Result};
use crate::persist::write_atomic;
use crate::robot::Robot;
use crate::skills::{run_skill, SkillInventory};
use crate::types::{ProcessTableEntry, SensorId, SkillDescriptor, WorkerStatus};

pub const TABLE_VERSION: u32 = 1;
pub const DEFAULT_PERIOD: Duration = Duration::from_millis(1000);
pub const DEFAULT_BURST: u32 = 5;

#[derive(Debug, Clone)]
pub struct StmConfig {
    /// Heartbeat/probe period; a worker is inactive once its heartbeat is
    /// older than two periods.
    pub period: Duration,
    pub burst: u32,
    pub backoff_base: Duration,
    pub backoff_max: Duration,
    pub table_path: Option<PathBuf>,
}

impl Default for StmConfig {
    fn default() -> Self {
        StmConfig {
            period: DEFAULT_PERIOD,
            burst: DEFAULT_BURST,
            backoff_base: DEFAULT_PERIOD,
            backoff_max: Duration::from_secs(60),
            table_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum StmEvent {
    Spawned { sensor: SensorId, worker_id: u64, skill: String },
    Stopped { sensor: SensorId, worker_id: u64 },
    Fired { sensor: SensorId, worker_id: u64, skill: String, event_id: u64, error: Option<String> },
    Restarted { sensor: SensorId, old_worker_id: u64, worker_id: u64, attempt: u32 },
    BackedOff { sensor: SensorId, attempt: u32, retry_in_ms: u64 },
    SpawnFailed { sensor: SensorId, error: String },
}

/// Fault hooks for exercising supervision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpawnFault {
    #[default]
    None,
    /// The worker exits right after starting.
    Crash,
    /// Spawning is refused.
    Fail,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcessTable {
    pub version: u32,
    pub entries: Vec<ProcessTableEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RecoverReport {
    /// (sensor, persisted id, fresh id)
    pub restored: Vec<(SensorId, u64, u64)>,
    /// (sensor, skill, reason)
    pub dropped: Vec<(SensorId, String, String)>,
}

#[derive(Debug)]
struct Heartbeat {
    at: Instant,
    wall: DateTime<Utc>,
}

struct Worker {
    id: u64,
    skill: SkillDescriptor,
    handle: JoinHandle<()>,
    heartbeat: Arc<StdMutex<Heartbeat>>,
    consecutive_restarts: u32,
    retry_at: Option<Instant>,
}

#[derive(Default)]
struct State {
    workers: BTreeMap<SensorId, Worker>,
    next_id: u64,
    faults: BTreeMap<SensorId, SpawnFault>,
}

struct Inner {
    state: Mutex<State>,
    robot: Arc<dyn Robot>,
    config: StmConfig,
    events: broadcast::Sender<StmEvent>,
    live: Arc<StdMutex<BTreeMap<SensorId, usize>>>,
}

/// Counts a running worker task for the ownership audit; dropped with the
/// task's future, including on abort.
struct LiveGuard {
    live: Arc<StdMutex<BTreeMap<SensorId, usize>>>,
    sensor: SensorId,
}

impl LiveGuard {
    fn new(live: Arc<StdMutex<BTreeMap<SensorId, usize>>>, sensor: SensorId) -> Self {
        *live.lock().unwrap().entry(sensor).or_default() += 1;
        LiveGuard { live, sensor }
    }
}

impl Drop for LiveGuard {
    fn drop(&mut self) {
        let mut live = self.live.lock().unwrap();
        if let Some(n) = live.get_mut(&self.sensor) {
            *n -= 1;
            if *n == 0 {
                live.remove(&self.sensor);
            }
        }
    }
}

#[derive(Clone)]
pub struct Stm {
    inner: Arc<Inner>,
}

impl Stm {
    pub fn new(robot: Arc<dyn Robot>, config: StmConfig) -> Self {
        let (events, _) = broadcast::channel(1024);
        Stm {
            inner: Arc::new(Inner {
                state: Mutex::new(State { next_id: 1, ..State::default() }),
                robot,
                config,
                events,
                live: Arc::default(),
            }),
        }
    }

    pub fn config(&self) -> &StmConfig {
        &self.inner.config
    }

    pub fn subscribe(&self) -> broadcast::Receiver<StmEvent> {
        self.inner.events.subscribe()
    }

    fn emit(&self, event: StmEvent) {
        debug!(?event, "stm");
        let _ = self.inner.events.send(event);
    }

    pub async fn set_spawn_fault(&self, sensor: SensorId, fault: SpawnFault) {
        self.inner.state.lock().await.faults.insert(sensor, fault);
    }

    fn spawn(&self, state: &mut State, sensor: SensorId, skill: &SkillDescriptor) -> Result<Worker> {
        let fault = state.faults.get(&sensor).copied().unwrap_or_default();
        if fault == SpawnFault::Fail {
            return Err(Error::SpawnFailure(sensor));
        }
        let id = state.next_id;
        state.next_id += 1;
        let heartbeat = Arc::new(StdMutex::new(Heartbeat { at: Instant::now(), wall: Utc::now() }));
        // subscribe before spawning so no event between bind and first poll is lost
        let mut sensor_events = self.inner.robot.subscribe();
        let guard = LiveGuard::new(self.inner.live.clone(), sensor);
        let robot = self.inner.robot.clone();
        let events = self.inner.events.clone();
        let hb = heartbeat.clone();
        let beat = self.inner.config.period / 2;
        let descriptor = skill.clone();
        let handle = tokio::spawn(async move {
            let _guard = guard;
            if fault == SpawnFault::Crash {
                return;
            }
            let mut ticker = tokio::time::interval(beat.max(Duration::from_millis(1)));
            loop {
                tokio::select! {
                    _ = ticker.tick() => {
                        let mut h = hb.lock().unwrap();
                        h.at = Instant::now();
                        h.wall = Utc::now();
                    }
                    received = sensor_events.recv() => match received {
                        Ok(ev) if ev.sensor == sensor => {
                            let result = run_skill(robot.as_ref(), &descriptor, &BTreeMap::new()).await;
                            let _ = events.send(StmEvent::Fired {
                                sensor,
                                worker_id: id,
                                skill: descriptor.name.clone(),
                                event_id: ev.event_id,
                                error: result.err().map(|e| e.to_string()),
                            });
                        }
                        Ok(_) => {}
                        Err(broadcast::error::RecvError::Lagged(n)) => warn!(%sensor, n, "worker lagged behind sensor events"),
                        Err(broadcast::error::RecvError::Closed) => return,
                    },
                }
            }
        });
        Ok(Worker { id, skill: skill.clone(), handle, heartbeat, consecutive_restarts: 0, retry_at: None })
    }

    async fn stop(worker: Worker) -> u64 {
        worker.handle.abort();
        let _ = worker.handle.await;
        worker.id
    }

    fn is_alive(&self, worker: &Worker) -> bool {
        if worker.handle.is_finished() {
            return false;
        }
        worker.heartbeat.lock().unwrap().at.elapsed() <= self.inner.config.period * 2
    }

    /// Binds `skill` to a free sensor and starts its worker.
    pub async fn bind(&self, sensor: SensorId, skill: &SkillDescriptor) -> Result<u64> {
        let mut state = self.inner.state.lock().await;
        if state.workers.contains_key(&sensor) {
            return Err(Error::AlreadyBound(sensor));
        }
        let worker = match self.spawn(&mut state, sensor, skill) {
            Ok(w) => w,
            Err(e) => {
                self.emit(StmEvent::SpawnFailed { sensor, error: e.to_string() });
                return Err(e);
            }
        };
        let id = worker.id;
        state.workers.insert(sensor, worker);
        self.emit(StmEvent::Spawned { sensor, worker_id: id, skill: skill.name.clone() });
        self.persist(&state)?;
        Ok(id)
    }

    /// Replaces the skill of a bound sensor. The old worker is stopped and
    /// joined before the new one starts, so the sensor never has two owners.
    pub async fn update(&self, sensor: SensorId, skill: &SkillDescriptor) -> Result<u64> {
        let mut state = self.inner.state.lock().await;
        let old = state.workers.remove(&sensor).ok_or(Error::NotBound(sensor))?;
        let old_skill = old.skill.clone();
        let old_id = Self::stop(old).await;
        self.emit(StmEvent::Stopped { sensor, worker_id: old_id });
        match self.spawn(&mut state, sensor, skill) {
            Ok(worker) => {
                let id = worker.id;
                state.workers.insert(sensor, worker);
                self.emit(StmEvent::Spawned { sensor, worker_id: id, skill: skill.name.clone() });
                self.persist(&state)?;
                Ok(id)
            }
            Err(e) => {
                // keep the previous binding rather than leaving the sensor unowned
                self.emit(StmEvent::SpawnFailed { sensor, error: e.to_string() });
                if let Ok(w) = self.spawn(&mut state, sensor, &old_skill) {
                    let id = w.id;
                    state.workers.insert(sensor, w);
                    self.emit(StmEvent::Spawned { sensor, worker_id: id, skill: old_skill.name.clone() });
                }
                self.persist(&state)?;
                Err(e)
            }
        }
    }

    pub async fn unbind(&self, sensor: SensorId) -> Result<()> {
        let mut state = self.inner.state.lock().await;
        let worker = state.workers.remove(&sensor).ok_or(Error::NotBound(sensor))?;
        let id = Self::stop(worker).await;
        self.emit(StmEvent::Stopped { sensor, worker_id: id });
        self.persist(&state)
    }

    /// Stops every worker without changing the persisted table.
    pub async fn shutdown(&self) {
        let mut state = self.inner.state.lock().await;
        let workers = std::mem::take(&mut state.workers);
        for (_, w) in workers {
            Self::stop(w).await;
        }
    }

    /// Fault-injection hook: kills the worker task of `sensor` and waits
    /// until it has finished. The binding stays, so the next probe sees an
    /// inactive worker.
    pub async fn kill_worker(&self, sensor: SensorId) -> Result<u64> {
        let state = self.inner.state.lock().await;
        let worker = state.workers.get(&sensor).ok_or(Error::NotBound(sensor))?;
        worker.handle.abort();
        while !worker.handle.is_finished() {
            tokio::task::yield_now().await;
        }
        Ok(worker.id)
    }

    pub async fn probe(&self, sensor: SensorId) -> Result<WorkerStatus> {
        let state = self.inner.state.lock().await;
        let worker = state.workers.get(&sensor).ok_or(Error::NotBound(sensor))?;
        Ok(if self.is_alive(worker) { WorkerStatus::Active } else { WorkerStatus::Inactive })
    }

    fn record(&self, out: &mut Vec<StmEvent>, event: StmEvent) {
        out.push(event.clone());
        self.emit(event);
    }

    /// One supervision pass over all bindings. Returns the restart, backoff
    /// and spawn-failure events it produced; healthy workers produce none.
    pub async fn tick(&self) -> Result<Vec<StmEvent>> {
        let mut out = Vec::new();
        let mut state = self.inner.state.lock().await;
        let now = Instant::now();
        let sensors: Vec<SensorId> = state.workers.keys().copied().collect();
        let mut changed = false;
        for sensor in sensors {
            let worker = &state.workers[&sensor];
            if self.is_alive(worker) {
                let w = state.workers.get_mut(&sensor).unwrap();
                w.consecutive_restarts = 0;
                w.retry_at = None;
                continue;
            }
            if worker.retry_at.is_some_and(|t| now < t) {
                continue;
            }
            let attempt = worker.consecutive_restarts;
            if attempt >= self.inner.config.burst && worker.retry_at.is_none() {
                let exp = (attempt - self.inner.config.burst).min(20);
                let delay = (self.inner.config.backoff_base * 2u32.pow(exp)).min(self.inner.config.backoff_max);
                state.workers.get_mut(&sensor).unwrap().retry_at = Some(now + delay);
                self.record(&mut out, StmEvent::BackedOff { sensor, attempt, retry_in_ms: delay.as_millis() as u64 });
                continue;
            }
            let skill = worker.skill.clone();
            let old = state.workers.remove(&sensor).unwrap();
            let old_id = old.id;
            old.handle.abort();
            match self.spawn(&mut state, sensor, &skill) {
                Ok(mut fresh) => {
                    fresh.consecutive_restarts = attempt + 1;
                    let id = fresh.id;
                    state.workers.insert(sensor, fresh);
                    self.record(&mut out, StmEvent::Restarted { sensor, old_worker_id: old_id, worker_id: id, attempt: attempt + 1 });
                }
                Err(e) => {
                    self.record(&mut out, StmEvent::SpawnFailed { sensor, error: e.to_string() });
                    let mut old = old;
                    old.consecutive_restarts = attempt + 1;
                    old.retry_at = None;
                    state.workers.insert(sensor, old);
                }
            }
            changed = true;
        }
        if changed {
            self.persist(&state)?;
        }
        Ok(out)
    }

    /// Runs [`Stm::tick`] every period until the returned handle is aborted.
    pub fn start_supervisor(&self) -> JoinHandle<()> {
        let stm = self.clone();
        tokio::spawn(async move {
            let mut interval = tokio::time::interval(stm.inner.config.period);
            interval.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Delay);
            loop {
                interval.tick().await;
                if let Err(e) = stm.tick().await {
                    warn!(error = %e, "supervision pass failed");
                }
            }
        })
    }

    fn entries(&self, state: &State) -> Vec<ProcessTableEntry> {
        state
            .workers
            .iter()
            .map(|(sensor, w)| ProcessTableEntry {
                sensor: *sensor,
                worker_id: w.id,
                skill: w.skill.name.clone(),
                status: if self.is_alive(w) { WorkerStatus::Active } else { WorkerStatus::Inactive },
                heartbeat_at: Some(w.heartbeat.lock().unwrap().wall),
            })
            .collect()
    }

    /// Current table with live status.
    pub async fn snapshot(&self) -> ProcessTable {
        let state = self.inner.state.lock().await;
        ProcessTable { version: TABLE_VERSION, entries: self.entries(&state) }
    }

    fn persist(&self, state: &State) -> Result<()> {
        let Some(path) = &self.inner.config.table_path else {
            return Ok(());
        };
        let table = ProcessTable { version: TABLE_VERSION, entries: self.entries(state) };
        let bytes = serde_json::to_vec_pretty(&table).map_err(|e| Error::Persistence {
            path: path.clone(),
            reason: e.to_string(),
        })?;
        write_atomic(path, &bytes).map_err(|e| Error::Persistence { path: path.clone(), reason: e.to_string() })
    }

    pub async fn save(&self) -> Result<()> {
        let state = self.inner.state.lock().await;
        self.persist(&state)
    }

    /// Number of worker tasks currently running for `sensor`. Always 0 or 1.
    pub fn live_workers(&self, sensor: SensorId) -> usize {
        self.inner.live.lock().unwrap().get(&sensor).copied().unwrap_or(0)
    }

    pub fn live_total(&self) -> usize {
        self.inner.live.lock().unwrap().values().sum()
    }

    /// Reads a persisted table. A missing file is an empty table.
    pub fn read_table(path: &Path) -> Result<ProcessTable> {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Ok(ProcessTable { version: TABLE_VERSION, entries: vec![] })
            }
            Err(e) => return Err(Error::CorruptTable { path: path.into(), reason: e.to_string() }),
        };
        let table: ProcessTable =
            serde_json::from_str(&text).map_err(|e| Error::CorruptTable { path: path.into(), reason: e.to_string() })?;
        if table.version != TABLE_VERSION {
            return Err(Error::CorruptTable { path: path.into(), reason: format!("unsupported version {}", table.version) });
        }
        let mut seen = BTreeSet::new();
        for e in &table.entries {
            if !seen.insert(e.sensor) {
                return Err(Error::CorruptTable { path: path.into(), reason: format!("sensor {} listed twice", e.sensor) });
            }
        }
        Ok(table)
    }

    /// Rebuilds bindings from the configured table. Worker ids are fresh and
    /// larger than every persisted id; entries whose skill is no longer in
    /// `inventory` are dropped.
    pub async fn recover(&self, inventory: &SkillInventory) -> Result<RecoverReport> {
        let Some(path) = self.inner.config.table_path.clone() else {
            return Ok(RecoverReport::default());
        };
        let table = Self::read_table(&path)?;
        let mut report = RecoverReport::default();
        let mut state = self.inner.state.lock().await;
        let max_id = table.entries.iter().map(|e| e.worker_id).max().unwrap_or(0);
        state.next_id = state.next_id.max(max_id + 1);
        for entry in table.entries {
            if state.workers.contains_key(&entry.sensor) {
                report.dropped.push((entry.sensor, entry.skill, "already bound".into()));
                continue;
            }
            let Some(skill) = inventory.get(&entry.skill) else {
                report.dropped.push((entry.sensor, entry.skill.clone(), Error::UnknownSkill(entry.skill).to_string()));
                continue;
            };
            match self.spawn(&mut state, entry.sensor, skill) {
                Ok(w) => {
                    report.restored.push((entry.sensor, entry.worker_id, w.id));
                    self.emit(StmEvent::Spawned { sensor: entry.sensor, worker_id: w.id, skill: skill.name.clone() });
                    state.workers.insert(entry.sensor, w);
                }
                Err(e) => report.dropped.push((entry.sensor, entry.skill, e.to_string())),
            }
        }
        self.persist(&state)?;
        Ok(report)
    }
}
