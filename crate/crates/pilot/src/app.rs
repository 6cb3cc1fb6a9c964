//! Assembles a running system from a [`Config`]: skills, memory, robot,
//! recovered bindings and the supervisor.

use std::sync::Arc;
use std::time::Duration;

use pilot_core::embedding::{Embedder, HttpEmbedder};
use pilot_core::llm::{Gateway, HttpProvider, RuleTable, ScriptedProvider};
use pilot_core::memory::MemoryStore;
use pilot_core::robot::{HttpRobot, Robot, RobotSim};
use pilot_core::sia::SiaConfig;
use pilot_core::skills::{scan_skills, ScanReport};
use pilot_core::stm::{RecoverReport, Stm, StmConfig};
use pilot_core::{Error, Orchestrator, OrchestratorParts, ReferenceEmbedder, Result};
use serde::Serialize;
use tokio::task::JoinHandle;
use tracing::{info, warn};

use crate::config::{Config, EmbeddingMode, ProviderMode};

pub struct System {
    pub config: Config,
    pub orchestrator: Arc<Orchestrator>,
    /// Present when the robot is simulated in-process.
    pub sim: Option<Arc<RobotSim>>,
    pub skills: ScanReport,
    pub recovered: RecoverReport,
    supervisor: JoinHandle<()>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Readiness {
    pub ready: bool,
    pub skills: usize,
    pub skill_warnings: usize,
    pub bindings: usize,
    pub active_bindings: usize,
    pub memory_records: usize,
    pub robot: String,
    pub provider: ProviderMode,
}

fn gateway(config: &Config) -> Result<Gateway> {
    let p = &config.provider;
    let gateway = match p.mode {
        ProviderMode::Scripted => {
            let rules = match &p.rules {
                Some(path) => RuleTable::load(&config.resolve(path))?,
                None => RuleTable::default(),
            };
            Gateway::new(Arc::new(ScriptedProvider::new(rules).with_delay(Duration::from_millis(p.delay_ms))))
        }
        ProviderMode::Http => {
            let key = p.api_key_env.as_deref().and_then(|v| std::env::var(v).ok());
            let timeout = Duration::from_millis(p.timeout_ms);
            let light = p.light_endpoint.clone().ok_or_else(|| Error::InvalidInput("provider.light_endpoint".into()))?;
            let mut g = Gateway::new(Arc::new(HttpProvider::new(light, key.clone(), timeout)?));
            if let Some(heavy) = &p.heavy_endpoint {
                g = g.with_heavy(Arc::new(HttpProvider::new(heavy.clone(), key, timeout)?));
            }
            g
        }
    };
    Ok(gateway.with_max_retries(p.max_retries))
}

fn embedder(config: &Config) -> Result<Arc<dyn Embedder>> {
    let e = &config.embedding;
    Ok(match e.mode {
        EmbeddingMode::Reference => Arc::new(ReferenceEmbedder::new(e.dimension)?),
        EmbeddingMode::Http => Arc::new(HttpEmbedder::new(
            e.endpoint.clone().unwrap_or_default(),
            e.dimension,
            Duration::from_millis(e.timeout_ms),
        )?),
    })
}

impl System {
    /// Loads skills, memory and the process table, remounts persisted
    /// bindings and starts supervision. Corrupt memory or table files abort
    /// startup.
    pub async fn start(config: Config) -> Result<Self> {
        config.validate()?;
        let skills_dir = config.resolve(&config.skills_dir);
        let skills = scan_skills(&skills_dir).map_err(|e| match e {
            Error::Io(io) => Error::InvalidInput(format!("skills directory {}: {io}", skills_dir.display())),
            other => other,
        })?;
        for w in &skills.warnings {
            warn!(file = %w.file.display(), reason = %w.reason, "skipped skill file");
        }

        let embedder = embedder(&config)?;
        let memory = Arc::new(match &config.memory.path {
            Some(path) => MemoryStore::load(config.resolve(path), embedder, config.memory.tau)?,
            None => MemoryStore::ephemeral(embedder, config.memory.tau)?,
        });

        let (robot, sim): (Arc<dyn Robot>, Option<Arc<RobotSim>>) = match &config.robot_url {
            Some(url) => (HttpRobot::connect(url.clone(), Duration::from_millis(config.robot_timeout_ms))?, None),
            None => {
                let sim = RobotSim::new();
                (sim.clone(), Some(sim))
            }
        };

        let stm = Stm::new(
            robot.clone(),
            StmConfig {
                period: config.period(),
                burst: config.scheduler.burst,
                backoff_base: config.period(),
                backoff_max: Duration::from_millis(config.scheduler.backoff_max_ms),
                table_path: config.scheduler.table_path.as_ref().map(|p| config.resolve(p)),
            },
        );
        let recovered = stm.recover(&skills.inventory).await?;
        for (sensor, skill, reason) in &recovered.dropped {
            warn!(%sensor, skill, reason, "dropped persisted binding");
        }
        let supervisor = stm.start_supervisor();

        let orchestrator = Arc::new(Orchestrator::new(OrchestratorParts {
            gateway: gateway(&config)?,
            memory,
            robot,
            inventory: skills.inventory.clone(),
            stm,
            sia: SiaConfig { auto_store: config.memory.auto_store, ..SiaConfig::default() },
        }));
        info!(
            skills = skills.inventory.len(),
            bindings = recovered.restored.len(),
            memory = orchestrator.memory().len(),
            "system ready"
        );
        Ok(System { config, orchestrator, sim, skills, recovered, supervisor })
    }

    pub async fn readiness(&self) -> Readiness {
        let table = self.orchestrator.process_table().await;
        let active = table.entries.iter().filter(|e| e.status == pilot_core::WorkerStatus::Active).count();
        Readiness {
            ready: !self.supervisor.is_finished(),
            skills: self.skills.inventory.len(),
            skill_warnings: self.skills.warnings.len(),
            bindings: table.entries.len(),
            active_bindings: active,
            memory_records: self.orchestrator.memory().len(),
            robot: self.config.robot_url.clone().unwrap_or_else(|| "in-process simulator".into()),
            provider: self.config.provider.mode,
        }
    }

    /// Flushes persistence and stops every worker. The persisted table keeps
    /// its bindings so the next start remounts them.
    pub async fn stop(&self) -> Result<()> {
        self.supervisor.abort();
        let flushed = self.orchestrator.flush().await;
        self.orchestrator.stm().shutdown().await;
        flushed
    }
}

impl Drop for System {
    fn drop(&mut self) {
        self.supervisor.abort();
    }
}
