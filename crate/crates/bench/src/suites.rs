//! Suite runners. Each suite generates its dataset once from the seed and
//! evaluates it `runs` times against fresh scripted components.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::{Arc, RwLock};
use std::time::Duration;

use pilot_core::embedding::{ranked, Embedder};
use pilot_core::llm::{Gateway, RuleTable, ScriptedProvider};
use pilot_core::memory::MemoryStore;
use pilot_core::pia::PiaAgent;
use pilot_core::robot::{RobotAction, RobotSim};
use pilot_core::router::Router;
use pilot_core::sia::{SiaAgent, SiaConfig};
use pilot_core::skills::{run_skill, scan_skills, SkillInventory, SKILL_SUFFIX};
use pilot_core::stm::{Stm, StmConfig, StmEvent};
use pilot_core::{
    EmotionLabel, Error, Orchestrator, OrchestratorParts, Outcome, PiaCommand, ReferenceEmbedder, Result, RouteTarget,
    Script, SensorId, SkillDescriptor, TaskInstruction, WorkerStatus,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::datasets::*;
use crate::report::Report;
use crate::stats::median;

pub const DEFAULT_RUNS: u32 = 5;
pub const DEFAULT_SEED: u64 = 2025;
pub const FIRE_TIMEOUT: Duration = Duration::from_secs(2);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Route,
    SensorBind,
    TaskParser,
    FastThinking,
    ToolExt,
    Latency,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Route, Suite::SensorBind, Suite::TaskParser, Suite::FastThinking, Suite::ToolExt, Suite::Latency];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Route => "route",
            Suite::SensorBind => "sensorbind",
            Suite::TaskParser => "taskparser",
            Suite::FastThinking => "fastthinking",
            Suite::ToolExt => "toolext",
            Suite::Latency => "latency",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Sizes {
    pub route: usize,
    pub sensorbind_easy: usize,
    pub sensorbind_hard: usize,
    pub taskparser_easy: usize,
    pub taskparser_hard: usize,
    pub taskparser_hard_turns: usize,
    pub fastthinking: usize,
    pub toolext_scales: Vec<usize>,
    pub latency_tasks: usize,
}

impl Default for Sizes {
    fn default() -> Self {
        Sizes {
            route: 100,
            sensorbind_easy: 20,
            sensorbind_hard: 20,
            taskparser_easy: 7,
            taskparser_hard: 33,
            taskparser_hard_turns: 228,
            fastthinking: 46,
            toolext_scales: vec![30, 50, 70, 100],
            latency_tasks: LATENCY_TASKS.len(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub runs: u32,
    pub seed: u64,
    pub sizes: Sizes,
    /// Simulated per-call provider latency for the latency suite.
    pub provider_delay: Duration,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            runs: DEFAULT_RUNS,
            seed: DEFAULT_SEED,
            sizes: Sizes::default(),
            provider_delay: Duration::from_millis(300),
        }
    }
}

/// One delivered utterance as observed on the robot side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpokenLine {
    pub emotion: EmotionLabel,
    pub rate: f64,
}

/// A report plus everything the SIA delivered while producing it.
#[derive(Debug, Clone)]
pub struct SuiteOutput {
    pub report: Report,
    pub spoken: Vec<SpokenLine>,
    pub scripts: Vec<Script>,
}

pub async fn run_suite(suite: Suite, cfg: &BenchConfig) -> Result<Report> {
    Ok(run_suite_detailed(suite, cfg).await?.report)
}

pub async fn run_suite_detailed(suite: Suite, cfg: &BenchConfig) -> Result<SuiteOutput> {
    let mut out = SuiteOutput {
        report: Report {
            suite: suite.to_string(),
            runs: cfg.runs,
            seed: cfg.seed,
            conditions: vec![],
            artifacts: BTreeMap::new(),
        },
        spoken: vec![],
        scripts: vec![],
    };
    match suite {
        Suite::Route => route(cfg, &mut out).await?,
        Suite::SensorBind => sensorbind(cfg, &mut out).await?,
        Suite::TaskParser => taskparser(cfg, &mut out).await?,
        Suite::FastThinking => fastthinking(cfg, &mut out).await?,
        Suite::ToolExt => toolext(cfg, &mut out).await?,
        Suite::Latency => latency(cfg, &mut out).await?,
    }
    Ok(out)
}

fn ratio(hits: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

/// Per-run values for each (condition, metric) in insertion order.
#[derive(Default)]
struct Collector {
    order: Vec<(String, String)>,
    values: BTreeMap<(String, String), Vec<f64>>,
}

impl Collector {
    fn add(&mut self, name: &str, metric: &str, v: f64) {
        let key = (name.to_string(), metric.to_string());
        if !self.values.contains_key(&key) {
            self.order.push(key.clone());
        }
        self.values.entry(key).or_default().push(v);
    }

    fn finish(self, report: &mut Report) {
        for key in self.order {
            let values = self.values[&key].clone();
            report.conditions.push(crate::report::Condition::from_runs(key.0, key.1, values));
        }
    }
}

fn gateway(rules: RuleTable) -> Gateway {
    Gateway::new(Arc::new(ScriptedProvider::new(rules)))
}

fn memory() -> Arc<MemoryStore> {
    Arc::new(MemoryStore::ephemeral(Arc::new(ReferenceEmbedder::default()), pilot_core::memory::DEFAULT_TAU).expect("valid tau"))
}

fn record_script(out: &mut SuiteOutput, script: &Script, delivery: &pilot_core::sia::DeliveryReport) {
    out.scripts.push(script.clone());
    out.spoken.extend(delivery.utterances.iter().map(|u| SpokenLine { emotion: u.emotion, rate: u.rate }));
}

// ----------------------------------------------------------------- route

async fn route(cfg: &BenchConfig, out: &mut SuiteOutput) -> Result<()> {
    let items = route_dataset(cfg.seed, cfg.sizes.route)?;
    let rules = route_rules(&items);
    let mut c = Collector::default();
    for _ in 0..cfg.runs {
        let router = Router::new(gateway(rules.clone()));
        let mut per: BTreeMap<String, (usize, usize)> = BTreeMap::new();
        for item in &items {
            let ok = match TaskInstruction::new("bench", &item.text) {
                Ok(inst) => router.route(&inst, None).await.map(|d| d.target == item.target).unwrap_or(false),
                Err(_) => false,
            };
            let agent = match item.target {
                RouteTarget::Sia => "SIA",
                RouteTarget::Pia => "PIA",
            };
            for key in [format!("{agent}-{}", item.difficulty), "overall".to_string()] {
                let e = per.entry(key).or_default();
                e.0 += usize::from(ok);
                e.1 += 1;
            }
        }
        for name in ["SIA-Easy", "SIA-Hard", "PIA-Easy", "PIA-Hard", "overall"] {
            let (h, n) = per.get(name).copied().unwrap_or_default();
            c.add(name, "accuracy", ratio(h, n));
        }
    }
    c.finish(&mut out.report);
    let sia = items.iter().filter(|i| i.target == RouteTarget::Sia).count();
    out.report.artifacts.insert("items".into(), json!(items.len()));
    out.report.artifacts.insert("sia_items".into(), json!(sia));
    out.report.artifacts.insert("pia_items".into(), json!(items.len() - sia));
    Ok(())
}

// ------------------------------------------------------------ sensorbind

/// Robot requests `skill` produces when run on its own; the oracle the
/// fired actions are compared against.
pub async fn expected_requests(skill: &SkillDescriptor) -> Result<Vec<(pilot_core::RobotOp, serde_json::Map<String, Value>)>> {
    let scratch = RobotSim::new();
    run_skill(scratch.as_ref(), skill, &BTreeMap::new()).await?;
    Ok(scratch.action_log(0).into_iter().map(|a| (a.op, a.args)).collect())
}

fn same_requests(log: &[RobotAction], expected: &[(pilot_core::RobotOp, serde_json::Map<String, Value>)]) -> bool {
    log.len() == expected.len() && log.iter().zip(expected).all(|(a, (op, args))| a.op == *op && &a.args == args)
}

/// Touches `sensor` and waits until its worker reports the firing.
pub async fn touch_and_wait(robot: &RobotSim, stm: &Stm, sensor: SensorId) -> Result<Vec<RobotAction>> {
    let mut rx = stm.subscribe();
    let before = robot.last_seq();
    let event_id = robot.inject_sensor_event(sensor);
    let wait = async {
        loop {
            match rx.recv().await {
                Ok(StmEvent::Fired { sensor: s, event_id: e, error, .. }) if s == sensor && e == event_id => {
                    return match error {
                        None => Ok(()),
                        Some(e) => Err(Error::RobotUnreachable(e)),
                    };
                }
                Ok(_) => {}
                Err(tokio::sync::broadcast::error::RecvError::Lagged(_)) => {}
                Err(e) => return Err(Error::InvalidInput(e.to_string())),
            }
        }
    };
    tokio::time::timeout(FIRE_TIMEOUT, wait)
        .await
        .map_err(|_| Error::InvalidInput(format!("{sensor} did not fire within {FIRE_TIMEOUT:?}")))??;
    Ok(robot.action_log(before))
}

pub fn write_skill_files(dir: &Path, skills: &[SkillDescriptor]) -> Result<()> {
    for s in skills {
        let path = dir.join(format!("{}{SKILL_SUFFIX}", s.name));
        let text = serde_json::to_string_pretty(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        std::fs::write(&path, text)?;
    }
    Ok(())
}

struct Rig {
    orchestrator: Orchestrator,
    robot: Arc<RobotSim>,
    inventory: SkillInventory,
}

fn rig(inventory: SkillInventory, sia: SiaConfig, provider: ScriptedProvider) -> Rig {
    let robot = RobotSim::new();
    let stm = Stm::new(robot.clone(), StmConfig::default());
    let orchestrator = Orchestrator::new(OrchestratorParts {
        gateway: Gateway::new(Arc::new(provider)),
        memory: memory(),
        robot: robot.clone(),
        inventory: inventory.clone(),
        stm,
        sia,
    });
    Rig { orchestrator, robot, inventory }
}

async fn check_binding_item(rig: &Rig, item: &SensorBindItem) -> Result<bool> {
    let before = rig.robot.last_seq();
    let turn = rig.orchestrator.submit("bench", &item.text).await?;
    let mut ok = turn.is_ok() && turn.commands == item.expected && turn.outcomes.iter().all(|o| o.outcome == Outcome::Ok);
    let stm = rig.orchestrator.stm();
    let invoked: Vec<&str> = item
        .expected
        .iter()
        .filter_map(|c| match c {
            PiaCommand::Invoke { skill, .. } => Some(skill.as_str()),
            _ => None,
        })
        .collect();
    if ok && !invoked.is_empty() {
        let mut want = Vec::new();
        for skill in &invoked {
            want.extend(expected_requests(rig.inventory.require(skill)?).await?);
        }
        ok = same_requests(&rig.robot.action_log(before), &want);
    }
    let table = stm.snapshot().await;
    for c in &item.expected {
        if let PiaCommand::Bind { sensor, skill } = c {
            let active = table
                .entries
                .iter()
                .any(|e| e.sensor == *sensor && &e.skill == skill && e.status == WorkerStatus::Active);
            if !ok || !active {
                ok = false;
                break;
            }
            let want = expected_requests(rig.inventory.require(skill)?).await?;
            ok = match touch_and_wait(&rig.robot, stm, *sensor).await {
                Ok(log) => same_requests(&log, &want),
                Err(_) => false,
            };
        }
    }
    for e in table.entries {
        stm.unbind(e.sensor).await?;
    }
    Ok(ok)
}

async fn sensorbind(cfg: &BenchConfig, out: &mut SuiteOutput) -> Result<()> {
    let items = sensorbind_dataset(cfg.seed, cfg.sizes.sensorbind_easy, cfg.sizes.sensorbind_hard)?;
    let rules = sensorbind_rules(&items);
    let dir = tempfile::tempdir()?;
    let skills: Vec<SkillDescriptor> = crate::banks::SKILLS.iter().map(demo_skill).collect();
    write_skill_files(dir.path(), &skills)?;
    let scan = scan_skills(dir.path())?;
    let mut c = Collector::default();
    for _ in 0..cfg.runs {
        let rig = rig(scan.inventory.clone(), SiaConfig::default(), ScriptedProvider::new(rules.clone()));
        let mut per: BTreeMap<Difficulty, (usize, usize)> = BTreeMap::new();
        for item in &items {
            let ok = check_binding_item(&rig, item).await.unwrap_or(false);
            let e = per.entry(item.difficulty).or_default();
            e.0 += usize::from(ok);
            e.1 += 1;
        }
        rig.orchestrator.stm().shutdown().await;
        for d in [Difficulty::Easy, Difficulty::Hard] {
            let (h, n) = per.get(&d).copied().unwrap_or_default();
            c.add(&d.to_string(), "accuracy", ratio(h, n));
        }
    }
    c.finish(&mut out.report);
    out.report.artifacts.insert("items".into(), json!(items.len()));
    out.report.artifacts.insert("skills".into(), json!(scan.inventory.len()));
    Ok(())
}

// ------------------------------------------------------------ taskparser

async fn taskparser(cfg: &BenchConfig, out: &mut SuiteOutput) -> Result<()> {
    let dialogues = taskparser_dataset(
        cfg.seed,
        cfg.sizes.taskparser_easy,
        cfg.sizes.taskparser_hard,
        cfg.sizes.taskparser_hard_turns,
    )?;
    let rules = taskparser_rules(&dialogues);
    let mut c = Collector::default();
    for run in 0..cfg.runs {
        let robot = RobotSim::new();
        let agent = SiaAgent::new(gateway(rules.clone()), memory(), robot, SiaConfig::default());
        let mut per: BTreeMap<Difficulty, [(usize, usize); 2]> = BTreeMap::new();
        for d in &dialogues {
            let mut session = agent.new_session();
            let mut dialogue_ok = true;
            for turn in &d.turns {
                let ok = match agent.respond(&mut session, &turn.text).await {
                    Ok(t) => {
                        if run == 0 {
                            record_script(out, &t.script, &t.delivery);
                        }
                        t.action == turn.expected_action && t.state.as_ref() == Some(&turn.expected_state)
                    }
                    Err(_) => false,
                };
                dialogue_ok &= ok;
                let e = per.entry(d.difficulty).or_default();
                e[0].0 += usize::from(ok);
                e[0].1 += 1;
            }
            let e = per.entry(d.difficulty).or_default();
            e[1].0 += usize::from(dialogue_ok);
            e[1].1 += 1;
        }
        for d in [Difficulty::Easy, Difficulty::Hard] {
            let [turns, dialogues] = per.get(&d).copied().unwrap_or_default();
            c.add(&d.to_string(), "accuracy", ratio(turns.0, turns.1));
            c.add(&d.to_string(), "dialogue_accuracy", ratio(dialogues.0, dialogues.1));
        }
    }
    c.finish(&mut out.report);
    let turns: usize = dialogues.iter().map(|d| d.turns.len()).sum();
    out.report.artifacts.insert("dialogues".into(), json!(dialogues.len()));
    out.report.artifacts.insert("turns".into(), json!(turns));
    Ok(())
}

// ---------------------------------------------------------- fastthinking

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct RetrievalStats {
    pub queries: usize,
    pub top1: f64,
    pub rank1_mean: f64,
    pub rank1_std: f64,
    pub rank2_mean: f64,
    pub rank2_std: f64,
    pub margin_mean: f64,
}

fn retrieval_stats(results: &[(bool, f64, f64)]) -> RetrievalStats {
    let r1: Vec<f64> = results.iter().map(|r| r.1).collect();
    let r2: Vec<f64> = results.iter().map(|r| r.2).collect();
    let margins: Vec<f64> = results.iter().map(|r| r.2 - r.1).collect();
    RetrievalStats {
        queries: results.len(),
        top1: ratio(results.iter().filter(|r| r.0).count(), results.len()),
        rank1_mean: crate::stats::mean(&r1),
        rank1_std: crate::stats::std_dev(&r1),
        rank2_mean: crate::stats::mean(&r2),
        rank2_std: crate::stats::std_dev(&r2),
        margin_mean: crate::stats::mean(&margins),
    }
}

/// Fast Path and Raw Text retrieval over the same tasks.
pub async fn fastthinking_eval(tasks: &[FastTask], rules: &RuleTable) -> Result<(RetrievalStats, RetrievalStats)> {
    let embedder = ReferenceEmbedder::default();
    let fast_store = memory();
    let raw_store = memory();
    let filler = Script::single("stored", EmotionLabel::Neutral)?;
    for t in tasks {
        fast_store.store(&t.canonical, filler.clone()).await?;
        raw_store.store(&t.seed_text, filler.clone()).await?;
    }
    let fast_records = fast_store.records();
    let raw_records = raw_store.records();
    let agent = SiaAgent::new(gateway(rules.clone()), memory(), RobotSim::new(), SiaConfig::default());
    let mut fast = Vec::new();
    let mut raw = Vec::new();
    for (i, t) in tasks.iter().enumerate() {
        for v in &t.variants {
            let key = match agent.parse_action(v, None, Default::default()).await? {
                pilot_core::SiaAction::New { main_task, .. } => main_task,
                other => return Err(Error::InvalidInput(format!("expected NEW, got {}", other.name()))),
            };
            for (records, query, sink) in [(&fast_records, key.as_str(), &mut fast), (&raw_records, v.as_str(), &mut raw)] {
                let r = ranked(&embedder.embed(query).await?, records)?;
                let d1 = r.first().map(|x| x.1).unwrap_or(1.0);
                let d2 = r.get(1).map(|x| x.1).unwrap_or(1.0);
                sink.push((r.first().map(|x| x.0) == Some(i), d1, d2));
            }
        }
    }
    Ok((retrieval_stats(&fast), retrieval_stats(&raw)))
}

async fn fastthinking(cfg: &BenchConfig, out: &mut SuiteOutput) -> Result<()> {
    let tasks = fastthinking_dataset(cfg.seed, cfg.sizes.fastthinking)?;
    let rules = fastthinking_rules(&tasks);
    let mut c = Collector::default();
    let mut last = None;
    for _ in 0..cfg.runs {
        let (fast, raw) = fastthinking_eval(&tasks, &rules).await?;
        for (name, s) in [("Fast Path", fast), ("Raw Text", raw)] {
            c.add(name, "top1", s.top1);
            c.add(name, "rank1_dist", s.rank1_mean);
            c.add(name, "rank1_dist_std", s.rank1_std);
            c.add(name, "rank2_dist", s.rank2_mean);
            c.add(name, "rank2_dist_std", s.rank2_std);
            c.add(name, "rank_margin", s.margin_mean);
        }
        last = Some((fast, raw));
    }
    c.finish(&mut out.report);
    out.report.artifacts.insert("canonical_tasks".into(), json!(tasks.len()));
    out.report.artifacts.insert("commands".into(), json!(tasks.iter().map(|t| t.variants.len()).sum::<usize>()));
    if let Some((fast, raw)) = last {
        out.report.artifacts.insert("fast_path".into(), json!(fast));
        out.report.artifacts.insert("raw_text".into(), json!(raw));
    }
    Ok(())
}

// --------------------------------------------------------------- toolext

#[derive(Debug, Clone, Serialize)]
pub struct ToolExtOutcome {
    pub scale: usize,
    pub scanned: usize,
    pub success: f64,
}

/// Scans `set` from disk and resolves every selection query once.
pub async fn toolext_eval(set: &ToolExtSet) -> Result<ToolExtOutcome> {
    let dir = tempfile::tempdir()?;
    write_skill_files(dir.path(), &set.skills)?;
    let scan = scan_skills(dir.path())?;
    let robot = RobotSim::new();
    let stm = Stm::new(robot.clone(), StmConfig::default());
    let inventory = Arc::new(RwLock::new(scan.inventory.clone()));
    let agent = PiaAgent::new(gateway(toolext_rules(set)), inventory, stm, robot.clone());
    let mut hits = 0;
    for q in &set.queries {
        let before = robot.last_seq();
        let want = vec![PiaCommand::Invoke { skill: q.skill.clone(), args: BTreeMap::new() }];
        let ok = match agent.respond(&q.text).await {
            Ok(turn) if turn.all_ok() && turn.commands == want => {
                let expected = expected_requests(scan.inventory.require(&q.skill)?).await?;
                same_requests(&robot.action_log(before), &expected)
            }
            _ => false,
        };
        hits += usize::from(ok);
    }
    Ok(ToolExtOutcome { scale: set.scale, scanned: scan.inventory.len(), success: ratio(hits, set.queries.len()) })
}

async fn toolext(cfg: &BenchConfig, out: &mut SuiteOutput) -> Result<()> {
    let sets: Vec<ToolExtSet> =
        cfg.sizes.toolext_scales.iter().map(|&n| toolext_dataset(cfg.seed, n)).collect::<Result<_>>()?;
    let mut c = Collector::default();
    let mut scanned = BTreeMap::new();
    for _ in 0..cfg.runs {
        for set in &sets {
            let o = toolext_eval(set).await?;
            c.add(&format!("scale-{}", set.scale), "success", o.success);
            scanned.insert(set.scale.to_string(), o.scanned);
        }
    }
    c.finish(&mut out.report);
    out.report.artifacts.insert("scanned".into(), json!(scanned));
    Ok(())
}

// --------------------------------------------------------------- latency

#[derive(Debug, Clone, Serialize)]
pub struct LatencySample {
    pub task: String,
    pub slow_ms: f64,
    pub fast_ms: f64,
    pub fast_script_writes: usize,
    pub fast_path_hit: bool,
}

/// Submits each task twice: once into an empty memory, once after the
/// first submission stored its script.
pub async fn latency_once(delay: Duration, tasks: usize) -> Result<(Vec<LatencySample>, Vec<(Script, pilot_core::sia::DeliveryReport)>)> {
    let provider = ScriptedProvider::new(latency_rules()).with_delay(delay);
    let sia = SiaConfig { auto_store: true, ..SiaConfig::default() };
    let rig = rig(demo_inventory(), sia, provider);
    let mut samples = Vec::new();
    let mut delivered = Vec::new();
    for (i, (text, _)) in LATENCY_TASKS.iter().take(tasks).enumerate() {
        let slow = rig.orchestrator.submit(&format!("first-{i}"), text).await?;
        let fast = rig.orchestrator.submit(&format!("second-{i}"), text).await?;
        if let Some(e) = slow.error.as_ref().or(fast.error.as_ref()) {
            return Err(Error::InvalidInput(format!("latency turn failed: {}", e.message)));
        }
        for r in [&slow, &fast] {
            if let (Some(s), Some(d)) = (&r.script, &r.delivery) {
                delivered.push((s.clone(), d.clone()));
            }
        }
        samples.push(LatencySample {
            task: text.to_string(),
            slow_ms: slow.elapsed_ms,
            fast_ms: fast.elapsed_ms,
            fast_script_writes: fast.trace.count("write_script"),
            fast_path_hit: fast.path == Some(pilot_core::sia::ThinkingPath::Fast),
        });
    }
    rig.orchestrator.stm().shutdown().await;
    Ok((samples, delivered))
}

async fn latency(cfg: &BenchConfig, out: &mut SuiteOutput) -> Result<()> {
    let mut c = Collector::default();
    let mut samples = Vec::new();
    for run in 0..cfg.runs {
        let (s, delivered) = latency_once(cfg.provider_delay, cfg.sizes.latency_tasks).await?;
        if run == 0 {
            for (script, d) in &delivered {
                record_script(out, script, d);
            }
        }
        let slow: Vec<f64> = s.iter().map(|x| x.slow_ms).collect();
        let fast: Vec<f64> = s.iter().map(|x| x.fast_ms).collect();
        let ratios: Vec<f64> = s.iter().map(|x| x.fast_ms / x.slow_ms).collect();
        c.add("slow", "ms", median(&slow));
        c.add("fast", "ms", median(&fast));
        c.add("fast/slow", "ratio", median(&ratios));
        c.add("fast", "script_writes", s.iter().map(|x| x.fast_script_writes as f64).sum());
        c.add("fast", "hit_rate", ratio(s.iter().filter(|x| x.fast_path_hit).count(), s.len()));
        samples.extend(s);
    }
    c.finish(&mut out.report);
    out.report.artifacts.insert("provider_delay_ms".into(), json!(cfg.provider_delay.as_millis() as u64));
    out.report.artifacts.insert("samples".into(), serde_json::to_value(&samples).unwrap_or(Value::Null));
    Ok(())
}
