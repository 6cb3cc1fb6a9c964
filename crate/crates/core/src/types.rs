//! Domain types shared by every agent.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use uuid::Uuid;

use crate::emotion::Script;
use crate::error::{Error, Result};

/// The robot's ten touch sensors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SensorId {
    HeadTop,
    HeadFront,
    HeadBack,
    HeadLeft,
    HeadRight,
    Chin,
    BumperFrontLeft,
    BumperFrontRight,
    BumperRearLeft,
    BumperRearRight,
}

impl SensorId {
    pub const ALL: [SensorId; 10] = [
        SensorId::HeadTop,
        SensorId::HeadFront,
        SensorId::HeadBack,
        SensorId::HeadLeft,
        SensorId::HeadRight,
        SensorId::Chin,
        SensorId::BumperFrontLeft,
        SensorId::BumperFrontRight,
        SensorId::BumperRearLeft,
        SensorId::BumperRearRight,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SensorId::HeadTop => "head_top",
            SensorId::HeadFront => "head_front",
            SensorId::HeadBack => "head_back",
            SensorId::HeadLeft => "head_left",
            SensorId::HeadRight => "head_right",
            SensorId::Chin => "chin",
            SensorId::BumperFrontLeft => "bumper_front_left",
            SensorId::BumperFrontRight => "bumper_front_right",
            SensorId::BumperRearLeft => "bumper_rear_left",
            SensorId::BumperRearRight => "bumper_rear_right",
        }
    }
}

impl fmt::Display for SensorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SensorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SensorId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownSensor(s.to_string()))
    }
}

impl TryFrom<String> for SensorId {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SensorId> for String {
    fn from(id: SensorId) -> String {
        id.as_str().to_string()
    }
}

/// One user turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInstruction {
    pub id: Uuid,
    pub session_id: String,
    pub text: String,
    pub received_at: DateTime<Utc>,
}

impl TaskInstruction {
    pub fn new(session_id: impl Into<String>, text: impl Into<String>) -> Result<Self> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::InvalidInput("instruction text is empty".into()));
        }
        Ok(TaskInstruction {
            id: Uuid::new_v4(),
            session_id: session_id.into(),
            text,
            received_at: Utc::now(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RouteTarget {
    #[serde(rename = "PIA")]
    Pia,
    #[serde(rename = "SIA")]
    Sia,
}

impl fmt::Display for RouteTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RouteTarget::Pia => "PIA",
            RouteTarget::Sia => "SIA",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RouteDecision {
    pub target: RouteTarget,
    #[serde(default)]
    pub rationale: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelTier {
    #[default]
    Light,
    Heavy,
}

/// Task-state parse of a dialogue turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "UPPERCASE")]
pub enum SiaAction {
    New { main_task: String, details: Vec<String> },
    Update { details: Vec<String> },
    Delete { details: Vec<String> },
    Upgrade,
    Downgrade,
    Memory,
}

impl SiaAction {
    pub fn name(&self) -> &'static str {
        match self {
            SiaAction::New { .. } => "NEW",
            SiaAction::Update { .. } => "UPDATE",
            SiaAction::Delete { .. } => "DELETE",
            SiaAction::Upgrade => "UPGRADE",
            SiaAction::Downgrade => "DOWNGRADE",
            SiaAction::Memory => "MEMORY",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SiaAction::New { main_task, details } => {
                if main_task.trim().is_empty() {
                    return Err(Error::InvalidInput("NEW requires a main_task".into()));
                }
                validate_units(details)?;
                let mut seen = HashSet::new();
                for d in details {
                    if !seen.insert(d.to_lowercase()) {
                        return Err(Error::InvalidInput(format!("duplicate detail unit {d:?}")));
                    }
                }
                Ok(())
            }
            SiaAction::Update { details } | SiaAction::Delete { details } => {
                if details.is_empty() {
                    return Err(Error::InvalidInput(format!("{} requires at least one detail", self.name())));
                }
                validate_units(details)
            }
            SiaAction::Upgrade | SiaAction::Downgrade | SiaAction::Memory => Ok(()),
        }
    }
}

pub(crate) fn validate_units(units: &[String]) -> Result<()> {
    for unit in units {
        if unit.trim().is_empty() {
            return Err(Error::InvalidInput("empty detail unit".into()));
        }
        if unit.contains(';') {
            return Err(Error::InvalidInput(format!("detail unit {unit:?} contains ';'")));
        }
    }
    Ok(())
}

/// Sensor/skill management command.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "UPPERCASE")]
pub enum PiaCommand {
    Bind { sensor: SensorId, skill: String },
    Update { sensor: SensorId, skill: String },
    Unbind { sensor: SensorId },
    Invoke {
        skill: String,
        #[serde(default)]
        args: BTreeMap<String, String>,
    },
}

impl PiaCommand {
    pub fn name(&self) -> &'static str {
        match self {
            PiaCommand::Bind { .. } => "BIND",
            PiaCommand::Update { .. } => "UPDATE",
            PiaCommand::Unbind { .. } => "UNBIND",
            PiaCommand::Invoke { .. } => "INVOKE",
        }
    }

    pub fn skill(&self) -> Option<&str> {
        match self {
            PiaCommand::Bind { skill, .. } | PiaCommand::Update { skill, .. } | PiaCommand::Invoke { skill, .. } => {
                Some(skill)
            }
            PiaCommand::Unbind { .. } => None,
        }
    }

    pub fn sensor(&self) -> Option<SensorId> {
        match self {
            PiaCommand::Bind { sensor, .. } | PiaCommand::Update { sensor, .. } | PiaCommand::Unbind { sensor } => {
                Some(*sensor)
            }
            PiaCommand::Invoke { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.skill() {
            Some(skill) if !is_identifier(skill) => Err(Error::InvalidInput(format!("bad skill name {skill:?}"))),
            _ => Ok(()),
        }
    }
}

/// Skill names: ASCII letters, digits, `_` and `-`, not starting with a digit.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

/// Actuator operations the robot understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RobotOp {
    Speak,
    MoveHead,
    MoveArms,
    Led,
    DisplayEmotion,
    PlayAudio,
    CapturePhoto,
}

impl RobotOp {
    pub const ALL: [RobotOp; 7] = [
        RobotOp::Speak,
        RobotOp::MoveHead,
        RobotOp::MoveArms,
        RobotOp::Led,
        RobotOp::DisplayEmotion,
        RobotOp::PlayAudio,
        RobotOp::CapturePhoto,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RobotOp::Speak => "speak",
            RobotOp::MoveHead => "move_head",
            RobotOp::MoveArms => "move_arms",
            RobotOp::Led => "led",
            RobotOp::DisplayEmotion => "display_emotion",
            RobotOp::PlayAudio => "play_audio",
            RobotOp::CapturePhoto => "capture_photo",
        }
    }
}

impl fmt::Display for RobotOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RobotOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RobotOp::ALL
            .into_iter()
            .find(|op| op.as_str() == s)
            .ok_or_else(|| Error::BadRequest(format!("unknown op {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSpec {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub required: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpec {
    /// A [`RobotOp`] name or `motion_bundle`.
    pub op: String,
    #[serde(default)]
    pub args: serde_json::Map<String, serde_json::Value>,
}

/// A declarative skill manifest; `description` plays the role of the
/// docstring the agent selects skills by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillDescriptor {
    pub name: String,
    pub description: String,
    #[serde(default)]
    pub params: BTreeMap<String, ParamSpec>,
    pub actions: Vec<ActionSpec>,
}

/// Main task plus ordered atomic detail units.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskState {
    pub main_task: String,
    pub details: Vec<String>,
    #[serde(default)]
    pub model_tier: ModelTier,
}

impl TaskState {
    /// Details rendered the way they are stored: `;`-separated.
    pub fn details_line(&self) -> String {
        self.details.join("; ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub function_name: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub outcome: Outcome,
    pub detail: String,
}

/// Ordered record of the parameterized calls that realized a turn.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExecutionTrace {
    pub steps: Vec<TraceStep>,
}

impl ExecutionTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(
        &mut self,
        function_name: &str,
        params: impl IntoIterator<Item = (&'static str, serde_json::Value)>,
        outcome: Outcome,
        detail: impl Into<String>,
    ) {
        self.steps.push(TraceStep {
            function_name: function_name.to_string(),
            params: params.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            outcome,
            detail: detail.into(),
        });
    }

    pub fn ok(&mut self, function_name: &str, params: impl IntoIterator<Item = (&'static str, serde_json::Value)>, detail: impl Into<String>) {
        self.push(function_name, params, Outcome::Ok, detail);
    }

    pub fn err(&mut self, function_name: &str, params: impl IntoIterator<Item = (&'static str, serde_json::Value)>, detail: impl Into<String>) {
        self.push(function_name, params, Outcome::Error, detail);
    }

    pub fn extend(&mut self, other: ExecutionTrace) {
        self.steps.extend(other.steps);
    }

    pub fn count(&self, function_name: &str) -> usize {
        self.steps.iter().filter(|s| s.function_name == function_name).count()
    }

    pub fn names(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.function_name.as_str()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WorkerStatus {
    Active,
    Inactive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessTableEntry {
    pub sensor: SensorId,
    pub worker_id: u64,
    pub skill: String,
    pub status: WorkerStatus,
    #[serde(default)]
    pub heartbeat_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryRecord {
    pub main_task: String,
    pub embedding: Vec<f64>,
    pub script: Script,
    pub created_at: DateTime<Utc>,
    pub hit_count: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sensor_namespace_is_closed() {
        for id in SensorId::ALL {
            assert_eq!(id.as_str().parse::<SensorId>().unwrap(), id);
        }
        for bad in ["nose", "HEAD_TOP", "head top", "", "bumper_front"] {
            assert!(matches!(bad.parse::<SensorId>(), Err(Error::UnknownSensor(_))));
        }
        assert!(serde_json::from_str::<SensorId>("\"nose\"").is_err());
    }

    #[test]
    fn instruction_rejects_blank_text() {
        assert!(TaskInstruction::new("s", "   \n").is_err());
        assert!(TaskInstruction::new("s", "hi").is_ok());
    }

    #[test]
    fn sia_action_wire_format() {
        let a: SiaAction = serde_json::from_str(
            r#"{"action":"NEW","main_task":"Plan a day trip","details":["Date tomorrow"]}"#,
        )
        .unwrap();
        assert_eq!(a.name(), "NEW");
        let up: SiaAction = serde_json::from_str(r#"{"action":"UPGRADE"}"#).unwrap();
        assert_eq!(up, SiaAction::Upgrade);
        assert_eq!(serde_json::to_string(&SiaAction::Memory).unwrap(), r#"{"action":"MEMORY"}"#);
    }

    #[test]
    fn sia_action_validation() {
        let semi = SiaAction::Update { details: vec!["a; b".into()] };
        assert!(semi.validate().is_err());
        let blank = SiaAction::New { main_task: " ".into(), details: vec![] };
        assert!(blank.validate().is_err());
        let dup = SiaAction::New { main_task: "x".into(), details: vec!["A b".into(), "a B".into()] };
        assert!(dup.validate().is_err());
        assert!(SiaAction::Delete { details: vec![] }.validate().is_err());
    }

    #[test]
    fn pia_command_wire_format() {
        let c: PiaCommand =
            serde_json::from_str(r#"{"command":"BIND","sensor":"chin","skill":"take_photo"}"#).unwrap();
        assert_eq!(c, PiaCommand::Bind { sensor: SensorId::Chin, skill: "take_photo".into() });
        let i: PiaCommand = serde_json::from_str(r#"{"command":"INVOKE","skill":"say_hi"}"#).unwrap();
        assert!(matches!(i, PiaCommand::Invoke { ref args, .. } if args.is_empty()));
        assert!(serde_json::from_str::<PiaCommand>(r#"{"command":"UNBIND","sensor":"tail"}"#).is_err());
    }

    #[test]
    fn identifiers() {
        assert!(is_identifier("play_workout_music"));
        assert!(is_identifier("DailyMemoReport"));
        assert!(!is_identifier(""));
        assert!(!is_identifier("9lives"));
        assert!(!is_identifier("say hi"));
    }
}
