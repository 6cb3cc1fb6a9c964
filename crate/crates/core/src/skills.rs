//! Skill descriptors on disk and the runner shared by direct invocation and
//! sensor workers.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::robot::Robot;
use crate::types::{is_identifier, RobotOp, SkillDescriptor};

pub const SKILL_SUFFIX: &str = ".skill.json";

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SkillInventory {
    skills: BTreeMap<String, SkillDescriptor>,
}

impl SkillInventory {
    pub fn new(skills: impl IntoIterator<Item = SkillDescriptor>) -> Result<Self> {
        let mut inv = SkillInventory::default();
        for s in skills {
            validate(&s)?;
            if inv.skills.contains_key(&s.name) {
                return Err(Error::InvalidInput(format!("duplicate skill {:?}", s.name)));
            }
            inv.skills.insert(s.name.clone(), s);
        }
        Ok(inv)
    }

    pub fn get(&self, name: &str) -> Option<&SkillDescriptor> {
        self.skills.get(name)
    }

    pub fn require(&self, name: &str) -> Result<&SkillDescriptor> {
        self.get(name).ok_or_else(|| Error::UnknownSkill(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.skills.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.skills.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &SkillDescriptor> {
        self.skills.values()
    }

    pub fn len(&self) -> usize {
        self.skills.len()
    }

    pub fn is_empty(&self) -> bool {
        self.skills.is_empty()
    }

    /// One line per skill, `- name(params): description`, for prompts.
    pub fn prompt_block(&self) -> String {
        let mut out = String::new();
        for s in self.skills.values() {
            let params: Vec<String> = s
                .params
                .iter()
                .map(|(k, p)| if p.required { format!("{k}: {}", p.kind) } else { format!("{k}?: {}", p.kind) })
                .collect();
            out.push_str(&format!("- {}({}): {}\n", s.name, params.join(", "), s.description));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanWarning {
    pub file: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ScanReport {
    pub inventory: SkillInventory,
    pub warnings: Vec<ScanWarning>,
}

fn placeholders(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find('{') {
        let tail = &rest[start + 1..];
        match tail.find('}') {
            Some(end) => {
                out.push(&tail[..end]);
                rest = &tail[end + 1..];
            }
            None => break,
        }
    }
    out
}

fn validate(s: &SkillDescriptor) -> Result<()> {
    if !is_identifier(&s.name) {
        return Err(Error::InvalidInput(format!("skill name {:?} is not an identifier", s.name)));
    }
    if s.description.trim().is_empty() {
        return Err(Error::InvalidInput("missing description".into()));
    }
    if s.actions.is_empty() {
        return Err(Error::InvalidInput("no actions".into()));
    }
    for a in &s.actions {
        let ok = a.op == "motion_bundle" || a.op.parse::<RobotOp>().is_ok();
        if !ok {
            return Err(Error::InvalidInput(format!("unknown op {:?}", a.op)));
        }
        for v in a.args.values() {
            if let Value::String(text) = v {
                for p in placeholders(text) {
                    if !s.params.contains_key(p) {
                        return Err(Error::InvalidInput(format!("undeclared parameter {{{p}}}")));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Reads every `*.skill.json` in `dir` (non-recursive, sorted by file name).
/// Malformed, invalid or duplicate descriptors are skipped with a warning;
/// the first file to claim a name keeps it.
pub fn scan_skills(dir: &Path) -> Result<ScanReport> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(SKILL_SUFFIX)))
        .collect();
    files.sort();

    let mut report = ScanReport::default();
    let mut seen = BTreeSet::new();
    for file in files {
        let parsed = std::fs::read_to_string(&file)
            .map_err(|e| e.to_string())
            .and_then(|text| serde_json::from_str::<SkillDescriptor>(&text).map_err(|e| e.to_string()))
            .and_then(|s| validate(&s).map(|_| s).map_err(|e| e.to_string()));
        match parsed {
            Ok(s) if !seen.insert(s.name.clone()) => {
                report.warnings.push(ScanWarning { file, reason: format!("duplicate skill name {:?}", s.name) });
            }
            Ok(s) => {
                report.inventory.skills.insert(s.name.clone(), s);
            }
            Err(reason) => report.warnings.push(ScanWarning { file, reason }),
        }
    }
    Ok(report)
}

fn substitute(value: &Value, args: &BTreeMap<String, String>) -> Value {
    match value {
        Value::String(text) => {
            let mut out = text.clone();
            for p in placeholders(text) {
                let replacement = args.get(p).map(String::as_str).unwrap_or("");
                out = out.replace(&format!("{{{p}}}"), replacement);
            }
            Value::String(out)
        }
        other => other.clone(),
    }
}

/// Resolves the concrete robot requests of `skill` for `args`.
pub fn plan_skill(skill: &SkillDescriptor, args: &BTreeMap<String, String>) -> Result<Vec<(String, Map<String, Value>)>> {
    for (name, spec) in &skill.params {
        if spec.required && args.get(name).is_none_or(|v| v.trim().is_empty()) {
            return Err(Error::InvalidInput(format!("skill {} requires parameter {name}", skill.name)));
        }
    }
    Ok(skill
        .actions
        .iter()
        .map(|a| (a.op.clone(), a.args.iter().map(|(k, v)| (k.clone(), substitute(v, args))).collect()))
        .collect())
}

/// Runs the actions of `skill` in order and stops at the first failure.
/// Returns the number of requests that succeeded.
pub async fn run_skill(robot: &dyn Robot, skill: &SkillDescriptor, args: &BTreeMap<String, String>) -> Result<usize> {
    let plan = plan_skill(skill, args)?;
    let mut done = 0;
    for (op, payload) in plan {
        robot.request(&op, Value::Object(payload)).await?;
        done += 1;
    }
    Ok(done)
}
