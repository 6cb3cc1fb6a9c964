//! Physically interactive agent: turns instructions into sensor bindings and
//! direct skill invocations.

use std::sync::{Arc, RwLock};

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Failed, Result};
use crate::llm::{CompletionRequest, Gateway, SchemaId, StructuredValue};
use crate::prompts;
use crate::robot::Robot;
use crate::skills::{run_skill, SkillInventory};
use crate::stm::Stm;
use crate::types::{ExecutionTrace, Outcome, PiaCommand, SkillDescriptor};

/// Function names a PIA trace may contain.
pub const PIA_FUNCTIONS: &[&str] = &["parse_commands", "stm.bind", "stm.update", "stm.unbind", "invoke"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommandOutcome {
    pub command: PiaCommand,
    pub outcome: Outcome,
    pub worker_id: Option<u64>,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct PiaTurn {
    pub commands: Vec<PiaCommand>,
    pub outcomes: Vec<CommandOutcome>,
    pub trace: ExecutionTrace,
}

impl PiaTurn {
    pub fn all_ok(&self) -> bool {
        self.outcomes.iter().all(|o| o.outcome == Outcome::Ok)
    }
}

pub struct PiaAgent {
    gateway: Gateway,
    inventory: Arc<RwLock<SkillInventory>>,
    stm: Stm,
    robot: Arc<dyn Robot>,
}

fn check_inventory(inventory: &SkillInventory, value: &StructuredValue) -> Result<()> {
    if let StructuredValue::Pia(commands) = value {
        for c in commands {
            if let Some(skill) = c.skill() {
                inventory.require(skill)?;
            }
        }
    }
    Ok(())
}

impl PiaAgent {
    pub fn new(gateway: Gateway, inventory: Arc<RwLock<SkillInventory>>, stm: Stm, robot: Arc<dyn Robot>) -> Self {
        PiaAgent { gateway, inventory, stm, robot }
    }

    pub fn inventory(&self) -> SkillInventory {
        self.inventory.read().unwrap().clone()
    }

    pub fn stm(&self) -> &Stm {
        &self.stm
    }

    /// Asks for a command list and rejects skills outside the inventory.
    pub async fn parse_commands(&self, instruction: &str) -> Result<Vec<PiaCommand>> {
        let inventory = self.inventory();
        let request = CompletionRequest::new(SchemaId::PiaCommands, prompts::pia(&inventory), instruction);
        self.gateway.complete_validated(&request, |v| check_inventory(&inventory, v)).await?.into_pia()
    }

    fn bindable(&self, name: &str) -> Result<SkillDescriptor> {
        let skill = self.inventory.read().unwrap().require(name)?.clone();
        if let Some((param, _)) = skill.params.iter().find(|(_, p)| p.required) {
            return Err(Error::InvalidInput(format!(
                "skill {name} needs parameter {param} and cannot be bound to a sensor"
            )));
        }
        Ok(skill)
    }

    async fn run(&self, command: &PiaCommand) -> Result<(Option<u64>, String)> {
        match command {
            PiaCommand::Bind { sensor, skill } => {
                let s = self.bindable(skill)?;
                let id = self.stm.bind(*sensor, &s).await?;
                Ok((Some(id), format!("{skill} bound to {sensor}")))
            }
            PiaCommand::Update { sensor, skill } => {
                let s = self.bindable(skill)?;
                let id = self.stm.update(*sensor, &s).await?;
                Ok((Some(id), format!("{sensor} now runs {skill}")))
            }
            PiaCommand::Unbind { sensor } => {
                self.stm.unbind(*sensor).await?;
                Ok((None, format!("{sensor} unbound")))
            }
            PiaCommand::Invoke { skill, args } => {
                let s = self.inventory.read().unwrap().require(skill)?.clone();
                let n = run_skill(self.robot.as_ref(), &s, args).await?;
                Ok((None, format!("{n} request(s)")))
            }
        }
    }

    /// Executes commands in order. A failing command is recorded and the
    /// remaining ones still run.
    pub async fn execute(&self, commands: &[PiaCommand], trace: &mut ExecutionTrace) -> Vec<CommandOutcome> {
        let mut outcomes = Vec::with_capacity(commands.len());
        for command in commands {
            let name = match command {
                PiaCommand::Bind { .. } => "stm.bind",
                PiaCommand::Update { .. } => "stm.update",
                PiaCommand::Unbind { .. } => "stm.unbind",
                PiaCommand::Invoke { .. } => "invoke",
            };
            let params = [("command", json!(command))];
            let (outcome, worker_id, detail) = match self.run(command).await {
                Ok((id, detail)) => (Outcome::Ok, id, detail),
                Err(e) => (Outcome::Error, None, format!("{}: {e}", e.kind())),
            };
            trace.push(name, params, outcome, detail.clone());
            outcomes.push(CommandOutcome { command: command.clone(), outcome, worker_id, detail });
        }
        outcomes
    }

    pub async fn respond(&self, instruction: &str) -> Result<PiaTurn, Failed> {
        let mut trace = ExecutionTrace::new();
        let commands = match self.parse_commands(instruction).await {
            Ok(c) => c,
            Err(error) => {
                trace.err("parse_commands", [("instruction", json!(instruction))], error.to_string());
                return Err(Failed { error, trace });
            }
        };
        trace.ok("parse_commands", [("instruction", json!(instruction))], format!("{} command(s)", commands.len()));
        let outcomes = self.execute(&commands, &mut trace).await;
        Ok(PiaTurn { commands, outcomes, trace })
    }
}
