//! System prompts for each structured completion.
//!
//! Prompt wording is not load-bearing for the scripted provider, which keys
//! on user content only; it matters for external providers.

use crate::skills::SkillInventory;
use crate::types::{SensorId, TaskState};

pub fn router(session_summary: Option<&str>) -> String {
    let mut p = String::from(
        "You are the task router of a social robot. Decide which agent handles the instruction.\n\
         - PIA: the instruction involves sensor-triggered events (touching, tapping, pressing the robot) \
         or a direct tool invocation (music, photos, weather, lights, ...).\n\
         - SIA: the instruction is dialogue-oriented (conversation, stories, planning, advice, emotional support).\n\
         Reply with JSON {\"target\": \"PIA\" | \"SIA\", \"rationale\": string}.",
    );
    if let Some(summary) = session_summary.filter(|s| !s.is_empty()) {
        p.push_str("\nSession so far: ");
        p.push_str(summary);
    }
    p
}

pub fn sia_action(state: Option<&TaskState>) -> String {
    let mut p = String::from(
        "Parse the user's turn into exactly one task-state action.\n\
         NEW{main_task, details}: a new task; main_task is a short canonical imperative, details are atomic units.\n\
         UPDATE{details}: change or add detail units of the current task.\n\
         DELETE{details}: remove detail units of the current task.\n\
         UPGRADE / DOWNGRADE: switch to the higher-capacity / lightweight model.\n\
         MEMORY: remember the current task and its result for later reuse.\n\
         Detail units never contain ';'.\n\
         Reply with JSON {\"action\": \"NEW\"|\"UPDATE\"|\"DELETE\"|\"UPGRADE\"|\"DOWNGRADE\"|\"MEMORY\", ...}.",
    );
    match state {
        Some(s) => {
            p.push_str(&format!("\nCurrent main_task: {}\nCurrent details: {}", s.main_task, s.details_line()));
        }
        None => p.push_str("\nThere is no current task."),
    }
    p
}

pub fn script_writer(context: &[String]) -> String {
    let mut p = String::from(
        "Write the robot's spoken response as a list of utterances. Label every utterance with exactly one of \
         Happiness, Sadness, Anger, Fear, Disgust, Surprise, Contempt, Neutral so that voice and motion match its \
         content. Reply with JSON {\"utterances\": [{\"text\": string, \"emotion\": string}]}.",
    );
    if !context.is_empty() {
        p.push_str("\nRecent turns:");
        for turn in context {
            p.push_str("\n- ");
            p.push_str(turn);
        }
    }
    p
}

/// User content of a script-writer request: the canonical task, then its
/// details when there are any.
pub fn script_request(state: &TaskState) -> String {
    if state.details.is_empty() {
        state.main_task.clone()
    } else {
        format!("{} | details: {}", state.main_task, state.details_line())
    }
}

pub fn pia(inventory: &SkillInventory) -> String {
    let sensors: Vec<&str> = SensorId::ALL.iter().map(|s| s.as_str()).collect();
    let mut p = String::from(
        "Translate the instruction into sensor and tool commands.\n\
         BIND{sensor, skill}: run skill whenever sensor is touched (sensor must be free).\n\
         UPDATE{sensor, skill}: replace the skill bound to sensor.\n\
         UNBIND{sensor}: remove the binding of sensor.\n\
         INVOKE{skill, args}: run skill once now.\n\
         One instruction may contain several bindings; emit one command per clause, in order.\n",
    );
    p.push_str(&format!("Sensors: {}\n", sensors.join(", ")));
    p.push_str("Skills:\n");
    p.push_str(&inventory.prompt_block());
    p.push_str("Reply with JSON {\"commands\": [...]}.");
    p
}
