//! Line-oriented console over a running [`System`].

use std::io::{BufRead, Write};

use pilot_core::sia::ThinkingPath;
use pilot_core::{Outcome, PiaCommand, TurnResult};
use serde_json::json;

use crate::app::System;

pub const SESSION: &str = "repl";

const HELP: &str = "\
Type an instruction, or one of:
  :state    current task state
  :table    sensor binding table
  :memory   memory store summary
  :skills   loaded skills
  :help     this text
  :quit     flush and exit";

fn command_label(c: &PiaCommand) -> String {
    match c {
        PiaCommand::Bind { sensor, skill } | PiaCommand::Update { sensor, skill } => {
            format!("{} {sensor} -> {skill}", c.name())
        }
        PiaCommand::Unbind { sensor } => format!("UNBIND {sensor}"),
        PiaCommand::Invoke { skill, args } if args.is_empty() => format!("INVOKE {skill}"),
        PiaCommand::Invoke { skill, args } => format!("INVOKE {skill} {}", json!(args)),
    }
}

pub fn render_turn(t: &TurnResult) -> String {
    let mut out = String::new();
    if let Some(route) = &t.route {
        out.push_str(&format!("[{}]", route.target));
    }
    if let Some(path) = t.path {
        out.push_str(match path {
            ThinkingPath::Fast => " fast path",
            ThinkingPath::Slow => " slow path",
        });
    }
    if let Some(state) = &t.state {
        out.push_str(&format!(" | task: {}", state.main_task));
        if !state.details.is_empty() {
            out.push_str(&format!(" ({})", state.details.join("; ")));
        }
    }
    out.push('\n');
    if let Some(d) = &t.delivery {
        for u in &d.utterances {
            out.push_str(&format!("  robot ({}, x{:.2}): {}", u.emotion, u.rate, u.text));
            if let Some(e) = &u.error {
                out.push_str(&format!("  !! {e}"));
            }
            out.push('\n');
        }
    }
    for o in &t.outcomes {
        let mark = if o.outcome == Outcome::Ok { "ok" } else { "failed" };
        out.push_str(&format!("  {} : {mark}", command_label(&o.command)));
        if !o.detail.is_empty() {
            out.push_str(&format!(" ({})", o.detail));
        }
        out.push('\n');
    }
    if let Some(e) = &t.error {
        out.push_str(&format!("  error [{}]: {}\n", e.kind, e.message));
    }
    out.push_str(&format!("  {:.0} ms\n", t.elapsed_ms));
    out
}

async fn meta(system: &System, cmd: &str) -> Option<String> {
    let o = &system.orchestrator;
    Some(match cmd {
        ":help" => HELP.to_string(),
        ":state" => match o.session_view(SESSION).await.and_then(|v| v.state) {
            Some(s) => format!("task: {}\ndetails: {}\ntier: {:?}", s.main_task, s.details.join("; "), s.model_tier),
            None => "no active task".to_string(),
        },
        ":table" => {
            let table = o.process_table().await;
            if table.entries.is_empty() {
                "no bindings".to_string()
            } else {
                table
                    .entries
                    .iter()
                    .map(|e| format!("{:<20} {:<22} #{:<4} {:?}", e.sensor.to_string(), e.skill, e.worker_id, e.status))
                    .collect::<Vec<_>>()
                    .join("\n")
            }
        }
        ":memory" => {
            let stats = o.memory_stats();
            let mut lines = vec![serde_json::to_string(&stats).unwrap_or_default()];
            for r in o.memory().records() {
                lines.push(format!("  {} ({} utterances, {} hits)", r.main_task, r.script.len(), r.hit_count));
            }
            lines.join("\n")
        }
        ":skills" => o
            .inventory()
            .iter()
            .map(|s| format!("{:<22} {}", s.name, s.description))
            .collect::<Vec<_>>()
            .join("\n"),
        _ => return None,
    })
}

/// Reads instructions until `:quit` or end of input, then flushes state.
pub async fn run<R: BufRead, W: Write>(system: &System, input: R, mut out: W) -> std::io::Result<()> {
    writeln!(out, "pilot ready; :help for commands")?;
    for line in input.lines() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if text == ":quit" || text == ":q" {
            break;
        }
        if text.starts_with(':') {
            let reply = meta(system, text).await.unwrap_or_else(|| format!("unknown command {text}; try :help"));
            writeln!(out, "{reply}")?;
            continue;
        }
        match system.orchestrator.submit(SESSION, text).await {
            Ok(turn) => write!(out, "{}", render_turn(&turn))?,
            Err(e) => writeln!(out, "error [{}]: {e}", e.kind())?,
        }
        out.flush()?;
    }
    if let Err(e) = system.stop().await {
        writeln!(out, "flush failed: {e}")?;
    }
    writeln!(out, "bye")?;
    Ok(())
}
