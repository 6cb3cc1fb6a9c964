//! Multi-agent tool orchestration for a social robot.
//!
//! A router sends each instruction to one of two agents. The socially
//! intelligent agent ([`sia`]) tracks task state, reuses stored scripts on a
//! memory hit and writes new emotion-aligned scripts otherwise. The physically
//! interactive agent ([`pia`]) binds skills to touch sensors through the
//! supervised sensor & tool manager ([`stm`]) or invokes them directly. Both
//! drive a robot through the [`robot::Robot`] trait; [`robot::RobotSim`] is the
//! simulator used by tests and benchmarks.

pub mod embedding;
pub mod emotion;
pub mod error;
pub mod llm;
pub mod memory;
pub mod orchestrator;
mod persist;
pub mod pia;
pub mod prompts;
pub mod robot;
pub mod router;
pub mod sia;
pub mod skills;
pub mod stm;
pub mod types;

pub use embedding::{cosine_distance, EmbeddingVector, ReferenceEmbedder};
pub use emotion::{arousal_of, rate_of, Arousal, EmotionLabel, Script, Utterance};
pub use error::{Error, Failed, Result};
pub use orchestrator::{Orchestrator, OrchestratorParts, TurnResult};
pub use types::*;

/// Double-precision embedding used throughout the runtime.
pub type Embedding = EmbeddingVector<f64>;
/// Single-precision embedding, for callers that store vectors compactly.
pub type Embedding32 = EmbeddingVector<f32>;
