use crate::error::Result;
use crate::llm::{CompletionRequest, Gateway, SchemaId};
use crate::prompts;
use crate::types::{RouteDecision, TaskInstruction};

/// Dispatches each instruction to PIA or SIA through one structured
/// completion. There is no fallback route: a gateway failure fails the turn.
#[derive(Clone)]
pub struct Router {
    gateway: Gateway,
}

impl Router {
    pub fn new(gateway: Gateway) -> Self {
        Router { gateway }
    }

    pub async fn route(&self, instruction: &TaskInstruction, session_summary: Option<&str>) -> Result<RouteDecision> {
        let request = CompletionRequest::new(
            SchemaId::RouteDecision,
            prompts::router(session_summary),
            instruction.text.clone(),
        );
        self.gateway.complete_structured(&request).await?.into_route()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::llm::{RuleTable, ScriptedProvider};
    use crate::types::RouteTarget;
    use serde_json::json;
    use std::sync::Arc;

    fn router() -> Router {
        let mut t = RuleTable::default();
        t.exact(SchemaId::RouteDecision, "Tell me the story of Three Little Pig", json!({"target": "SIA"}))
            .exact(SchemaId::RouteDecision, "touch your head and make a cute sound", json!({"target": "PIA"}))
            .pattern(SchemaId::RouteDecision, "hi misty, i'd like to plan a day trip*", json!({"target": "SIA"}));
        Router::new(Gateway::new(Arc::new(ScriptedProvider::new(t))))
    }

    async fn target(text: &str) -> Result<RouteTarget> {
        let i = TaskInstruction::new("s", text).unwrap();
        Ok(router().route(&i, None).await?.target)
    }

    #[tokio::test]
    async fn examples() {
        assert_eq!(target("Tell me the story of Three Little Pig").await.unwrap(), RouteTarget::Sia);
        assert_eq!(target("touch your head and make a cute sound").await.unwrap(), RouteTarget::Pia);
        assert_eq!(
            target("Hi Misty, I'd like to plan a day trip to New York City for tomorrow.").await.unwrap(),
            RouteTarget::Sia
        );
    }

    #[tokio::test]
    async fn unknown_instruction_surfaces_error() {
        assert!(matches!(target("what is love").await, Err(Error::SchemaViolation { .. })));
    }

    #[tokio::test]
    async fn deterministic() {
        for _ in 0..5 {
            assert_eq!(target("touch your head and make a cute sound").await.unwrap(), RouteTarget::Pia);
        }
    }
}
