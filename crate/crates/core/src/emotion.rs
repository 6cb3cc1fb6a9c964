//! Emotion labels, arousal classes and the speaking-rate mapping, plus the
//! utterance and script types whose rates are derived from them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The eight-way emotion taxonomy every utterance is labelled with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EmotionLabel {
    Happiness,
    Sadness,
    Anger,
    Fear,
    Disgust,
    Surprise,
    Contempt,
    Neutral,
}

impl EmotionLabel {
    pub const ALL: [EmotionLabel; 8] = [
        EmotionLabel::Happiness,
        EmotionLabel::Sadness,
        EmotionLabel::Anger,
        EmotionLabel::Fear,
        EmotionLabel::Disgust,
        EmotionLabel::Surprise,
        EmotionLabel::Contempt,
        EmotionLabel::Neutral,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EmotionLabel::Happiness => "Happiness",
            EmotionLabel::Sadness => "Sadness",
            EmotionLabel::Anger => "Anger",
            EmotionLabel::Fear => "Fear",
            EmotionLabel::Disgust => "Disgust",
            EmotionLabel::Surprise => "Surprise",
            EmotionLabel::Contempt => "Contempt",
            EmotionLabel::Neutral => "Neutral",
        }
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmotionLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EmotionLabel::ALL
            .into_iter()
            .find(|e| e.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidInput(format!("unknown emotion {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arousal {
    Low,
    Baseline,
    High,
}

pub const RATE_LOW: f64 = 0.95;
pub const RATE_BASELINE: f64 = 1.00;
pub const RATE_HIGH: f64 = 1.05;

pub fn arousal_of(emotion: EmotionLabel) -> Arousal {
    match emotion {
        EmotionLabel::Happiness | EmotionLabel::Anger | EmotionLabel::Fear | EmotionLabel::Surprise => {
            Arousal::High
        }
        EmotionLabel::Sadness | EmotionLabel::Contempt => Arousal::Low,
        EmotionLabel::Neutral | EmotionLabel::Disgust => Arousal::Baseline,
    }
}

pub fn rate_of(emotion: EmotionLabel) -> f64 {
    match arousal_of(emotion) {
        Arousal::Low => RATE_LOW,
        Arousal::Baseline => RATE_BASELINE,
        Arousal::High => RATE_HIGH,
    }
}

/// One spoken segment. The rate is always `rate_of(emotion)`; it is never
/// set independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "UtteranceRepr")]
pub struct Utterance {
    text: String,
    emotion: EmotionLabel,
    rate: f64,
}

#[derive(Deserialize)]
struct UtteranceRepr {
    text: String,
    emotion: EmotionLabel,
    #[serde(default)]
    rate: Option<f64>,
}

impl TryFrom<UtteranceRepr> for Utterance {
    type Error = Error;

    fn try_from(repr: UtteranceRepr) -> Result<Self, Error> {
        let utterance = Utterance::new(repr.text, repr.emotion)?;
        if let Some(rate) = repr.rate {
            if rate != utterance.rate {
                return Err(Error::InvalidInput(format!(
                    "rate {rate} does not match {} for {}",
                    utterance.rate, utterance.emotion
                )));
            }
        }
        Ok(utterance)
    }
}

impl Utterance {
    pub fn new(text: impl Into<String>, emotion: EmotionLabel) -> Result<Self, Error> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(Error::InvalidInput("utterance text is empty".into()));
        }
        Ok(Utterance { text, emotion, rate: rate_of(emotion) })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn emotion(&self) -> EmotionLabel {
        self.emotion
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

/// An ordered, non-empty list of utterances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScriptRepr")]
pub struct Script {
    utterances: Vec<Utterance>,
}

#[derive(Deserialize)]
struct ScriptRepr {
    utterances: Vec<Utterance>,
}

impl TryFrom<ScriptRepr> for Script {
    type Error = Error;

    fn try_from(repr: ScriptRepr) -> Result<Self, Error> {
        Script::new(repr.utterances)
    }
}

impl Script {
    pub fn new(utterances: Vec<Utterance>) -> Result<Self, Error> {
        if utterances.is_empty() {
            return Err(Error::InvalidInput("script has no utterances".into()));
        }
        Ok(Script { utterances })
    }

    /// Single-utterance convenience constructor.
    pub fn single(text: impl Into<String>, emotion: EmotionLabel) -> Result<Self, Error> {
        Script::new(vec![Utterance::new(text, emotion)?])
    }

    pub fn utterances(&self) -> &[Utterance] {
        &self.utterances
    }

    pub fn len(&self) -> usize {
        self.utterances.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}
