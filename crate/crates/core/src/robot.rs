//! Simulated robot: actuator endpoints, emotion motion templates, sensor
//! event fan-out and an append-only action log that doubles as the test
//! oracle for everything downstream.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use async_trait::async_trait;
use chrono::{DateTime, Utc};
use futures::StreamExt;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use tokio::sync::broadcast;
use tracing::warn;

use crate::emotion::EmotionLabel;
use crate::error::{Error, Result};
use crate::types::{RobotOp, SensorId};

const EVENT_CAPACITY: usize = 1024;
/// Simulated text-to-speech throughput.
pub const SPEECH_CHARS_PER_SEC: f64 = 15.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotAction {
    pub seq: u64,
    pub at: DateTime<Utc>,
    pub op: RobotOp,
    pub args: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensorEvent {
    pub sensor: SensorId,
    pub event_id: u64,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MotionTemplate {
    pub emotion: EmotionLabel,
    pub led_color: &'static str,
    /// pitch, yaw, roll in degrees
    pub head: (f64, f64, f64),
    /// left, right arm in degrees
    pub arms: (f64, f64),
    pub display: EmotionLabel,
}

pub fn motion_template(emotion: EmotionLabel) -> MotionTemplate {
    use EmotionLabel::*;
    let (led_color, head, arms) = match emotion {
        Happiness => ("yellow", (-10.0, 0.0, 5.0), (90.0, 90.0)),
        Anger => ("red", (5.0, 0.0, 0.0), (45.0, 45.0)),
        Sadness => ("blue", (20.0, 0.0, 0.0), (-20.0, -20.0)),
        Fear => ("purple", (10.0, 15.0, 0.0), (60.0, 60.0)),
        Disgust => ("green", (0.0, -20.0, 0.0), (0.0, 30.0)),
        Surprise => ("cyan", (-15.0, 0.0, 0.0), (80.0, 80.0)),
        Contempt => ("orange", (-5.0, 10.0, 10.0), (0.0, 15.0)),
        Neutral => ("white", (0.0, 0.0, 0.0), (0.0, 0.0)),
    };
    MotionTemplate { emotion, led_color, head, arms, display: emotion }
}

pub fn speech_duration_ms(text: &str, rate: f64) -> u64 {
    let secs = text.chars().count() as f64 / SPEECH_CHARS_PER_SEC / rate;
    (secs * 1000.0).round() as u64
}

/// Client-side view of the robot, in-process or remote.
#[async_trait]
pub trait Robot: Send + Sync {
    /// Runs one actuator endpoint (`speak`, `led`, ..., `motion_bundle`).
    async fn request(&self, endpoint: &str, payload: Value) -> Result<Value>;

    async fn trigger(&self, sensor: SensorId) -> Result<u64>;

    async fn actions_since(&self, since_seq: u64) -> Result<Vec<RobotAction>>;

    fn subscribe(&self) -> broadcast::Receiver<SensorEvent>;

    async fn perform(&self, op: RobotOp, args: Map<String, Value>) -> Result<Value> {
        self.request(op.as_str(), Value::Object(args)).await
    }

    async fn speak(&self, text: &str, rate: f64, emotion: EmotionLabel) -> Result<Value> {
        self.request("speak", json!({ "text": text, "rate": rate, "emotion": emotion })).await
    }

    async fn motion_bundle(&self, emotion: EmotionLabel) -> Result<Value> {
        self.request("motion_bundle", json!({ "emotion": emotion })).await
    }
}

#[derive(Debug, Default)]
struct Faults {
    down: bool,
    fail_requests: BTreeSet<u64>,
}

#[derive(Debug)]
struct EventSource {
    next_id: u64,
}

/// In-process robot simulator.
#[derive(Debug)]
pub struct RobotSim {
    log: Mutex<Vec<RobotAction>>,
    events: broadcast::Sender<SensorEvent>,
    actions: broadcast::Sender<RobotAction>,
    source: Mutex<EventSource>,
    faults: Mutex<Faults>,
    requests: AtomicU64,
    realtime_speech: AtomicBool,
}

impl Default for RobotSim {
    fn default() -> Self {
        let (events, _) = broadcast::channel(EVENT_CAPACITY);
        let (actions, _) = broadcast::channel(EVENT_CAPACITY);
        RobotSim {
            log: Mutex::new(Vec::new()),
            events,
            actions,
            source: Mutex::new(EventSource { next_id: 1 }),
            faults: Mutex::new(Faults::default()),
            requests: AtomicU64::new(0),
            realtime_speech: AtomicBool::new(false),
        }
    }
}

impl RobotSim {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    /// When on, `speak` sleeps for the simulated speech duration.
    pub fn set_realtime_speech(&self, on: bool) {
        self.realtime_speech.store(on, Ordering::SeqCst);
    }

    /// Marks the whole robot unreachable (or reachable again).
    pub fn set_down(&self, down: bool) {
        self.faults.lock().unwrap().down = down;
    }

    /// Fails the actuator requests with the given 0-based request indices.
    pub fn fail_requests(&self, indices: impl IntoIterator<Item = u64>) {
        self.faults.lock().unwrap().fail_requests.extend(indices);
    }

    /// Number of actuator requests received so far.
    pub fn request_count(&self) -> u64 {
        self.requests.load(Ordering::SeqCst)
    }

    pub fn subscribe_actions(&self) -> broadcast::Receiver<RobotAction> {
        self.actions.subscribe()
    }

    pub fn action_log(&self, since_seq: u64) -> Vec<RobotAction> {
        let log = self.log.lock().unwrap();
        // seq is 1-based and gap-free, so the index of seq s is s - 1
        let start = usize::try_from(since_seq).unwrap_or(usize::MAX).min(log.len());
        log[start..].to_vec()
    }

    pub fn last_seq(&self) -> u64 {
        self.log.lock().unwrap().len() as u64
    }

    pub fn inject_sensor_event(&self, sensor: SensorId) -> u64 {
        let mut source = self.source.lock().unwrap();
        let event = SensorEvent { sensor, event_id: source.next_id, at: Utc::now() };
        source.next_id += 1;
        // send under the lock so ids reach every subscriber in order
        let _ = self.events.send(event.clone());
        event.event_id
    }

    pub fn inject_sensor_event_named(&self, sensor: &str) -> Result<u64> {
        Ok(self.inject_sensor_event(sensor.parse()?))
    }

    fn append(&self, entries: Vec<(RobotOp, Map<String, Value>)>) -> Vec<u64> {
        let mut log = self.log.lock().unwrap();
        let mut seqs = Vec::with_capacity(entries.len());
        for (op, args) in entries {
            let action = RobotAction { seq: log.len() as u64 + 1, at: Utc::now(), op, args };
            seqs.push(action.seq);
            let _ = self.actions.send(action.clone());
            log.push(action);
        }
        seqs
    }

    fn check_faults(&self) -> Result<()> {
        let index = self.requests.fetch_add(1, Ordering::SeqCst);
        let faults = self.faults.lock().unwrap();
        if faults.down || faults.fail_requests.contains(&index) {
            return Err(Error::RobotUnreachable(format!("request {index} dropped")));
        }
        Ok(())
    }

    /// Validates and executes one endpoint. Bad payloads and unknown
    /// endpoints yield [`Error::BadRequest`] and leave the log untouched.
    pub fn handle(&self, endpoint: &str, payload: &Value) -> Result<Value> {
        let planned = plan(endpoint, payload)?;
        self.check_faults()?;
        let response = match &planned {
            Planned::Photo(args) => json!({
                "ok": true,
                "image": {
                    "image_id": format!("img-{:06}", self.last_seq() + 1),
                    "width": args.get("width").and_then(Value::as_u64).unwrap_or(640),
                    "height": args.get("height").and_then(Value::as_u64).unwrap_or(480),
                    "format": "synthetic/jpeg",
                }
            }),
            _ => json!({ "ok": true }),
        };
        let seqs = self.append(planned.into_entries());
        let mut response = response;
        response["seq"] = json!(seqs);
        Ok(response)
    }
}

enum Planned {
    Single(RobotOp, Map<String, Value>),
    Photo(Map<String, Value>),
    Bundle(Vec<(RobotOp, Map<String, Value>)>),
}

impl Planned {
    fn into_entries(self) -> Vec<(RobotOp, Map<String, Value>)> {
        match self {
            Planned::Single(op, args) => vec![(op, args)],
            Planned::Photo(args) => vec![(RobotOp::CapturePhoto, args)],
            Planned::Bundle(entries) => entries,
        }
    }
}

fn obj(payload: &Value) -> Result<&Map<String, Value>> {
    payload.as_object().ok_or_else(|| Error::BadRequest("payload must be a JSON object".into()))
}

fn number(args: &Map<String, Value>, key: &str, default: f64) -> Result<f64> {
    match args.get(key) {
        None | Some(Value::Null) => Ok(default),
        Some(Value::Number(n)) => n.as_f64().ok_or_else(|| Error::BadRequest(format!("{key} is not a number"))),
        Some(Value::String(s)) => s.trim().parse().map_err(|_| Error::BadRequest(format!("{key} is not a number"))),
        Some(_) => Err(Error::BadRequest(format!("{key} is not a number"))),
    }
}

fn string<'a>(args: &'a Map<String, Value>, key: &str) -> Result<&'a str> {
    args.get(key)
        .and_then(Value::as_str)
        .filter(|s| !s.trim().is_empty())
        .ok_or_else(|| Error::BadRequest(format!("missing string field {key:?}")))
}

fn emotion_field(args: &Map<String, Value>, key: &str) -> Result<EmotionLabel> {
    string(args, key)?.parse().map_err(|_| Error::BadRequest(format!("bad emotion in {key:?}")))
}

fn plan(endpoint: &str, payload: &Value) -> Result<Planned> {
    let args = obj(payload)?;
    if endpoint == "motion_bundle" {
        let t = motion_template(emotion_field(args, "emotion")?);
        return Ok(Planned::Bundle(vec![
            (RobotOp::Led, map(json!({ "color": t.led_color }))),
            (RobotOp::MoveHead, map(json!({ "pitch": t.head.0, "yaw": t.head.1, "roll": t.head.2 }))),
            (RobotOp::MoveArms, map(json!({ "left": t.arms.0, "right": t.arms.1 }))),
            (RobotOp::DisplayEmotion, map(json!({ "emotion": t.display }))),
        ]));
    }
    let op: RobotOp = endpoint.parse()?;
    let logged = match op {
        RobotOp::Speak => {
            let text = string(args, "text")?;
            let rate = number(args, "rate", 1.0)?;
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(Error::BadRequest("rate must be positive".into()));
            }
            let emotion = match args.get("emotion") {
                None | Some(Value::Null) => EmotionLabel::Neutral,
                Some(_) => emotion_field(args, "emotion")?,
            };
            json!({
                "text": text,
                "rate": rate,
                "emotion": emotion,
                "duration_ms": speech_duration_ms(text, rate),
            })
        }
        RobotOp::MoveHead => json!({
            "pitch": number(args, "pitch", 0.0)?,
            "yaw": number(args, "yaw", 0.0)?,
            "roll": number(args, "roll", 0.0)?,
        }),
        RobotOp::MoveArms => json!({
            "left": number(args, "left", 0.0)?,
            "right": number(args, "right", 0.0)?,
        }),
        RobotOp::Led => json!({ "color": string(args, "color")? }),
        RobotOp::DisplayEmotion => json!({ "emotion": emotion_field(args, "emotion")? }),
        RobotOp::PlayAudio => json!({ "track": string(args, "track")? }),
        RobotOp::CapturePhoto => {
            let mut m = Map::new();
            for key in ["width", "height"] {
                if args.contains_key(key) {
                    m.insert(key.into(), json!(number(args, key, 0.0)? as u64));
                }
            }
            return Ok(Planned::Photo(m));
        }
    };
    Ok(Planned::Single(op, map(logged)))
}

fn map(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

#[async_trait]
impl Robot for RobotSim {
    async fn request(&self, endpoint: &str, payload: Value) -> Result<Value> {
        let response = self.handle(endpoint, &payload)?;
        if endpoint == "speak" && self.realtime_speech.load(Ordering::SeqCst) {
            let text = payload.get("text").and_then(Value::as_str).unwrap_or_default();
            let rate = payload.get("rate").and_then(Value::as_f64).unwrap_or(1.0);
            tokio::time::sleep(Duration::from_millis(speech_duration_ms(text, rate))).await;
        }
        Ok(response)
    }

    async fn trigger(&self, sensor: SensorId) -> Result<u64> {
        Ok(self.inject_sensor_event(sensor))
    }

    async fn actions_since(&self, since_seq: u64) -> Result<Vec<RobotAction>> {
        Ok(self.action_log(since_seq))
    }

    fn subscribe(&self) -> broadcast::Receiver<SensorEvent> {
        self.events.subscribe()
    }
}

/// Client for a robot-sim served over HTTP. Sensor events arrive on the
/// server-sent event stream and are re-broadcast locally.
pub struct HttpRobot {
    client: reqwest::Client,
    base: String,
    events: broadcast::Sender<SensorEvent>,
    reader: tokio::task::AbortHandle,
}

impl Drop for HttpRobot {
    fn drop(&mut self) {
        self.reader.abort();
    }
}

impl HttpRobot {
    /// Must be called inside a tokio runtime; spawns the event-stream reader.
    pub fn connect(base_url: impl Into<String>, timeout: Duration) -> Result<Arc<Self>> {
        let base = base_url.into().trim_end_matches('/').to_string();
        let client = reqwest::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::RobotUnreachable(e.to_string()))?;
        let (events, _) = broadcast::channel(EVENT_CAPACITY);
        let stream_client = reqwest::Client::new();
        let reader = tokio::spawn({
            let events = events.clone();
            let base = base.clone();
            async move {
                loop {
                    if let Err(e) = pump_events(&stream_client, &base, &events).await {
                        warn!(error = %e, "robot event stream dropped; reconnecting");
                    }
                    tokio::time::sleep(Duration::from_millis(200)).await;
                }
            }
        });
        Ok(Arc::new(HttpRobot { client, base, events, reader: reader.abort_handle() }))
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.base, path)
    }
}

async fn pump_events(client: &reqwest::Client, base: &str, tx: &broadcast::Sender<SensorEvent>) -> Result<()> {
    let resp = client
        .get(format!("{base}/api/events"))
        .send()
        .await
        .map_err(|e| Error::RobotUnreachable(e.to_string()))?;
    let mut stream = resp.bytes_stream();
    let mut buf = String::new();
    while let Some(chunk) = stream.next().await {
        let chunk = chunk.map_err(|e| Error::RobotUnreachable(e.to_string()))?;
        buf.push_str(&String::from_utf8_lossy(&chunk));
        while let Some(end) = buf.find("\n\n") {
            let frame: String = buf.drain(..end + 2).collect();
            for line in frame.lines() {
                if let Some(data) = line.strip_prefix("data:") {
                    if let Ok(event) = serde_json::from_str::<SensorEvent>(data.trim()) {
                        let _ = tx.send(event);
                    }
                }
            }
        }
    }
    Ok(())
}

async fn decode(resp: reqwest::Response) -> Result<Value> {
    let status = resp.status();
    let body: Value = resp.json().await.unwrap_or(Value::Null);
    if status.is_client_error() {
        let msg = body.get("error").and_then(Value::as_str).unwrap_or("bad request").to_string();
        return Err(Error::BadRequest(msg));
    }
    if !status.is_success() {
        return Err(Error::RobotUnreachable(format!("status {status}")));
    }
    Ok(body)
}

#[async_trait]
impl Robot for HttpRobot {
    async fn request(&self, endpoint: &str, payload: Value) -> Result<Value> {
        let resp = self
            .client
            .post(self.url(&format!("/api/{endpoint}")))
            .json(&payload)
            .send()
            .await
            .map_err(|e| Error::RobotUnreachable(e.to_string()))?;
        decode(resp).await
    }

    async fn trigger(&self, sensor: SensorId) -> Result<u64> {
        let resp = self
            .client
            .post(self.url(&format!("/api/sensors/{sensor}/trigger")))
            .send()
            .await
            .map_err(|e| Error::RobotUnreachable(e.to_string()))?;
        let body = decode(resp).await?;
        body.get("event_id").and_then(Value::as_u64).ok_or_else(|| Error::RobotUnreachable("no event id".into()))
    }

    async fn actions_since(&self, since_seq: u64) -> Result<Vec<RobotAction>> {
        let resp = self
            .client
            .get(self.url(&format!("/api/actions?since={since_seq}")))
            .send()
            .await
            .map_err(|e| Error::RobotUnreachable(e.to_string()))?;
        serde_json::from_value(decode(resp).await?).map_err(|e| Error::RobotUnreachable(e.to_string()))
    }

    fn subscribe(&self) -> broadcast::Receiver<SensorEvent> {
        self.events.subscribe()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speak_is_echoed() {
        let sim = RobotSim::default();
        sim.handle("speak", &json!({"text": "hi", "rate": 1.05, "emotion": "Happiness"})).unwrap();
        let log = sim.action_log(0);
        assert_eq!(log.len(), 1);
        assert_eq!(log[0].op, RobotOp::Speak);
        assert_eq!(log[0].args["text"], "hi");
        assert_eq!(log[0].args["rate"], 1.05);
        assert_eq!(log[0].args["emotion"], "Happiness");
    }

    #[test]
    fn sadness_bundle_expands_to_four_actions() {
        let sim = RobotSim::default();
        sim.handle("motion_bundle", &json!({"emotion": "Sadness"})).unwrap();
        let log = sim.action_log(0);
        let ops: Vec<RobotOp> = log.iter().map(|a| a.op).collect();
        assert_eq!(ops, vec![RobotOp::Led, RobotOp::MoveHead, RobotOp::MoveArms, RobotOp::DisplayEmotion]);
        assert_eq!(log[0].args["color"], "blue");
        assert_eq!(log[3].args["emotion"], "Sadness");
    }

    #[test]
    fn every_emotion_has_a_distinct_color() {
        let colors: BTreeSet<&str> = EmotionLabel::ALL.iter().map(|e| motion_template(*e).led_color).collect();
        assert_eq!(colors.len(), 8);
        assert_eq!(motion_template(EmotionLabel::Happiness).led_color, "yellow");
        assert_eq!(motion_template(EmotionLabel::Neutral).led_color, "white");
    }

    #[test]
    fn bad_requests_leave_log_unchanged() {
        let sim = RobotSim::default();
        for (ep, body) in [
            ("dance", json!({})),
            ("speak", json!({"rate": 1.0})),
            ("speak", json!({"text": "x", "rate": "fast"})),
            ("speak", json!("not an object")),
            ("led", json!({})),
            ("display_emotion", json!({"emotion": "Bored"})),
            ("motion_bundle", json!({"emotion": 3})),
        ] {
            assert!(matches!(sim.handle(ep, &body), Err(Error::BadRequest(_))), "{ep} {body}");
        }
        assert!(sim.action_log(0).is_empty());
        assert_eq!(sim.request_count(), 0);
    }

    #[test]
    fn photo_returns_descriptor() {
        let sim = RobotSim::default();
        let resp = sim.handle("capture_photo", &json!({})).unwrap();
        assert_eq!(resp["image"]["format"], "synthetic/jpeg");
        assert_eq!(sim.action_log(0)[0].op, RobotOp::CapturePhoto);
    }

    #[test]
    fn action_log_since() {
        let sim = RobotSim::default();
        assert!(sim.action_log(0).is_empty());
        sim.handle("led", &json!({"color": "red"})).unwrap();
        sim.handle("led", &json!({"color": "blue"})).unwrap();
        assert_eq!(sim.action_log(1).len(), 1);
        assert_eq!(sim.action_log(1)[0].seq, 2);
        assert!(sim.action_log(99).is_empty());
    }

    #[test]
    fn faults_drop_requests() {
        let sim = RobotSim::default();
        sim.fail_requests([1]);
        sim.handle("led", &json!({"color": "red"})).unwrap();
        assert!(matches!(sim.handle("led", &json!({"color": "red"})), Err(Error::RobotUnreachable(_))));
        sim.handle("led", &json!({"color": "red"})).unwrap();
        assert_eq!(sim.action_log(0).len(), 2);
    }

    #[test]
    fn speech_duration_depends_on_rate() {
        assert_eq!(speech_duration_ms("abcdefghijklmno", 1.0), 1000);
        assert!(speech_duration_ms("abcdefghijklmno", 0.95) > speech_duration_ms("abcdefghijklmno", 1.05));
    }

    #[tokio::test]
    async fn events_reach_all_subscribers_in_order() {
        let sim = RobotSim::new();
        let mut a = sim.subscribe();
        let mut b = sim.subscribe();
        let first = sim.inject_sensor_event(SensorId::Chin);
        let second = sim.inject_sensor_event(SensorId::HeadTop);
        for rx in [&mut a, &mut b] {
            let e1 = rx.recv().await.unwrap();
            let e2 = rx.recv().await.unwrap();
            assert_eq!((e1.event_id, e1.sensor), (first, SensorId::Chin));
            assert_eq!((e2.event_id, e2.sensor), (second, SensorId::HeadTop));
        }
        assert!(matches!(sim.inject_sensor_event_named("nose"), Err(Error::UnknownSensor(_))));
    }

    #[tokio::test(flavor = "multi_thread", worker_threads = 4)]
    async fn concurrent_writers_get_gap_free_seq() {
        let sim = RobotSim::new();
        let mut handles = Vec::new();
        for t in 0..8 {
            let sim = sim.clone();
            handles.push(tokio::spawn(async move {
                for i in 0..50 {
                    let endpoint = if i % 5 == 0 { "motion_bundle" } else { "led" };
                    let body = if endpoint == "led" { json!({"color": format!("c{t}")}) } else { json!({"emotion": "Fear"}) };
                    sim.request(endpoint, body).await.unwrap();
                }
            }));
        }
        for h in handles {
            h.await.unwrap();
        }
        let log = sim.action_log(0);
        assert_eq!(log.len(), 8 * (40 + 10 * 4));
        for (i, a) in log.iter().enumerate() {
            assert_eq!(a.seq, i as u64 + 1);
        }
    }
}
