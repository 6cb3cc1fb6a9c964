//! Seeded generators for the benchmark suites. Every generator is a pure
//! function of its seed and size parameters.

use std::collections::BTreeMap;
use std::fmt;

use pilot_core::llm::{RuleTable, SchemaId};
use pilot_core::skills::SkillInventory;
use pilot_core::{EmotionLabel, Error, PiaCommand, Result, RouteTarget, SensorId, SiaAction, SkillDescriptor, TaskState};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::banks::*;
use crate::rouge::DiversityPool;

pub type BenchRng = ChaCha8Rng;

const ATTEMPTS: usize = 2000;

/// Independent stream per suite so adding a suite never shifts another.
pub fn rng_for(seed: u64, stream: &str) -> BenchRng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in stream.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

fn pick<'a, T>(rng: &mut BenchRng, xs: &'a [T]) -> &'a T {
    xs.choose(rng).expect("non-empty bank")
}

fn join_opener(opener: &str, rest: &str) -> String {
    if opener.is_empty() {
        rest.to_string()
    } else {
        format!("{opener} {rest}")
    }
}

/// Draws from `make` until the pool admits a candidate.
fn draw(pool: &mut DiversityPool, what: &str, mut make: impl FnMut() -> String) -> Result<String> {
    for _ in 0..ATTEMPTS {
        let text = make();
        if pool.try_admit(&text) {
            return Ok(text);
        }
    }
    Err(Error::InsufficientDiversity(format!("no admissible {what} after {ATTEMPTS} draws")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Difficulty {
    Easy,
    Hard,
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Difficulty::Easy => "Easy",
            Difficulty::Hard => "Hard",
        })
    }
}

fn split(n: usize) -> (usize, usize) {
    let easy = n.div_ceil(2);
    (easy, n - easy)
}

// ---------------------------------------------------------------- skills

pub fn demo_skill(t: &SkillTemplate) -> SkillDescriptor {
    serde_json::from_value(json!({
        "name": t.name,
        "description": t.description,
        "actions": serde_json::from_str::<Value>(t.actions).expect("valid bank actions"),
    }))
    .expect("valid bank skill")
}

pub fn demo_inventory() -> SkillInventory {
    SkillInventory::new(SKILLS.iter().map(demo_skill)).expect("bank skills are valid")
}

fn skill_template(name: &str) -> &'static SkillTemplate {
    SKILLS.iter().find(|s| s.name == name).expect("bank skill")
}

// ----------------------------------------------------------------- route

#[derive(Debug, Clone, Serialize)]
pub struct RouteItem {
    pub text: String,
    pub target: RouteTarget,
    pub difficulty: Difficulty,
}

fn sia_easy(rng: &mut BenchRng) -> String {
    let o = *pick(rng, OPENERS);
    let body = match rng.random_range(0..8) {
        0 => format!("tell me a story about {}", pick(rng, STORY_SUBJECTS)),
        1 => format!("help me plan {} for {}", pick(rng, PLAN_THINGS), pick(rng, WHEN)),
        2 => format!("I feel {} {}, can we talk for a bit", pick(rng, FEELINGS), pick(rng, BECAUSE)),
        3 => format!("give me a few tips on {}", pick(rng, TIP_TOPICS)),
        4 => format!("explain {} in simple words", pick(rng, CONCEPTS)),
        5 => format!("what should I cook {} for {} people", pick(rng, WHEN), rng.random_range(2..7)),
        6 => format!("can you recommend a good book about {}", pick(rng, TIP_TOPICS)),
        _ => format!("let's chat about {} {}", pick(rng, CONCEPTS), pick(rng, WHEN)),
    };
    join_opener(o, &body)
}

fn sia_hard(rng: &mut BenchRng) -> String {
    let o = *pick(rng, OPENERS);
    let body = match rng.random_range(0..13) {
        0 => format!("my {} visits {} and I have no clue how to keep them entertained", pick(rng, RELATIVES), pick(rng, WHEN)),
        1 => format!("remember the plan for {}? make it more relaxed this time", pick(rng, PLAN_THINGS)),
        2 => format!("I keep thinking about {}, it has been hard to focus lately", pick(rng, WORRIES)),
        3 => format!("before I head to bed, something calm about {} would be lovely", pick(rng, STORY_SUBJECTS)),
        4 => format!("my {} says I should try {} more, what do you honestly think", pick(rng, RELATIVES), pick(rng, TIP_TOPICS)),
        5 => {
            let (a, b) = pick(rng, OPTION_PAIRS);
            format!("the {} is coming up and I'm torn between {a} and {b}", pick(rng, EVENTS))
        }
        7 => format!("last time we talked about {} I felt better, can we pick that up again", pick(rng, WORRIES)),
        8 => format!("it's {} and my {} wants a story, any idea with {} in it", pick(rng, WHEN), pick(rng, RELATIVES), pick(rng, STORY_SUBJECTS)),
        9 => format!("I'm {} {} so maybe cheer me up in your own way", pick(rng, FEELINGS), pick(rng, BECAUSE)),
        10 => format!("what would you say to someone who gave up on {} after a week", pick(rng, TIP_TOPICS)),
        11 => format!("I never really understood {}, walk me through it like I'm ten", pick(rng, CONCEPTS)),
        _ => format!("could you go slower when you explain {}, I got lost last time", pick(rng, CONCEPTS)),
    };
    join_opener(o, &body)
}

fn touch(rng: &mut BenchRng, sensor: SensorId) -> &'static str {
    pick(rng, sensor_phrases(sensor))
}

fn skill_phrase(rng: &mut BenchRng, skill: &str) -> &'static str {
    pick(rng, skill_template(skill).phrases)
}

fn pia_easy(rng: &mut BenchRng) -> String {
    let sensor = *pick(rng, &SensorId::ALL);
    let skill = pick(rng, SKILLS).name;
    let (t, s) = (touch(rng, sensor), skill_phrase(rng, skill));
    let body = match rng.random_range(0..8) {
        0 => format!("{t} and {s}"),
        1 => format!("please {s} right now"),
        2 => format!("{}, {s} for me", pick(rng, INVOKE_CONTEXTS)),
        3 => format!("{s} whenever I {t}"),
        4 => format!("go ahead and {s}"),
        5 => format!("could you {s} every time I {t}"),
        6 => format!("I want you to {s} now"),
        _ => format!("when I {t}, {s}"),
    };
    join_opener(pick(rng, OPENERS), &body)
}

fn pia_hard(rng: &mut BenchRng) -> String {
    let mut sensors = SensorId::ALL.to_vec();
    sensors.shuffle(rng);
    let (s1, s2) = (sensors[0], sensors[1]);
    let k1 = pick(rng, SKILLS).name;
    let k2 = pick(rng, SKILLS).name;
    let (t1, t2) = (touch(rng, s1), touch(rng, s2));
    let (p1, p2) = (skill_phrase(rng, k1), skill_phrase(rng, k2));
    let body = match rng.random_range(0..7) {
        0 => format!("when I {t1}, {p1}; {t2} to {p2}"),
        1 => format!("I'm {}, {p1} for me", pick(rng, ACTIVITIES_ING)),
        2 => format!("whenever I {t1} please {p1}, and if I {t2} just {p2}"),
        3 => format!("stop reacting when I {t1} and {p2} instead"),
        4 => format!("from now on {p1} if I {t1}, otherwise {p2} when I {t2}"),
        5 => format!("while I'm {} please {p2}", pick(rng, ACTIVITIES_ING)),
        _ => format!("if I {t1} while you are idle, {p1}"),
    };
    join_opener(pick(rng, OPENERS), &body)
}

/// `n` routing instructions with the 58/42 SIA/PIA split, each side half
/// easy and half hard.
pub fn route_dataset(seed: u64, n: usize) -> Result<Vec<RouteItem>> {
    let mut rng = rng_for(seed, "route");
    let sia = (n as f64 * 0.58).round() as usize;
    let pia = n - sia;
    let mut pool = DiversityPool::new();
    let mut items = Vec::with_capacity(n);
    let plan = [
        (RouteTarget::Sia, Difficulty::Easy, split(sia).0, sia_easy as fn(&mut BenchRng) -> String),
        (RouteTarget::Sia, Difficulty::Hard, split(sia).1, sia_hard),
        (RouteTarget::Pia, Difficulty::Easy, split(pia).0, pia_easy),
        (RouteTarget::Pia, Difficulty::Hard, split(pia).1, pia_hard),
    ];
    for (target, difficulty, count, make) in plan {
        for _ in 0..count {
            let text = draw(&mut pool, "route instruction", || make(&mut rng))?;
            items.push(RouteItem { text, target, difficulty });
        }
    }
    Ok(items)
}

pub fn route_rules(items: &[RouteItem]) -> RuleTable {
    let mut t = RuleTable::default();
    for item in items {
        let rationale = match item.target {
            RouteTarget::Sia => "dialogue-oriented request",
            RouteTarget::Pia => "sensor trigger or direct tool use",
        };
        t.exact(SchemaId::RouteDecision, &item.text, json!({"target": item.target, "rationale": rationale}));
    }
    t
}

// ------------------------------------------------------------ sensorbind

#[derive(Debug, Clone, Serialize)]
pub struct SensorBindItem {
    pub text: String,
    pub difficulty: Difficulty,
    pub expected: Vec<PiaCommand>,
}

pub const PAPER_THREE_BINDINGS: &str =
    "when I tap your chin, take a photo; press your forehead to say hi; touch your right side to show sadness";

fn bind(sensor: SensorId, skill: &str) -> PiaCommand {
    PiaCommand::Bind { sensor, skill: skill.to_string() }
}

fn invoke(skill: &str) -> PiaCommand {
    PiaCommand::Invoke { skill: skill.to_string(), args: BTreeMap::new() }
}

fn sensorbind_easy(rng: &mut BenchRng) -> (String, Vec<PiaCommand>) {
    let skill = pick(rng, SKILLS).name;
    let s = skill_phrase(rng, skill);
    if rng.random_bool(0.5) {
        let sensor = *pick(rng, &SensorId::ALL);
        let t = touch(rng, sensor);
        let text = match rng.random_range(0..4) {
            0 => format!("{t} and {s}"),
            1 => format!("when I {t}, {s}"),
            2 => format!("if I {t}, please {s}"),
            _ => format!("every time I {t}, {s}"),
        };
        (text, vec![bind(sensor, skill)])
    } else {
        let text = match rng.random_range(0..3) {
            0 => format!("{}, {s} for me", pick(rng, INVOKE_CONTEXTS)),
            1 => format!("please {s} right now"),
            _ => format!("{} could you {s}?", pick(rng, &["hey,", "misty,", "so", "okay"])),
        };
        (text, vec![invoke(skill)])
    }
}

fn sensorbind_hard(rng: &mut BenchRng) -> (String, Vec<PiaCommand>) {
    let k = rng.random_range(2..=3);
    let mut sensors = SensorId::ALL.to_vec();
    sensors.shuffle(rng);
    let mut clauses = Vec::new();
    let mut expected = Vec::new();
    for &sensor in &sensors[..k] {
        let skill = pick(rng, SKILLS).name;
        let (t, s) = (touch(rng, sensor), skill_phrase(rng, skill));
        clauses.push(match rng.random_range(0..3) {
            0 => format!("when I {t}, {s}"),
            1 => format!("{t} to {s}"),
            _ => format!("if I {t}, {s}"),
        });
        expected.push(bind(sensor, skill));
    }
    (clauses.join("; "), expected)
}

/// Easy items are one binding or one invocation; hard items carry two or
/// three bindings. The first items of each half are the worked examples.
pub fn sensorbind_dataset(seed: u64, easy: usize, hard: usize) -> Result<Vec<SensorBindItem>> {
    let mut rng = rng_for(seed, "sensorbind");
    let mut pool = DiversityPool::new();
    let mut items = Vec::with_capacity(easy + hard);
    let seeds_easy = [
        ("touch your head and make a cute sound".to_string(), vec![bind(SensorId::HeadTop, "cute_sound")]),
        ("I'm doing home exercise, play some good workout music for me".to_string(), vec![invoke("play_workout_music")]),
    ];
    let seeds_hard = [(
        PAPER_THREE_BINDINGS.to_string(),
        vec![bind(SensorId::Chin, "take_photo"), bind(SensorId::HeadFront, "say_hi"), bind(SensorId::HeadRight, "show_sadness")],
    )];
    for (count, difficulty, seeds, make) in [
        (easy, Difficulty::Easy, &seeds_easy[..], sensorbind_easy as fn(&mut BenchRng) -> (String, Vec<PiaCommand>)),
        (hard, Difficulty::Hard, &seeds_hard[..], sensorbind_hard),
    ] {
        for i in 0..count {
            let (text, expected) = match seeds.get(i) {
                Some((t, e)) if pool.try_admit(t) => (t.clone(), e.clone()),
                _ => {
                    let mut last = None;
                    draw(&mut pool, "sensor instruction", || {
                        let (t, e) = make(&mut rng);
                        last = Some(e);
                        t
                    })
                    .map(|t| (t, last.take().expect("drawn")))?
                }
            };
            items.push(SensorBindItem { text, difficulty, expected });
        }
    }
    Ok(items)
}

pub fn sensorbind_rules(items: &[SensorBindItem]) -> RuleTable {
    let mut t = RuleTable::default();
    for item in items {
        t.exact(SchemaId::RouteDecision, &item.text, json!({"target": "PIA"}));
        t.exact(SchemaId::PiaCommands, &item.text, json!({"commands": item.expected}));
    }
    t
}

// ------------------------------------------------------------ taskparser

/// A detail slot: units are `<prefix> <value><suffix>`, so two units of one
/// slot differ in a single token.
struct Slot {
    label: &'static str,
    prefix: &'static str,
    suffix: &'static str,
    values: &'static [&'static str],
}

struct Domain {
    main_task: &'static str,
    objects: &'static [&'static str],
    request: &'static [&'static str],
    slots: &'static [Slot],
    addons: &'static [&'static str],
    script: &'static [(&'static str, EmotionLabel)],
}

const DAYS: &[&str] = &["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday", "tomorrow"];

const DOMAINS: &[Domain] = &[
    Domain {
        main_task: "Plan a day trip to {}",
        objects: &["New York City", "Boston", "Chicago", "Seattle", "Kyoto", "Lisbon"],
        request: &["I'd like to plan a day trip to {}", "help me plan a day trip to {}", "can you put together a day trip to {}"],
        slots: &[
            Slot { label: "return time", prefix: "return to the hotel by", suffix: " pm", values: &["5:00", "6:00", "7:00", "8:00", "9:00"] },
            Slot { label: "date", prefix: "trip date is", suffix: "", values: DAYS },
            Slot { label: "budget", prefix: "budget of about", suffix: " dollars", values: &["50", "100", "150", "200", "300"] },
            Slot { label: "goal", prefix: "main goal is", suffix: "", values: &["sightseeing", "shopping", "museums", "food", "relaxing"] },
        ],
        addons: &["pack an umbrella", "book a lunch table", "avoid crowded places", "bring comfortable shoes"],
        script: &[("What a lovely idea for a day out.", EmotionLabel::Happiness), ("Here is an itinerary that fits your timing.", EmotionLabel::Neutral)],
    },
    Domain {
        main_task: "Tell a bedtime story about {}",
        objects: &["a brave rabbit", "a lost dragon", "a sleepy owl", "two clever foxes", "a tiny robot"],
        request: &["tell me a bedtime story about {}", "I want a bedtime story about {}", "could you tell a bedtime story about {}"],
        slots: &[
            Slot { label: "length", prefix: "story length is", suffix: "", values: &["short", "medium", "long"] },
            Slot { label: "hero name", prefix: "main character is called", suffix: "", values: &["leo", "mia", "pip", "luna", "max"] },
            Slot { label: "mood", prefix: "overall mood should be", suffix: "", values: &["cheerful", "calm", "spooky", "funny"] },
            Slot { label: "setting", prefix: "set the whole tale in", suffix: "", values: &["forest", "ocean", "castle", "desert", "space"] },
        ],
        addons: &["end with a gentle moral", "include a friendly sidekick", "add a little song"],
        script: &[("Once upon a time, in a quiet land, a little hero woke up.", EmotionLabel::Neutral), ("The hero found a new friend and smiled.", EmotionLabel::Happiness)],
    },
    Domain {
        main_task: "Suggest a dinner recipe with {}",
        objects: &["chicken", "tofu", "salmon", "lentils", "mushrooms"],
        request: &["suggest a dinner recipe with {}", "what dinner can I make with {}", "give me a dinner recipe using {}"],
        slots: &[
            Slot { label: "servings", prefix: "serving size is", suffix: " people", values: &["2", "3", "4", "6"] },
            Slot { label: "cooking time", prefix: "cooking time stays under", suffix: " minutes", values: &["20", "30", "45", "60"] },
            Slot { label: "spice", prefix: "spice level is", suffix: "", values: &["mild", "medium", "hot"] },
            Slot { label: "allergy", prefix: "recipe must avoid", suffix: " completely", values: &["dairy", "nuts", "gluten", "garlic"] },
        ],
        addons: &["suggest a side salad", "use only one pan", "make leftovers for lunch"],
        script: &[("That sounds delicious, let's cook.", EmotionLabel::Happiness), ("Start by preparing your ingredients.", EmotionLabel::Neutral)],
    },
    Domain {
        main_task: "Create a home workout for {}",
        objects: &["core strength", "leg day", "upper body", "flexibility", "cardio"],
        request: &["create a home workout for {}", "I need a home workout focused on {}", "design me a workout for {}"],
        slots: &[
            Slot { label: "duration", prefix: "each session lasts", suffix: " minutes", values: &["15", "20", "30", "45"] },
            Slot { label: "intensity", prefix: "intensity level is", suffix: "", values: &["low", "moderate", "high"] },
            Slot { label: "equipment", prefix: "only equipment available is", suffix: "", values: &["mat", "dumbbells", "chair", "band"] },
            Slot { label: "rest", prefix: "rest between sets for", suffix: " seconds", values: &["30", "45", "60", "90"] },
        ],
        addons: &["include a cool down", "play music during it", "track my reps"],
        script: &[("Let's get moving, you've got this!", EmotionLabel::Happiness), ("Warm up for two minutes first.", EmotionLabel::Neutral)],
    },
    Domain {
        main_task: "Make a study schedule for {}",
        objects: &["my math exam", "the biology test", "a history essay", "the piano recital", "my driving test"],
        request: &["make a study schedule for {}", "I need a study plan for {}", "help me prepare a schedule for {}"],
        slots: &[
            Slot { label: "deadline", prefix: "final deadline is", suffix: "", values: DAYS },
            Slot { label: "hours", prefix: "study hours per day", suffix: "", values: &["1", "2", "3", "4"] },
            Slot { label: "breaks", prefix: "take a break every", suffix: " minutes", values: &["25", "40", "50", "60"] },
            Slot { label: "focus", prefix: "weakest area to focus on is", suffix: "", values: &["memorizing", "practice", "reading", "writing"] },
        ],
        addons: &["quiz me at the end", "leave sunday free", "remind me to drink water"],
        script: &[("A steady plan will make this much easier.", EmotionLabel::Neutral), ("I believe you will do great.", EmotionLabel::Happiness)],
    },
    Domain {
        main_task: "Organize a birthday party for {}",
        objects: &["my daughter", "my grandfather", "my best friend", "a coworker", "my twin brothers"],
        request: &["organize a birthday party for {}", "help me throw a birthday party for {}", "plan a birthday celebration for {}"],
        slots: &[
            Slot { label: "party date", prefix: "party date is", suffix: "", values: DAYS },
            Slot { label: "guest count", prefix: "number of guests is", suffix: "", values: &["8", "12", "20", "30"] },
            Slot { label: "theme", prefix: "party theme is", suffix: "", values: &["pirates", "space", "garden", "retro"] },
            Slot { label: "party budget", prefix: "spend at most", suffix: " dollars", values: &["100", "250", "400", "600"] },
        ],
        addons: &["order a chocolate cake", "send invitations early", "set up a photo corner"],
        script: &[("A party, how exciting!", EmotionLabel::Surprise), ("Here is a simple plan for the day.", EmotionLabel::Neutral)],
    },
    Domain {
        main_task: "Help me calm down before {}",
        objects: &["a job interview", "a big exam", "a difficult talk", "my first presentation", "a long flight"],
        request: &["help me calm down before {}", "I'm nervous about {}, help me relax", "can you ease my nerves before {}"],
        slots: &[
            Slot { label: "breathing", prefix: "breathing exercise lasts", suffix: " minutes", values: &["2", "3", "5", "10"] },
            Slot { label: "voice", prefix: "please speak in a", suffix: " voice", values: &["soft", "warm", "steady", "cheerful"] },
            Slot { label: "reminder", prefix: "remind me about my", suffix: "", values: &["strengths", "progress", "friends", "preparation"] },
        ],
        addons: &["end with a positive thought", "keep it very short", "include a stretch"],
        script: &[("It's okay to feel nervous.", EmotionLabel::Sadness), ("Take a slow breath with me.", EmotionLabel::Neutral), ("You are ready for this.", EmotionLabel::Happiness)],
    },
];

fn unit(slot: &Slot, value: &str) -> String {
    format!("{} {value}{}", slot.prefix, slot.suffix)
}

#[derive(Debug, Clone, Serialize)]
pub struct Turn {
    pub text: String,
    pub expected_action: SiaAction,
    pub expected_state: TaskState,
}

#[derive(Debug, Clone, Serialize)]
pub struct Dialogue {
    pub difficulty: Difficulty,
    pub turns: Vec<Turn>,
}

const UPGRADE_CORES: &[&str] = &[
    "switch to your smarter model",
    "use the more capable model",
    "bring out your bigger brain",
    "upgrade to the stronger model",
    "think harder with the advanced model",
    "use your smarter model",
    "go with the heavyweight model",
    "put your best model on it",
];
const DOWNGRADE_CORES: &[&str] = &[
    "the light model is fine",
    "switch back to the faster model",
    "use the lightweight model again",
    "no need for the big model anymore",
    "downgrade to the quick model",
    "the basic model will do",
    "go back to the small model",
];
const MEMORY_CORES: &[&str] = &[
    "remember this for next time",
    "save this so we can reuse it",
    "keep this one in your memory",
    "please memorize this answer",
    "store this plan for later",
    "don't forget this one",
    "hold on to this for the future",
];
const UPDATE_CORES: &[&str] = &["actually, make it {}", "change it so that {}", "let's say {} instead", "small fix: {}", "update that, {}", "wait, {}"];
const ADD_CORES: &[&str] = &["also, {}", "one more thing, {}", "oh and {}", "please add that {}", "and make sure to {}"];
const DELETE_CORES: &[&str] = &["forget about the {}", "drop the {} part", "never mind the {}", "remove the {} detail", "scrap the {}"];
const TAILS: &[&str] = &["", "please", "for this one", "thanks", "if you can", "right away", "from now on", "for the {}"];

struct DialogueState {
    domain: &'static Domain,
    object: &'static str,
    /// (slot index or None for add-ons, unit)
    units: Vec<(Option<usize>, String)>,
    tier: pilot_core::ModelTier,
}

impl DialogueState {
    fn task_state(&self) -> TaskState {
        TaskState {
            main_task: self.domain.main_task.replace("{}", self.object),
            details: self.units.iter().map(|(_, u)| u.clone()).collect(),
            model_tier: self.tier,
        }
    }
}

fn with_tail(rng: &mut BenchRng, core: &str, topic: &str) -> String {
    let tail = pick(rng, TAILS).replace("{}", topic);
    let opener = *pick(rng, OPENERS);
    let body = if tail.is_empty() { core.to_string() } else { format!("{core} {tail}") };
    join_opener(opener, &body)
}

fn new_task(
    rng: &mut BenchRng,
    used: &[(&'static str, &'static str)],
) -> (&'static Domain, &'static str, Vec<(Option<usize>, String)>) {
    loop {
        let domain = pick(rng, DOMAINS);
        let object = *pick(rng, domain.objects);
        if used.contains(&(domain.main_task, object)) {
            continue;
        }
        let mut idx: Vec<usize> = (0..domain.slots.len()).collect();
        idx.shuffle(rng);
        let n = rng.random_range(1..=3).min(idx.len());
        let units = idx[..n].iter().map(|&i| (Some(i), unit(&domain.slots[i], pick(rng, domain.slots[i].values)))).collect();
        return (domain, object, units);
    }
}

fn new_text(rng: &mut BenchRng, domain: &Domain, object: &str, units: &[(Option<usize>, String)]) -> String {
    let request = pick(rng, domain.request).replace("{}", object);
    let details: Vec<&str> = units.iter().map(|(_, u)| u.as_str()).collect();
    join_opener(pick(rng, OPENERS), &format!("{request}, {}", details.join(", ")))
}

fn topic(state: &DialogueState) -> String {
    state.object.trim_start_matches("my ").trim_start_matches("the ").trim_start_matches("a ").to_string()
}

/// Proposes the next turn; returns (text, action) and mutates `state`.
fn next_turn(rng: &mut BenchRng, state: &mut DialogueState, hard: bool, used: &mut Vec<(&'static str, &'static str)>) -> Option<(String, SiaAction)> {
    let domain = state.domain;
    let t = topic(state);
    let choice = rng.random_range(0..if hard { 8 } else { 6 });
    match choice {
        // change a slot value
        0 | 1 => {
            let present: Vec<(usize, usize)> =
                state.units.iter().enumerate().filter_map(|(pos, (s, _))| s.map(|s| (pos, s))).collect();
            let &(pos, slot_i) = present.choose(rng)?;
            let slot = &domain.slots[slot_i];
            let old = state.units[pos].1.clone();
            let candidates: Vec<&str> = slot.values.iter().copied().filter(|v| unit(slot, v) != old).collect();
            let value = *candidates.choose(rng)?;
            let new = unit(slot, value);
            state.units[pos].1 = new.clone();
            let core = pick(rng, UPDATE_CORES).replace("{}", &new);
            let text = with_tail(rng, &core, &t);
            Some((text, SiaAction::Update { details: vec![new] }))
        }
        // add a new slot or an add-on
        2 | 3 => {
            let missing: Vec<usize> =
                (0..domain.slots.len()).filter(|i| !state.units.iter().any(|(s, _)| *s == Some(*i))).collect();
            let (slot, new) = if !missing.is_empty() && rng.random_bool(0.6) {
                let i = *missing.choose(rng)?;
                (Some(i), unit(&domain.slots[i], pick(rng, domain.slots[i].values)))
            } else {
                let free: Vec<&str> =
                    domain.addons.iter().copied().filter(|a| !state.units.iter().any(|(_, u)| u == a)).collect();
                (None, (*free.choose(rng)?).to_string())
            };
            state.units.push((slot, new.clone()));
            let core = pick(rng, ADD_CORES).replace("{}", &new);
            let text = with_tail(rng, &core, &t);
            Some((text, SiaAction::Update { details: vec![new] }))
        }
        4 => {
            if state.units.len() < 2 {
                return None;
            }
            let pos = rng.random_range(0..state.units.len());
            let (slot, gone) = state.units.remove(pos);
            let label = match slot {
                Some(i) => domain.slots[i].label.to_string(),
                None => gone.clone(),
            };
            let core = pick(rng, DELETE_CORES).replace("{}", &label);
            let text = with_tail(rng, &core, &t);
            Some((text, SiaAction::Delete { details: vec![gone] }))
        }
        5 => {
            if state.tier == pilot_core::ModelTier::Light {
                state.tier = pilot_core::ModelTier::Heavy;
                Some(({ let core = *pick(rng, UPGRADE_CORES); with_tail(rng, core, &t) }, SiaAction::Upgrade))
            } else {
                state.tier = pilot_core::ModelTier::Light;
                Some(({ let core = *pick(rng, DOWNGRADE_CORES); with_tail(rng, core, &t) }, SiaAction::Downgrade))
            }
        }
        6 => Some(({ let core = *pick(rng, MEMORY_CORES); with_tail(rng, core, &t) }, SiaAction::Memory)),
        _ => {
            let (d, o, units) = new_task(rng, used);
            used.push((d.main_task, o));
            let text = new_text(rng, d, o, &units);
            let details = units.iter().map(|(_, u)| u.clone()).collect();
            state.domain = d;
            state.object = o;
            state.units = units;
            Some((text, SiaAction::New { main_task: d.main_task.replace("{}", o), details }))
        }
    }
}

fn hard_turn_counts(dialogues: usize, total: usize) -> Vec<usize> {
    if dialogues == 0 {
        return vec![];
    }
    let base = total / dialogues;
    let extra = total % dialogues;
    (0..dialogues).map(|i| base + usize::from(i < extra)).collect()
}

/// Multi-turn dialogues: `easy` dialogues of four turns and `hard`
/// dialogues sharing `hard_turns` turns (topic shifts, model switches and
/// memory requests interleaved with edits).
pub fn taskparser_dataset(seed: u64, easy: usize, hard: usize, hard_turns: usize) -> Result<Vec<Dialogue>> {
    let mut rng = rng_for(seed, "taskparser");
    let mut pool = DiversityPool::new();
    let mut out = Vec::new();
    let counts: Vec<(Difficulty, usize)> = std::iter::repeat_n((Difficulty::Easy, 4), easy)
        .chain(hard_turn_counts(hard, hard_turns).into_iter().map(|n| (Difficulty::Hard, n)))
        .collect();
    for (difficulty, n_turns) in counts {
        let is_hard = difficulty == Difficulty::Hard;
        let mut dialogue = None;
        for _ in 0..ATTEMPTS {
            if let Some(d) = try_dialogue(&mut rng, &mut pool, is_hard, n_turns) {
                dialogue = Some(Dialogue { difficulty, turns: d });
                break;
            }
        }
        out.push(dialogue.ok_or_else(|| Error::InsufficientDiversity("taskparser dialogue".into()))?);
    }
    Ok(out)
}

fn try_dialogue(
    rng: &mut BenchRng,
    pool: &mut DiversityPool,
    hard: bool,
    n_turns: usize,
) -> Option<Vec<Turn>> {
    let mut local_pool = pool.clone();
    // topics repeat across dialogues but never within one
    let mut local_used = Vec::new();
    let (domain, object, units) = new_task(rng, &local_used);
    local_used.push((domain.main_task, object));
    let mut state = DialogueState { domain, object, units, tier: pilot_core::ModelTier::Light };
    let mut turns = Vec::with_capacity(n_turns);

    let first = {
        let mut made = None;
        for _ in 0..50 {
            let text = new_text(rng, domain, object, &state.units);
            if local_pool.try_admit(&text) {
                made = Some(text);
                break;
            }
        }
        made?
    };
    let details = state.units.iter().map(|(_, u)| u.clone()).collect();
    turns.push(Turn {
        text: first,
        expected_action: SiaAction::New { main_task: domain.main_task.replace("{}", object), details },
        expected_state: state.task_state(),
    });

    let mut guard = 0;
    while turns.len() < n_turns {
        guard += 1;
        if guard > 400 {
            return None;
        }
        let mut trial = DialogueState { units: state.units.clone(), ..state };
        let mut trial_used = local_used.clone();
        // easy dialogues stay on one topic and avoid tier switches
        let Some((text, action)) = next_turn(rng, &mut trial, hard, &mut trial_used) else { continue };
        if !hard && matches!(action, SiaAction::New { .. }) {
            continue;
        }
        if !local_pool.try_admit(&text) {
            continue;
        }
        state = trial;
        local_used = trial_used;
        turns.push(Turn { text, expected_action: action, expected_state: state.task_state() });
    }
    *pool = local_pool;
    Some(turns)
}

fn script_json(lines: &[(&str, EmotionLabel)]) -> Value {
    json!({"utterances": lines.iter().map(|(t, e)| json!({"text": t, "emotion": e})).collect::<Vec<_>>()})
}

pub fn taskparser_rules(dialogues: &[Dialogue]) -> RuleTable {
    let mut t = RuleTable::default();
    for d in dialogues {
        for turn in &d.turns {
            t.exact(SchemaId::SiaAction, &turn.text, serde_json::to_value(&turn.expected_action).expect("serializable"));
        }
    }
    for domain in DOMAINS {
        let prefix = domain.main_task.split("{}").next().unwrap_or("").to_lowercase();
        t.pattern(SchemaId::Script, format!("{prefix}*"), script_json(domain.script));
    }
    t
}

// ---------------------------------------------------------- fastthinking

const FAST_CATEGORIES: &[(&str, &[&str])] = &[
    ("Plan a day trip to {}", &["New York City", "Boston", "Kyoto", "Lisbon", "Seattle"]),
    ("Tell a bedtime story about {}", &["a brave rabbit", "a lost dragon", "a sleepy owl", "a tiny robot", "two clever foxes"]),
    ("Suggest a dinner recipe with {}", &["chicken", "tofu", "salmon", "lentils", "mushrooms"]),
    ("Create a home workout for {}", &["core strength", "leg day", "upper body", "flexibility", "cardio"]),
    ("Make a study schedule for {}", &["a math exam", "a biology test", "a history essay", "a driving test"]),
    ("Organize a birthday party for {}", &["my daughter", "my grandfather", "my best friend", "a coworker"]),
    ("Write a short poem about {}", &["autumn leaves", "the ocean", "friendship", "city lights", "a rainy morning"]),
    ("Explain how {} works", &["a rainbow", "an airplane", "a vaccine", "a black hole", "the internet"]),
    ("Recommend a movie for {}", &["a family night", "a rainy afternoon", "a first date", "a sleepover"]),
    ("Teach me basic phrases in {}", &["Spanish", "Japanese", "French", "Italian", "Korean"]),
];

const TASK_LEADS: &[&str] = &["could you", "I'd like you to", "please", "can you", "I want you to", "would you"];

const SHARED_DETAILS: &[&str] = &[
    "for tomorrow morning",
    "with my two kids around",
    "on a really tight budget",
    "in under an hour",
    "in a cheerful tone",
    "for my grandmother",
    "keeping everything simple",
    "since it is raining today",
    "before dinner time",
    "with lots of little details",
    "for a quiet weekend at home",
    "without anything too fancy",
    "to share with my friends later",
    "as a surprise for someone",
    "for a sleepy evening",
    "with a bit of humor",
];

#[derive(Debug, Clone, Serialize)]
pub struct FastTask {
    pub canonical: String,
    /// Instruction the stored record was created from (Raw Text key).
    pub seed_text: String,
    pub variants: Vec<String>,
}

fn fast_instruction(rng: &mut BenchRng, canonical: &str) -> (String, Vec<String>) {
    let lead = *pick(rng, TASK_LEADS);
    let mut task = canonical.to_string();
    if let Some(first) = task.get(..1) {
        task = first.to_lowercase() + &task[1..];
    }
    let mut details: Vec<&str> = SHARED_DETAILS.to_vec();
    details.shuffle(rng);
    let n = rng.random_range(2..=3);
    let chosen: Vec<String> = details[..n].iter().map(|d| d.to_string()).collect();
    let text = join_opener(pick(rng, OPENERS), &format!("{lead} {task} {}", chosen.join(" ")));
    (text, chosen)
}

/// `k` canonical tasks, each with one stored seed instruction and five
/// query variants that keep the task but change the surrounding details.
pub fn fastthinking_dataset(seed: u64, k: usize) -> Result<Vec<FastTask>> {
    let mut rng = rng_for(seed, "fastthinking");
    let mut canon: Vec<String> =
        FAST_CATEGORIES.iter().flat_map(|(t, objs)| objs.iter().map(move |o| t.replace("{}", o))).collect();
    if k > canon.len() {
        return Err(Error::InsufficientDiversity(format!("only {} canonical tasks available", canon.len())));
    }
    canon.shuffle(&mut rng);
    canon.truncate(k);
    let mut pool = DiversityPool::new();
    let mut tasks = Vec::with_capacity(k);
    for canonical in canon {
        let seed_text = draw(&mut pool, "fastthinking seed", || fast_instruction(&mut rng, &canonical).0)?;
        let mut variants = Vec::with_capacity(5);
        for _ in 0..5 {
            variants.push(draw(&mut pool, "fastthinking variant", || fast_instruction(&mut rng, &canonical).0)?);
        }
        tasks.push(FastTask { canonical, seed_text, variants });
    }
    Ok(tasks)
}

pub fn fastthinking_rules(tasks: &[FastTask]) -> RuleTable {
    let mut t = RuleTable::default();
    for task in tasks {
        for text in std::iter::once(&task.seed_text).chain(&task.variants) {
            t.exact(SchemaId::SiaAction, text, json!({"action": "NEW", "main_task": task.canonical, "details": []}));
        }
        t.exact(
            SchemaId::Script,
            &task.canonical,
            script_json(&[
                ("Sure, let me take care of that.", EmotionLabel::Happiness),
                ("Here is what I came up with.", EmotionLabel::Neutral),
            ]),
        );
    }
    t
}

// --------------------------------------------------------------- toolext

struct Family {
    descr: &'static str,
    queries: &'static [&'static str],
    objects: &'static [&'static str],
    op: fn(&str) -> Value,
}

const TOOL_FAMILIES: &[Family] = &[
    Family {
        descr: "Plays {} through the speaker.",
        queries: &["play {}", "put on some {}", "I'd love to hear {}", "start playing {}"],
        objects: &[
            "rain sounds", "ocean waves", "smooth jazz", "a lullaby", "birdsong", "a drum solo", "campfire crackling",
            "thunderstorm audio", "violin melodies", "forest ambience", "cafe chatter", "wind chimes", "whale songs",
            "a marching band", "tibetan bowls", "rock classics", "salsa rhythms", "harp music", "white noise",
            "a heartbeat rhythm", "a countdown timer", "cartoon sound effects", "a gong", "crickets at night",
            "a music box",
        ],
        op: |o| json!([{"op": "play_audio", "args": {"track": format!("{}.mp3", o.replace(' ', "_"))}}]),
    },
    Family {
        descr: "Speaks {} aloud.",
        queries: &["tell me {}", "say {}", "share {} with me", "I want to hear {}"],
        objects: &[
            "a fun fact about space", "a tongue twister", "a motivational quote", "a riddle", "a knock knock joke",
            "a fact about octopuses", "a proverb from japan", "a weather saying", "a word of the day", "a tip for sleeping",
            "a compliment", "a haiku about snow", "a trivia question", "a safety reminder", "a famous movie line",
            "a palindrome", "a history fact", "a recycling tip", "an animal sound quiz", "a breathing cue",
        ],
        op: |o| json!([{"op": "speak", "args": {"text": format!("Here is {o}.")}}]),
    },
    Family {
        descr: "Turns the chest light {}.",
        queries: &["make your light {}", "switch your led to {}", "glow {}", "set your chest light {}"],
        objects: &[
            "red", "green", "blue", "yellow", "purple", "orange", "pink", "teal", "gold", "white", "lime", "magenta",
            "amber", "crimson", "navy", "violet",
        ],
        op: |o| json!([{"op": "led", "args": {"color": o}}]),
    },
    Family {
        descr: "Moves the head to {}.",
        queries: &["{} with your head", "use your head to {}", "move your head and {}", "can your head {}"],
        objects: &[
            "look up", "look down", "tilt left", "tilt right", "turn left", "turn right", "shake no", "nod yes",
            "peek around", "stare ahead", "bob to a beat", "look at the ceiling",
        ],
        op: |o| json!([{"op": "move_head", "args": {"pitch": (o.len() % 30) as i64 - 15, "yaw": 0, "roll": 0}}]),
    },
    Family {
        descr: "Moves the arms to {}.",
        queries: &["{} with your arms", "use your arms to {}", "move your arms and {}", "can your arms {}"],
        objects: &[
            "raise the left arm", "raise the right arm", "raise both arms", "lower both arms", "flap like a bird",
            "cheer for me", "stretch out wide", "do a robot pose", "point forward", "give a big shrug",
            "cross them slowly", "wave goodbye",
        ],
        op: |o| json!([{"op": "move_arms", "args": {"left": -((o.len() % 9) as i64) * 10, "right": ((o.len() % 7) as i64) * 10}}]),
    },
    Family {
        descr: "Shows {} on the face display.",
        queries: &["show {} on your face", "display {}", "put {} on your screen", "let me see {}"],
        objects: &[
            "a happy face", "a sad face", "an angry face", "a scared face", "a disgusted face", "a surprised face",
            "a smug face", "a neutral face",
        ],
        op: |o| {
            let emotion = match o {
                "a happy face" => "Happiness",
                "a sad face" => "Sadness",
                "an angry face" => "Anger",
                "a scared face" => "Fear",
                "a disgusted face" => "Disgust",
                "a surprised face" => "Surprise",
                "a smug face" => "Contempt",
                _ => "Neutral",
            };
            json!([{"op": "display_emotion", "args": {"emotion": emotion}}])
        },
    },
    Family {
        descr: "Takes {} with the camera.",
        queries: &["take {}", "snap {}", "capture {} for me", "I need {}"],
        objects: &[
            "a wide photo", "a square photo", "a tiny thumbnail", "a portrait shot", "a panorama picture",
            "a high resolution photo", "a quick snapshot", "a group photo",
        ],
        op: |o| {
            let (w, h) = match o.len() % 4 {
                0 => (1920, 1080),
                1 => (640, 640),
                2 => (160, 120),
                _ => (1080, 1920),
            };
            json!([{"op": "capture_photo", "args": {"width": w, "height": h}}])
        },
    },
];

const QUERY_CLOSERS: &[&str] = &["", "please", "for me", "right now", "if you don't mind", "now", "real quick", "thanks"];

#[derive(Debug, Clone, Serialize)]
pub struct ToolQuery {
    pub text: String,
    pub skill: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToolExtSet {
    pub scale: usize,
    pub skills: Vec<SkillDescriptor>,
    pub queries: Vec<ToolQuery>,
}

fn snake(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect::<String>()
        .split('_')
        .filter(|p| !p.is_empty())
        .collect::<Vec<_>>()
        .join("_")
}

/// `scale` generated skills with one selection query each.
pub fn toolext_dataset(seed: u64, scale: usize) -> Result<ToolExtSet> {
    let mut rng = rng_for(seed, "toolext");
    let mut all: Vec<(usize, &str)> =
        TOOL_FAMILIES.iter().enumerate().flat_map(|(f, fam)| fam.objects.iter().map(move |o| (f, *o))).collect();
    if scale > all.len() {
        return Err(Error::InsufficientDiversity(format!("only {} tools available", all.len())));
    }
    all.shuffle(&mut rng);
    let mut pool = DiversityPool::new();
    let mut skills = Vec::with_capacity(scale);
    let mut queries = Vec::with_capacity(scale);
    for &(f, object) in &all[..scale] {
        let fam = &TOOL_FAMILIES[f];
        let verb = fam.descr.split_whitespace().next().unwrap_or("do").trim_end_matches('s').to_lowercase();
        let name = snake(&format!("{verb} {object}"));
        let skill: SkillDescriptor = serde_json::from_value(json!({
            "name": name,
            "description": fam.descr.replace("{}", object),
            "actions": (fam.op)(object),
        }))
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
        let text = draw(&mut pool, "tool query", || {
            let core = pick(&mut rng, fam.queries).replace("{}", object);
            let closer = *pick(&mut rng, QUERY_CLOSERS);
            let body = if closer.is_empty() { core } else { format!("{core} {closer}") };
            join_opener(pick(&mut rng, OPENERS), &body)
        })?;
        queries.push(ToolQuery { text, skill: name });
        skills.push(skill);
    }
    Ok(ToolExtSet { scale, skills, queries })
}

pub fn toolext_rules(set: &ToolExtSet) -> RuleTable {
    let mut t = RuleTable::default();
    for q in &set.queries {
        t.exact(SchemaId::PiaCommands, &q.text, json!([{"command": "INVOKE", "skill": q.skill}]));
    }
    t
}

// --------------------------------------------------------------- latency

pub const THREE_LITTLE_PIGS: &str = "Tell me the story of Three Little Pig";

/// Emotion-labelled story; the first four lines follow the worked example.
pub fn three_little_pigs_script() -> Value {
    script_json(&[
        ("Three little pigs left home to build their own houses.", EmotionLabel::Neutral),
        ("The first pig quickly built a house of straw.", EmotionLabel::Contempt),
        ("The second pig put up a house of sticks with little effort.", EmotionLabel::Contempt),
        ("The third pig worked diligently to lay strong bricks for a sturdy home.", EmotionLabel::Happiness),
        ("Then a hungry wolf came knocking at the straw house.", EmotionLabel::Fear),
        ("He huffed and puffed, but the brick house did not move at all!", EmotionLabel::Surprise),
        ("The three pigs lived safely together in the brick house.", EmotionLabel::Happiness),
    ])
}

pub const LATENCY_TASKS: &[(&str, &str)] = &[
    (THREE_LITTLE_PIGS, "Tell the story of the Three Little Pigs"),
    ("Tell me a story about a brave little rabbit", "Tell a story about a brave little rabbit"),
    ("Help me plan a picnic for saturday", "Plan a picnic"),
];

pub fn latency_rules() -> RuleTable {
    let mut t = RuleTable::default();
    for (text, main_task) in LATENCY_TASKS {
        t.exact(SchemaId::RouteDecision, *text, json!({"target": "SIA"}));
        t.exact(SchemaId::SiaAction, *text, json!({"action": "NEW", "main_task": main_task, "details": []}));
    }
    t.exact(SchemaId::Script, LATENCY_TASKS[0].1, three_little_pigs_script());
    t.exact(
        SchemaId::Script,
        LATENCY_TASKS[1].1,
        script_json(&[
            ("Once there was a little rabbit who was afraid of the dark.", EmotionLabel::Fear),
            ("One night she followed the fireflies into the woods.", EmotionLabel::Surprise),
            ("She found her way home and was never scared again.", EmotionLabel::Happiness),
        ]),
    );
    t.exact(
        SchemaId::Script,
        LATENCY_TASKS[2].1,
        script_json(&[
            ("A picnic sounds wonderful!", EmotionLabel::Happiness),
            ("Pack sandwiches, fruit and a blanket.", EmotionLabel::Neutral),
        ]),
    );
    t
}
