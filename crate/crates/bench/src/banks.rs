//! Template banks the generators draw from.

use pilot_core::SensorId;

pub const OPENERS: &[&str] = &[
    "",
    "hey misty,",
    "hi misty,",
    "okay,",
    "so,",
    "hmm,",
    "listen,",
    "quick question,",
    "good morning,",
    "misty,",
    "alright,",
    "um,",
    "well,",
    "excuse me,",
    "you know what,",
];

pub fn sensor_phrases(sensor: SensorId) -> &'static [&'static str] {
    match sensor {
        SensorId::HeadTop => &["touch your head", "pat the top of your head", "rub your head"],
        SensorId::HeadFront => &["press your forehead", "tap your forehead"],
        SensorId::HeadBack => &["touch the back of your head", "pat the back of your head"],
        SensorId::HeadLeft => &["touch your left side", "tap the left side of your head"],
        SensorId::HeadRight => &["touch your right side", "tap the right side of your head"],
        SensorId::Chin => &["tap your chin", "scratch your chin", "touch your chin"],
        SensorId::BumperFrontLeft => &["bump your front left bumper", "press the front left bumper"],
        SensorId::BumperFrontRight => &["bump your front right bumper", "press the front right bumper"],
        SensorId::BumperRearLeft => &["bump your back left bumper", "press the rear left bumper"],
        SensorId::BumperRearRight => &["bump your back right bumper", "press the rear right bumper"],
    }
}

/// A bindable demo skill: name, description, phrasings, actions (JSON).
pub struct SkillTemplate {
    pub name: &'static str,
    pub description: &'static str,
    pub phrases: &'static [&'static str],
    pub actions: &'static str,
}

pub const SKILLS: &[SkillTemplate] = &[
    SkillTemplate {
        name: "take_photo",
        description: "Take a photo with the head camera.",
        phrases: &["take a photo", "snap a picture", "take a picture of me"],
        actions: r#"[{"op": "capture_photo", "args": {}}]"#,
    },
    SkillTemplate {
        name: "say_hi",
        description: "Say hi to whoever is touching the robot.",
        phrases: &["say hi", "greet me with a hello"],
        actions: r#"[{"op": "speak", "args": {"text": "Hi there!", "emotion": "Happiness", "rate": 1.05}}, {"op": "move_arms", "args": {"left": -40, "right": 0}}]"#,
    },
    SkillTemplate {
        name: "show_sadness",
        description: "Express sadness with face, lights and posture.",
        phrases: &["show sadness", "look a little sad"],
        actions: r#"[{"op": "motion_bundle", "args": {"emotion": "Sadness"}}]"#,
    },
    SkillTemplate {
        name: "cute_sound",
        description: "Play a short cute squeak.",
        phrases: &["make a cute sound", "play a cute squeak"],
        actions: r#"[{"op": "play_audio", "args": {"track": "cute_squeak.wav"}}]"#,
    },
    SkillTemplate {
        name: "play_workout_music",
        description: "Play an upbeat workout playlist.",
        phrases: &["play some good workout music", "put on energetic workout music"],
        actions: r#"[{"op": "play_audio", "args": {"track": "workout_mix.mp3"}}]"#,
    },
    SkillTemplate {
        name: "nod_head",
        description: "Nod the head up and down.",
        phrases: &["nod your head", "give me a nod"],
        actions: r#"[{"op": "move_head", "args": {"pitch": -15}}, {"op": "move_head", "args": {"pitch": 10}}]"#,
    },
    SkillTemplate {
        name: "wave_arms",
        description: "Wave both arms.",
        phrases: &["wave your arms", "wave at me"],
        actions: r#"[{"op": "move_arms", "args": {"left": -80, "right": -80}}, {"op": "move_arms", "args": {"left": 0, "right": 0}}]"#,
    },
    SkillTemplate {
        name: "greeting",
        description: "Give a warm spoken greeting with a smile.",
        phrases: &["give me a warm greeting", "welcome me"],
        actions: r#"[{"op": "speak", "args": {"text": "Hello! Nice to see you.", "emotion": "Happiness", "rate": 1.05}}, {"op": "display_emotion", "args": {"emotion": "Happiness"}}]"#,
    },
    SkillTemplate {
        name: "daily_memo_report",
        description: "Read out today's memo.",
        phrases: &["read my daily memo", "give me the daily memo report"],
        actions: r#"[{"op": "speak", "args": {"text": "Here is your daily memo."}}]"#,
    },
    SkillTemplate {
        name: "play_piano",
        description: "Play relaxing piano music.",
        phrases: &["play relaxing piano music", "put on some soft piano"],
        actions: r#"[{"op": "play_audio", "args": {"track": "relaxing_piano.mp3"}}]"#,
    },
    SkillTemplate {
        name: "show_happiness",
        description: "Express happiness with face, lights and posture.",
        phrases: &["look happy", "show me a happy face"],
        actions: r#"[{"op": "motion_bundle", "args": {"emotion": "Happiness"}}]"#,
    },
    SkillTemplate {
        name: "flash_lights",
        description: "Blink the chest light.",
        phrases: &["flash your lights", "blink your light"],
        actions: r#"[{"op": "led", "args": {"color": "cyan"}}, {"op": "led", "args": {"color": "white"}}]"#,
    },
    SkillTemplate {
        name: "dance",
        description: "Do a short dance to a beat.",
        phrases: &["do a little dance", "dance for me"],
        actions: r#"[{"op": "play_audio", "args": {"track": "dance_beat.mp3"}}, {"op": "move_arms", "args": {"left": -60, "right": 30}}, {"op": "move_head", "args": {"roll": 10}}]"#,
    },
    SkillTemplate {
        name: "look_surprised",
        description: "Act surprised.",
        phrases: &["act surprised", "look surprised"],
        actions: r#"[{"op": "motion_bundle", "args": {"emotion": "Surprise"}}]"#,
    },
];

pub const INVOKE_CONTEXTS: &[&str] = &[
    "I'm doing home exercise",
    "my friends just arrived",
    "I'm bored this afternoon",
    "we're celebrating tonight",
    "the kids are getting restless",
    "I just finished my chores",
    "it's a lazy sunday",
    "grandma is visiting",
];

pub const ACTIVITIES_ING: &[&str] = &[
    "cleaning the kitchen",
    "stretching on the floor",
    "setting up the party",
    "cooking dinner",
    "folding laundry",
    "painting the fence",
];

pub const STORY_SUBJECTS: &[&str] = &[
    "a brave little rabbit",
    "pirates searching for treasure",
    "a dragon who hated fire",
    "the moon and the stars",
    "a lost puppy in the city",
    "three clever foxes",
    "a robot learning to dance",
    "a sleepy old owl",
];

pub const PLAN_THINGS: &[&str] = &[
    "a picnic",
    "my weekly meals",
    "a weekend getaway",
    "a study routine",
    "a surprise dinner",
    "a garden makeover",
];

pub const WHEN: &[&str] = &["tomorrow", "this weekend", "next friday", "tonight", "next month", "saturday morning"];

pub const FEELINGS: &[&str] = &["lonely", "stressed", "a bit down", "anxious", "really excited", "tired"];

pub const BECAUSE: &[&str] = &[
    "after a long week",
    "because of work",
    "since my exams start soon",
    "about moving house",
    "for no clear reason",
    "after talking to my sister",
];

pub const TIP_TOPICS: &[&str] = &[
    "sleeping better",
    "saving money",
    "learning guitar",
    "keeping houseplants alive",
    "public speaking",
    "staying focused",
];

pub const CONCEPTS: &[&str] = &[
    "how rainbows form",
    "why the sky is blue",
    "how airplanes fly",
    "what black holes are",
    "how vaccines work",
    "why leaves change color",
];

pub const RELATIVES: &[&str] = &["grandma", "nephew", "aunt", "best friend", "little cousin", "neighbor"];

pub const WORRIES: &[&str] = &[
    "the argument with my roommate",
    "my job interview",
    "whether I chose the right school",
    "money for the holidays",
    "my dad's health",
];

pub const EVENTS: &[&str] = &["reunion", "holiday break", "company retreat", "wedding", "school fair"];

pub const OPTION_PAIRS: &[(&str, &str)] = &[
    ("the beach", "the mountains"),
    ("a movie night", "a board game evening"),
    ("cooking at home", "eating out"),
    ("a road trip", "a train ride"),
];
