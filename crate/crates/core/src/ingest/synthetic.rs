use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    AttributeDef, AttributeKind, AttributeSchema, AttributeValue, Dataset, EventOccurrence, Level,
    OccurrenceId, ProvenanceEntry, Sequence, SequenceId, TimeZoneSpec, DAY_OF_WEEK, WEEKDAYS,
};

/// Multiplies the duration of matching events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedEffect {
    /// `day_of_week`, `urgency` or `clinic`.
    pub attribute: String,
    pub value: String,
    pub duration_factor: f64,
    /// Restrict to one event type; all types when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_type: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n_sequences: usize,
    #[serde(default = "default_alphabet")]
    pub event_alphabet: Vec<String>,
    #[serde(default)]
    pub planted_effects: Vec<PlantedEffect>,
    pub seed: u64,
    /// Mean number of extra passes through the middle of the visit motif.
    #[serde(default = "default_extra_rounds")]
    pub mean_extra_rounds: f64,
    /// Probability that each middle event appears in a pass.
    #[serde(default = "default_include")]
    pub include_probability: f64,
}

fn default_alphabet() -> Vec<String> {
    ["arrival", "scan", "wait", "consult", "complete"].map(String::from).to_vec()
}

fn default_extra_rounds() -> f64 {
    0.25
}

fn default_include() -> f64 {
    0.9
}

impl SyntheticConfig {
    pub fn new(n_sequences: usize, seed: u64) -> Self {
        SyntheticConfig {
            n_sequences,
            event_alphabet: default_alphabet(),
            planted_effects: Vec::new(),
            seed,
            mean_extra_rounds: default_extra_rounds(),
            include_probability: default_include(),
        }
    }
}

// Monday 2024-01-01 00:00 UTC; visits span 52 whole weeks.
const EPOCH_START: i64 = 1_704_067_200;
const N_DAYS: i64 = 364;
const URGENCY: [(&str, f64); 3] = [("Low", 0.5), ("Medium", 0.35), ("High", 0.15)];
const CLINICS: [&str; 3] = ["A", "B", "C"];
const STAFF: usize = 6;
const DURATION_SIGMA: f64 = 0.5;

fn schema() -> AttributeSchema {
    AttributeSchema::new(vec![
        AttributeDef { unit: Some("years".into()), ..AttributeDef::new("age", AttributeKind::Numerical, Level::Sequence) },
        AttributeDef::new("urgency", AttributeKind::Categorical, Level::Sequence),
        AttributeDef::new("clinic", AttributeKind::Categorical, Level::Sequence),
        AttributeDef::new("staff", AttributeKind::Categorical, Level::Event),
    ])
    .expect("static schema is valid")
}

/// Mean duration in minutes for the event at `position` of the alphabet.
fn mean_minutes(position: usize, len: usize) -> f64 {
    if position == 0 {
        5.0
    } else if position + 1 == len {
        2.0
    } else {
        10.0 * position as f64
    }
}

/// Clinic-visit style sequences: the first alphabet symbol opens the visit,
/// the last closes it, and the symbols in between repeat in one or more
/// passes with random omissions.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<Dataset> {
    let alphabet = &config.event_alphabet;
    if alphabet.is_empty() {
        return Err(Error::Config("event alphabet is empty".into()));
    }
    let mut sorted = alphabet.clone();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != alphabet.len() || alphabet.iter().any(|a| a.trim().is_empty()) {
        return Err(Error::Config("event alphabet has blank or repeated symbols".into()));
    }
    if config.n_sequences == 0 {
        return Err(Error::EmptyDataset("n_sequences is 0".into()));
    }
    if !(config.mean_extra_rounds >= 0.0 && config.mean_extra_rounds.is_finite())
        || !(0.0..=1.0).contains(&config.include_probability)
    {
        return Err(Error::Config("round and inclusion parameters out of range".into()));
    }
    for e in &config.planted_effects {
        if !matches!(e.attribute.as_str(), DAY_OF_WEEK | "urgency" | "clinic") {
            return Err(Error::Config(format!("cannot plant an effect on `{}`", e.attribute)));
        }
        if !(e.duration_factor > 0.0 && e.duration_factor.is_finite()) {
            return Err(Error::Config("duration factor must be positive".into()));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = alphabet.len();
    let dists: Vec<LogNormal<f64>> = (0..n)
        .map(|i| {
            let mu = (mean_minutes(i, n) * 60.0).ln() - DURATION_SIGMA * DURATION_SIGMA / 2.0;
            LogNormal::new(mu, DURATION_SIGMA).expect("valid lognormal")
        })
        .collect();
    let extra_p = config.mean_extra_rounds / (1.0 + config.mean_extra_rounds);
    let width = config.n_sequences.to_string().len().max(4);
    let tz = TimeZoneSpec::UTC;

    let mut next_id = 0u64;
    let mut sequences = Vec::with_capacity(config.n_sequences);
    for s in 0..config.n_sequences {
        let sid = SequenceId(format!("S{s:0width$}"));
        let age = if rng.random::<f64>() < 0.03 {
            AttributeValue::Missing
        } else {
            AttributeValue::Number(rng.random_range(18..=90) as f64)
        };
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut urgency = URGENCY[URGENCY.len() - 1].0;
        for (label, p) in URGENCY {
            acc += p;
            if u < acc {
                urgency = label;
                break;
            }
        }
        let clinic = CLINICS[rng.random_range(0..CLINICS.len())];
        let attrs = BTreeMap::from([
            ("age".to_string(), age),
            ("urgency".to_string(), AttributeValue::Category(urgency.into())),
            ("clinic".to_string(), AttributeValue::Category(clinic.into())),
        ]);

        let mut positions = vec![0usize];
        if n >= 3 {
            let mut rounds = 1;
            while rng.random::<f64>() < extra_p {
                rounds += 1;
            }
            for _ in 0..rounds {
                for p in 1..n - 1 {
                    if rng.random::<f64>() < config.include_probability {
                        positions.push(p);
                    }
                }
            }
        }
        if n >= 2 {
            positions.push(n - 1);
        }

        let day = rng.random_range(0..N_DAYS);
        let minute = rng.random_range(7 * 60..17 * 60);
        let mut t = EPOCH_START + day * 86_400 + minute * 60;
        let weekday = WEEKDAYS[tz.weekday(t)];
        let mut events = Vec::with_capacity(positions.len());
        for p in positions {
            let ty = &alphabet[p];
            let mut secs = dists[p].sample(&mut rng);
            for e in &config.planted_effects {
                if e.event_type.as_ref().is_some_and(|x| x != ty) {
                    continue;
                }
                let hit = match e.attribute.as_str() {
                    DAY_OF_WEEK => weekday == e.value,
                    "urgency" => urgency == e.value,
                    _ => clinic == e.value,
                };
                if hit {
                    secs *= e.duration_factor;
                }
            }
            let dur = secs.round().max(0.0) as i64;
            let staff = format!("S{}", rng.random_range(1..=STAFF));
            events.push(EventOccurrence {
                id: OccurrenceId(next_id),
                sequence_id: sid.clone(),
                event_type: ty.clone(),
                start: t,
                end: t + dur,
                attrs: BTreeMap::from([("staff".to_string(), AttributeValue::Category(staff))]),
            });
            next_id += 1;
            t += dur;
        }
        sequences.push(Sequence { id: sid, events, attrs });
    }
    let provenance = vec![ProvenanceEntry {
        op: "synthetic".into(),
        params: serde_json::to_value(config)?,
        input_version: None,
        output_version: 0,
    }];
    Dataset::new(0, schema(), tz, sequences, provenance)
}
