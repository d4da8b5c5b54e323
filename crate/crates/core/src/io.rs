//! File formats: profile tables (CSV or JSON) and population documents
//! (`[{"user_id": ..., "schedule": [...]}, ...]`).

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::constraints::{check_logical, check_physical};
use crate::metrics::Population;
use crate::profile::{UserProfile, PROFILE_FIELDS};
use crate::schedule::{discretize, normalize, DaySchedule, ScheduleError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot access {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
    #[error("duplicate user_id {0:?}")]
    DuplicateUser(String),
    #[error("user {user_id:?}: schedule is not hard-valid: {message}")]
    Invalid { user_id: String, message: String },
    #[error("user {user_id:?}: {source}")]
    Schedule {
        user_id: String,
        #[source]
        source: ScheduleError,
    },
}

fn read(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })
}

fn format_error(path: &Path, message: impl Into<String>) -> IoError {
    IoError::Format {
        path: path.display().to_string(),
        message: message.into(),
    }
}

/// A profile plus the id that joins it to schedules.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRecord {
    pub user_id: String,
    pub profile: UserProfile,
}

const ALIASES: &[(&str, &str)] = &[
    ("id", "user_id"),
    ("person_id", "user_id"),
    ("userid", "user_id"),
    ("age", "age_range"),
    ("age_group", "age_range"),
    ("sex", "gender"),
    ("race_ethnicity", "race"),
    ("education_level", "education"),
    ("employment", "employment_status"),
    ("worker_status", "employment_status"),
    ("schedule_type", "work_schedule"),
    ("job", "occupation"),
    ("activity", "primary_activity"),
    ("wfh", "work_from_home"),
    ("works_from_home", "work_from_home"),
    ("driver", "driver_on_travel_day"),
    ("distance", "distance_to_work_miles"),
    ("distance_to_work", "distance_to_work_miles"),
    ("commute_miles", "distance_to_work_miles"),
    ("state", "work_state"),
];

/// Lower-cases a header and maps spaces, dashes and aliases to field names.
pub fn canonical_field(header: &str) -> String {
    let key: String = header
        .trim()
        .to_ascii_lowercase()
        .chars()
        .map(|c| if c == ' ' || c == '-' { '_' } else { c })
        .collect();
    ALIASES
        .iter()
        .find(|(alias, _)| *alias == key)
        .map(|(_, name)| name.to_string())
        .unwrap_or(key)
}

fn value_text(value: &Value) -> String {
    match value {
        Value::String(s) => s.clone(),
        Value::Bool(b) => if *b { "Yes" } else { "No" }.to_string(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn record_from_pairs<'a>(
    row: usize,
    pairs: impl Iterator<Item = (&'a str, String)>,
) -> Result<ProfileRecord, String> {
    let mut profile = UserProfile::default();
    let mut user_id = None;
    let mut recognized = 0;
    for (key, value) in pairs {
        let name = canonical_field(key);
        if name == "user_id" {
            let v = value.trim();
            if !v.is_empty() {
                user_id = Some(v.to_string());
            }
            recognized += 1;
        } else if PROFILE_FIELDS.contains(&name.as_str()) {
            profile.set_field(&name, &value);
            recognized += 1;
        }
    }
    if recognized == 0 {
        return Err(format!("row {row} has no recognized profile fields"));
    }
    Ok(ProfileRecord {
        user_id: user_id.unwrap_or_else(|| row.to_string()),
        profile,
    })
}

fn check_unique<'a>(ids: impl Iterator<Item = &'a String>) -> Result<(), IoError> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(IoError::DuplicateUser(id.clone()));
        }
    }
    Ok(())
}

/// Parses profiles from CSV text (header row required).
pub fn parse_profiles_csv(text: &str) -> Result<Vec<ProfileRecord>, String> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    let mut out = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let pairs = headers.iter().zip(rec.iter()).map(|(h, v)| (h, v.to_string()));
        out.push(record_from_pairs(row, pairs)?);
    }
    Ok(out)
}

/// Parses profiles from a JSON array of objects.
pub fn parse_profiles_json(text: &str) -> Result<Vec<ProfileRecord>, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let Value::Array(rows) = value else {
        return Err("expected a JSON array of profile objects".into());
    };
    rows.iter()
        .enumerate()
        .map(|(row, v)| {
            let obj = v.as_object().ok_or_else(|| format!("row {row} is not an object"))?;
            record_from_pairs(row, obj.iter().map(|(k, v)| (k.as_str(), value_text(v))))
        })
        .collect()
}

/// Loads a profile table; `.csv` files are CSV, anything else JSON.
pub fn load_profiles(path: &Path) -> Result<Vec<ProfileRecord>, IoError> {
    let text = read(path)?;
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let records = if is_csv {
        parse_profiles_csv(&text)
    } else {
        parse_profiles_json(&text)
    }
    .map_err(|m| format_error(path, m))?;
    check_unique(records.iter().map(|r| &r.user_id))?;
    Ok(records)
}

/// One row of a population document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationEntry {
    pub user_id: String,
    pub schedule: DaySchedule,
}

/// Parses a population document; ids must be unique. Schedules are not
/// validated here.
pub fn parse_population(text: &str) -> Result<Vec<PopulationEntry>, String> {
    let entries: Vec<PopulationEntry> = serde_json::from_str(text).map_err(|e| e.to_string())?;
    check_unique(entries.iter().map(|e| &e.user_id)).map_err(|e| e.to_string())?;
    Ok(entries)
}

/// Accepts a population document or a single bare schedule (given id `"0"`).
pub fn parse_schedules(text: &str) -> Result<Vec<PopulationEntry>, String> {
    match parse_population(text) {
        Ok(entries) => Ok(entries),
        Err(population_err) => match DaySchedule::from_json(text) {
            Ok(schedule) => Ok(vec![PopulationEntry { user_id: "0".into(), schedule }]),
            Err(_) => Err(population_err),
        },
    }
}

/// Loads schedules without validating them; for audit and repair inputs.
pub fn load_schedules(path: &Path) -> Result<Vec<PopulationEntry>, IoError> {
    parse_schedules(&read(path)?).map_err(|m| format_error(path, m))
}

/// First entry whose schedule is not hard-valid, as an error.
pub fn validate_population(entries: &[PopulationEntry]) -> Result<(), IoError> {
    for e in entries {
        let problems = normalize(&e.schedule).map(|n| {
            let mut v = check_physical(&n);
            v.extend(check_logical(&n));
            v
        });
        let message = match problems {
            Ok(v) if v.is_empty() => continue,
            Ok(v) => v.iter().map(|x| x.description.as_str()).collect::<Vec<_>>().join("; "),
            Err(err) => err.to_string(),
        };
        return Err(IoError::Invalid { user_id: e.user_id.clone(), message });
    }
    Ok(())
}

/// Loads a population whose every schedule must be hard-valid.
pub fn load_population(path: &Path) -> Result<Vec<PopulationEntry>, IoError> {
    let entries = load_schedules(path)?;
    validate_population(&entries)?;
    Ok(entries)
}

pub fn save_population(path: &Path, entries: &[PopulationEntry]) -> Result<(), IoError> {
    std::fs::write(path, population_document(entries)).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })
}

/// Byte-stable document: entries in the given order, one segment per line.
pub fn population_document(entries: &[PopulationEntry]) -> String {
    if entries.is_empty() {
        return "[]\n".to_string();
    }
    let body: Vec<String> = entries
        .iter()
        .map(|e| {
            format!(
                "  {{\n    \"user_id\": {},\n    \"schedule\": {}\n  }}",
                Value::String(e.user_id.clone()),
                e.schedule.to_document_indented(4)
            )
        })
        .collect();
    format!("[\n{}\n]\n", body.join(",\n"))
}

/// Discretizes every schedule; the first failure names its user.
pub fn to_metric_population(entries: &[PopulationEntry]) -> Result<Population, IoError> {
    let mut ids = Vec::with_capacity(entries.len());
    let mut seqs = Vec::with_capacity(entries.len());
    for e in entries {
        let seq = discretize(&e.schedule).map_err(|source| IoError::Schedule {
            user_id: e.user_id.clone(),
            source,
        })?;
        ids.push(e.user_id.clone());
        seqs.push(seq);
    }
    check_unique(ids.iter())?;
    Ok(Population::new(ids, seqs).expect("ids checked unique"))
}
