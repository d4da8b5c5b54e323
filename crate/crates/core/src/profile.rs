//! The 12-attribute socio-demographic profile that seeds generation.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// Sentinel for attributes the survey did not record.
pub const UNKNOWN: &str = "unknown";

/// Profile field names in prompt order.
pub const PROFILE_FIELDS: [&str; 12] = [
    "age_range",
    "gender",
    "race",
    "education",
    "employment_status",
    "work_schedule",
    "occupation",
    "primary_activity",
    "work_from_home",
    "driver_on_travel_day",
    "distance_to_work_miles",
    "work_state",
];

fn unknown() -> String {
    UNKNOWN.to_string()
}

/// Socio-demographic attributes of one person. Missing values hold `"unknown"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    #[serde(default = "unknown", deserialize_with = "lenient_text")]
    pub age_range: String,
    #[serde(default = "unknown", deserialize_with = "lenient_text")]
    pub gender: String,
    #[serde(default = "unknown", deserialize_with = "lenient_text")]
    pub race: String,
    #[serde(default = "unknown", deserialize_with = "lenient_text")]
    pub education: String,
    #[serde(default = "unknown", deserialize_with = "lenient_text")]
    pub employment_status: String,
    #[serde(default = "unknown", deserialize_with = "lenient_text")]
    pub work_schedule: String,
    #[serde(default = "unknown", deserialize_with = "lenient_text")]
    pub occupation: String,
    #[serde(default = "unknown", deserialize_with = "lenient_text")]
    pub primary_activity: String,
    #[serde(default = "unknown", deserialize_with = "lenient_text")]
    pub work_from_home: String,
    #[serde(default = "unknown", deserialize_with = "lenient_text")]
    pub driver_on_travel_day: String,
    /// Commute distance in miles; `None` when unrecorded.
    #[serde(
        default,
        serialize_with = "serialize_distance",
        deserialize_with = "lenient_distance"
    )]
    pub distance_to_work_miles: Option<f64>,
    #[serde(default = "unknown", deserialize_with = "lenient_text")]
    pub work_state: String,
}

impl Default for UserProfile {
    fn default() -> Self {
        Self {
            age_range: unknown(),
            gender: unknown(),
            race: unknown(),
            education: unknown(),
            employment_status: unknown(),
            work_schedule: unknown(),
            occupation: unknown(),
            primary_activity: unknown(),
            work_from_home: unknown(),
            driver_on_travel_day: unknown(),
            distance_to_work_miles: None,
            work_state: unknown(),
        }
    }
}

impl UserProfile {
    /// Text value of a field by its canonical name.
    pub fn field(&self, name: &str) -> Option<String> {
        let text = match name {
            "age_range" => &self.age_range,
            "gender" => &self.gender,
            "race" => &self.race,
            "education" => &self.education,
            "employment_status" => &self.employment_status,
            "work_schedule" => &self.work_schedule,
            "occupation" => &self.occupation,
            "primary_activity" => &self.primary_activity,
            "work_from_home" => &self.work_from_home,
            "driver_on_travel_day" => &self.driver_on_travel_day,
            "distance_to_work_miles" => return Some(self.distance_text()),
            "work_state" => &self.work_state,
            _ => return None,
        };
        Some(text.clone())
    }

    /// Sets a field from raw text; blank text becomes `"unknown"`.
    /// Returns false for unrecognized field names.
    pub fn set_field(&mut self, name: &str, value: &str) -> bool {
        let value = value.trim();
        let text = if value.is_empty() { unknown() } else { value.to_string() };
        let slot = match name {
            "age_range" => &mut self.age_range,
            "gender" => &mut self.gender,
            "race" => &mut self.race,
            "education" => &mut self.education,
            "employment_status" => &mut self.employment_status,
            "work_schedule" => &mut self.work_schedule,
            "occupation" => &mut self.occupation,
            "primary_activity" => &mut self.primary_activity,
            "work_from_home" => &mut self.work_from_home,
            "driver_on_travel_day" => &mut self.driver_on_travel_day,
            "distance_to_work_miles" => {
                self.distance_to_work_miles = parse_distance(&text);
                return true;
            }
            "work_state" => &mut self.work_state,
            _ => return false,
        };
        *slot = text;
        true
    }

    pub fn distance_text(&self) -> String {
        match self.distance_to_work_miles {
            Some(d) => format_number(d),
            None => unknown(),
        }
    }

    /// Pretty JSON document with keys in prompt order.
    pub fn to_document(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serializes")
    }
}

fn parse_distance(text: &str) -> Option<f64> {
    text.trim()
        .parse::<f64>()
        .ok()
        .filter(|d| d.is_finite() && *d >= 0.0)
}

fn format_number(value: f64) -> String {
    value.to_string()
}

fn serialize_distance<S: Serializer>(value: &Option<f64>, serializer: S) -> Result<S::Ok, S::Error> {
    match value {
        Some(d) => serializer.serialize_f64(*d),
        None => serializer.serialize_str(UNKNOWN),
    }
}

struct TextVisitor;

impl<'de> Visitor<'de> for TextVisitor {
    type Value = String;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a string, number, boolean or null")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<String, E> {
        let v = v.trim();
        Ok(if v.is_empty() { unknown() } else { v.to_string() })
    }

    fn visit_bool<E: de::Error>(self, v: bool) -> Result<String, E> {
        Ok(if v { "Yes" } else { "No" }.to_string())
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<String, E> {
        Ok(v.to_string())
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<String, E> {
        Ok(v.to_string())
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<String, E> {
        Ok(format_number(v))
    }

    fn visit_unit<E: de::Error>(self) -> Result<String, E> {
        Ok(unknown())
    }

    fn visit_none<E: de::Error>(self) -> Result<String, E> {
        Ok(unknown())
    }
}

fn lenient_text<'de, D: Deserializer<'de>>(deserializer: D) -> Result<String, D::Error> {
    deserializer.deserialize_any(TextVisitor)
}

fn lenient_distance<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Option<f64>, D::Error> {
    let text = deserializer.deserialize_any(TextVisitor)?;
    Ok(parse_distance(&text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_fields_become_unknown() {
        let p: UserProfile = serde_json::from_str(r#"{"gender": "Female"}"#).unwrap();
        assert_eq!(p.gender, "Female");
        assert_eq!(p.work_state, UNKNOWN);
        assert_eq!(p.distance_to_work_miles, None);
        assert_eq!(p.distance_text(), UNKNOWN);
    }

    #[test]
    fn lenient_values() {
        let p: UserProfile = serde_json::from_str(
            r#"{"distance_to_work_miles": "4.15", "work_state": 6, "driver_on_travel_day": true, "race": null}"#,
        )
        .unwrap();
        assert_eq!(p.distance_to_work_miles, Some(4.15));
        assert_eq!(p.work_state, "6");
        assert_eq!(p.driver_on_travel_day, "Yes");
        assert_eq!(p.race, UNKNOWN);
    }

    #[test]
    fn document_keeps_field_order_and_round_trips() {
        let mut p = UserProfile::default();
        p.distance_to_work_miles = Some(4.15);
        let doc = p.to_document();
        let keys: Vec<usize> = PROFILE_FIELDS.iter().map(|k| doc.find(&format!("\"{k}\"")).unwrap()).collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        let back: UserProfile = serde_json::from_str(&doc).unwrap();
        assert_eq!(back, p);
        let p = UserProfile::default();
        let back: UserProfile = serde_json::from_str(&p.to_document()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn set_field_by_name() {
        let mut p = UserProfile::default();
        for name in PROFILE_FIELDS {
            assert!(p.set_field(name, "3"));
            assert_eq!(p.field(name).unwrap(), "3");
        }
        assert!(!p.set_field("relationship", "mother"));
        p.set_field("distance_to_work_miles", "-2");
        assert_eq!(p.distance_to_work_miles, None);
    }
}
