//! Reference schedules and profile from the documented profile-grounded
//! editing example: a full-time professional whose draft contains a
//! home/work overlap in the late afternoon.

use crate::profile::UserProfile;
use crate::schedule::ActivityType::*;
use crate::schedule::DaySchedule;

pub fn case_study_profile() -> UserProfile {
    UserProfile {
        gender: "Female".into(),
        employment_status: "Employed full-time".into(),
        occupation: "Professional, managerial, or technical".into(),
        primary_activity: "Working".into(),
        work_from_home: "No".into(),
        driver_on_travel_day: "Yes".into(),
        distance_to_work_miles: Some(4.15),
        ..UserProfile::default()
    }
}

/// Draft with Home 16:45-18:00 overlapping Work 17:45-19:00.
pub fn case_study_draft() -> DaySchedule {
    DaySchedule::from_minutes(&[
        (Home, 0, 465),
        (Work, 465, 1005),
        (Home, 1005, 1080),
        (Work, 1065, 1140),
        (Shopping, 1140, 1175),
        (Home, 1175, 1440),
    ])
    .expect("valid fixture")
}

pub fn case_study_edited() -> DaySchedule {
    DaySchedule::from_minutes(&[
        (Home, 0, 465),
        (Work, 465, 990),
        (Shopping, 990, 1040),
        (Work, 1040, 1190),
        (Home, 1190, 1440),
    ])
    .expect("valid fixture")
}

pub fn case_study_ground_truth() -> DaySchedule {
    DaySchedule::from_minutes(&[
        (Home, 0, 465),
        (Work, 465, 990),
        (Shopping, 990, 1050),
        (Service, 1050, 1065),
        (Work, 1065, 1230),
        (Home, 1230, 1440),
    ])
    .expect("valid fixture")
}
