//! Measured traces shipped with the crate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::io::{read_points, read_threshold_points, ThresholdPoint};
use crate::model::TracePoint;
use crate::sim::Scenario;

/// Bundled tables. Times are in ms; Table 5 counts are megabytes per interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dataset {
    /// Storm waveform, rise and decay.
    Table1,
    /// Rise of the storm waveform used for fitting.
    Table3,
    /// Normal broadcast operation.
    Table4,
    /// Storm control run: volume and threshold per interval.
    Table5,
}

impl Dataset {
    pub const ALL: [Dataset; 4] = [Self::Table1, Self::Table3, Self::Table4, Self::Table5];

    pub fn name(self) -> &'static str {
        match self {
            Self::Table1 => "table1",
            Self::Table3 => "table3",
            Self::Table4 => "table4",
            Self::Table5 => "table5",
        }
    }

    pub fn csv(self) -> &'static str {
        match self {
            Self::Table1 => include_str!("../data/table1.csv"),
            Self::Table3 => include_str!("../data/table3.csv"),
            Self::Table4 => include_str!("../data/table4.csv"),
            Self::Table5 => include_str!("../data/table5.csv"),
        }
    }

    pub fn points(self) -> Vec<TracePoint> {
        read_points(self.csv()).expect("bundled dataset parses")
    }

    /// Rows with their threshold column; only Table 5 has one.
    pub fn threshold_points(self) -> Option<Vec<ThresholdPoint>> {
        (self == Self::Table5).then(|| read_threshold_points(self.csv()).expect("bundled dataset parses"))
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dataset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown dataset {s:?}"))
    }
}

/// Scenario files shipped with the crate, by name.
pub const BUNDLED_SCENARIOS: [(&str, &str); 5] = [
    ("table4-normal", include_str!("../scenarios/table4-normal.json")),
    ("loop-storm", include_str!("../scenarios/loop-storm.json")),
    ("smurf", include_str!("../scenarios/smurf.json")),
    ("faulty-nic", include_str!("../scenarios/faulty-nic.json")),
    ("table5-control", include_str!("../scenarios/table5-control.json")),
];

pub fn bundled_scenario(name: &str) -> Option<Scenario> {
    BUNDLED_SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| Scenario::from_json(text).expect("bundled scenario is valid"))
}

/// The 0–3 ms hump of the normal operation table.
pub fn normal_hump() -> Vec<TracePoint> {
    Dataset::Table4.points().into_iter().filter(|p| p.t <= 3.0).collect()
}
