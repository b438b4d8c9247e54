//! Fixtures compiled into the library: the online-boutique cost table and
//! the stock scenarios built on it.
//!
//! Only the 25 RPS CPU values of image A are measured data. Every other knot,
//! all memory costs and the whole of images B, C and H are synthetic; the
//! manifest next to the CSV records how each was generated.

use crate::model::CostTable;
use crate::scenario::{parse_cost_table_str, Scenario};

pub const COST_TABLE_CSV: &str = include_str!("../fixtures/cost_tables/online_boutique.csv");
pub const COST_TABLE_MANIFEST: &str =
    include_str!("../fixtures/cost_tables/online_boutique.manifest.json");
/// Image A at 25 RPS, CPU only.
pub const EXCERPT_CSV: &str = include_str!("../fixtures/cost_tables/type_a_25rps.csv");

macro_rules! scenarios {
    ($($name:literal),* $(,)?) => {
        /// `(name, JSON)` of every stock scenario.
        pub const SCENARIOS: &[(&str, &str)] = &[
            $(($name, include_str!(concat!("../fixtures/scenarios/", $name, ".json")))),*
        ];
    };
}

scenarios!(
    "homogeneous-P1", "homogeneous-P2", "homogeneous-P3", "homogeneous-P4",
    "homogeneous-T1", "homogeneous-T2", "homogeneous-T3", "homogeneous-T4",
    "mixed-1B3C", "mixed-2B2C", "mixed-3B1C",
);

pub fn cost_table() -> CostTable {
    parse_cost_table_str(COST_TABLE_CSV).expect("bundled cost table is valid")
}

pub fn excerpt_table() -> CostTable {
    parse_cost_table_str(EXCERPT_CSV).expect("bundled excerpt is valid")
}

/// A stock scenario by name, e.g. `"homogeneous-P1"`.
pub fn scenario(name: &str) -> Option<Scenario> {
    SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, json)| Scenario::from_json(json).expect("bundled scenario is valid"))
}

pub fn scenarios() -> impl Iterator<Item = Scenario> {
    SCENARIOS
        .iter()
        .map(|(_, json)| Scenario::from_json(json).expect("bundled scenario is valid"))
}
