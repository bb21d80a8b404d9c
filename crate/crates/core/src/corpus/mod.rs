//! Snapshot corpus: parsing, survival labeling, synthetic generation.

mod label;
mod parse;
mod records;
pub mod synth;

pub use label::{derive_labels, LabelReport, LabeledRestaurant, SurvivalLabel};
pub use parse::{parse_datetime, parse_snapshot, write_snapshot, KindStats, ParseReport};
pub use records::{
    filter_restaurants, BusinessRecord, CheckinRecord, IntegrityReport, PhotoRecord, ReviewRecord,
    Snapshot, RESTAURANT_CATEGORY,
};
