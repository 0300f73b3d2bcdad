//! Built-in reference plant: a nuclear unit auxiliary system with grid
//! connection, main generator, startup and unit auxiliary transformers and
//! 4.16 kV / 600 V / 480 V / 208 V distribution.
//!
//! All electrical values are fixture data chosen so the shipped study
//! exercises every contingency type; they do not describe a real plant.

use super::{parse_network_file, parse_study_file, NetworkSpec, StudySpec};

pub const REFERENCE_NETWORK_JSON: &str = include_str!("../../fixtures/reference.nca-net.json");
pub const REFERENCE_STUDY_JSON: &str = include_str!("../../fixtures/reference.nca-study.json");

pub fn reference_network() -> (NetworkSpec, StudySpec) {
    let net = parse_network_file(REFERENCE_NETWORK_JSON.as_bytes()).expect("reference network parses");
    let study = parse_study_file(REFERENCE_STUDY_JSON.as_bytes()).expect("reference study parses");
    (net, study)
}
