//! Family files shipped with the crate.

use crate::chainfam::{parse_family_file, ChainFamily, FamilyError};

pub const L1_SOURCE: &str = include_str!("../fixtures/l1.fam");
pub const L2_SOURCE: &str = include_str!("../fixtures/l2.fam");
pub const DEMO6_SOURCE: &str = include_str!("../fixtures/demo6.fam");

/// Source text of a builtin by name (`l1`, `l2`, `demo6`).
pub fn source(name: &str) -> Option<&'static str> {
    match name {
        "l1" => Some(L1_SOURCE),
        "l2" => Some(L2_SOURCE),
        "demo6" => Some(DEMO6_SOURCE),
        _ => None,
    }
}

pub fn load(name: &str) -> Option<Result<Vec<ChainFamily>, FamilyError>> {
    source(name).map(parse_family_file)
}

pub fn l1() -> Vec<ChainFamily> {
    parse_family_file(L1_SOURCE).expect("builtin l1 parses")
}

pub fn l2() -> Vec<ChainFamily> {
    parse_family_file(L2_SOURCE).expect("builtin l2 parses")
}

pub fn demo6() -> Vec<ChainFamily> {
    parse_family_file(DEMO6_SOURCE).expect("builtin demo6 parses")
}
