//! Shipped fractal definitions.

use crate::definition::FractalDefinition;
use crate::ifs::Similitude;

const GASKET2: &str = include_str!("../presets/gasket2.toml");
const GASKET3: &str = include_str!("../presets/gasket3.toml");
const SNOWFLAKE: &str = include_str!("../presets/snowflake.toml");

pub const NAMES: [&str; 3] = ["gasket2", "gasket3", "snowflake"];

pub fn source(name: &str) -> Option<&'static str> {
    match name {
        "gasket2" => Some(GASKET2),
        "gasket3" => Some(GASKET3),
        "snowflake" => Some(SNOWFLAKE),
        _ => None,
    }
}

pub fn definition(name: &str) -> Option<FractalDefinition> {
    source(name).map(|text| FractalDefinition::parse(text).expect("preset parses"))
}

fn maps(name: &str) -> Vec<Similitude> {
    definition(name)
        .and_then(|d| d.similitudes().ok())
        .expect("preset maps are valid")
}

/// Planar Sierpiński gasket, `L = 2`.
pub fn gasket2_maps() -> Vec<Similitude> {
    maps("gasket2")
}

/// Tetrahedral Sierpiński gasket in `R^3`, `L = 2`.
pub fn gasket3_maps() -> Vec<Similitude> {
    maps("gasket3")
}

/// Lindstrøm snowflake, `L = 3`, seven maps.
pub fn snowflake_maps() -> Vec<Similitude> {
    maps("snowflake")
}
