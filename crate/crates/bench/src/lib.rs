//! Shared scenario fixtures for the benchmarks.

use hidec::scenario::{CompiledScenario, ScenarioConfig};

pub const TOY_TOML: &str = include_str!("../../../scenarios/toy.toml");
pub const OFFICE_TOML: &str = include_str!("../../../scenarios/office.toml");

pub fn compile(toml: &str) -> CompiledScenario {
    ScenarioConfig::from_str(toml)
        .expect("fixture parses")
        .compile()
        .expect("fixture compiles")
}
