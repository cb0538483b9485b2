use super::ScenarioSpec;
use crate::error::Result;

/// Built-in scenarios by name.
pub const BUILTIN_SCENARIOS: &[(&str, &str)] = &[
    (
        "industrial-stable",
        include_str!("../../data/scenarios/industrial-stable.json"),
    ),
    (
        "scanner-sweep",
        include_str!("../../data/scenarios/scanner-sweep.json"),
    ),
    ("mixed", include_str!("../../data/scenarios/mixed.json")),
    (
        "sanitize-100",
        include_str!("../../data/scenarios/sanitize-100.json"),
    ),
    (
        "scale-100k",
        include_str!("../../data/scenarios/scale-100k.json"),
    ),
];

/// Parses a built-in scenario; `None` for an unknown name.
pub fn builtin(name: &str) -> Option<Result<ScenarioSpec>> {
    BUILTIN_SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| ScenarioSpec::from_json(text))
}
