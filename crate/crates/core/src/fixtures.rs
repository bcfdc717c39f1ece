//! Shipped fixture maps, embedded at compile time.

use crate::env::{EnvError, Environment};

const MAPS: &[(&str, &str)] = &[
    ("bugtrap", include_str!("../fixtures/bugtrap.map")),
    ("corridor", include_str!("../fixtures/corridor.map")),
    ("corridor10", include_str!("../fixtures/corridor10.map")),
    ("empty", include_str!("../fixtures/empty.map")),
    ("maze", include_str!("../fixtures/maze.map")),
    ("office", include_str!("../fixtures/office.map")),
];

/// Names of all embedded maps, sorted.
pub fn names() -> impl Iterator<Item = &'static str> {
    MAPS.iter().map(|(n, _)| *n)
}

/// Raw map document.
pub fn document(name: &str) -> Option<&'static str> {
    MAPS.iter().find(|(n, _)| *n == name).map(|(_, d)| *d)
}

/// Parsed fixture map, `None` for unknown names.
pub fn load(name: &str) -> Option<Environment> {
    document(name).map(|d| Environment::parse(d).expect("fixture maps are well-formed"))
}

/// Like [`load`] but as a `Result` for callers that propagate errors.
pub fn try_load(name: &str) -> Result<Environment, EnvError> {
    let doc = document(name).ok_or_else(|| EnvError::Parse { line: 0, msg: format!("unknown fixture `{name}`") })?;
    Environment::parse(doc)
}
