//! Configurations bundled with the binary, one per acceptance check.

const PRESETS: [(&str, &str); 14] = [
    ("eos-identities", include_str!("../presets/eos-identities.json")),
    ("riccati-regimes", include_str!("../presets/riccati-regimes.json")),
    ("coeff-check", include_str!("../presets/coeff-check.json")),
    ("invariant-region", include_str!("../presets/invariant-region.json")),
    ("max-density", include_str!("../presets/max-density.json")),
    ("rarefactive", include_str!("../presets/rarefactive.json")),
    ("compressive", include_str!("../presets/compressive.json")),
    ("constant-a", include_str!("../presets/constant-a.json")),
    ("uniform-existence", include_str!("../presets/uniform-existence.json")),
    ("pressure-control", include_str!("../presets/pressure-control.json")),
    ("exclusion", include_str!("../presets/exclusion.json")),
    ("incompressibility", include_str!("../presets/incompressibility.json")),
    ("entropy", include_str!("../presets/entropy.json")),
    ("frame-consistency", include_str!("../presets/frame-consistency.json")),
];

/// Names of the bundled presets.
pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

/// JSON text of the preset `name`.
pub fn get(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn every_preset_parses() {
        for (name, text) in PRESETS {
            parse_config(text).unwrap_or_else(|e| panic!("preset {name}: {e}"));
        }
    }
}
