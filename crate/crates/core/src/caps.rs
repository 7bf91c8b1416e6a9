use serde::Serialize;

/// Bounds on the exhaustive searches used as desk-scale oracles.
///
/// Outcome enumeration is capped by the number of feasible outcomes produced
/// rather than by the raw element count, so structured families such as
/// partition matroids with many alternatives stay enumerable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SizeCaps {
    /// Largest element count for brute-force single-agent optima
    /// (matching and packing constraints).
    pub brute_force_elements: usize,
    /// Largest agent count for coalition enumeration.
    pub verifier_agents: usize,
    /// Largest number of feasible outcomes an enumeration may produce.
    pub enumerated_outcomes: usize,
}

impl Default for SizeCaps {
    fn default() -> Self {
        SizeCaps {
            brute_force_elements: 20,
            verifier_agents: 12,
            enumerated_outcomes: 1 << 16,
        }
    }
}

pub const SIZE_CAPS_ENV: &str = "COREFAIR_SIZE_CAPS";

impl SizeCaps {
    /// Defaults overridden by `COREFAIR_SIZE_CAPS`, a comma-separated list of
    /// `key=value` pairs with keys `brute_force_elements`, `agents`, `outcomes`.
    /// Intended for tests; unknown keys are ignored.
    pub fn from_env() -> Self {
        match std::env::var(SIZE_CAPS_ENV) {
            Ok(spec) => Self::default().with_overrides(&spec),
            Err(_) => Self::default(),
        }
    }

    pub fn with_overrides(mut self, spec: &str) -> Self {
        for pair in spec.split(',') {
            let Some((key, value)) = pair.split_once('=') else {
                continue;
            };
            let Ok(value) = value.trim().parse::<usize>() else {
                continue;
            };
            match key.trim() {
                "brute_force_elements" => self.brute_force_elements = value,
                "agents" => self.verifier_agents = value,
                "outcomes" => self.enumerated_outcomes = value,
                _ => {}
            }
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse_known_keys() {
        let caps = SizeCaps::default().with_overrides("agents=14, outcomes=10,bogus=3,brute_force_elements=x");
        assert_eq!(caps.verifier_agents, 14);
        assert_eq!(caps.enumerated_outcomes, 10);
        assert_eq!(caps.brute_force_elements, 20);
    }
}
