//! Scenario files.
//!
//! ```json
//! {
//!   "scenario_id": "two-cubes",
//!   "support_half_extents": [0.5, 0.5],
//!   "blocks": [{"id": "b1", "width": 0.1, "depth": 0.1, "height": 0.1,
//!               "mass": 1.0, "color": "red", "center_x": 0.0, "center_y": 0.0}],
//!   "pending_blocks": [{"id": "b2", "width": 0.1, "depth": 0.1, "height": 0.1,
//!                       "mass": 1.0, "color": "blue"}],
//!   "noise": {"sigma_s": 0.02, "sigma_a": 0.02}
//! }
//! ```
//!
//! Lengths in meters, masses in kilograms. Unknown fields are rejected.
//! `noise` also accepts `"axes": "planar" | "x_only"` and
//! `"family": "gaussian" | "lattice5"`.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BlockSpec, NoiseModel, Offset, PlacedBlock, TowerState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub scenario_id: String,
    pub support_half_extents: Offset,
    pub blocks: Vec<PlacedBlock>,
    #[serde(default)]
    pub pending_blocks: Vec<BlockSpec>,
    pub noise: NoiseModel,
}

impl Scenario {
    pub fn from_json(s: &str) -> Result<Self> {
        let scenario: Scenario =
            serde_json::from_str(s).map_err(|e| Error::InvalidScenario(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidScenario(format!("cannot read {}: {e}", path.display()))
        })?;
        Scenario::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| Error::InvalidScenario(e.to_string());
        self.noise.validate().map_err(wrap)?;
        self.tower().validate().map_err(wrap)?;
        let mut ids: HashSet<&str> = self.blocks.iter().map(|b| b.spec.id.as_str()).collect();
        for spec in &self.pending_blocks {
            spec.validate().map_err(wrap)?;
            if !ids.insert(spec.id.as_str()) {
                return Err(Error::InvalidScenario(format!("duplicate block id `{}`", spec.id)));
            }
        }
        Ok(())
    }

    /// The tower as recorded in the file (the hidden true state when
    /// simulating, the belief when predicting).
    pub fn tower(&self) -> TowerState {
        TowerState::new(self.blocks.clone(), self.support_half_extents)
    }

    pub fn pending(&self, id: &str) -> Result<&BlockSpec> {
        self.pending_blocks
            .iter()
            .find(|b| b.id == id)
            .ok_or_else(|| Error::UnknownBlock(id.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_CUBES: &str = r#"{
        "scenario_id": "two-cubes",
        "support_half_extents": [0.5, 0.5],
        "blocks": [{"id": "b1", "width": 0.1, "depth": 0.1, "height": 0.1,
                    "mass": 1.0, "color": "red", "center_x": 0.0, "center_y": 0.0}],
        "pending_blocks": [{"id": "b2", "width": 0.1, "depth": 0.1, "height": 0.1,
                            "mass": 1.0, "color": "blue"}],
        "noise": {"sigma_s": 0.02, "sigma_a": 0.02}
    }"#;

    #[test]
    fn parses_the_documented_format() {
        let s = Scenario::from_json(TWO_CUBES).unwrap();
        assert_eq!(s.tower().len(), 1);
        assert_eq!(s.pending("b2").unwrap().color, "blue");
        assert!(matches!(s.pending("b9"), Err(Error::UnknownBlock(_))));
        let again = Scenario::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn rejects_unknown_fields() {
        let bad = TWO_CUBES.replace("\"scenario_id\"", "\"friction\": 0.4, \"scenario_id\"");
        assert!(matches!(Scenario::from_json(&bad), Err(Error::InvalidScenario(_))));
        let bad_block = TWO_CUBES.replace("\"color\": \"red\"", "\"color\": \"red\", \"rot\": 1");
        assert!(Scenario::from_json(&bad_block).is_err());
    }

    #[test]
    fn rejects_invalid_content() {
        let neg = TWO_CUBES.replace("\"sigma_s\": 0.02", "\"sigma_s\": -1");
        assert!(Scenario::from_json(&neg).is_err());
        let dup = TWO_CUBES.replace("\"id\": \"b2\"", "\"id\": \"b1\"");
        assert!(Scenario::from_json(&dup).is_err());
        let off_table = TWO_CUBES.replace("\"center_x\": 0.0", "\"center_x\": 0.6");
        assert!(Scenario::from_json(&off_table).is_err());
    }
}
