// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};

const SNAPSHOT: &str = "snapshot:";

/// Record of one CLI run. The embedded config snapshot has every default
/// and flag override resolved, so it replays the run on its own.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub version: String,
    pub wall_clock_s: f64,
    pub snapshot: Option<ScenarioConfig>,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "command: {}", self.command).unwrap();
        writeln!(s, "version: {}", self.version).unwrap();
        writeln!(s, "wall_clock_s: {:.3}", self.wall_clock_s).unwrap();
        for i in &self.inputs {
            writeln!(s, "input: {i}").unwrap();
        }
        for o in &self.outputs {
            writeln!(s, "output: {o}").unwrap();
        }
        if let Some(c) = &self.snapshot {
            writeln!(s, "{SNAPSHOT}").unwrap();
            s.push_str(&c.to_json());
            s.push('\n');
        }
        s
    }

    /// The config embedded in manifest text.
    pub fn snapshot_from_text(text: &str) -> Result<ScenarioConfig> {
        let mut offset = 0;
        for (k, line) in text.split_inclusive('\n').enumerate() {
            offset += line.len();
            if line.trim_end() == SNAPSHOT {
                return ScenarioConfig::from_json(&text[offset..]).map_err(|e| Error::Parse {
                    line: k + 2,
                    message: e.to_string(),
                });
            }
        }
        Err(Error::Parse {
            line: text.lines().count(),
            message: "manifest has no config snapshot".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trips() {
        let c = ScenarioConfig::default().with_tiles(7, 9);
        let m = RunManifest {
            command: "dc".into(),
            inputs: vec!["a.json".into()],
            outputs: vec!["out/ir_map.csv".into(), "out/ir_map.svg".into()],
            version: "0.1.0".into(),
            wall_clock_s: 1.5,
            snapshot: Some(c.clone()),
        };
        let text = m.to_text();
        assert!(text.contains("output: out/ir_map.svg\n"));
        assert_eq!(RunManifest::snapshot_from_text(&text).unwrap(), c);
        assert!(RunManifest::snapshot_from_text("command: dc\n").is_err());
    }
}
