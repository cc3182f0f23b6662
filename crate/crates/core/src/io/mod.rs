// SPDX-License-Identifier: Apache-2.0

//! Output formats: CSV tables, SVG heatmaps and run manifests.

mod manifest;
mod svg;
mod tables;

pub use manifest::RunManifest;
pub use svg::emit_heatmap;
pub use tables::{comparison_csv, ir_map_csv, number, sweep_csv, waveform_csv};

use std::path::Path;

use crate::error::Result;

/// Writes `contents` to `path`, creating parent directories.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}
