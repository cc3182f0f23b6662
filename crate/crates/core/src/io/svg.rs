// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write;

use crate::analysis::IrDropMap;

const CELL: usize = 10;
const LEGEND: usize = 24;

/// Blue at the smallest drop through to red at the largest.
fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    format!("#{r:02x}40{b:02x}")
}

/// Shortest decimal form at 0.001 mV resolution: 30 prints as `30`.
fn mv(x: f64) -> String {
    let s = format!("{x:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// SVG 1.1 image with one square per tile, row `j = 0` at the bottom,
/// and a legend giving the drop range.
pub fn emit_heatmap(map: &IrDropMap) -> String {
    let (lo, hi) = (map.min_mv(), map.max_mv);
    let span = hi - lo;
    let (w, h) = (map.nx * CELL, map.ny * CELL);
    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{}" viewBox="0 0 {w} {}">"#,
        h + LEGEND,
        h + LEGEND
    )
    .unwrap();
    for j in 0..map.ny {
        for i in 0..map.nx {
            let t = if span > 0.0 { (map.at(i, j) - lo) / span } else { 0.0 };
            writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="{}"/>"#,
                i * CELL,
                (map.ny - 1 - j) * CELL,
                color(t)
            )
            .unwrap();
        }
    }
    writeln!(
        s,
        r#"<text x="2" y="{}" font-family="sans-serif" font-size="12">{}–{} mV</text>"#,
        h + LEGEND - 7,
        mv(lo),
        mv(hi)
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_rect_per_tile() {
        let m = IrDropMap::from_drops(2, 2, vec![0.0, 10.0, 20.0, 30.0]);
        let svg = emit_heatmap(&m);
        assert_eq!(svg.matches("<rect").count(), 4);
        assert!(svg.contains(">0–30 mV<"));
        assert_eq!(svg, emit_heatmap(&m.clone()));
    }

    #[test]
    fn uniform_map_is_one_color() {
        let m = IrDropMap::from_drops(3, 3, vec![7.25; 9]);
        let svg = emit_heatmap(&m);
        let fills: std::collections::BTreeSet<_> = svg.split("fill=\"").skip(1).map(|s| &s[..7]).collect();
        assert_eq!(fills.len(), 1);
        assert!(svg.contains(">7.25–7.25 mV<"));
    }
}
