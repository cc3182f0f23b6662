// SPDX-License-Identifier: Apache-2.0

use super::run::evaluate;
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};

/// `(reference - x) / reference`.
pub fn improvement(reference: f64, x: f64) -> f64 {
    (reference - x) / reference
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    pub max_ir_drop_mv: f64,
    pub max_psn_mv: Option<f64>,
    /// Against the first row.
    pub ir_improvement: f64,
    pub psn_improvement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    /// Builds rows from `(label, max IR drop, max PSN)` triples; the first
    /// triple is the reference.
    pub fn from_metrics(metrics: Vec<(String, f64, Option<f64>)>) -> Self {
        let (ref_ir, ref_psn) = metrics.first().map_or((0.0, None), |m| (m.1, m.2));
        let rows = metrics
            .into_iter()
            .map(|(label, ir, psn)| ComparisonRow {
                label,
                max_ir_drop_mv: ir,
                max_psn_mv: psn,
                ir_improvement: improvement(ref_ir, ir),
                psn_improvement: ref_psn.zip(psn).map(|(r, x)| improvement(r, x)),
            })
            .collect();
        ComparisonReport { rows }
    }

    pub fn row(&self, label: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// Aligned plain-text table, values rounded for reading.
    pub fn to_table(&self) -> String {
        let header = ["config", "max_ir_drop_mv", "ir_improvement_%", "max_psn_mv", "psn_improvement_%"];
        let opt = |v: Option<f64>, scale: f64| v.map_or("-".to_string(), |v| format!("{:.3}", v * scale));
        let cells: Vec<[String; 5]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.label.clone(),
                    format!("{:.3}", r.max_ir_drop_mv),
                    format!("{:.2}", r.ir_improvement * 100.0),
                    opt(r.max_psn_mv, 1.0),
                    opt(r.psn_improvement, 100.0),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let mut out = String::new();
        let mut line = |cols: Vec<&str>| {
            let mut s = format!("{:<w$}", cols[0], w = widths[0]);
            for (c, w) in cols[1..].iter().zip(&widths[1..]) {
                s.push_str(&format!("  {c:>w$}"));
            }
            out.push_str(s.trim_end());
            out.push('\n');
        };
        line(header.to_vec());
        for row in &cells {
            line(row.iter().map(String::as_str).collect());
        }
        out
    }
}

/// Evaluates every config and reports it against the first.
pub fn compare_configurations(configs: &[ScenarioConfig], transient: bool) -> Result<ComparisonReport> {
    if configs.len() < 2 {
        return Err(Error::Incompatible("a comparison needs at least two configurations".into()));
    }
    let chip = &configs[0].chip;
    for c in &configs[1..] {
        if &c.chip != chip {
            return Err(Error::Incompatible(format!(
                "`{}` and `{}` describe different chips",
                configs[0].label, c.label
            )));
        }
    }
    let mut metrics = Vec::with_capacity(configs.len());
    for c in configs {
        let ev = evaluate(c, transient)?;
        metrics.push((c.label.clone(), ev.ir.max_mv, ev.psn.map(|p| p.max_psn_mv)));
    }
    Ok(ComparisonReport::from_metrics(metrics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Benchmark;

    #[test]
    fn improvement_definition() {
        assert_eq!(improvement(100.0, 75.55), (100.0 - 75.55) / 100.0);
        assert_eq!(improvement(3.0, 3.0), 0.0);
    }

    #[test]
    fn reference_row_is_zero() {
        let r = ComparisonReport::from_metrics(vec![
            ("a".into(), 4.0, Some(100.0)),
            ("b".into(), 3.0, Some(80.0)),
            ("c".into(), 5.0, None),
        ]);
        assert_eq!(r.rows[0].ir_improvement, 0.0);
        assert_eq!(r.rows[0].psn_improvement, Some(0.0));
        assert_eq!(r.rows[1].ir_improvement, 0.25);
        assert!((r.rows[1].psn_improvement.unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(r.rows[2].psn_improvement, None);
        let t = r.to_table();
        assert_eq!(t.lines().count(), 4);
        assert!(t.lines().nth(2).unwrap().starts_with("b "));
    }

    #[test]
    fn mismatched_chips_are_rejected() {
        let a = ScenarioConfig::benchmark(Benchmark::OnPackage4).with_tiles(4, 4);
        let b = ScenarioConfig::benchmark(Benchmark::Backside).with_tiles(5, 5);
        assert!(matches!(compare_configurations(&[a.clone(), b], false), Err(Error::Incompatible(_))));
        assert!(compare_configurations(&[a], false).is_err());
    }

    #[test]
    fn identical_configs_do_not_improve() {
        let a = ScenarioConfig::benchmark(Benchmark::OnPackage4).with_tiles(4, 4);
        let r = compare_configurations(&[a.clone(), a], false).unwrap();
        assert_eq!(r.rows[1].ir_improvement, 0.0);
    }
}
