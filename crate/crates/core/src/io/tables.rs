// SPDX-License-Identifier: Apache-2.0

use crate::analysis::{ComparisonReport, IrDropMap, SweepResult};
use crate::mna::TransientWaveform;

/// Full-precision rendering used in every CSV: 17 significant digits.
pub fn number(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(number).unwrap_or_default()
}

fn table<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(row.into_iter().collect::<Vec<_>>()).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("all fields are utf-8")
}

pub fn waveform_csv(w: &TransientWaveform) -> String {
    let mut header = vec!["time_s"];
    header.extend(w.names.iter().map(String::as_str));
    table(
        &header,
        w.time.iter().enumerate().map(|(k, t)| {
            std::iter::once(number(*t))
                .chain(w.series.iter().map(move |s| number(s[k])))
                .collect::<Vec<_>>()
        }),
    )
}

pub fn ir_map_csv(map: &IrDropMap) -> String {
    table(
        &["i", "j", "drop_mv"],
        map.drops_mv
            .iter()
            .enumerate()
            .map(|(k, d)| vec![(k % map.nx).to_string(), (k / map.nx).to_string(), number(*d)]),
    )
}

/// Failed points keep their row with empty metric cells.
pub fn sweep_csv(result: &SweepResult) -> String {
    table(
        &["axis_value", "max_ir_drop_mv", "max_psn_mv", "config_hash"],
        result.records.iter().map(|r| {
            let (ir, psn) = match &r.outcome {
                Ok(m) => (Some(m.max_ir_drop_mv), m.max_psn_mv),
                Err(_) => (None, None),
            };
            vec![number(r.value), opt(ir), opt(psn), r.config_hash.clone()]
        }),
    )
}

pub fn comparison_csv(report: &ComparisonReport) -> String {
    table(
        &["config", "max_ir_drop_mv", "ir_improvement", "max_psn_mv", "psn_improvement"],
        report.rows.iter().map(|r| {
            vec![
                r.label.clone(),
                number(r.max_ir_drop_mv),
                number(r.ir_improvement),
                opt(r.max_psn_mv),
                opt(r.psn_improvement),
            ]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        assert_eq!(number(0.1), "1.0000000000000001e-1");
        assert_eq!(number(2.5), "2.5000000000000000e0");
        for x in [0.1, 1.0 / 3.0, 6.02e23, -7.5e-12] {
            assert_eq!(number(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn map_rows_are_x_fastest() {
        let m = IrDropMap::from_drops(2, 1, vec![1.0, 2.0]);
        let text = ir_map_csv(&m);
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "i,j,drop_mv");
        assert!(lines[2].starts_with("1,0,2.0"));
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn probe_names_with_commas_are_quoted() {
        let w = TransientWaveform {
            time: vec![0.0],
            names: vec!["chip[0,1]".into()],
            series: vec![vec![1.0]],
            method: crate::config::Integrator::Trapezoidal,
            dt: 1e-12,
            rise_end: 0.0,
            rise_time: 0.0,
        };
        assert_eq!(waveform_csv(&w).lines().next().unwrap(), "time_s,\"chip[0,1]\"");
    }
}
