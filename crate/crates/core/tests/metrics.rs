// SPDX-License-Identifier: Apache-2.0

mod support;

use std::f64::consts::PI;

use pdn_core::analysis::{extract_psn, extract_psn_with, ir_drop_map, IrDropMap, PsnOptions};
use pdn_core::config::{Integrator, PowerMapSpec};
use pdn_core::mna::DcSolution;
use pdn_core::netlist::{Netlist, Site, TileGrid, Tier};
use pdn_core::{assemble_netlist, dc_solve, Benchmark, Error, ScenarioConfig, TransientWaveform};
use proptest::prelude::*;
use support::dense_dc;

fn waveform(dt: f64, t_end: f64, shift: f64, f: impl Fn(f64) -> f64) -> TransientWaveform {
    let steps = (t_end / dt).round() as usize;
    let time: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    TransientWaveform {
        series: vec![time.iter().map(|t| f(*t)).collect()],
        time: time.iter().map(|t| t + shift).collect(),
        names: vec!["chip_center".into()],
        method: Integrator::Trapezoidal,
        dt,
        rise_end: shift,
        rise_time: 1e-9,
    }
}

#[test]
fn ir_map_from_tile_voltages() {
    let mut net = Netlist::new();
    let nodes = (0..4)
        .map(|k| net.add_node(Tier::Chip, Site::Grid(k % 2, k / 2), format!("t{k}")))
        .collect();
    net.chip_tiles = TileGrid { nx: 2, ny: 2, nodes };
    let dc = DcSolution {
        voltages: vec![0.0, 0.95, 0.97, 0.96, 0.98],
        currents: vec![],
        kcl_residual: 0.0,
    };
    let m = ir_drop_map(&dc, &net, &ScenarioConfig::default());
    assert!((m.max_mv - 50.0).abs() < 1e-9);
    assert!((m.mean_mv - 35.0).abs() < 1e-9);
    assert_eq!(m.argmax, (0, 0));

    let flat = DcSolution {
        voltages: vec![0.0, 1.0, 1.0, 1.0, 1.0],
        ..dc
    };
    let m = ir_drop_map(&flat, &net, &ScenarioConfig::default());
    assert_eq!((m.max_mv, m.mean_mv), (0.0, 0.0));
}

#[test]
fn hotspot_holds_the_worst_tile() {
    for b in [Benchmark::OnPackage1, Benchmark::ChipOnVrm3d] {
        let c = ScenarioConfig::benchmark(b).with_tiles(10, 10);
        let net = assemble_netlist(&c).unwrap();
        let v = dense_dc(&net).unwrap();
        let drops: Vec<f64> = net.chip_tiles.nodes.iter().map(|n| (1.0 - v[n.0]) * 1e3).collect();
        let oracle = IrDropMap::from_drops(10, 10, drops);
        let ours = ir_drop_map(&dc_solve(&net).unwrap(), &net, &c);
        assert_eq!(ours.argmax, oracle.argmax);
        let (i, j) = oracle.argmax;
        let (x, y) = ((i as f64 + 0.5) / 10.0, (j as f64 + 0.5) / 10.0);
        let PowerMapSpec::Hotspot { blocks, .. } = &c.power_map else { unreachable!() };
        assert!(
            blocks
                .iter()
                .any(|k| (x - k.center_x).abs() < k.width / 2.0 && (y - k.center_y).abs() < k.height / 2.0),
            "{b}: worst tile {:?} is outside every block",
            oracle.argmax
        );
    }
}

#[test]
fn benchmark_maps_respect_invariants() {
    for b in Benchmark::ALL {
        let c = ScenarioConfig::benchmark(b).with_tiles(12, 12);
        let net = assemble_netlist(&c).unwrap();
        let m = ir_drop_map(&dc_solve(&net).unwrap(), &net, &c);
        assert!(m.drops_mv.iter().all(|d| *d >= -1e-6));
        assert!(m.max_mv >= m.mean_mv);
    }
}

#[test]
fn constant_waveform_has_no_noise() {
    let w = waveform(1e-11, 20e-9, 0.0, |_| 1.0);
    let m = extract_psn(&w, &ScenarioConfig::default()).unwrap();
    assert_eq!(m.max_psn_mv, 0.0);
    assert_eq!(m.settling_mv, 0.0);
    assert!(m.first_droop.is_none());
}

#[test]
fn damped_cosine_first_droop_matches_closed_form() {
    // deficit 60 mV·e^(−t/τ)·cos(ωt); interior maxima where tan(ωt) = −1/(ωτ)
    let (tau, omega) = (20e-9, 2.0 * PI / 10e-9);
    let deficit = |t: f64| 0.06 * (-t / tau).exp() * (omega * t).cos();
    let t1 = (2.0 * PI - (1.0 / (omega * tau)).atan()) / omega;
    let depth = deficit(t1) * 1e3;

    let dt = 1e-12;
    let w = waveform(dt, 500e-9, 0.0, |t| 1.0 - deficit(t));
    let m = extract_psn(&w, &ScenarioConfig::default()).unwrap();
    let d = m.first_droop.expect("a droop");
    assert!((d.depth_mv - depth).abs() < 1e-3, "{} vs {depth}", d.depth_mv);
    assert!((d.time_s - t1).abs() <= dt, "{} vs {t1}", d.time_s);
    assert!((d.depth_mv - 36.5).abs() < 0.1);
    assert!(m.settling_mv.abs() < 1e-6);
    // the largest deficit is right after the start, not at the droop
    assert!(m.max_psn_mv > 59.9);
    assert!(d.depth_mv <= m.max_psn_mv);
}

#[test]
fn short_waveform_is_an_error() {
    let mut w = waveform(1e-11, 3e-9, 0.0, |_| 1.0);
    w.rise_end = 1e-9;
    assert!(matches!(
        extract_psn(&w, &ScenarioConfig::default()),
        Err(Error::WaveformTooShort(_))
    ));
}

fn ringing(amps: &[(f64, f64, f64)]) -> impl Fn(f64) -> f64 + '_ {
    move |t: f64| {
        1.0 - amps
            .iter()
            .map(|(a, tau_ns, period_ns)| a * (-t / (tau_ns * 1e-9)).exp() * (2.0 * PI * t / (period_ns * 1e-9)).sin())
            .sum::<f64>()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metrics_ignore_time_offset(
        amps in prop::collection::vec((0.001_f64..0.1, 1.0_f64..50.0, 1.0_f64..20.0), 1..4),
        shift in 0.0_f64..1e-6,
    ) {
        let f = ringing(&amps);
        let a = extract_psn_with(&waveform(1e-11, 60e-9, 0.0, &f), 1.0, &PsnOptions::default()).unwrap();
        let b = extract_psn_with(&waveform(1e-11, 60e-9, shift, &f), 1.0, &PsnOptions::default()).unwrap();
        prop_assert_eq!(a.max_psn_mv, b.max_psn_mv);
        prop_assert_eq!(a.settling_mv, b.settling_mv);
        prop_assert!((a.max_psn_time_s + shift - b.max_psn_time_s).abs() < 1e-15 + 1e-12 * shift);
        prop_assert_eq!(a.first_droop.map(|d| d.depth_mv), b.first_droop.map(|d| d.depth_mv));
    }

    #[test]
    fn droop_and_settling_never_exceed_max(
        amps in prop::collection::vec((0.001_f64..0.1, 1.0_f64..50.0, 1.0_f64..20.0), 1..4),
        offset in -0.01_f64..0.01,
    ) {
        let f = ringing(&amps);
        let w = waveform(1e-11, 60e-9, 0.0, |t| f(t) - offset);
        let m = extract_psn_with(&w, 1.0, &PsnOptions::default()).unwrap();
        prop_assert!(m.max_psn_mv >= m.settling_mv);
        if let Some(d) = m.first_droop {
            prop_assert!(d.depth_mv <= m.max_psn_mv);
        }
    }
}
