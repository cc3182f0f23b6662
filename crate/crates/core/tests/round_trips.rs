// SPDX-License-Identifier: Apache-2.0

use pdn_core::config::{Integrator, StepTarget};
use pdn_core::netlist::{parse_netlist, write_netlist};
use pdn_core::{assemble_netlist, dc_solve, Benchmark, Error, PowerMapKind, ScenarioConfig};
use proptest::prelude::*;

#[test]
fn netlist_dump_parses_back_identically() {
    for b in Benchmark::ALL {
        let net = assemble_netlist(&ScenarioConfig::benchmark(b).with_tiles(4, 4)).unwrap();
        let text = write_netlist(&net);
        let back = parse_netlist(&text).unwrap();
        assert_eq!(back, net, "{b}");
        assert_eq!(write_netlist(&back), text);
        assert_eq!(dc_solve(&back).unwrap().voltages, dc_solve(&net).unwrap().voltages);
    }
}

#[test]
fn garbled_netlist_names_the_line() {
    let net = assemble_netlist(&ScenarioConfig::benchmark(Benchmark::Backside).with_tiles(2, 2)).unwrap();
    let mut lines: Vec<String> = write_netlist(&net).lines().map(String::from).collect();
    lines[3] = "R 1 2 not-a-number chip.grid".into();
    match parse_netlist(&lines.join("\n")) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("expected a parse error, got {other:?}"),
    }
    assert!(parse_netlist("R 1 0 1.0 x").is_err());
}

#[test]
fn unknown_config_fields_are_rejected() {
    let json = ScenarioConfig::default().to_json().replacen('{', "{\"extra\": 1,", 1);
    assert!(ScenarioConfig::from_json(&json).is_err());
}

fn any_benchmark() -> impl Strategy<Value = Benchmark> {
    prop::sample::select(Benchmark::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_json_round_trips(
        b in any_benchmark(),
        uniform in any::<bool>(),
        scale in 1e-3_f64..1e3,
        nx in 1usize..80,
        ny in 1usize..80,
        dt in 0.01_f64..100.0,
        be in any::<bool>(),
        supply in any::<bool>(),
    ) {
        let kind = if uniform { PowerMapKind::Uniform } else { PowerMapKind::Hotspot };
        let mut c = ScenarioConfig::benchmark(b).with_power_map(kind).with_power_scale(scale).with_tiles(nx, ny);
        c.transient.dt_ps = dt;
        c.transient.method = if be { Integrator::BackwardEuler } else { Integrator::Trapezoidal };
        c.transient.step = if supply { StepTarget::Supply } else { StepTarget::Load };
        let text = c.to_json();
        let back = ScenarioConfig::from_json(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_json(), text);
    }
}
