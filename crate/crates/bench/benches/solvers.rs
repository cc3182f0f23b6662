// SPDX-License-Identifier: Apache-2.0

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pdn_bench::{netlist, scenario, SIZES};
use pdn_core::analysis::run_transient;
use pdn_core::{assemble_netlist, dc_solve, Benchmark};

fn assembly(c: &mut Criterion) {
    let mut g = c.benchmark_group("assemble");
    for n in SIZES {
        let config = scenario(Benchmark::OnPackage4, n, 10.0);
        g.bench_with_input(BenchmarkId::from_parameter(n), &config, |b, config| {
            b.iter(|| assemble_netlist(config).unwrap())
        });
    }
    g.finish();
}

fn dc(c: &mut Criterion) {
    let mut g = c.benchmark_group("dc_solve");
    for which in [Benchmark::OnPackage1, Benchmark::ChipOnVrm3d] {
        for n in SIZES {
            let net = netlist(&scenario(which, n, 10.0));
            g.bench_with_input(BenchmarkId::new(which.name(), n), &net, |b, net| b.iter(|| dc_solve(net).unwrap()));
        }
    }
    g.finish();
}

fn transient(c: &mut Criterion) {
    let mut g = c.benchmark_group("transient_2ns");
    g.sample_size(10);
    for n in [20, 50] {
        let config = scenario(Benchmark::Backside, n, 2.0);
        let net = netlist(&config);
        g.bench_with_input(BenchmarkId::from_parameter(n), &(config, net), |b, (config, net)| {
            b.iter(|| run_transient(config, net, Some(Vec::new())).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, assembly, dc, transient);
criterion_main!(benches);
