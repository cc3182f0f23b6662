// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pdn_core::analysis::{
    self, calibrate, compare_configurations, extract_psn, ir_drop_map, run_sweep, CalibrationGrid,
    CalibrationOptions, CalibrationTargets, SweepAxis, SweepOptions,
};
use pdn_core::config::{validate_config, Integrator, StepTarget};
use pdn_core::io::{self, RunManifest};
use pdn_core::mna::ENVELOPE;
use pdn_core::netlist::write_netlist;
use pdn_core::{assemble_netlist, dc_solve, Benchmark, Error, PowerMapKind, ScenarioConfig};

const EXIT_VALIDATION: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "pdnsim", version, about = "Power delivery network IR drop and supply noise simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the default scenario as JSON.
    DefaultConfig {
        #[arg(long, default_value = "chip_on_vrm_3d")]
        benchmark: Benchmark,
        #[arg(long)]
        power_map: Option<PowerMapKind>,
    },
    /// Check a scenario file and report every violation.
    Validate(Scenario),
    /// Write the assembled netlist as text.
    Netlist(Scenario),
    /// DC operating point: IR drop map as CSV and SVG.
    Dc(Scenario),
    /// Transient step response of the worst tile and the chip centre.
    Tran(Scenario),
    /// Re-run one scenario across values of a single parameter.
    Sweep {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long)]
        axis: SweepAxis,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Skip the transient runs and report only IR drop.
        #[arg(long)]
        dc_only: bool,
    },
    /// Compare scenarios against the first one.
    Compare {
        #[command(flatten)]
        scenario: Scenario,
        /// Extra scenario files; with none, the benchmarks are built from --config.
        #[arg(long = "with")]
        others: Vec<PathBuf>,
        /// Benchmarks to compare, in order. Defaults to all five.
        #[arg(long = "benchmark", value_delimiter = ',')]
        benchmarks: Vec<Benchmark>,
        #[arg(long)]
        dc_only: bool,
    },
    /// Grid search of the regulator and package parasitics.
    Calibrate {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long, value_delimiter = ',')]
        vrm_r_mohm: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        vrm_l_nh: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        package_l_ph: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        board_l_nh: Vec<f64>,
        /// Tiles per side during the search.
        #[arg(long, default_value_t = 20)]
        search_tiles: usize,
        /// Transient length during the search, ns.
        #[arg(long, default_value_t = 20.0)]
        search_t_end: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Trap,
    Be,
}

#[derive(Clone, Copy, ValueEnum)]
enum Step {
    Load,
    Supply,
}

/// Scenario selection and overrides shared by every command.
#[derive(Args)]
struct Scenario {
    /// Scenario JSON, or a run manifest to replay. Defaults to the built-in 3-D benchmark.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "pdnsim-out")]
    out_dir: PathBuf,
    /// Time step, ps.
    #[arg(long)]
    dt: Option<f64>,
    /// End time, ns.
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    step: Option<Step>,
    #[arg(long)]
    power_map: Option<PowerMapKind>,
    /// Tiles per side.
    #[arg(long)]
    tiles: Option<usize>,
    /// Accepted for compatibility; every solver here is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Invalid(_) | Error::ZeroPowerMap(_) | Error::Parse { .. } | Error::Json(_) | Error::Incompatible(_) => {
                EXIT_VALIDATION
            }
            Error::Netlist(_)
            | Error::Floating(_)
            | Error::Singular(_)
            | Error::Diverged { .. }
            | Error::WaveformTooShort(_) => EXIT_SOLVER,
            Error::Io(_) => EXIT_IO,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn load_config(path: &Path) -> Result<ScenarioConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    })?;
    let parsed = if text.trim_start().starts_with('{') {
        ScenarioConfig::from_json(&text)
    } else {
        RunManifest::snapshot_from_text(&text)
    };
    parsed.map_err(|e| Failure {
        code: EXIT_VALIDATION,
        message: format!("{}: {e}", path.display()),
    })
}

impl Scenario {
    fn inputs(&self) -> Vec<String> {
        self.config.iter().map(|p| p.display().to_string()).collect()
    }

    fn apply_overrides(&self, mut c: ScenarioConfig) -> ScenarioConfig {
        if let Some(kind) = self.power_map {
            c = c.with_power_map(kind);
        }
        if let Some(n) = self.tiles {
            c = c.with_tiles(n, n);
        }
        if let Some(dt) = self.dt {
            c.transient.dt_ps = dt;
        }
        if let Some(t) = self.t_end {
            c.transient.t_end_ns = t;
        }
        if let Some(m) = self.method {
            c.transient.method = match m {
                Method::Trap => Integrator::Trapezoidal,
                Method::Be => Integrator::BackwardEuler,
            };
        }
        if let Some(s) = self.step {
            c.transient.step = match s {
                Step::Load => StepTarget::Load,
                Step::Supply => StepTarget::Supply,
            };
        }
        c
    }

    fn load_unchecked(&self) -> Result<ScenarioConfig, Failure> {
        let base = match &self.config {
            Some(p) => load_config(p)?,
            None => ScenarioConfig::default(),
        };
        Ok(self.apply_overrides(base))
    }

    fn load(&self) -> Result<ScenarioConfig, Failure> {
        Ok(validate_config(&self.load_unchecked()?)?)
    }
}

/// Collects outputs and writes the manifest last.
struct Run {
    command: &'static str,
    out_dir: PathBuf,
    inputs: Vec<String>,
    outputs: Vec<String>,
    started: Instant,
}

impl Run {
    fn new(command: &'static str, scenario: &Scenario) -> Self {
        Run {
            command,
            out_dir: scenario.out_dir.clone(),
            inputs: scenario.inputs(),
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    fn write(&mut self, name: &str, contents: &str) -> Outcome {
        let path = self.out_dir.join(name);
        io::write_file(&path, contents).map_err(|e| Failure {
            code: EXIT_IO,
            message: format!("{}: {e}", path.display()),
        })?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    fn finish(mut self, snapshot: Option<ScenarioConfig>) -> Outcome {
        let name = format!("{}.manifest.txt", self.command);
        self.outputs.push(self.out_dir.join(&name).display().to_string());
        let manifest = RunManifest {
            command: self.command.to_string(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_s: self.started.elapsed().as_secs_f64(),
            snapshot,
        };
        let path = self.out_dir.join(&name);
        io::write_file(&path, &manifest.to_text()).map_err(|e| Failure {
            code: EXIT_IO,
            message: format!("{}: {e}", path.display()),
        })?;
        eprintln!("wrote {}", self.outputs.join(", "));
        Ok(())
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::DefaultConfig { benchmark, power_map } => {
            let mut c = ScenarioConfig::benchmark(benchmark);
            if let Some(kind) = power_map {
                c = c.with_power_map(kind);
            }
            println!("{}", c.to_json());
            Ok(())
        }
        Command::Validate(s) => {
            let c = s.load_unchecked()?;
            validate_config(&c)?;
            println!("{}: ok", c.label);
            Ok(())
        }
        Command::Netlist(s) => {
            let mut run = Run::new("netlist", &s);
            let c = s.load()?;
            let netlist = assemble_netlist(&c)?;
            run.write("netlist.txt", &write_netlist(&netlist))?;
            println!("{} nodes, {} elements", netlist.node_count(), netlist.elements.len());
            run.finish(Some(c))
        }
        Command::Dc(s) => {
            let mut run = Run::new("dc", &s);
            let c = s.load()?;
            let netlist = assemble_netlist(&c)?;
            let dc = dc_solve(&netlist)?;
            let map = ir_drop_map(&dc, &netlist, &c);
            run.write("ir_map.csv", &io::ir_map_csv(&map))?;
            run.write("ir_map.svg", &io::emit_heatmap(&map))?;
            println!(
                "max IR drop {:.4} mV at tile {:?}, mean {:.4} mV",
                map.max_mv, map.argmax, map.mean_mv
            );
            run.finish(Some(c))
        }
        Command::Tran(s) => {
            let mut run = Run::new("tran", &s);
            let c = s.load()?;
            let netlist = assemble_netlist(&c)?;
            let w = analysis::run_transient(&c, &netlist, Some(vec!["chip_center".to_string()]))?;
            let psn = extract_psn(&w, &c)?;
            run.write("waveform.csv", &io::waveform_csv(&w))?;
            print!(
                "max PSN {:.4} mV at {:.4} ns ({}), settled at {:.4} mV",
                psn.max_psn_mv,
                psn.max_psn_time_s * 1e9,
                ENVELOPE,
                psn.settling_mv
            );
            match psn.first_droop {
                Some(d) => println!(", first droop {:.4} mV at {:.4} ns", d.depth_mv, d.time_s * 1e9),
                None => println!(", no droop"),
            }
            run.finish(Some(c))
        }
        Command::Sweep {
            scenario,
            axis,
            values,
            dc_only,
        } => {
            let mut run = Run::new("sweep", &scenario);
            let c = scenario.load()?;
            let options = SweepOptions {
                transient: !dc_only,
                ..SweepOptions::default()
            };
            let result = run_sweep(&c, axis, &values, &options);
            run.write("sweep.csv", &io::sweep_csv(&result))?;
            for (v, e) in result.failures() {
                eprintln!("{axis} = {v}: {e}");
            }
            println!("{} points, {} failed", result.records.len(), result.failures().len());
            run.finish(Some(c))?;
            if result.failures().is_empty() {
                Ok(())
            } else {
                Err(Failure {
                    code: EXIT_SOLVER,
                    message: "some sweep points failed".into(),
                })
            }
        }
        Command::Compare {
            scenario,
            others,
            benchmarks,
            dc_only,
        } => {
            let mut run = Run::new("compare", &scenario);
            let base = scenario.load()?;
            let configs = if others.is_empty() {
                let list = if benchmarks.is_empty() { Benchmark::ALL.to_vec() } else { benchmarks };
                list.iter().map(|b| b.apply(&base)).collect()
            } else {
                if !benchmarks.is_empty() {
                    return Err(Failure {
                        code: EXIT_USAGE,
                        message: "--with and --benchmark cannot be combined".into(),
                    });
                }
                let mut v = vec![base];
                for p in &others {
                    v.push(validate_config(&scenario.apply_overrides(load_config(p)?))?);
                }
                v
            };
            let report = compare_configurations(&configs, !dc_only)?;
            run.inputs.extend(others.iter().map(|p| p.display().to_string()));
            run.write("comparison.csv", &io::comparison_csv(&report))?;
            run.write("comparison.txt", &report.to_table())?;
            print!("{}", report.to_table());
            run.finish(Some(configs[0].clone()))
        }
        Command::Calibrate {
            scenario,
            vrm_r_mohm,
            vrm_l_nh,
            package_l_ph,
            board_l_nh,
            search_tiles,
            search_t_end,
        } => {
            let mut run = Run::new("calibrate", &scenario);
            let base = scenario.load()?;
            let spread = CalibrationGrid::spread(&base);
            let pick = |given: Vec<f64>, default: Vec<f64>| if given.is_empty() { default } else { given };
            let grid = CalibrationGrid {
                vrm_resistance_mohm: pick(vrm_r_mohm, spread.vrm_resistance_mohm),
                vrm_inductance_nh: pick(vrm_l_nh, spread.vrm_inductance_nh),
                package_segment_inductance_ph: pick(package_l_ph, spread.package_segment_inductance_ph),
                board_inductance_nh: pick(board_l_nh, spread.board_inductance_nh),
            };
            let options = CalibrationOptions {
                tiles: search_tiles,
                t_end_ns: search_t_end,
            };
            let result = calibrate(&base, &grid, &CalibrationTargets::default(), &options)?;
            let mut csv = String::from("vrm_r_mohm,vrm_l_nh,package_l_ph,board_l_nh,objective");
            for b in Benchmark::ALL {
                csv.push_str(&format!(",{b}_ir_mv,{b}_psn_mv"));
            }
            csv.push('\n');
            for p in &result.points {
                let k = p.knobs;
                let mut row = [
                    k.vrm_resistance_mohm,
                    k.vrm_inductance_nh,
                    k.package_segment_inductance_ph,
                    k.board_inductance_nh,
                    p.objective,
                ]
                .map(io::number)
                .join(",");
                for m in &p.metrics {
                    row.push_str(&format!(",{},{}", io::number(m.max_ir_drop_mv), io::number(m.max_psn_mv)));
                }
                csv.push_str(&row);
                csv.push('\n');
            }
            let best = result.best();
            let calibrated = best.knobs.apply(&base);
            run.write("calibration.csv", &csv)?;
            run.write("calibrated.json", &calibrated.to_json())?;
            println!("best of {} points, objective {:.4}: {:?}", result.points.len(), best.objective, best.knobs);
            for m in &best.metrics {
                println!(
                    "  {:16} IR {:8.4} mV  PSN {:8.4} mV",
                    m.benchmark.name(),
                    m.max_ir_drop_mv,
                    m.max_psn_mv
                );
            }
            run.finish(Some(calibrated))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
