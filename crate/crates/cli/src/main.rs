//! Command line front end for the hidec synthesis toolkit.
//!
//! Exit codes distinguish the failing stage: 2 configuration, 3 I/O,
//! 10/11/12 layers 1-3, 13 simulation.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hidec::export::{write_controller_json, write_svg, write_trajectory_csv};
use hidec::ltl::{ltl_to_buchi, parse_ltl};
use hidec::pipeline::{run_pipeline, SynthesisBundle};
use hidec::scenario::{CompiledScenario, ScenarioConfig};
use hidec::simulate::{simulate, DisturbancePolicy};
use hidec::{over_approximate, IntervalBox, PipelineError};

#[derive(Parser)]
#[command(name = "hidec", version, about = "Hierarchical LTL controller synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an LTL formula and print its tree.
    ParseLtl {
        /// Formula text, e.g. "([]<> a) && (<> b)".
        formula: String,
        /// Comma-separated atom names; inferred from the formula if omitted.
        #[arg(long, value_delimiter = ',')]
        atoms: Vec<String>,
        /// Also print the translated Buchi automaton.
        #[arg(long)]
        automaton: bool,
    },
    /// Run layers 1 and 2: accepting path and discrete plans.
    Plan {
        scenario: PathBuf,
    },
    /// Over-approximate one reachable set for the scenario's system.
    Reach {
        scenario: PathBuf,
        /// Initial box, one lo:hi pair per state dimension, e.g. "0:1,2:3,0:0.1".
        #[arg(long = "box")]
        state_box: String,
        /// Constant control value, comma separated.
        #[arg(long, value_delimiter = ',')]
        input: Vec<f64>,
        /// Horizon in seconds; the scenario's sampling period if omitted.
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Run the full three-layer pipeline and export the controllers.
    Synthesize {
        scenario: PathBuf,
        #[command(flatten)]
        out: OutDir,
    },
    /// Synthesize, then run the closed loop and export the trajectory.
    Simulate {
        scenario: PathBuf,
        /// Initial state, comma separated; the initial cell's center if omitted.
        #[arg(long, value_delimiter = ',')]
        z0: Option<Vec<f64>>,
        /// Suffix repetitions; the scenario's setting if omitted.
        #[arg(long)]
        suffix_iterations: Option<usize>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Export a single artifact (csv, json, or svg) for a scenario.
    Export {
        scenario: PathBuf,
        /// One of: csv, json, svg.
        #[arg(long)]
        format: String,
        /// Output file (csv/svg) or directory (json, one file per plan).
        #[arg(long)]
        out: PathBuf,
        /// Initial state for the csv trajectory.
        #[arg(long, value_delimiter = ',')]
        z0: Option<Vec<f64>>,
    },
}

#[derive(Args)]
struct OutDir {
    /// Output directory for the exported artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn config_err(msg: impl Into<String>) -> PipelineError {
    PipelineError::Config(msg.into())
}

fn load(path: &Path) -> Result<CompiledScenario, PipelineError> {
    ScenarioConfig::from_path(path)?.compile()
}

/// Bare identifiers in the formula text; fallback when --atoms is omitted.
fn infer_atoms(formula: &str) -> BTreeSet<String> {
    const KEYWORDS: &[&str] = &["U", "R", "X", "F", "G", "true", "false"];
    let mut atoms = BTreeSet::new();
    let mut word = String::new();
    for c in formula.chars().chain(std::iter::once(' ')) {
        if c.is_alphanumeric() || c == '_' {
            word.push(c);
        } else if !word.is_empty() {
            if !KEYWORDS.contains(&word.as_str()) && !word.starts_with(|c: char| c.is_numeric()) {
                atoms.insert(word.clone());
            }
            word.clear();
        }
    }
    atoms
}

fn parse_state_box(text: &str, dim: usize) -> Result<IntervalBox, PipelineError> {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for part in text.split(',') {
        let (a, b) = part
            .split_once(':')
            .ok_or_else(|| config_err(format!("box component `{part}` is not lo:hi")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| config_err(format!("`{s}` is not a number")))
        };
        lo.push(parse(a)?);
        hi.push(parse(b)?);
    }
    if lo.len() != dim {
        return Err(config_err(format!(
            "box has {} dimensions, the system expects {dim}",
            lo.len()
        )));
    }
    IntervalBox::new(lo, hi).map_err(|e| config_err(format!("invalid box: {e}")))
}

/// Center of the initial region's cell, lifted with zeros for state
/// dimensions beyond the workspace (the unicycle's heading).
fn default_z0(sc: &CompiledScenario) -> Vec<f64> {
    let cell = sc
        .workspace
        .roi_cell(&sc.config.formula.initial)
        .expect("validated at compile");
    let b = sc.workspace.partition.cell_box(cell);
    let mut z: Vec<f64> = (0..b.dim()).map(|d| (b.lo()[d] + b.hi()[d]) / 2.0).collect();
    z.resize(sc.system.as_model().state_dim(), 0.0);
    z
}

fn synthesize(sc: &CompiledScenario) -> Result<SynthesisBundle, PipelineError> {
    let bundle = run_pipeline(sc)?;
    println!(
        "accepting path: {} ({})^w",
        bundle.path.prefix.join(" "),
        bundle.path.suffix.join(" ")
    );
    for (i, ((from, to), plan)) in bundle.pairs.iter().zip(&bundle.plans).enumerate() {
        println!(
            "plan {from} -> {to}: {} cells, {} iterations, {:.2} s",
            plan.cells.len(),
            bundle.controllers[i].iterations,
            bundle.timings.layer3[i].as_secs_f64()
        );
    }
    println!("total: {:.2} s", bundle.timings.total.as_secs_f64());
    Ok(bundle)
}

fn write_controllers(bundle: &SynthesisBundle, dir: &Path) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir)?;
    for ((from, to), ctrl) in bundle.pairs.iter().zip(&bundle.controllers) {
        let path = dir.join(format!("controller_{from}_{to}.json"));
        write_controller_json(ctrl, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_simulation(
    sc: &CompiledScenario,
    bundle: &SynthesisBundle,
    z0: Option<Vec<f64>>,
    suffix_iterations: Option<usize>,
) -> Result<hidec::simulate::SimOutcome, PipelineError> {
    let z0 = z0.unwrap_or_else(|| default_z0(sc));
    let iterations = suffix_iterations.unwrap_or(sc.config.simulation.suffix_iterations);
    let policy = DisturbancePolicy::from_config(&sc.config.simulation);
    let outcome = simulate(sc, bundle, &z0, iterations, &policy)?;
    println!(
        "simulated {} samples from {z0:?}",
        outcome.record.samples.len()
    );
    for v in &outcome.violations {
        eprintln!("contract violation: {v}");
    }
    Ok(outcome)
}

fn run(cmd: Command) -> Result<(), PipelineError> {
    match cmd {
        Command::ParseLtl {
            formula,
            atoms,
            automaton,
        } => {
            let atoms: BTreeSet<String> = if atoms.is_empty() {
                infer_atoms(&formula)
            } else {
                atoms.into_iter().collect()
            };
            let ast = parse_ltl(&formula, &atoms).map_err(PipelineError::Layer1)?;
            println!("{ast:#?}");
            if automaton {
                println!("{}", ltl_to_buchi(&ast).dump());
            }
            Ok(())
        }
        Command::Plan { scenario } => {
            let sc = load(&scenario)?;
            let aut = ltl_to_buchi(&sc.formula);
            let path =
                hidec::ltl::find_accepting_path(&sc.roi_ts, &aut, &sc.config.formula.initial)?;
            println!(
                "accepting path: {} ({})^w",
                path.prefix.join(" "),
                path.suffix.join(" ")
            );
            for (from, to) in hidec::ltl::consecutive_pairs(&path) {
                let a = sc.workspace.roi_cell(&from).expect("validated");
                let b = sc.workspace.roi_cell(&to).expect("validated");
                let plan = hidec::grid::shortest_plan(&sc.workspace, a, b, None).map_err(
                    |source| PipelineError::Layer2 {
                        from: from.clone(),
                        to: to.clone(),
                        source,
                    },
                )?;
                let coords: Vec<String> = plan
                    .cells
                    .iter()
                    .map(|&c| format!("{:?}", sc.workspace.partition.coords(c)))
                    .collect();
                println!("plan {from} -> {to}: {}", coords.join(" "));
            }
            Ok(())
        }
        Command::Reach {
            scenario,
            state_box,
            input,
            tau,
        } => {
            let sc = load(&scenario)?;
            let sys = sc.system.as_model();
            let z_box = parse_state_box(&state_box, sys.state_dim())?;
            if input.len() != sys.control_dim() {
                return Err(config_err(format!(
                    "input has {} components, the system expects {}",
                    input.len(),
                    sys.control_dim()
                )));
            }
            let t = tau.unwrap_or(sc.tau);
            let r = over_approximate(
                sys,
                &z_box,
                &input,
                sys.disturbance_space(),
                t,
                sc.refine.rk4_steps,
            )
            .map_err(|e| PipelineError::Config(format!("reachability failed: {e}")))?;
            println!("over-approximation at t = {t}:");
            for d in 0..r.over_box.dim() {
                println!("  [{}, {}]", r.over_box.lo()[d], r.over_box.hi()[d]);
            }
            Ok(())
        }
        Command::Synthesize { scenario, out } => {
            let sc = load(&scenario)?;
            let bundle = synthesize(&sc)?;
            write_controllers(&bundle, &out.out)?;
            let svg = out.out.join("workspace.svg");
            write_svg(&sc.workspace, Some(&bundle), None, &svg)?;
            println!("wrote {}", svg.display());
            Ok(())
        }
        Command::Simulate {
            scenario,
            z0,
            suffix_iterations,
            out,
        } => {
            let sc = load(&scenario)?;
            let bundle = synthesize(&sc)?;
            let outcome = run_simulation(&sc, &bundle, z0, suffix_iterations)?;
            std::fs::create_dir_all(&out.out)?;
            let csv = out.out.join("trajectory.csv");
            write_trajectory_csv(&outcome.record, &csv)?;
            println!("wrote {}", csv.display());
            let svg = out.out.join("trajectory.svg");
            write_svg(&sc.workspace, Some(&bundle), Some(&outcome.record), &svg)?;
            println!("wrote {}", svg.display());
            if !outcome.violations.is_empty() {
                return Err(PipelineError::Simulation(format!(
                    "{} contract violation(s)",
                    outcome.violations.len()
                )));
            }
            Ok(())
        }
        Command::Export {
            scenario,
            format,
            out,
            z0,
        } => {
            let sc = load(&scenario)?;
            match format.as_str() {
                "json" => {
                    let bundle = synthesize(&sc)?;
                    write_controllers(&bundle, &out)
                }
                "svg" => {
                    let bundle = synthesize(&sc)?;
                    if let Some(dir) = out.parent() {
                        if !dir.as_os_str().is_empty() {
                            std::fs::create_dir_all(dir)?;
                        }
                    }
                    write_svg(&sc.workspace, Some(&bundle), None, &out)?;
                    println!("wrote {}", out.display());
                    Ok(())
                }
                "csv" => {
                    let bundle = synthesize(&sc)?;
                    let outcome = run_simulation(&sc, &bundle, z0, None)?;
                    if let Some(dir) = out.parent() {
                        if !dir.as_os_str().is_empty() {
                            std::fs::create_dir_all(dir)?;
                        }
                    }
                    write_trajectory_csv(&outcome.record, &out)?;
                    println!("wrote {}", out.display());
                    Ok(())
                }
                other => Err(config_err(format!(
                    "unknown format `{other}` (expected csv, json, or svg)"
                ))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_are_inferred_from_identifiers() {
        let atoms = infer_atoms("([]<> pi2) && ((! pi3) U pi4) && true");
        let expect: BTreeSet<String> =
            ["pi2", "pi3", "pi4"].iter().map(|s| s.to_string()).collect();
        assert_eq!(atoms, expect);
    }

    #[test]
    fn state_box_parsing() {
        let b = parse_state_box("0:1, 2:3", 2).unwrap();
        assert_eq!(b.lo(), &[0.0, 2.0]);
        assert_eq!(b.hi(), &[1.0, 3.0]);
        assert!(parse_state_box("0:1", 2).is_err());
        assert!(parse_state_box("0;1,2:3", 2).is_err());
    }
}
