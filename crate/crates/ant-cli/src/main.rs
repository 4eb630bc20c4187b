//! Command line for the generalised-ant toolkit: simulate, detect, census,
//! mine, construct, verify, and render.
//!
//! Output on stdout is line-oriented `key=value` for scripting; files are
//! written in the antpat, catalog-JSON, census-JSON and PGM/SVG formats of
//! the core crate. Usage errors exit 2; a failed verification exits 1 with
//! the reject reason on stderr.

use ant_core::antpat::AntpatDoc;
use ant_core::constructions::{
    fundamental_highway, harmonic_highways, l2k1r_highway, llrlrl_highway,
};
use ant_core::engine::{Configuration, EngineConfig, Simulator};
use ant_core::highway::{
    catalog_from_json, catalog_to_json, detect, verify_highway, DetectionOutcome, Highway,
};
use ant_core::montecarlo::{mine, Census, ExperimentSpec, PatternShape};
use ant_core::render::{render_pgm, render_svg, RenderFormat, RenderSpec};
use ant_core::rule::RuleWord;
use ant_core::Cell;
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ant", about = "Generalised Langton's ant simulation and highway analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArgs {
    /// Rule word over {L, R}, e.g. LLRL.
    #[arg(long)]
    rule: String,
    /// Start from this antpat file instead of the all-white configuration.
    #[arg(long, conflicts_with = "white")]
    input: Option<PathBuf>,
    /// Start from the all-white configuration, ant at the origin facing north.
    #[arg(long)]
    white: bool,
    /// Abort when the picture holds more nonzero cells than this.
    #[arg(long, default_value_t = 100_000_000)]
    max_cells: u64,
}

#[derive(Args)]
struct RenderArgs {
    /// Write a render of the final configuration (.pgm or .svg).
    #[arg(long)]
    render: Option<PathBuf>,
    /// Square pixels per cell.
    #[arg(long, default_value_t = 4)]
    cell_px: u32,
    /// Explicit region `x0,y0,x1,y1` instead of the auto bounding box.
    #[arg(long, value_parser = parse_region, allow_hyphen_values = true)]
    region: Option<Region>,
    /// Draw no ant marker.
    #[arg(long)]
    no_ant_marker: bool,
}

#[derive(Clone, Copy, Debug)]
struct Region {
    lo: (i64, i64),
    hi: (i64, i64),
}

fn parse_region(s: &str) -> Result<Region, String> {
    let parts: Vec<i64> = s
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| format!("bad region token {t:?}")))
        .collect::<Result<_, _>>()?;
    if parts.len() != 4 {
        return Err("region is x0,y0,x1,y1".into());
    }
    Ok(Region {
        lo: (parts[0], parts[1]),
        hi: (parts[2], parts[3]),
    })
}

#[derive(Subcommand)]
enum Command {
    /// Run a fixed number of steps and write the final configuration.
    Simulate {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        steps: u64,
        /// Write the final configuration as antpat.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Append the full trace, one symbol byte per step, to this file.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[command(flatten)]
        render: RenderArgs,
    },
    /// Watch the trace for a periodic suffix and verify the highway exactly.
    Detect {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = ant_core::engine::DEFAULT_STEP_BUDGET)]
        max_steps: u64,
        #[arg(long, default_value_t = 16_384)]
        max_period: u64,
        /// Write the verified highway as a catalog record.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify seeded random perturbations by highway period.
    Census {
        #[arg(long)]
        rule: String,
        #[arg(long)]
        runs: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        steps_per_run: u64,
        #[arg(long, default_value_t = 2_048)]
        max_period: u64,
        /// Perturbation shape: `square:<side>` or `cross:<side>`.
        #[arg(long, default_value = "square:11", value_parser = parse_shape)]
        shape: PatternShape,
        /// Worker threads; defaults to ANT_WORKERS or the CPU count.
        #[arg(long)]
        workers: Option<usize>,
        /// Resume from / save progress to this checkpoint file.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Write the report JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also export period,count,frequency rows.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Census loop that keeps verified, canonicalised highway records.
    Mine {
        #[arg(long)]
        rule: String,
        /// Run budget.
        #[arg(long)]
        budget: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        steps_per_run: u64,
        #[arg(long, default_value_t = 16_384)]
        max_period: u64,
        /// Keep only these periods (comma separated); empty keeps all.
        #[arg(long, value_delimiter = ',')]
        periods: Vec<u64>,
        /// Stop once this many distinct periods have been collected.
        #[arg(long)]
        distinct: Option<usize>,
        #[arg(long)]
        workers: Option<usize>,
        /// Write the catalog JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a proved highway family member and write its catalog record.
    Construct {
        /// `l2kr`, `l2k1r`, or `llrlrl`.
        #[arg(long)]
        family: String,
        /// Family parameter for l2kr / l2k1r.
        #[arg(long)]
        k: Option<u32>,
        /// `fundamental` or `harmonics` (l2kr only).
        #[arg(long, default_value = "fundamental")]
        variant: String,
        /// Link count for llrlrl.
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-verify catalog records; exit 0 iff every record is accepted.
    Verify {
        /// Catalog JSON file.
        #[arg(long)]
        catalog: PathBuf,
    },
}

fn parse_shape(s: &str) -> Result<PatternShape, String> {
    let (kind, side) = s
        .split_once(':')
        .ok_or("shape is square:<side> or cross:<side>")?;
    let side: u32 = side.parse().map_err(|_| format!("bad side {side:?}"))?;
    match kind {
        "square" => Ok(PatternShape::Square(side)),
        "cross" => Ok(PatternShape::Cross(side)),
        other => Err(format!("unknown shape {other:?}")),
    }
}

fn workers_or_default(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("ANT_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    })
}

fn load_start(input: &InputArgs) -> Result<(RuleWord, Configuration), String> {
    let rule: RuleWord = input.rule.parse().map_err(|e| format!("{e}"))?;
    match &input.input {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            let doc = AntpatDoc::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            if doc.rule != rule {
                return Err(format!(
                    "rule {} does not match the file's rule {}",
                    rule, doc.rule
                ));
            }
            Ok((rule, doc.to_configuration()))
        }
        None => Ok((rule, Configuration::white())),
    }
}

fn engine_config(input: &InputArgs) -> EngineConfig {
    EngineConfig {
        max_nonzero_cells: input.max_cells,
        ..EngineConfig::default()
    }
}

fn write_render(
    rule: &RuleWord,
    config: &Configuration,
    args: &RenderArgs,
    path: &Path,
) -> Result<(), String> {
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => RenderFormat::Pgm,
        Some("svg") => RenderFormat::Svg,
        other => return Err(format!("render wants .pgm or .svg, got {other:?}")),
    };
    let mut spec = RenderSpec::new(rule, format);
    spec.cell_px = args.cell_px;
    spec.ant_marker = !args.no_ant_marker;
    if let Some(r) = args.region {
        spec.region = Some((Cell::new(r.lo.0, r.lo.1), Cell::new(r.hi.0, r.hi.1)));
    }
    match spec.format {
        RenderFormat::Pgm => {
            let bytes = render_pgm(rule, config, &spec).map_err(|e| e.to_string())?;
            std::fs::write(path, bytes).map_err(|e| e.to_string())?;
        }
        RenderFormat::Svg => {
            let text = render_svg(rule, config, &spec).map_err(|e| e.to_string())?;
            std::fs::write(path, text).map_err(|e| e.to_string())?;
        }
    }
    println!("render={}", path.display());
    Ok(())
}

fn write_catalog(highways: &[Highway], out: Option<&Path>) -> Result<(), String> {
    let records: Vec<_> = highways.iter().map(|h| h.to_record()).collect();
    let json = catalog_to_json(&records);
    match out {
        Some(path) => std::fs::write(path, json).map_err(|e| e.to_string())?,
        None => print!("{json}"),
    }
    Ok(())
}

fn run() -> Result<ExitCode, String> {
    match Cli::parse().command {
        Command::Simulate {
            input,
            steps,
            out,
            trace_out,
            render,
        } => {
            let (rule, config) = load_start(&input)?;
            let mut sim = Simulator::new(rule.clone(), config, engine_config(&input));
            if let Some(path) = &trace_out {
                let file = std::fs::File::create(path).map_err(|e| e.to_string())?;
                sim.spill_trace_to(Box::new(std::io::BufWriter::new(file)));
            }
            sim.run(steps).map_err(|e| e.to_string())?;
            let config = sim.config();
            println!(
                "steps={steps} pos={},{} dir={} nonzero={}",
                config.position.x,
                config.position.y,
                config.direction.letter(),
                config.picture.nonzero_count()
            );
            if let Some(path) = &out {
                let doc = AntpatDoc::for_configuration(&rule, config);
                std::fs::write(path, doc.to_text()).map_err(|e| e.to_string())?;
                println!("out={}", path.display());
            }
            if let Some(path) = &render.render {
                write_render(&rule, config, &render, path)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Detect {
            input,
            max_steps,
            max_period,
            out,
        } => {
            let (rule, config) = load_start(&input)?;
            if max_period == 0 {
                return Err("max-period must be at least 1".into());
            }
            let engine = EngineConfig {
                trace_capacity: (3 * max_period as usize).next_power_of_two().max(1 << 20),
                ..engine_config(&input)
            };
            let report = detect(&rule, config, max_steps, max_period, &engine)
                .map_err(|e| e.to_string())?;
            println!("steps_simulated={}", report.steps_simulated);
            println!("trace_suffix_checked={}", report.trace_suffix_checked);
            match report.outcome {
                DetectionOutcome::Highway {
                    period,
                    drift,
                    preperiod_bound,
                } => {
                    println!(
                        "outcome=highway period={period} drift={},{} preperiod_bound={preperiod_bound}",
                        drift.0, drift.1
                    );
                    if let Some(h) = &report.highway {
                        write_catalog(std::slice::from_ref(h), out.as_deref())?;
                    }
                }
                DetectionOutcome::NoHighwayWithinBudget => {
                    println!("outcome=no_highway_within_budget");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Census {
            rule,
            runs,
            seed,
            steps_per_run,
            max_period,
            shape,
            workers,
            checkpoint,
            out,
            csv,
        } => {
            let spec = ExperimentSpec {
                ruleword: rule.parse().map_err(|e| format!("{e}"))?,
                runs,
                steps_per_run,
                shape,
                seed,
                max_period,
            };
            let workers = workers_or_default(workers);
            let started = std::time::Instant::now();
            let mut census = match &checkpoint {
                Some(path) if path.exists() => {
                    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
                    let census =
                        Census::from_checkpoint_json(&text).map_err(|e| e.to_string())?;
                    if census.spec != spec {
                        return Err("checkpoint was taken with a different experiment".into());
                    }
                    println!(
                        "resumed_blocks={}/{}",
                        census.completed_blocks(),
                        census.total_blocks()
                    );
                    census
                }
                _ => Census::new(spec).map_err(|e| e.to_string())?,
            };
            while !census.is_complete() {
                census.run_blocks(workers, Some(64));
                if let Some(path) = &checkpoint {
                    std::fs::write(path, census.checkpoint_json())
                        .map_err(|e| e.to_string())?;
                }
            }
            let mut report = census.report().expect("census complete");
            report.wall = Some(ant_core::montecarlo::WallMeta {
                seconds: started.elapsed().as_secs_f64(),
                workers,
            });
            println!(
                "runs={} highways={} no_highway={} resource_errors={}",
                report.total_runs,
                report.highway_hits(),
                report.no_highway,
                report.resource_errors
            );
            for (period, stats) in &report.periods {
                println!("period={period} count={}", stats.count);
            }
            if let Some(path) = &out {
                std::fs::write(path, report.to_json()).map_err(|e| e.to_string())?;
            }
            if let Some(path) = &csv {
                std::fs::write(path, report.to_csv()).map_err(|e| e.to_string())?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Mine {
            rule,
            budget,
            seed,
            steps_per_run,
            max_period,
            periods,
            distinct,
            workers,
            out,
        } => {
            let spec = ExperimentSpec {
                ruleword: rule.parse().map_err(|e| format!("{e}"))?,
                runs: budget,
                steps_per_run,
                shape: PatternShape::Square(11),
                seed,
                max_period,
            };
            let workers = workers_or_default(workers);
            let wanted = periods.clone();
            let outcome = mine(
                &spec,
                move |h| wanted.is_empty() || wanted.contains(&h.period),
                distinct,
                workers,
            )
            .map_err(|e| e.to_string())?;
            println!(
                "runs_used={} raw_hits={} kept={}",
                outcome.runs_used,
                outcome.raw_hits,
                outcome.highways.len()
            );
            for h in &outcome.highways {
                println!(
                    "highway period={} drift={},{} run_index={}",
                    h.period,
                    h.drift.0,
                    h.drift.1,
                    h.provenance.run_index.unwrap_or(0)
                );
            }
            write_catalog(&outcome.highways, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Construct {
            family,
            k,
            variant,
            n,
            out,
        } => {
            let highways = match family.as_str() {
                "l2kr" => {
                    let k = k.ok_or("l2kr needs --k")?;
                    match variant.as_str() {
                        "fundamental" => {
                            vec![fundamental_highway(k).map_err(|e| e.to_string())?]
                        }
                        "harmonics" => harmonic_highways(k).map_err(|e| e.to_string())?,
                        other => return Err(format!("unknown variant {other:?}")),
                    }
                }
                "l2k1r" => {
                    let k = k.ok_or("l2k1r needs --k")?;
                    vec![l2k1r_highway(k).map_err(|e| e.to_string())?]
                }
                "llrlrl" => {
                    let n = n.ok_or("llrlrl needs --n")?;
                    vec![llrlrl_highway(n).map_err(|e| e.to_string())?]
                }
                other => return Err(format!("unknown family {other:?}")),
            };
            for h in &highways {
                println!(
                    "constructed period={} drift={},{}",
                    h.period, h.drift.0, h.drift.1
                );
            }
            write_catalog(&highways, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { catalog } => {
            let text = std::fs::read_to_string(&catalog).map_err(|e| e.to_string())?;
            let records = catalog_from_json(&text).map_err(|e| e.to_string())?;
            let mut all_ok = true;
            for (i, record) in records.iter().enumerate() {
                match Highway::from_record(record).map_err(|e| e.to_string()) {
                    Ok(h) => match verify_highway(&h) {
                        Ok(()) => println!("record={i} period={} verdict=accept", h.period),
                        Err(reject) => {
                            all_ok = false;
                            println!("record={i} period={} verdict=reject", h.period);
                            eprintln!("record {i}: {reject}");
                        }
                    },
                    Err(e) => {
                        all_ok = false;
                        println!("record={i} verdict=reject");
                        eprintln!("record {i}: {e}");
                    }
                }
            }
            Ok(if all_ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
