use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gridflex::report;
use gridflex::study::{self, Engine, RunOptions, Study, StudyConfig};

#[derive(Parser)]
#[command(name = "gridflex", version, about = "Stochastic unit commitment studies with FACTS-controlled lines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one study family and write its reports.
    Run {
        /// base, siting, penetration, load-curves or generation-mix
        study: Study,
        /// Study configuration (JSON). Defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory; also holds the cell cache.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Relative MIP gap.
        #[arg(long)]
        gap: Option<f64>,
        /// Time limit per solve, seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Solve through the `external_solver` command in the config.
        #[arg(long)]
        external_solver: bool,
        /// Worker threads; overrides the config.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check a configuration and every file it references.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write the built-in modified RTS-96 case as JSON.
    ExportCase {
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(config: Option<&PathBuf>) -> Result<StudyConfig, String> {
    match config {
        Some(p) => StudyConfig::from_file(p).map_err(|e| e.to_string()),
        None => Ok(StudyConfig::default()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => {
            let cfg = match load(Some(&config)) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            match cfg.inputs() {
                Ok(inputs) => {
                    for st in Study::ALL {
                        match study::plan(st, &cfg, &inputs) {
                            Ok(groups) => {
                                let cells: usize = groups.iter().map(|g| g.facts_sets.len()).sum();
                                println!("{st}: {cells} cells");
                            }
                            Err(e) => {
                                eprintln!("error: {st}: {e}");
                                return ExitCode::from(1);
                            }
                        }
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::ExportCase { out } => match gridflex::io::save_case(&gridflex::data::build_rts96_modified(), &out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Run {
            study,
            config,
            out,
            gap,
            time_limit,
            seed,
            external_solver,
            workers,
        } => {
            let mut cfg = match load(config.as_ref()) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            if let Some(g) = gap {
                cfg.solve.mip_gap = g;
            }
            if let Some(t) = time_limit {
                cfg.solve.time_limit_s = t;
            }
            if let Some(s) = seed {
                cfg.solve.seed = s;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let Some(out_dir) = out.or_else(|| cfg.output_dir.clone()) else {
                eprintln!("error: no output directory; pass --out or set output_dir");
                return ExitCode::from(1);
            };
            let engine = if external_solver {
                match &cfg.external_solver {
                    Some(s) => Engine::External(s.clone()),
                    None => {
                        eprintln!("error: --external-solver needs `external_solver` in the config");
                        return ExitCode::from(1);
                    }
                }
            } else {
                Engine::Embedded
            };
            let inputs = match cfg.inputs() {
                Ok(i) => i,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let options = RunOptions {
                out_dir: out_dir.clone(),
                engine,
                progress: true,
            };
            let run = match study::run_study(study, &cfg, &inputs, &options) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            if let Err(e) = report::emit_reports(&run, &out_dir) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            let failed = run.report.failed_cells();
            println!(
                "{study}: {} cells, {failed} failed; reports in {}",
                run.report.cells.len(),
                out_dir.display()
            );
            if failed > 0 {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
