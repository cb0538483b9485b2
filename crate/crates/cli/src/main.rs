use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ics_scope_core::capture::{read_capture, CaptureMeta};
use ics_scope_core::pipeline::{CaptureInput, Pipeline, PipelineConfig, SANITIZE_CSV};
use ics_scope_core::trafficgen::{self, ScenarioSpec, BUILTIN_SCENARIOS};
use ics_scope_core::{Dissector, Error, PortRegistry};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "ics-scope",
    about = "Find and classify industrial protocol traffic in sampled packet captures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write the report bundle.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// scanners, hp-ics, hp-all or all.
        #[arg(long)]
        filters: Option<String>,
        /// Extra captures, assigned to the first configured vantage.
        pcaps: Vec<PathBuf>,
    },
    /// Print one JSON line per identified packet.
    Dissect {
        pcap: PathBuf,
        /// Emulate a capture truncated to this many bytes per frame.
        #[arg(long, default_value_t = 65535)]
        snap_len: u32,
    },
    /// Write only the sanitization report.
    Sanitize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        pcaps: Vec<PathBuf>,
    },
    /// Generate a labelled synthetic corpus with its sidecar files.
    Gen {
        /// Scenario JSON file, or the name of a built-in scenario.
        spec: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the version.
    Version,
}

/// Exit 2 for configuration and usage problems, 1 for failures while
/// processing.
enum Failure {
    Config(Error),
    Runtime(Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }

    fn error(&self) -> &Error {
        match self {
            Failure::Config(e) | Failure::Runtime(e) => e,
        }
    }
}

type Outcome = Result<(), Failure>;

fn config_err(e: Error) -> Failure {
    Failure::Config(e)
}

fn runtime_err(e: Error) -> Failure {
    Failure::Runtime(e)
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| {
        Failure::Runtime(Error::Io {
            path: path.to_owned(),
            source: e,
        })
    }
}

fn load_pipeline(
    config: &Path,
    out: Option<PathBuf>,
    filters: Option<String>,
    pcaps: Vec<PathBuf>,
) -> Result<(Pipeline, PathBuf), Failure> {
    let mut cfg = PipelineConfig::load(config).map_err(config_err)?;
    if filters.is_some() {
        cfg.filters = filters;
    }
    cfg.captures
        .extend(pcaps.into_iter().map(|path| CaptureInput {
            vantage: None,
            path,
        }));
    let out = out.or_else(|| cfg.output.clone()).ok_or_else(|| {
        Failure::Config(Error::Invalid(format!(
            "{}: no output directory (use --out or set `output`)",
            config.display()
        )))
    })?;
    let pipeline = Pipeline::from_config(&cfg).map_err(config_err)?;
    Ok((pipeline, out))
}

fn analyze(
    config: &Path,
    out: Option<PathBuf>,
    filters: Option<String>,
    pcaps: Vec<PathBuf>,
) -> Outcome {
    let (pipeline, out) = load_pipeline(config, out, filters, pcaps)?;
    let analysis = pipeline.run().map_err(runtime_err)?;
    analysis
        .write_bundle(&out, &pipeline.snapshot)
        .map_err(runtime_err)?;
    log::info!("reports written to {}", out.display());
    Ok(())
}

fn sanitize(config: &Path, out: Option<PathBuf>, pcaps: Vec<PathBuf>) -> Outcome {
    let (pipeline, out) = load_pipeline(config, out, None, pcaps)?;
    let analysis = pipeline.run().map_err(runtime_err)?;
    std::fs::create_dir_all(&out).map_err(io_err(&out))?;
    let path = out.join(SANITIZE_CSV);
    let file = std::fs::File::create(&path).map_err(io_err(&path))?;
    analysis
        .write_sanitize(BufWriter::new(file))
        .map_err(runtime_err)
}

fn dissect(pcap: &Path, snap_len: u32) -> Outcome {
    let meta = CaptureMeta::new("cli", 1, snap_len).map_err(config_err)?;
    let reader = read_capture(pcap, &meta).map_err(config_err)?;
    let dissector = Dissector::new(PortRegistry::default());
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for (index, record) in reader.enumerate() {
        let record = record.map_err(runtime_err)?;
        if let Some(d) = dissector.dissect(&record) {
            let line = json!({
                "index": index,
                "protocol": d.protocol,
                "kind": d.kind,
                "role": d.role,
                "function_code": d.function_code,
                "verdict": d.verdict,
            });
            writeln!(out, "{line}").map_err(io_err(Path::new("<stdout>")))?;
        }
    }
    out.flush().map_err(io_err(Path::new("<stdout>")))
}

fn gen(spec: &str, out: &Path) -> Outcome {
    let spec = match trafficgen::builtin(spec) {
        Some(s) => s.map_err(config_err)?,
        None => {
            let path = Path::new(spec);
            if !path.exists() {
                let names: Vec<&str> = BUILTIN_SCENARIOS.iter().map(|(n, _)| *n).collect();
                return Err(Failure::Config(Error::Invalid(format!(
                    "{spec} is neither a file nor a built-in scenario ({})",
                    names.join(", ")
                ))));
            }
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::Config(Error::Io {
                    path: path.to_owned(),
                    source: e,
                })
            })?;
            ScenarioSpec::from_json(&text)
                .map_err(|e| Failure::Config(Error::Invalid(format!("{}: {e}", path.display()))))?
        }
    };
    let corpus = trafficgen::generate(&spec).map_err(config_err)?;
    corpus.write(out).map_err(runtime_err)?;
    log::info!(
        "{} packets written to {}",
        corpus.truth.len(),
        out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ICS_SCOPE_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze {
            config,
            out,
            filters,
            pcaps,
        } => analyze(&config, out, filters, pcaps),
        Command::Dissect { pcap, snap_len } => dissect(&pcap, snap_len),
        Command::Sanitize { config, out, pcaps } => sanitize(&config, out, pcaps),
        Command::Gen { spec, out } => gen(&spec, &out),
        Command::Version => {
            println!("ics-scope {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.error());
            ExitCode::from(f.code())
        }
    }
}
