use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use wgqed::fitting::{fit_auto, LineShape};
use wgqed::harness::acceptance::run_all;
use wgqed::harness::{builtin_scenario, ingest_csv, run_scenario, Ingested, Scenario, ScenarioKind};
use wgqed::Error;

#[derive(Parser)]
#[command(name = "wgqed", version, about = "Waveguide quantum-emitter simulations, fits and scenario runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides the scenario's `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Noise seed; overrides the scenario's `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Signal {
    Rf,
    Transmission,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Lorentzian,
    Fano,
}

#[derive(Subcommand)]
enum Command {
    /// Normalised device transmission spectrum with line-shape fits.
    SimulateSpectrum(Common),
    /// Fit a spectrum CSV.
    Fit {
        #[command(flatten)]
        common: Common,
        /// Spectrum CSV to fit.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "fano")]
        model: Model,
    },
    /// Measured transmitted g²(τ).
    G2(Common),
    /// Optical response to a square bias drive.
    SwitchTrace {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "rf")]
        signal: Signal,
    },
    /// Extinction against laser power.
    PowerSweep(Common),
    /// Run a scenario file or a built-in scenario.
    RunScenario {
        #[command(flatten)]
        common: Common,
        /// Built-in scenario name, instead of --config.
        #[arg(long, conflicts_with = "config")]
        name: Option<String>,
    },
    /// Run the acceptance checks.
    Acceptance {
        #[command(flatten)]
        common: Common,
    },
}

/// Machine-readable error record for stderr.
fn error_record(e: &Error) -> Value {
    let mut rec = json!({ "kind": e.kind(), "message": e.to_string() });
    match e {
        Error::Validation { field, .. } => rec["field"] = json!(field),
        Error::Parse { line, column, .. } => {
            rec["line"] = json!(line);
            rec["column"] = json!(column);
        }
        Error::Io { path, .. } => rec["path"] = json!(path),
        _ => {}
    }
    json!({ "error": rec })
}

fn load(common: &Common, kind: Option<ScenarioKind>) -> Result<(Scenario, PathBuf), Error> {
    let path = common.config.as_ref().ok_or_else(|| Error::Validation {
        field: "--config".into(),
        message: "a scenario file is required".into(),
    })?;
    let mut s = Scenario::from_path(path)?;
    finish(&mut s, common, kind).map(|out| (s, out))
}

fn finish(s: &mut Scenario, common: &Common, kind: Option<ScenarioKind>) -> Result<PathBuf, Error> {
    if let Some(k) = kind {
        s.kind = k;
    }
    if let Some(seed) = common.seed {
        s.seed = Some(seed);
    }
    s.validate()?;
    common
        .out
        .clone()
        .or_else(|| s.output_dir.as_ref().map(PathBuf::from))
        .ok_or_else(|| Error::Validation {
            field: "--out".into(),
            message: "no output directory given and the scenario sets no output_dir".into(),
        })
}

fn run(s: &Scenario, out: &Path) -> Result<Value, Error> {
    let m = run_scenario(s, out)?;
    Ok(json!({
        "status": "ok",
        "scenario": m.scenario,
        "kind": m.kind,
        "out": out.display().to_string(),
        "files": m.files.iter().map(|f| f.path.clone()).collect::<Vec<_>>(),
    }))
}

fn execute(cmd: Command) -> Result<(Value, bool), Error> {
    let ok = |v| Ok((v, true));
    match cmd {
        Command::SimulateSpectrum(c) => {
            let (s, out) = load(&c, Some(ScenarioKind::Transmission))?;
            ok(run(&s, &out)?)
        }
        Command::G2(c) => {
            let (s, out) = load(&c, Some(ScenarioKind::G2))?;
            ok(run(&s, &out)?)
        }
        Command::SwitchTrace { common, signal } => {
            let kind = match signal {
                Signal::Rf => ScenarioKind::RfSwitch,
                Signal::Transmission => ScenarioKind::TransmissionSwitch,
            };
            let (s, out) = load(&common, Some(kind))?;
            ok(run(&s, &out)?)
        }
        Command::PowerSweep(c) => {
            let (s, out) = load(&c, Some(ScenarioKind::PowerSweep))?;
            ok(run(&s, &out)?)
        }
        Command::RunScenario { common, name } => {
            let (s, out) = match name {
                Some(n) => {
                    let mut s = builtin_scenario(&n)?;
                    let out = finish(&mut s, &common, None)?;
                    (s, out)
                }
                None => load(&common, None)?,
            };
            ok(run(&s, &out)?)
        }
        Command::Fit { common, input, model } => {
            let Ingested::Spectrum { spectrum, .. } = ingest_csv(&input)? else {
                return Err(Error::Schema(format!("{} is not a spectrum", input.display())));
            };
            let shape = match model {
                Model::Lorentzian => LineShape::Lorentzian,
                Model::Fano => LineShape::Fano,
            };
            let r = fit_auto(shape, &spectrum)?;
            if let Some(dir) = &common.out {
                std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
                let path = dir.join(format!("fit_{}.txt", shape.name()));
                std::fs::write(&path, r.to_record()).map_err(|e| io(&path, e))?;
            }
            let names = shape.param_names();
            let values = r.params.to_vec();
            let sigmas = r.uncertainties.map(|u| u.to_vec());
            let params: serde_json::Map<String, Value> = names
                .iter()
                .enumerate()
                .map(|(i, n)| {
                    let sigma = sigmas.as_ref().map(|s| s[i]);
                    (n.to_string(), json!({ "value": values[i], "sigma": sigma }))
                })
                .collect();
            ok(json!({
                "status": if r.converged { "ok" } else { "not_converged" },
                "model": shape.name(),
                "converged": r.converged,
                "iterations": r.iterations,
                "residual_norm": r.residual_norm,
                "params": params,
            }))
        }
        Command::Acceptance { common } => {
            let results = run_all();
            let mut text = String::new();
            for r in &results {
                println!("{}", r.line());
                text.push_str(&r.line());
                text.push('\n');
            }
            if let Some(dir) = &common.out {
                std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
                let path = dir.join("acceptance.txt");
                std::fs::write(&path, text).map_err(|e| io(&path, e))?;
            }
            let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
            Ok((
                json!({ "status": if failed.is_empty() { "ok" } else { "failed" }, "failed": failed }),
                failed.is_empty(),
            ))
        }
    }
}

fn io(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rec = json!({ "error": { "kind": "usage", "message": e.to_string().trim_end() } });
            eprintln!("{rec}");
            return ExitCode::from(2);
        }
    };
    match execute(cli.command) {
        Ok((summary, success)) => {
            println!("{summary}");
            if success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("{}", error_record(&e));
            ExitCode::from(1)
        }
    }
}
