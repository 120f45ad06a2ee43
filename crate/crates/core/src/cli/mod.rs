//! The `slm-oam` command line.

pub mod commands;
pub mod config;

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::export::OutputDir;
use config::{set_path, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "slm-oam", version, about = "SLM phase holograms and OAM mode simulations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration; omitted keys take their defaults.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Seed for sampled coincidence counts.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Run once per value. Repeated sweeps are zipped and must have equal lengths.
    #[arg(long, global = true, value_name = "KEY=V1,V2,...")]
    pub sweep: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Render the hologram frame as PGM and PNG.
    Hologram,
    /// Send the configured beam through the SLM and propagate it.
    Beam,
    /// Two-photon coincidence table for an SLM sweep.
    Correlate,
    /// Diffraction efficiency per order, configured device next to an ideal one.
    Efficiency,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Hologram => "hologram",
            Command::Beam => "beam",
            Command::Correlate => "correlate",
            Command::Efficiency => "efficiency",
        }
    }
}

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Configuration(_) => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_NUMERICAL,
    }
}

struct Sweep {
    key: String,
    values: Vec<Value>,
}

fn parse_sweep(arg: &str) -> Result<Sweep> {
    let (key, list) =
        arg.split_once('=').ok_or_else(|| Error::Configuration(format!("sweep '{arg}' is not KEY=V1,V2,...")))?;
    let values: Vec<Value> = list
        .split(',')
        .map(|v| serde_json::from_str(v.trim()).unwrap_or_else(|_| Value::String(v.trim().to_string())))
        .collect();
    if key.is_empty() || list.is_empty() {
        return Err(Error::Configuration(format!("sweep '{arg}' has an empty key or value list")));
    }
    Ok(Sweep { key: key.to_string(), values })
}

/// One entry per run: the sweep assignments and the configuration document.
fn expand(base: &Value, sweeps: &[Sweep]) -> Result<Vec<(Value, Value)>> {
    let Some(first) = sweeps.first() else {
        return Ok(vec![(json!({}), base.clone())]);
    };
    let n = first.values.len();
    if let Some(s) = sweeps.iter().find(|s| s.values.len() != n) {
        return Err(Error::Configuration(format!(
            "sweep '{}' has {} values but '{}' has {n}",
            s.key,
            s.values.len(),
            first.key
        )));
    }
    (0..n)
        .map(|k| {
            let mut doc = base.clone();
            let mut assigned = serde_json::Map::new();
            for s in sweeps {
                set_path(&mut doc, &s.key, s.values[k].clone())?;
                assigned.insert(s.key.clone(), s.values[k].clone());
            }
            Ok((Value::Object(assigned), doc))
        })
        .collect()
}

/// Runs one invocation and returns the manifest it wrote.
pub fn run(cli: &Cli) -> Result<Value> {
    let base: Value = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            let doc: Value = serde_json::from_str(&text).map_err(|e| {
                Error::Configuration(format!("{}: line {} column {}: {e}", path.display(), e.line(), e.column()))
            })?;
            RunConfig::from_json(&text)?;
            doc
        }
        None => json!({}),
    };
    let sweeps = cli.sweep.iter().map(|s| parse_sweep(s)).collect::<Result<Vec<_>>>()?;
    let runs = expand(&base, &sweeps)?;
    let mut out = OutputDir::create(&cli.out)?;
    let name = cli.command.name();
    let mut entries = Vec::new();
    for (k, (assigned, doc)) in runs.iter().enumerate() {
        let cfg: RunConfig = serde_json::from_value(doc.clone())
            .map_err(|e| Error::Configuration(format!("with sweep {assigned}: {e}")))?;
        let cfg = cfg.resolved()?;
        let prefix = if sweeps.is_empty() { name.to_string() } else { format!("{name}_{k:03}") };
        let first_file = out.records().len();
        log::info!("{name} run {k}: {assigned}");
        let results = match cli.command {
            Command::Hologram => commands::hologram(&cfg, &mut out, &prefix)?,
            Command::Beam => commands::beam(&cfg, &mut out, &prefix)?,
            Command::Correlate => commands::correlate(&cfg, &mut out, &prefix, cli.seed)?,
            Command::Efficiency => commands::efficiency(&cfg, &mut out, &prefix)?,
        };
        entries.push(json!({
            "sweep": assigned,
            "config": serde_json::to_value(&cfg).map_err(|e| Error::Io(std::io::Error::other(e)))?,
            "files": &out.records()[first_file..],
            "results": results,
        }));
    }
    let manifest = json!({
        "artifact": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "seed": cli.seed,
        "runs": entries,
        "content_hash": out.content_hash(),
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    fs::write(out.root().join("manifest.json"), text + "\n")?;
    Ok(manifest)
}
