#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::Value;
use slm_oam::cli::{run, Cli, Command};

pub fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

pub fn golden_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/hashes.json")
}

pub fn cli(command: Command, config_name: Option<&str>, out: &Path, seed: u64, sweep: &[&str]) -> Cli {
    Cli {
        command,
        config: config_name.map(config),
        out: out.to_path_buf(),
        seed,
        sweep: sweep.iter().map(|s| s.to_string()).collect(),
    }
}

pub fn run_in(out: &Path, command: Command, config_name: Option<&str>, seed: u64, sweep: &[&str]) -> Value {
    run(&cli(command, config_name, out, seed, sweep)).unwrap()
}

pub struct GoldenCase {
    pub name: &'static str,
    pub command: Command,
    pub config: Option<&'static str>,
    pub seed: u64,
}

/// Small runs whose output hashes are pinned in `tests/golden/hashes.json`.
pub const GOLDEN: &[GoldenCase] = &[
    GoldenCase { name: "hologram_identity", command: Command::Hologram, config: Some("identity.json"), seed: 0 },
    GoldenCase { name: "hologram_pictures", command: Command::Hologram, config: Some("pictures.json"), seed: 0 },
    GoldenCase { name: "efficiency_default", command: Command::Efficiency, config: None, seed: 0 },
    GoldenCase { name: "efficiency_ideal", command: Command::Efficiency, config: Some("ideal_device.json"), seed: 0 },
    GoldenCase { name: "correlate_product", command: Command::Correlate, config: Some("product.json"), seed: 0 },
];

/// Per-file sha256 for every golden case, keyed `case/file`.
pub fn golden_hashes(scratch: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for case in GOLDEN {
        let dir = scratch.join(case.name);
        let manifest = run_in(&dir, case.command, case.config, case.seed, &[]);
        for file in manifest["runs"][0]["files"].as_array().unwrap() {
            out.insert(
                format!("{}/{}", case.name, file["name"].as_str().unwrap()),
                file["sha256"].as_str().unwrap().to_string(),
            );
        }
    }
    out
}

/// Reads the pinned hashes, or rewrites them when `SLM_OAM_BLESS` is set.
pub fn stored_golden(current: &BTreeMap<String, String>) -> BTreeMap<String, String> {
    if std::env::var_os("SLM_OAM_BLESS").is_some() {
        let text = serde_json::to_string_pretty(current).unwrap();
        std::fs::write(golden_path(), text + "\n").unwrap();
    }
    let text = std::fs::read_to_string(golden_path()).expect("golden hash file");
    serde_json::from_str(&text).unwrap()
}
