use std::process::ExitCode;

use clap::Parser;
use serde_json::Value;
use slm_oam::cli::{exit_code, run, Cli, Command};

fn print_efficiency(manifest: &Value) {
    for run in manifest["runs"].as_array().into_iter().flatten() {
        if !run["sweep"].as_object().is_some_and(|s| s.is_empty()) {
            println!("{}", run["sweep"]);
        }
        println!("{:>6} {:>12} {:>12}", "order", "device", "ideal");
        for o in run["results"]["orders"].as_array().into_iter().flatten() {
            let order = o["order"].as_i64().unwrap_or_default();
            let (a, b) = (o["device"].as_f64().unwrap_or(f64::NAN), o["ideal"].as_f64().unwrap_or(f64::NAN));
            println!("{order:>6} {a:>12.6} {b:>12.6}");
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(manifest) => {
            if cli.command == Command::Efficiency {
                print_efficiency(&manifest);
            }
            println!("{}", cli.out.join("manifest.json").display());
            log::info!("content hash {}", manifest["content_hash"]);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
