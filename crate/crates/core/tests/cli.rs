mod common;

use std::fs;
use std::path::Path;
use std::process::Command as Process;

use common::{golden_hashes, run_in, stored_golden};
use serde_json::Value;
use slm_oam::cli::Command;

fn results(manifest: &Value) -> Vec<&Value> {
    manifest["runs"].as_array().unwrap().iter().map(|r| &r["results"]).collect()
}

fn binary(args: &[&str], out: &Path) -> i32 {
    Process::new(env!("CARGO_BIN_EXE_slm-oam"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
        .status
        .code()
        .unwrap()
}

fn read_pgm(path: &Path) -> (String, Vec<u8>) {
    let bytes = fs::read(path).unwrap();
    let header_end = bytes.iter().enumerate().filter(|(_, b)| **b == b'\n').nth(2).map(|(i, _)| i + 1).unwrap();
    (String::from_utf8(bytes[..header_end].to_vec()).unwrap(), bytes[header_end..].to_vec())
}

#[test]
fn identity_hologram_is_blank() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), Command::Hologram, Some("identity.json"), 0, &[]);
    let (header, data) = read_pgm(&dir.path().join("hologram.pgm"));
    assert_eq!(header, "P5\n1024 768\n255\n");
    assert!(data.iter().all(|&g| g == 0));
}

#[test]
fn png_and_pgm_carry_the_same_frame() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = run_in(dir.path(), Command::Hologram, Some("pictures.json"), 0, &[]);
    assert_eq!(results(&manifest)[0]["width"], 1024);
    let (_, pgm) = read_pgm(&dir.path().join("hologram.pgm"));
    let file = fs::File::open(dir.path().join("hologram.png")).unwrap();
    let mut dec = png::Decoder::new(std::io::BufReader::new(file)).read_info().unwrap();
    let mut buf = vec![0; dec.output_buffer_size().unwrap()];
    let info = dec.next_frame(&mut buf).unwrap();
    assert_eq!((info.width, info.height), (1024, 768));
    assert_eq!(info.color_type, png::ColorType::Grayscale);
    assert_eq!(&buf[..pgm.len()], &pgm[..]);
}

#[test]
fn manifest_hashes_match_files_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = run_in(dir.path(), Command::Efficiency, None, 0, &["device.max_phase_rad=5.0,6.0"]);
    let on_disk = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    assert_eq!(on_disk, serde_json::to_string_pretty(&manifest).unwrap() + "\n");
    for run in manifest["runs"].as_array().unwrap() {
        for f in run["files"].as_array().unwrap() {
            let bytes = fs::read(dir.path().join(f["name"].as_str().unwrap())).unwrap();
            assert_eq!(slm_oam::export::sha256_hex(&bytes), f["sha256"].as_str().unwrap());
        }
    }
    assert_eq!(manifest["runs"][1]["files"][0]["name"], "efficiency_001.csv");
}

#[test]
fn repeated_runs_are_byte_identical() {
    for (cmd, cfg, seed) in [
        (Command::Beam, "beam_small.json", 0),
        (Command::Correlate, "qutrit.json", 7),
        (Command::Hologram, "pictures.json", 0),
    ] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let ma = run_in(a.path(), cmd, Some(cfg), seed, &[]);
        let mb = run_in(b.path(), cmd, Some(cfg), seed, &[]);
        assert_eq!(ma["content_hash"], mb["content_hash"]);
        for f in ma["runs"][0]["files"].as_array().unwrap() {
            let name = f["name"].as_str().unwrap();
            assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
        }
    }
}

#[test]
fn seed_changes_counts_only() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_in(a.path(), Command::Correlate, Some("qutrit.json"), 1, &[]);
    run_in(b.path(), Command::Correlate, Some("qutrit.json"), 2, &[]);
    let read = |d: &Path| fs::read_to_string(d.join("correlate.csv")).unwrap();
    let (ta, tb) = (read(a.path()), read(b.path()));
    assert_ne!(ta, tb);
    let strip = |t: &str| t.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>();
    assert_eq!(strip(&ta), strip(&tb));
}

#[test]
fn golden_hashes_hold() {
    let dir = tempfile::tempdir().unwrap();
    let current = golden_hashes(dir.path());
    assert_eq!(current, stored_golden(&current));
}

#[test]
fn beam_sweep_reaches_every_charge() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = run_in(dir.path(), Command::Beam, Some("beam_small.json"), 0, &["hologram.l=-3,-1,0,2,4"]);
    for (r, l) in results(&manifest).iter().zip([-3, -1, 0, 2, 4]) {
        assert_eq!(r["argmax_l"], l);
        assert!(r["target_weight"].as_f64().unwrap() > 0.99);
    }
    let spectrum = fs::read_to_string(dir.path().join("beam_003_spectrum.csv")).unwrap();
    let header = spectrum.lines().next().unwrap();
    assert!(header.starts_with("-12,") && header.ends_with(",12,residual"));
}

#[test]
fn astigmatism_is_purest_when_balanced() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = run_in(dir.path(), Command::Beam, Some("beam_small.json"), 0, &["hologram.ast=0.8,0.9,1.0,1.1,1.2"]);
    let w: Vec<f64> = results(&manifest).iter().map(|r| r["target_weight"].as_f64().unwrap()).collect();
    assert!(w[0] < w[1] && w[1] < w[2] && w[2] > w[3] && w[3] > w[4], "{w:?}");
}

#[test]
fn lens_center_steers_the_spot() {
    let dir = tempfile::tempdir().unwrap();
    let manifest =
        run_in(dir.path(), Command::Beam, Some("beam_small.json"), 0, &["hologram.lens_x0_m=-2e-4,0,2e-4,4e-4"]);
    let x: Vec<f64> = results(&manifest).iter().map(|r| r["centroid_m"][0].as_f64().unwrap()).collect();
    assert!(x.windows(2).all(|p| p[1] > p[0]), "{x:?}");
    let w: Vec<f64> = results(&manifest).iter().map(|r| r["target_weight"].as_f64().unwrap()).collect();
    assert!(w[1] > w[0] && w[1] > w[2]);
}

#[test]
fn qutrit_correlation_follows_total_momentum() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), Command::Correlate, Some("qutrit.json"), 3, &[]);
    let mut reader = csv::Reader::from_path(dir.path().join("correlate.csv")).unwrap();
    let mut rows = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        let l_total: i32 = rec[5].parse().unwrap();
        let p: f64 = rec[6].parse().unwrap();
        let counts: u64 = rec[7].parse().unwrap();
        if l_total == 0 {
            assert!(p > 0.3 && counts > 5000);
        } else {
            assert!(p < 1e-3 && counts < 50);
        }
        rows += 1;
    }
    assert_eq!(rows, 12);
    let vis = fs::read_to_string(dir.path().join("correlate_visibility.csv")).unwrap();
    assert_eq!(vis.lines().count(), 5);
}

#[test]
fn product_state_gives_one_certain_outcome() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), Command::Correlate, Some("product.json"), 0, &[]);
    let text = fs::read_to_string(dir.path().join("correlate.csv")).unwrap();
    let row = text.lines().nth(1).unwrap();
    let p: f64 = row.split(',').nth(6).unwrap().parse().unwrap();
    assert!((p - 1.0).abs() < 1e-6);
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn efficiency_tracks_the_device() {
    let dir = tempfile::tempdir().unwrap();
    let first = |m: &Value| -> Vec<f64> { results(m).iter().map(|r| r["first_order"].as_f64().unwrap()).collect() };
    let default = run_in(&dir.path().join("a"), Command::Efficiency, None, 0, &[]);
    assert!((0.55..=0.65).contains(&first(&default)[0]));
    let ideal = run_in(&dir.path().join("b"), Command::Efficiency, Some("ideal_device.json"), 0, &[]);
    assert!(first(&ideal)[0] > 0.999);
    let depth = run_in(&dir.path().join("c"), Command::Efficiency, None, 0, &["device.max_phase_rad=3.0,4.0,5.0,6.0"]);
    let e = first(&depth);
    assert!(e.windows(2).all(|p| p[1] > p[0]), "{e:?}");
}

#[test]
fn exit_codes_separate_failure_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let bad_key = dir.path().join("bad_key.json");
    fs::write(&bad_key, r#"{ "hologram": { "charge": 2 } }"#).unwrap();
    assert_eq!(binary(&["hologram", "--config", bad_key.to_str().unwrap()], &dir.path().join("o1")), 2);

    let far = dir.path().join("far.json");
    fs::write(
        &far,
        r#"{ "grid": { "nx": 128, "ny": 128 }, "beam": { "waist_m": 0.3e-3 },
             "hologram": { "lens_focal_mm": null }, "propagation": { "distance_m": 5.0 } }"#,
    )
    .unwrap();
    assert_eq!(binary(&["beam", "--config", far.to_str().unwrap()], &dir.path().join("o2")), 2);

    let args = ["efficiency", "--sweep", "device.max_phase_rad=5,6", "--sweep", "device.reflectivity=1"];
    assert_eq!(binary(&args, &dir.path().join("o3")), 2);

    let missing = dir.path().join("missing.json");
    assert_eq!(binary(&["efficiency", "--config", missing.to_str().unwrap()], &dir.path().join("o4")), 4);

    let negative = dir.path().join("neg.json");
    fs::write(&negative, r#"{ "beam": { "waist_m": -1.0 } }"#).unwrap();
    assert_eq!(binary(&["beam", "--config", negative.to_str().unwrap()], &dir.path().join("o5")), 2);

    assert_eq!(binary(&["efficiency"], &dir.path().join("o6")), 0);
}
