use serde_json::{json, Value};

use super::config::RunConfig;
use crate::analysis::oam_spectrum;
use crate::entangle::correlation_table;
use crate::error::{Error, Result};
use crate::export::{encode_pgm, encode_png, intensity_image, OutputDir};
use crate::hologram::{apply_hologram, order_efficiency, render, singularities, DeviceModel, HologramSpec};
use crate::lg::lg_field;
use crate::propagation::{isolate_order, propagate, OrderFilter};

pub fn hologram(cfg: &RunConfig, out: &mut OutputDir, prefix: &str) -> Result<Value> {
    let spec = cfg.hologram_spec()?;
    let image = render(&spec, &cfg.slm_grid()?);
    out.write(&format!("{prefix}.pgm"), &encode_pgm(&image))?;
    out.write(&format!("{prefix}.png"), &encode_png(&image)?)?;
    Ok(json!({
        "width": image.width(),
        "height": image.height(),
        "singularities": singularities(&image).len(),
    }))
}

/// Refuses order isolation when the lens and mode spectra would spill
/// past the first-order filter.
fn check_order_separation(spec: &HologramSpec, cfg: &RunConfig, filter: &OrderFilter) -> Result<()> {
    let beam = cfg.beam()?;
    let w = beam.w0();
    let lens_only = HologramSpec { grating: (0.0, 0.0), ..*spec };
    let lens_spread = lens_only.max_smooth_gradient((0.0, 0.0), 2.0 * w);
    let l_out = (cfg.beam.l + spec.l).unsigned_abs() as f64 + 2.0 * cfg.beam.p as f64;
    let mode_spread = 2.0 * (2.0 * (l_out + 1.0)).sqrt() / w;
    if lens_spread + mode_spread > filter.radius {
        return Err(Error::Configuration(format!(
            "first and zeroth orders overlap in the spatial-frequency plane: beam spread {:.4e} rad/m \
             exceeds the filter radius {:.4e} rad/m; raise the grating tilt, lengthen the lens focal \
             length or disable propagation.isolate_first_order",
            lens_spread + mode_spread,
            filter.radius
        )));
    }
    Ok(())
}

pub fn beam(cfg: &RunConfig, out: &mut OutputDir, prefix: &str) -> Result<Value> {
    let sim = cfg.sim_grid()?;
    let source = lg_field(&sim, 0.0, cfg.mode(), &cfg.beam()?, (0.0, 0.0));
    let spec = cfg.hologram_spec()?;
    let image = render(&spec, &cfg.slm_grid()?);
    let mut field = apply_hologram(&source, &image, &cfg.slm_grid()?, &cfg.device()?, cfg.placement())?;
    if cfg.propagation.isolate_first_order && spec.grating != (0.0, 0.0) {
        let filter = OrderFilter::first_order(spec.grating)?;
        check_order_separation(&spec, cfg, &filter)?;
        field = isolate_order(&field, &filter)?;
    }
    let field = propagate(&field, &cfg.plan())?;
    let img = intensity_image(&field);
    out.write(&format!("{prefix}.png"), &encode_png(&img)?)?;
    out.write(&format!("{prefix}.pgm"), &encode_pgm(&img))?;

    let center = field.centroid().ok_or_else(|| Error::DegenerateInput("propagated field carries no power".into()))?;
    let spectrum = oam_spectrum(&field, center, cfg.analysis.max_l)?;
    let mut csv = Vec::new();
    spectrum.write_csv(&mut csv)?;
    out.write(&format!("{prefix}_spectrum.csv"), &csv)?;
    let target = cfg.beam.l + spec.l;
    Ok(json!({
        "centroid_m": [center.0, center.1],
        "radius_m": field.second_moment_radius().map(|r| [r.0, r.1]),
        "argmax_l": spectrum.argmax(),
        "target_l": target,
        "target_weight": spectrum.weight(target),
        "power": crate::grid::total_power(&field),
    }))
}

pub fn correlate(cfg: &RunConfig, out: &mut OutputDir, prefix: &str, seed: u64) -> Result<Value> {
    let exp = cfg.experiment_config()?;
    let table = correlation_table(&exp, &cfg.slm_settings()?)?;
    let counts = match cfg.experiment.counts_pairs {
        Some(pairs) => Some(table.sample_counts(pairs, seed)?),
        None => None,
    };
    let mut csv = Vec::new();
    table.write_csv(&mut csv, counts.as_deref())?;
    out.write(&format!("{prefix}.csv"), &csv)?;

    let mut vis = csv::Writer::from_writer(Vec::new());
    let mut summary = Vec::new();
    vis.write_record(["signal", "idler", "visibility"]).map_err(crate::analysis::csv_err)?;
    for (k, ch) in table.channels.iter().enumerate() {
        let v = if table.settings.len() >= 2 { table.visibility(k).ok() } else { None };
        let text = v.map(|v| format!("{v:.12e}")).unwrap_or_default();
        vis.write_record([ch.signal.as_str(), ch.idler.as_str(), text.as_str()]).map_err(crate::analysis::csv_err)?;
        summary.push(json!({ "signal": ch.signal, "idler": ch.idler, "visibility": v }));
    }
    let vis = vis.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    out.write(&format!("{prefix}_visibility.csv"), &vis)?;
    Ok(json!({ "channels": summary }))
}

pub fn efficiency(cfg: &RunConfig, out: &mut OutputDir, prefix: &str) -> Result<Value> {
    let device = cfg.device()?;
    let ideal = DeviceModel::ideal();
    let levels = device.gray_levels as usize;
    let m = cfg.efficiency.max_order.max(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["order", "device", "ideal"]).map_err(crate::analysis::csv_err)?;
    let mut orders = Vec::new();
    for order in -m..=m {
        let a = order_efficiency(&device, levels, order);
        let b = order_efficiency(&ideal, 256, order);
        orders.push(json!({ "order": order, "device": a, "ideal": b }));
        w.write_record([order.to_string(), format!("{a:.12e}"), format!("{b:.12e}")])
            .map_err(crate::analysis::csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    out.write(&format!("{prefix}.csv"), &bytes)?;
    let first = order_efficiency(&device, levels, 1);
    Ok(json!({
        "first_order": first,
        "first_order_ideal": order_efficiency(&ideal, 256, 1),
        "orders": orders,
    }))
}
