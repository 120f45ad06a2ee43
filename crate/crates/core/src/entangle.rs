//! Two-photon OAM states and coincidence predictions for analyzer pairs.

use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::analysis::{analyzer_amplitude, csv_err, AnalyzerSetting, ModeSorter};
use crate::error::{Error, Result};
use crate::grid::ComplexField;
use crate::par;

/// `Σ_l c_l |l⟩_signal |−l⟩_idler` for `l ∈ [−max_l, max_l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonState {
    max_l: i32,
    amplitudes: Vec<Complex64>,
}

impl TwoPhotonState {
    /// Amplitudes for `l = −max_l ..= max_l`, rescaled to unit norm.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len().is_multiple_of(2) {
            return Err(Error::Shape(format!(
                "state needs an odd number of amplitudes centered on l = 0, got {}",
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::DegenerateInput("state amplitudes are all zero".into()));
        }
        let max_l = (amplitudes.len() / 2) as i32;
        Ok(Self { max_l, amplitudes: amplitudes.into_iter().map(|c| c / norm).collect() })
    }

    /// Maximally entangled qutrit, `l ∈ {−1, 0, +1}`.
    pub fn qutrit() -> Self {
        Self::new(vec![Complex64::new(1.0, 0.0); 3]).expect("nonzero amplitudes")
    }

    /// Separable `|0⟩|0⟩`.
    pub fn product() -> Self {
        Self::new(vec![Complex64::new(1.0, 0.0)]).expect("nonzero amplitudes")
    }

    /// `|c_l| ∝ exp(−l²/(2·width²))`, real and positive.
    pub fn gaussian(max_l: i32, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) || max_l < 0 {
            return Err(Error::Domain(format!(
                "gaussian spectrum needs width > 0 and max_l ≥ 0, got {width}, {max_l}"
            )));
        }
        Self::new(
            (-max_l..=max_l).map(|l| Complex64::new((-(l * l) as f64 / (2.0 * width * width)).exp(), 0.0)).collect(),
        )
    }

    pub fn max_l(&self) -> i32 {
        self.max_l
    }

    pub fn amplitude(&self, l: i32) -> Complex64 {
        if l.abs() > self.max_l {
            return Complex64::new(0.0, 0.0);
        }
        self.amplitudes[(l + self.max_l) as usize]
    }

    pub fn with_global_phase(&self, phase: f64) -> Self {
        let f = Complex64::from_polar(1.0, phase);
        Self { max_l: self.max_l, amplitudes: self.amplitudes.iter().map(|c| c * f).collect() }
    }
}

/// One hologram in an arm, drawn on the SLM path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlmSetting {
    pub charge: i32,
    pub displacement: (f64, f64),
}

impl SlmSetting {
    pub fn centered(charge: i32) -> Self {
        Self { charge, displacement: (0.0, 0.0) }
    }

    fn mirrored(&self) -> Self {
        Self { charge: -self.charge, displacement: (self.displacement.0, -self.displacement.1) }
    }
}

/// Fixed analyzer with a display label.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupler {
    pub label: String,
    pub setting: AnalyzerSetting,
}

impl Coupler {
    pub fn new(label: impl Into<String>, setting: AnalyzerSetting) -> Self {
        Self { label: label.into(), setting }
    }

    fn mirrored(&self) -> Self {
        let s = self.setting;
        Self {
            label: self.label.clone(),
            setting: AnalyzerSetting {
                hologram_charge: -s.hologram_charge,
                hologram_displacement: (s.hologram_displacement.0, -s.hologram_displacement.1),
                fiber_mode: s.fiber_mode,
            },
        }
    }
}

/// Holograms a photon meets before its couplers, in order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Arm {
    pub transforms: Vec<SlmSetting>,
    pub couplers: Vec<Coupler>,
}

impl Arm {
    fn net_charge(&self) -> i32 {
        self.transforms.iter().map(|t| t.charge).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Each arm amplitude is divided by the amplitude its analyzer chain
    /// gives the mode it nominally detects, with centered holograms and a
    /// matched fiber. Removes hologram and fiber insertion loss.
    #[default]
    Conditioned,
    /// Simulated amplitudes as they are, including device efficiency.
    Raw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Grid, photon mode waist, SLM path and matched fiber.
    pub optics: ModeSorter,
    pub state: TwoPhotonState,
    pub signal: Arm,
    pub idler: Arm,
    pub normalization: Normalization,
}

impl ExperimentConfig {
    /// The four-coupler qutrit measurement: signal couplers "2" (charge 0)
    /// and "3" (charge −1), idler couplers "5" (charge 0) and "6" (charge +1),
    /// with the SLM acting on the idler photon.
    pub fn qutrit_couplers(optics: ModeSorter) -> Self {
        let fiber = optics.fiber;
        let coupler = |label: &str, charge| Coupler::new(label, AnalyzerSetting::centered(charge, fiber));
        Self {
            optics,
            state: TwoPhotonState::qutrit(),
            signal: Arm { transforms: vec![], couplers: vec![coupler("2", 0), coupler("3", -1)] },
            idler: Arm { transforms: vec![], couplers: vec![coupler("5", 0), coupler("6", 1)] },
            normalization: Normalization::Conditioned,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.signal.couplers.is_empty() || self.idler.couplers.is_empty() {
            return Err(Error::Configuration("each arm needs at least one coupler".into()));
        }
        Ok(())
    }

    /// Rescales every signal fiber waist by `ratio` relative to the idler
    /// fibers; `1` is a matched setup.
    pub fn with_fiber_mismatch(mut self, ratio: f64) -> Result<Self> {
        for c in &mut self.signal.couplers {
            c.setting.fiber_mode = c.setting.fiber_mode.with_waist(ratio * c.setting.fiber_mode.w0())?;
        }
        Ok(self)
    }

    /// Signal and idler exchanged, with every hologram mirrored (`y → −y`),
    /// which negates its charge.
    pub fn swapped(&self) -> Self {
        let mirror = |arm: &Arm| Arm {
            transforms: arm.transforms.iter().map(SlmSetting::mirrored).collect(),
            couplers: arm.couplers.iter().map(Coupler::mirrored).collect(),
        };
        Self { signal: mirror(&self.idler), idler: mirror(&self.signal), ..self.clone() }
    }

    fn chain(&self, mut field: ComplexField, transforms: &[SlmSetting]) -> Result<ComplexField> {
        for t in transforms {
            field = self.optics.path.transform(&field, t.charge, t.displacement)?;
        }
        Ok(field)
    }

    /// `[coupler][l + max_l]` amplitudes for photon modes `l` entering `arm`.
    fn arm_amplitudes(&self, arm: &Arm) -> Result<Vec<Vec<Complex64>>> {
        let max_l = self.state.max_l;
        let width = (2 * max_l + 1) as usize;
        let inputs: Vec<ComplexField> =
            par::map_range(width, |k| self.chain(self.optics.source_field(k as i32 - max_l), &arm.transforms))
                .into_iter()
                .collect::<Result<_>>()?;
        let n = arm.couplers.len();
        let flat: Vec<Complex64> = par::map_range(n * width, |k| {
            analyzer_amplitude(&inputs[k % width], &arm.couplers[k / width].setting, &self.optics.path)
        })
        .into_iter()
        .collect::<Result<_>>()?;
        let mut rows: Vec<Vec<Complex64>> = flat.chunks(width).map(<[_]>::to_vec).collect();
        if self.normalization == Normalization::Conditioned {
            let refs = par::map_range(n, |c| self.reference_amplitude(arm, &arm.couplers[c]))
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            for (row, r) in rows.iter_mut().zip(refs) {
                row.iter_mut().for_each(|a| *a /= r);
            }
        }
        Ok(rows)
    }

    fn reference_amplitude(&self, arm: &Arm, coupler: &Coupler) -> Result<f64> {
        let nominal = -(arm.net_charge() + coupler.setting.hologram_charge);
        let centered: Vec<SlmSetting> = arm.transforms.iter().map(|t| SlmSetting::centered(t.charge)).collect();
        let field = self.chain(self.optics.source_field(nominal), &centered)?;
        let setting = AnalyzerSetting::centered(coupler.setting.hologram_charge, self.optics.fiber);
        let r = analyzer_amplitude(&field, &setting, &self.optics.path)?.norm();
        if r < 1e-9 {
            return Err(Error::DegenerateInput(format!(
                "coupler {} does not couple its nominal mode {nominal}",
                coupler.label
            )));
        }
        Ok(r)
    }

    /// Probabilities for every `(signal coupler, idler coupler)` pair,
    /// indexed `[signal][idler]`.
    pub fn coincidences(&self) -> Result<Vec<Vec<f64>>> {
        self.validate()?;
        let a_s = self.arm_amplitudes(&self.signal)?;
        let a_i = self.arm_amplitudes(&self.idler)?;
        let max_l = self.state.max_l;
        Ok(a_s
            .iter()
            .map(|s| {
                a_i.iter()
                    .map(|i| {
                        (-max_l..=max_l)
                            .map(|l| self.state.amplitude(l) * s[(l + max_l) as usize] * i[(max_l - l) as usize])
                            .sum::<Complex64>()
                            .norm_sqr()
                    })
                    .collect()
            })
            .collect())
    }
}

/// `|Σ_l c_l A_signal(l) A_idler(−l)|²` for one coupler pair.
pub fn coincidence_probability(config: &ExperimentConfig, signal_coupler: usize, idler_coupler: usize) -> Result<f64> {
    let (ns, ni) = (config.signal.couplers.len(), config.idler.couplers.len());
    if signal_coupler >= ns || idler_coupler >= ni {
        return Err(Error::Domain(format!(
            "coupler pair ({signal_coupler}, {idler_coupler}) out of range for {ns} signal and {ni} idler couplers"
        )));
    }
    Ok(config.coincidences()?[signal_coupler][idler_coupler])
}

/// Coincidence probabilities per coupler pair for a sweep of SLM settings
/// appended to the idler arm.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    /// `(signal label, idler label, signal charge, idler charge)` per row.
    pub channels: Vec<Channel>,
    pub settings: Vec<SlmSetting>,
    /// `[channel][setting]`
    pub probabilities: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub signal: String,
    pub idler: String,
    pub signal_charge: i32,
    pub idler_charge: i32,
}

impl Channel {
    /// Total OAM detected for an SLM charge `t` on the idler arm.
    pub fn l_total(&self, slm_charge: i32) -> i32 {
        -(self.signal_charge + slm_charge + self.idler_charge)
    }
}

pub fn correlation_table(config: &ExperimentConfig, settings: &[SlmSetting]) -> Result<CorrelationTable> {
    config.validate()?;
    let mut channels = Vec::new();
    for s in &config.signal.couplers {
        for i in &config.idler.couplers {
            channels.push(Channel {
                signal: s.label.clone(),
                idler: i.label.clone(),
                signal_charge: s.setting.hologram_charge,
                idler_charge: i.setting.hologram_charge + config.idler.net_charge(),
            });
        }
    }
    let mut probabilities = vec![Vec::with_capacity(settings.len()); channels.len()];
    for setting in settings {
        let mut c = config.clone();
        c.idler.transforms.push(*setting);
        for (row, p) in probabilities.iter_mut().zip(c.coincidences()?.into_iter().flatten()) {
            row.push(p);
        }
    }
    Ok(CorrelationTable { channels, settings: settings.to_vec(), probabilities })
}

/// SLM charges `−1, 0, +1`, centered.
pub fn qutrit_sweep() -> Vec<SlmSetting> {
    (-1..=1).map(SlmSetting::centered).collect()
}

pub fn qutrit_correlation_table(config: &ExperimentConfig) -> Result<CorrelationTable> {
    correlation_table(config, &qutrit_sweep())
}

impl CorrelationTable {
    /// `(max − min)/(max + min)` of one channel over the sweep.
    pub fn visibility(&self, channel: usize) -> Result<f64> {
        let row = self
            .probabilities
            .get(channel)
            .ok_or_else(|| Error::Domain(format!("no channel {channel} in a table of {}", self.probabilities.len())))?;
        if row.len() < 2 {
            return Err(Error::Shape("visibility needs at least two settings".into()));
        }
        visibility(row)
    }

    /// Poisson counts with mean `pairs · P` per entry, drawn in row-major
    /// order from a ChaCha8 stream seeded with `seed`.
    pub fn sample_counts(&self, pairs: f64, seed: u64) -> Result<Vec<Vec<u64>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.probabilities
            .iter()
            .map(|row| {
                row.iter()
                    .map(|p| {
                        let mean = pairs * p;
                        if mean <= 0.0 {
                            return Ok(0);
                        }
                        let d = Poisson::new(mean).map_err(|e| Error::Domain(format!("count mean {mean}: {e}")))?;
                        Ok(d.sample(&mut rng) as u64)
                    })
                    .collect()
            })
            .collect()
    }

    /// One line per (channel, setting); a `counts` column when given.
    pub fn write_csv<W: Write>(&self, out: W, counts: Option<&[Vec<u64>]>) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["signal", "idler", "slm_charge", "slm_x0_m", "slm_y0_m", "l_total", "probability"];
        if counts.is_some() {
            header.push("counts");
        }
        w.write_record(&header).map_err(csv_err)?;
        for (c, ch) in self.channels.iter().enumerate() {
            for (s, set) in self.settings.iter().enumerate() {
                let mut rec = vec![
                    ch.signal.clone(),
                    ch.idler.clone(),
                    set.charge.to_string(),
                    format!("{:e}", set.displacement.0),
                    format!("{:e}", set.displacement.1),
                    ch.l_total(set.charge).to_string(),
                    format!("{:.12e}", self.probabilities[c][s]),
                ];
                if let Some(counts) = counts {
                    rec.push(counts[c][s].to_string());
                }
                w.write_record(&rec).map_err(csv_err)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// `(max − min)/(max + min)`.
pub fn visibility(values: &[f64]) -> Result<f64> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if max.is_nan() || max <= 0.0 {
        return Err(Error::DegenerateInput("visibility of an all-zero channel is undefined".into()));
    }
    Ok((max - min) / (max + min))
}
