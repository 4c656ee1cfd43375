//! Per-sample feature records: the seven metered quantities plus four
//! descriptors of the phase-a stator current spectrum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SignalError;
use crate::fault::{label_of, FaultLabel, FaultScenario};
use crate::motor::TimeSeriesRun;
use crate::spectrum::{fft_real_with, spectral_features, FftPlan, SignalWindow, SpectralFeatures};

/// Column names of a feature record, in row order.
pub const FEATURE_NAMES: [&str; 11] = [
    "stator_current",
    "rotor_current",
    "input_power",
    "rotor_frequency",
    "rotor_speed",
    "induced_torque",
    "efficiency",
    "spectral_dominant_freq",
    "spectral_dominant_mag",
    "low_freq_energy_ratio",
    "thd",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub stator_current: f64,
    pub rotor_current: f64,
    pub input_power: f64,
    pub rotor_frequency: f64,
    pub rotor_speed: f64,
    pub induced_torque: f64,
    pub efficiency: f64,
    pub spectral_dominant_freq: f64,
    pub spectral_dominant_mag: f64,
    pub low_freq_energy_ratio: f64,
    pub thd: f64,
    pub label: FaultLabel,
}

impl FeatureRecord {
    pub fn to_row(&self) -> Vec<f64> {
        vec![
            self.stator_current,
            self.rotor_current,
            self.input_power,
            self.rotor_frequency,
            self.rotor_speed,
            self.induced_torque,
            self.efficiency,
            self.spectral_dominant_freq,
            self.spectral_dominant_mag,
            self.low_freq_energy_ratio,
            self.thd,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Trailing window length in samples.
    pub window_len: usize,
    /// FFT length after zero padding.
    pub fft_len: usize,
    /// Supply frequency, Hz.
    pub fundamental: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            window_len: 1024,
            fft_len: 2048,
            fundamental: 60.0,
        }
    }
}

/// Start index of the trailing window that ends at sample `i`. Samples
/// earlier than one full window share the first full window.
pub fn window_start(i: usize, window_len: usize) -> usize {
    (i + 1).saturating_sub(window_len)
}

/// Spectral descriptors of the Hann-tapered trailing window of `channel`
/// ending at sample `end`.
pub fn trailing_spectrum_features(
    plan: &FftPlan,
    channel: &[f64],
    end: usize,
    sample_rate: f64,
    config: &FeatureConfig,
    slip: f64,
) -> Result<SpectralFeatures, SignalError> {
    let start = window_start(end, config.window_len);
    let window = SignalWindow::new(
        channel[start..start + config.window_len].to_vec(),
        sample_rate,
    )?;
    let spectrum = fft_real_with(plan, &window.hann())?;
    spectral_features(&spectrum, config.fundamental, slip)
}

/// One feature record per run sample, in sample order.
pub fn featurize_run(
    run: &TimeSeriesRun,
    scenario: &FaultScenario,
    config: &FeatureConfig,
) -> Result<Vec<FeatureRecord>, SignalError> {
    featurize_range(run, scenario, config, 0..run.len())
}

/// Feature records for the samples in `range` only.
pub fn featurize_range(
    run: &TimeSeriesRun,
    scenario: &FaultScenario,
    config: &FeatureConfig,
    range: std::ops::Range<usize>,
) -> Result<Vec<FeatureRecord>, SignalError> {
    if config.window_len < 2 || run.len() < config.window_len {
        return Err(SignalError::RunTooShort {
            available: run.len(),
            required: config.window_len.max(2),
        });
    }
    if range.end > run.len() {
        return Err(SignalError::ShapeMismatch(format!(
            "range end {} beyond run of {} samples",
            range.end,
            run.len()
        )));
    }
    let plan = FftPlan::new(config.fft_len)?;
    let current = run.stator_current_a();
    let label = label_of(scenario);

    // Samples before the first full window all share it.
    let shared = if range.start < config.window_len {
        Some(trailing_spectrum_features(
            &plan,
            &current,
            config.window_len - 1,
            run.sample_rate,
            config,
            0.0,
        )?)
    } else {
        None
    };

    range
        .into_par_iter()
        .map(|i| {
            let s = &run.samples[i];
            let spectral = match shared {
                Some(f) if i < config.window_len => f,
                _ => trailing_spectrum_features(&plan, &current, i, run.sample_rate, config, 0.0)?,
            };
            Ok(FeatureRecord {
                stator_current: s.stator_current_rms,
                rotor_current: s.rotor_current_rms_referred,
                input_power: s.input_power,
                rotor_frequency: s.rotor_frequency,
                rotor_speed: s.rotor_speed,
                induced_torque: s.electromagnetic_torque,
                efficiency: s.efficiency,
                spectral_dominant_freq: spectral.dominant_freq,
                spectral_dominant_mag: spectral.dominant_mag,
                low_freq_energy_ratio: spectral.low_freq_energy_ratio,
                thd: spectral.thd,
                label,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motor::{simulate, MotorParameters, SimulationSettings};

    #[test]
    fn window_start_rule() {
        assert_eq!(window_start(0, 1024), 0);
        assert_eq!(window_start(1023, 1024), 0);
        assert_eq!(window_start(1024, 1024), 1);
        assert_eq!(window_start(9999, 1024), 8976);
    }

    #[test]
    fn short_run_is_rejected() {
        let p = MotorParameters::default();
        let settings = SimulationSettings {
            duration: 0.1,
            ..Default::default()
        };
        let run = simulate(&p, &FaultScenario::healthy(), 0.0, &settings, 0).unwrap();
        let r = featurize_run(&run, &FaultScenario::healthy(), &FeatureConfig::default());
        assert!(matches!(
            r,
            Err(SignalError::RunTooShort { available: 200, .. })
        ));
    }

    #[test]
    fn records_follow_samples() {
        let p = MotorParameters::default();
        let settings = SimulationSettings {
            duration: 1.0,
            ..Default::default()
        };
        let run = simulate(&p, &FaultScenario::healthy(), 15.0, &settings, 2).unwrap();
        let config = FeatureConfig::default();
        let recs = featurize_run(&run, &FaultScenario::healthy(), &config).unwrap();
        assert_eq!(recs.len(), run.len());
        assert_eq!(
            recs[0].spectral_dominant_mag,
            recs[1023].spectral_dominant_mag
        );
        assert_ne!(
            recs[1023].spectral_dominant_mag,
            recs[1999].spectral_dominant_mag
        );
        for (r, s) in recs.iter().zip(&run.samples) {
            assert_eq!(r.rotor_speed, s.rotor_speed);
            assert_eq!(r.label.value(), 0);
            assert!((0.0..=1.0).contains(&r.low_freq_energy_ratio));
            assert!(r.to_row().iter().all(|v| v.is_finite()));
        }
        let again = featurize_run(&run, &FaultScenario::healthy(), &config).unwrap();
        assert_eq!(recs, again);
        let tail = featurize_range(&run, &FaultScenario::healthy(), &config, 1500..2000).unwrap();
        assert_eq!(&recs[1500..], &tail[..]);
    }
}
