//! Radix-2 FFT of real signals and the spectral descriptors derived from it.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::SignalError;

/// A finite real-valued signal with its sample rate.
///
/// `coherent_gain` is the mean of the taper applied to the samples (1 for an
/// untapered window); amplitude normalization divides it out.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalWindow {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    pub coherent_gain: f64,
}

impl SignalWindow {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self, SignalError> {
        if samples.len() < 2 {
            return Err(SignalError::EmptyWindow);
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(SignalError::NonFiniteSample(i));
        }
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(SignalError::ShapeMismatch(format!(
                "sample rate must be > 0, got {sample_rate}"
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
            coherent_gain: 1.0,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Copy tapered by a periodic Hann window.
    pub fn hann(&self) -> Self {
        let n = self.samples.len() as f64;
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, &x)| x * 0.5 * (1.0 - (TAU * i as f64 / n).cos()))
            .collect();
        Self {
            samples,
            sample_rate: self.sample_rate,
            coherent_gain: self.coherent_gain * 0.5,
        }
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum()
    }
}

/// Precomputed twiddles and bit-reversal permutation for one FFT length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    twiddles: Vec<Complex64>,
    reversed: Vec<usize>,
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self, SignalError> {
        if len < 2 || !len.is_power_of_two() {
            return Err(SignalError::ShapeMismatch(format!(
                "FFT length must be a power of two >= 2, got {len}"
            )));
        }
        let bits = len.trailing_zeros();
        let reversed = (0..len)
            .map(|i| i.reverse_bits() >> (usize::BITS - bits))
            .collect();
        let twiddles = (0..len / 2)
            .map(|k| Complex64::from_polar(1.0, -TAU * k as f64 / len as f64))
            .collect();
        Ok(Self {
            len,
            twiddles,
            reversed,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place forward transform, `X_k = Σ x_n e^{-2πikn/N}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, false);
    }

    /// In-place inverse transform including the 1/N factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, true);
        let scale = 1.0 / self.len as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.len, "buffer length must match the plan");
        for i in 0..self.len {
            let j = self.reversed[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= self.len {
            let half = size / 2;
            let stride = self.len / size;
            for start in (0..self.len).step_by(size) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let t = w * data[start + k + half];
                    let u = data[start + k];
                    data[start + k] = u + t;
                    data[start + k + half] = u - t;
                }
            }
            size *= 2;
        }
    }
}

/// One-sided spectrum of a real window.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Complex bins 0..=N/2 of the zero-padded transform.
    pub bins: Vec<Complex64>,
    pub bin_frequencies: Vec<f64>,
    /// Amplitude-normalized magnitudes: a unit sinusoid on a bin reads 1.
    pub magnitudes: Vec<f64>,
    /// Bin spacing, Hz.
    pub resolution: f64,
    pub fft_len: usize,
    pub signal_len: usize,
    pub sample_rate: f64,
    pub coherent_gain: f64,
}

impl Spectrum {
    fn one_sided_weight(&self, k: usize) -> f64 {
        if k == 0 || 2 * k == self.fft_len {
            1.0
        } else {
            2.0
        }
    }

    /// Share of the padded window's energy carried by bin `k`.
    pub fn bin_energy(&self, k: usize) -> f64 {
        self.one_sided_weight(k) * self.bins[k].norm_sqr() / self.fft_len as f64
    }

    /// Parseval energy; equals the sum of squares of the padded window.
    pub fn energy(&self) -> f64 {
        (0..self.bins.len()).map(|k| self.bin_energy(k)).sum()
    }

    /// Bin closest to `freq`.
    pub fn nearest_bin(&self, freq: f64) -> usize {
        ((freq / self.resolution).round().max(0.0) as usize).min(self.bins.len() - 1)
    }

    pub fn magnitude_at(&self, freq: f64) -> f64 {
        self.magnitudes[self.nearest_bin(freq)]
    }

    /// Median magnitude, used as the spectral floor.
    pub fn median_magnitude(&self) -> f64 {
        let mut m = self.magnitudes.clone();
        m.sort_by(f64::total_cmp);
        let n = m.len();
        if n % 2 == 1 {
            m[n / 2]
        } else {
            0.5 * (m[n / 2 - 1] + m[n / 2])
        }
    }
}

/// Transform with the smallest power-of-two length that holds the window.
pub fn fft_real(window: &SignalWindow) -> Result<Spectrum, SignalError> {
    let len = window.len().max(2).next_power_of_two();
    fft_real_padded(window, len)
}

/// Transform after zero-padding the window to `fft_len` samples.
pub fn fft_real_padded(window: &SignalWindow, fft_len: usize) -> Result<Spectrum, SignalError> {
    let plan = FftPlan::new(fft_len)?;
    fft_real_with(&plan, window)
}

pub fn fft_real_with(plan: &FftPlan, window: &SignalWindow) -> Result<Spectrum, SignalError> {
    if window.len() < 2 {
        return Err(SignalError::EmptyWindow);
    }
    let n = plan.len();
    if window.len() > n {
        return Err(SignalError::ShapeMismatch(format!(
            "window of {} samples does not fit an FFT of {n}",
            window.len()
        )));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (b, &x) in buf.iter_mut().zip(&window.samples) {
        b.re = x;
    }
    plan.forward(&mut buf);
    buf.truncate(n / 2 + 1);

    let resolution = window.sample_rate / n as f64;
    let norm = 1.0 / (window.len() as f64 * window.coherent_gain);
    let magnitudes = buf
        .iter()
        .enumerate()
        .map(|(k, x)| {
            let w = if k == 0 || 2 * k == n { 1.0 } else { 2.0 };
            w * x.norm() * norm
        })
        .collect();
    Ok(Spectrum {
        bin_frequencies: (0..=n / 2).map(|k| k as f64 * resolution).collect(),
        bins: buf,
        magnitudes,
        resolution,
        fft_len: n,
        signal_len: window.len(),
        sample_rate: window.sample_rate,
        coherent_gain: window.coherent_gain,
    })
}

/// Rebuilds the zero-padded window from its retained complex bins.
pub fn inverse_fft_real(spectrum: &Spectrum) -> Result<SignalWindow, SignalError> {
    let n = spectrum.fft_len;
    if spectrum.bins.len() != n / 2 + 1 {
        return Err(SignalError::ShapeMismatch(format!(
            "{} bins cannot come from an FFT of {n}",
            spectrum.bins.len()
        )));
    }
    let plan = FftPlan::new(n)?;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[..=n / 2].copy_from_slice(&spectrum.bins);
    for k in 1..n / 2 {
        buf[n - k] = spectrum.bins[k].conj();
    }
    plan.inverse(&mut buf);
    Ok(SignalWindow {
        samples: buf.iter().map(|c| c.re).collect(),
        sample_rate: spectrum.sample_rate,
        coherent_gain: spectrum.coherent_gain,
    })
}

/// Frequencies below this count as low-frequency energy, Hz.
pub const LOW_FREQUENCY_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpectralFeatures {
    pub dominant_freq: f64,
    pub dominant_mag: f64,
    /// Energy below [`LOW_FREQUENCY_LIMIT`] over total energy.
    pub low_freq_energy_ratio: f64,
    /// Harmonics 2 through 10 relative to the fundamental.
    pub thd: f64,
    /// Magnitude at `(1 − 2s)·f`.
    pub sideband_lower_mag: f64,
    /// Magnitude at `(1 + 2s)·f`.
    pub sideband_upper_mag: f64,
}

/// Descriptors of a current spectrum around the supply `fundamental`.
///
/// An all-zero spectrum yields all-zero features.
pub fn spectral_features(
    spectrum: &Spectrum,
    fundamental: f64,
    slip: f64,
) -> Result<SpectralFeatures, SignalError> {
    let nyquist = spectrum.sample_rate / 2.0;
    if !(fundamental > 0.0 && fundamental <= nyquist) {
        return Err(SignalError::ShapeMismatch(format!(
            "fundamental {fundamental} Hz outside (0, {nyquist}] Hz"
        )));
    }
    let total = spectrum.energy();
    if total <= 0.0 {
        return Ok(SpectralFeatures::default());
    }

    let mut best = 0;
    for (k, &m) in spectrum.magnitudes.iter().enumerate() {
        if m > spectrum.magnitudes[best] {
            best = k;
        }
    }

    let low: f64 = (0..spectrum.bins.len())
        .take_while(|&k| spectrum.bin_frequencies[k] < LOW_FREQUENCY_LIMIT)
        .map(|k| spectrum.bin_energy(k))
        .sum();

    let fund = spectrum.magnitude_at(fundamental);
    let thd = if fund > 0.0 {
        let harmonics: f64 = (2..=10)
            .map(|h| h as f64 * fundamental)
            .filter(|&f| f <= nyquist)
            .map(|f| spectrum.magnitude_at(f).powi(2))
            .sum();
        harmonics.sqrt() / fund
    } else {
        0.0
    };

    Ok(SpectralFeatures {
        dominant_freq: spectrum.bin_frequencies[best],
        dominant_mag: spectrum.magnitudes[best],
        low_freq_energy_ratio: (low / total).clamp(0.0, 1.0),
        thd,
        sideband_lower_mag: spectrum.magnitude_at((1.0 - 2.0 * slip) * fundamental),
        sideband_upper_mag: spectrum.magnitude_at((1.0 + 2.0 * slip) * fundamental),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn naive_dft(x: &[f64], n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, &v)| v * Complex64::from_polar(1.0, -TAU * (k * j) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    fn tone(freq: f64, amp: f64, rate: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| amp * (2.0 * PI * freq * i as f64 / rate).sin())
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let x: Vec<f64> = (0..16).map(|i| ((i * 7 % 5) as f64 - 2.0) * 0.3).collect();
        let s = fft_real(&SignalWindow::new(x.clone(), 1.0).unwrap()).unwrap();
        let oracle = naive_dft(&x, 16);
        for k in 0..=8 {
            assert!((s.bins[k] - oracle[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn impulse_has_flat_spectrum() {
        let mut x = vec![0.0; 8];
        x[0] = 1.0;
        let s = fft_real(&SignalWindow::new(x, 8.0).unwrap()).unwrap();
        assert_eq!(s.fft_len, 8);
        assert_eq!(s.bins.len(), 5);
        for b in &s.bins {
            assert!((b.norm() - 1.0).abs() < 1e-15);
        }
        for k in 1..4 {
            assert!((s.magnitudes[k] - s.magnitudes[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn sixty_hz_tone_with_hann_and_padding() {
        let w = SignalWindow::new(tone(60.0, 1.0, 2000.0, 1024), 2000.0)
            .unwrap()
            .hann();
        let s = fft_real_padded(&w, 2048).unwrap();
        let f = spectral_features(&s, 60.0, 0.0).unwrap();
        assert_eq!(s.nearest_bin(60.0), 61);
        assert_eq!(f.dominant_freq, s.bin_frequencies[61]);
        assert!((f.dominant_mag - 1.0).abs() < 0.05, "{}", f.dominant_mag);
        assert!(f.thd < 1e-3);
        assert!(f.low_freq_energy_ratio < 1e-6);
    }

    #[test]
    fn thd_of_second_harmonic() {
        let mut x = tone(60.0, 1.0, 2000.0, 1024);
        for (v, h) in x.iter_mut().zip(tone(120.0, 0.1, 2000.0, 1024)) {
            *v += h;
        }
        let w = SignalWindow::new(x, 2000.0).unwrap().hann();
        let f = spectral_features(&fft_real_padded(&w, 2048).unwrap(), 60.0, 0.0).unwrap();
        assert!((f.thd - 0.1).abs() < 0.01, "{}", f.thd);
    }

    #[test]
    fn zero_signal_has_zero_features() {
        let s = fft_real(&SignalWindow::new(vec![0.0; 64], 2000.0).unwrap()).unwrap();
        assert_eq!(
            spectral_features(&s, 60.0, 0.02).unwrap(),
            SpectralFeatures::default()
        );
        let back = inverse_fft_real(&s).unwrap();
        assert!(back.samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn argmax_ties_go_to_lowest_frequency() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let spec = Spectrum {
            bins: vec![zero, one, zero, one, zero],
            bin_frequencies: (0..5).map(|k| k as f64).collect(),
            magnitudes: vec![0.0, 0.25, 0.0, 0.25, 0.0],
            resolution: 1.0,
            fft_len: 8,
            signal_len: 8,
            sample_rate: 8.0,
            coherent_gain: 1.0,
        };
        let f = spectral_features(&spec, 1.0, 0.0).unwrap();
        assert_eq!(f.dominant_freq, 1.0);
    }

    #[test]
    fn single_bin_synthesizes_a_sinusoid() {
        let n = 32;
        let mut bins = vec![Complex64::new(0.0, 0.0); n / 2 + 1];
        bins[3] = Complex64::new(0.0, -(n as f64) / 2.0);
        let spec = Spectrum {
            bins,
            bin_frequencies: vec![],
            magnitudes: vec![],
            resolution: 1.0,
            fft_len: n,
            signal_len: n,
            sample_rate: n as f64,
            coherent_gain: 1.0,
        };
        let w = inverse_fft_real(&spec).unwrap();
        for (i, v) in w.samples.iter().enumerate() {
            let expected = (TAU * 3.0 * i as f64 / n as f64).sin();
            assert!((v - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_short_and_mismatched() {
        assert!(matches!(
            SignalWindow::new(vec![1.0], 1.0),
            Err(SignalError::EmptyWindow)
        ));
        assert!(SignalWindow::new(vec![1.0, f64::NAN], 1.0).is_err());
        assert!(FftPlan::new(12).is_err());
        let mut spec = fft_real(&SignalWindow::new(vec![1.0; 8], 8.0).unwrap()).unwrap();
        spec.bins.pop();
        assert!(matches!(
            inverse_fft_real(&spec),
            Err(SignalError::ShapeMismatch(_))
        ));
    }

    proptest! {
        #[test]
        fn parseval(x in prop::collection::vec(-100.0..100.0f64, 2..300)) {
            let w = SignalWindow::new(x, 1000.0).unwrap();
            let s = fft_real(&w).unwrap();
            let e = w.energy();
            prop_assume!(e > 1e-9);
            prop_assert!((s.energy() - e).abs() / e <= 1e-9);
        }

        #[test]
        fn round_trip(x in prop::collection::vec(-100.0..100.0f64, 2..300)) {
            let w = SignalWindow::new(x.clone(), 1000.0).unwrap();
            let back = inverse_fft_real(&fft_real(&w).unwrap()).unwrap();
            let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            for (i, v) in back.samples.iter().enumerate() {
                let orig = x.get(i).copied().unwrap_or(0.0);
                prop_assert!((v - orig).abs() / scale <= 1e-9);
            }
        }

        #[test]
        fn linearity(x in prop::collection::vec(-10.0..10.0f64, 64),
                     y in prop::collection::vec(-10.0..10.0f64, 64),
                     a in -3.0..3.0f64, b in -3.0..3.0f64) {
            let combo: Vec<f64> = x.iter().zip(&y).map(|(u, v)| a * u + b * v).collect();
            let fx = fft_real(&SignalWindow::new(x, 1.0).unwrap()).unwrap();
            let fy = fft_real(&SignalWindow::new(y, 1.0).unwrap()).unwrap();
            let fc = fft_real(&SignalWindow::new(combo, 1.0).unwrap()).unwrap();
            let scale = fc.bins.iter().chain(&fx.bins).chain(&fy.bins)
                .fold(1.0f64, |m, c| m.max(c.norm()));
            for k in 0..fc.bins.len() {
                let expect = fx.bins[k] * a + fy.bins[k] * b;
                prop_assert!((fc.bins[k] - expect).norm() / scale <= 1e-9);
            }
        }
    }
}
