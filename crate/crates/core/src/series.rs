//! Stroboscopic time series and their power spectra.
//!
//! The DFT convention is `F_k = sum_l f(l) exp(-i omega_k l)` with
//! `omega_k = 2*pi*k / T_len`, a plain rectangular window. For real input the
//! spectrum is symmetric about `omega = pi`, so peak searches and reporting
//! use the folded half `k = 0..=T_len/2`.

use rustfft::{num_complex::Complex64 as C64, FftPlanner};

use crate::error::{Error, Result};

/// Record of an observable sampled once per drive period, `l = 0..=t_max`.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub label: String,
    pub values: Vec<f64>,
    /// How many times the evolving state had to be renormalized (norm drift
    /// beyond 1e-8). Zero in ordinary runs; surfaced in run metadata.
    pub renormalizations: usize,
}

impl TimeSeries {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            values,
            renormalizations: 0,
        }
    }

    pub fn t_max(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `|F_k|^2` over the full bin range `k = 0..T_len-1`.
#[derive(Debug, Clone)]
pub struct PowerSpectrum {
    len: usize,
    power: Vec<f64>,
    normalized: bool,
}

impl PowerSpectrum {
    /// DFT length used for the spectrum.
    pub fn dft_len(&self) -> usize {
        self.len
    }

    pub fn omega(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * k as f64 / self.len as f64
    }

    /// One DFT bin width in angular frequency.
    pub fn bin_width(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.len as f64
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Index of the last folded bin (`omega <= pi`).
    pub fn folded_len(&self) -> usize {
        self.len / 2 + 1
    }

    /// `(omega_k, |F_k|^2)` over the folded range.
    pub fn folded_bins(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.folded_len()).map(|k| (self.omega(k), self.power[k]))
    }

    /// Scale so the largest bin is 1 (no-op on an all-zero spectrum).
    pub fn normalize(&mut self) {
        let max = self.power.iter().cloned().fold(0.0, f64::max);
        if max > 0.0 {
            for p in &mut self.power {
                *p /= max;
            }
        }
        self.normalized = true;
    }

    /// Argmax bin over the folded range as `(omega, power)`. Ties break
    /// toward smaller `omega`: the first bin attaining the maximum wins.
    pub fn dominant_frequency(&self, exclude_dc: bool) -> (f64, f64) {
        let start = usize::from(exclude_dc);
        let mut best_k = start;
        let mut best = f64::NEG_INFINITY;
        for k in start..self.folded_len() {
            if self.power[k] > best {
                best = self.power[k];
                best_k = k;
            }
        }
        (self.omega(best_k), self.power[best_k])
    }

    /// Sum of folded non-DC power, used to judge how concentrated a peak is.
    pub fn non_dc_power(&self) -> f64 {
        (1..self.folded_len()).map(|k| self.power[k]).sum()
    }

    /// Median of the folded non-DC bins.
    pub fn non_dc_median(&self) -> f64 {
        let mut bins: Vec<f64> = (1..self.folded_len()).map(|k| self.power[k]).collect();
        bins.sort_by(f64::total_cmp);
        if bins.is_empty() {
            0.0
        } else {
            bins[bins.len() / 2]
        }
    }

    /// Power at the folded bin nearest to `omega`.
    pub fn power_near(&self, omega: f64) -> f64 {
        let k = (omega / self.bin_width()).round() as usize;
        self.power[k.min(self.folded_len() - 1)]
    }
}

/// Rectangular-window DFT of `f(l)`, discarding the first `drop_transient`
/// samples.
pub fn power_spectrum(series: &TimeSeries, drop_transient: usize) -> Result<PowerSpectrum> {
    if drop_transient >= series.len() {
        return Err(Error::EmptySeries {
            dropped: drop_transient,
        });
    }
    let data = &series.values[drop_transient..];
    let len = data.len();
    let mut buf: Vec<C64> = data.iter().map(|&x| C64::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let power = buf.into_iter().map(|z| z.norm_sqr()).collect();
    Ok(PowerSpectrum {
        len,
        power,
        normalized: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn cosine_series(omega: f64, len: usize) -> TimeSeries {
        TimeSeries::new(
            "cos",
            (0..len).map(|l| (omega * l as f64).cos()).collect(),
        )
    }

    #[test]
    fn alternating_signal_peaks_at_pi() {
        let series = cosine_series(PI, 1024);
        let spec = power_spectrum(&series, 0).unwrap();
        let (omega, _) = spec.dominant_frequency(true);
        assert!((omega - PI).abs() < 1e-12);
    }

    #[test]
    fn constant_series_is_all_dc() {
        let series = TimeSeries::new("const", vec![0.7; 512]);
        let spec = power_spectrum(&series, 0).unwrap();
        let (omega, power) = spec.dominant_frequency(false);
        assert_eq!(omega, 0.0);
        assert!(power > 0.0);
        assert!(spec.non_dc_power() < 1e-18 * power);
    }

    #[test]
    fn tie_breaks_toward_smaller_omega() {
        // A unit impulse has an exactly flat spectrum, so every folded bin
        // ties and the smallest non-DC frequency must win.
        let mut values = vec![0.0; 256];
        values[0] = 1.0;
        let spec = power_spectrum(&TimeSeries::new("impulse", values), 0).unwrap();
        let (omega, power) = spec.dominant_frequency(true);
        assert!((omega - spec.omega(1)).abs() < 1e-15);
        assert!((power - 1.0).abs() < 1e-12);
    }

    #[test]
    fn seeded_noise_argmax_is_reproducible() {
        let run = || -> f64 {
            let mut rng = ChaCha8Rng::seed_from_u64(123);
            let values: Vec<f64> = (0..2048).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let spec = power_spectrum(&TimeSeries::new("noise", values), 0).unwrap();
            spec.dominant_frequency(true).0
        };
        assert_eq!(run().to_bits(), run().to_bits());
    }

    #[test]
    fn parseval_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let values: Vec<f64> = (0..777).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let series = TimeSeries::new("rand", values.clone());
        let spec = power_spectrum(&series, 0).unwrap();
        let time_side: f64 = values.iter().map(|x| x * x).sum();
        let freq_side: f64 = spec.power().iter().sum::<f64>() / spec.dft_len() as f64;
        assert!(
            (time_side - freq_side).abs() < 1e-8 * time_side.abs(),
            "Parseval violated: {time_side} vs {freq_side}"
        );
    }

    #[test]
    fn transient_drop_shortens_window() {
        let series = cosine_series(PI, 100);
        let spec = power_spectrum(&series, 10).unwrap();
        assert_eq!(spec.dft_len(), 90);
        assert!(matches!(
            power_spectrum(&series, 100),
            Err(Error::EmptySeries { dropped: 100 })
        ));
    }

    #[test]
    fn normalize_sets_peak_to_one() {
        let series = cosine_series(PI / 4.0, 256);
        let mut spec = power_spectrum(&series, 0).unwrap();
        spec.normalize();
        let max = spec.power().iter().cloned().fold(0.0, f64::max);
        assert!((max - 1.0).abs() < 1e-15);
        assert!(spec.is_normalized());
    }
}
