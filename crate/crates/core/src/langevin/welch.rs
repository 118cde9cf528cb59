//! Welch cross-spectral estimation for three-channel records.
//!
//! Conventions are fixed: 50% overlap, per-segment mean removal, and the
//! two-sided density normalization
//!
//! ```text
//! P_ab(w_k) = h / sum(w^2) * X_a(w_k) conj(X_b(w_k)),   X_a(w) = sum_j w_j a_j e^{-i w j h}
//! ```
//!
//! which estimates `S_ab(w) = int <a(t + tau) b(t)> e^{-i w tau} dtau`, the
//! same convention as [`crate::spectra::spectral_matrix_at`]. Bins run over
//! `k = -(M/2 - 1) ..= M/2 - 1`; the Nyquist bin is dropped so the grid is
//! symmetric about zero.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Complex, Matrix3};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::spectra::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    Hann,
    Rectangular,
}

impl Window {
    /// Periodic taper of length `len`.
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            Window::Hann => (0..len)
                .map(|j| {
                    let s = (PI * j as f64 / len as f64).sin();
                    s * s
                })
                .collect(),
            Window::Rectangular => vec![1.0; len],
        }
    }

    /// Bins `|k| <= h` absorb the per-segment mean removal. The taper's DFT
    /// is supported on exactly these bins, so their estimates are biased low
    /// (a flat spectrum reads 1/3 at `k = 0` and 5/6 at `k = +-1` under Hann)
    /// while every other bin is untouched.
    pub fn mean_leakage_halfwidth(self) -> usize {
        match self {
            Window::Hann => 1,
            Window::Rectangular => 0,
        }
    }
}

/// Running sums of per-segment cross periodograms.
#[derive(Debug, Clone, PartialEq)]
pub struct WelchAccumulator {
    pub sum: Vec<Matrix3<C64>>,
    /// Sum of squared real parts, for standard errors.
    pub sum_sq: Vec<Matrix3<f64>>,
    pub segments: usize,
}

impl WelchAccumulator {
    pub fn new(bins: usize) -> Self {
        WelchAccumulator {
            sum: vec![Matrix3::zeros(); bins],
            sum_sq: vec![Matrix3::zeros(); bins],
            segments: 0,
        }
    }

    /// Adds another accumulator; callers fix the merge order.
    pub fn merge(&mut self, other: &WelchAccumulator) {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        self.segments += other.segments;
    }

    pub fn mean(&self) -> Vec<Matrix3<C64>> {
        let n = self.segments.max(1) as f64;
        self.sum.iter().map(|m| m / C64::new(n, 0.0)).collect()
    }

    /// Standard error of the mean real part, from the segment scatter.
    pub fn stderr(&self) -> Vec<Matrix3<f64>> {
        let n = self.segments as f64;
        if self.segments < 2 {
            return vec![Matrix3::from_element(f64::NAN); self.sum.len()];
        }
        self.sum
            .iter()
            .zip(&self.sum_sq)
            .map(|(s, s2)| {
                Matrix3::from_fn(|i, j| {
                    let mean = s[(i, j)].re / n;
                    let var = ((s2[(i, j)] - n * mean * mean) / (n - 1.0)).max(0.0);
                    (var / n).sqrt()
                })
            })
            .collect()
    }
}

#[derive(Clone)]
pub struct WelchPlan {
    segment_len: usize,
    hop: usize,
    sample_interval: f64,
    taper: Vec<f64>,
    norm: f64,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for WelchPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WelchPlan")
            .field("segment_len", &self.segment_len)
            .field("hop", &self.hop)
            .field("sample_interval", &self.sample_interval)
            .finish()
    }
}

impl WelchPlan {
    /// `segment_len` must be even and at least 4.
    pub fn new(segment_len: usize, window: Window, sample_interval: f64) -> Self {
        assert!(segment_len >= 4 && segment_len.is_multiple_of(2), "segment length must be even and >= 4");
        let taper = window.coefficients(segment_len);
        let power: f64 = taper.iter().map(|w| w * w).sum();
        let fft = FftPlanner::new().plan_fft_forward(segment_len);
        WelchPlan {
            segment_len,
            hop: segment_len / 2,
            sample_interval,
            taper,
            norm: sample_interval / power,
            fft,
        }
    }

    pub fn segment_len(&self) -> usize {
        self.segment_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn bins(&self) -> usize {
        self.segment_len - 1
    }

    /// Number of whole segments that fit into `samples`.
    pub fn segment_count(&self, samples: usize) -> usize {
        if samples < self.segment_len {
            0
        } else {
            (samples - self.segment_len) / self.hop + 1
        }
    }

    /// Increasing two-sided angular-frequency grid.
    pub fn omega(&self) -> Vec<f64> {
        let half = (self.segment_len / 2) as i64;
        let dw = 2.0 * PI / (self.segment_len as f64 * self.sample_interval);
        (-(half - 1)..=half - 1).map(|k| k as f64 * dw).collect()
    }

    fn fft_index(&self, bin: usize) -> usize {
        let half = self.segment_len / 2;
        let k = bin as i64 - (half as i64 - 1);
        k.rem_euclid(self.segment_len as i64) as usize
    }

    /// Folds segments `first..first + count` of a three-channel record into `acc`.
    pub fn accumulate(&self, channels: [&[f64]; 3], first: usize, count: usize, acc: &mut WelchAccumulator) {
        let m = self.segment_len;
        let mut spectra: [Vec<Complex<f64>>; 3] = std::array::from_fn(|_| vec![Complex::new(0.0, 0.0); m]);
        let mut scratch = vec![Complex::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        for s in first..first + count {
            let start = s * self.hop;
            for (buf, data) in spectra.iter_mut().zip(channels) {
                let seg = &data[start..start + m];
                let mean = seg.iter().sum::<f64>() / m as f64;
                for ((b, &v), &w) in buf.iter_mut().zip(seg).zip(&self.taper) {
                    *b = Complex::new((v - mean) * w, 0.0);
                }
                self.fft.process_with_scratch(buf, &mut scratch);
            }
            for bin in 0..self.bins() {
                let q = self.fft_index(bin);
                let x = [spectra[0][q], spectra[1][q], spectra[2][q]];
                let p = Matrix3::from_fn(|a, b| x[a] * x[b].conj() * self.norm);
                acc.sum[bin] += p;
                acc.sum_sq[bin] += p.map(|v| v.re * v.re);
            }
            acc.segments += 1;
        }
    }
}
