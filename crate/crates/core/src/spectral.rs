use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward/inverse FFT pair of one length, with unitary-free scaling:
/// `inverse` divides by `n` so `inverse(forward(x)) == x`.
pub(crate) struct Spectral {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl Spectral {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Self {
            n,
            fwd,
            inv,
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n);
        self.fwd.process_with_scratch(data, &mut self.scratch);
    }

    /// Inverse transform without the `1/n` factor.
    pub fn inverse_unscaled(&mut self, data: &mut [Complex64]) {
        debug_assert_eq!(data.len(), self.n);
        self.inv.process_with_scratch(data, &mut self.scratch);
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.inverse_unscaled(data);
        let s = 1.0 / self.n as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }

    /// Applies a diagonal frequency-domain transfer function in place.
    pub fn filter(&mut self, data: &mut [Complex64], transfer: &[Complex64]) {
        self.forward(data);
        for (v, h) in data.iter_mut().zip(transfer) {
            *v *= h;
        }
        self.inverse(data);
    }
}

/// Angular frequency of DFT bin `k` on an `n`-point grid sampled at `fs` Hz,
/// folded into `[-π·fs, π·fs)`.
pub(crate) fn omega(k: usize, n: usize, fs: f64) -> f64 {
    let signed = if 2 * k >= n { k as f64 - n as f64 } else { k as f64 };
    2.0 * std::f64::consts::PI * fs * signed / n as f64
}

pub(crate) fn omega_grid(n: usize, fs: f64) -> Vec<f64> {
    (0..n).map(|k| omega(k, n, fs)).collect()
}
