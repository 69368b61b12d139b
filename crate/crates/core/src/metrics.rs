//! Symbol and bit error counting, and the BER-derived Q-factor
//! `Q_dB = 20·log10(√2·erfcinv(2·BER))`.

use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::constellation::Alphabet;
use crate::error::{self, Result};

/// Q-factor reported for BER ≥ 0.5.
pub const Q_FLOOR_DB: f64 = -30.0;

/// Bit errors below which a sweep point's Q estimate is considered noisy.
pub const MIN_BIT_ERRORS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub n_symbols: u64,
    pub n_symbol_errors: u64,
    pub n_bits: u64,
    pub n_bit_errors: u64,
    pub ser: f64,
    pub ber: f64,
    pub q_factor_db: f64,
}

impl ErrorReport {
    fn from_counts(n_symbols: u64, n_symbol_errors: u64, n_bits: u64, n_bit_errors: u64) -> Result<Self> {
        let ser = n_symbol_errors as f64 / n_symbols as f64;
        let ber = n_bit_errors as f64 / n_bits as f64;
        let clamped = if n_bit_errors == 0 { 0.5 / n_bits as f64 } else { ber };
        Ok(Self {
            n_symbols,
            n_symbol_errors,
            n_bits,
            n_bit_errors,
            ser,
            ber,
            q_factor_db: q_from_ber(clamped.min(0.5))?,
        })
    }

    /// Pools the counts of two reports.
    pub fn merge(&self, other: &ErrorReport) -> Result<ErrorReport> {
        Self::from_counts(
            self.n_symbols + other.n_symbols,
            self.n_symbol_errors + other.n_symbol_errors,
            self.n_bits + other.n_bits,
            self.n_bit_errors + other.n_bit_errors,
        )
    }

    pub fn is_statistically_thin(&self) -> bool {
        self.n_bit_errors < MIN_BIT_ERRORS
    }
}

/// Counts symbol errors by label mismatch and bit errors through the Gray
/// bit labels of the alphabet.
pub fn count_errors(detected: &[usize], truth: &[usize], alphabet: &Alphabet) -> Result<ErrorReport> {
    if detected.len() != truth.len() {
        return error::input(format!("detected ({}) and true ({}) label counts differ", detected.len(), truth.len()));
    }
    if detected.is_empty() {
        return error::input("no symbols to count");
    }
    let m = alphabet.order();
    let mut symbol_errors = 0u64;
    let mut bit_errors = 0u64;
    for (&d, &t) in detected.iter().zip(truth) {
        if d >= m || t >= m {
            return error::input(format!("label out of range: {d}/{t}"));
        }
        if d != t {
            symbol_errors += 1;
            bit_errors += alphabet.bit_distance(d, t) as u64;
        }
    }
    let n = detected.len() as u64;
    ErrorReport::from_counts(n, symbol_errors, n * alphabet.bits_per_symbol() as u64, bit_errors)
}

/// BER to Q-factor in dB. BER = 0 maps to +∞; BER = 0.5 to [`Q_FLOOR_DB`].
pub fn q_from_ber(ber: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&ber) {
        return error::input(format!("BER {ber} outside [0, 0.5]"));
    }
    if ber == 0.0 {
        return Ok(f64::INFINITY);
    }
    let arg = std::f64::consts::SQRT_2 * refined_erfc_inv(2.0 * ber);
    if arg <= 0.0 {
        return Ok(Q_FLOOR_DB);
    }
    Ok((20.0 * arg.log10()).max(Q_FLOOR_DB))
}

/// `erfc_inv` polished by Newton steps on `erfc`.
fn refined_erfc_inv(y: f64) -> f64 {
    let mut x = erfc_inv(y);
    for _ in 0..3 {
        let slope = -std::f64::consts::FRAC_2_SQRT_PI * (-x * x).exp();
        if slope == 0.0 || !x.is_finite() {
            break;
        }
        x -= (erfc(x) - y) / slope;
    }
    x
}

/// Inverse of [`q_from_ber`]: `BER = erfc(Q/√2)/2` with linear `Q`.
pub fn ber_from_q(q_db: f64) -> f64 {
    let q = 10f64.powf(q_db / 20.0);
    0.5 * erfc(q / std::f64::consts::SQRT_2)
}
