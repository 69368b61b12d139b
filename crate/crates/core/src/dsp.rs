//! Transmitter front end and receiver DSP: root-raised-cosine shaping,
//! matched filtering with sampling-phase search, frequency-domain chromatic
//! dispersion compensation and training-aided phase estimation.
//!
//! All filtering is circular over the whole block. Split-step propagation
//! treats the block as one period of a periodic signal anyway, so circular
//! shaping keeps the transmitted waveform consistent with that picture and
//! leaves no edge transients to trim.

use std::io::Write;

use num_complex::Complex64;

use crate::constellation::SymbolBlock;
use crate::error::{self, Error, Result};
use crate::spectral::{omega_grid, Spectral};

/// Largest oversampling factor accepted by the shaping filter.
pub const MAX_SAMPLES_PER_SYMBOL: usize = 64;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts / 1e-3).log10()
}

/// Dual-polarization complex baseband field, in √W.
#[derive(Debug, Clone, PartialEq)]
pub struct IqWaveform {
    pub pol_x: Vec<Complex64>,
    pub pol_y: Vec<Complex64>,
    /// Symbol rate in baud.
    pub symbol_rate: f64,
    pub samples_per_symbol: usize,
}

impl IqWaveform {
    pub fn new(
        pol_x: Vec<Complex64>,
        pol_y: Vec<Complex64>,
        symbol_rate: f64,
        samples_per_symbol: usize,
    ) -> Result<Self> {
        if pol_x.len() != pol_y.len() {
            return error::input("polarizations must have equal length");
        }
        if !(symbol_rate > 0.0) || samples_per_symbol == 0 {
            return error::config("symbol rate and samples per symbol must be positive");
        }
        Ok(Self {
            pol_x,
            pol_y,
            symbol_rate,
            samples_per_symbol,
        })
    }

    pub fn len(&self) -> usize {
        self.pol_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pol_x.is_empty()
    }

    /// Sample rate in Hz.
    pub fn sample_rate(&self) -> f64 {
        self.symbol_rate * self.samples_per_symbol as f64
    }

    /// Total energy over both polarizations (sum of |sample|²).
    pub fn energy(&self) -> f64 {
        self.pol_x.iter().chain(&self.pol_y).map(|s| s.norm_sqr()).sum()
    }

    /// Mean total power over both polarizations, in W.
    pub fn mean_power(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.energy() / self.len() as f64
    }

    pub fn scale(&mut self, factor: f64) {
        for s in self.pol_x.iter_mut().chain(self.pol_y.iter_mut()) {
            *s *= factor;
        }
    }

    pub(crate) fn pols_mut(&mut self) -> [&mut Vec<Complex64>; 2] {
        [&mut self.pol_x, &mut self.pol_y]
    }

    /// Writes the waveform as CSV (`index,re_x,im_x,re_y,im_y`).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_iq_csv(out, &self.pol_x, &self.pol_y)
    }
}

/// Writes paired complex sequences as CSV with columns
/// `index,re_x,im_x,re_y,im_y`.
pub fn write_iq_csv<W: Write>(mut out: W, x: &[Complex64], y: &[Complex64]) -> Result<()> {
    if x.len() != y.len() {
        return error::input("polarizations must have equal length");
    }
    writeln!(out, "index,re_x,im_x,re_y,im_y")?;
    for (i, (a, b)) in x.iter().zip(y).enumerate() {
        writeln!(out, "{i},{:.9e},{:.9e},{:.9e},{:.9e}", a.re, a.im, b.re, b.im)?;
    }
    Ok(())
}

/// Root-raised-cosine filter parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RrcSpec {
    pub roll_off: f64,
    /// Extent of the time-domain tap design, in symbols.
    pub span_symbols: usize,
    pub samples_per_symbol: usize,
}

impl Default for RrcSpec {
    fn default() -> Self {
        Self {
            roll_off: 0.1,
            span_symbols: 64,
            samples_per_symbol: 16,
        }
    }
}

impl RrcSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.roll_off > 0.0 && self.roll_off <= 1.0) {
            return error::config(format!("roll-off {} outside (0, 1]", self.roll_off));
        }
        if self.samples_per_symbol < 4 || self.samples_per_symbol > MAX_SAMPLES_PER_SYMBOL {
            return error::config(format!(
                "samples per symbol {} outside [4, {MAX_SAMPLES_PER_SYMBOL}]",
                self.samples_per_symbol
            ));
        }
        if self.span_symbols == 0 {
            return error::config("filter span must be at least one symbol");
        }
        Ok(())
    }

    pub fn tap_count(&self) -> usize {
        self.span_symbols * self.samples_per_symbol + 1
    }

    /// Amplitude response of the square-root raised cosine at frequency `f`
    /// normalized to the symbol rate, with unit passband gain.
    pub fn amplitude(&self, f_norm: f64) -> f64 {
        let b = self.roll_off;
        let f = f_norm.abs();
        let lo = 0.5 * (1.0 - b);
        let hi = 0.5 * (1.0 + b);
        if f <= lo {
            1.0
        } else if f >= hi {
            0.0
        } else {
            (0.5 * (1.0 + (std::f64::consts::PI / b * (f - lo)).cos())).sqrt()
        }
    }

    /// Unit-energy transfer function on an `n`-point DFT grid whose sample
    /// rate is `samples_per_symbol` times the symbol rate.
    pub fn transfer(&self, n: usize) -> Vec<Complex64> {
        let sps = self.samples_per_symbol as f64;
        let mut h: Vec<f64> = (0..n)
            .map(|k| {
                let signed = if 2 * k >= n { k as f64 - n as f64 } else { k as f64 };
                self.amplitude(signed * sps / n as f64)
            })
            .collect();
        // Parseval: Σ|h[t]|² = Σ|H[k]|² / n.
        let energy = h.iter().map(|v| v * v).sum::<f64>() / n as f64;
        let norm = energy.sqrt().recip();
        h.iter_mut().for_each(|v| *v *= norm);
        h.into_iter().map(|v| Complex64::new(v, 0.0)).collect()
    }
}

/// Closed-form root-raised-cosine impulse response at `t` symbol periods.
pub fn rrc_impulse(t: f64, roll_off: f64) -> f64 {
    use std::f64::consts::PI;
    let b = roll_off;
    if t.abs() < 1e-12 {
        return 1.0 - b + 4.0 * b / PI;
    }
    let x = 4.0 * b * t;
    if (x.abs() - 1.0).abs() < 1e-9 {
        let a = PI / (4.0 * b);
        return b / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    ((PI * t * (1.0 - b)).sin() + x * (PI * t * (1.0 + b)).cos()) / (PI * t * (1.0 - x * x))
}

/// Time-domain unit-energy RRC taps, centered, `span_symbols·sps + 1` long.
pub fn rrc_taps(spec: &RrcSpec) -> Vec<f64> {
    let n = spec.tap_count();
    let mid = (n / 2) as f64;
    let sps = spec.samples_per_symbol as f64;
    let mut taps: Vec<f64> = (0..n)
        .map(|i| rrc_impulse((i as f64 - mid) / sps, spec.roll_off))
        .collect();
    let norm = taps.iter().map(|v| v * v).sum::<f64>().sqrt().recip();
    taps.iter_mut().for_each(|v| *v *= norm);
    taps
}

/// Upsamples and RRC-shapes a symbol block, then scales the waveform so its
/// mean total power (both polarizations) equals `launch_power_dbm`.
pub fn rrc_shape(
    symbols: &SymbolBlock,
    spec: &RrcSpec,
    symbol_rate: f64,
    launch_power_dbm: f64,
) -> Result<IqWaveform> {
    spec.validate()?;
    if !launch_power_dbm.is_finite() {
        return error::config("launch power must be finite");
    }
    if symbols.is_empty() || symbols.pol_x.len() != symbols.pol_y.len() {
        return error::input("symbol block must be non-empty with equal polarizations");
    }
    let sps = spec.samples_per_symbol;
    let n = symbols.len() * sps;
    let transfer = spec.transfer(n);
    let mut spectral = Spectral::new(n);

    let mut shape = |syms: &[Complex64]| {
        let mut buf = vec![Complex64::default(); n];
        for (k, &s) in syms.iter().enumerate() {
            buf[k * sps] = s;
        }
        spectral.filter(&mut buf, &transfer);
        buf
    };
    let pol_x = shape(&symbols.pol_x.symbols);
    let pol_y = shape(&symbols.pol_y.symbols);
    let mut wave = IqWaveform::new(pol_x, pol_y, symbol_rate, sps)?;

    let power = wave.mean_power();
    if !(power > 0.0) {
        return error::input("symbol block carries no energy");
    }
    wave.scale((dbm_to_watts(launch_power_dbm) / power).sqrt());
    Ok(wave)
}

/// Symbol-rate samples recovered by the matched filter.
#[derive(Debug, Clone, PartialEq)]
pub struct Downsampled {
    pub pol_x: Vec<Complex64>,
    pub pol_y: Vec<Complex64>,
    /// Selected sampling phase in samples, in `(-sps/2, sps/2]`.
    pub sampling_offset: isize,
}

/// Matched-filters with the RRC and picks one sample per symbol at the phase
/// with the largest mean output power.
///
/// The filter is scaled by `1/√sps` so that a shaped waveform of power `P`
/// per polarization yields symbols of amplitude `√P`, and white noise of PSD
/// `S` yields output variance `S·symbol_rate`.
pub fn matched_filter_downsample(wave: &IqWaveform, spec: &RrcSpec) -> Result<Downsampled> {
    spec.validate()?;
    let sps = spec.samples_per_symbol;
    if wave.samples_per_symbol != sps {
        return error::input(format!(
            "waveform has {} samples per symbol, filter expects {sps}",
            wave.samples_per_symbol
        ));
    }
    let n = wave.len();
    if n < spec.span_symbols * sps {
        return error::input(format!(
            "waveform of {n} samples is shorter than the {}-sample filter span",
            spec.span_symbols * sps
        ));
    }
    if !n.is_multiple_of(sps) {
        return error::input("waveform length must be a whole number of symbols");
    }
    let gain = (sps as f64).sqrt().recip();
    let transfer: Vec<Complex64> = spec.transfer(n).into_iter().map(|h| h * gain).collect();
    let mut spectral = Spectral::new(n);
    let mut fx = wave.pol_x.clone();
    let mut fy = wave.pol_y.clone();
    spectral.filter(&mut fx, &transfer);
    spectral.filter(&mut fy, &transfer);

    let n_sym = n / sps;
    let mut best = (0usize, f64::NEG_INFINITY);
    for phase in 0..sps {
        let p: f64 = (0..n_sym)
            .map(|k| fx[k * sps + phase].norm_sqr() + fy[k * sps + phase].norm_sqr())
            .sum();
        if p > best.1 {
            best = (phase, p);
        }
    }
    let offset = if 2 * best.0 > sps {
        best.0 as isize - sps as isize
    } else {
        best.0 as isize
    };
    let pick = |buf: &[Complex64]| -> Vec<Complex64> {
        (0..n_sym)
            .map(|k| buf[((k * sps) as isize + offset).rem_euclid(n as isize) as usize])
            .collect()
    };
    Ok(Downsampled {
        pol_x: pick(&fx),
        pol_y: pick(&fy),
        sampling_offset: offset,
    })
}

/// Transfer function that undoes `length_km` of fiber dispersion.
pub fn cd_transfer(n: usize, sample_rate: f64, beta2_ps2_per_km: f64, length_km: f64) -> Vec<Complex64> {
    let beta2 = beta2_ps2_per_km * 1e-24;
    omega_grid(n, sample_rate)
        .into_iter()
        .map(|w| Complex64::from_polar(1.0, -0.5 * beta2 * w * w * length_km))
        .collect()
}

/// Compensates accumulated chromatic dispersion with an all-pass filter,
/// the exact inverse of the linear propagation operator over `length_km`.
pub fn cd_compensate(wave: &IqWaveform, beta2_ps2_per_km: f64, length_km: f64) -> Result<IqWaveform> {
    let mut out = wave.clone();
    cd_compensate_in_place(&mut out, beta2_ps2_per_km, length_km)?;
    Ok(out)
}

pub fn cd_compensate_in_place(wave: &mut IqWaveform, beta2_ps2_per_km: f64, length_km: f64) -> Result<()> {
    if !(length_km >= 0.0) || !beta2_ps2_per_km.is_finite() {
        return error::input("compensation length must be non-negative and beta2 finite");
    }
    if length_km == 0.0 || beta2_ps2_per_km == 0.0 || wave.is_empty() {
        return Ok(());
    }
    let n = wave.len();
    let transfer = cd_transfer(n, wave.sample_rate(), beta2_ps2_per_km, length_km);
    let mut spectral = Spectral::new(n);
    for pol in wave.pols_mut() {
        spectral.filter(pol, &transfer);
    }
    Ok(())
}

/// Minimum training length accepted by [`estimate_phase_rotation`].
pub const MIN_PHASE_TRAINING: usize = 100;

/// Least-squares common phase between received and sent training symbols,
/// `arg Σ y·conj(x)`. Derotate by multiplying with `exp(-i·θ)`.
pub fn estimate_phase_rotation(received: &[Complex64], sent: &[Complex64]) -> Result<f64> {
    Ok(estimate_complex_gain(received, sent)?.arg())
}

/// Least-squares complex gain `h` minimizing `Σ|y − h·x|²`.
pub fn estimate_complex_gain(received: &[Complex64], sent: &[Complex64]) -> Result<Complex64> {
    if received.len() != sent.len() || received.len() < MIN_PHASE_TRAINING {
        return error::input(format!(
            "training blocks must have equal length of at least {MIN_PHASE_TRAINING} (got {} and {})",
            received.len(),
            sent.len()
        ));
    }
    let corr: Complex64 = received.iter().zip(sent).map(|(y, x)| y * x.conj()).sum();
    let energy: f64 = sent.iter().map(|x| x.norm_sqr()).sum();
    if corr.norm() == 0.0 || energy == 0.0 || !corr.is_finite() {
        return Err(Error::Estimation("degenerate training correlation".into()));
    }
    Ok(corr / energy)
}
