//! Multi-span fiber link: symmetric split-step Fourier solution of the
//! Manakov equation, lumped EDFA gain with ASE noise, and optional ideal
//! per-span dispersion compensation for dispersion-managed links.
//!
//! Conventions: the field is in √W, distance in km, time in s. The linear
//! operator over a distance `z` is `exp((i·β₂/2·ω² − α/2)·z)` on the DFT
//! grid, and the Kerr operator is `exp(i·κ·γ·(|Ex|² + |Ey|²)·z)` with
//! `κ = 8/9` for the Manakov average. [`crate::dsp::cd_compensate`] applies
//! `exp(−i·β₂/2·ω²·z)`, the exact inverse of the linear part.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dsp::{cd_compensate_in_place, IqWaveform};
use crate::error::{self, Error, Result};
use crate::seed;
use crate::spectral::{omega_grid, Spectral};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Polarization-averaged Kerr coefficient of the Manakov equation.
pub const MANAKOV_FACTOR: f64 = 8.0 / 9.0;

fn default_nonlinear_factor() -> f64 {
    MANAKOV_FACTOR
}

/// Physical parameters of one fiber span.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberParams {
    pub alpha_db_per_km: f64,
    /// Dispersion parameter D in ps/(nm·km).
    pub dispersion_ps_nm_km: f64,
    /// Nonlinear coefficient γ in 1/(W·km).
    pub gamma_per_w_km: f64,
    pub length_km: f64,
    pub wavelength_nm: f64,
    /// Scale on the Kerr term; 8/9 for Manakov, 1 for a scalar model.
    #[serde(default = "default_nonlinear_factor")]
    pub nonlinear_factor: f64,
}

impl Default for FiberParams {
    /// Standard single-mode fiber, 80 km span at 1550 nm.
    fn default() -> Self {
        Self {
            alpha_db_per_km: 0.2,
            dispersion_ps_nm_km: 16.0,
            gamma_per_w_km: 1.4,
            length_km: 80.0,
            wavelength_nm: 1550.0,
            nonlinear_factor: MANAKOV_FACTOR,
        }
    }
}

impl FiberParams {
    /// Group-velocity dispersion β₂ = −D·λ²/(2πc), in ps²/km.
    pub fn beta2_ps2_per_km(&self) -> f64 {
        // D [ps/(nm km)] * λ² [nm²] / c [nm/ps] gives ps²/km.
        let lambda = self.wavelength_nm;
        let c_nm_per_ps = SPEED_OF_LIGHT * 1e9 / 1e12;
        -self.dispersion_ps_nm_km * lambda * lambda / (2.0 * std::f64::consts::PI * c_nm_per_ps)
    }

    /// Power attenuation coefficient in 1/km.
    pub fn alpha_per_km(&self) -> f64 {
        self.alpha_db_per_km * std::f64::consts::LN_10 / 10.0
    }

    /// Effective nonlinear length over `length_km`.
    pub fn effective_length_km(&self, length_km: f64) -> f64 {
        effective_length(self.alpha_per_km(), length_km)
    }

    pub fn carrier_hz(&self) -> f64 {
        SPEED_OF_LIGHT / (self.wavelength_nm * 1e-9)
    }

    fn validate(&self) -> Result<()> {
        let finite = [
            self.alpha_db_per_km,
            self.dispersion_ps_nm_km,
            self.gamma_per_w_km,
            self.length_km,
            self.wavelength_nm,
            self.nonlinear_factor,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite || self.alpha_db_per_km < 0.0 || self.length_km < 0.0 || self.wavelength_nm <= 0.0 {
            return error::config("fiber parameters must be finite with non-negative loss and length");
        }
        Ok(())
    }
}

/// `(1 − e^{−αL})/α`, tending to `L` as α → 0.
pub fn effective_length(alpha_per_km: f64, length_km: f64) -> f64 {
    if alpha_per_km * length_km < 1e-12 {
        length_km
    } else {
        -(-alpha_per_km * length_km).exp_m1() / alpha_per_km
    }
}

/// Lumped optical amplifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmpParams {
    pub gain_db: f64,
    pub noise_figure_db: f64,
    pub ase_enabled: bool,
}

impl Default for AmpParams {
    fn default() -> Self {
        Self {
            gain_db: 16.0,
            noise_figure_db: 5.5,
            ase_enabled: true,
        }
    }
}

impl AmpParams {
    pub fn linear_gain(&self) -> f64 {
        10f64.powf(self.gain_db / 10.0)
    }

    /// Spontaneous emission factor, `NF/2` in linear units.
    pub fn n_sp(&self) -> f64 {
        10f64.powf(self.noise_figure_db / 10.0) / 2.0
    }

    /// One-sided ASE power spectral density per polarization, in W/Hz.
    pub fn ase_psd(&self, carrier_hz: f64) -> f64 {
        self.n_sp() * PLANCK * carrier_hz * (self.linear_gain() - 1.0)
    }
}

/// Scales the field by `√G` and, when enabled, adds circular white Gaussian
/// ASE with per-sample variance `S·Fs` to each polarization.
pub fn amplify<R: Rng + ?Sized>(
    wave: &mut IqWaveform,
    amp: &AmpParams,
    carrier_hz: f64,
    rng: &mut R,
) -> Result<()> {
    if !(amp.gain_db >= 0.0) {
        return error::config("amplifier gain must be non-negative");
    }
    wave.scale(amp.linear_gain().sqrt());
    if amp.ase_enabled {
        let variance = amp.ase_psd(carrier_hz) * wave.sample_rate();
        add_white_noise(wave, variance, rng);
    }
    Ok(())
}

/// Adds circular complex Gaussian noise of total per-sample variance
/// `variance` to both polarizations.
pub fn add_white_noise<R: Rng + ?Sized>(wave: &mut IqWaveform, variance: f64, rng: &mut R) {
    if variance <= 0.0 {
        return;
    }
    let sigma = (variance / 2.0).sqrt();
    for pol in wave.pols_mut() {
        for s in pol.iter_mut() {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *s += Complex64::new(re * sigma, im * sigma);
        }
    }
}

/// A multi-span transmission link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub span: FiberParams,
    pub amp: AmpParams,
    pub n_spans: usize,
    pub dispersion_managed: bool,
    pub ssfm_step_km: f64,
}

impl Default for LinkSpec {
    fn default() -> Self {
        Self {
            span: FiberParams::default(),
            amp: AmpParams::default(),
            n_spans: 15,
            dispersion_managed: true,
            ssfm_step_km: 0.5,
        }
    }
}

impl LinkSpec {
    pub fn total_length_km(&self) -> f64 {
        self.n_spans as f64 * self.span.length_km
    }

    /// Dispersion left for the receiver to compensate.
    pub fn residual_dispersion_km(&self) -> f64 {
        if self.dispersion_managed {
            0.0
        } else {
            self.total_length_km()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.span.validate()?;
        if self.n_spans == 0 {
            return error::config("link needs at least one span");
        }
        if !(self.ssfm_step_km > 0.0) || !self.ssfm_step_km.is_finite() {
            return error::config("split-step size must be positive");
        }
        if !(self.amp.gain_db >= 0.0) {
            return error::config("amplifier gain must be non-negative");
        }
        Ok(())
    }
}

/// Split-step propagator for one fiber on one sampling grid. Linear step
/// operators are computed once and reused across spans.
pub struct SplitStep {
    fiber: FiberParams,
    step_km: f64,
    n: usize,
    beta2_s2_per_km: f64,
    alpha_per_km: f64,
    omega2: Vec<f64>,
    full_step: Vec<Complex64>,
    half_step: Vec<Complex64>,
    spectral: Spectral,
}

impl SplitStep {
    pub fn new(fiber: FiberParams, step_km: f64, n: usize, sample_rate: f64) -> Result<Self> {
        fiber.validate()?;
        if !(step_km > 0.0) || !step_km.is_finite() {
            return error::config("split-step size must be positive");
        }
        let omega2: Vec<f64> = omega_grid(n, sample_rate).into_iter().map(|w| w * w).collect();
        let mut this = Self {
            fiber,
            step_km,
            n,
            beta2_s2_per_km: fiber.beta2_ps2_per_km() * 1e-24,
            alpha_per_km: fiber.alpha_per_km(),
            omega2,
            full_step: Vec::new(),
            half_step: Vec::new(),
            spectral: Spectral::new(n),
        };
        this.full_step = this.stepping_operator(step_km);
        this.half_step = this.stepping_operator(step_km / 2.0);
        Ok(this)
    }

    fn linear_operator(&self, z_km: f64) -> Vec<Complex64> {
        self.scaled_operator(z_km, 1.0)
    }

    /// Linear operator with the inverse-FFT `1/n` folded in.
    fn stepping_operator(&self, z_km: f64) -> Vec<Complex64> {
        self.scaled_operator(z_km, 1.0 / self.n as f64)
    }

    fn scaled_operator(&self, z_km: f64, scale: f64) -> Vec<Complex64> {
        let decay = scale * (-0.5 * self.alpha_per_km * z_km).exp();
        self.omega2
            .iter()
            .map(|&w2| Complex64::from_polar(decay, 0.5 * self.beta2_s2_per_km * w2 * z_km))
            .collect()
    }

    /// Step lengths covering the span: whole steps plus one partial step.
    fn steps(&self) -> Vec<f64> {
        let len = self.fiber.length_km;
        if len == 0.0 {
            return Vec::new();
        }
        let whole = (len / self.step_km).floor() as usize;
        let rest = len - whole as f64 * self.step_km;
        let mut steps = vec![self.step_km; whole];
        if rest > 1e-9 * self.step_km {
            steps.push(rest);
        }
        steps
    }

    /// Kerr phase coefficient for a step of length `h`, applied at the step
    /// midpoint. Uses the exact loss-weighted length `2·sinh(αh/2)/α` so the
    /// phase integrates attenuation exactly within each step.
    fn kerr_coefficient(&self, h: f64) -> f64 {
        let a = self.alpha_per_km;
        let h_eff = if a * h < 1e-12 {
            h
        } else {
            2.0 * (0.5 * a * h).sinh() / a
        };
        self.fiber.nonlinear_factor * self.fiber.gamma_per_w_km * h_eff
    }

    /// Propagates the field over one span in place.
    pub fn propagate(&mut self, wave: &mut IqWaveform) -> Result<()> {
        if wave.len() != self.n {
            return error::input(format!("waveform has {} samples, propagator built for {}", wave.len(), self.n));
        }
        let steps = self.steps();
        if steps.is_empty() {
            return Ok(());
        }
        if self.fiber.gamma_per_w_km == 0.0 || self.fiber.nonlinear_factor == 0.0 {
            let op = self.linear_operator(self.fiber.length_km);
            for pol in wave.pols_mut() {
                self.spectral.filter(pol, &op);
            }
            return check_finite(wave, steps.len() - 1);
        }

        let IqWaveform { pol_x, pol_y, .. } = wave;
        self.spectral.forward(pol_x);
        self.spectral.forward(pol_y);
        let first = if steps[0] == self.step_km {
            self.half_step.clone()
        } else {
            self.stepping_operator(steps[0] / 2.0)
        };
        apply(pol_x, &first);
        apply(pol_y, &first);

        for (i, &h) in steps.iter().enumerate() {
            self.spectral.inverse_unscaled(pol_x);
            self.spectral.inverse_unscaled(pol_y);

            let c = self.kerr_coefficient(h);
            let mut total = 0.0;
            for (x, y) in pol_x.iter_mut().zip(pol_y.iter_mut()) {
                let p = x.norm_sqr() + y.norm_sqr();
                total += p;
                let rot = kerr_rotation(c * p);
                *x *= rot;
                *y *= rot;
            }
            if !total.is_finite() {
                return Err(Error::NumericalBlowup { step: i });
            }

            self.spectral.forward(pol_x);
            self.spectral.forward(pol_y);
            let next = steps.get(i + 1).copied();
            let op_owned;
            let op: &[Complex64] = match next {
                Some(nh) if h == self.step_km && nh == self.step_km => &self.full_step,
                None if h == self.step_km => &self.half_step,
                Some(nh) => {
                    op_owned = self.stepping_operator(0.5 * (h + nh));
                    &op_owned
                }
                None => {
                    op_owned = self.stepping_operator(0.5 * h);
                    &op_owned
                }
            };
            apply(pol_x, op);
            apply(pol_y, op);
        }
        self.spectral.inverse_unscaled(pol_x);
        self.spectral.inverse_unscaled(pol_y);
        check_finite(wave, steps.len() - 1)
    }
}

/// `e^{iφ}`. Per-step Kerr phases are tiny, where the truncated series is
/// exact to double precision and much cheaper than `sin_cos`.
#[inline]
fn kerr_rotation(phi: f64) -> Complex64 {
    if phi.abs() < 0.03 {
        let p2 = phi * phi;
        let cos = 1.0 - p2 / 2.0 * (1.0 - p2 / 12.0 * (1.0 - p2 / 30.0 * (1.0 - p2 / 56.0)));
        let sin = phi * (1.0 - p2 / 6.0 * (1.0 - p2 / 20.0 * (1.0 - p2 / 42.0 * (1.0 - p2 / 72.0))));
        Complex64::new(cos, sin)
    } else {
        let (s, c) = phi.sin_cos();
        Complex64::new(c, s)
    }
}

fn apply(data: &mut [Complex64], op: &[Complex64]) {
    for (v, h) in data.iter_mut().zip(op) {
        *v *= h;
    }
}

fn check_finite(wave: &IqWaveform, step: usize) -> Result<()> {
    if wave.pol_x.iter().chain(&wave.pol_y).all(|s| s.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericalBlowup { step })
    }
}

/// Propagates the field over one fiber span.
pub fn propagate_span(wave: &IqWaveform, fiber: &FiberParams, step_km: f64) -> Result<IqWaveform> {
    let mut out = wave.clone();
    SplitStep::new(*fiber, step_km, wave.len(), wave.sample_rate())?.propagate(&mut out)?;
    Ok(out)
}

/// Propagates over every span of the link. Each span is followed by its
/// amplifier; dispersion-managed links then cancel the span's dispersion
/// with an ideal lossless element. The amplifier of span `k` draws its
/// noise from a generator derived from `(seed, k)`.
pub fn propagate_link(wave: &IqWaveform, link: &LinkSpec, seed_value: u64) -> Result<IqWaveform> {
    link.validate()?;
    let mut out = wave.clone();
    let mut split = SplitStep::new(link.span, link.ssfm_step_km, wave.len(), wave.sample_rate())?;
    let carrier = link.span.carrier_hz();
    let beta2 = link.span.beta2_ps2_per_km();
    for span in 0..link.n_spans {
        split.propagate(&mut out)?;
        let mut rng = seed::rng(seed::derive(seed_value, &[seed::stream::SPAN, span as u64]));
        amplify(&mut out, &link.amp, carrier, &mut rng)?;
        if link.dispersion_managed {
            cd_compensate_in_place(&mut out, beta2, link.span.length_km)?;
        }
    }
    Ok(out)
}
