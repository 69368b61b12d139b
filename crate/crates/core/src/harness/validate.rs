//! Analytic self-checks of the channel model.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::run::run_point;
use super::sweep::{point_seed, SweepMode};
use crate::constellation::{BlockRole, SymbolBlock};
use crate::dsp::{cd_compensate, dbm_to_watts, rrc_shape, IqWaveform};
use crate::error::Result;
use crate::fiber::{amplify, propagate_link, propagate_span, AmpParams, FiberParams, LinkSpec};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            tolerance,
            passed: value.is_finite() && value.abs() < tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn test_waveform(cfg: &RunConfig, n_sym: usize, power_dbm: f64) -> Result<IqWaveform> {
    let alphabet = cfg.alphabet()?;
    let mut rng = seed::rng(cfg.seed);
    use rand::Rng;
    let lx = (0..n_sym).map(|_| rng.gen_range(0..alphabet.order())).collect();
    let ly = (0..n_sym).map(|_| rng.gen_range(0..alphabet.order())).collect();
    let block = SymbolBlock::from_labels(lx, ly, &alphabet, BlockRole::Testing)?;
    rrc_shape(&block, &cfg.rrc(), cfg.symbol_rate(), power_dbm)
}

fn rms_rel(a: &IqWaveform, b: &IqWaveform) -> f64 {
    let err: f64 = a
        .pol_x
        .iter()
        .chain(&a.pol_y)
        .zip(b.pol_x.iter().chain(&b.pol_y))
        .map(|(p, q)| (p - q).norm_sqr())
        .sum();
    (err / b.energy()).sqrt()
}

/// Dispersion-only span followed by compensation returns the input.
pub fn check_dispersion_inverse(cfg: &RunConfig) -> Result<CheckResult> {
    let wave = test_waveform(cfg, 2048, 0.0)?;
    let fiber = FiberParams { gamma_per_w_km: 0.0, ..cfg.fiber() };
    let out = propagate_span(&wave, &fiber, cfg.ssfm_step_km)?;
    let mut back = cd_compensate(&out, fiber.beta2_ps2_per_km(), fiber.length_km)?;
    back.scale((0.5 * fiber.alpha_per_km() * fiber.length_km).exp());
    Ok(CheckResult::new("dispersion_inverse_rms", rms_rel(&back, &wave), 1e-9))
}

/// CW self-phase modulation equals `κ·γ·P·L_eff` over one span.
pub fn check_spm_phase(cfg: &RunConfig) -> Result<CheckResult> {
    let fiber = FiberParams { dispersion_ps_nm_km: 0.0, ..cfg.fiber() };
    let p = dbm_to_watts(0.0);
    let n = 256;
    let wave = IqWaveform::new(
        vec![Complex64::new(p.sqrt(), 0.0); n],
        vec![Complex64::default(); n],
        cfg.symbol_rate(),
        cfg.samples_per_symbol,
    )?;
    let out = propagate_span(&wave, &fiber, cfg.ssfm_step_km)?;
    let expect = fiber.nonlinear_factor * fiber.gamma_per_w_km * p * fiber.effective_length_km(fiber.length_km);
    Ok(CheckResult::new("spm_phase_error_rad", out.pol_x[n / 2].arg() - expect, 1e-9))
}

/// Lossless, noiseless nonlinear link conserves energy.
pub fn check_energy_conservation(cfg: &RunConfig) -> Result<CheckResult> {
    let wave = test_waveform(cfg, 2048, 3.0)?;
    let link = LinkSpec {
        span: FiberParams { alpha_db_per_km: 0.0, ..cfg.fiber() },
        amp: AmpParams { gain_db: 0.0, ase_enabled: false, ..AmpParams::default() },
        n_spans: 3,
        dispersion_managed: false,
        ssfm_step_km: cfg.ssfm_step_km,
    };
    let out = propagate_link(&wave, &link, cfg.seed)?;
    Ok(CheckResult::new(
        "energy_conservation_rel",
        (out.energy() - wave.energy()) / wave.energy(),
        1e-9,
    ))
}

/// Measured ASE variance over 10⁶ samples against `S·Fs`.
pub fn check_ase_variance(cfg: &RunConfig) -> Result<CheckResult> {
    let amp = cfg.link(1).amp;
    let amp = AmpParams { ase_enabled: true, ..amp };
    let n = 1_000_000;
    let mut wave = IqWaveform::new(
        vec![Complex64::default(); n],
        vec![Complex64::default(); n],
        cfg.symbol_rate(),
        cfg.samples_per_symbol,
    )?;
    let carrier = cfg.fiber().carrier_hz();
    amplify(&mut wave, &amp, carrier, &mut seed::rng(cfg.seed))?;
    let expect = amp.ase_psd(carrier) * wave.sample_rate();
    if expect == 0.0 {
        return Ok(CheckResult::new("ase_variance_rel", 0.0, 0.01));
    }
    let measured = wave.energy() / (2 * n) as f64;
    Ok(CheckResult::new("ase_variance_rel", (measured - expect) / expect, 0.01))
}

/// Q change per detector when the split step is halved, at the first
/// configured launch power.
pub fn check_step_halving(cfg: &RunConfig) -> Result<Vec<CheckResult>> {
    let power = cfg.launch_powers_dbm.first().copied().unwrap_or(cfg.reach_power_dbm);
    let reach = cfg.n_spans as f64 * cfg.span_length_km;
    let s = point_seed(cfg.seed, SweepMode::Power, power, reach);
    let coarse = run_point(cfg, power, cfg.n_spans, s)?;
    let fine_cfg = RunConfig { ssfm_step_km: cfg.ssfm_step_km / 2.0, ..cfg.clone() };
    let fine = run_point(&fine_cfg, power, cfg.n_spans, s)?;
    Ok(coarse
        .iter()
        .zip(&fine)
        .map(|(a, b)| {
            CheckResult::new(
                &format!("step_halving_dq_db_{}", a.detector.as_str()),
                a.report.q_factor_db - b.report.q_factor_db,
                0.05,
            )
        })
        .collect())
}

/// Runs every analytic check; the step-halving check runs full simulation
/// points and is optional.
pub fn validate_channel(cfg: &RunConfig, include_convergence: bool) -> Result<ValidationReport> {
    cfg.validate()?;
    let mut checks = vec![
        check_dispersion_inverse(cfg)?,
        check_spm_phase(cfg)?,
        check_energy_conservation(cfg)?,
        check_ase_variance(cfg)?,
    ];
    if include_convergence {
        checks.extend(check_step_halving(cfg)?);
    }
    Ok(ValidationReport { checks })
}
