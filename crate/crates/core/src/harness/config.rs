use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::constellation::Alphabet;
use crate::dsp::RrcSpec;
use crate::error::{self, Result};
use crate::fiber::{AmpParams, FiberParams, LinkSpec, MANAKOV_FACTOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Pw,
    Med,
}

impl DetectorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DetectorKind::Pw => "pw",
            DetectorKind::Med => "med",
        }
    }
}

impl std::str::FromStr for DetectorKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pw" => Ok(DetectorKind::Pw),
            "med" => Ok(DetectorKind::Med),
            other => error::config(format!("unknown detector {other:?}")),
        }
    }
}

/// Smallest accepted test-block length per polarization.
pub const MIN_TEST_SYMBOLS: usize = 4096;

/// One fully specified experiment. Loaded from a flat TOML file; every key
/// is optional and defaults to the 10 Gbaud, 15 × 80 km dispersion-managed
/// 16-QAM setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub symbol_rate_gbaud: f64,
    pub qam_order: usize,
    pub samples_per_symbol: usize,
    pub roll_off: f64,
    pub rrc_span_symbols: usize,

    pub n_spans: usize,
    pub span_length_km: f64,
    pub alpha_db_per_km: f64,
    pub dispersion_ps_nm_km: f64,
    pub gamma_per_w_km: f64,
    pub wavelength_nm: f64,
    pub nonlinear_factor: f64,
    pub amp_gain_db: f64,
    pub amp_noise_figure_db: f64,
    pub ase_enabled: bool,
    pub dispersion_managed: bool,
    pub ssfm_step_km: f64,

    pub launch_powers_dbm: Vec<f64>,
    pub reach_power_dbm: f64,
    pub reaches_km: Vec<f64>,
    pub q_threshold_db: f64,

    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
    pub detectors: Vec<DetectorKind>,
    pub workers: usize,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            symbol_rate_gbaud: 10.0,
            qam_order: 16,
            samples_per_symbol: 8,
            roll_off: 0.1,
            rrc_span_symbols: 64,
            n_spans: 15,
            span_length_km: 80.0,
            alpha_db_per_km: 0.2,
            dispersion_ps_nm_km: 16.0,
            gamma_per_w_km: 1.4,
            wavelength_nm: 1550.0,
            nonlinear_factor: MANAKOV_FACTOR,
            amp_gain_db: 16.0,
            amp_noise_figure_db: 5.5,
            ase_enabled: true,
            dispersion_managed: true,
            ssfm_step_km: 0.5,
            launch_powers_dbm: (-7..=2).map(f64::from).collect(),
            reach_power_dbm: -4.0,
            reaches_km: (0..14).map(|k| 800.0 + 80.0 * k as f64).collect(),
            q_threshold_db: 10.0,
            n_train: 2000,
            n_test: 32768,
            seed: 1,
            detectors: vec![DetectorKind::Pw, DetectorKind::Med],
            workers: 1,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn symbol_rate(&self) -> f64 {
        self.symbol_rate_gbaud * 1e9
    }

    pub fn alphabet(&self) -> Result<Alphabet> {
        Alphabet::qam(self.qam_order)
    }

    pub fn rrc(&self) -> RrcSpec {
        RrcSpec {
            roll_off: self.roll_off,
            span_symbols: self.rrc_span_symbols,
            samples_per_symbol: self.samples_per_symbol,
        }
    }

    pub fn fiber(&self) -> FiberParams {
        FiberParams {
            alpha_db_per_km: self.alpha_db_per_km,
            dispersion_ps_nm_km: self.dispersion_ps_nm_km,
            gamma_per_w_km: self.gamma_per_w_km,
            length_km: self.span_length_km,
            wavelength_nm: self.wavelength_nm,
            nonlinear_factor: self.nonlinear_factor,
        }
    }

    pub fn link(&self, n_spans: usize) -> LinkSpec {
        LinkSpec {
            span: self.fiber(),
            amp: AmpParams {
                gain_db: self.amp_gain_db,
                noise_figure_db: self.amp_noise_figure_db,
                ase_enabled: self.ase_enabled,
            },
            n_spans,
            dispersion_managed: self.dispersion_managed,
            ssfm_step_km: self.ssfm_step_km,
        }
    }

    /// Span count for a reach, which must be a whole number of spans.
    pub fn spans_for_reach(&self, reach_km: f64) -> Result<usize> {
        let spans = reach_km / self.span_length_km;
        let rounded = spans.round();
        if rounded < 1.0 || (spans - rounded).abs() > 1e-9 {
            return error::config(format!(
                "reach {reach_km} km is not a positive multiple of the {} km span",
                self.span_length_km
            ));
        }
        Ok(rounded as usize)
    }

    pub fn validate(&self) -> Result<()> {
        self.alphabet()?;
        self.rrc().validate()?;
        self.link(self.n_spans).validate()?;
        if !(self.symbol_rate_gbaud > 0.0) {
            return error::config("symbol rate must be positive");
        }
        if self.n_test < MIN_TEST_SYMBOLS {
            return error::config(format!("n_test must be at least {MIN_TEST_SYMBOLS}"));
        }
        let min_train = (2 * self.qam_order).max(crate::dsp::MIN_PHASE_TRAINING);
        if self.n_train < min_train {
            return error::config(format!("n_train must be at least {min_train}"));
        }
        if self.detectors.is_empty() {
            return error::config("at least one detector is required");
        }
        if self.workers == 0 {
            return error::config("workers must be at least 1");
        }
        if self.launch_powers_dbm.iter().chain(&self.reaches_km).any(|v| !v.is_finite()) {
            return error::config("power and reach grids must be finite");
        }
        for &r in &self.reaches_km {
            self.spans_for_reach(r)?;
        }
        Ok(())
    }
}
