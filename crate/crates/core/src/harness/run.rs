//! One simulation point: map → shape → propagate → receiver DSP → detect →
//! count.

use num_complex::Complex64;
use rand::Rng;

use super::config::{DetectorKind, RunConfig};
use crate::constellation::{map_bits, Alphabet, BlockRole, PolSymbols, SymbolBlock};
use crate::detectors::{self, rms_radius, MedDetector};
use crate::dsp::{cd_compensate_in_place, dbm_to_watts, matched_filter_downsample, rrc_shape};
use crate::error::Result;
use crate::fiber::{add_white_noise, propagate_link};
use crate::metrics::{count_errors, ErrorReport};
use crate::seed;

/// Smallest block length `≥ n` whose prime factors are all at most 7, so
/// the FFTs of the propagation grid stay fast. The padding symbols are
/// transmitted like any other but never scored.
pub fn padded_block_len(n: usize) -> usize {
    (n..)
        .find(|&m| {
            let mut r = m;
            for p in [2, 3, 5, 7] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .expect("7-smooth numbers are unbounded")
}

/// Received symbol-rate samples of one point, split into the training and
/// test blocks, with the transmitted blocks alongside.
#[derive(Debug, Clone)]
pub struct PointSignals {
    pub sent_train: SymbolBlock,
    pub sent_test: SymbolBlock,
    pub rx_train: [Vec<Complex64>; 2],
    pub rx_test: [Vec<Complex64>; 2],
}

/// Detection outcome of one detector at one point, both polarizations pooled.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorOutcome {
    pub detector: DetectorKind,
    pub report: ErrorReport,
    /// Parzen window radius relative to the received cloud's rms radius,
    /// averaged over the two polarizations.
    pub relative_radius: Option<f64>,
}

fn random_block(alphabet: &Alphabet, n: usize, rng: &mut impl Rng, role: BlockRole) -> Result<SymbolBlock> {
    let bits: Vec<u8> = (0..2 * n * alphabet.bits_per_symbol()).map(|_| rng.gen_range(0..2u8)).collect();
    map_bits(&bits, alphabet, role)
}

fn concat(blocks: &[&SymbolBlock]) -> SymbolBlock {
    let join = |f: fn(&SymbolBlock) -> &PolSymbols| PolSymbols {
        symbols: blocks.iter().flat_map(|b| f(b).symbols.iter().copied()).collect(),
        labels: blocks.iter().flat_map(|b| f(b).labels.iter().copied()).collect(),
    };
    SymbolBlock {
        pol_x: join(|b| &b.pol_x),
        pol_y: join(|b| &b.pol_y),
        role: BlockRole::Testing,
    }
}

/// Transmits `[training | test | padding]` as one contiguous waveform over
/// the link with `n_spans` spans and returns the receiver's symbol-rate
/// samples. No detector-specific processing happens here.
pub fn simulate_point(cfg: &RunConfig, power_dbm: f64, n_spans: usize, point_seed: u64) -> Result<PointSignals> {
    let alphabet = cfg.alphabet()?;
    let spec = cfg.rrc();
    let link = cfg.link(n_spans);
    link.validate()?;

    let mut rng = seed::rng(seed::derive(point_seed, &[seed::stream::BITS]));
    let sent_train = random_block(&alphabet, cfg.n_train, &mut rng, BlockRole::Training)?;
    let sent_test = random_block(&alphabet, cfg.n_test, &mut rng, BlockRole::Testing)?;
    let used = cfg.n_train + cfg.n_test;
    let pad = random_block(&alphabet, padded_block_len(used) - used, &mut rng, BlockRole::Testing)?;

    let tx = concat(&[&sent_train, &sent_test, &pad]);
    let wave = rrc_shape(&tx, &spec, cfg.symbol_rate(), power_dbm)?;
    let mut rx = propagate_link(&wave, &link, point_seed)?;
    cd_compensate_in_place(&mut rx, link.span.beta2_ps2_per_km(), link.residual_dispersion_km())?;
    let symbols = matched_filter_downsample(&rx, &spec)?;

    let split = |v: &[Complex64]| (v[..cfg.n_train].to_vec(), v[cfg.n_train..used].to_vec());
    let (train_x, test_x) = split(&symbols.pol_x);
    let (train_y, test_y) = split(&symbols.pol_y);
    Ok(PointSignals {
        sent_train,
        sent_test,
        rx_train: [train_x, train_y],
        rx_test: [test_x, test_y],
    })
}

/// Runs the configured detectors on received signals. Each polarization
/// gets its own detector instance; error counts are pooled.
pub fn detect(cfg: &RunConfig, signals: &PointSignals) -> Result<Vec<DetectorOutcome>> {
    let alphabet = cfg.alphabet()?;
    let sent_train = [&signals.sent_train.pol_x, &signals.sent_train.pol_y];
    let sent_test = [&signals.sent_test.pol_x, &signals.sent_test.pol_y];
    let truth: Vec<usize> = sent_test.iter().flat_map(|p| p.labels.iter().copied()).collect();

    let mut out = Vec::with_capacity(cfg.detectors.len());
    for &kind in &cfg.detectors {
        let mut detected = Vec::with_capacity(truth.len());
        let mut radii = Vec::new();
        for pol in 0..2 {
            let rx_train = &signals.rx_train[pol];
            let rx_test = &signals.rx_test[pol];
            match kind {
                DetectorKind::Med => {
                    let med = MedDetector::fit(rx_train, &sent_train[pol].symbols, &alphabet)?;
                    detected.extend(med.classify_all(rx_test));
                }
                DetectorKind::Pw => {
                    let (pw, _) = detectors::train(rx_train, &sent_train[pol].labels, &alphabet)?;
                    radii.push(pw.radius() / rms_radius(rx_train));
                    detected.extend(pw.classify_all(rx_test));
                }
            }
        }
        let report = count_errors(&detected, &truth, &alphabet)?;
        if report.is_statistically_thin() {
            log::warn!(
                "{} detector counted only {} bit errors; Q estimate is coarse",
                kind.as_str(),
                report.n_bit_errors
            );
        }
        out.push(DetectorOutcome {
            detector: kind,
            report,
            relative_radius: (!radii.is_empty()).then(|| radii.iter().sum::<f64>() / radii.len() as f64),
        });
    }
    Ok(out)
}

/// Full end-to-end chain for one (power, span count) point.
pub fn run_point(cfg: &RunConfig, power_dbm: f64, n_spans: usize, point_seed: u64) -> Result<Vec<DetectorOutcome>> {
    let signals = simulate_point(cfg, power_dbm, n_spans, point_seed)?;
    detect(cfg, &signals)
}

/// Back-to-back chain without fiber: white Gaussian noise is added to the
/// shaped waveform so that the per-polarization SNR in the symbol bandwidth
/// equals `snr_db`. Detection is MED with training-aided normalization.
pub fn run_back_to_back(cfg: &RunConfig, snr_db: f64, point_seed: u64) -> Result<ErrorReport> {
    let alphabet = cfg.alphabet()?;
    let spec = cfg.rrc();
    let mut rng = seed::rng(seed::derive(point_seed, &[seed::stream::BITS]));
    let n = padded_block_len(cfg.n_train + cfg.n_test);
    let tx = random_block(&alphabet, n, &mut rng, BlockRole::Testing)?;
    let power_dbm = 0.0;
    let mut wave = rrc_shape(&tx, &spec, cfg.symbol_rate(), power_dbm)?;

    let per_pol = dbm_to_watts(power_dbm) / 2.0;
    let psd = per_pol / (10f64.powf(snr_db / 10.0) * cfg.symbol_rate());
    let mut noise_rng = seed::rng(seed::derive(point_seed, &[seed::stream::NOISE]));
    let variance = psd * wave.sample_rate();
    add_white_noise(&mut wave, variance, &mut noise_rng);

    let rx = matched_filter_downsample(&wave, &spec)?;
    let mut detected = Vec::new();
    let mut truth = Vec::new();
    for (rx_pol, tx_pol) in [(&rx.pol_x, &tx.pol_x), (&rx.pol_y, &tx.pol_y)] {
        let med = MedDetector::fit(&rx_pol[..cfg.n_train], &tx_pol.symbols[..cfg.n_train], &alphabet)?;
        detected.extend(med.classify_all(&rx_pol[cfg.n_train..]));
        truth.extend_from_slice(&tx_pol.labels[cfg.n_train..]);
    }
    count_errors(&detected, &truth, &alphabet)
}
