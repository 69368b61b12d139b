use num_complex::Complex64;

use crate::constellation::Alphabet;
use crate::dsp::estimate_complex_gain;
use crate::error::{self, Result};

/// Label of the alphabet point nearest to `y / scale`; lowest label on ties.
pub fn med_classify(y: Complex64, alphabet: &Alphabet, scale: f64) -> usize {
    let z = y / scale;
    let mut best = (0usize, f64::INFINITY);
    for (label, p) in alphabet.points().iter().enumerate() {
        let d = (z - p).norm_sqr();
        if d < best.1 {
            best = (label, d);
        }
    }
    best.0
}

/// Minimum-Euclidean-distance detector with training-aided phase and
/// amplitude normalization.
#[derive(Debug, Clone)]
pub struct MedDetector {
    alphabet: Alphabet,
    rotation: f64,
    scale: f64,
}

impl MedDetector {
    pub fn new(alphabet: Alphabet, rotation: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !rotation.is_finite() {
            return error::config("MED scale must be positive and rotation finite");
        }
        Ok(Self {
            alphabet,
            rotation,
            scale,
        })
    }

    /// Estimates the common phase `arg Σ y·conj(x)` and the amplitude
    /// `|Σ y·conj(x)| / Σ|x|²` from received/sent training symbols.
    pub fn fit(received: &[Complex64], sent: &[Complex64], alphabet: &Alphabet) -> Result<Self> {
        let gain = estimate_complex_gain(received, sent)?;
        Self::new(alphabet.clone(), gain.arg(), gain.norm())
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn classify(&self, y: Complex64) -> usize {
        let derot = Complex64::from_polar(1.0, -self.rotation);
        med_classify(y * derot, &self.alphabet, self.scale)
    }

    pub fn classify_all(&self, ys: &[Complex64]) -> Vec<usize> {
        let derot = Complex64::from_polar(1.0, -self.rotation);
        ys.iter()
            .map(|&y| med_classify(y * derot, &self.alphabet, self.scale))
            .collect()
    }
}
