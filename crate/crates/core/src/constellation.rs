//! Square QAM alphabets, Gray bit labels and symbol (de)mapping.
//!
//! Labels are integers `0..M` in alphabet-point order. The point with label
//! `i * side + q` sits at in-phase level index `i` and quadrature level index
//! `q`, where level index `k` maps to amplitude `2k - (side - 1)` before
//! normalization. Each axis carries a reflected Gray code, so grid-adjacent
//! points differ in exactly one bit.

use num_complex::Complex64;

use crate::error::{self, Result};

/// A normalized, Gray-labelled square QAM constellation.
#[derive(Debug, Clone, PartialEq)]
pub struct Alphabet {
    order: usize,
    bits_per_symbol: usize,
    points: Vec<Complex64>,
    bit_map: Vec<u32>,
    label_of_bits: Vec<usize>,
}

#[inline]
fn gray(k: usize) -> usize {
    k ^ (k >> 1)
}

impl Alphabet {
    /// Builds a unit-average-energy, Gray-mapped square QAM of order `m`.
    pub fn qam(m: usize) -> Result<Self> {
        if !matches!(m, 4 | 16 | 64) {
            return error::config(format!("unsupported QAM order {m}; expected 4, 16 or 64"));
        }
        let side = (m as f64).sqrt().round() as usize;
        let bits_per_symbol = m.trailing_zeros() as usize;
        let half = bits_per_symbol / 2;

        let level = |k: usize| (2 * k) as f64 - (side - 1) as f64;
        let raw: Vec<Complex64> = (0..m)
            .map(|label| Complex64::new(level(label / side), level(label % side)))
            .collect();
        let energy = raw.iter().map(|p| p.norm_sqr()).sum::<f64>() / m as f64;
        let scale = energy.sqrt().recip();
        let points = raw.into_iter().map(|p| p * scale).collect();

        let bit_map: Vec<u32> = (0..m)
            .map(|label| ((gray(label / side) << half) | gray(label % side)) as u32)
            .collect();
        let mut label_of_bits = vec![0; m];
        for (label, &bits) in bit_map.iter().enumerate() {
            label_of_bits[bits as usize] = label;
        }

        Ok(Self {
            order: m,
            bits_per_symbol,
            points,
            bit_map,
            label_of_bits,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Number of amplitude levels per axis.
    pub fn side(&self) -> usize {
        (self.order as f64).sqrt().round() as usize
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    /// Gray bit pattern of `label`, most significant bit first.
    pub fn bits_of(&self, label: usize) -> u32 {
        self.bit_map[label]
    }

    pub fn bit_map(&self) -> &[u32] {
        &self.bit_map
    }

    pub fn label_of_bits(&self, bits: u32) -> usize {
        self.label_of_bits[bits as usize]
    }

    /// Minimum distance between distinct points.
    pub fn min_distance(&self) -> f64 {
        // Square grids: one level step.
        (self.points[1] - self.points[0]).norm()
    }

    /// Number of bit positions in which two labels differ.
    pub fn bit_distance(&self, a: usize, b: usize) -> u32 {
        (self.bit_map[a] ^ self.bit_map[b]).count_ones()
    }
}

/// Role of a symbol block in the detection experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockRole {
    Training,
    Testing,
}

/// Complex symbols of one polarization with their class labels.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolSymbols {
    pub symbols: Vec<Complex64>,
    pub labels: Vec<usize>,
}

impl PolSymbols {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> PolSymbols {
        PolSymbols {
            symbols: self.symbols[range.clone()].to_vec(),
            labels: self.labels[range].to_vec(),
        }
    }
}

/// Dual-polarization labelled symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolBlock {
    pub pol_x: PolSymbols,
    pub pol_y: PolSymbols,
    pub role: BlockRole,
}

impl SymbolBlock {
    pub fn len(&self) -> usize {
        self.pol_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pol_x.is_empty()
    }

    /// Builds a block from per-polarization labels.
    pub fn from_labels(
        labels_x: Vec<usize>,
        labels_y: Vec<usize>,
        alphabet: &Alphabet,
        role: BlockRole,
    ) -> Result<Self> {
        if labels_x.len() != labels_y.len() {
            return error::input("polarizations must carry the same number of symbols");
        }
        let to_pol = |labels: Vec<usize>| -> Result<PolSymbols> {
            if let Some(&bad) = labels.iter().find(|&&l| l >= alphabet.order()) {
                return error::input(format!("label {bad} out of range"));
            }
            Ok(PolSymbols {
                symbols: labels.iter().map(|&l| alphabet.point(l)).collect(),
                labels,
            })
        };
        Ok(Self {
            pol_x: to_pol(labels_x)?,
            pol_y: to_pol(labels_y)?,
            role,
        })
    }

    /// Splits off `[range]` of both polarizations as a new block.
    pub fn slice(&self, range: std::ops::Range<usize>, role: BlockRole) -> SymbolBlock {
        SymbolBlock {
            pol_x: self.pol_x.slice(range.clone()),
            pol_y: self.pol_y.slice(range),
            role,
        }
    }
}

/// Maps a bit stream (one bit per byte, values 0/1) onto dual-polarization
/// symbols. Symbols alternate between polarizations: the first
/// `bits_per_symbol` bits go to X, the next group to Y, and so on.
pub fn map_bits(bits: &[u8], alphabet: &Alphabet, role: BlockRole) -> Result<SymbolBlock> {
    let k = alphabet.bits_per_symbol();
    if !bits.len().is_multiple_of(2 * k) {
        return error::input(format!(
            "bit stream length {} is not a multiple of {}",
            bits.len(),
            2 * k
        ));
    }
    let mut labels_x = Vec::with_capacity(bits.len() / (2 * k));
    let mut labels_y = Vec::with_capacity(bits.len() / (2 * k));
    for (i, group) in bits.chunks_exact(k).enumerate() {
        let mut word = 0u32;
        for &b in group {
            if b > 1 {
                return error::input(format!("bit value {b} is not 0 or 1"));
            }
            word = (word << 1) | b as u32;
        }
        let label = alphabet.label_of_bits(word);
        if i % 2 == 0 {
            labels_x.push(label);
        } else {
            labels_y.push(label);
        }
    }
    SymbolBlock::from_labels(labels_x, labels_y, alphabet, role)
}

/// Concatenates the Gray bit patterns of `labels`, MSB first.
pub fn demap_symbols(labels: &[usize], alphabet: &Alphabet) -> Result<Vec<u8>> {
    let k = alphabet.bits_per_symbol();
    let mut bits = Vec::with_capacity(labels.len() * k);
    for &label in labels {
        if label >= alphabet.order() {
            return Err(crate::Error::Internal(format!("label {label} out of range")));
        }
        let word = alphabet.bits_of(label);
        bits.extend((0..k).rev().map(|s| ((word >> s) & 1) as u8));
    }
    Ok(bits)
}

/// Interleaves the demapped bits of both polarizations in transmission order.
pub fn demap_block(labels_x: &[usize], labels_y: &[usize], alphabet: &Alphabet) -> Result<Vec<u8>> {
    if labels_x.len() != labels_y.len() {
        return error::input("polarizations must carry the same number of symbols");
    }
    let interleaved: Vec<usize> = labels_x
        .iter()
        .zip(labels_y)
        .flat_map(|(&a, &b)| [a, b])
        .collect();
    demap_symbols(&interleaved, alphabet)
}
