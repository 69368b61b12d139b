//! Parzen-window classifier over a labelled received training cloud.
//!
//! Each training point within distance `R` of the query contributes
//! `1/D` to the score of its class; the decision is the class with the
//! largest summed score. Queries with no training point inside the window
//! fall back to the label of the globally nearest training point.

use num_complex::Complex64;

use crate::constellation::Alphabet;
use crate::error::{self, Result};

/// Ratio of the distance clamp to the training cloud's rms radius.
pub const CLAMP_RATIO: f64 = 1e-9;
/// Number of candidates in the radius grid search.
pub const RADIUS_GRID_STEPS: usize = 40;
/// Radius search bounds, as multiples of the scaled minimum distance.
pub const RADIUS_GRID_LO: f64 = 0.05;
pub const RADIUS_GRID_HI: f64 = 2.0;

/// Window contribution of training point `y_t` to query `y_n`.
///
/// `1/max(D, d0)` for `D < R`, zero otherwise, where `D` is the Euclidean
/// distance in the complex plane.
#[inline]
pub fn window_value(y_n: Complex64, y_t: Complex64, radius: f64, d0: f64) -> f64 {
    let d = (y_n - y_t).norm();
    if d < radius {
        1.0 / d.max(d0)
    } else {
        0.0
    }
}

/// Per-class accumulated window scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassScores(pub Vec<f64>);

impl ClassScores {
    /// Index of the largest score, lowest index on ties. `None` when every
    /// score is zero.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (m, &s) in self.0.iter().enumerate() {
            if s > best.map_or(0.0, |b| b.1) {
                best = Some((m, s));
            }
        }
        best.map(|b| b.0)
    }

    pub fn is_empty_window(&self) -> bool {
        self.0.iter().all(|&s| s == 0.0)
    }
}

/// Uniform bucket grid over the training points. Cells list their points in
/// ascending index order.
#[derive(Debug, Clone)]
struct BucketGrid {
    origin: Complex64,
    cell: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

const MAX_CELLS_PER_AXIS: usize = 1024;

impl BucketGrid {
    fn build(points: &[Complex64], radius: f64) -> Self {
        let (mut lo, mut hi) = (points[0], points[0]);
        for p in points {
            lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        let extent = (hi.re - lo.re).max(hi.im - lo.im).max(f64::MIN_POSITIVE);
        let cell = radius.max(extent / MAX_CELLS_PER_AXIS as f64);
        let nx = ((hi.re - lo.re) / cell).floor() as usize + 1;
        let ny = ((hi.im - lo.im) / cell).floor() as usize + 1;
        let mut cells = vec![Vec::new(); nx * ny];
        for (i, p) in points.iter().enumerate() {
            let cx = (((p.re - lo.re) / cell).floor() as usize).min(nx - 1);
            let cy = (((p.im - lo.im) / cell).floor() as usize).min(ny - 1);
            cells[cy * nx + cx].push(i as u32);
        }
        Self {
            origin: lo,
            cell,
            nx,
            ny,
            cells,
        }
    }

    fn axis_range(&self, lo: f64, hi: f64, origin: f64, n: usize) -> Option<(usize, usize)> {
        let a = ((lo - origin) / self.cell).floor();
        let b = ((hi - origin) / self.cell).floor();
        if b < 0.0 || a > (n - 1) as f64 || a.is_nan() || b.is_nan() {
            return None;
        }
        Some((a.max(0.0) as usize, (b as usize).min(n - 1)))
    }

    /// Indices of every point whose axis-aligned offset from `q` is within
    /// `radius`, in ascending order.
    fn candidates(&self, q: Complex64, radius: f64, out: &mut Vec<u32>) {
        out.clear();
        let Some((x0, x1)) = self.axis_range(q.re - radius, q.re + radius, self.origin.re, self.nx) else {
            return;
        };
        let Some((y0, y1)) = self.axis_range(q.im - radius, q.im + radius, self.origin.im, self.ny) else {
            return;
        };
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                out.extend_from_slice(&self.cells[cy * self.nx + cx]);
            }
        }
        out.sort_unstable();
    }
}

/// Parzen-window detector for one polarization.
#[derive(Debug, Clone)]
pub struct PwDetector {
    points: Vec<Complex64>,
    labels: Vec<usize>,
    n_classes: usize,
    radius: f64,
    d0: f64,
    fallback: bool,
    grid: BucketGrid,
}

/// Root-mean-square radius of a point cloud.
pub fn rms_radius(points: &[Complex64]) -> f64 {
    (points.iter().map(|p| p.norm_sqr()).sum::<f64>() / points.len().max(1) as f64).sqrt()
}

impl PwDetector {
    /// Builds a detector from labelled received training points. Every
    /// class `0..n_classes` must be present.
    pub fn new(points: Vec<Complex64>, labels: Vec<usize>, n_classes: usize, radius: f64) -> Result<Self> {
        if points.is_empty() {
            return error::config("empty training set");
        }
        if points.len() != labels.len() {
            return error::input("training points and labels differ in length");
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return error::config(format!("window radius must be positive, got {radius}"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return error::input("training points must be finite");
        }
        let mut present = vec![false; n_classes];
        for &l in &labels {
            if l >= n_classes {
                return error::input(format!("label {l} out of range"));
            }
            present[l] = true;
        }
        if let Some(missing) = present.iter().position(|&p| !p) {
            return error::config(format!("class {missing} has no training points"));
        }
        let d0 = CLAMP_RATIO * rms_radius(&points);
        let grid = BucketGrid::build(&points, radius);
        Ok(Self {
            points,
            labels,
            n_classes,
            radius,
            d0: if d0 > 0.0 { d0 } else { f64::MIN_POSITIVE },
            fallback: true,
            grid,
        })
    }

    /// Overrides the distance clamp.
    pub fn with_clamp(mut self, d0: f64) -> Result<Self> {
        if !(d0 > 0.0) {
            return error::config("distance clamp must be positive");
        }
        self.d0 = d0;
        Ok(self)
    }

    /// Enables or disables the nearest-neighbour fallback for empty windows.
    /// Without it an empty window resolves to label 0.
    pub fn with_fallback(mut self, enabled: bool) -> Self {
        self.fallback = enabled;
        self
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn clamp(&self) -> f64 {
        self.d0
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn training_points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn training_labels(&self) -> &[usize] {
        &self.labels
    }

    fn nearest_label(&self, y: Complex64) -> usize {
        let mut best = (0usize, f64::INFINITY);
        for (t, p) in self.points.iter().enumerate() {
            let d = (y - p).norm();
            if d < best.1 {
                best = (t, d);
            }
        }
        self.labels[best.0]
    }

    fn decide(&self, y: Complex64, scores: ClassScores) -> (usize, ClassScores) {
        match scores.argmax() {
            Some(m) => (m, scores),
            None if self.fallback => (self.nearest_label(y), scores),
            None => (0, scores),
        }
    }

    /// Classifies one query using the bucket grid to skip distant points.
    pub fn classify(&self, y: Complex64) -> (usize, ClassScores) {
        let mut buf = Vec::new();
        self.classify_with(y, &mut buf)
    }

    fn classify_with(&self, y: Complex64, buf: &mut Vec<u32>) -> (usize, ClassScores) {
        let mut scores = vec![0.0; self.n_classes];
        self.grid.candidates(y, self.radius, buf);
        // Ascending index order keeps the floating-point sums identical to
        // the exhaustive loop.
        for &t in buf.iter() {
            let t = t as usize;
            let f = window_value(y, self.points[t], self.radius, self.d0);
            if f != 0.0 {
                scores[self.labels[t]] += f;
            }
        }
        self.decide(y, ClassScores(scores))
    }

    /// Reference implementation: exhaustive loop over all training points.
    pub fn classify_naive(&self, y: Complex64) -> (usize, ClassScores) {
        let mut scores = vec![0.0; self.n_classes];
        for (p, &l) in self.points.iter().zip(&self.labels) {
            scores[l] += window_value(y, *p, self.radius, self.d0);
        }
        self.decide(y, ClassScores(scores))
    }

    pub fn classify_all(&self, ys: &[Complex64]) -> Vec<usize> {
        let mut buf = Vec::new();
        ys.iter().map(|&y| self.classify_with(y, &mut buf).0).collect()
    }
}

/// Outcome of the radius grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSearch {
    pub radius: f64,
    /// `(candidate radius, validation symbol errors)` in ascending radius.
    pub candidates: Vec<(f64, usize)>,
    pub n_validation: usize,
}

/// Geometric grid of `steps` radii on `[lo, hi]`.
pub fn geometric_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln() / (steps - 1) as f64;
    (0..steps).map(|k| lo * (ratio * k as f64).exp()).collect()
}

/// Splits labelled points into interleaved fit (even index) and validation
/// (odd index) halves.
pub fn interleaved_split(
    points: &[Complex64],
    labels: &[usize],
) -> ((Vec<Complex64>, Vec<usize>), (Vec<Complex64>, Vec<usize>)) {
    let mut fit = (Vec::new(), Vec::new());
    let mut val = (Vec::new(), Vec::new());
    for (i, (&p, &l)) in points.iter().zip(labels).enumerate() {
        let half = if i % 2 == 0 { &mut fit } else { &mut val };
        half.0.push(p);
        half.1.push(l);
    }
    (fit, val)
}

/// Validation symbol errors of a detector fit on `fit` with window `radius`.
pub fn validation_errors(
    fit: &(Vec<Complex64>, Vec<usize>),
    val: &(Vec<Complex64>, Vec<usize>),
    n_classes: usize,
    radius: f64,
) -> Result<usize> {
    let det = PwDetector::new(fit.0.clone(), fit.1.clone(), n_classes, radius)?;
    Ok(det
        .classify_all(&val.0)
        .iter()
        .zip(&val.1)
        .filter(|(a, b)| a != b)
        .count())
}

/// Grid-searches the window radius on an interleaved fit/validation split.
///
/// Candidates span `[0.05, 2]` times the alphabet's minimum distance scaled
/// to the cloud's rms radius, in [`RADIUS_GRID_STEPS`] geometric steps. The
/// smallest radius with the fewest validation errors wins.
pub fn radius_search(points: &[Complex64], labels: &[usize], alphabet: &Alphabet) -> Result<RadiusSearch> {
    let m = alphabet.order();
    if points.len() != labels.len() {
        return error::input("training points and labels differ in length");
    }
    if points.len() < 2 * m {
        return error::config(format!("radius search needs at least {} labelled points, got {}", 2 * m, points.len()));
    }
    let (fit, val) = interleaved_split(points, labels);
    let d_min = alphabet.min_distance() * rms_radius(points);
    if !(d_min > 0.0) {
        return error::config("training cloud has zero energy");
    }
    let mut candidates = Vec::with_capacity(RADIUS_GRID_STEPS);
    let mut best: Option<(f64, usize)> = None;
    for r in geometric_grid(RADIUS_GRID_LO * d_min, RADIUS_GRID_HI * d_min, RADIUS_GRID_STEPS) {
        let errors = validation_errors(&fit, &val, m, r)?;
        candidates.push((r, errors));
        if best.is_none_or(|b| errors < b.1) {
            best = Some((r, errors));
        }
    }
    Ok(RadiusSearch {
        radius: best.expect("non-empty grid").0,
        candidates,
        n_validation: val.0.len(),
    })
}

/// Window radius minimizing validation symbol errors. See [`radius_search`].
pub fn optimize_radius(points: &[Complex64], labels: &[usize], alphabet: &Alphabet) -> Result<f64> {
    radius_search(points, labels, alphabet).map(|s| s.radius)
}

/// Fits a detector on the full training set with an optimized radius.
pub fn train(points: &[Complex64], labels: &[usize], alphabet: &Alphabet) -> Result<(PwDetector, RadiusSearch)> {
    let search = radius_search(points, labels, alphabet)?;
    let det = PwDetector::new(points.to_vec(), labels.to_vec(), alphabet.order(), search.radius)?;
    Ok((det, search))
}
