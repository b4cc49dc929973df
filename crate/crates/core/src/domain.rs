//! Input domains, deterministic sampling and floating-point comparison.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Default relative tolerance for comparing closed-form evaluations.
pub const REL_TOL: f64 = 1e-12;
/// Absolute floor under every relative comparison.
pub const ABS_FLOOR: f64 = 1e-300;

/// `|a - b| <= max(rel * max(|a|, |b|), ABS_FLOOR)`.
pub fn approx_eq(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= (rel * a.abs().max(b.abs())).max(ABS_FLOOR)
}

/// Relative difference scaled by `max(|a|, |b|, ABS_FLOOR)`.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(ABS_FLOOR)
}

/// An interval of the real line, possibly unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lower: f64,
    pub upper: f64,
    pub lower_open: bool,
    pub upper_open: bool,
}

impl Domain {
    /// Open interval `(lower, upper)`. Panics if `lower >= upper`.
    pub fn open(lower: f64, upper: f64) -> Self {
        assert!(lower < upper, "domain needs lower < upper");
        Domain { lower, upper, lower_open: true, upper_open: true }
    }

    pub fn closed(lower: f64, upper: f64) -> Self {
        assert!(lower < upper, "domain needs lower < upper");
        Domain { lower, upper, lower_open: false, upper_open: false }
    }

    /// `(0, ∞)`, the default domain.
    pub fn positive() -> Self {
        Domain::open(0.0, f64::INFINITY)
    }

    pub fn real_line() -> Self {
        Domain::open(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn contains(&self, v: f64) -> bool {
        if v.is_nan() {
            return false;
        }
        let above = if self.lower_open { v > self.lower } else { v >= self.lower };
        let below = if self.upper_open { v < self.upper } else { v <= self.upper };
        above && below
    }

    pub fn is_positive(&self) -> bool {
        self.lower >= 0.0 && (self.lower > 0.0 || self.lower_open)
    }

    /// Finite window used for drawing samples. Infinite ends are replaced by
    /// a bound 1000 units away from the other end (or from zero).
    pub fn sampling_window(&self) -> (f64, f64) {
        match (self.lower.is_finite(), self.upper.is_finite()) {
            (true, true) => (self.lower, self.upper),
            (true, false) => (self.lower, self.lower.max(0.0) + 1e3),
            (false, true) => (self.upper.min(0.0) - 1e3, self.upper),
            (false, false) => (-1e3, 1e3),
        }
    }
}

impl Default for Domain {
    fn default() -> Self {
        Domain::positive()
    }
}

/// Deterministic sampling parameters: the same seed and count always yield
/// the same vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub count: usize,
    pub seed: u64,
    pub domain: Domain,
    /// Relative tolerance for the sampled checks.
    pub tol: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig { count: 256, seed: 42, domain: Domain::open(0.0, 10.0), tol: REL_TOL }
    }
}

impl SampleConfig {
    pub fn new(count: usize, seed: u64, domain: Domain) -> Self {
        SampleConfig { count, seed, domain, tol: REL_TOL }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// `count` uniform vectors of length `p` in the sampling window.
    pub fn points(&self, p: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (lo, hi) = self.domain.sampling_window();
        (0..self.count).map(|_| (0..p).map(|_| self.draw(&mut rng, lo, hi)).collect()).collect()
    }

    /// Uniform samples followed by `p - 1` corner probes: the vector whose
    /// first `k` coordinates sit near the low end of the window and whose
    /// remaining coordinates sit near the high end. Structural checks use
    /// these to reach spreads that uniform draws rarely produce.
    pub fn points_with_corners(&self, p: usize) -> Vec<Vec<f64>> {
        let mut pts = self.points(p);
        let (lo, hi) = self.domain.sampling_window();
        let margin = 1e-3 * (hi - lo);
        let (low, high) = (lo + margin, hi - margin);
        for k in 1..p {
            pts.push((0..p).map(|i| if i < k { low } else { high }).collect());
        }
        pts
    }

    fn draw(&self, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
        loop {
            let v = lo + rng.gen::<f64>() * (hi - lo);
            if self.domain.contains(v) {
                return v;
            }
        }
    }
}
