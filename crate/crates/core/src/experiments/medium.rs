use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// How a refractive profile was generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Roughness {
    Smooth,
    Periodic(usize),
    Disordered(u64),
}

/// Refractive index `n(q)` sampled on the `D` grid points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MediumProfile {
    index: Vec<f64>,
    roughness: Roughness,
}

/// Range of disordered index values.
const DISORDER_RANGE: (f64, f64) = (1.0, 1.5);

impl MediumProfile {
    pub fn new(index: Vec<f64>, roughness: Roughness) -> Result<Self> {
        if index.len() < 2 {
            return Err(Error::invalid("a medium needs at least two grid points"));
        }
        if let Some(bad) = index.iter().find(|n| !(n.is_finite() && **n > 0.0)) {
            return Err(Error::invalid(format!("refractive index must be positive and finite, got {bad}")));
        }
        Ok(MediumProfile { index, roughness })
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        MediumProfile::new(vec![1.0; dim], Roughness::Smooth)
    }

    /// Smooth step from `low` to `high` centered between the middle grid points,
    /// `n(s) = (low + high)/2 + (high - low)/2 * tanh((s - (D-1)/2) / width)`.
    pub fn two_layer(dim: usize, low: f64, high: f64, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::invalid("interface width must be positive"));
        }
        let mid = (dim as f64 - 1.0) / 2.0;
        let index = (0..dim)
            .map(|s| 0.5 * (low + high) + 0.5 * (high - low) * ((s as f64 - mid) / width).tanh())
            .collect();
        MediumProfile::new(index, Roughness::Smooth)
    }

    /// The default smooth medium: `n = 1` then `n = 1.5` with a one-cell interface.
    pub fn smooth(dim: usize) -> Result<Self> {
        MediumProfile::two_layer(dim, 1.0, 1.5, 1.0)
    }

    /// `n(s) = 1.25 + 0.25 cos(2 pi s / r)`.
    pub fn periodic(dim: usize, period: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::invalid("period must be at least 1"));
        }
        let index = (0..dim)
            .map(|s| 1.25 + 0.25 * (2.0 * std::f64::consts::PI * s as f64 / period as f64).cos())
            .collect();
        MediumProfile::new(index, Roughness::Periodic(period))
    }

    /// Independent uniform values on every grid point, seeded.
    pub fn disordered(dim: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let index = (0..dim).map(|_| rng.random_range(DISORDER_RANGE.0..DISORDER_RANGE.1)).collect();
        MediumProfile::new(index, Roughness::Disordered(seed))
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn index(&self) -> &[f64] {
        &self.index
    }

    pub fn roughness(&self) -> Roughness {
        self.roughness
    }

    pub fn label(&self) -> String {
        match self.roughness {
            Roughness::Smooth => "smooth".to_string(),
            Roughness::Periodic(r) => format!("periodic({r})"),
            Roughness::Disordered(s) => format!("disordered({s})"),
        }
    }
}
