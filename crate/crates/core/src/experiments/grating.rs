//! Period finding on a comb state by discrete Fourier transform.

use crate::error::{Error, Result};
use crate::linalg::{dft_matrix, Operator, C64};

use super::report::{DemoReport, Series};

/// Peaks are the entries holding at least this share of the largest probability.
const PEAK_SHARE: f64 = 0.5;

fn check_period(dim: usize, period: usize) -> Result<()> {
    if dim < 1 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if period == 0 || !dim.is_multiple_of(period) {
        return Err(Error::invalid(format!("period {period} must be positive and divide the dimension {dim}")));
    }
    Ok(())
}

/// `(1/sqrt(D/r)) Sum_m |m r>`.
pub fn comb_state(dim: usize, period: usize) -> Result<Vec<C64>> {
    check_period(dim, period)?;
    let teeth = dim / period;
    let a = C64::new(1.0 / (teeth as f64).sqrt(), 0.0);
    Ok((0..dim).map(|s| if s % period == 0 { a } else { C64::new(0.0, 0.0) }).collect())
}

/// Output distribution of `transform` applied to the comb, normalized to unit sum.
pub fn comb_distribution(dim: usize, period: usize, transform: &Operator) -> Result<Vec<f64>> {
    if transform.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: transform.dim() });
    }
    let out = transform.apply(&comb_state(dim, period)?)?;
    let weights: Vec<f64> = out.iter().map(|a| a.norm_sqr()).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.iter().map(|w| w / total).collect())
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `D / gcd(D, peak indices)`: the peaks sit on multiples of `D / r`.
pub fn recovered_period(probabilities: &[f64]) -> usize {
    let d = probabilities.len();
    let max = probabilities.iter().copied().fold(0.0, f64::max);
    let g = probabilities
        .iter()
        .enumerate()
        .filter(|(_, &p)| p >= PEAK_SHARE * max)
        .fold(d, |g, (i, _)| gcd(g, i));
    d / g
}

#[derive(Clone, Debug, PartialEq)]
pub struct GratingOutcome {
    pub probabilities: Vec<f64>,
    pub recovered_period: usize,
    /// Probability outside the multiples of `D / r`.
    pub off_peak_mass: f64,
}

pub(crate) fn analyze(dim: usize, period: usize, probabilities: Vec<f64>) -> GratingOutcome {
    let spacing = dim / period;
    let off_peak_mass = probabilities.iter().enumerate().filter(|(i, _)| i % spacing != 0).map(|(_, p)| p).sum();
    GratingOutcome { recovered_period: recovered_period(&probabilities), off_peak_mass, probabilities }
}

pub fn grating_outcome(dim: usize, period: usize) -> Result<GratingOutcome> {
    let probs = comb_distribution(dim, period, &*dft_matrix(dim)?)?;
    Ok(analyze(dim, period, probs))
}

pub fn grating_demo(dim: usize, period: usize) -> Result<(GratingOutcome, DemoReport)> {
    let out = grating_outcome(dim, period)?;
    let report = DemoReport::new("grating")
        .param("dim", dim)
        .param("period", period)
        .series(Series::indexed("probability", out.probabilities.iter().copied()))
        .verdict("recovered_period", out.recovered_period)
        .verdict("off_peak_mass", out.off_peak_mass)
        .verdict("success", out.recovered_period == period);
    Ok((out, report))
}
