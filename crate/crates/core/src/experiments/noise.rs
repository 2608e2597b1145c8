//! The grating circuit with a miscalibrated Fourier transform.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{Operator, C64};

use super::grating::{analyze, comb_distribution, grating_outcome, GratingOutcome};
use super::report::{DemoReport, Series};

pub const DEFAULT_DELTA_SWEEP: [f64; 7] = [0.0, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2];

/// `F~_{jk} = exp(2 pi i jk (1 + delta) / D) / sqrt(D)`; equal to the exact DFT at `delta = 0`.
pub fn noisy_dft(dim: usize, delta: f64) -> Result<Operator> {
    if !(-0.5..=0.5).contains(&delta) {
        return Err(Error::invalid(format!("phase error must lie in [-0.5, 0.5], got {delta}")));
    }
    if dim == 0 {
        return Err(Error::invalid("DFT dimension must be at least 1"));
    }
    let norm = 1.0 / (dim as f64).sqrt();
    let d = dim as f64;
    Operator::from_fn(dim, |j, k| {
        // The exact part is reduced mod D like the exact DFT; the error term keeps the full product.
        let exact = ((j * k) % dim) as f64;
        let error = (j * k) as f64 * delta;
        C64::from_polar(norm, 2.0 * PI * exact / d + 2.0 * PI * error / d)
    })
}

/// Bhattacharyya fidelity `(Sum sqrt(p q))^2 / (Sum p * Sum q)`.
pub fn distribution_fidelity(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), found: q.len() });
    }
    let bc: f64 = p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum();
    let sp: f64 = p.iter().sum();
    let sq: f64 = q.iter().sum();
    if sp <= 0.0 || sq <= 0.0 {
        return Err(Error::invalid("fidelity of an empty distribution"));
    }
    Ok(bc * bc / (sp * sq))
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseOutcome {
    pub noisy: GratingOutcome,
    pub fidelity: f64,
    pub success: bool,
    /// `(delta, fidelity)` over the sweep, in sweep order.
    pub sweep: Vec<(f64, f64)>,
}

fn noisy_outcome(dim: usize, period: usize, delta: f64) -> Result<GratingOutcome> {
    Ok(analyze(dim, period, comb_distribution(dim, period, &noisy_dft(dim, delta)?)?))
}

pub fn phase_noise_demo(dim: usize, period: usize, delta: f64, sweep: &[f64]) -> Result<(NoiseOutcome, DemoReport)> {
    let exact = grating_outcome(dim, period)?;
    let noisy = noisy_outcome(dim, period, delta)?;
    let fidelity = distribution_fidelity(&exact.probabilities, &noisy.probabilities)?;
    let sweep = sweep
        .iter()
        .map(|&d| Ok((d, distribution_fidelity(&exact.probabilities, &noisy_outcome(dim, period, d)?.probabilities)?)))
        .collect::<Result<Vec<_>>>()?;
    let success = noisy.recovered_period == period;
    let report = DemoReport::new("noise")
        .param("dim", dim)
        .param("period", period)
        .param("delta", delta)
        .series(Series::indexed("probability", noisy.probabilities.iter().copied()))
        .series(Series::new("fidelity_vs_delta", sweep.clone()))
        .verdict("recovered_period", noisy.recovered_period)
        .verdict("off_peak_mass", noisy.off_peak_mass)
        .verdict("fidelity", fidelity)
        .verdict("success", success);
    Ok((NoiseOutcome { noisy, fidelity, success, sweep }, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::grating_demo;
    use crate::linalg::dft_matrix;

    #[test]
    fn zero_delta_is_exact_dft() {
        let f = dft_matrix(32).unwrap();
        assert_eq!(noisy_dft(32, 0.0).unwrap().entries(), f.entries());
    }

    #[test]
    fn zero_delta_reproduces_grating() {
        let (g, _) = grating_demo(32, 4).unwrap();
        let (n, _) = phase_noise_demo(32, 4, 0.0, &[]).unwrap();
        assert_eq!(n.noisy, g);
        assert_eq!(n.fidelity, 1.0);
    }

    #[test]
    fn sweep_is_nonincreasing() {
        let (n, _) = phase_noise_demo(32, 4, 0.01, &[0.0, 0.01, 0.02, 0.05]).unwrap();
        let f: Vec<f64> = n.sweep.iter().map(|p| p.1).collect();
        assert_eq!(f[0], 1.0);
        assert!(f.windows(2).all(|w| w[1] <= w[0]), "{f:?}");
        assert!((f[1] - 0.8895).abs() < 1e-3);
        assert!((f[3] - 0.2489).abs() < 1e-3);
    }

    #[test]
    fn small_exponent_error() {
        let (n, rep) = phase_noise_demo(32, 4, 0.1 / 32.0, &DEFAULT_DELTA_SWEEP).unwrap();
        assert!((n.fidelity - 0.98888).abs() < 1e-4);
        assert!(n.success);
        assert_eq!(rep.series[1].points.len(), DEFAULT_DELTA_SWEEP.len());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(noisy_dft(8, 0.6).is_err());
        assert!(phase_noise_demo(32, 5, 0.0, &[]).is_err());
        assert!(distribution_fidelity(&[1.0], &[0.5, 0.5]).is_err());
        assert!(distribution_fidelity(&[0.0], &[0.0]).is_err());
    }
}
