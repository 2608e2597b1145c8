//! Repeated nonunitary diagonal map `diag(1, ..., 1 + eps, ..., 1)` with renormalization.

use crate::error::{Error, Result};
use crate::linalg::{StateVector, C64};

use super::report::{DemoReport, Series};

/// Target probability for the marked state.
const HALF: f64 = 0.5;
/// Slack on the `>= 1/2` test: exact ties such as `D - 1 = (1 + eps)^(2k)` land within rounding of 1/2.
const HALF_TOL: f64 = 1e-12;
/// Upper bound on iterations before giving up.
const MAX_STEPS: usize = 1_000_000;

fn check(dim: usize, epsilon: f64, marked: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::invalid("amplification needs dimension at least 2"));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if marked >= dim {
        return Err(Error::IndexOutOfRange { index: marked, dim });
    }
    Ok(())
}

/// `ceil(ln(D - 1) / (2 ln(1 + eps)))`, with ratios within rounding of an integer taken as that integer.
pub fn steps_to_half_closed_form(dim: usize, epsilon: f64) -> Result<usize> {
    check(dim, epsilon, 0)?;
    let x = ((dim - 1) as f64).ln() / (2.0 * epsilon.ln_1p());
    let nearest = x.round();
    Ok(if (x - nearest).abs() <= 1e-9 * nearest.max(1.0) { nearest as usize } else { x.ceil() as usize })
}

fn marked_prob(s: &StateVector, marked: usize) -> f64 {
    let w: Vec<f64> = s.amplitudes().iter().map(|a| a.norm_sqr()).collect();
    w[marked] / w.iter().sum::<f64>()
}

fn amplify_step(state: &StateVector, gain: C64, marked: usize) -> Result<StateVector> {
    let mut amps = state.amplitudes().to_vec();
    amps[marked] *= gain;
    StateVector::unnormalized(amps)?.renormalized()
}

/// Marked-state probability before and after each of `steps` applications, from the uniform state.
pub fn marked_probabilities(dim: usize, epsilon: f64, marked: usize, steps: usize) -> Result<Vec<f64>> {
    check(dim, epsilon, marked)?;
    let gain = C64::new(1.0 + epsilon, 0.0);
    let mut state = StateVector::uniform(dim)?;
    let mut probs = vec![marked_prob(&state, marked)];
    for _ in 0..steps {
        state = amplify_step(&state, gain, marked)?;
        probs.push(marked_prob(&state, marked));
    }
    Ok(probs)
}

/// Marked-state probabilities from the uniform state until the first one reaching one half.
pub fn amplify_trajectory(dim: usize, epsilon: f64, marked: usize) -> Result<Vec<f64>> {
    check(dim, epsilon, marked)?;
    let gain = C64::new(1.0 + epsilon, 0.0);
    let mut state = StateVector::uniform(dim)?;
    let mut probs = vec![marked_prob(&state, marked)];
    while probs[probs.len() - 1] < HALF - HALF_TOL {
        if probs.len() > MAX_STEPS {
            return Err(Error::invalid("amplification did not reach one half within the step limit"));
        }
        state = amplify_step(&state, gain, marked)?;
        probs.push(marked_prob(&state, marked));
    }
    Ok(probs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmplifyOutcome {
    pub probabilities: Vec<f64>,
    pub steps_to_half: usize,
    pub closed_form: usize,
}

pub fn amplify_demo(dim: usize, epsilon: f64, marked: usize) -> Result<(AmplifyOutcome, DemoReport)> {
    let steps_to_half = amplify_trajectory(dim, epsilon, marked)?.len() - 1;
    let probabilities = marked_probabilities(dim, epsilon, marked, steps_to_half.max(1))?;
    let closed_form = steps_to_half_closed_form(dim, epsilon)?;
    let report = DemoReport::new("amplify")
        .param("dim", dim)
        .param("epsilon", epsilon)
        .param("marked", marked)
        .series(Series::indexed("marked_probability", probabilities.iter().copied()))
        .verdict("steps_to_half", steps_to_half)
        .verdict("closed_form", closed_form)
        .verdict("agree", steps_to_half == closed_form);
    Ok((AmplifyOutcome { probabilities, steps_to_half, closed_form }, report))
}
