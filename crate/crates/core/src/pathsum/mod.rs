//! Transition amplitudes as explicit sums over discrete paths.
//!
//! A path is the sequence of basis indices `s_0, ..., s_N` visited at the
//! slice boundaries of `N` applications of a one-step operator. Its amplitude
//! is the product of the single-step matrix elements, and the sum over all
//! `D^(N-1)` paths with fixed endpoints reproduces `<k|U^N|j>`.

mod action;
mod engine;
mod enumerate;

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Operator, C64};

pub use action::{momentum_sum, phase_space_action, phase_space_amplitude};
pub use engine::{dominant_paths, sum_over_paths, PathSumEngine};
pub use enumerate::{enumerate_paths, path_count, PathIter};

pub const DEFAULT_RESOURCE_LIMIT: u64 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Path(Vec<usize>);

impl Path {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.len() < 2 {
            return Err(Error::invalid("a path needs at least a source and a target"));
        }
        Ok(Path(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn steps(&self) -> usize {
        self.0.len() - 1
    }

    pub fn source(&self) -> usize {
        self.0[0]
    }

    pub fn target(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        match self.0.iter().find(|&&s| s >= dim) {
            Some(&bad) => Err(Error::IndexOutOfRange { index: bad, dim }),
            None => Ok(()),
        }
    }
}

pub(crate) fn principal_phase(z: C64) -> f64 {
    if z.re == 0.0 && z.im == 0.0 {
        return 0.0;
    }
    let a = z.arg();
    if a <= -PI {
        PI
    } else {
        a
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathContribution {
    pub path: Path,
    #[serde(serialize_with = "ser_complex")]
    pub amplitude: C64,
    #[serde(skip)]
    pub magnitude: f64,
    /// `arg(amplitude)` in `(-pi, pi]`.
    pub action_phase: f64,
}

impl PathContribution {
    pub fn new(path: Path, amplitude: C64) -> Self {
        PathContribution { path, magnitude: amplitude.norm(), action_phase: principal_phase(amplitude), amplitude }
    }

    /// Ranking order: larger magnitude first, ties by lexicographic path.
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        other
            .magnitude
            .total_cmp(&self.magnitude)
            .then_with(|| self.path.cmp(&other.path))
    }
}

/// `Prod_t <s_{t+1}|U|s_t>` along `path`.
pub fn path_amplitude(u_step: &Operator, path: &Path) -> Result<PathContribution> {
    path.check_dim(u_step.dim())?;
    let amp = path.0.windows(2).map(|w| u_step.get(w[1], w[0])).product();
    Ok(PathContribution::new(path.clone(), amp))
}

pub(crate) fn ser_complex<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PruneConfig {
    /// Paths whose magnitude is below `magnitude_floor` times the largest path
    /// magnitude are skipped. Zero disables pruning.
    pub magnitude_floor: f64,
    /// Number of ranked contributions to keep; zero keeps none.
    pub top_k: usize,
    pub resource_limit: u64,
}

impl Default for PruneConfig {
    fn default() -> Self {
        PruneConfig { magnitude_floor: 0.0, top_k: 0, resource_limit: DEFAULT_RESOURCE_LIMIT }
    }
}

impl PruneConfig {
    pub fn with_top_k(top_k: usize) -> Self {
        PruneConfig { top_k, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.magnitude_floor) {
            return Err(Error::invalid(format!(
                "magnitude floor must lie in [0, 1], got {}",
                self.magnitude_floor
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathSumResult {
    pub total: C64,
    pub path_count: u64,
    pub pruned_count: u64,
    /// Sum of the magnitudes of every pruned path, an upper bound on `|total_full - total|`.
    pub pruned_mass: f64,
    /// Sum of the magnitudes of every path, pruned or not.
    pub total_mass: f64,
    pub top: Vec<PathContribution>,
    /// Share of `total_mass` carried by `top`; present when `top` is requested.
    pub concentration: Option<f64>,
}

impl PathSumResult {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "total": [self.total.re, self.total.im],
            "path_count": self.path_count,
            "pruned_count": self.pruned_count,
            "top": self.top,
            "concentration": self.concentration,
        })
    }
}

/// `(sum of the top_k magnitudes) / (sum of all magnitudes)`.
pub fn concentration_metric(magnitudes: &[f64], top_k: usize) -> Result<f64> {
    if magnitudes.is_empty() {
        return Err(Error::invalid("concentration of an empty contribution set"));
    }
    if magnitudes.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(Error::invalid("magnitudes must be finite and nonnegative"));
    }
    let mut sorted = magnitudes.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = sorted.iter().sum();
    if total == 0.0 {
        return Err(Error::invalid("concentration undefined: every magnitude is zero"));
    }
    if top_k >= sorted.len() {
        return Ok(1.0);
    }
    let top: f64 = sorted[..top_k].iter().sum();
    Ok((top / total).min(1.0))
}

/// `Sum |U_{s_N s_{N-1}}| ... |U_{s_1 s_0}|` over all paths, via the elementwise magnitude matrix.
#[cfg(test)]
pub(crate) fn magnitude_mass(u: &Operator, steps: usize, from: usize, to: usize) -> f64 {
    let d = u.dim();
    let mags = u.magnitudes();
    let mut v = vec![0.0; d];
    v[from] = 1.0;
    for _ in 0..steps {
        let mut next = vec![0.0; d];
        for (r, slot) in next.iter_mut().enumerate() {
            *slot = (0..d).map(|c| mags[r * d + c] * v[c]).sum();
        }
        v = next;
    }
    v[to]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_path_amplitudes() {
        let i = Operator::identity(3);
        let c = path_amplitude(&i, &Path::new(vec![2, 2, 2]).unwrap()).unwrap();
        assert_eq!(c.amplitude, C64::new(1.0, 0.0));
        assert_eq!(c.action_phase, 0.0);
        let z = path_amplitude(&i, &Path::new(vec![2, 1, 2]).unwrap()).unwrap();
        assert_eq!(z.magnitude, 0.0);
        assert!(path_amplitude(&i, &Path::new(vec![0, 3]).unwrap()).is_err());
    }

    #[test]
    fn dft2_path_product() {
        let f = crate::linalg::dft_matrix(2).unwrap();
        let c = path_amplitude(&f, &Path::new(vec![0, 1, 0]).unwrap()).unwrap();
        assert!((c.amplitude - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((c.magnitude - 0.5).abs() < 1e-15);
    }

    #[test]
    fn concentration_single_path() {
        assert_eq!(concentration_metric(&[0.3], 1).unwrap(), 1.0);
        assert_eq!(concentration_metric(&[0.3], 5).unwrap(), 1.0);
    }

    #[test]
    fn concentration_equal_half() {
        let m = vec![0.25; 8];
        assert!((concentration_metric(&m, 4).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn concentration_errors() {
        assert!(concentration_metric(&[], 1).is_err());
        assert!(concentration_metric(&[0.0, 0.0], 1).is_err());
        assert!(concentration_metric(&[-1.0], 1).is_err());
    }

    #[test]
    fn phase_range() {
        assert_eq!(principal_phase(C64::new(-1.0, -0.0)), PI);
        assert_eq!(principal_phase(C64::new(-1.0, 0.0)), PI);
        assert_eq!(principal_phase(C64::new(0.0, 0.0)), 0.0);
        assert!((principal_phase(C64::new(0.0, -1.0)) + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn prune_config_validation() {
        assert!(PruneConfig { magnitude_floor: 1.5, ..Default::default() }.validate().is_err());
        assert!(PruneConfig { magnitude_floor: -0.1, ..Default::default() }.validate().is_err());
        assert!(PruneConfig { magnitude_floor: 1.0, ..Default::default() }.validate().is_ok());
    }
}
