//! Exact and time-sliced propagators.
//!
//! Matrix elements follow the column-vector convention: `<k|U|j>` is row `k`,
//! column `j` of `U`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{dft_matrix, frobenius_distance, matrix_exp_hermitian, Hermitian, Operator, Unitary, C64};
use crate::quantization::{quantize_separable, ClassicalHamiltonian, PhaseSpaceGrid};

fn check_slicing(total_time: f64, steps: usize) -> Result<()> {
    if steps == 0 {
        return Err(Error::invalid("number of time steps must be at least 1"));
    }
    if !total_time.is_finite() {
        return Err(Error::invalid("total time must be finite"));
    }
    Ok(())
}

/// Evolution under a fixed Hermitian generator, sliced into `steps` equal parts.
#[derive(Clone, Debug)]
pub struct EvolutionSpec {
    hamiltonian: Hermitian,
    total_time: f64,
    steps: usize,
}

impl EvolutionSpec {
    pub fn new(hamiltonian: Hermitian, total_time: f64, steps: usize) -> Result<Self> {
        check_slicing(total_time, steps)?;
        Ok(EvolutionSpec { hamiltonian, total_time, steps })
    }

    pub fn hamiltonian(&self) -> &Hermitian {
        &self.hamiltonian
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.steps as f64
    }
}

/// Split-step evolution of a separable Hamiltonian on a grid.
#[derive(Clone, Debug)]
pub struct SplitStepSpec {
    grid: PhaseSpaceGrid,
    hamiltonian: ClassicalHamiltonian,
    total_time: f64,
    steps: usize,
}

impl SplitStepSpec {
    pub fn new(
        grid: PhaseSpaceGrid,
        hamiltonian: ClassicalHamiltonian,
        total_time: f64,
        steps: usize,
    ) -> Result<Self> {
        check_slicing(total_time, steps)?;
        hamiltonian.validate(grid.dim())?;
        Ok(SplitStepSpec { grid, hamiltonian, total_time, steps })
    }

    pub fn grid(&self) -> &PhaseSpaceGrid {
        &self.grid
    }

    pub fn hamiltonian(&self) -> &ClassicalHamiltonian {
        &self.hamiltonian
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.steps as f64
    }

    pub fn with_steps(&self, steps: usize) -> Result<Self> {
        SplitStepSpec::new(self.grid.clone(), self.hamiltonian.clone(), self.total_time, steps)
    }

    /// The full quantized Hamiltonian `K(p) + V(q)`.
    pub fn quantized(&self) -> Result<Hermitian> {
        quantize_separable(&self.hamiltonian, &self.grid)
    }
}

pub fn exact_propagator(h: &Hermitian, t: f64) -> Result<Unitary> {
    matrix_exp_hermitian(h, t)
}

/// `exp(-i H dt)`; its `N`-th power is the exact propagator for the whole interval.
pub fn step_propagator(spec: &EvolutionSpec) -> Result<Unitary> {
    matrix_exp_hermitian(&spec.hamiltonian, spec.dt())
}

/// `diag(a) F^dag diag(b) F`.
fn diag_dft_diag(a: &[C64], b: &[C64]) -> Result<Operator> {
    let d = a.len();
    let f = dft_matrix(d)?;
    Operator::from_fn(d, |j, k| {
        let s: C64 = (0..d).map(|m| f.get(m, j).conj() * b[m] * f.get(m, k)).sum();
        a[j] * s
    })
}

fn profiles(spec: &SplitStepSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let v = spec.hamiltonian.potential.eval_on(&spec.grid)?;
    let k = spec.hamiltonian.kinetic_profile().eval_on(&spec.grid)?;
    Ok((v, k))
}

/// One Lie-Trotter step `exp(-i V dt) F^dag exp(-i K dt) F`.
pub fn split_step_propagator(spec: &SplitStepSpec) -> Result<Unitary> {
    let dt = spec.dt();
    let (v, k) = profiles(spec)?;
    let vphase: Vec<C64> = v.iter().map(|&x| C64::from_polar(1.0, -x * dt)).collect();
    let kphase: Vec<C64> = k.iter().map(|&x| C64::from_polar(1.0, -x * dt)).collect();
    Unitary::new(diag_dft_diag(&vphase, &kphase)?)
}

/// The same factorization at imaginary time, `exp(-V dt) F^dag exp(-K dt) F`.
///
/// Path weights built from this operator are `exp(-S_E)` for the discrete
/// Euclidean action, so the heaviest path is the least-action one. Entries are
/// bounded by one in magnitude whenever `K, V >= 0` on the grid.
pub fn euclidean_split_step(spec: &SplitStepSpec) -> Result<Operator> {
    let dt = spec.dt();
    let (v, k) = profiles(spec)?;
    let vw: Vec<C64> = v.iter().map(|&x| C64::new((-x * dt).exp(), 0.0)).collect();
    let kw: Vec<C64> = k.iter().map(|&x| C64::new((-x * dt).exp(), 0.0)).collect();
    diag_dft_diag(&vw, &kw)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrotterPoint {
    pub steps: usize,
    pub error: f64,
}

/// Frobenius distance between `(U_split)^N` and the exact propagator for each `N`.
pub fn trotter_error_curve(spec: &SplitStepSpec, n_values: &[usize]) -> Result<Vec<TrotterPoint>> {
    if n_values.contains(&0) {
        return Err(Error::invalid("every step count must be at least 1"));
    }
    let exact = exact_propagator(&spec.quantized()?, spec.total_time)?;
    n_values
        .par_iter()
        .map(|&n| {
            let u = split_step_propagator(&spec.with_steps(n)?)?;
            Ok(TrotterPoint { steps: n, error: frobenius_distance(&u.pow(n), &exact)? })
        })
        .collect()
}

/// `error(N_i) / error(N_{i+1})` for consecutive points.
pub fn error_ratios(curve: &[TrotterPoint]) -> Vec<f64> {
    curve.windows(2).map(|w| w[0].error / w[1].error).collect()
}

/// Least-squares slope of `ln error` against `ln N`.
pub fn loglog_slope(curve: &[TrotterPoint]) -> Option<f64> {
    if curve.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = curve.iter().map(|p| (p.steps as f64).ln()).collect();
    let ys: Vec<f64> = curve.iter().map(|p| p.error.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// `<to|U|from>`.
pub fn transition_amplitude(u: &Operator, from: usize, to: usize) -> Result<C64> {
    let d = u.dim();
    for idx in [from, to] {
        if idx >= d {
            return Err(Error::IndexOutOfRange { index: idx, dim: d });
        }
    }
    Ok(u.get(to, from))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matrix_product, StateVector};
    use crate::quantization::{harmonic_hamiltonian, make_grid, momentum_function, Profile};
    use std::f64::consts::PI;

    fn harmonic_split(d: usize, t: f64, n: usize) -> SplitStepSpec {
        SplitStepSpec::new(make_grid(d).unwrap(), ClassicalHamiltonian::harmonic(), t, n).unwrap()
    }

    fn taylor_exp(h: &Operator, s: f64, terms: usize) -> Operator {
        let a = h.scale(C64::new(0.0, -s));
        let mut term = Operator::identity(h.dim());
        let mut sum = term.clone();
        for n in 1..=terms {
            term = matrix_product(&term, &a).unwrap().scale(C64::new(1.0 / n as f64, 0.0));
            sum = sum.add(&term).unwrap();
        }
        sum
    }

    #[test]
    fn exact_at_zero_time_is_identity() {
        let h = harmonic_hamiltonian(&make_grid(6).unwrap());
        let u = exact_propagator(&h, 0.0).unwrap();
        assert!(frobenius_distance(&u, &Operator::identity(6)).unwrap() < 1e-13);
    }

    #[test]
    fn exact_diag_zero_pi() {
        let h = Hermitian::from_real_diagonal(&[0.0, PI]).unwrap();
        let u = exact_propagator(&h, 1.0).unwrap();
        assert!(frobenius_distance(&u, &Operator::from_real_diagonal(&[1.0, -1.0]).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn exact_matches_taylor_oracle() {
        let h = harmonic_hamiltonian(&make_grid(16).unwrap());
        let u = exact_propagator(&h, 0.3).unwrap();
        // |0.3 H| reaches ~30 at D=16, so split into 30 slices of 0.01 and square up.
        let slice = taylor_exp(&h, 0.01, 40);
        let oracle = slice.repeated_product(30);
        assert!(frobenius_distance(&u, &oracle).unwrap() < 1e-12);
    }

    #[test]
    fn non_hermitian_generator_rejected() {
        let a = Operator::from_entries(2, vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        assert!(Hermitian::new(a).is_err());
    }

    #[test]
    fn time_reversal() {
        let h = harmonic_hamiltonian(&make_grid(10).unwrap());
        let fwd = exact_propagator(&h, 0.7).unwrap();
        let back = exact_propagator(&h, -0.7).unwrap();
        assert!(frobenius_distance(&back, &fwd.dagger()).unwrap() < 1e-12);
    }

    #[test]
    fn single_step_equals_exact() {
        let h = harmonic_hamiltonian(&make_grid(5).unwrap());
        let spec = EvolutionSpec::new(h.clone(), 0.8, 1).unwrap();
        assert_eq!(step_propagator(&spec).unwrap(), exact_propagator(&h, 0.8).unwrap());
    }

    #[test]
    fn sliced_power_matches_exact() {
        let h = harmonic_hamiltonian(&make_grid(8).unwrap());
        let spec = EvolutionSpec::new(h.clone(), 1.0, 4).unwrap();
        let step = step_propagator(&spec).unwrap();
        let fourth = step.repeated_product(4);
        let exact = exact_propagator(&h, 1.0).unwrap();
        assert!(frobenius_distance(&fourth, &exact).unwrap() < 1e-10);
        for n in [2, 7, 16] {
            let spec = EvolutionSpec::new(h.clone(), 1.0, n).unwrap();
            let pw = step_propagator(&spec).unwrap().repeated_product(n);
            let tol = 1e-9 * (8f64).sqrt() * n as f64;
            assert!(frobenius_distance(&pw, &exact).unwrap() <= tol);
        }
    }

    #[test]
    fn zero_hamiltonian_steps_are_identity() {
        for n in [1, 3, 10] {
            let spec = EvolutionSpec::new(Hermitian::zeros(4), 2.0, n).unwrap();
            let u = step_propagator(&spec).unwrap();
            assert!(frobenius_distance(&u.pow(n), &Operator::identity(4)).unwrap() < 1e-14);
        }
    }

    #[test]
    fn invalid_slicing_rejected() {
        assert!(EvolutionSpec::new(Hermitian::zeros(2), 1.0, 0).is_err());
        assert!(EvolutionSpec::new(Hermitian::zeros(2), f64::NAN, 1).is_err());
        assert!(SplitStepSpec::new(make_grid(3).unwrap(), ClassicalHamiltonian::harmonic(), 1.0, 0).is_err());
        let bad = ClassicalHamiltonian::new(vec![], Profile::Table(vec![0.0; 2]));
        assert!(SplitStepSpec::new(make_grid(3).unwrap(), bad, 1.0, 1).is_err());
    }

    #[test]
    fn kinetic_only_split_is_exact() {
        let g = make_grid(8).unwrap();
        let spec = SplitStepSpec::new(g.clone(), ClassicalHamiltonian::new(vec![0.0, 0.0, 1.0], Profile::zero()), 0.9, 3).unwrap();
        let u = split_step_propagator(&spec).unwrap();
        let p2: Vec<f64> = g.values().iter().map(|x| x * x).collect();
        let k = momentum_function(&g, &p2).unwrap();
        let exact = exact_propagator(&k, spec.dt()).unwrap();
        assert!(frobenius_distance(&u, &exact).unwrap() < 1e-12);
    }

    #[test]
    fn potential_only_split_is_diagonal_phase() {
        let g = make_grid(6).unwrap();
        let spec = SplitStepSpec::new(g.clone(), ClassicalHamiltonian::new(vec![], Profile::polynomial(&[0.0, 1.0, 0.5])), 1.0, 2).unwrap();
        let u = split_step_propagator(&spec).unwrap();
        for r in 0..6 {
            for c in 0..6 {
                let z = u.get(r, c);
                if r == c {
                    let x = g.values()[r];
                    let want = C64::from_polar(1.0, -(x + 0.5 * x * x) * 0.5);
                    assert!((z - want).norm() < 1e-14);
                } else {
                    assert!(z.norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn harmonic_split_n64_error() {
        let spec = harmonic_split(16, 1.0, 64);
        let u = split_step_propagator(&spec).unwrap().pow(64);
        let exact = exact_propagator(&spec.quantized().unwrap(), 1.0).unwrap();
        let err = frobenius_distance(&u, &exact).unwrap();
        // First-order splitting at D=16 sits near 17/N; measured 0.2662 at N=64.
        assert!((err - 0.2662).abs() < 1e-3, "err = {err}");
    }

    #[test]
    fn zero_potential_curve_is_exact() {
        let spec = SplitStepSpec::new(make_grid(12).unwrap(), ClassicalHamiltonian::new(vec![0.0, 0.5, 1.0], Profile::zero()), 1.0, 1).unwrap();
        let curve = trotter_error_curve(&spec, &[1, 2, 4, 8]).unwrap();
        assert!(curve.iter().all(|p| p.error <= 1e-10));
    }

    #[test]
    fn harmonic_trotter_is_first_order() {
        let spec = harmonic_split(16, 1.0, 1);
        let curve = trotter_error_curve(&spec, &[16, 32, 64, 128]).unwrap();
        assert_eq!(curve.iter().map(|p| p.steps).collect::<Vec<_>>(), vec![16, 32, 64, 128]);
        let ratios = error_ratios(&curve);
        for r in &ratios[1..] {
            assert!((1.7..=2.3).contains(r), "ratio {r}");
        }
        for w in curve.windows(2) {
            assert!(w[1].error <= w[0].error * 1.05);
        }
    }

    #[test]
    fn harmonic_loglog_slope() {
        let spec = harmonic_split(16, 1.0, 1);
        let curve = trotter_error_curve(&spec, &[32, 64, 128, 256]).unwrap();
        let slope = loglog_slope(&curve).unwrap();
        assert!((-1.3..=-0.7).contains(&slope), "slope {slope}");
    }

    #[test]
    fn single_point_curve() {
        let spec = harmonic_split(6, 1.0, 1);
        let curve = trotter_error_curve(&spec, &[10]).unwrap();
        assert_eq!(curve.len(), 1);
        assert!(error_ratios(&curve).is_empty());
        assert!(loglog_slope(&curve).is_none());
        assert!(trotter_error_curve(&spec, &[0]).is_err());
    }

    #[test]
    fn transition_amplitude_cases() {
        let i = Operator::identity(4);
        assert_eq!(transition_amplitude(&i, 2, 2).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(transition_amplitude(&i, 1, 2).unwrap(), C64::new(0.0, 0.0));
        let f = dft_matrix(4).unwrap();
        let z = transition_amplitude(&f, 1, 3).unwrap();
        let want = C64::new(0.0, 1.0).powu(3) / 2.0;
        assert!((z - want).norm() < 1e-15);
        assert!(matches!(transition_amplitude(&i, 4, 0), Err(Error::IndexOutOfRange { index: 4, dim: 4 })));
    }

    #[test]
    fn probability_is_conserved() {
        let spec = harmonic_split(9, 1.3, 5);
        let u = split_step_propagator(&spec).unwrap().pow(5);
        for j in 0..9 {
            let s: f64 = (0..9).map(|k| transition_amplitude(&u, j, k).unwrap().norm_sqr()).sum();
            assert!((s - 1.0).abs() < 1e-10);
            let psi = StateVector::basis(9, j).unwrap();
            let out = psi.evolve(&u).unwrap();
            assert!((out.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn euclidean_step_is_contraction_for_positive_profiles() {
        let spec = harmonic_split(8, 1.0, 4);
        let w = euclidean_split_step(&spec).unwrap();
        assert!(w.max_abs() <= 1.0);
        for k in 0..8 {
            assert!(w.get(k, k).re > 0.0);
        }
    }
}
