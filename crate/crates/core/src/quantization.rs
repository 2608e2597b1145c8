//! Discrete phase space and the quantization of separable classical Hamiltonians.
//!
//! Position is diagonal on a centered grid with step `sqrt(2 pi / D)`; momentum
//! is the same diagonal conjugated by the DFT, `p = F^dag q F`. A kinetic
//! function `K(p)` is therefore `F^dag diag(K(grid)) F`. With this sign
//! convention the momentum eigenvector for grid value `p_m` is the plane wave
//! `exp(-2 pi i m j / D)`, so kinetic phases along a path carry `-p dq`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dft_matrix, Hermitian, Operator, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpaceGrid {
    dim: usize,
    step: f64,
    values: Vec<f64>,
}

impl PhaseSpaceGrid {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid(format!("grid dimension must be at least 2, got {dim}")));
        }
        let step = (2.0 * PI / dim as f64).sqrt();
        // (2k - (D-1)) / 2 is exact, so values[k] == -values[D-1-k] bit for bit.
        let values = (0..dim)
            .map(|k| step * ((2 * k) as f64 - (dim - 1) as f64) / 2.0)
            .collect();
        Ok(PhaseSpaceGrid { dim, step, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Centering offset `(D - 1) / 2` in index units.
    pub fn center(&self) -> f64 {
        (self.dim - 1) as f64 / 2.0
    }

    /// Diagonal phases `S_j = exp(-i pi (D-1) j / D)` relating the DFT momentum to
    /// a centered derivative: `p = S p_c S^dag`, where `p_c^2` approximates `-d^2/dx^2`.
    /// So `p^2 (S psi) ~ S (-psi'')` for smooth `psi`.
    pub fn momentum_twist(&self) -> Vec<C64> {
        let d = self.dim;
        (0..d)
            .map(|j| {
                let e = ((d - 1) * j) % (2 * d);
                C64::from_polar(1.0, -PI * e as f64 / d as f64)
            })
            .collect()
    }
}

pub fn make_grid(d: usize) -> Result<PhaseSpaceGrid> {
    PhaseSpaceGrid::new(d)
}

/// A real function of one phase-space coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Coefficients `c0, c1, ...`, index = power.
    Polynomial(Vec<f64>),
    /// One value per grid point.
    Table(Vec<f64>),
}

impl Profile {
    pub fn zero() -> Self {
        Profile::Polynomial(Vec::new())
    }

    pub fn polynomial(coeffs: &[f64]) -> Self {
        Profile::Polynomial(coeffs.to_vec())
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Profile::Polynomial(c) => {
                if c.iter().any(|x| !x.is_finite()) {
                    return Err(Error::invalid("polynomial coefficients must be finite"));
                }
            }
            Profile::Table(t) => {
                if t.len() != dim {
                    return Err(Error::invalid(format!(
                        "tabulated profile has {} values, grid has {dim}",
                        t.len()
                    )));
                }
                if t.iter().any(|x| !x.is_finite()) {
                    return Err(Error::invalid("tabulated profile values must be finite"));
                }
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Profile::Polynomial(c) | Profile::Table(c) => c.iter().all(|&x| x == 0.0),
        }
    }

    pub fn eval_on(&self, grid: &PhaseSpaceGrid) -> Result<Vec<f64>> {
        self.validate(grid.dim())?;
        Ok(match self {
            Profile::Polynomial(c) => grid.values().iter().map(|&x| horner(c, x)).collect(),
            Profile::Table(t) => t.clone(),
        })
    }

    /// Value at one grid index.
    pub fn at(&self, grid: &PhaseSpaceGrid, index: usize) -> f64 {
        match self {
            Profile::Polynomial(c) => horner(c, grid.values()[index]),
            Profile::Table(t) => t[index],
        }
    }

    fn sum(&self, other: &Profile) -> Result<Profile> {
        Ok(match (self, other) {
            (Profile::Polynomial(a), Profile::Polynomial(b)) => {
                let n = a.len().max(b.len());
                Profile::Polynomial(
                    (0..n)
                        .map(|k| a.get(k).copied().unwrap_or(0.0) + b.get(k).copied().unwrap_or(0.0))
                        .collect(),
                )
            }
            (Profile::Table(a), Profile::Table(b)) if a.len() == b.len() => {
                Profile::Table(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            _ => return Err(Error::invalid("can only add profiles of the same kind and length")),
        })
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Separable classical Hamiltonian `H(p, q) = K(p) + V(q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalHamiltonian {
    pub kinetic: Vec<f64>,
    pub potential: Profile,
}

impl ClassicalHamiltonian {
    pub fn new(kinetic: Vec<f64>, potential: Profile) -> Self {
        ClassicalHamiltonian { kinetic, potential }
    }

    /// `p^2 + q^2`.
    pub fn harmonic() -> Self {
        ClassicalHamiltonian::new(vec![0.0, 0.0, 1.0], Profile::polynomial(&[0.0, 0.0, 1.0]))
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        Profile::Polynomial(self.kinetic.clone()).validate(dim)?;
        self.potential.validate(dim)
    }

    pub fn kinetic_profile(&self) -> Profile {
        Profile::Polynomial(self.kinetic.clone())
    }

    pub fn kinetic_at(&self, grid: &PhaseSpaceGrid, index: usize) -> f64 {
        horner(&self.kinetic, grid.values()[index])
    }

    /// Termwise sum; tables must match in length.
    pub fn sum(&self, other: &ClassicalHamiltonian) -> Result<ClassicalHamiltonian> {
        let kinetic = match Profile::Polynomial(self.kinetic.clone())
            .sum(&Profile::Polynomial(other.kinetic.clone()))?
        {
            Profile::Polynomial(c) => c,
            Profile::Table(_) => unreachable!(),
        };
        Ok(ClassicalHamiltonian { kinetic, potential: self.potential.sum(&other.potential)? })
    }
}

/// Hamiltonian file: `{dim, kinetic, potential}` or `{dim, potential_table}`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kinetic: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential_table: Option<Vec<f64>>,
}

impl HamiltonianFile {
    pub fn parse(s: &str) -> Result<(PhaseSpaceGrid, ClassicalHamiltonian)> {
        let raw: HamiltonianFile = serde_json::from_str(s)?;
        raw.into_spec()
    }

    pub fn into_spec(self) -> Result<(PhaseSpaceGrid, ClassicalHamiltonian)> {
        let grid = make_grid(self.dim)?;
        let potential = match (self.potential, self.potential_table) {
            (Some(_), Some(_)) => {
                return Err(Error::invalid("give either `potential` or `potential_table`, not both"))
            }
            (Some(c), None) => Profile::Polynomial(c),
            (None, Some(t)) => Profile::Table(t),
            (None, None) => Profile::zero(),
        };
        let spec = ClassicalHamiltonian::new(self.kinetic.unwrap_or_default(), potential);
        spec.validate(grid.dim())?;
        Ok((grid, spec))
    }
}

pub fn position_operator(grid: &PhaseSpaceGrid) -> Hermitian {
    Hermitian::from_real_diagonal(grid.values()).expect("grid values are finite")
}

/// `F^dag diag(f) F`: a function of the momentum operator.
pub fn momentum_function(grid: &PhaseSpaceGrid, f: &[f64]) -> Result<Hermitian> {
    let d = grid.dim();
    if f.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: f.len() });
    }
    let dft = dft_matrix(d)?;
    let op = Operator::from_fn(d, |j, k| {
        (0..d).map(|m| dft.get(m, j).conj() * f[m] * dft.get(m, k)).sum()
    })?;
    Ok(Hermitian::symmetrized(op))
}

/// `p = F^dag q F`.
pub fn momentum_operator(grid: &PhaseSpaceGrid) -> Hermitian {
    momentum_function(grid, grid.values()).expect("grid-sized")
}

/// `H = K(p) + V(q)`; the potential part is exactly diagonal.
pub fn quantize_separable(spec: &ClassicalHamiltonian, grid: &PhaseSpaceGrid) -> Result<Hermitian> {
    spec.validate(grid.dim())?;
    let v = spec.potential.eval_on(grid)?;
    let potential = Hermitian::from_real_diagonal(&v)?;
    if spec.kinetic.iter().all(|&c| c == 0.0) {
        return Ok(potential);
    }
    let k = spec.kinetic_profile().eval_on(grid)?;
    momentum_function(grid, &k)?.add(&potential)
}

/// `q^2 + p^2`.
pub fn harmonic_hamiltonian(grid: &PhaseSpaceGrid) -> Hermitian {
    quantize_separable(&ClassicalHamiltonian::harmonic(), grid).expect("harmonic spec is valid")
}
