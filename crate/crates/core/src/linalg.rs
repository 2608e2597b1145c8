//! Dense complex linear algebra on small square matrices.
//!
//! Everything here is row-major and dense. Matrices stay below a few hundred
//! rows in this crate, so the only decomposition we need is the Hermitian
//! eigendecomposition, which also drives the matrix exponential.

use std::f64::consts::PI;
use std::ops::Deref;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative tolerance of the Hermitian check, scaled by the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance of the unitary check, scaled by `sqrt(D)`.
pub const UNITARY_TOL: f64 = 1e-10;
/// Allowed deviation of a normalized state's norm from one.
pub const NORM_TOL: f64 = 1e-10;

const PAR_MATMUL_DIM: usize = 64;

/// Dense `D x D` complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    dim: usize,
    entries: Vec<C64>,
}

impl Operator {
    pub fn from_entries(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("operator dimension must be at least 1"));
        }
        if entries.len() != dim * dim {
            return Err(Error::invalid(format!(
                "operator of dimension {dim} needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite entry at ({}, {})",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Operator { dim, entries })
    }

    /// Builds from a row/column function. The closure must return finite values.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(f(r, c));
            }
        }
        Operator::from_entries(dim, entries)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "operator dimension must be at least 1");
        Operator { dim, entries: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut op = Operator::zeros(dim);
        for k in 0..dim {
            op.entries[k * dim + k] = C64::new(1.0, 0.0);
        }
        op
    }

    pub fn from_diagonal(diag: &[C64]) -> Result<Self> {
        let dim = diag.len();
        Operator::from_fn(dim, |r, c| if r == c { diag[r] } else { C64::new(0.0, 0.0) })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Operator::from_diagonal(&d)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[C64] {
        &self.entries[row * self.dim..(row + 1) * self.dim]
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|k| self.get(k, k)).collect()
    }

    pub fn dagger(&self) -> Operator {
        let d = self.dim;
        let mut entries = vec![C64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                entries[c * d + r] = self.entries[r * d + c].conj();
            }
        }
        Operator { dim: d, entries }
    }

    pub fn scale(&self, s: C64) -> Operator {
        Operator { dim: self.dim, entries: self.entries.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        check_dims(self.dim, other.dim)?;
        Ok(Operator {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        check_dims(self.dim, other.dim)?;
        Ok(Operator {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        })
    }

    /// Elementwise magnitudes `|A_jk|` as a real row-major table.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.entries.iter().map(|z| z.norm()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    /// Largest `|A_jk - conj(A_kj)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let d = self.dim;
        let mut dev: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                dev = dev.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        dev
    }

    /// `|U^dag U - I|_F`.
    pub fn unitarity_deviation(&self) -> f64 {
        let gram = matrix_product(&self.dagger(), self).expect("square with itself");
        frobenius_distance(&gram, &Operator::identity(self.dim)).expect("same dim")
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        check_dims(self.dim, v.len())?;
        Ok((0..self.dim)
            .map(|r| self.row(r).iter().zip(v).map(|(a, x)| a * x).sum())
            .collect())
    }

    /// `A^n` by repeated squaring. `A^0` is the identity.
    pub fn pow(&self, mut n: usize) -> Operator {
        let mut result = Operator::identity(self.dim);
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = matrix_product(&result, &base).expect("same dim");
            }
            n >>= 1;
            if n > 0 {
                base = matrix_product(&base, &base).expect("same dim");
            }
        }
        result
    }

    /// Product `A * A * ... * A` accumulated left to right, one factor at a time.
    pub fn repeated_product(&self, n: usize) -> Operator {
        let mut result = Operator::identity(self.dim);
        for _ in 0..n {
            result = matrix_product(&result, self).expect("same dim");
        }
        result
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }
}

fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Operator that passed the Hermitian check.
#[derive(Clone, Debug, PartialEq)]
pub struct Hermitian(Operator);

impl Hermitian {
    pub fn new(op: Operator) -> Result<Self> {
        let allowed = HERMITIAN_TOL * op.max_abs();
        let deviation = op.hermitian_deviation();
        if deviation > allowed {
            return Err(Error::NotHermitian { deviation, allowed });
        }
        Ok(Hermitian(op))
    }

    /// Wraps a matrix that is known to be Hermitian by construction, and
    /// symmetrizes it so the invariant holds exactly.
    pub(crate) fn symmetrized(op: Operator) -> Self {
        let adj = op.dagger();
        let sym = op.add(&adj).expect("same dim").scale(C64::new(0.5, 0.0));
        Hermitian(sym)
    }

    pub fn zeros(dim: usize) -> Self {
        Hermitian(Operator::zeros(dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        Ok(Hermitian(Operator::from_real_diagonal(diag)?))
    }

    pub fn add(&self, other: &Hermitian) -> Result<Hermitian> {
        Ok(Hermitian(self.0.add(&other.0)?))
    }

    pub fn into_inner(self) -> Operator {
        self.0
    }
}

impl Deref for Hermitian {
    type Target = Operator;
    fn deref(&self) -> &Operator {
        &self.0
    }
}

/// Operator that passed the unitary check.
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary(Operator);

impl Unitary {
    pub fn new(op: Operator) -> Result<Self> {
        let allowed = UNITARY_TOL * (op.dim() as f64).sqrt();
        let deviation = op.unitarity_deviation();
        if deviation > allowed {
            return Err(Error::NotUnitary { deviation, allowed });
        }
        Ok(Unitary(op))
    }

    pub fn identity(dim: usize) -> Self {
        Unitary(Operator::identity(dim))
    }

    pub fn dagger(&self) -> Unitary {
        Unitary(self.0.dagger())
    }

    pub fn product(&self, other: &Unitary) -> Result<Unitary> {
        Ok(Unitary(matrix_product(&self.0, &other.0)?))
    }

    pub fn pow(&self, n: usize) -> Unitary {
        Unitary(self.0.pow(n))
    }

    pub fn into_inner(self) -> Operator {
        self.0
    }
}

impl Deref for Unitary {
    type Target = Operator;
    fn deref(&self) -> &Operator {
        &self.0
    }
}

/// State vector. Normalized unless built with [`StateVector::unnormalized`].
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
    normalized: bool,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let sv = StateVector::unnormalized(amplitudes)?;
        let norm = sv.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::invalid(format!("state norm {norm} is not 1")));
        }
        Ok(StateVector { normalized: true, ..sv })
    }

    pub fn unnormalized(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::invalid("state vector must have at least one amplitude"));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("non-finite amplitude"));
        }
        Ok(StateVector { amplitudes, normalized: false })
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        StateVector::new(amps)
    }

    pub fn uniform(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("state dimension must be at least 1"));
        }
        let a = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        StateVector::new(vec![a; dim])
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `|a_k|^2 / sum |a|^2`, valid for unnormalized states too.
    pub fn probabilities(&self) -> Vec<f64> {
        let weights: Vec<f64> = self.amplitudes.iter().map(|z| z.norm_sqr()).collect();
        let total: f64 = weights.iter().sum();
        weights.iter().map(|w| w / total).collect()
    }

    pub fn renormalized(&self) -> Result<StateVector> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::invalid("cannot renormalize the zero vector"));
        }
        let amps = self.amplitudes.iter().map(|z| z / norm).collect();
        Ok(StateVector { amplitudes: amps, normalized: true })
    }

    /// Applies an arbitrary operator; the result is marked unnormalized.
    pub fn evolve(&self, op: &Operator) -> Result<StateVector> {
        StateVector::unnormalized(op.apply(&self.amplitudes)?)
    }
}

/// Standard matrix product `a * b`.
pub fn matrix_product(a: &Operator, b: &Operator) -> Result<Operator> {
    check_dims(a.dim, b.dim)?;
    let d = a.dim;
    let mut out = vec![C64::new(0.0, 0.0); d * d];
    let row_kernel = |r: usize, out_row: &mut [C64]| {
        for m in 0..d {
            let arm = a.entries[r * d + m];
            if arm.re == 0.0 && arm.im == 0.0 {
                continue;
            }
            let brow = &b.entries[m * d..(m + 1) * d];
            for (o, bmc) in out_row.iter_mut().zip(brow) {
                *o += arm * bmc;
            }
        }
    };
    if d >= PAR_MATMUL_DIM {
        out.par_chunks_mut(d).enumerate().for_each(|(r, row)| row_kernel(r, row));
    } else {
        out.chunks_mut(d).enumerate().for_each(|(r, row)| row_kernel(r, row));
    }
    Ok(Operator { dim: d, entries: out })
}

pub fn frobenius_distance(a: &Operator, b: &Operator) -> Result<f64> {
    check_dims(a.dim, b.dim)?;
    Ok(a.entries
        .iter()
        .zip(&b.entries)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Unitary,
}

pub fn hermitian_eig(h: &Hermitian) -> Result<Eigen> {
    let d = h.dim();
    let m = h.to_nalgebra();
    // The lower triangle is what the solver reads; average with the upper one first.
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = m
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| Error::Decomposition("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = Operator::from_fn(d, |r, c| eig.eigenvectors[(r, order[c])])?;
    Ok(Eigen { values, vectors: Unitary::new(vectors)? })
}

/// Spectral function `V f(lambda) V^dag` of a Hermitian operator.
pub(crate) fn spectral_map(eig: &Eigen, f: impl Fn(f64) -> C64) -> Operator {
    let v = &eig.vectors;
    let d = v.dim();
    let phases: Vec<C64> = eig.values.iter().map(|&l| f(l)).collect();
    let scaled = Operator::from_fn(d, |r, c| v.get(r, c) * phases[c]).expect("finite");
    matrix_product(&scaled, &v.dagger()).expect("same dim")
}

/// `exp(-i * scale * h)` through the eigendecomposition of `h`.
pub fn matrix_exp_hermitian(h: &Hermitian, scale: f64) -> Result<Unitary> {
    if !scale.is_finite() {
        return Err(Error::invalid("exponent scale must be finite"));
    }
    let eig = hermitian_eig(h)?;
    Unitary::new(spectral_map(&eig, |l| C64::from_polar(1.0, -scale * l)))
}

/// `F_jk = exp(2 pi i j k / d) / sqrt(d)`.
pub fn dft_matrix(d: usize) -> Result<Unitary> {
    if d == 0 {
        return Err(Error::invalid("DFT dimension must be at least 1"));
    }
    let norm = 1.0 / (d as f64).sqrt();
    let op = Operator::from_fn(d, |j, k| {
        // Reduce the exponent modulo d before converting so large products keep full precision.
        let e = ((j * k) % d) as f64;
        C64::from_polar(norm, 2.0 * PI * e / d as f64)
    })?;
    Unitary::new(op)
}

#[derive(Serialize, Deserialize)]
struct DenseJson {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

fn pairs(entries: &[C64]) -> Vec<[f64; 2]> {
    entries.iter().map(|z| [z.re, z.im]).collect()
}

fn from_pairs(p: &[[f64; 2]]) -> Vec<C64> {
    p.iter().map(|[re, im]| C64::new(*re, *im)).collect()
}

impl Operator {
    /// `{ "dim": D, "entries": [[re, im], ...] }`, row-major.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(DenseJson { dim: self.dim, entries: pairs(&self.entries) })
            .expect("plain data serializes")
    }

    pub fn from_json_value(v: serde_json::Value) -> Result<Operator> {
        let raw: DenseJson = serde_json::from_value(v)?;
        if raw.entries.len() != raw.dim * raw.dim {
            return Err(Error::invalid(format!(
                "matrix JSON with dim {} must carry {} entries, got {}",
                raw.dim,
                raw.dim * raw.dim,
                raw.entries.len()
            )));
        }
        Operator::from_entries(raw.dim, from_pairs(&raw.entries))
    }

    pub fn from_json_str(s: &str) -> Result<Operator> {
        Operator::from_json_value(serde_json::from_str(s)?)
    }
}

impl StateVector {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(DenseJson { dim: self.dim(), entries: pairs(&self.amplitudes) })
            .expect("plain data serializes")
    }

    /// Reads an unnormalized vector; callers renormalize or validate as needed.
    pub fn from_json_str(s: &str) -> Result<StateVector> {
        let raw: DenseJson = serde_json::from_str(s)?;
        if raw.entries.len() != raw.dim {
            return Err(Error::invalid(format!(
                "vector JSON with dim {} must carry {} entries, got {}",
                raw.dim,
                raw.dim,
                raw.entries.len()
            )));
        }
        StateVector::unnormalized(from_pairs(&raw.entries))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_op(rng: &mut ChaCha8Rng, d: usize) -> Operator {
        Operator::from_fn(d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .unwrap()
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> Hermitian {
        Hermitian::symmetrized(random_op(rng, d))
    }

    /// exp(-i s h) by truncated Taylor series, the independent oracle.
    fn taylor_exp(h: &Operator, s: f64, terms: usize) -> Operator {
        let d = h.dim();
        let a = h.scale(c(0.0, -s));
        let mut term = Operator::identity(d);
        let mut sum = Operator::identity(d);
        for n in 1..=terms {
            term = matrix_product(&term, &a).unwrap().scale(c(1.0 / n as f64, 0.0));
            sum = sum.add(&term).unwrap();
        }
        sum
    }

    #[test]
    fn product_with_identity_is_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_op(&mut rng, 5);
        assert_eq!(matrix_product(&Operator::identity(5), &x).unwrap(), x);
        assert_eq!(matrix_product(&x, &Operator::identity(5)).unwrap(), x);
    }

    #[test]
    fn diagonal_product() {
        let a = Operator::from_real_diagonal(&[1.0, 2.0]).unwrap();
        let b = Operator::from_real_diagonal(&[3.0, 4.0]).unwrap();
        let p = matrix_product(&a, &b).unwrap();
        assert_eq!(p, Operator::from_real_diagonal(&[3.0, 8.0]).unwrap());
    }

    #[test]
    fn product_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_op(&mut rng, 4);
        let b = random_op(&mut rng, 4);
        let p = matrix_product(&a, &b).unwrap();
        for j in 0..4 {
            for k in 0..4 {
                let mut s = c(0.0, 0.0);
                for m in 0..4 {
                    s += a.get(j, m) * b.get(m, k);
                }
                assert!((p.get(j, k) - s).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn parallel_product_matches_serial_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_op(&mut rng, 70);
        let b = random_op(&mut rng, 70);
        let p = matrix_product(&a, &b).unwrap();
        let (j, k) = (13, 57);
        let s: C64 = (0..70).map(|m| a.get(j, m) * b.get(m, k)).sum();
        assert!((p.get(j, k) - s).norm() < 1e-12);
    }

    #[test]
    fn product_dimension_mismatch() {
        let err = matrix_product(&Operator::identity(2), &Operator::identity(3)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, found: 3 }));
    }

    #[test]
    fn rejects_malformed_operators() {
        assert!(Operator::from_entries(2, vec![c(0.0, 0.0); 3]).is_err());
        assert!(Operator::from_entries(0, vec![]).is_err());
        assert!(Operator::from_entries(1, vec![c(f64::NAN, 0.0)]).is_err());
    }

    #[test]
    fn eig_of_diagonal() {
        let h = Hermitian::from_real_diagonal(&[3.0, 1.0, 2.0]).unwrap();
        let e = hermitian_eig(&h).unwrap();
        for (got, want) in e.values.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        // Column c is, up to phase, the basis vector with the c-th smallest diagonal value.
        for (col, row) in [(0, 1), (1, 2), (2, 0)] {
            assert!((e.vectors.get(row, col).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eig_of_pauli_x() {
        let x = Operator::from_entries(2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap();
        let e = hermitian_eig(&Hermitian::new(x).unwrap()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_residual_on_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = random_hermitian(&mut rng, 5);
        let e = hermitian_eig(&h).unwrap();
        let hv = matrix_product(&h, &e.vectors).unwrap();
        let lam: Vec<C64> = e.values.iter().map(|&l| c(l, 0.0)).collect();
        let vl = matrix_product(&e.vectors, &Operator::from_diagonal(&lam).unwrap()).unwrap();
        assert!(frobenius_distance(&hv, &vl).unwrap() <= 1e-9 * h.frobenius_norm());
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let rebuilt = spectral_map(&e, |l| c(l, 0.0));
        assert!(frobenius_distance(&rebuilt, &h).unwrap() <= 1e-9 * h.frobenius_norm());
    }

    #[test]
    fn non_hermitian_rejected() {
        let a = Operator::from_entries(2, vec![c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        assert!(matches!(Hermitian::new(a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let u = matrix_exp_hermitian(&Hermitian::zeros(4), 2.5).unwrap();
        assert!(frobenius_distance(&u, &Operator::identity(4)).unwrap() < 1e-15);
    }

    #[test]
    fn exp_of_diag_zero_pi() {
        let h = Hermitian::from_real_diagonal(&[0.0, PI]).unwrap();
        let u = matrix_exp_hermitian(&h, 1.0).unwrap();
        let want = Operator::from_real_diagonal(&[1.0, -1.0]).unwrap();
        assert!(frobenius_distance(&u, &want).unwrap() < 1e-15);
    }

    #[test]
    fn exp_matches_taylor_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(&mut rng, 3);
        let u = matrix_exp_hermitian(&h, 0.1).unwrap();
        let oracle = taylor_exp(&h, 0.1, 30);
        assert!(frobenius_distance(&u, &oracle).unwrap() < 1e-10);
    }

    #[test]
    fn exp_rejects_non_finite_scale() {
        assert!(matrix_exp_hermitian(&Hermitian::zeros(2), f64::INFINITY).is_err());
    }

    #[test]
    fn dft_small_cases() {
        let f1 = dft_matrix(1).unwrap();
        assert_eq!(f1.get(0, 0), c(1.0, 0.0));
        let f2 = dft_matrix(2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        for (r, col, v) in [(0, 0, s), (0, 1, s), (1, 0, s), (1, 1, -s)] {
            assert!((f2.get(r, col) - c(v, 0.0)).norm() < 1e-15);
        }
        assert!(dft_matrix(0).is_err());
    }

    #[test]
    fn dft4_unitary_by_direct_multiplication() {
        let f = dft_matrix(4).unwrap();
        let mut max_dev: f64 = 0.0;
        for j in 0..4 {
            for k in 0..4 {
                let s: C64 = (0..4).map(|m| f.get(m, j).conj() * f.get(m, k)).sum();
                let want = if j == k { 1.0 } else { 0.0 };
                max_dev = max_dev.max((s - want).norm());
            }
        }
        assert!(max_dev < 1e-12);
    }

    #[test]
    fn dft_squared_is_parity() {
        for d in [1, 2, 3, 4, 7, 16] {
            let f = dft_matrix(d).unwrap();
            let f2 = f.product(&f).unwrap();
            for j in 0..d {
                for k in 0..d {
                    let want = if (j + k) % d == 0 { 1.0 } else { 0.0 };
                    assert!((f2.get(j, k) - want).norm() < 1e-12, "d={d} ({j},{k})");
                }
            }
        }
    }

    #[test]
    fn frobenius_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_op(&mut rng, 3);
        assert_eq!(frobenius_distance(&x, &x).unwrap(), 0.0);
        let d = frobenius_distance(&Operator::identity(2), &Operator::zeros(2)).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
        let y = random_op(&mut rng, 3);
        let mut s = 0.0;
        for j in 0..3 {
            for k in 0..3 {
                let z = x.get(j, k) - y.get(j, k);
                s += z.re * z.re + z.im * z.im;
            }
        }
        assert!((frobenius_distance(&x, &y).unwrap() - s.sqrt()).abs() < 1e-14);
        assert_eq!(frobenius_distance(&x, &y).unwrap(), frobenius_distance(&y, &x).unwrap());
        assert!(frobenius_distance(&x, &Operator::identity(2)).is_err());
    }

    #[test]
    fn json_round_trip_and_length_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = random_op(&mut rng, 3);
        let back = Operator::from_json_value(x.to_json_value()).unwrap();
        assert_eq!(back, x);
        let bad = r#"{"dim": 2, "entries": [[1,0],[0,0],[0,0]]}"#;
        assert!(Operator::from_json_str(bad).is_err());
        let bad_vec = r#"{"dim": 3, "entries": [[1,0]]}"#;
        assert!(StateVector::from_json_str(bad_vec).is_err());
        let good_vec = r#"{"dim": 2, "entries": [[1,0],[0,1]]}"#;
        assert_eq!(StateVector::from_json_str(good_vec).unwrap().dim(), 2);
    }

    #[test]
    fn state_vector_norm_contract() {
        assert!(StateVector::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        let s = StateVector::unnormalized(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(!s.is_normalized());
        let n = s.renormalized().unwrap();
        assert!(n.is_normalized());
        assert!((n.norm() - 1.0).abs() < 1e-15);
        assert!(StateVector::basis(3, 3).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn exp_is_unitary(seed in any::<u64>(), d in 1usize..9, t in -10.0f64..10.0) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let h = random_hermitian(&mut rng, d);
                let u = matrix_exp_hermitian(&h, t).unwrap();
                prop_assert!(u.unitarity_deviation() <= UNITARY_TOL * (d as f64).sqrt());
            }

            #[test]
            fn exp_group_property(seed in any::<u64>(), d in 1usize..7,
                                  t1 in -10.0f64..10.0, t2 in -10.0f64..10.0) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let h = random_hermitian(&mut rng, d);
                let lhs = matrix_exp_hermitian(&h, t1).unwrap()
                    .product(&matrix_exp_hermitian(&h, t2).unwrap()).unwrap();
                let rhs = matrix_exp_hermitian(&h, t1 + t2).unwrap();
                prop_assert!(frobenius_distance(&lhs, &rhs).unwrap() <= 1e-9 * (d as f64).sqrt());
            }

            #[test]
            fn products_associate(seed in any::<u64>(), d in 1usize..6) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let (a, b, cc) = (random_op(&mut rng, d), random_op(&mut rng, d), random_op(&mut rng, d));
                let left = matrix_product(&matrix_product(&a, &b).unwrap(), &cc).unwrap();
                let right = matrix_product(&a, &matrix_product(&b, &cc).unwrap()).unwrap();
                prop_assert!(frobenius_distance(&left, &right).unwrap() < 1e-12);
            }
        }
    }
}
