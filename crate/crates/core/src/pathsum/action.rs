//! Phase-space form of the split-step path amplitude.
//!
//! Inserting a momentum resolution in every slice of
//! `exp(-i V dt) F^dag exp(-i K dt) F` writes each single-step matrix element
//! as `(1/D) Sum_m exp(i A_t(m))`, where
//!
//! `A_t(m) = -(2 pi / D) m (s_{t+1} - s_t) - K(p_m) dt - V(q_{s_{t+1}}) dt`.
//!
//! The potential sits at the later slice point because `V` acts after the
//! kinetic factor within a step.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::evolution::SplitStepSpec;
use crate::linalg::C64;

use super::Path;

fn check_query(split: &SplitStepSpec, qpath: &Path, ppath: &[usize]) -> Result<()> {
    let d = split.grid().dim();
    if qpath.steps() != split.steps() {
        return Err(Error::DimensionMismatch { expected: split.steps() + 1, found: qpath.indices().len() });
    }
    if ppath.len() != split.steps() {
        return Err(Error::DimensionMismatch { expected: split.steps(), found: ppath.len() });
    }
    qpath.check_dim(d)?;
    match ppath.iter().find(|&&m| m >= d) {
        Some(&bad) => Err(Error::IndexOutOfRange { index: bad, dim: d }),
        None => Ok(()),
    }
}

/// Discrete action of a position path `s_0..s_N` paired with momenta `m_0..m_{N-1}`.
pub fn phase_space_action(split: &SplitStepSpec, qpath: &Path, ppath: &[usize]) -> Result<f64> {
    check_query(split, qpath, ppath)?;
    let grid = split.grid();
    let h = split.hamiltonian();
    let d = grid.dim();
    let dt = split.dt();
    let s = qpath.indices();
    let mut action = 0.0;
    for (t, &m) in ppath.iter().enumerate() {
        // Reduced mod D so the phase stays small for large indices.
        let shift = ((m * ((s[t + 1] + d - s[t]) % d)) % d) as f64;
        action += -2.0 * PI * shift / d as f64 - h.kinetic_at(grid, m) * dt - h.potential.at(grid, s[t + 1]) * dt;
    }
    Ok(action)
}

/// `exp(i A) / D^N`.
pub fn phase_space_amplitude(split: &SplitStepSpec, qpath: &Path, ppath: &[usize]) -> Result<C64> {
    let a = phase_space_action(split, qpath, ppath)?;
    let d = split.grid().dim() as f64;
    Ok(C64::from_polar(d.powi(-(split.steps() as i32)), a))
}

/// Position-path amplitude recovered by summing over every momentum path.
///
/// Cost is `D^N`; `resource_limit` bounds it.
pub fn momentum_sum(split: &SplitStepSpec, qpath: &Path, resource_limit: u64) -> Result<C64> {
    let d = split.grid().dim();
    let n = split.steps();
    match (d as u128).checked_pow(n as u32) {
        Some(c) if c <= resource_limit as u128 => {}
        Some(c) => return Err(Error::ResourceLimit { count: c, limit: resource_limit }),
        None => return Err(Error::ResourceLimit { count: u128::MAX, limit: resource_limit }),
    }
    check_query(split, qpath, &vec![0; n])?;
    // The momentum sum factorizes over slices; it is still evaluated path by
    // path so that it checks the action formula itself.
    let mut ppath = vec![0usize; n];
    let mut total = C64::new(0.0, 0.0);
    loop {
        total += phase_space_amplitude(split, qpath, &ppath)?;
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(total);
            }
            k -= 1;
            if ppath[k] + 1 < d {
                ppath[k] += 1;
                break;
            }
            ppath[k] = 0;
        }
    }
}
