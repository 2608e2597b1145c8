//! Least-action path dominance in a refracting medium.
//!
//! The medium enters as a potential `V(q) = c n(q)` next to the kinetic term
//! `K(p) = p^2`. Paths are weighted by the imaginary-time split step
//! `exp(-V dt) F^dag exp(-K dt) F`, whose path products are `exp(-S)` for a
//! discrete optical action `S`, so "dominant path" and "least-time path" are
//! comparable directly. The dynamic-programming oracle minimizes the
//! classical counterpart of `S`: a delay `c n(s_{t+1}) dt` per step plus the
//! hop cost `(gamma d)^2 / (4 dt)`, with `d` the distance on the periodic grid.

use serde_json::json;

use crate::error::Result;
use crate::evolution::{euclidean_split_step, SplitStepSpec};
use crate::linalg::Operator;
use crate::pathsum::{path_count, Path, PathSumEngine, PruneConfig};
use crate::quantization::{make_grid, ClassicalHamiltonian, Profile};

use super::medium::MediumProfile;
use super::report::{DemoReport, Series};

/// Delay per unit refractive index per unit time.
pub const PHASE_DELAY: f64 = 1.0;
/// Duration of one slice.
pub const DT: f64 = 1.0;
/// Relative tolerance under which two classical costs count as tied.
const COST_TIE: f64 = 1e-12;

pub fn fermat_split_spec(medium: &MediumProfile, steps: usize) -> Result<SplitStepSpec> {
    let grid = make_grid(medium.dim())?;
    let potential = Profile::Table(medium.index().iter().map(|n| PHASE_DELAY * n).collect());
    let h = ClassicalHamiltonian::new(vec![0.0, 0.0, 1.0], potential);
    SplitStepSpec::new(grid, h, steps as f64 * DT, steps)
}

fn fermat_step(medium: &MediumProfile, steps: usize) -> Result<Operator> {
    euclidean_split_step(&fermat_split_spec(medium, steps)?)
}

/// Number of paths making up the top 1% of `count`, at least one.
pub fn top_one_percent(count: u64) -> usize {
    count.div_ceil(100).max(1) as usize
}

/// Classical least-time path; ties resolve to the lexicographically smallest path.
pub fn least_time_path(medium: &MediumProfile, steps: usize, from: usize, to: usize) -> Result<Path> {
    let d = medium.dim();
    let grid = make_grid(d)?;
    let gamma = grid.step();
    crate::pathsum::enumerate_paths(d, steps, from, to, u64::MAX)?;
    let step_cost = |a: usize, b: usize| {
        let raw = a.abs_diff(b);
        let hop = gamma * raw.min(d - raw) as f64;
        PHASE_DELAY * DT * medium.index()[b] + hop * hop / (4.0 * DT)
    };
    // to_go[r][s]: cheapest cost of the last r steps starting at s.
    let mut to_go = vec![vec![f64::INFINITY; d]; steps + 1];
    to_go[0][to] = 0.0;
    for r in 1..=steps {
        for s in 0..d {
            to_go[r][s] = (0..d).map(|b| step_cost(s, b) + to_go[r - 1][b]).fold(f64::INFINITY, f64::min);
        }
    }
    let mut path = vec![from];
    let mut cur = from;
    for t in 0..steps {
        let r = steps - t;
        let best = to_go[r][cur];
        let tol = COST_TIE * (1.0 + best.abs());
        let next = (0..d)
            .find(|&b| step_cost(cur, b) + to_go[r - 1][b] <= best + tol)
            .expect("a finite optimum always has a minimizing successor");
        path.push(next);
        cur = next;
    }
    Path::new(path)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FermatQuery {
    pub top_path: Path,
    pub classical_path: Path,
    pub matched: bool,
    /// Share of the total path weight held by the top 1% of paths.
    pub concentration: f64,
    pub top_k: usize,
}

pub fn fermat_query(
    engine: &PathSumEngine,
    medium: &MediumProfile,
    steps: usize,
    from: usize,
    to: usize,
) -> Result<FermatQuery> {
    let u = fermat_step(medium, steps)?;
    fermat_query_with(engine, &u, medium, steps, from, to)
}

fn fermat_query_with(
    engine: &PathSumEngine,
    u: &Operator,
    medium: &MediumProfile,
    steps: usize,
    from: usize,
    to: usize,
) -> Result<FermatQuery> {
    let count = path_count(medium.dim(), steps).unwrap_or(u128::MAX).min(u64::MAX as u128) as u64;
    let top_k = top_one_percent(count);
    let r = engine.sum(u, steps, from, to, &PruneConfig::with_top_k(top_k))?;
    let top_path = r.top[0].path.clone();
    let classical_path = least_time_path(medium, steps, from, to)?;
    Ok(FermatQuery {
        matched: top_path == classical_path,
        top_path,
        classical_path,
        concentration: r.concentration.unwrap_or(0.0),
        top_k,
    })
}

/// Every `(from, to)` query of the medium, row-major in `from`.
fn all_queries(engine: &PathSumEngine, medium: &MediumProfile, steps: usize) -> Result<Vec<FermatQuery>> {
    let u = fermat_step(medium, steps)?;
    let d = medium.dim();
    let mut out = Vec::with_capacity(d * d);
    for j in 0..d {
        for k in 0..d {
            out.push(fermat_query_with(engine, &u, medium, steps, j, k)?);
        }
    }
    Ok(out)
}

/// Top-1% concentration averaged over every endpoint pair.
pub fn mean_concentration(engine: &PathSumEngine, medium: &MediumProfile, steps: usize) -> Result<f64> {
    let qs = all_queries(engine, medium, steps)?;
    Ok(qs.iter().map(|q| q.concentration).sum::<f64>() / qs.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiffractionComparison {
    pub reference: f64,
    /// Mean concentration of each disordered medium, in seed order.
    pub disordered: Vec<f64>,
    pub disordered_mean: f64,
    pub reference_exceeds: bool,
}

/// Compares a medium's mean concentration against disordered media of the same size.
pub fn diffraction_comparison(
    engine: &PathSumEngine,
    reference: &MediumProfile,
    steps: usize,
    seeds: &[u64],
) -> Result<DiffractionComparison> {
    let base = mean_concentration(engine, reference, steps)?;
    let disordered = seeds
        .iter()
        .map(|&s| mean_concentration(engine, &MediumProfile::disordered(reference.dim(), s)?, steps))
        .collect::<Result<Vec<_>>>()?;
    let disordered_mean = if disordered.is_empty() { f64::NAN } else { disordered.iter().sum::<f64>() / disordered.len() as f64 };
    Ok(DiffractionComparison { reference: base, reference_exceeds: base > disordered_mean, disordered, disordered_mean })
}

fn path_series(label: &str, p: &Path) -> Series {
    Series::indexed(label, p.indices().iter().map(|&s| s as f64))
}

pub fn fermat_demo(medium: &MediumProfile, steps: usize, from: usize, to: usize, seeds: &[u64]) -> Result<DemoReport> {
    let engine = PathSumEngine::new();
    let q = fermat_query(&engine, medium, steps, from, to)?;
    let cmp = diffraction_comparison(&engine, medium, steps, seeds)?;
    let mut report = DemoReport::new("fermat")
        .param("dim", medium.dim())
        .param("steps", steps)
        .param("from", from)
        .param("to", to)
        .param("medium", medium.label())
        .param("seeds", seeds.to_vec())
        .param("phase_delay", PHASE_DELAY)
        .param("dt", DT)
        .series(Series::indexed("refractive_index", medium.index().iter().copied()))
        .series(path_series("top_path", &q.top_path))
        .series(path_series("classical_path", &q.classical_path))
        .series(Series::new(
            "disordered_concentration",
            seeds.iter().zip(&cmp.disordered).map(|(&s, &c)| (s as f64, c)).collect(),
        ))
        .verdict("top_path", json!(q.top_path))
        .verdict("classical_path", json!(q.classical_path))
        .verdict("match", q.matched)
        .verdict("top_k", q.top_k)
        .verdict("concentration", q.concentration)
        .verdict("mean_concentration", cmp.reference);
    if !seeds.is_empty() {
        report = report
            .verdict("disordered_mean_concentration", cmp.disordered_mean)
            .verdict("exceeds_disordered", cmp.reference_exceeds);
    }
    Ok(report)
}
