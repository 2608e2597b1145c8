use crate::error::{Error, Result};

use super::Path;

/// `dim^(steps - 1)`, or `None` on overflow.
pub fn path_count(dim: usize, steps: usize) -> Option<u128> {
    if steps == 0 {
        return None;
    }
    (dim as u128).checked_pow(u32::try_from(steps - 1).ok()?)
}

/// Validates a query and returns its path count if it fits under `limit`.
pub(crate) fn guarded_count(dim: usize, steps: usize, from: usize, to: usize, limit: u64) -> Result<u64> {
    if steps == 0 {
        return Err(Error::invalid("a path sum needs at least one step"));
    }
    for idx in [from, to] {
        if idx >= dim {
            return Err(Error::IndexOutOfRange { index: idx, dim });
        }
    }
    match path_count(dim, steps) {
        Some(n) if n <= limit as u128 => Ok(n as u64),
        Some(n) => Err(Error::ResourceLimit { count: n, limit }),
        None => Err(Error::ResourceLimit { count: u128::MAX, limit }),
    }
}

/// Lexicographic iterator over all paths with fixed endpoints.
pub struct PathIter {
    dim: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for PathIter {
    type Item = Path;

    fn next(&mut self) -> Option<Path> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().expect("checked above");
        let n = cur.len();
        // Odometer over the interior slots 1..n-1.
        let mut k = n - 1;
        loop {
            k -= 1;
            if k == 0 {
                self.current = None;
                break;
            }
            if cur[k] + 1 < self.dim {
                cur[k] += 1;
                break;
            }
            cur[k] = 0;
        }
        Some(Path(out))
    }
}

pub fn enumerate_paths(dim: usize, steps: usize, from: usize, to: usize, limit: u64) -> Result<PathIter> {
    guarded_count(dim, steps, from, to, limit)?;
    let mut start = vec![0; steps + 1];
    start[0] = from;
    start[steps] = to;
    Ok(PathIter { dim, current: Some(start) })
}
