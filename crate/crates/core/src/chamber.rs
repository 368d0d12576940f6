//! Chamber membership, boundary strata and the finite reflection group
//! generated by the walls.

use std::collections::VecDeque;
use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::ChamberModel;
use crate::error::{Error, Result};

/// Default tolerance for deciding that a wall is active.
pub const DEFAULT_STRATUM_TOL: f64 = 1e-8;

/// Entrywise tolerance for identifying group elements.
pub const MATRIX_EQ_TOL: f64 = 1e-9;

/// Set of active wall indices. The empty set is the open chamber.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StratumId(Vec<usize>);

impl StratumId {
    pub fn new(mut walls: Vec<usize>) -> Self {
        walls.sort_unstable();
        walls.dedup();
        StratumId(walls)
    }

    pub fn open() -> Self {
        StratumId(Vec::new())
    }

    pub fn walls(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_open(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset(&self, other: &StratumId) -> bool {
        self.0.iter().all(|&i| other.contains(i))
    }

    pub fn union(&self, other: &StratumId) -> StratumId {
        StratumId::new(self.0.iter().chain(&other.0).copied().collect())
    }

    /// Checks that every index names a wall of `model`.
    pub fn check(&self, model: &ChamberModel) -> Result<()> {
        for &i in &self.0 {
            if i >= model.radials().len() || !model.radial(i).is_wall() {
                return Err(Error::NotAWall(i));
            }
        }
        Ok(())
    }
}

impl fmt::Display for StratumId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

/// `true` iff every wall gap at `w` is strictly positive.
pub fn contains(model: &ChamberModel, w: &[f64]) -> Result<bool> {
    model.check_dim(w)?;
    let gaps = model.gaps(w);
    Ok(model.walls().all(|r| gaps.plus[r.id] > 0.0))
}

/// `u_i = d_i⁺ − β_i(w)` for each wall, in radial order.
pub fn wall_gaps(model: &ChamberModel, w: &[f64]) -> Result<Vec<f64>> {
    model.check_dim(w)?;
    let gaps = model.gaps(w);
    Ok(model.walls().map(|r| gaps.plus[r.id]).collect())
}

/// Smallest wall gap, `+∞` when the model has no walls.
pub fn min_gap(model: &ChamberModel, w: &[f64]) -> Result<f64> {
    Ok(wall_gaps(model, w)?.into_iter().fold(f64::INFINITY, f64::min))
}

/// Walls with `|u_i(w)| ≤ tol`. Fails if `w` is outside the closed chamber
/// by more than `tol`.
pub fn stratum_of(model: &ChamberModel, w: &[f64], tol: f64) -> Result<StratumId> {
    model.check_dim(w)?;
    let gaps = model.gaps(w);
    let mut active = Vec::new();
    let mut excess: f64 = 0.0;
    for r in model.walls() {
        let u = gaps.plus[r.id];
        if u < -tol {
            excess = excess.max(-u - tol);
        } else if u.abs() <= tol {
            active.push(r.id);
        }
    }
    if excess > 0.0 {
        return Err(Error::OutsideClosedChamber { excess });
    }
    Ok(StratumId::new(active))
}

/// Up to `n` points drawn uniformly from the box `[−radius, radius]^rank`
/// and kept when every wall gap is at least `min_gap`. Deterministic in
/// `seed`. Gives up after `1000·n` draws, so thin chambers may return fewer.
pub fn sample_interior(model: &ChamberModel, n: usize, seed: u64, radius: f64, min_gap: f64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n.saturating_mul(1000) {
        if out.len() == n {
            break;
        }
        let w: Vec<f64> = (0..model.rank()).map(|_| rng.gen_range(-radius..=radius)).collect();
        let gaps = model.gaps(&w);
        if model.walls().all(|r| gaps.plus[r.id] >= min_gap) {
            out.push(w);
        }
    }
    out
}

/// Linear part of the reflection in the hyperplane orthogonal to `root`.
pub fn reflection(root: &[f64]) -> DMatrix<f64> {
    let n = root.len();
    let nn: f64 = root.iter().map(|x| x * x).sum();
    DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - 2.0 * root[i] * root[j] / nn
    })
}

/// Finite group generated by the wall reflections about `O`, acting on
/// `x = w − O`.
#[derive(Clone, Debug)]
pub struct CoxeterGroup {
    pub elements: Vec<DMatrix<f64>>,
    pub generators: Vec<DMatrix<f64>>,
}

impl CoxeterGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn position(&self, m: &DMatrix<f64>) -> Option<usize> {
        self.elements.iter().position(|e| matrices_close(e, m))
    }

    /// Applies element `k` to a point, about the centre `o`.
    pub fn act(&self, k: usize, o: &[f64], w: &[f64]) -> Vec<f64> {
        let x = nalgebra::DVector::from_iterator(w.len(), w.iter().zip(o).map(|(a, b)| a - b));
        let y = &self.elements[k] * x;
        y.iter().zip(o).map(|(a, b)| a + b).collect()
    }
}

pub(crate) fn matrices_close(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    a.shape() == b.shape() && a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= MATRIX_EQ_TOL)
}

/// Orbit closure of the wall reflections. Requires concurrent walls.
pub fn coxeter_group(model: &ChamberModel, max_order: usize) -> Result<CoxeterGroup> {
    if model.concurrent_point().is_none() {
        return Err(Error::NotConcurrent);
    }
    let n = model.rank();
    let mut generators: Vec<DMatrix<f64>> = Vec::new();
    for r in model.walls() {
        let g = reflection(&r.root);
        if !generators.iter().any(|h| matrices_close(h, &g)) {
            generators.push(g);
        }
    }
    let mut elements = vec![DMatrix::identity(n, n)];
    let mut queue = VecDeque::from([0usize]);
    while let Some(k) = queue.pop_front() {
        for g in &generators {
            let h = g * &elements[k];
            if !elements.iter().any(|e| matrices_close(e, &h)) {
                if elements.len() == max_order {
                    return Err(Error::OrderExceeded(max_order));
                }
                elements.push(h);
                queue.push_back(elements.len() - 1);
            }
        }
    }
    Ok(CoxeterGroup { elements, generators })
}
