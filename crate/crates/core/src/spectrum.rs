//! Complex principal curvatures of parallel translates, their regularized
//! traces, and the focal hyperplane arrangements.
//!
//! For a direction `v` at the translate through `w` the nonzero spectrum is
//!
//! ```text
//! β_i(v) / (u_i⁺ + jπ√−1)        (walls, j ∈ ℤ)
//! β_i(v) / (u_i⁻ + (j+½)π√−1)    (minus radials, j ∈ ℤ)
//! ```
//!
//! Neither family is absolutely summable. Partial sums are always taken
//! symmetrically, pairing each value with its conjugate, which turns them
//! into the partial-fraction expansions of `coth` and `tanh`.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::catalog::{ChamberModel, Gaps};
use crate::chamber::StratumId;
use crate::error::{Error, Result};
use crate::field;
use crate::linalg;

/// Default truncation for spectrum display.
pub const DEFAULT_J_MAX: i64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub radial: usize,
    pub j: i64,
    pub branch: Branch,
    pub value: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Period {
    pub radial: usize,
    pub branch: Branch,
    pub value: Complex64,
}

/// Truncated spectrum for one direction at one translate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSlice {
    pub w: Vec<f64>,
    pub v: Vec<f64>,
    pub entries: Vec<SpectrumEntry>,
    pub periods: Vec<Period>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneItem {
    pub radial: usize,
    pub branch: Branch,
    pub j: i64,
    pub level: Complex64,
    pub normal: Vec<f64>,
}

/// Hyperplanes `{β_i = level}`; real levels for the real focal set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneArrangement {
    pub items: Vec<HyperplaneItem>,
}

// β(v) / (u + y√−1), written out so that y ↦ −y gives the exact conjugate.
fn entry_value(bv: f64, u: f64, y: f64) -> Complex64 {
    let den = u * u + y * y;
    Complex64::new(bv * u / den, -bv * y / den)
}

fn plus_imag(j: i64) -> f64 {
    j as f64 * PI
}

fn minus_imag(j: i64) -> f64 {
    (j as f64 + 0.5) * PI
}

/// Ordering of complex principal curvatures: modulus descending, then real
/// part descending, then imaginary part descending.
pub fn curvature_order(a: &Complex64, b: &Complex64) -> Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then(b.re.total_cmp(&a.re))
        .then(b.im.total_cmp(&a.im))
}

fn check_direction(model: &ChamberModel, v: &[f64]) -> Result<()> {
    model.check_dim(v)?;
    if v.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroDirection);
    }
    Ok(())
}

/// Nonzero spectrum entries with `|j| ≤ j_max` on the coth branch and
/// `−j_max−1 ≤ j ≤ j_max` on the tanh branch (so that conjugates pair up).
pub fn lifted_spectrum(model: &ChamberModel, w: &[f64], v: &[f64], j_max: i64) -> Result<SpectrumSlice> {
    let gaps = field::checked_gaps(model, w, &StratumId::open())?;
    check_direction(model, v)?;
    let j_max = j_max.max(0);
    let mut entries = Vec::new();
    let mut periods = Vec::new();
    for r in model.radials() {
        let bv = r.eval(v);
        if r.is_wall() {
            periods.push(Period {
                radial: r.id,
                branch: Branch::Plus,
                value: Complex64::new(PI / r.d_plus.unwrap_or(f64::NAN), 0.0),
            });
            if bv != 0.0 {
                for j in -j_max..=j_max {
                    entries.push(SpectrumEntry {
                        radial: r.id,
                        j,
                        branch: Branch::Plus,
                        value: entry_value(bv, gaps.plus[r.id], plus_imag(j)),
                    });
                }
            }
        }
        if r.has_minus() {
            periods.push(Period {
                radial: r.id,
                branch: Branch::Minus,
                value: Complex64::new(PI, 0.0) / Complex64::new(r.d_minus.unwrap_or(f64::NAN), PI / 2.0),
            });
            if bv != 0.0 {
                for j in (-j_max - 1)..=j_max {
                    entries.push(SpectrumEntry {
                        radial: r.id,
                        j,
                        branch: Branch::Minus,
                        value: entry_value(bv, gaps.minus[r.id], minus_imag(j)),
                    });
                }
            }
        }
    }
    entries.sort_by(|a, b| curvature_order(&a.value, &b.value));
    Ok(SpectrumSlice {
        w: w.to_vec(),
        v: v.to_vec(),
        entries,
        periods,
    })
}

/// `max_{|v|=1} ‖A_v‖_∞²`: the largest squared modulus over the spectrum,
/// attained at `j = 0` (and `j ∈ {0,−1}` on the tanh branch).
pub(crate) fn sup_norm_sq_from_gaps(model: &ChamberModel, gaps: &Gaps) -> f64 {
    let mut best: f64 = 0.0;
    for r in model.radials() {
        let nn = r.root_norm_sq();
        if r.is_wall() {
            let u = gaps.plus[r.id];
            best = best.max(nn / (u * u));
        }
        if r.has_minus() {
            let u = gaps.minus[r.id];
            best = best.max(nn / (u * u + PI * PI / 4.0));
        }
    }
    best
}

/// Multiplicity-weighted symmetric partial sum of the spectrum, `|j| ≤ n`
/// (coth branch) and `−n−1 ≤ j ≤ n` (tanh branch).
pub fn regularized_trace_series(model: &ChamberModel, w: &[f64], v: &[f64], n: u64) -> Result<f64> {
    let gaps = field::checked_gaps(model, w, &StratumId::open())?;
    model.check_dim(v)?;
    let n = n as i64;
    let mut total = Complex64::new(0.0, 0.0);
    let mut magnitude = 0.0;
    for r in model.radials() {
        let bv = r.eval(v);
        if bv == 0.0 {
            continue;
        }
        if r.is_wall() {
            let u = gaps.plus[r.id];
            // Smallest terms first.
            let mut s = Complex64::new(0.0, 0.0);
            for j in (1..=n).rev() {
                s += entry_value(bv, u, plus_imag(j)) + entry_value(bv, u, plus_imag(-j));
            }
            s += entry_value(bv, u, 0.0);
            magnitude += r.m_plus as f64 * s.norm();
            total += s * r.m_plus as f64;
        }
        if r.has_minus() {
            let u = gaps.minus[r.id];
            let mut s = Complex64::new(0.0, 0.0);
            for j in (0..=n).rev() {
                s += entry_value(bv, u, minus_imag(j)) + entry_value(bv, u, minus_imag(-j - 1));
            }
            magnitude += r.m_minus as f64 * s.norm();
            total += s * r.m_minus as f64;
        }
    }
    debug_assert!(total.im.abs() <= 1e-12 * magnitude.max(f64::MIN_POSITIVE));
    Ok(total.re)
}

/// Closed form of the regularized trace of the focal translate through
/// `w ∈ σ_S`: `⟨X^σ(w), v⟩`.
pub fn regularized_trace_closed(model: &ChamberModel, w: &[f64], v: &[f64], s: &StratumId) -> Result<f64> {
    model.check_dim(v)?;
    let x = field::stratum_field(model, s, w)?;
    Ok(linalg::dot(&x, v))
}

pub fn real_focal_arrangement(model: &ChamberModel) -> HyperplaneArrangement {
    let items = model
        .walls()
        .map(|r| HyperplaneItem {
            radial: r.id,
            branch: Branch::Plus,
            j: 0,
            level: Complex64::new(r.d_plus.unwrap_or(f64::NAN), 0.0),
            normal: r.root.clone(),
        })
        .collect();
    HyperplaneArrangement { items }
}

/// Complex focal hyperplanes with `|j| ≤ j_max` on both branches.
pub fn complex_focal_arrangement(model: &ChamberModel, j_max: i64) -> HyperplaneArrangement {
    let j_max = j_max.max(0);
    let mut items = Vec::new();
    for r in model.radials() {
        if r.is_wall() {
            let d = r.d_plus.unwrap_or(f64::NAN);
            for j in -j_max..=j_max {
                items.push(HyperplaneItem {
                    radial: r.id,
                    branch: Branch::Plus,
                    j,
                    level: Complex64::new(d, plus_imag(j)),
                    normal: r.root.clone(),
                });
            }
        }
        if r.has_minus() {
            let d = r.d_minus.unwrap_or(f64::NAN);
            for j in -j_max..=j_max {
                items.push(HyperplaneItem {
                    radial: r.id,
                    branch: Branch::Minus,
                    j,
                    level: Complex64::new(d, minus_imag(j)),
                    normal: r.root.clone(),
                });
            }
        }
    }
    HyperplaneArrangement { items }
}

/// Principal curvature covectors of the unlifted submanifold:
/// `λ_i⁺ = β_i / tanh d_i⁺` and `λ_i⁻ = tanh(d_i⁻) β_i`.
pub fn ambient_curvatures(model: &ChamberModel) -> Vec<(usize, Branch, Vec<f64>)> {
    let mut out = Vec::new();
    for r in model.radials() {
        if let Some(d) = r.d_plus.filter(|_| r.is_wall()) {
            out.push((r.id, Branch::Plus, linalg::scale(&r.root, 1.0 / d.tanh())));
        }
        if let Some(d) = r.d_minus.filter(|_| r.has_minus()) {
            out.push((r.id, Branch::Minus, linalg::scale(&r.root, d.tanh())));
        }
    }
    out
}
