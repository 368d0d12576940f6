//! The potential `ρ`, the radial mean-curvature field `X = grad ρ`, its
//! Hessian, and the fields induced on boundary strata.
//!
//! ```text
//! ρ(w) = −Σ_walls m⁺ log sinh(u⁺) − Σ_minus m⁻ log cosh(u⁻)
//! X(w) =  Σ_walls m⁺ coth(u⁺) β♯ + Σ_minus m⁻ tanh(u⁻) β♯
//! ```
//! with `u^± = d^± − β(w)`. On a stratum `σ_S` the wall sum skips `S`; the
//! tanh sum keeps every minus radial.

use nalgebra::DMatrix;

use crate::catalog::{ChamberModel, Gaps};
use crate::chamber::{self, StratumId, DEFAULT_STRATUM_TOL};
use crate::error::{Error, Result};
use crate::linalg;

/// Gaps below this are refused; the flow handles the wall asymptotically.
pub const GAP_FLOOR: f64 = 1e-12;

/// Value, gradient and Hessian of `ρ` at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: DMatrix<f64>,
}

pub(crate) fn coth(u: f64) -> f64 {
    1.0 + 2.0 / (2.0 * u).exp_m1()
}

fn log_sinh(u: f64) -> f64 {
    u + (-(-2.0 * u).exp_m1()).ln() - std::f64::consts::LN_2
}

fn log_cosh(u: f64) -> f64 {
    let a = u.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

fn inv_sinh_sq(u: f64) -> f64 {
    let e = (-2.0 * u).exp_m1();
    4.0 * (-2.0 * u).exp() / (e * e)
}

fn inv_cosh_sq(u: f64) -> f64 {
    let e = (-2.0 * u.abs()).exp();
    4.0 * e / ((1.0 + e) * (1.0 + e))
}

/// Gaps at `w` after checking that every wall outside `skip` is open and
/// above the evaluation floor.
pub(crate) fn checked_gaps(model: &ChamberModel, w: &[f64], skip: &StratumId) -> Result<Gaps> {
    model.check_dim(w)?;
    let gaps = model.gaps(w);
    check_gaps(model, &gaps, skip)?;
    Ok(gaps)
}

pub(crate) fn check_gaps(model: &ChamberModel, gaps: &Gaps, skip: &StratumId) -> Result<()> {
    for r in model.walls() {
        if skip.contains(r.id) {
            continue;
        }
        let u = gaps.plus[r.id];
        if u.is_nan() || u <= 0.0 {
            return Err(Error::NotInterior);
        }
        if u < GAP_FLOOR {
            return Err(Error::TooCloseToWall { radial: r.id, gap: u });
        }
    }
    Ok(())
}

pub(crate) fn potential_from_gaps(model: &ChamberModel, gaps: &Gaps, skip: &StratumId) -> f64 {
    let mut v = 0.0;
    for r in model.radials() {
        if r.is_wall() && !skip.contains(r.id) {
            v -= r.m_plus as f64 * log_sinh(gaps.plus[r.id]);
        }
        if r.has_minus() {
            v -= r.m_minus as f64 * log_cosh(gaps.minus[r.id]);
        }
    }
    v
}

pub(crate) fn field_from_gaps(model: &ChamberModel, gaps: &Gaps, skip: &StratumId) -> Vec<f64> {
    let mut x = vec![0.0; model.rank()];
    for r in model.radials() {
        let mut c = 0.0;
        if r.is_wall() && !skip.contains(r.id) {
            c += r.m_plus as f64 * coth(gaps.plus[r.id]);
        }
        if r.has_minus() {
            c += r.m_minus as f64 * gaps.minus[r.id].tanh();
        }
        for (xi, bi) in x.iter_mut().zip(&r.root) {
            *xi += c * bi;
        }
    }
    x
}

pub(crate) fn hessian_from_gaps(model: &ChamberModel, gaps: &Gaps, skip: &StratumId) -> DMatrix<f64> {
    let n = model.rank();
    let mut h = DMatrix::zeros(n, n);
    for r in model.radials() {
        let mut c = 0.0;
        if r.is_wall() && !skip.contains(r.id) {
            c += r.m_plus as f64 * inv_sinh_sq(gaps.plus[r.id]);
        }
        if r.has_minus() {
            c -= r.m_minus as f64 * inv_cosh_sq(gaps.minus[r.id]);
        }
        for j in 0..n {
            for k in 0..n {
                h[(j, k)] += c * r.root[j] * r.root[k];
            }
        }
    }
    h
}

pub fn rho(model: &ChamberModel, w: &[f64]) -> Result<f64> {
    let open = StratumId::open();
    let gaps = checked_gaps(model, w, &open)?;
    Ok(potential_from_gaps(model, &gaps, &open))
}

/// The radial mean-curvature field `X_w = grad ρ(w)`.
pub fn grad(model: &ChamberModel, w: &[f64]) -> Result<Vec<f64>> {
    let open = StratumId::open();
    let gaps = checked_gaps(model, w, &open)?;
    Ok(field_from_gaps(model, &gaps, &open))
}

pub fn hessian(model: &ChamberModel, w: &[f64]) -> Result<DMatrix<f64>> {
    let open = StratumId::open();
    let gaps = checked_gaps(model, w, &open)?;
    Ok(hessian_from_gaps(model, &gaps, &open))
}

pub fn eval(model: &ChamberModel, w: &[f64]) -> Result<FieldEval> {
    let open = StratumId::open();
    let gaps = checked_gaps(model, w, &open)?;
    Ok(FieldEval {
        value: potential_from_gaps(model, &gaps, &open),
        gradient: field_from_gaps(model, &gaps, &open),
        hessian: hessian_from_gaps(model, &gaps, &open),
    })
}

fn check_on_stratum(model: &ChamberModel, s: &StratumId, w: &[f64]) -> Result<Gaps> {
    s.check(model)?;
    let found = chamber::stratum_of(model, w, DEFAULT_STRATUM_TOL)?;
    if &found != s {
        return Err(Error::NotOnStratum {
            expected: s.clone(),
            found,
        });
    }
    checked_gaps(model, w, s)
}

/// Mean-curvature field of the focal translate through `w ∈ σ_S`.
///
/// Computed literally from the gap formula; no projection onto the stratum
/// is applied.
pub fn stratum_field(model: &ChamberModel, s: &StratumId, w: &[f64]) -> Result<Vec<f64>> {
    let gaps = check_on_stratum(model, s, w)?;
    Ok(field_from_gaps(model, &gaps, s))
}

/// Potential of the stratum field. Convex when there are no minus radials;
/// otherwise no sign is guaranteed.
pub fn stratum_rho(model: &ChamberModel, s: &StratumId, w: &[f64]) -> Result<f64> {
    let gaps = check_on_stratum(model, s, w)?;
    Ok(potential_from_gaps(model, &gaps, s))
}

pub fn stratum_hessian(model: &ChamberModel, s: &StratumId, w: &[f64]) -> Result<DMatrix<f64>> {
    let gaps = check_on_stratum(model, s, w)?;
    Ok(hessian_from_gaps(model, &gaps, s))
}

/// Hessian restricted to the tangent space of the stratum through `w`.
pub fn stratum_hessian_tangent(model: &ChamberModel, s: &StratumId, w: &[f64]) -> Result<DMatrix<f64>> {
    let h = stratum_hessian(model, s, w)?;
    let normals: Vec<&[f64]> = s.walls().iter().map(|&i| model.radial(i).root.as_slice()).collect();
    let p = linalg::complement_projector(&normals, model.rank());
    Ok(&p * h * &p)
}
