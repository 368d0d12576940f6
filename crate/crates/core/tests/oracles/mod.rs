//! Independent reference computations used by the integration tests. Nothing
//! here calls into the numerical code under test except for reading
//! scenario data.

#![allow(dead_code)]

use chamberflow::catalog::{self, ChamberModel};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Scenarios exercised by the property and acceptance suites.
pub fn suite() -> Vec<ChamberModel> {
    let specs: &[(&str, &[f64])] = &[
        ("rank1", &[1.0, 0.0, 1.0]),
        ("rank1", &[2.0, 1.0, 1.0]),
        ("rank1", &[4.0, 0.0, 0.5]),
        ("slab", &[1.0, 1.0]),
        ("slab", &[3.0, 0.4]),
        ("a2", &[1.0, 1.0]),
        ("a2", &[2.0, 0.7]),
        ("a2", &[2.0, 1.0, 1.0]),
        ("b2", &[1.0, 1.0, 1.0]),
        ("b2", &[1.0, 2.0, 0.5]),
    ];
    specs.iter().map(|(n, p)| catalog::builtin(n, p).unwrap()).collect()
}

/// Plain `d − ⟨root, w⟩`, measured from the origin.
pub fn naive_gap(d: f64, root: &[f64], w: &[f64]) -> f64 {
    d - root.iter().zip(w).map(|(a, b)| a * b).sum::<f64>()
}

/// Potential evaluated with library `sinh`/`cosh`/`ln`.
pub fn naive_rho(model: &ChamberModel, w: &[f64]) -> f64 {
    let mut v = 0.0;
    for r in model.radials() {
        if r.m_plus > 0 {
            v -= r.m_plus as f64 * naive_gap(r.d_plus.unwrap(), &r.root, w).sinh().ln();
        }
        if r.m_minus > 0 {
            v -= r.m_minus as f64 * naive_gap(r.d_minus.unwrap(), &r.root, w).cosh().ln();
        }
    }
    v
}

/// Sum of the magnitudes of the individual radial contributions to the
/// gradient; the natural scale for relative errors when they cancel.
pub fn gradient_scale(model: &ChamberModel, w: &[f64]) -> f64 {
    let mut s = 0.0;
    for r in model.radials() {
        let n = r.root.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r.m_plus > 0 {
            let u = naive_gap(r.d_plus.unwrap(), &r.root, w);
            s += r.m_plus as f64 * (u.cosh() / u.sinh()).abs() * n;
        }
        if r.m_minus > 0 {
            let u = naive_gap(r.d_minus.unwrap(), &r.root, w);
            s += r.m_minus as f64 * u.tanh().abs() * n;
        }
    }
    s
}

pub fn hessian_scale(model: &ChamberModel, w: &[f64]) -> f64 {
    let mut s = 0.0;
    for r in model.radials() {
        let nn = r.root.iter().map(|x| x * x).sum::<f64>();
        if r.m_plus > 0 {
            let u = naive_gap(r.d_plus.unwrap(), &r.root, w);
            s += r.m_plus as f64 * nn / u.sinh().powi(2);
        }
        if r.m_minus > 0 {
            let u = naive_gap(r.d_minus.unwrap(), &r.root, w);
            s += r.m_minus as f64 * nn / u.cosh().powi(2);
        }
    }
    s
}

pub fn min_naive_gap(model: &ChamberModel, w: &[f64]) -> f64 {
    model
        .walls()
        .map(|r| naive_gap(r.d_plus.unwrap(), &r.root, w))
        .fold(f64::INFINITY, f64::min)
}

/// Central differences of `f` at `w` with step `h`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, w: &[f64], h: f64) -> Vec<f64> {
    (0..w.len())
        .map(|k| {
            let mut a = w.to_vec();
            let mut b = w.to_vec();
            a[k] += h;
            b[k] -= h;
            (f(&a) - f(&b)) / (2.0 * h)
        })
        .collect()
}

/// Central differences of a vector field; column `k` is `∂/∂w_k`.
pub fn fd_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, w: &[f64], h: f64) -> DMatrix<f64> {
    let n = w.len();
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut a = w.to_vec();
        let mut b = w.to_vec();
        a[k] += h;
        b[k] -= h;
        let (fa, fb) = (f(&a), f(&b));
        for i in 0..n {
            m[(i, k)] = (fa[i] - fb[i]) / (2.0 * h);
        }
    }
    m
}

/// `cosh(d − w(t)) = cosh(d − w₀)·e^{−mt}` for a single wall with no tanh
/// term.
pub fn rank1_collapse_time(m: f64, d: f64, w0: f64) -> f64 {
    (d - w0).cosh().ln() / m
}

pub fn rank1_position(m: f64, d: f64, w0: f64, t: f64) -> f64 {
    d - ((d - w0).cosh() * (-m * t).exp()).acosh()
}

/// With `s = sinh²(u)` the single-radial flow with both branches and equal
/// offsets becomes `s' = −2m⁺ − 2(m⁺ + m⁻)s`.
pub fn rank1_pm_collapse_time(mp: f64, mm: f64, d: f64, w0: f64) -> f64 {
    let s0 = (d - w0).sinh().powi(2);
    let k = 2.0 * (mp + mm);
    (1.0 + s0 * (mp + mm) / mp).ln() / k
}

pub fn rank1_pm_position(mp: f64, mm: f64, d: f64, w0: f64, t: f64) -> f64 {
    let s0 = (d - w0).sinh().powi(2);
    let a = mp / (mp + mm);
    let s = (s0 + a) * (-2.0 * (mp + mm) * t).exp() - a;
    d - s.sqrt().asinh()
}

/// Spectrum value `β(v) / (u + y√−1)` by complex division.
pub fn spectrum_value(bv: f64, u: f64, y: f64) -> Complex64 {
    Complex64::new(bv, 0.0) / Complex64::new(u, y)
}

fn reflection(root: &[f64]) -> DMatrix<f64> {
    let n = root.len();
    let nn: f64 = root.iter().map(|x| x * x).sum();
    DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - 2.0 * root[i] * root[j] / nn)
}

fn key(m: &DMatrix<f64>) -> Vec<i64> {
    m.iter().map(|x| (x * 1e6).round() as i64).collect()
}

/// Group generated by the wall reflections, enumerated depth-first over
/// words with right multiplication and deduplicated by rounded entries.
pub fn brute_force_closure(model: &ChamberModel, cap: usize) -> Option<Vec<DMatrix<f64>>> {
    let gens: Vec<DMatrix<f64>> = model.walls().map(|r| reflection(&r.root)).collect();
    let n = model.rank();
    let mut seen = std::collections::BTreeMap::new();
    let mut stack = vec![DMatrix::<f64>::identity(n, n)];
    while let Some(m) = stack.pop() {
        if seen.contains_key(&key(&m)) {
            continue;
        }
        seen.insert(key(&m), m.clone());
        if seen.len() > cap {
            return None;
        }
        for g in gens.iter().rev() {
            let next = &m * g;
            if !seen.contains_key(&key(&next)) {
                stack.push(next);
            }
        }
    }
    Some(seen.into_values().collect())
}
