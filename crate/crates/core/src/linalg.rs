//! Small dense helpers on `&[f64]` points plus the two places where a real
//! factorization is needed.

use nalgebra::{DMatrix, DVector};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn add_scaled(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub(crate) fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    norm(&sub(a, b))
}

/// Minimum-norm least-squares solution of `rows · x = rhs`, refined once.
pub(crate) fn least_squares(rows: &[&[f64]], rhs: &[f64], dim: usize) -> Vec<f64> {
    let a = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(rhs);
    let svd = a.clone().svd(true, true);
    let Ok(mut x) = svd.solve(&b, 1e-12) else {
        return vec![0.0; dim];
    };
    let r = &b - &a * &x;
    if let Ok(dx) = svd.solve(&r, 1e-12) {
        x += dx;
    }
    x.iter().copied().collect()
}

/// Orthogonal projector onto the complement of `span(vectors)` in `R^dim`.
pub(crate) fn complement_projector(vectors: &[&[f64]], dim: usize) -> DMatrix<f64> {
    let mut p = DMatrix::identity(dim, dim);
    if vectors.is_empty() {
        return p;
    }
    // Gram-Schmidt on the spanning set, twice for stability.
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let mut u = DVector::from_column_slice(v);
        for _ in 0..2 {
            for e in &basis {
                let c = e.dot(&u);
                u -= e * c;
            }
        }
        let n = u.norm();
        if n > 1e-12 * DVector::from_column_slice(v).norm() {
            basis.push(u / n);
        }
    }
    for e in &basis {
        p -= e * e.transpose();
    }
    p
}

pub(crate) fn apply(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(x)).iter().copied().collect()
}
