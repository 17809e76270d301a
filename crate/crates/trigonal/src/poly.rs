//! Dense complex polynomials, coefficients in ascending order.

use crate::cx::{C, ONE, ZERO};
use crate::error::{Error, Result};
use nalgebra::DMatrix;

pub fn eval(p: &[C], x: C) -> C {
    p.iter().rev().fold(ZERO, |acc, &a| acc * x + a)
}

pub fn derivative(p: &[C]) -> Vec<C> {
    p.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect()
}

pub fn mul(a: &[C], b: &[C]) -> Vec<C> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn sub(a: &[C], b: &[C]) -> Vec<C> {
    let n = a.len().max(b.len());
    (0..n).map(|i| a.get(i).copied().unwrap_or(ZERO) - b.get(i).copied().unwrap_or(ZERO)).collect()
}

pub fn from_roots(roots: &[C]) -> Vec<C> {
    roots.iter().fold(vec![ONE], |acc, &r| mul(&acc, &[-r, ONE]))
}

/// Synthetic division by (x − r). Returns quotient and remainder.
pub fn deflate(p: &[C], r: C) -> (Vec<C>, C) {
    let n = p.len();
    if n == 0 {
        return (Vec::new(), ZERO);
    }
    let mut q = vec![ZERO; n - 1];
    let mut acc = p[n - 1];
    for k in (0..n - 1).rev() {
        q[k] = acc;
        acc = acc * r + p[k];
    }
    (q, acc)
}

/// Sum of absolute values of the terms of p at x; the natural scale for residuals.
pub fn eval_scale(p: &[C], x: C) -> f64 {
    let ax = x.norm();
    p.iter().enumerate().map(|(k, a)| a.norm() * ax.powi(k as i32)).sum()
}

/// Roots of p by companion-matrix eigenvalues followed by one Newton step
/// on `polish` (usually the undeflated polynomial).
pub fn roots(p: &[C], polish: Option<&[C]>) -> Result<Vec<C>> {
    let mut p = p.to_vec();
    while p.len() > 1 && p.last().is_some_and(|a| *a == ZERO) {
        p.pop();
    }
    let n = p.len().saturating_sub(1);
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = p[n];
    let mut m = DMatrix::<C>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = ONE;
    }
    for i in 0..n {
        m[(i, n - 1)] = -p[i] / lead;
    }
    let ev = m.eigenvalues().ok_or_else(|| Error::DegenerateConfiguration("companion eigenvalues".into()))?;
    let target: &[C] = polish.unwrap_or(&p);
    let dt = derivative(target);
    Ok(ev
        .iter()
        .map(|&z| {
            let d = eval(&dt, z);
            if d.norm() > 0.0 {
                let step = eval(target, z) / d;
                if step.is_finite() {
                    return z - step;
                }
            }
            z
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx::c;

    #[test]
    fn deflation_round_trip() {
        let r = [c(1.0, 0.5), c(-2.0, 0.0), c(0.0, 3.0), c(4.0, -1.0)];
        let p = from_roots(&r);
        let (q, rem) = deflate(&p, r[2]);
        assert!(rem.norm() < 1e-12);
        let back = mul(&q, &[-r[2], ONE]);
        for (a, b) in back.iter().zip(&p) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn companion_roots() {
        let r = [c(1.0, 0.5), c(-2.0, 0.0), c(0.0, 3.0)];
        let p = mul(&from_roots(&r), &[c(2.0, 1.0)]);
        let mut got = roots(&p, None).unwrap();
        got.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((got[0] - r[1]).norm() < 1e-12);
        assert!((got[1] - r[2]).norm() < 1e-12);
        assert!((got[2] - r[0]).norm() < 1e-12);
    }
}
