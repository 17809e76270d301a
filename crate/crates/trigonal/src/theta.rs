//! Riemann theta with half-integer characteristics, summed over max-norm
//! shells around the dominant lattice point.
//!
//! θ[a;b](z; τ) = Σₙ exp(πi ᵗ(n+a)τ(n+a) + 2πi ᵗ(n+a)(z+b)).

use crate::cx::{C, I, ZERO};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

/// Shells are added until one contributes less than this fraction.
const SHELL_STOP: f64 = 1e-16;
/// At the radius limit the last shell must be below this fraction.
const SHELL_LIMIT: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Theta {
    pub tau: DMatrix<C>,
    y_inv: DMatrix<f64>,
    g: usize,
}

/// exp(log_scale)·coeffs[k] is the k-th Taylor coefficient of s ↦ θ(z + s d).
#[derive(Debug, Clone)]
pub struct ThetaJet {
    pub log_scale: C,
    pub coeffs: Vec<C>,
    /// Radius (in shells) actually summed.
    pub shells: usize,
    /// Σ|terms| in the same scaling as `coeffs`; the cancellation reference.
    pub abs_sum: f64,
}

impl ThetaJet {
    pub fn value(&self, k: usize) -> C {
        self.coeffs[k] * self.log_scale.exp()
    }
}

impl Theta {
    pub fn new(tau: DMatrix<C>) -> Result<Self> {
        let g = tau.nrows();
        let y = tau.map(|z| z.im);
        let y = (&y + y.transpose()) * 0.5;
        let y_inv = y.clone().try_inverse().ok_or_else(|| Error::InvalidInput("Im τ is singular".into()))?;
        let eig = nalgebra::SymmetricEigen::new(y).eigenvalues;
        if eig.iter().any(|&e| e <= 0.0) {
            return Err(Error::InvalidInput("Im τ is not positive definite".into()));
        }
        Ok(Self { tau, y_inv, g })
    }

    pub fn genus(&self) -> usize {
        self.g
    }

    pub fn eval(&self, z: &[C], a: &[f64], b: &[f64], radius: usize) -> Result<C> {
        Ok(self.jet(z, a, b, None, 0, radius)?.value(0))
    }

    /// Taylor coefficients up to `order` of s ↦ θ[a;b](z + s·dir).
    pub fn jet(
        &self,
        z: &[C],
        a: &[f64],
        b: &[f64],
        dir: Option<&[C]>,
        order: usize,
        radius: usize,
    ) -> Result<ThetaJet> {
        let g = self.g;
        let im_z = DVector::from_iterator(g, z.iter().map(|w| w.im));
        let center = -(&self.y_inv * im_z);
        let nc: Vec<i64> = (0..g).map(|i| (center[i] - a[i]).round() as i64).collect();
        let zb: Vec<C> = (0..g).map(|i| z[i] + b[i]).collect();
        let exponent = |m: &[f64]| -> C {
            let mut e = ZERO;
            for i in 0..g {
                let mut row = ZERO;
                for j in 0..g {
                    row += self.tau[(i, j)] * m[j];
                }
                e += m[i] * row * PI + 2.0 * PI * m[i] * zb[i];
            }
            I * e
        };
        let m0: Vec<f64> = (0..g).map(|i| nc[i] as f64 + a[i]).collect();
        let e_ref = exponent(&m0);
        let mut fact = vec![1.0f64; order + 1];
        for k in 1..=order {
            fact[k] = fact[k - 1] * k as f64;
        }
        let mut coeffs = vec![ZERO; order + 1];
        let mut total_abs = 0.0;
        let mut last_shell = 0.0;
        let mut shells = 0;
        for k in 0..=radius {
            let mut shell_abs = 0.0;
            for_each_shell_point(g, k as i64, |off| {
                let m: Vec<f64> = (0..g).map(|i| (nc[i] + off[i]) as f64 + a[i]).collect();
                let w = (exponent(&m) - e_ref).exp();
                let wn = w.norm();
                match dir {
                    None => {
                        coeffs[0] += w;
                        shell_abs += wn;
                    }
                    Some(d) => {
                        let mut md = ZERO;
                        for i in 0..g {
                            md += d[i] * m[i];
                        }
                        let q = 2.0 * PI * I * md;
                        let mut p = w;
                        coeffs[0] += w;
                        for j in 1..=order {
                            p *= q;
                            coeffs[j] += p / fact[j];
                        }
                        shell_abs += wn * (1.0 + q.norm()).powi(order as i32);
                    }
                }
            });
            total_abs += shell_abs;
            last_shell = shell_abs;
            shells = k;
            if k >= 2 && shell_abs <= SHELL_STOP * total_abs {
                break;
            }
        }
        if shells == radius && last_shell > SHELL_LIMIT * total_abs {
            return Err(Error::TruncationInsufficient(radius));
        }
        Ok(ThetaJet { log_scale: e_ref, coeffs, shells, abs_sum: total_abs })
    }
}

/// Visit every integer offset with max-norm exactly k, in lexicographic order.
fn for_each_shell_point(g: usize, k: i64, mut f: impl FnMut(&[i64])) {
    if k == 0 {
        f(&vec![0; g]);
        return;
    }
    let mut off = vec![-k; g];
    loop {
        if off.iter().any(|v| v.abs() == k) {
            f(&off);
        }
        let mut i = g;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if off[i] < k {
                off[i] += 1;
                for o in off.iter_mut().skip(i + 1) {
                    *o = -k;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx::c;

    fn tau3() -> DMatrix<C> {
        DMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.1, 1.1),
                c(0.2, 0.3),
                c(-0.1, 0.1),
                c(0.2, 0.3),
                c(-0.3, 0.9),
                c(0.05, -0.2),
                c(-0.1, 0.1),
                c(0.05, -0.2),
                c(0.4, 1.3),
            ],
        )
    }

    #[test]
    fn shell_sizes() {
        for g in 1..=3 {
            for k in 0..4i64 {
                let mut n = 0;
                for_each_shell_point(g, k, |_| n += 1);
                let want = if k == 0 { 1 } else { (2 * k + 1).pow(g as u32) - (2 * k - 1).pow(g as u32) };
                assert_eq!(n, want);
            }
        }
    }

    #[test]
    fn odd_characteristic_vanishes_at_zero() {
        let th = Theta::new(tau3()).unwrap();
        let z = [ZERO; 3];
        let v = th.eval(&z, &[0.5, 0.0, 0.0], &[0.5, 0.0, 0.0], 12).unwrap();
        assert!(v.norm() < 1e-14);
        let v = th.eval(&z, &[0.5, 0.5, 0.0], &[0.5, 0.5, 0.0], 12).unwrap();
        assert!(v.norm() > 1e-3);
    }

    #[test]
    fn zero_characteristic_is_even() {
        let th = Theta::new(tau3()).unwrap();
        let z = [c(0.3, 0.2), c(-0.1, 0.4), c(0.25, -0.3)];
        let mz: Vec<C> = z.iter().map(|w| -w).collect();
        let a = th.eval(&z, &[0.0; 3], &[0.0; 3], 12).unwrap();
        let b = th.eval(&mz, &[0.0; 3], &[0.0; 3], 12).unwrap();
        assert!((a - b).norm() < 1e-14 * a.norm());
    }

    #[test]
    fn diagonal_tau_factorises() {
        let tau = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.0, 1.0); 3]));
        let th = Theta::new(tau).unwrap();
        let z = [c(0.31, 0.17), ZERO, ZERO];
        let v = th.eval(&z, &[0.0; 3], &[0.0; 3], 12).unwrap();
        let one_d = |z: C| -> C {
            (-30..=30)
                .map(|n: i32| {
                    let n = n as f64;
                    (I * PI * n * n * I + 2.0 * PI * I * n * z).exp()
                })
                .sum()
        };
        let want = one_d(z[0]) * one_d(ZERO) * one_d(ZERO);
        assert!((v - want).norm() < 1e-12 * want.norm());
    }

    #[test]
    fn jet_matches_difference_quotient() {
        let th = Theta::new(tau3()).unwrap();
        let z = [c(0.3, 0.2), c(-0.1, 0.4), c(0.25, -0.3)];
        let d = [c(0.2, 0.1), c(1.0, 0.0), c(-0.3, 0.5)];
        let a = [0.5, 0.0, 0.5];
        let b = [0.0, 0.5, 0.5];
        let jet = th.jet(&z, &a, &b, Some(&d), 2, 12).unwrap();
        let h = 1e-5;
        let at = |s: f64| {
            let zz: Vec<C> = (0..3).map(|i| z[i] + d[i] * s).collect();
            th.eval(&zz, &a, &b, 12).unwrap()
        };
        let fd1 = (at(h) - at(-h)) / (2.0 * h);
        let fd2 = (at(h) - 2.0 * at(0.0) + at(-h)) / (h * h);
        assert!((jet.value(1) - fd1).norm() < 1e-7 * fd1.norm());
        assert!((2.0 * jet.value(2) - fd2).norm() < 1e-3 * fd2.norm());
    }

    #[test]
    fn truncation_error_reported() {
        let th = Theta::new(tau3()).unwrap();
        let z = [c(0.3, 0.2), c(-0.1, 0.4), c(0.25, -0.3)];
        assert_eq!(th.eval(&z, &[0.0; 3], &[0.0; 3], 1), Err(Error::TruncationInsufficient(1)));
    }
}
