//! Seeded random points, divisors and vectors for the numerical checks.

use crate::curve::{CurveSpec, SurfacePoint};
use crate::cx::{c, C};
use crate::periods::{PeriodData, V3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub type Rand = ChaCha8Rng;

pub fn rng(seed: u64) -> Rand {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random finite point with |x − b̄| ≤ 1.3·spread, kept at least
/// `clearance`·min_sep away from the branch points.
pub fn random_point_clear(curve: &CurveSpec, rng: &mut Rand, clearance: f64) -> SurfacePoint {
    let m = curve.centroid();
    let s = curve.spread().max(1e-3);
    let keep = clearance * curve.min_separation();
    loop {
        let r = 1.3 * s * rng.random::<f64>().sqrt();
        let th = 2.0 * PI * rng.random::<f64>();
        let x = m + C::from_polar(r, th);
        if curve.b.iter().any(|&b| (x - b).norm() < keep) {
            continue;
        }
        if let Ok(pts) = curve.sheets_above(x) {
            return pts[rng.random_range(0..3)];
        }
    }
}

pub fn random_point(curve: &CurveSpec, rng: &mut Rand) -> SurfacePoint {
    random_point_clear(curve, rng, 0.15)
}

/// n random points with pairwise distinct x (separation ≥ 0.05·min_sep).
pub fn random_points(curve: &CurveSpec, rng: &mut Rand, n: usize) -> Vec<SurfacePoint> {
    let sep = 0.05 * curve.min_separation();
    let mut out: Vec<SurfacePoint> = Vec::with_capacity(n);
    while out.len() < n {
        let p = random_point(curve, rng);
        if out.iter().all(|q| (q.x - p.x).norm() > sep) {
            out.push(p);
        }
    }
    out
}

/// Random u with lattice coordinates uniform in [−½, ½)⁶.
pub fn random_u(periods: &PeriodData, rng: &mut Rand) -> V3 {
    let mut l1 = [0.0; 3];
    let mut l2 = [0.0; 3];
    for i in 0..3 {
        l1[i] = rng.random::<f64>() - 0.5;
        l2[i] = rng.random::<f64>() - 0.5;
    }
    let v1 = V3::new(c(l1[0], 0.0), c(l1[1], 0.0), c(l1[2], 0.0));
    let v2 = V3::new(c(l2[0], 0.0), c(l2[1], 0.0), c(l2[2], 0.0));
    (periods.omega1 * v1 + periods.omega2 * v2) * C::from(2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_points_repeat() {
        let curve = CurveSpec::new([c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        let a = random_points(&curve, &mut rng(7), 5);
        let b = random_points(&curve, &mut rng(7), 5);
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.x, q.x);
            assert_eq!(p.y, q.y);
            assert!(curve.residual(p) < 1e-12);
        }
    }
}
