//! Small complex helpers shared by every module.

use num_complex::Complex64;
use std::f64::consts::PI;

pub type C = Complex64;

pub const I: C = C::new(0.0, 1.0);
pub const ONE: C = C::new(1.0, 0.0);
pub const ZERO: C = C::new(0.0, 0.0);

/// Primitive cube root of unity exp(2πi/3).
pub const ZETA: C = C::new(-0.5, 0.866_025_403_784_438_6);

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// ζ₃^k for any integer k.
pub fn zeta(k: i64) -> C {
    match k.rem_euclid(3) {
        0 => ONE,
        1 => ZETA,
        _ => ZETA.conj(),
    }
}

/// k-th root with argument in (−π/k, π/k].
pub fn principal_root(z: C, k: u32) -> C {
    if z == ZERO {
        return ZERO;
    }
    let (r, th) = z.to_polar();
    C::from_polar(r.powf(1.0 / k as f64), th / k as f64)
}

pub fn principal_cbrt(z: C) -> C {
    principal_root(z, 3)
}

/// Index k ∈ {0,1,2} with ζ^k·a closest to b.
pub fn zeta_index(a: C, b: C) -> i64 {
    (0..3)
        .min_by(|&i, &j| {
            let di = (zeta(i) * a - b).norm();
            let dj = (zeta(j) * a - b).norm();
            di.partial_cmp(&dj).unwrap()
        })
        .unwrap()
}

/// Relative distance |a−b| / max(|a|,|b|,tiny).
pub fn rel_diff(a: C, b: C) -> f64 {
    let s = a.norm().max(b.norm()).max(1e-300);
    (a - b).norm() / s
}

/// Argument in [0, 2π) used for deterministic sorting.
pub fn arg_0_2pi(z: C) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}
