//! Root tracking along a parametrised path and adaptive Gauss–Legendre
//! integration of densities that depend on the tracked root.

use crate::cx::{principal_root, C, ZERO};
use crate::error::{Error, Result};
use std::sync::OnceLock;

const GL_ORDER: usize = 16;
const MAX_TRACK_DEPTH: u32 = 40;
const MAX_QUAD_DEPTH: u32 = 40;
/// Largest relative change of g accepted in a single tracking step.
const STEP_RATIO: f64 = 0.1;

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn gl() -> &'static (Vec<f64>, Vec<f64>) {
    static CELL: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    CELL.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// Continue the k-th root `r0` of g(s0) = `g0` to s1. Returns (r(s1), g(s1)).
pub fn track(g: &dyn Fn(f64) -> C, k: u32, s0: f64, g0: C, r0: C, s1: f64) -> Result<(C, C)> {
    track_rec(g, k, s0, g0, r0, s1, 0)
}

fn track_rec(g: &dyn Fn(f64) -> C, k: u32, s0: f64, g0: C, r0: C, s1: f64, depth: u32) -> Result<(C, C)> {
    let g1 = g(s1);
    let sm = 0.5 * (s0 + s1);
    let q = g1 / g0;
    let qm = g(sm) / g0;
    if (q - 1.0).norm() <= STEP_RATIO && (qm - 1.0).norm() <= STEP_RATIO {
        return Ok((r0 * principal_root(q, k), g1));
    }
    if depth >= MAX_TRACK_DEPTH || !q.is_finite() {
        return Err(Error::ContinuationFailure(format!(
            "step refinement exceeded depth {MAX_TRACK_DEPTH} near s={s0:.6}"
        )));
    }
    let (rm, gm) = track_rec(g, k, s0, g0, r0, sm, depth + 1)?;
    track_rec(g, k, sm, gm, rm, s1, depth + 1)
}

/// Result of integrating along s ∈ [0,1].
#[derive(Debug, Clone, Copy)]
pub struct Tracked<const N: usize> {
    pub integral: [C; N],
    /// Tracked root at s = 1.
    pub root_end: C,
}

/// Integrate `dens(s, r)` over s ∈ [0,1], where r is the continuously tracked
/// k-th root of g(s) starting from `r0`. `tol` is relative to the size of
/// each panel's contribution (absolute floor `tol` per unit parameter).
pub fn integrate<const N: usize>(
    g: &dyn Fn(f64) -> C,
    k: u32,
    r0: C,
    dens: &dyn Fn(f64, C) -> [C; N],
    tol: f64,
) -> Result<Tracked<N>> {
    let g0 = g(0.0);
    let (sum, _, r1) = panel(g, k, 0.0, 1.0, g0, r0, dens, tol, 0)?;
    Ok(Tracked { integral: sum, root_end: r1 })
}

#[allow(clippy::too_many_arguments)]
fn panel<const N: usize>(
    g: &dyn Fn(f64) -> C,
    k: u32,
    a: f64,
    b: f64,
    ga: C,
    ra: C,
    dens: &dyn Fn(f64, C) -> [C; N],
    tol: f64,
    depth: u32,
) -> Result<([C; N], C, C)> {
    let (xs, ws) = gl();
    let m = 0.5 * (a + b);
    // tag 0: whole panel, 1: left half, 2: right half
    let mut pts: Vec<(f64, usize, f64)> = Vec::with_capacity(3 * GL_ORDER + 2);
    for (x, w) in xs.iter().zip(ws) {
        pts.push((m + 0.5 * (b - a) * x, 0, 0.5 * (b - a) * w));
        pts.push((0.5 * (a + m) + 0.25 * (b - a) * x, 1, 0.25 * (b - a) * w));
        pts.push((0.5 * (m + b) + 0.25 * (b - a) * x, 2, 0.25 * (b - a) * w));
    }
    pts.push((m, 3, 0.0));
    pts.push((b, 4, 0.0));
    pts.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());

    let mut sums = [[ZERO; N]; 3];
    let (mut s, mut gs, mut rs) = (a, ga, ra);
    let (mut gm, mut rm) = (ga, ra);
    for &(t, tag, w) in &pts {
        let (r, gt) = track(g, k, s, gs, rs, t)?;
        s = t;
        gs = gt;
        rs = r;
        match tag {
            3 => {
                gm = gt;
                rm = r;
            }
            4 => {}
            _ => {
                let d = dens(t, r);
                for i in 0..N {
                    sums[tag][i] += d[i] * w;
                }
            }
        }
    }
    let mut err: f64 = 0.0;
    let mut mag: f64 = 0.0;
    let mut fine = [ZERO; N];
    for i in 0..N {
        fine[i] = sums[1][i] + sums[2][i];
        err = err.max((fine[i] - sums[0][i]).norm());
        mag = mag.max(fine[i].norm());
    }
    if !err.is_finite() {
        return Err(Error::QuadratureStall);
    }
    if err <= tol * mag.max(b - a) {
        return Ok((fine, gs, rs));
    }
    if depth >= MAX_QUAD_DEPTH {
        return Err(Error::QuadratureStall);
    }
    let (left, _, _) = panel(g, k, a, m, ga, ra, dens, tol, depth + 1)?;
    let (right, gb, rb) = panel(g, k, m, b, gm, rm, dens, tol, depth + 1)?;
    let mut out = [ZERO; N];
    for i in 0..N {
        out[i] = left[i] + right[i];
    }
    Ok((out, gb, rb))
}
