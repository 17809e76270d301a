//! Integration paths on the curve: straight segments, circular arcs, segments
//! ending at a branch point and the tail at ∞.

use crate::curve::CurveSpec;
use crate::cx::{C, I, ONE, ZERO};
use crate::error::{Error, Result};
use crate::quad::{integrate, track};

/// Default relative tolerance for path integrals.
pub const QUAD_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Line {
        from: C,
        to: C,
    },
    Arc {
        center: C,
        radius: f64,
        theta0: f64,
        sweep: f64,
    },
    /// Straight segment from `from` into the branch point b_a.
    BranchEnd {
        from: C,
        a: usize,
    },
}

impl Piece {
    pub fn start(&self) -> C {
        match *self {
            Piece::Line { from, .. } | Piece::BranchEnd { from, .. } => from,
            Piece::Arc { center, radius, theta0, .. } => center + C::from_polar(radius, theta0),
        }
    }

    pub fn end(&self, curve: &CurveSpec) -> C {
        match *self {
            Piece::Line { to, .. } => to,
            Piece::BranchEnd { a, .. } => curve.b[a],
            Piece::Arc { center, radius, theta0, sweep } => center + C::from_polar(radius, theta0 + sweep),
        }
    }

    /// Polyline vertices (including both ends) used for crossing tests.
    pub fn polyline(&self, curve: &CurveSpec, per_turn: usize) -> Vec<C> {
        match *self {
            Piece::Line { from, to } => vec![from, to],
            Piece::BranchEnd { from, a } => vec![from, curve.b[a]],
            Piece::Arc { center, radius, theta0, sweep } => {
                let n = ((sweep.abs() / (2.0 * std::f64::consts::PI)) * per_turn as f64).ceil() as usize;
                let n = n.max(1);
                (0..=n).map(|k| center + C::from_polar(radius, theta0 + sweep * k as f64 / n as f64)).collect()
            }
        }
    }

    pub fn reversed(&self) -> Option<Piece> {
        match *self {
            Piece::Line { from, to } => Some(Piece::Line { from: to, to: from }),
            Piece::Arc { center, radius, theta0, sweep } => {
                Some(Piece::Arc { center, radius, theta0: theta0 + sweep, sweep: -sweep })
            }
            Piece::BranchEnd { .. } => None,
        }
    }
}

/// Integrals of (ν₁, ν₂, ν₃, x²dx/3y², 2x dx/3y, (5x²+3λ₃x+λ₂)dx/3y).
pub type Forms6 = [C; 6];

fn forms_from_base(curve: &CurveSpec, x: C, w1: C, w3: C) -> Forms6 {
    [w1, x * w1, w3, x * x * w1, 2.0 * x * w3, curve.second_kind_poly(x) * w3]
}

/// Integrate all six forms along one piece starting with y = `y0` over its
/// start. Returns the integrals and y at the end (0 for a branch end).
pub fn integrate_piece(curve: &CurveSpec, piece: &Piece, y0: C, tol: f64) -> Result<(Forms6, C)> {
    match *piece {
        Piece::Line { from, to } => {
            let d = to - from;
            let x = |s: f64| from + d * s;
            let out = integrate::<6>(
                &|s| curve.f(x(s)),
                3,
                y0,
                &|s, y| forms_from_base(curve, x(s), d / (3.0 * y * y), d / (3.0 * y)),
                tol,
            )?;
            Ok((out.integral, out.root_end))
        }
        Piece::Arc { center, radius, theta0, sweep } => {
            let x = |s: f64| center + C::from_polar(radius, theta0 + sweep * s);
            let dx = |s: f64| I * sweep * C::from_polar(radius, theta0 + sweep * s);
            let out = integrate::<6>(
                &|s| curve.f(x(s)),
                3,
                y0,
                &|s, y| {
                    let d = dx(s);
                    forms_from_base(curve, x(s), d / (3.0 * y * y), d / (3.0 * y))
                },
                tol,
            )?;
            Ok((out.integral, out.root_end))
        }
        Piece::BranchEnd { from, a } => {
            // x = b + dσ³ with σ = 1 − s, y = σ q, q³ = d·Π_{i≠a}(x − bᵢ)
            let b = curve.b[a];
            let d = from - b;
            let x = |s: f64| {
                let sg = 1.0 - s;
                b + d * (sg * sg * sg)
            };
            let h = |xx: C| -> C { (0..4).filter(|&i| i != a).map(|i| xx - curve.b[i]).product() };
            let out = integrate::<6>(
                &|s| d * h(x(s)),
                3,
                y0,
                &|s, q| {
                    let sg = 1.0 - s;
                    forms_from_base(curve, x(s), -d / (q * q), -d * sg / q)
                },
                tol,
            )?;
            Ok((out.integral, ZERO))
        }
    }
}

pub fn integrate_pieces(curve: &CurveSpec, pieces: &[Piece], y0: C, tol: f64) -> Result<(Forms6, C)> {
    let mut acc = [ZERO; 6];
    let mut y = y0;
    for p in pieces {
        let (v, y1) = integrate_piece(curve, p, y, tol)?;
        for i in 0..6 {
            acc[i] += v[i];
        }
        y = y1;
    }
    Ok((acc, y))
}

/// Continue y along the pieces without integrating.
pub fn continue_pieces(curve: &CurveSpec, pieces: &[Piece], y0: C) -> Result<C> {
    let mut y = y0;
    for p in pieces {
        if let Piece::BranchEnd { .. } = p {
            return Ok(ZERO);
        }
        for w in p.polyline(curve, 256).windows(2) {
            let (xa, xb) = (w[0], w[1]);
            let g = |s: f64| curve.f(xa + (xb - xa) * s);
            y = track(&g, 3, 0.0, g(0.0), y, 1.0)?.0;
        }
    }
    Ok(y)
}

/// Integral of ν₁, ν₂, ν₃ from ∞ to the point of the ∞-chart with parameter
/// `t_end` (x = b̄ + t⁻³). Returns the integrals and y at the end point.
pub fn integrate_tail(curve: &CurveSpec, t_end: C, tol: f64) -> Result<([C; 3], C)> {
    let m = curve.centroid();
    let shifted: Vec<C> = curve.b.iter().map(|b| b - m).collect();
    let g = |s: f64| {
        let t = t_end * s;
        let t3 = t * t * t;
        shifted.iter().map(|&bb| ONE - bb * t3).product::<C>()
    };
    let out = integrate::<3>(
        &g,
        3,
        ONE,
        &|s, r| {
            let t = t_end * s;
            let t4 = t * t * t * t;
            let r2 = r * r;
            [-t4 / r2 * t_end, -(m * t4 + t) / r2 * t_end, -t_end / r]
        },
        tol,
    )?;
    let y_end = out.root_end / t_end.powu(4);
    Ok((out.integral, y_end))
}

/// Distance from z to the segment [p, q] and the segment parameter of the
/// closest point.
pub fn segment_distance(z: C, p: C, q: C) -> (f64, f64) {
    let d = q - p;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return ((z - p).norm(), 0.0);
    }
    let s = (((z - p) * d.conj()).re / l2).clamp(0.0, 1.0);
    ((z - (p + d * s)).norm(), s)
}

/// Polyline from `from` to `to` keeping a margin from every branch point
/// except `target` (which may be the end point). Obstacles are passed on the
/// left of the direction of travel.
pub fn route(curve: &CurveSpec, from: C, to: C, target: Option<usize>) -> Result<Vec<C>> {
    let margin = 0.2 * curve.min_separation();
    let mut out = vec![from];
    route_rec(curve, from, to, target, margin, 0, &mut out)?;
    Ok(out)
}

fn route_rec(
    curve: &CurveSpec,
    from: C,
    to: C,
    target: Option<usize>,
    margin: f64,
    depth: usize,
    out: &mut Vec<C>,
) -> Result<()> {
    let mut hit: Option<(usize, f64, f64)> = None;
    for i in 0..4 {
        if Some(i) == target {
            continue;
        }
        // endpoints close to an obstacle shrink its margin
        let b = curve.b[i];
        let m = margin.min(0.7 * (from - b).norm()).min(0.7 * (to - b).norm());
        let (dist, s) = segment_distance(b, from, to);
        if dist < m && hit.is_none_or(|(_, s0, _)| s < s0) {
            hit = Some((i, s, m));
        }
    }
    let Some((i, _, m)) = hit else {
        out.push(to);
        return Ok(());
    };
    if depth > 12 {
        return Err(Error::ContinuationFailure("route detours do not terminate".into()));
    }
    let dir = (to - from) / (to - from).norm();
    let off = 1.5 * m;
    let w1 = curve.b[i] + (I - 1.0) * dir * off;
    let w2 = curve.b[i] + (I + 1.0) * dir * off;
    route_rec(curve, from, w1, target, margin, depth + 1, out)?;
    route_rec(curve, w1, w2, target, margin, depth + 1, out)?;
    route_rec(curve, w2, to, target, margin, depth + 1, out)
}

/// Pieces along a routed polyline; the last one ends at b_a when `target` is set.
pub fn pieces_along(poly: &[C], target: Option<usize>) -> Vec<Piece> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n);
    for (k, w) in poly.windows(2).enumerate() {
        if k + 2 == n {
            if let Some(a) = target {
                out.push(Piece::BranchEnd { from: w[0], a });
                continue;
            }
        }
        out.push(Piece::Line { from: w[0], to: w[1] });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx::{c, ZETA};

    fn curve() -> CurveSpec {
        CurveSpec::new([c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap()
    }

    #[test]
    fn exact_form_over_closed_loop() {
        // ∫ dx over a closed loop vanishes; check with a loop around b₂
        let cu = curve();
        let arc = Piece::Arc { center: cu.b[1], radius: 0.3, theta0: 0.4, sweep: 6.0 * std::f64::consts::PI };
        let y0 = cu.principal_point(arc.start()).y;
        let (v, y1) = integrate_piece(&cu, &arc, y0, QUAD_TOL).unwrap();
        assert!((y1 - y0).norm() < 1e-10 * y0.norm());
        // three turns give the sum over all sheets, which vanishes for every form
        for z in v {
            assert!(z.norm() < 1e-10);
        }
    }

    #[test]
    fn reversal_negates() {
        let cu = curve();
        let p = Piece::Arc { center: cu.b[1], radius: 0.3, theta0: 0.4, sweep: 2.0 };
        let y0 = cu.principal_point(p.start()).y;
        let (v, y1) = integrate_piece(&cu, &p, y0, QUAD_TOL).unwrap();
        let (w, y2) = integrate_piece(&cu, &p.reversed().unwrap(), y1, QUAD_TOL).unwrap();
        assert!((y2 - y0).norm() < 1e-12);
        for i in 0..6 {
            assert!((v[i] + w[i]).norm() < 1e-12 * (1.0 + v[i].norm()));
        }
    }

    #[test]
    fn branch_end_is_path_independent() {
        // reach b₁ directly, or via a detour point, on the same sheet
        let cu = curve();
        let from = c(-1.0, 0.0);
        let via = c(-0.3, -0.4);
        let y0 = cu.principal_point(from).y;
        let (v, _) = integrate_piece(&cu, &Piece::BranchEnd { from, a: 0 }, y0, QUAD_TOL).unwrap();
        let pieces = [Piece::Line { from, to: via }, Piece::BranchEnd { from: via, a: 0 }];
        let (w, _) = integrate_pieces(&cu, &pieces, y0, QUAD_TOL).unwrap();
        for i in 0..6 {
            assert!((v[i] - w[i]).norm() < 1e-12, "{i}: {} vs {}", v[i], w[i]);
        }
    }

    #[test]
    fn tail_matches_line_difference() {
        let cu = curve();
        let t1 = c(0.3, 0.0);
        let t2 = c(0.25, 0.0);
        let (a, y1) = integrate_tail(&cu, t1, QUAD_TOL).unwrap();
        let (b, y2) = integrate_tail(&cu, t2, QUAD_TOL).unwrap();
        let p1 = cu.point_near_infinity(t1);
        let p2 = cu.point_near_infinity(t2);
        assert!((y1 - p1.y).norm() < 1e-12 * p1.y.norm());
        let (l, yl) = integrate_piece(&cu, &Piece::Line { from: p1.x, to: p2.x }, y1, QUAD_TOL).unwrap();
        assert!((yl - y2).norm() < 1e-10 * y2.norm());
        for i in 0..3 {
            assert!((a[i] + l[i] - b[i]).norm() < 1e-11);
        }
        // rotating t by ζ moves to another sheet and rotates the integrals
        let (r, _) = integrate_tail(&cu, t1 * ZETA, QUAD_TOL).unwrap();
        assert!((r[0] - ZETA * ZETA * a[0]).norm() < 1e-13);
        assert!((r[2] - ZETA * a[2]).norm() < 1e-13);
    }

    #[test]
    fn routes_keep_margin() {
        let cu = curve();
        let poly = route(&cu, c(16.5, 0.0), cu.b[0], Some(0)).unwrap();
        assert!(poly.len() > 2);
        let margin = 0.2 * cu.min_separation();
        for w in poly.windows(2) {
            for i in 1..4 {
                assert!(segment_distance(cu.b[i], w[0], w[1]).0 >= margin * 0.999);
            }
        }
        assert_eq!(*poly.last().unwrap(), cu.b[0]);
    }
}
