//! The curve y³ = f(x) = Π(x − bₐ), its sheets, differentials and local charts.

use crate::cx::{arg_0_2pi, principal_cbrt, zeta, C, ONE, ZERO};
use crate::error::{Error, Result};
use crate::quad::track;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub x: C,
    pub y: C,
}

impl SurfacePoint {
    pub fn new(x: C, y: C) -> Self {
        Self { x, y }
    }

    /// The image under (x, y) ↦ (x, ζ₃^k y).
    pub fn rotate(&self, k: i64) -> Self {
        Self::new(self.x, zeta(k) * self.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    pub b: [C; 4],
    /// f = λ₀ + λ₁x + λ₂x² + λ₃x³ + x⁴, ascending.
    pub lambda: [C; 5],
    pub fprime_at_b: [C; 4],
    /// Principal cube roots of f′(bₐ).
    pub c: [C; 4],
}

impl CurveSpec {
    pub fn new(b: [C; 4]) -> Result<Self> {
        let scale = b.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for i in 0..4 {
            if !b[i].is_finite() {
                return Err(Error::InvalidInput("non-finite branch point".into()));
            }
            for j in 0..i {
                if (b[i] - b[j]).norm() <= 1e-8 * scale {
                    return Err(Error::BranchPointsNotDistinct);
                }
            }
        }
        let p = crate::poly::from_roots(&b);
        let lambda = [p[0], p[1], p[2], p[3], p[4]];
        let mut fprime_at_b = [ZERO; 4];
        for a in 0..4 {
            fprime_at_b[a] = (0..4).filter(|&i| i != a).map(|i| b[a] - b[i]).product();
        }
        let c = fprime_at_b.map(principal_cbrt);
        Ok(Self { b, lambda, fprime_at_b, c })
    }

    pub fn f(&self, x: C) -> C {
        self.b.iter().map(|&b| x - b).product()
    }

    pub fn fprime(&self, x: C) -> C {
        crate::poly::eval(&crate::poly::derivative(&self.lambda), x)
    }

    pub fn centroid(&self) -> C {
        self.b.iter().sum::<C>() / 4.0
    }

    /// max |bₐ − b̄|
    pub fn spread(&self) -> f64 {
        let m = self.centroid();
        self.b.iter().map(|b| (b - m).norm()).fold(0.0, f64::max)
    }

    pub fn min_separation(&self) -> f64 {
        let mut d = f64::INFINITY;
        for i in 0..4 {
            for j in 0..i {
                d = d.min((self.b[i] - self.b[j]).norm());
            }
        }
        d
    }

    pub fn branch_point(&self, a: usize) -> SurfacePoint {
        SurfacePoint::new(self.b[a], ZERO)
    }

    /// The point over x on the principal sheet.
    pub fn principal_point(&self, x: C) -> SurfacePoint {
        SurfacePoint::new(x, principal_cbrt(self.f(x)))
    }

    /// The three points over x, sorted by arg y in [0, 2π).
    pub fn sheets_above(&self, x: C) -> Result<[SurfacePoint; 3]> {
        let fx = self.f(x);
        if fx.norm() < 1e-12 * (1.0 + x.norm().powi(4)) {
            return Err(Error::BranchPointInput);
        }
        let y = principal_cbrt(fx);
        let mut pts = [0, 1, 2].map(|k| SurfacePoint::new(x, zeta(k) * y));
        pts.sort_by(|p, q| arg_0_2pi(p.y).partial_cmp(&arg_0_2pi(q.y)).unwrap());
        Ok(pts)
    }

    pub fn residual(&self, p: &SurfacePoint) -> f64 {
        let fx = self.f(p.x);
        (p.y * p.y * p.y - fx).norm() / (1.0 + fx.norm())
    }

    /// Point with x = bₐ + t³ and y = t·h, h³ = Π_{i≠a}(x − bᵢ), h(bₐ) = Cₐ.
    pub fn point_near_branch(&self, a: usize, t: C) -> SurfacePoint {
        let x = self.b[a] + t * t * t;
        let h3: C = (0..4).filter(|&i| i != a).map(|i| x - self.b[i]).product();
        let h = self.c[a] * principal_cbrt(h3 / self.fprime_at_b[a]);
        SurfacePoint::new(x, t * h)
    }

    /// Point in the chart at ∞: x = b̄ + t⁻³, y = t⁻⁴ g(t), g(0) = 1.
    pub fn point_near_infinity(&self, t: C) -> SurfacePoint {
        let t3 = t * t * t;
        let m = self.centroid();
        let g3: C = self.b.iter().map(|&b| ONE - (b - m) * t3).product();
        let g = principal_cbrt(g3);
        SurfacePoint::new(m + t3.inv(), g / (t3 * t))
    }

    /// Densities of (ν₁, ν₂, ν₃) = (dx/3y², x dx/3y², dx/3y) relative to dx.
    pub fn holo_forms(&self, p: &SurfacePoint) -> Result<[C; 3]> {
        if p.y == ZERO {
            return Err(Error::BranchPointInput);
        }
        let w1 = (3.0 * p.y * p.y).inv();
        Ok([w1, p.x * w1, (3.0 * p.y).inv()])
    }

    /// Densities of the second-kind forms x²dx/3y², 2xy dx/3y²,
    /// (5x²+3λ₃x+λ₂)y dx/3y² relative to dx, in that order.
    pub fn second_kind_forms(&self, p: &SurfacePoint) -> Result<[C; 3]> {
        if p.y == ZERO {
            return Err(Error::BranchPointInput);
        }
        let x = p.x;
        let w1 = (3.0 * p.y * p.y).inv();
        let w3 = (3.0 * p.y).inv();
        Ok([x * x * w1, 2.0 * x * w3, self.second_kind_poly(x) * w3])
    }

    /// 5x² + 3λ₃x + λ₂
    pub fn second_kind_poly(&self, x: C) -> C {
        5.0 * x * x + 3.0 * self.lambda[3] * x + self.lambda[2]
    }
}

/// The three curves every sweep runs on: one with real branch points and
/// two genuinely complex configurations.
pub fn default_corpus() -> Vec<CurveSpec> {
    use crate::cx::c;
    [
        [c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)],
        [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(3.0, -1.0)],
        [c(-2.0, 0.0), c(-1.0, 0.5), c(1.0, 0.0), c(2.0, 1.0)],
    ]
    .into_iter()
    .map(|b| CurveSpec::new(b).expect("corpus branch points are distinct"))
    .collect()
}

/// Exponents (k, j) of φᵢ = x^k y^j, ordered by pole order 3k + 4j at ∞.
pub fn phi_exponents(i: usize) -> (u32, u32) {
    // pole orders 3k+4j with j<3 are distinct; enumerate in increasing order
    let mut n = 0usize;
    let mut order = 0u32;
    loop {
        for j in 0..3u32 {
            if 4 * j <= order && (order - 4 * j).is_multiple_of(3) {
                if n == i {
                    return ((order - 4 * j) / 3, j);
                }
                n += 1;
            }
        }
        order += 1;
    }
}

pub fn pole_order(i: usize) -> u32 {
    let (k, j) = phi_exponents(i);
    3 * k + 4 * j
}

pub fn phi_monomial(i: usize, p: &SurfacePoint) -> C {
    let (k, j) = phi_exponents(i);
    p.x.powu(k) * p.y.powu(j)
}

/// A path in the x-plane with y and the local cube roots tₐ = (x − bₐ)^{1/3}
/// continued along it.
#[derive(Debug, Clone, PartialEq)]
pub struct TracedPath {
    pub samples: Vec<C>,
    pub y_values: Vec<C>,
    pub t_phases: Vec<[C; 4]>,
    /// Net turns around b₁..b₄, then the turn count of t_∞ = (x − m)^{−1/3}
    /// with m the centroid, i.e. minus the turns around m.
    pub winding_counters: [i64; 5],
}

impl TracedPath {
    pub fn end(&self) -> SurfacePoint {
        SurfacePoint::new(*self.samples.last().unwrap(), *self.y_values.last().unwrap())
    }

    pub fn t_end(&self) -> [C; 4] {
        *self.t_phases.last().unwrap()
    }
}

/// Continue y (and every tₐ) along the polyline `path` starting at `start`.
pub fn continue_along(curve: &CurveSpec, path: &[C], start: SurfacePoint) -> Result<TracedPath> {
    if path.is_empty() {
        return Err(Error::InvalidInput("empty path".into()));
    }
    if (path[0] - start.x).norm() > 1e-12 * (1.0 + start.x.norm()) {
        return Err(Error::InvalidInput("start point is not over path[0]".into()));
    }
    let mut samples = vec![path[0]];
    let mut y_values = vec![start.y];
    let t0 = curve.b.map(|b| principal_cbrt(path[0] - b));
    let mut t_phases = vec![t0];
    let m = curve.centroid();
    let mut angle = curve.b.map(|b| (path[0] - b).arg());
    let mut angle_m = (path[0] - m).arg();
    for w in path.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let seg = |s: f64| x0 + (x1 - x0) * s;
        // refine into steps small enough for every tracked root
        let mut s = 0.0;
        let mut h = 1.0f64;
        let mut depth = 0;
        while s < 1.0 {
            let s1 = (s + h).min(1.0);
            let xa = seg(s);
            let xb = seg(s1);
            let xm = seg(0.5 * (s + s1));
            let ok = |xx: C| {
                let fy = curve.f(xx) / curve.f(xa);
                (fy - 1.0).norm() <= 0.1 && curve.b.iter().all(|&b| ((xx - b) / (xa - b) - 1.0).norm() <= 0.1)
            };
            if !(ok(xb) && ok(xm)) {
                h *= 0.5;
                depth += 1;
                if depth > 40 {
                    return Err(Error::ContinuationFailure(format!("refinement depth exceeded near x={xa}")));
                }
                continue;
            }
            let y_prev = *y_values.last().unwrap();
            let (y, _) = track(&|u| curve.f(u_x(xa, xb, u)), 3, 0.0, curve.f(xa), y_prev, 1.0)?;
            let t_prev = *t_phases.last().unwrap();
            let mut t_new = t_prev;
            for a in 0..4 {
                let q = (xb - curve.b[a]) / (xa - curve.b[a]);
                t_new[a] = t_prev[a] * principal_cbrt(q);
                angle[a] += q.arg();
            }
            angle_m += ((xb - m) / (xa - m)).arg();
            samples.push(xb);
            y_values.push(y);
            t_phases.push(t_new);
            s = s1;
            depth = 0;
            h = (h * 2.0).min(1.0);
        }
    }
    let xe = *samples.last().unwrap();
    let mut w = [0i64; 5];
    for a in 0..4 {
        let principal = (xe - curve.b[a]).arg();
        w[a] = ((angle[a] - principal) / (2.0 * std::f64::consts::PI)).round() as i64;
    }
    w[4] = -(((angle_m - (xe - m).arg()) / (2.0 * std::f64::consts::PI)).round() as i64);
    Ok(TracedPath { samples, y_values, t_phases, winding_counters: w })
}

fn u_x(xa: C, xb: C, u: f64) -> C {
    xa + (xb - xa) * u
}

/// Polyline approximating a circle of radius r around `center`, starting and
/// ending at center + r·e^{iθ₀}; counter-clockwise when `turns` > 0.
pub fn circle_polyline(center: C, r: f64, theta0: f64, turns: i32, per_turn: usize) -> Vec<C> {
    let n = per_turn * turns.unsigned_abs() as usize;
    let dir = turns.signum() as f64;
    (0..=n)
        .map(|k| center + C::from_polar(r, theta0 + dir * 2.0 * std::f64::consts::PI * k as f64 / per_turn as f64))
        .collect()
}
