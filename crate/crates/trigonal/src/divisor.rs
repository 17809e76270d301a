//! Divisor arithmetic on the curve through determinants of the monomials
//! φ₀ = 1, φ₁ = x, φ₂ = y, φ₃ = x², φ₄ = xy, ...
//!
//! The inverse maps [−1]ₙ intersect the curve with the interpolating
//! function μₙ₊₁ through the given points and deflate the known roots.

use crate::curve::{phi_monomial, CurveSpec, SurfacePoint};
use crate::cx::{zeta, C, ONE, ZERO};
use crate::error::{Error, Result};
use crate::poly;
use nalgebra::DMatrix;

/// Relative size below which a determinant counts as vanishing.
pub const GENERIC_TOL: f64 = 1e-9;
/// Largest accepted deflation remainder, relative to the polynomial scale.
const DEFLATION_TOL: f64 = 1e-6;

/// Points of an effective divisor; order is irrelevant for its meaning.
#[derive(Debug, Clone, PartialEq)]
pub struct DivisorTuple {
    pub points: Vec<SurfacePoint>,
}

fn lex(p: &SurfacePoint) -> [f64; 4] {
    [p.x.re, p.x.im, p.y.re, p.y.im]
}

impl DivisorTuple {
    pub fn new(points: Vec<SurfacePoint>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn canonical(&self) -> Self {
        let mut points = self.points.clone();
        points.sort_by(|a, b| lex(a).partial_cmp(&lex(b)).unwrap_or(std::cmp::Ordering::Equal));
        Self { points }
    }

    /// Largest distance between matched points after canonical ordering.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        // greedy matching is enough for well separated points
        let mut used = vec![false; other.len()];
        let mut worst: f64 = 0.0;
        for p in &self.points {
            let mut best = (f64::INFINITY, 0);
            for (j, q) in other.points.iter().enumerate() {
                if !used[j] {
                    let d = (p.x - q.x).norm().max((p.y - q.y).norm());
                    if d < best.0 {
                        best = (d, j);
                    }
                }
            }
            used[best.1] = true;
            worst = worst.max(best.0);
        }
        worst
    }

    /// (x, ζy) for every point.
    pub fn rotate(&self, k: i64) -> Self {
        Self { points: self.points.iter().map(|p| p.rotate(k)).collect() }
    }
}

pub fn det(m: &DMatrix<C>) -> C {
    if m.nrows() == 0 {
        return ONE;
    }
    m.clone().full_piv_lu().determinant()
}

/// Matrix [φ_{cols[j]}(points[i])].
pub fn phi_matrix(points: &[SurfacePoint], cols: &[usize]) -> DMatrix<C> {
    DMatrix::from_fn(points.len(), cols.len(), |i, j| phi_monomial(cols[j], &points[i]))
}

pub fn phi_det(points: &[SurfacePoint], cols: &[usize]) -> C {
    det(&phi_matrix(points, cols))
}

fn vandermonde(xs: &[C]) -> C {
    let mut v = ONE;
    for j in 0..xs.len() {
        for i in 0..j {
            v *= xs[j] - xs[i];
        }
    }
    v
}

/// Product of row norms: the Hadamard bound used to judge vanishing.
fn row_scale(m: &DMatrix<C>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).product()
}

fn vanishes(m: &DMatrix<C>) -> bool {
    det(m).norm() <= GENERIC_TOL * row_scale(m).max(f64::MIN_POSITIVE)
}

/// Δₙ = det[φ₀..φₙ₋₁] · Vandermonde(x₁..xₙ).
pub fn delta_n(points: &[SurfacePoint]) -> C {
    let n = points.len();
    let cols: Vec<usize> = (0..n).collect();
    let xs: Vec<C> = points.iter().map(|p| p.x).collect();
    phi_det(points, &cols) * vandermonde(&xs)
}

/// μₙ(P; P₁..Pₙ): bordered determinant over the base determinant.
pub fn mu_n(p: &SurfacePoint, base: &[SurfacePoint]) -> Result<C> {
    let n = base.len();
    let den_cols: Vec<usize> = (0..n).collect();
    let den = phi_matrix(base, &den_cols);
    if vanishes(&den) {
        return Err(Error::DegenerateBase);
    }
    let mut rows = base.to_vec();
    rows.push(*p);
    let num_cols: Vec<usize> = (0..=n).collect();
    Ok(phi_det(&rows, &num_cols) / det(&den))
}

/// Coefficients (on φ₀..φₙ) of μₙ(·; base), normalised by the base determinant.
pub fn mu_coefficients(base: &[SurfacePoint]) -> Result<Vec<C>> {
    let n = base.len();
    let den_cols: Vec<usize> = (0..n).collect();
    let den = phi_matrix(base, &den_cols);
    if vanishes(&den) {
        return Err(Error::DegenerateBase);
    }
    let d = det(&den);
    let all: Vec<usize> = (0..=n).collect();
    // cofactor expansion along the bordered last row
    Ok((0..=n)
        .map(|j| {
            let cols: Vec<usize> = all.iter().copied().filter(|&k| k != j).collect();
            let sign = if (n + j).is_multiple_of(2) { 1.0 } else { -1.0 };
            phi_det(base, &cols) * sign / d
        })
        .collect())
}

/// The two other sheets over x₁.
pub fn minus_one_1(curve: &CurveSpec, p: &SurfacePoint) -> Result<DivisorTuple> {
    if curve.f(p.x).norm() < 1e-12 * (1.0 + p.x.norm().powi(4)) {
        return Err(Error::BranchPointInput);
    }
    Ok(DivisorTuple::new(vec![p.rotate(1), p.rotate(2)]))
}

fn deflate_known(full: &[C], known: &[C]) -> Result<Vec<C>> {
    let mut q = full.to_vec();
    for &r in known {
        let scale = poly::eval_scale(&q, r).max(f64::MIN_POSITIVE);
        let (next, rem) = poly::deflate(&q, r);
        if rem.norm() > DEFLATION_TOL * scale {
            return Err(Error::RootDeflationFailure(rem.norm() / scale));
        }
        q = next;
    }
    Ok(q)
}

/// Roots of `full` other than `known`, polished on `full`.
fn remaining_roots(full: &[C], known: &[C]) -> Result<Vec<C>> {
    let q = deflate_known(full, known)?;
    poly::roots(&q, Some(full))
}

/// [−1]₂: the residual intersection of the line through P₁, P₂ with the curve.
pub fn minus_one_2(curve: &CurveSpec, p1: &SurfacePoint, p2: &SurfacePoint) -> Result<DivisorTuple> {
    let d1x = p2.x - p1.x;
    if d1x.norm() <= GENERIC_TOL * (p1.x.norm() + p2.x.norm()).max(1.0) {
        return Err(Error::VerticalLine);
    }
    // y = α + βx
    let beta = (p2.y - p1.y) / d1x;
    let alpha = p1.y - beta * p1.x;
    let line = [alpha, beta];
    let cube = poly::mul(&poly::mul(&line, &line), &line);
    let full = poly::sub(&cube, &curve.lambda);
    let xs = remaining_roots(&full, &[p1.x, p2.x])?;
    Ok(DivisorTuple::new(xs.into_iter().map(|x| SurfacePoint::new(x, alpha + beta * x)).collect()))
}

/// [−1]₃: the residual intersection of y = q(x) (q quadratic through P₁..P₃).
pub fn minus_one_3(curve: &CurveSpec, p1: &SurfacePoint, p2: &SurfacePoint, p3: &SurfacePoint) -> Result<DivisorTuple> {
    let base = [*p1, *p2, *p3];
    let minor = phi_matrix(&base, &[0, 1, 3]);
    if vanishes(&minor) {
        return Err(Error::DegenerateConfiguration("x-Vandermonde minor vanishes".into()));
    }
    // solve q(xᵢ) = yᵢ
    let rhs = nalgebra::DVector::from_iterator(3, base.iter().map(|p| p.y));
    let coef =
        minor.full_piv_lu().solve(&rhs).ok_or_else(|| Error::DegenerateConfiguration("interpolation failed".into()))?;
    let q = [coef[0], coef[1], coef[2]];
    let cube = poly::mul(&poly::mul(&q, &q), &q);
    let full = poly::sub(&cube, &curve.lambda);
    let xs = remaining_roots(&full, &[p1.x, p2.x, p3.x])?;
    Ok(DivisorTuple::new(xs.into_iter().map(|x| SurfacePoint::new(x, poly::eval(&q, x))).collect()))
}

/// Aₐ = μ₃(Bₐ; P₁, P₂, P₃).
pub fn a_func(curve: &CurveSpec, a: usize, d: &[SurfacePoint]) -> Result<C> {
    mu_n(&curve.branch_point(a), d).map_err(|e| match e {
        Error::DegenerateBase => Error::DegenerateConfiguration("base determinant of A vanishes".into()),
        e => e,
    })
}

/// Fₐ = Π(bₐ − xᵢ).
pub fn f_func(curve: &CurveSpec, a: usize, d: &[SurfacePoint]) -> C {
    d.iter().map(|p| curve.b[a] - p.x).product()
}

/// Which of the six 2×2 determinants of the [−1]₂ relations vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct GenericityReport {
    pub flags: Vec<(&'static str, bool)>,
}

impl GenericityReport {
    pub fn generic(&self) -> bool {
        self.flags.iter().all(|(_, v)| !v)
    }
}

fn pair_dets(p1: &SurfacePoint, p2: &SurfacePoint) -> [DMatrix<C>; 3] {
    [
        DMatrix::from_row_slice(2, 2, &[p1.x, p1.y, p2.x, p2.y]),
        DMatrix::from_row_slice(2, 2, &[ONE, p1.y, ONE, p2.y]),
        DMatrix::from_row_slice(2, 2, &[ONE, p1.x, ONE, p2.x]),
    ]
}

pub fn genericity_two(p: &DivisorTuple, q: &DivisorTuple) -> GenericityReport {
    let names = [["|x y|(P)", "|1 y|(P)", "|1 x|(P)"], ["|x y|(Q)", "|1 y|(Q)", "|1 x|(Q)"]];
    let mut flags = Vec::new();
    for (k, d) in [p, q].into_iter().enumerate() {
        for (m, name) in pair_dets(&d.points[0], &d.points[1]).iter().zip(names[k]) {
            flags.push((name, vanishes(m)));
        }
    }
    GenericityReport { flags }
}

/// Relative residuals of the three 2×2 determinant identities between
/// (P₁, P₂) and (Q₁, Q₂) = [−1]₂(P₁, P₂).
pub fn lemma_two_residuals(p: &DivisorTuple, q: &DivisorTuple) -> [f64; 3] {
    let [pxy, p1y, p1x] = pair_dets(&p.points[0], &p.points[1]).map(|m| det(&m));
    let [qxy, q1y, q1x] = pair_dets(&q.points[0], &q.points[1]).map(|m| det(&m));
    let rel = |l: C, r: C| (l - r).norm() / l.norm().max(r.norm()).max(f64::MIN_POSITIVE);
    [rel(pxy * q1y, qxy * p1y), rel(pxy * q1x, qxy * p1x), rel(p1y * q1x, q1y * p1x)]
}

/// Ratio det_i(P)·det_j(Q) / (det_j(P)·det_i(Q)) for column sets i, j ⊂ {0,1,2,3};
/// a sign ±1 when Q = [−1]₃P.
pub fn lemma_three_ratio(p: &DivisorTuple, q: &DivisorTuple, i: &[usize; 3], j: &[usize; 3]) -> C {
    let lhs = phi_det(&p.points, i) * phi_det(&q.points, j);
    let rhs = phi_det(&p.points, j) * phi_det(&q.points, i);
    lhs / rhs
}

/// Right-hand side of the (3,1) addition formula with v = ωₐ:
/// Π_k Δ₄(P₁,P₂,P₃,(bₐ,ζᵏ·0)) / (Δ₁Δ₃)³ · Π 1/Δ₂(Pᵢ,Bₐ)².
pub fn addition_rhs(curve: &CurveSpec, a: usize, d: &[SurfacePoint]) -> C {
    let b = curve.branch_point(a);
    let mut rows = d.to_vec();
    rows.push(b);
    let d4 = delta_n(&rows);
    let d3 = delta_n(d);
    let mut out = (d4 / d3).powi(3);
    for p in d {
        out /= delta_n(&[*p, b]).powi(2);
    }
    out
}

/// Π_c μ₃((x, ζᶜy); D) as a polynomial in x: L(x)³ + c_y³ f(x) with μ₃ = L(x) + c_y·y.
pub fn mu3_norm_poly(curve: &CurveSpec, d: &[SurfacePoint]) -> Result<Vec<C>> {
    let c = mu_coefficients(d)?;
    // φ₀ = 1, φ₁ = x, φ₂ = y, φ₃ = x²
    let l = [c[0], c[1], c[3]];
    let l3 = poly::mul(&poly::mul(&l, &l), &l);
    let cy3 = c[2] * c[2] * c[2];
    let f: Vec<C> = curve.lambda.iter().map(|&v| v * cy3).collect();
    let mut out = l3;
    out.resize(out.len().max(f.len()), ZERO);
    for (k, v) in f.into_iter().enumerate() {
        out[k] += v;
    }
    Ok(out)
}

/// μ₃ at (x, ζᵏy) for all k: used by the K differential.
pub fn mu3_sheets(d: &[SurfacePoint], p: &SurfacePoint) -> Result<[C; 3]> {
    let c = mu_coefficients(d)?;
    let l = c[0] + c[1] * p.x + c[3] * p.x * p.x;
    Ok([0, 1, 2].map(|k| l + c[2] * zeta(k) * p.y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx::c;
    use crate::sample;

    fn curve() -> CurveSpec {
        CurveSpec::new([c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap()
    }

    #[test]
    fn small_deltas() {
        let cu = curve();
        let p = cu.principal_point(c(-1.0, 0.0));
        assert_eq!(delta_n(&[p]), ONE);
        let q = cu.principal_point(c(0.0, 0.5));
        let a = SurfacePoint::new(c(0.0, 0.0), c(0.3, 0.1));
        let b = SurfacePoint::new(c(1.0, 0.0), c(0.7, 0.0));
        assert!((delta_n(&[a, b]) - ONE).norm() < 1e-15);
        let same = [p, p.rotate(1), p.rotate(2)];
        assert!(delta_n(&same).norm() < 1e-12);
        let _ = q;
    }

    #[test]
    fn mu_one_is_x_difference() {
        let cu = curve();
        let p1 = cu.principal_point(c(-1.0, 0.3));
        let p = cu.principal_point(c(0.4, -0.8));
        assert!((mu_n(&p, &[p1]).unwrap() - (p.x - p1.x)).norm() < 1e-14);
    }

    #[test]
    fn mu_three_vanishes_on_base() {
        let cu = curve();
        let mut rng = sample::rng(3);
        let d = sample::random_points(&cu, &mut rng, 3);
        for p in &d {
            assert!(mu_n(p, &d).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn mu_two_matches_explicit_determinant() {
        let cu = curve();
        let mut rng = sample::rng(4);
        for _ in 0..5 {
            let d = sample::random_points(&cu, &mut rng, 3);
            let (p1, p2, p) = (d[0], d[1], d[2]);
            let num = (p1.x * p2.y - p2.x * p1.y) - (p2.y - p1.y) * p.x + (p2.x - p1.x) * p.y;
            let want = num / (p2.x - p1.x);
            let got = mu_n(&p, &[p1, p2]).unwrap();
            assert!((got - want).norm() < 1e-12 * want.norm().max(1.0));
        }
    }

    #[test]
    fn coincident_base_rejected() {
        let cu = curve();
        let p = cu.principal_point(c(-1.0, 0.0));
        assert_eq!(mu_n(&p, &[p, p]), Err(Error::DegenerateBase));
    }

    #[test]
    fn minus_one_1_sheets() {
        let cu = curve();
        let p = cu.principal_point(c(-1.0, 0.0));
        let q = minus_one_1(&cu, &p).unwrap();
        let y = 24f64.cbrt();
        assert!((q.points[0].y - zeta(1) * y).norm() < 1e-12);
        assert!((q.points[1].y - zeta(2) * y).norm() < 1e-12);
        assert_eq!(minus_one_1(&cu, &cu.branch_point(1)), Err(Error::BranchPointInput));
    }

    #[test]
    fn minus_one_2_against_full_quartic() {
        let cu = curve();
        let p1 = cu.principal_point(c(-1.0, 0.0));
        let p2 = cu.principal_point(c(-2.0, 0.0));
        let q = minus_one_2(&cu, &p1, &p2).unwrap();
        // independent route: all four roots of (α+βx)³ − f, drop the two nearest −1, −2
        let beta = (p2.y - p1.y) / (p2.x - p1.x);
        let alpha = p1.y - beta * p1.x;
        let mut full = vec![alpha.powi(3), 3.0 * alpha * alpha * beta, 3.0 * alpha * beta * beta, beta.powi(3)];
        full.push(ZERO);
        let full = poly::sub(&full, &cu.lambda);
        let mut all = poly::roots(&full, None).unwrap();
        for x0 in [p1.x, p2.x] {
            let k = (0..all.len())
                .min_by(|&i, &j| (all[i] - x0).norm().partial_cmp(&(all[j] - x0).norm()).unwrap())
                .unwrap();
            all.remove(k);
        }
        let got = DivisorTuple::new(q.points.clone());
        let want = DivisorTuple::new(all.iter().map(|&x| SurfacePoint::new(x, alpha + beta * x)).collect());
        assert!(got.distance(&want) < 1e-9);
        for p in &q.points {
            assert!(cu.residual(p) < 1e-10);
            assert!(mu_n(p, &[p1, p2]).unwrap().norm() < 1e-10);
        }
        let d = DivisorTuple::new(vec![p1, p2]);
        assert!(lemma_two_residuals(&d, &q).iter().all(|&r| r < 1e-9));
        assert!(genericity_two(&d, &q).generic());
    }

    #[test]
    fn minus_one_2_vertical() {
        let cu = curve();
        let p = cu.principal_point(c(-1.0, 0.0));
        assert_eq!(minus_one_2(&cu, &p, &p.rotate(1)), Err(Error::VerticalLine));
    }

    #[test]
    fn minus_one_3_involution() {
        let cu = curve();
        let mut rng = sample::rng(9);
        for _ in 0..5 {
            let d = DivisorTuple::new(sample::random_points(&cu, &mut rng, 3));
            let q = minus_one_3(&cu, &d.points[0], &d.points[1], &d.points[2]).unwrap();
            for p in &q.points {
                assert!(cu.residual(p) < 1e-9);
            }
            let back = minus_one_3(&cu, &q.points[0], &q.points[1], &q.points[2]).unwrap();
            assert!(back.distance(&d) < 1e-8);
        }
    }

    #[test]
    fn lemma_three_signs() {
        let cu = curve();
        let mut rng = sample::rng(10);
        let sets = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
        let d = DivisorTuple::new(sample::random_points(&cu, &mut rng, 3));
        let q = minus_one_3(&cu, &d.points[0], &d.points[1], &d.points[2]).unwrap();
        for i in &sets {
            for j in &sets {
                let r = lemma_three_ratio(&d, &q, i, j);
                assert!((r.norm() - 1.0).abs() < 1e-9 && r.im.abs() < 1e-9, "{r}");
            }
        }
    }

    #[test]
    fn f_func_example() {
        let cu = curve();
        let d: Vec<SurfacePoint> = [-1.0, -2.0, -3.0].iter().map(|&x| cu.principal_point(c(x, 0.0))).collect();
        assert!((f_func(&cu, 0, &d) - c(6.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn a_and_f_zeta_invariant() {
        let cu = curve();
        let mut rng = sample::rng(11);
        let d = DivisorTuple::new(sample::random_points(&cu, &mut rng, 3));
        let r = d.rotate(1);
        for a in 0..4 {
            let (x, y) = (a_func(&cu, a, &d.points).unwrap(), a_func(&cu, a, &r.points).unwrap());
            assert!((x - y).norm() < 1e-10 * x.norm());
            assert!((f_func(&cu, a, &d.points) - f_func(&cu, a, &r.points)).norm() < 1e-12);
        }
    }

    #[test]
    fn a_vanishes_at_branch_point() {
        let cu = curve();
        let mut rng = sample::rng(12);
        let mut d = sample::random_points(&cu, &mut rng, 3);
        d[0] = cu.branch_point(2);
        assert!(a_func(&cu, 2, &d).unwrap().norm() < 1e-12);
        assert!(f_func(&cu, 2, &d).norm() < 1e-15);
    }

    #[test]
    fn frobenius_algebraic_sum() {
        // Σₐ Aₐ³/(Fₐ f′(bₐ)) = 1
        let cu = curve();
        let mut rng = sample::rng(13);
        for _ in 0..5 {
            let d = sample::random_points(&cu, &mut rng, 3);
            let s: C =
                (0..4).map(|a| a_func(&cu, a, &d).unwrap().powi(3) / (f_func(&cu, a, &d) * cu.fprime_at_b[a])).sum();
            assert!((s - ONE).norm() < 1e-10, "{s}");
        }
    }
}
