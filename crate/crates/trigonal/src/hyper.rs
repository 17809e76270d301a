//! Hyperelliptic reference curves y² = (x−b₀)(x−b₁)⋯(x−b_{2g}) of genus 1
//! and 2, used to calibrate the trigonal machinery against classical facts.
//!
//! Periods are taken over the chain of loops around consecutive branch
//! points, whose intersection signs are read off from the bilinear
//! relations. Abel images are integrals along straight rays to ∞.

use crate::cx::{principal_root, C, I, ONE, ZERO};
use crate::error::{Error, Result};
use crate::homology::symplectic_reduce;
use crate::poly;
use crate::quad::gauss_legendre;
use crate::sample::Rand;
use crate::sigma::{Characteristic, SigmaCore};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use std::f64::consts::PI;

/// Relative agreement required between successive quadrature refinements.
const QUAD_TOL: f64 = 1e-14;
const MIN_NODES: usize = 32;
const MAX_NODES: usize = 4096;
/// Lattice coordinates this close to integers are accepted as integers.
const INTEGRAL_TOL: f64 = 1e-6;
const VANISH: f64 = 1e-6;
const SCAN_SAMPLES: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct HyperCurveSpec {
    pub g: usize,
    pub b: Vec<C>,
    /// Coefficients of Π(x − bⱼ), ascending.
    pub lambda: Vec<C>,
    /// P = (x−b₁)(x−b₃)⋯(x−b_{2g−1})
    pub p_poly: Vec<C>,
    pub q_poly: Vec<C>,
}

impl HyperCurveSpec {
    pub fn new(b: Vec<C>) -> Result<Self> {
        if b.len() != 3 && b.len() != 5 {
            return Err(Error::InvalidInput(format!("need 3 or 5 branch points, got {}", b.len())));
        }
        let scale = b.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for i in 0..b.len() {
            if !b[i].is_finite() {
                return Err(Error::InvalidInput("non-finite branch point".into()));
            }
            for j in 0..i {
                if (b[i] - b[j]).norm() <= 1e-8 * scale {
                    return Err(Error::BranchPointsNotDistinct);
                }
            }
        }
        let g = (b.len() - 1) / 2;
        let odd: Vec<C> = (0..b.len()).filter(|j| j % 2 == 1).map(|j| b[j]).collect();
        let even: Vec<C> = (0..b.len()).filter(|j| j % 2 == 0).map(|j| b[j]).collect();
        Ok(Self { g, lambda: poly::from_roots(&b), p_poly: poly::from_roots(&odd), q_poly: poly::from_roots(&even), b })
    }

    pub fn f(&self, x: C) -> C {
        poly::eval(&self.lambda, x)
    }

    pub fn centroid(&self) -> C {
        self.b.iter().sum::<C>() / self.b.len() as f64
    }

    pub fn spread(&self) -> f64 {
        let m = self.centroid();
        self.b.iter().map(|z| (z - m).norm()).fold(0.0, f64::max)
    }

    pub fn min_separation(&self) -> f64 {
        let mut d = f64::INFINITY;
        for i in 0..self.b.len() {
            for j in 0..i {
                d = d.min((self.b[i] - self.b[j]).norm());
            }
        }
        d
    }

    /// Numerators of ν₁..ν_g followed by the second kind ν^II₁..ν^II_g, all
    /// over 2y dx.
    fn form_numerators(&self, x: C) -> Vec<C> {
        let g = self.g;
        let mut out = Vec::with_capacity(2 * g);
        let mut xp = ONE;
        for _ in 0..g {
            out.push(xp);
            xp *= x;
        }
        for j in 1..=g {
            let mut s = ZERO;
            for k in j..=(2 * g - j) {
                s += (k + 1 - j) as f64 * self.lambda[k + 1 + j] * x.powu(k as u32);
            }
            out.push(s);
        }
        out
    }

    /// A′ₐ(b_r) for Aₐ(x) = P(x)(x − bₐ).
    pub fn a_prime(&self, a: usize, r: usize) -> C {
        let x = self.b[r];
        let dp = poly::derivative(&self.p_poly);
        poly::eval(&dp, x) * (x - self.b[a]) + poly::eval(&self.p_poly, x)
    }

    /// The branch indices entering the identity for even a:
    /// r = 1, 3, …, 2g−1 and r = a.
    pub fn ellipsoidal_indices(&self, a: usize) -> Vec<usize> {
        let mut r: Vec<usize> = (0..self.g).map(|k| 2 * k + 1).collect();
        r.push(a);
        r
    }
}

/// Product of the factors x − b_m over m not in `skip`.
fn rest_product(b: &[C], x: C, skip: &[usize]) -> C {
    b.iter().enumerate().filter(|(m, _)| !skip.contains(m)).map(|(_, &bm)| x - bm).product()
}

fn nearest_sign(prev: C, r: C) -> C {
    if (r - prev).norm() <= (r + prev).norm() {
        r
    } else {
        -r
    }
}

/// Integrate `density(s, w)` over s ∈ [0, 1] where w is the continued square
/// root of `radicand(s)` starting from `w0` at s = 0, refining until two
/// successive node counts agree.
fn adaptive(radicand: &dyn Fn(f64) -> C, w0: C, density: &dyn Fn(f64, C) -> Vec<C>) -> Result<Vec<C>> {
    let once = |n: usize| -> Vec<C> {
        let (x, w) = gauss_legendre(n);
        let mut prev = w0;
        let mut acc: Vec<C> = Vec::new();
        for (t, wt) in x.iter().zip(&w) {
            let s = 0.5 * (t + 1.0);
            let root = nearest_sign(prev, principal_root(radicand(s), 2));
            prev = root;
            let v = density(s, root);
            if acc.is_empty() {
                acc = vec![ZERO; v.len()];
            }
            for (a, d) in acc.iter_mut().zip(v) {
                *a += d * (0.5 * wt);
            }
        }
        acc
    };
    let mut n = MIN_NODES;
    let mut last = once(n);
    while n < MAX_NODES {
        n *= 2;
        let next = once(n);
        let scale = next.iter().map(|z| z.norm()).fold(1e-300, f64::max);
        let diff = next.iter().zip(&last).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if diff <= QUAD_TOL * scale.max(1.0) {
            return Ok(next);
        }
        last = next;
    }
    Err(Error::QuadratureStall)
}

/// ∫ from b_j to b_k along the straight segment of all 2g forms. With
/// x = b_j + Δ(1 − cos θ)/2 the square root singularities at both ends
/// cancel against dx.
fn segment_integral(curve: &HyperCurveSpec, j: usize, k: usize) -> Result<Vec<C>> {
    let (bj, bk) = (curve.b[j], curve.b[k]);
    let delta = bk - bj;
    let x_of = move |s: f64| bj + delta * (0.5 * (1.0 - (PI * s).cos()));
    let rad = |s: f64| rest_product(&curve.b, x_of(s), &[j, k]);
    let w0 = principal_root(rad(0.0), 2);
    // y = iΔ·sin(θ)/2·w and dx = Δ·sin(θ)/2·dθ, θ = πs
    let dens = |s: f64, w: C| {
        let scale = PI / (2.0 * I * w);
        curve.form_numerators(x_of(s)).into_iter().map(|v| v * scale).collect()
    };
    adaptive(&rad, w0, &dens)
}

/// Distance from z to the ray x0 + d·t, t ≥ 0.
fn ray_distance(z: C, x0: C, d: C) -> f64 {
    let t = ((z - x0) * d.conj()).re.max(0.0);
    (z - x0 - d * t).norm()
}

/// Unit direction for a ray from x0 to ∞ keeping clear of the branch points
/// other than `skip`, preferring the outward direction.
fn ray_direction(curve: &HyperCurveSpec, x0: C, skip: Option<usize>) -> C {
    let out = x0 - curve.centroid();
    let theta0 = if out.norm() > 1e-9 { out.arg() } else { 0.0 };
    let clearance = |d: C| {
        curve
            .b
            .iter()
            .enumerate()
            .filter(|(m, _)| Some(*m) != skip)
            .map(|(_, &bm)| ray_distance(bm, x0, d))
            .fold(f64::INFINITY, f64::min)
    };
    let candidates: Vec<C> = (0..64)
        .map(|k| {
            let step = (k as f64 + 1.0) / 2.0;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            C::from_polar(1.0, theta0 + sign * step.floor() * PI / 32.0)
        })
        .collect();
    let best = candidates.iter().map(|&d| clearance(d)).fold(0.0, f64::max);
    *candidates.iter().find(|&&d| clearance(d) >= 0.9 * best).expect("some candidate reaches the best clearance")
}

/// ∫ from the branch point b_r to ∞ of the holomorphic forms along a ray,
/// with x = b_r + d·(s/(1−s))².
fn branch_ray_integral(curve: &HyperCurveSpec, r: usize) -> Result<Vec<C>> {
    let br = curve.b[r];
    let d = ray_direction(curve, br, Some(r));
    let sd = principal_root(d, 2);
    let x_of = move |s: f64| br + d * (s / (1.0 - s)).powi(2);
    let rad = |s: f64| rest_product(&curve.b, x_of(s), &[r]);
    let w0 = principal_root(rad(0.0), 2);
    let g = curve.g;
    let dens = |s: f64, w: C| {
        let scale = sd / ((1.0 - s) * (1.0 - s) * w);
        curve.form_numerators(x_of(s))[..g].iter().map(|&v| v * scale).collect()
    };
    adaptive(&rad, w0, &dens)
}

/// ∫ from (x0, y0) to ∞ of the holomorphic forms along a ray, with
/// x = x0 + d·s/(1−s)².
fn point_ray_integral(curve: &HyperCurveSpec, x0: C, y0: C) -> Result<Vec<C>> {
    let d = ray_direction(curve, x0, None);
    let x_of = move |s: f64| x0 + d * s / ((1.0 - s) * (1.0 - s));
    let rad = |s: f64| curve.f(x_of(s));
    let g = curve.g;
    let dens = |s: f64, y: C| {
        let jac = d * (1.0 + s) / (1.0 - s).powi(3);
        let scale = jac / (2.0 * y);
        curve.form_numerators(x_of(s))[..g].iter().map(|&v| v * scale).collect()
    };
    adaptive(&rad, y0, &dens)
}

#[derive(Debug, Clone)]
pub struct HyperPeriodData {
    pub curve: HyperCurveSpec,
    pub omega1: DMatrix<C>,
    pub omega2: DMatrix<C>,
    pub eta1: DMatrix<C>,
    pub eta2: DMatrix<C>,
    pub tau: DMatrix<C>,
    /// Full periods of all 2g forms over the chain loops around (bⱼ, bⱼ₊₁).
    pub chain_periods: DMatrix<C>,
    /// Intersection numbers of the chain loops.
    pub chain_intersections: Vec<Vec<i64>>,
    pub legendre_residual: f64,
    /// ω_r = ∫_∞^{B_r} ν for r = 0..2g.
    pub omega_branch: Vec<DVector<C>>,
    /// Integers with ω_r = ω′k′ + ω″k″.
    pub k1: Vec<Vec<i64>>,
    pub k2: Vec<Vec<i64>>,
    /// φ_r = η′k′ + η″k″
    pub phi: Vec<DVector<C>>,
    gen_inv: DMatrix<f64>,
}

fn bilinear_defect(pi: &DMatrix<C>, e: &DMatrix<f64>, g: usize) -> f64 {
    let einv = e.clone().try_inverse().expect("chain intersection matrix is unimodular");
    let einv = einv.map(C::from);
    let r = pi * einv * pi.transpose();
    let holo = r.view((0, 0), (g, g)).norm();
    let second = r.view((g, g), (g, g)).norm();
    let mixed = r.view((0, g), (g, g)).into_owned();
    let kappa = mixed.trace() / g as f64;
    let off = (mixed - DMatrix::<C>::identity(g, g) * kappa).norm();
    (holo + second + off) / kappa.norm().max(1e-300)
}

/// Real 2g-vector [Re u; Im u].
fn realify(u: &DVector<C>) -> DVector<f64> {
    let g = u.len();
    DVector::from_iterator(2 * g, u.iter().map(|z| z.re).chain(u.iter().map(|z| z.im)))
}

impl HyperPeriodData {
    pub fn build(curve: &HyperCurveSpec) -> Result<Self> {
        let g = curve.g;
        let n = 2 * g;
        let sep = curve.min_separation();
        for j in 0..n {
            for m in 0..curve.b.len() {
                if m == j || m == j + 1 {
                    continue;
                }
                let (dist, _) = crate::path::segment_distance(curve.b[m], curve.b[j], curve.b[j + 1]);
                if dist < 0.1 * sep {
                    return Err(Error::BasisConstructionFailure(format!(
                        "segment b{j}b{} passes close to b{m}; reorder the branch points",
                        j + 1
                    )));
                }
            }
        }
        let mut pi = DMatrix::<C>::zeros(n, n);
        for j in 0..n {
            let v = segment_integral(curve, j, j + 1)?;
            for i in 0..n {
                pi[(i, j)] = v[i] * 2.0;
            }
        }
        // chain loops meet only their neighbours; the signs follow from the
        // bilinear relations
        let mut best: Option<(f64, DMatrix<f64>)> = None;
        for mask in 0..(1usize << (n - 2)) {
            let mut e = DMatrix::<f64>::zeros(n, n);
            for j in 0..n - 1 {
                let s = if j == 0 || mask >> (j - 1) & 1 == 0 { 1.0 } else { -1.0 };
                e[(j, j + 1)] = s;
                e[(j + 1, j)] = -s;
            }
            let d = bilinear_defect(&pi, &e, g);
            if best.as_ref().is_none_or(|(b, _)| d < *b) {
                best = Some((d, e));
            }
        }
        let (defect, mut e) = best.unwrap();
        if defect > 1e-8 {
            return Err(Error::BasisConstructionFailure(format!(
                "chain periods violate the bilinear relations ({defect:.2e})"
            )));
        }
        for flip in [false, true] {
            if flip {
                e = -e;
            }
            let ei: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| e[(i, j)] as i64).collect()).collect();
            let pairs = symplectic_reduce(&ei)?;
            let col = |v: &[i64]| -> DVector<C> {
                let mut acc = DVector::<C>::zeros(n);
                for (j, &k) in v.iter().enumerate() {
                    acc += pi.column(j) * C::from(k as f64 * 0.5);
                }
                acc
            };
            let mut omega1 = DMatrix::<C>::zeros(g, g);
            let mut omega2 = DMatrix::<C>::zeros(g, g);
            let mut eta1 = DMatrix::<C>::zeros(g, g);
            let mut eta2 = DMatrix::<C>::zeros(g, g);
            for (k, (a, b)) in pairs.iter().enumerate() {
                let (ca, cb) = (col(a), col(b));
                for i in 0..g {
                    omega1[(i, k)] = ca[i];
                    omega2[(i, k)] = cb[i];
                    eta1[(i, k)] = ca[g + i];
                    eta2[(i, k)] = cb[g + i];
                }
            }
            let inv = match omega1.clone().try_inverse() {
                Some(m) => m,
                None => continue,
            };
            let tau = &inv * &omega2;
            let y = tau.map(|z| z.im);
            let y = (&y + y.transpose()) * 0.5;
            if y.symmetric_eigenvalues().min() <= 0.0 {
                continue;
            }
            return Self::finish(curve, omega1, omega2, eta1, eta2, tau, pi, ei);
        }
        Err(Error::BasisConstructionFailure("Im τ is not definite for either orientation".into()))
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        curve: &HyperCurveSpec,
        omega1: DMatrix<C>,
        omega2: DMatrix<C>,
        eta1: DMatrix<C>,
        eta2: DMatrix<C>,
        tau: DMatrix<C>,
        chain_periods: DMatrix<C>,
        chain_intersections: Vec<Vec<i64>>,
    ) -> Result<Self> {
        let g = curve.g;
        let n = 2 * g;
        let mut m = DMatrix::<C>::zeros(n, n);
        m.view_mut((0, 0), (g, g)).copy_from(&(&omega1 * C::from(2.0)));
        m.view_mut((0, g), (g, g)).copy_from(&(&omega2 * C::from(2.0)));
        m.view_mut((g, 0), (g, g)).copy_from(&(&eta1 * C::from(2.0)));
        m.view_mut((g, g), (g, g)).copy_from(&(&eta2 * C::from(2.0)));
        let legendre_residual = legendre_residual(&m, g);
        let mut gens = DMatrix::<f64>::zeros(n, n);
        for k in 0..g {
            gens.set_column(k, &realify(&(omega1.column(k).into_owned() * C::from(2.0))));
            gens.set_column(g + k, &realify(&(omega2.column(k).into_owned() * C::from(2.0))));
        }
        let gen_inv =
            gens.try_inverse().ok_or_else(|| Error::BasisConstructionFailure("periods are not independent".into()))?;
        let mut out = Self {
            curve: curve.clone(),
            omega1,
            omega2,
            eta1,
            eta2,
            tau,
            chain_periods,
            chain_intersections,
            legendre_residual,
            omega_branch: Vec::new(),
            k1: Vec::new(),
            k2: Vec::new(),
            phi: Vec::new(),
            gen_inv,
        };
        for r in 0..curve.b.len() {
            let v = branch_ray_integral(curve, r)?;
            let w = -DVector::from_vec(v);
            // ω_r is a half period: 2ω_r has integral coordinates in (2ω′, 2ω″)
            let x = out.lattice_coords(&w).map(|t| 2.0 * t);
            let worst = x.iter().map(|t| (t - t.round()).abs()).fold(0.0, f64::max);
            if worst > INTEGRAL_TOL {
                return Err(Error::NonIntegralSolution(worst));
            }
            let k1: Vec<i64> = (0..g).map(|i| x[i].round() as i64).collect();
            let k2: Vec<i64> = (0..g).map(|i| x[g + i].round() as i64).collect();
            out.phi.push(out.eta_combination(&k1, &k2));
            out.omega_branch.push(w);
            out.k1.push(k1);
            out.k2.push(k2);
        }
        Ok(out)
    }

    pub fn genus(&self) -> usize {
        self.curve.g
    }

    /// Coordinates of u in the real basis (2ω′₁.., 2ω″₁..).
    pub fn lattice_coords(&self, u: &DVector<C>) -> DVector<f64> {
        &self.gen_inv * realify(u)
    }

    /// ω′k′ + ω″k″
    pub fn half_period(&self, k1: &[i64], k2: &[i64]) -> DVector<C> {
        let v1 = DVector::from_iterator(k1.len(), k1.iter().map(|&x| C::from(x as f64)));
        let v2 = DVector::from_iterator(k2.len(), k2.iter().map(|&x| C::from(x as f64)));
        &self.omega1 * v1 + &self.omega2 * v2
    }

    /// η′k′ + η″k″
    pub fn eta_combination(&self, k1: &[i64], k2: &[i64]) -> DVector<C> {
        let v1 = DVector::from_iterator(k1.len(), k1.iter().map(|&x| C::from(x as f64)));
        let v2 = DVector::from_iterator(k2.len(), k2.iter().map(|&x| C::from(x as f64)));
        &self.eta1 * v1 + &self.eta2 * v2
    }

    pub fn min_im_tau_eigenvalue(&self) -> f64 {
        let y = self.tau.map(|z| z.im);
        ((&y + y.transpose()) * 0.5).symmetric_eigenvalues().min()
    }

    pub fn abel_point(&self, x: C, y: C) -> Result<DVector<C>> {
        Ok(-DVector::from_vec(point_ray_integral(&self.curve, x, y)?))
    }

    pub fn abel_map(&self, pts: &[(C, C)]) -> Result<DVector<C>> {
        let mut u = DVector::<C>::zeros(self.curve.g);
        for &(x, y) in pts {
            u += self.abel_point(x, y)?;
        }
        Ok(u)
    }

    /// Generators of the lattice on which al_r is periodic: each basis
    /// period, doubled when al_r changes sign across it.
    pub fn al_generators(&self, r: usize) -> Vec<(Vec<i64>, Vec<i64>)> {
        let g = self.curve.g;
        (0..2 * g)
            .map(|k| {
                let mut l1 = vec![0i64; g];
                let mut l2 = vec![0i64; g];
                let flips = if k < g { self.k2[r][k] } else { self.k1[r][k - g] };
                let step = if flips.rem_euclid(2) == 1 { 2 } else { 1 };
                if k < g {
                    l1[k] = step;
                } else {
                    l2[k - g] = step;
                }
                (l1, l2)
            })
            .collect()
    }
}

/// ‖MJMᵀ − 2πiJ‖_max, J = [[0, −I], [I, 0]].
pub fn legendre_residual(m: &DMatrix<C>, g: usize) -> f64 {
    let n = 2 * g;
    let mut j = DMatrix::<C>::zeros(n, n);
    for i in 0..g {
        j[(i, g + i)] = C::from(-1.0);
        j[(g + i, i)] = ONE;
    }
    let lhs = m * &j * m.transpose();
    let rhs = &j * (2.0 * PI * I);
    (lhs - rhs).map(|z| z.norm()).max()
}

/// Random finite point (x, y) away from the branch points.
pub fn random_point(curve: &HyperCurveSpec, rng: &mut Rand) -> (C, C) {
    let m = curve.centroid();
    let s = curve.spread().max(1e-3);
    let keep = 0.15 * curve.min_separation();
    loop {
        let x = m + C::from_polar(1.3 * s * rng.random::<f64>().sqrt(), 2.0 * PI * rng.random::<f64>());
        if curve.b.iter().any(|&b| (x - b).norm() < keep) {
            continue;
        }
        let y = principal_root(curve.f(x), 2);
        return (x, if rng.random::<bool>() { y } else { -y });
    }
}

pub fn random_points(curve: &HyperCurveSpec, rng: &mut Rand, n: usize) -> Vec<(C, C)> {
    let sep = 0.05 * curve.min_separation();
    let mut out: Vec<(C, C)> = Vec::with_capacity(n);
    while out.len() < n {
        let p = random_point(curve, rng);
        if out.iter().all(|q| (q.0 - p.0).norm() > sep) {
            out.push(p);
        }
    }
    out
}

/// al_r = √F(b_r), F(x) = Π(x − xᵢ), as Πᵢ √(b_r − xᵢ) with principal roots
/// (the ray paths wind around nothing, so no sign correction).
pub fn hyper_al(curve: &HyperCurveSpec, r: usize, pts: &[(C, C)]) -> Result<C> {
    let br = curve.b[r];
    let f: C = pts.iter().map(|p| br - p.0).product();
    let scale: f64 = pts.iter().map(|p| (br - p.0).norm().max(1.0)).product();
    if f.norm() < 1e-14 * scale {
        return Err(Error::BranchDegeneracy);
    }
    Ok(pts.iter().map(|p| principal_root(br - p.0, 2)).product())
}

/// Σ_{r ∈ {1,3,…,2g−1, a}} al_r² / A′ₐ(b_r) for the squares supplied.
pub fn ellipsoidal_sum(curve: &HyperCurveSpec, a: usize, al_sq: impl Fn(usize) -> Result<C>) -> Result<C> {
    let mut s = ZERO;
    for r in curve.ellipsoidal_indices(a) {
        s += al_sq(r)? / curve.a_prime(a, r);
    }
    Ok(s)
}

/// The characteristic δ′ = (g/2, …, 1/2), δ″ = (1/2, …, 1/2).
pub fn standard_characteristic(g: usize) -> Characteristic {
    Characteristic { delta1: (0..g).map(|i| (g - i) as f64 / 2.0).collect(), delta2: vec![0.5; g] }
}

#[derive(Debug, Clone)]
pub struct HyperContext {
    pub periods: HyperPeriodData,
    pub core: SigmaCore,
    /// Whether the standard characteristic passed the vanishing test (else
    /// the one found by scanning is used).
    pub standard_characteristic: bool,
    /// γ″_r for r = 0..2g, fixed at one divisor.
    pub gamma: Vec<C>,
}

impl HyperContext {
    pub fn new(periods: HyperPeriodData, seed: u64) -> Result<Self> {
        let g = periods.curve.g;
        let template = SigmaCore::new(
            periods.omega1.clone(),
            periods.omega2.clone(),
            periods.eta1.clone(),
            periods.eta2.clone(),
            standard_characteristic(g),
        )?;
        let mut rng = crate::sample::rng(seed);
        let mut low = Vec::with_capacity(SCAN_SAMPLES);
        let mut full = Vec::with_capacity(SCAN_SAMPLES);
        for _ in 0..SCAN_SAMPLES {
            let p = random_points(&periods.curve, &mut rng, g - 1);
            low.push(periods.abel_map(&p)?);
            let p = random_points(&periods.curve, &mut rng, g);
            full.push(periods.abel_map(&p)?);
        }
        let vanishes = |core: &SigmaCore| -> Result<bool> {
            let mut a: Vec<f64> = Vec::new();
            for u in &full {
                a.push(core.eval(u.as_slice())?.norm());
            }
            a.sort_by(|x, y| x.partial_cmp(y).unwrap());
            let med = a[a.len() / 2];
            if a[0] <= VANISH * med {
                return Ok(false);
            }
            for u in &low {
                if core.eval(u.as_slice())?.norm() > VANISH * med {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        let (mut core, standard) = if vanishes(&template)? {
            (template, true)
        } else {
            let mut found = Vec::new();
            for idx in 0..(1usize << (2 * g)) {
                let cand = template.with_delta(Characteristic::from_index(g, idx));
                if vanishes(&cand)? {
                    found.push(cand);
                }
            }
            if found.len() != 1 {
                return Err(Error::CharacteristicAmbiguous(found.len()));
            }
            (found.pop().unwrap(), false)
        };
        core.normalize()?;
        let mut ctx = Self { periods, core, standard_characteristic: standard, gamma: Vec::new() };
        let pts = random_points(&ctx.periods.curve, &mut rng, g);
        let u = ctx.periods.abel_map(&pts)?;
        for r in 0..ctx.periods.curve.b.len() {
            let q = ctx.quotient(r, &u)?;
            ctx.gamma.push(hyper_al(&ctx.periods.curve, r, &pts)? / q);
        }
        Ok(ctx)
    }

    pub fn sigma(&self, u: &DVector<C>) -> Result<C> {
        self.core.eval(u.as_slice())
    }

    /// exp(ᵗuφ_r)σ(u + ω_r)/σ(u)
    fn quotient(&self, r: usize, u: &DVector<C>) -> Result<C> {
        let (s, scale) = self.core.eval_with_scale(u.as_slice())?;
        if s.norm() < crate::al::THETA_FLOOR * scale {
            return Err(Error::OnThetaDivisor);
        }
        let p = &self.periods;
        let shifted = u + &p.omega_branch[r];
        Ok(u.dot(&p.phi[r]).exp() * self.core.eval(shifted.as_slice())? / s)
    }

    /// γ″_r exp(ᵗuφ_r)σ(u + ω_r)/σ(u)
    pub fn al_sigma(&self, r: usize, u: &DVector<C>) -> Result<C> {
        Ok(self.gamma[r] * self.quotient(r, u)?)
    }

    /// Σ_r (γ″_r)² e^{2ᵗuφ_r} σ(u + ω_r)² / A′ₐ(b_r) − σ(u)², relative to σ(u)².
    pub fn quadric_defect(&self, a: usize, u: &DVector<C>) -> Result<f64> {
        let s = self.sigma(u)?;
        let p = &self.periods;
        let mut total = ZERO;
        for r in p.curve.ellipsoidal_indices(a) {
            let shifted = u + &p.omega_branch[r];
            let v = self.gamma[r] * (u.dot(&p.phi[r])).exp() * self.core.eval(shifted.as_slice())?;
            total += v * v / p.curve.a_prime(a, r);
        }
        Ok((total - s * s).norm() / (s * s).norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx::{c, rel_diff};
    use crate::sample;

    fn g1() -> HyperCurveSpec {
        HyperCurveSpec::new(vec![c(-1.0, 0.0), c(0.5, 0.0), c(3.0, 0.0)]).unwrap()
    }

    fn g2() -> HyperCurveSpec {
        HyperCurveSpec::new((0..5).map(|k| c(k as f64, 0.0)).collect()).unwrap()
    }

    #[test]
    fn factor_polynomials_multiply_back() {
        for cu in [g1(), g2()] {
            let pq = poly::mul(&cu.p_poly, &cu.q_poly);
            for (a, b) in pq.iter().zip(&cu.lambda) {
                assert!((a - b).norm() < 1e-12);
            }
        }
        assert_eq!(
            HyperCurveSpec::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]),
            Err(Error::BranchPointsNotDistinct)
        );
        assert!(HyperCurveSpec::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn genus_one_oracle_periods() {
        // full periods of dx/2y are π/AGM(√(e₃−e₁), √(e₃−e₂)) and
        // iπ/AGM(√(e₃−e₁), √(e₂−e₁)); the computed basis must span the same lattice
        let p = HyperPeriodData::build(&g1()).unwrap();
        let agm = |mut a: f64, mut b: f64| {
            while (a - b).abs() > 1e-16 * a {
                let m = 0.5 * (a + b);
                b = (a * b).sqrt();
                a = m;
            }
            a
        };
        let (e1, e2, e3) = (-1.0f64, 0.5f64, 3.0f64);
        let k1 = PI / agm((e3 - e1).sqrt(), (e3 - e2).sqrt());
        let k2 = PI / agm((e3 - e1).sqrt(), (e2 - e1).sqrt());
        for v in [c(k1, 0.0), c(0.0, k2)] {
            let x = p.lattice_coords(&DVector::from_vec(vec![v]));
            for t in x.iter() {
                assert!((t - t.round()).abs() < 1e-10);
            }
        }
        let (w1, w2) = (p.omega1[(0, 0)] * 2.0, p.omega2[(0, 0)] * 2.0);
        assert!(((w1 * w2.conj()).im.abs() - k1 * k2).abs() < 1e-10 * k1 * k2);
        assert!((w2 / w1).im > 0.0);
    }

    #[test]
    fn legendre_and_riemann_conditions() {
        for cu in [g1(), g2(), HyperCurveSpec::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.5, 1.2)]).unwrap()] {
            let p = HyperPeriodData::build(&cu).unwrap();
            assert!(p.legendre_residual < 1e-9, "{}", p.legendre_residual);
            assert!(p.min_im_tau_eigenvalue() > 0.0);
            assert!((&p.tau - p.tau.transpose()).norm() < 1e-10);
        }
    }

    #[test]
    fn branch_vectors_are_half_periods() {
        let p = HyperPeriodData::build(&g2()).unwrap();
        for r in 0..5 {
            let back = p.half_period(&p.k1[r], &p.k2[r]);
            assert!((back - &p.omega_branch[r]).norm() < 1e-9);
        }
    }

    #[test]
    fn sigma_vanishes_below_genus() {
        for cu in [g1(), g2()] {
            let ctx = HyperContext::new(HyperPeriodData::build(&cu).unwrap(), 3).unwrap();
            // the standard vector is tied to one particular basis; whichever
            // characteristic is used must be odd
            assert!(ctx.core.delta.is_odd());
            assert_eq!(ctx.standard_characteristic, cu.g == 1);
            let mut e1 = vec![ZERO; cu.g];
            e1[0] = ONE;
            let d = ctx.core.jet(&vec![ZERO; cu.g], &e1, 1).unwrap()[1];
            assert!((d - ONE).norm() < 1e-10);
            if cu.g == 2 {
                let p = random_points(&cu, &mut sample::rng(4), 1);
                let u = ctx.periods.abel_map(&p).unwrap();
                let (s, scale) = ctx.core.eval_with_scale(u.as_slice()).unwrap();
                assert!(s.norm() < 1e-10 * scale);
            }
        }
    }

    /// Weierstrass σ from its two-variable recursion in g₂/2 and 2g₃.
    fn weierstrass_sigma(u: C, g2: C, g3: C) -> C {
        const N: usize = 14;
        let mut a = vec![vec![0.0f64; N + 2]; N + 2];
        a[0][0] = 1.0;
        let get = |a: &Vec<Vec<f64>>, m: i64, n: i64| {
            if m < 0 || n < 0 || m as usize > N || n as usize > N {
                0.0
            } else {
                a[m as usize][n as usize]
            }
        };
        for total in 1..=N as i64 {
            for n in 0..=total {
                let m = total - n;
                // weight 4m + 6n grows with m + n, so entries of lower total are ready
                let (mf, nf) = (m as f64, n as f64);
                let v = 3.0 * (mf + 1.0) * get(&a, m + 1, n - 1) + 16.0 / 3.0 * (nf + 1.0) * get(&a, m - 2, n + 1)
                    - (2.0 * mf + 3.0 * nf - 1.0) * (4.0 * mf + 6.0 * nf - 1.0) / 3.0 * get(&a, m - 1, n);
                a[m as usize][n as usize] = v;
            }
        }
        let mut s = ZERO;
        for m in 0..=N {
            for n in 0..=N - m {
                let k = 4 * m + 6 * n + 1;
                let fact: f64 = (1..=k).map(|i| i as f64).product();
                s += (g2 / 2.0).powu(m as u32) * (2.0 * g3).powu(n as u32) * u.powu(k as u32) * (a[m][n] / fact);
            }
        }
        s
    }

    #[test]
    fn genus_one_sigma_matches_weierstrass() {
        let cu = HyperCurveSpec::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        let ctx = HyperContext::new(HyperPeriodData::build(&cu).unwrap(), 11).unwrap();
        let s = cu.centroid();
        let e: Vec<C> = cu.b.iter().map(|b| b - s).collect();
        let p = e[0] * e[1] + e[0] * e[2] + e[1] * e[2];
        let q = -e[0] * e[1] * e[2];
        let (g2, g3) = (-4.0 * p, -4.0 * q);
        for u in [c(0.3, 0.0), c(0.2, 0.35), c(-0.4, 0.1), c(0.05, -0.5)] {
            let k = ctx.sigma(&DVector::from_vec(vec![u])).unwrap() * (s * u * u / 2.0).exp();
            assert!(rel_diff(k, weierstrass_sigma(u, g2, g3)) < 1e-10, "{u}");
        }
    }

    #[test]
    fn quasi_periodicity() {
        let ctx = HyperContext::new(HyperPeriodData::build(&g2()).unwrap(), 5).unwrap();
        let mut rng = sample::rng(6);
        for k in 0..4 {
            let mut l = [vec![0i64; 2], vec![0i64; 2]];
            l[k / 2][k % 2] = 1;
            let u = ctx.periods.abel_map(&random_points(&ctx.periods.curve, &mut rng, 2)).unwrap();
            let ell = ctx.core.lattice_vector(&l[0], &l[1]);
            let lhs = ctx.sigma(&(&u + ell)).unwrap();
            let rhs = ctx.sigma(&u).unwrap() * ctx.core.quasi_factor(u.as_slice(), &l[0], &l[1]);
            assert!(rel_diff(lhs, rhs) < 1e-8);
        }
    }

    #[test]
    fn ellipsoidal_identity_both_routes() {
        for cu in [g1(), g2()] {
            let ctx = HyperContext::new(HyperPeriodData::build(&cu).unwrap(), 7).unwrap();
            let mut rng = sample::rng(8);
            for _ in 0..4 {
                let pts = random_points(&cu, &mut rng, cu.g);
                let u = ctx.periods.abel_map(&pts).unwrap();
                for a in (1..=cu.g).map(|k| 2 * k) {
                    let alg = ellipsoidal_sum(&cu, a, |r| Ok(hyper_al(&cu, r, &pts)?.powi(2))).unwrap();
                    assert!((alg - ONE).norm() < 1e-10);
                    let sig = ellipsoidal_sum(&cu, a, |r| Ok(ctx.al_sigma(r, &u)?.powi(2))).unwrap();
                    assert!((sig - ONE).norm() < 1e-8, "{sig}");
                    assert!(ctx.quadric_defect(a, &u).unwrap() < 1e-8);
                }
                for r in 1..cu.b.len() {
                    let a2 = hyper_al(&cu, r, &pts).unwrap().powi(2);
                    assert!(rel_diff(ctx.al_sigma(r, &u).unwrap().powi(2), a2) < 1e-8);
                }
            }
        }
    }

    #[test]
    fn al_periodic_on_its_lattice() {
        let ctx = HyperContext::new(HyperPeriodData::build(&g2()).unwrap(), 9).unwrap();
        let u = ctx.periods.abel_map(&random_points(&ctx.periods.curve, &mut sample::rng(10), 2)).unwrap();
        for r in 1..5 {
            let base = ctx.al_sigma(r, &u).unwrap();
            for (l1, l2) in ctx.periods.al_generators(r) {
                let ell = ctx.core.lattice_vector(&l1, &l2);
                assert!(rel_diff(ctx.al_sigma(r, &(&u + ell)).unwrap(), base) < 1e-8);
            }
        }
    }
}
