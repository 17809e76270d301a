//! Trigonal al functions, the Frobenius type identity, residues of the K
//! differential and the (3,1) addition formula.
//!
//! al_a^{(c)}(u) = e^{ᵗuφ_{a;c}} σ(u + ζ̂ᶜωₐ) / (σ(u) σ₃₃(ζ̂ᶜωₐ))
//!
//! The exponent sign matches [`SigmaContext::quasi_factor`]; with it al is
//! periodic on Λ^{(a;c)} and independent of the representative chosen for ωₐ.

use crate::curve::{CurveSpec, SurfacePoint};
use crate::cx::{zeta, C, ONE, ZERO};
use crate::divisor::{a_func, addition_rhs, f_func, mu3_norm_poly};
use crate::error::{Error, Result};
use crate::periods::{zeta_pow, AbelPoint, V3};
use crate::poly;
use crate::sigma::{Deriv, SigmaContext};
use std::f64::consts::PI;

/// |σ(u)| below this fraction of its theta term scale counts as u ∈ Θ₂.
pub const THETA_FLOOR: f64 = 1e-8;
/// Trapezoid nodes on the residue circles.
const RESIDUE_NODES: usize = 256;

/// Winding counters of the paths to each point of a divisor.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseLedger {
    pub winding: Vec<[i64; 5]>,
}

impl PhaseLedger {
    pub fn from_points(pts: &[AbelPoint]) -> Self {
        Self { winding: pts.iter().map(|p| p.winding).collect() }
    }

    /// ε_a = Σᵢ (w_a⁽ⁱ⁾ − w_∞⁽ⁱ⁾) mod 3.
    pub fn eps(&self, a: usize) -> i64 {
        self.winding.iter().map(|w| w[a] - w[4]).sum::<i64>().rem_euclid(3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlValue {
    pub value: C,
    pub eps: i64,
    pub a: usize,
    pub c: usize,
}

fn check_off_theta(ctx: &SigmaContext, u: &V3) -> Result<C> {
    let (s, scale) = ctx.sigma_with_scale(u)?;
    if s.norm() < THETA_FLOOR * scale {
        return Err(Error::OnThetaDivisor);
    }
    Ok(s)
}

fn dot(u: &V3, v: &V3) -> C {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

/// al_a^{(c)}(u) from sigma.
pub fn al_sigma(ctx: &SigmaContext, a: usize, c: usize, u: &V3) -> Result<C> {
    let s = check_off_theta(ctx, u)?;
    let p = &ctx.periods;
    let v = zeta_pow(&p.omega_branch[a], c as i64);
    let num = ctx.sigma(&(u + v))?;
    let s33 = ctx.deriv(&v, Deriv::S33)?;
    Ok(dot(u, &p.phi[a][c]).exp() * num / (s * s33))
}

/// −ζ^{c+ε} Aₐ/∛Fₐ with ∛Fₐ = −Πᵢ tₐ⁽ⁱ⁾ from the continued local roots.
pub fn al_algebraic(curve: &CurveSpec, a: usize, c: usize, pts: &[AbelPoint]) -> Result<AlValue> {
    let d: Vec<SurfacePoint> = pts.iter().map(|p| p.point).collect();
    let f = f_func(curve, a, &d);
    let scale: f64 = d.iter().map(|p| (curve.b[a] - p.x).norm().max(1.0)).product();
    if f.norm() < 1e-14 * scale {
        return Err(Error::BranchDegeneracy);
    }
    let cbrt_f = -pts.iter().map(|p| p.t[a]).product::<C>();
    let eps = PhaseLedger::from_points(pts).eps(a);
    let value = -zeta(c as i64 + eps) * a_func(curve, a, &d)? / cbrt_f;
    Ok(AlValue { value, eps, a, c })
}

/// Σₐ Π_c al_a^{(c)}(u) / f′(bₐ).
pub fn frobenius_sum(ctx: &SigmaContext, u: &V3) -> Result<C> {
    let mut total = ZERO;
    for a in 0..4 {
        let mut prod = ONE;
        for c in 0..3 {
            prod *= al_sigma(ctx, a, c, u)?;
        }
        total += prod / ctx.periods.curve.fprime_at_b[a];
    }
    Ok(total)
}

/// The same sum with the algebraic al's.
pub fn frobenius_algebraic(curve: &CurveSpec, pts: &[AbelPoint]) -> Result<C> {
    let mut total = ZERO;
    for a in 0..4 {
        let mut prod = ONE;
        for c in 0..3 {
            prod *= al_algebraic(curve, a, c, pts)?.value;
        }
        total += prod / curve.fprime_at_b[a];
    }
    Ok(total)
}

/// Σₐ Π_c σ(u + ζ̂ᶜωₐ) / σ(u)³.
pub fn sigma_form_sum(ctx: &SigmaContext, u: &V3) -> Result<C> {
    let s = check_off_theta(ctx, u)?;
    let mut total = ZERO;
    for a in 0..4 {
        let mut prod = ONE;
        for c in 0..3 {
            prod *= ctx.sigma(&(u + zeta_pow(&ctx.periods.omega_branch[a], c)))? / s;
        }
        total += prod;
    }
    Ok(total)
}

/// σ₃₃(ωₐ)·Cₐ for the stored representatives, and the representative free
/// combination (σ₃₃(ωₐ)Cₐ)²·exp(ᵗωₐφ_{a;0}).
#[derive(Debug, Clone, PartialEq)]
pub struct BranchConstants {
    pub raw: [C; 4],
    pub invariant: [C; 4],
}

impl BranchConstants {
    /// max |vₐ − v₁| / |v₁| over a.
    pub fn raw_spread(&self) -> f64 {
        spread(&self.raw)
    }

    pub fn invariant_spread(&self) -> f64 {
        spread(&self.invariant)
    }
}

fn spread(v: &[C; 4]) -> f64 {
    v.iter().map(|z| (z - v[0]).norm()).fold(0.0, f64::max) / v[0].norm()
}

pub fn branch_constants(ctx: &SigmaContext) -> Result<BranchConstants> {
    let p = &ctx.periods;
    let mut raw = [ZERO; 4];
    let mut invariant = [ZERO; 4];
    for a in 0..4 {
        let w = p.omega_branch[a];
        raw[a] = ctx.deriv(&w, Deriv::S33)? * p.curve.c[a];
        invariant[a] = raw[a] * raw[a] * dot(&w, &p.phi[a][0]).exp();
    }
    Ok(BranchConstants { raw, invariant })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residues {
    pub infinity: C,
    pub branch: [C; 4],
}

impl Residues {
    pub fn sum(&self) -> C {
        self.infinity + self.branch.iter().sum::<C>()
    }
}

/// Residues of K = Π_c μ₃((x, ζᶜy); D) dx / (3 f(x) Π(x − xᵢ)) at ∞ and at
/// the branch points, by the trapezoid rule on circles in t_∞ and tₐ.
pub fn k_residues(curve: &CurveSpec, d: &[SurfacePoint]) -> Result<Residues> {
    let num = mu3_norm_poly(curve, d)?;
    let den = poly::mul(
        &curve.lambda.iter().map(|&v| v * 3.0).collect::<Vec<_>>(),
        &poly::from_roots(&d.iter().map(|p| p.x).collect::<Vec<_>>()),
    );
    let r = |x: C| poly::eval(&num, x) / poly::eval(&den, x);
    let rho = 0.05 * curve.min_separation();
    let mut branch = [ZERO; 4];
    for a in 0..4 {
        let b = curve.b[a];
        let nearest = d
            .iter()
            .map(|p| p.x)
            .chain((0..4).filter(|&i| i != a).map(|i| curve.b[i]))
            .map(|x| (x - b).norm())
            .fold(f64::INFINITY, f64::min);
        if nearest < 2.0 * rho {
            return Err(Error::ContourTooClose);
        }
        let tr = rho.cbrt();
        branch[a] = circle_residue(tr, |t| r(b + t * t * t) * 3.0 * t * t);
    }
    let m = curve.centroid();
    let far = d.iter().map(|p| p.x).chain(curve.b.iter().copied()).map(|x| (x - m).norm()).fold(0.0, f64::max);
    let big = 4.0 * far.max(1.0);
    let tr = big.powf(-1.0 / 3.0);
    let infinity = circle_residue(tr, |t| {
        let t3 = t * t * t;
        r(m + t3.inv()) * (-3.0) / (t3 * t)
    });
    Ok(Residues { infinity, branch })
}

/// (1/2πi)∮ g(t) dt over |t| = radius.
fn circle_residue(radius: f64, g: impl Fn(C) -> C) -> C {
    let n = RESIDUE_NODES;
    (0..n)
        .map(|k| {
            let t = C::from_polar(radius, 2.0 * PI * k as f64 / n as f64);
            g(t) * t
        })
        .sum::<C>()
        / n as f64
}

/// (LHS, RHS) of the (3,1) addition formula with v = ωₐ:
/// Π_c σ(u + ζ̂ᶜωₐ)/(σ(u)³σ₃₃(ωₐ)³) against Aₐ³Fₐ³/Π(xᵢ − bₐ)⁴.
pub fn addition_check(ctx: &SigmaContext, a: usize, d: &[SurfacePoint], u: &V3) -> Result<(C, C)> {
    let s = check_off_theta(ctx, u)?;
    let w = ctx.periods.omega_branch[a];
    let s33 = ctx.deriv(&w, Deriv::S33)?;
    let mut lhs = ONE;
    for c in 0..3 {
        lhs *= ctx.sigma(&(u + zeta_pow(&w, c)))? / (s * s33);
    }
    Ok((lhs, addition_rhs(&ctx.periods.curve, a, d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx::{c, rel_diff};
    use crate::fixtures::ctx0;
    use crate::sample;

    fn sample_divisor(seed: u64) -> (Vec<SurfacePoint>, V3, Vec<AbelPoint>) {
        let ctx = ctx0();
        let pts = sample::random_points(&ctx.periods.curve, &mut sample::rng(seed), 3);
        let (u, aps) = ctx.periods.abel_map(&pts).unwrap();
        (pts, u, aps)
    }

    #[test]
    fn eps_is_winding_difference_mod_three() {
        let l = PhaseLedger { winding: vec![[1, 0, 0, 0, -1], [2, 0, 1, 0, 0], [0, 0, 0, 0, 1]] };
        assert_eq!(l.eps(0), (2 + 2 - 1i64).rem_euclid(3));
        assert_eq!(l.eps(2), (1 + 1 - 1i64).rem_euclid(3));
    }

    #[test]
    fn algebraic_cube_is_phase_free() {
        let ctx = ctx0();
        let curve = &ctx.periods.curve;
        let (pts, _, aps) = sample_divisor(3);
        for a in 0..4 {
            let want = -a_func(curve, a, &pts).unwrap().powi(3) / f_func(curve, a, &pts);
            for cc in 0..3 {
                let v = al_algebraic(curve, a, cc, &aps).unwrap().value;
                assert!(rel_diff(v.powi(3), want) < 1e-12);
            }
        }
    }

    #[test]
    fn sigma_and_algebraic_routes_agree() {
        let ctx = ctx0();
        for seed in [4, 5, 6] {
            let (_, u, aps) = sample_divisor(seed);
            let sheets: i64 = aps.iter().map(|p| p.sheet).sum();
            for a in 0..4 {
                for cc in 0..3 {
                    let s = al_sigma(ctx, a, cc, &u).unwrap();
                    let al = al_algebraic(&ctx.periods.curve, a, cc, &aps).unwrap();
                    assert!(rel_diff(s.powi(3), al.value.powi(3)) < 1e-8);
                    // before cubing they differ by ζ^{−(c+ε)} and the sheets
                    // the Abel images were rotated by
                    let k = -(sheets + cc as i64 + al.eps);
                    assert!(rel_diff(s, zeta(k) * al.value) < 1e-8, "a={a} c={cc}");
                }
            }
        }
    }

    #[test]
    fn al_is_periodic_on_its_lattice() {
        let ctx = ctx0();
        let u = sample::random_u(&ctx.periods, &mut sample::rng(12));
        for (a, cc) in [(0, 0), (1, 2), (3, 1)] {
            let base = al_sigma(ctx, a, cc, &u).unwrap();
            for (ell, _, _) in ctx.periods.twisted_generators(a, cc) {
                let moved = al_sigma(ctx, a, cc, &(u + ell)).unwrap();
                assert!(rel_diff(moved, base) < 1e-8);
            }
        }
    }

    #[test]
    fn loop_around_branch_point_shifts_eps_not_value() {
        let ctx = ctx0();
        let p = &ctx.periods;
        let curve = &p.curve;
        let pt = sample::random_points(curve, &mut sample::rng(13), 1)[0];
        let a = 1;
        let r = 0.3 * curve.min_separation();
        let w: Vec<C> = (0..5).map(|k| curve.b[a] + C::from_polar(r, 0.5 * PI * (k % 4) as f64)).collect();
        let plain = p.abel_point_via(&pt, Some(&w[..1])).unwrap();
        let looped = p.abel_point_via(&pt, Some(&w)).unwrap();
        let e0 = PhaseLedger::from_points(std::slice::from_ref(&plain)).eps(a);
        let e1 = PhaseLedger::from_points(std::slice::from_ref(&looped)).eps(a);
        assert_eq!((e1 - e0).rem_euclid(3), 1);
        let v0 = al_algebraic(curve, a, 0, &[plain]).unwrap().value;
        let v1 = al_algebraic(curve, a, 0, &[looped]).unwrap().value;
        assert!(rel_diff(v0, v1) < 1e-10);
    }

    #[test]
    fn frobenius_sum_is_minus_one() {
        let ctx = ctx0();
        let (_, u, aps) = sample_divisor(14);
        let s = frobenius_sum(ctx, &u).unwrap();
        let alg = frobenius_algebraic(&ctx.periods.curve, &aps).unwrap();
        assert!((s + ONE).norm() < 1e-8, "{s}");
        assert!((alg + ONE).norm() < 1e-8, "{alg}");
    }

    #[test]
    fn residues_of_k() {
        let ctx = ctx0();
        let (pts, u, _) = sample_divisor(15);
        let res = k_residues(&ctx.periods.curve, &pts).unwrap();
        assert!((res.infinity + ONE).norm() < 1e-8);
        assert!(res.sum().norm() < 1e-8);
        for a in 0..4 {
            let mut prod = ONE;
            for cc in 0..3 {
                prod *= al_sigma(ctx, a, cc, &u).unwrap();
            }
            let want = -prod / ctx.periods.curve.fprime_at_b[a];
            assert!(rel_diff(res.branch[a], want) < 1e-7);
        }
    }

    #[test]
    fn residue_contour_guard() {
        let curve = &ctx0().periods.curve;
        let mut pts = sample::random_points(curve, &mut sample::rng(16), 3);
        let x = curve.b[2] + c(1e-3, 0.0);
        pts[0] = curve.sheets_above(x).unwrap()[0];
        assert_eq!(k_residues(curve, &pts), Err(Error::ContourTooClose));
    }

    #[test]
    fn addition_formula_up_to_sign() {
        let ctx = ctx0();
        let (pts, u, _) = sample_divisor(17);
        for a in 0..4 {
            let (l, r) = addition_check(ctx, a, &pts, &u).unwrap();
            assert!(rel_diff(l, -r) < 1e-7);
        }
    }

    #[test]
    fn branch_constant_invariant_is_a_cube_root_of_unity() {
        let bc = branch_constants(ctx0()).unwrap();
        for k in bc.invariant {
            assert!((k.powi(3) - ONE).norm() < 1e-8, "{k}");
        }
    }

    #[test]
    fn theta_divisor_is_rejected() {
        let ctx = ctx0();
        let pts = sample::random_points(&ctx.periods.curve, &mut sample::rng(18), 2);
        let u = ctx.periods.abel_map(&pts).unwrap().0;
        assert_eq!(al_sigma(ctx, 0, 0, &u), Err(Error::OnThetaDivisor));
    }

    #[test]
    fn a_vanishes_at_the_branch_point_but_al_does_not() {
        let ctx = ctx0();
        let curve = &ctx.periods.curve;
        let mut pts = sample::random_points(curve, &mut sample::rng(19), 3);
        pts[2] = curve.branch_point(1);
        assert!(a_func(curve, 1, &pts).unwrap().norm() < 1e-12);
        let u = ctx.periods.abel_map(&pts).unwrap().0;
        let v = al_sigma(ctx, 1, 0, &u).unwrap();
        assert!(v.is_finite() && v.norm() > 1e-3, "{v}");
    }
}
