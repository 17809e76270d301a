//! Period matrices, branch-point vectors, the Abel map and the lattices.

use crate::curve::{continue_along, CurveSpec, SurfacePoint};
use crate::cx::{principal_cbrt, zeta, zeta_index, C, ZERO};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::homology::{build_homology_basis, Homology};
use crate::path::{integrate_pieces, integrate_tail, pieces_along, route, Forms6, QUAD_TOL};
use nalgebra::{Matrix3, Matrix6, SymmetricEigen, Vector3, Vector6};

pub type V3 = Vector3<C>;
pub type M3 = Matrix3<C>;

/// Integrality accepted below this distance to the nearest integers.
pub const INTEGRAL_ACCEPT: f64 = 1e-6;
/// Integrality rejected (hard error) above this distance.
pub const INTEGRAL_REJECT: f64 = 1e-4;

/// (ζ₃u₁, ζ₃u₂, ζ₃²u₃)
pub fn zeta_action(u: &V3) -> V3 {
    zeta_pow(u, 1)
}

/// ζ̂^k applied to u.
pub fn zeta_pow(u: &V3, k: i64) -> V3 {
    V3::new(zeta(k) * u[0], zeta(k) * u[1], zeta(2 * k) * u[2])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeKind {
    Full,
    Twisted { a: usize, c: usize },
    Zero,
}

/// Lattice generated by k′_b ω′_b and k″_b ω″_b (ω′, ω″ half periods).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeSpec {
    pub kind: LatticeKind,
    /// (k′₁, k′₂, k′₃, k″₁, k″₂, k″₃)
    pub k_coeffs: [i64; 6],
}

#[derive(Debug, Clone)]
pub struct Membership {
    pub member: bool,
    /// Real coordinates in the generator basis of the lattice.
    pub coords: [f64; 6],
    pub distance: f64,
}

/// The Abel image of one point together with the data recorded on its path.
#[derive(Debug, Clone)]
pub struct AbelPoint {
    pub point: SurfacePoint,
    pub u: V3,
    /// Sheet index k at the anchor: the path starts at ζ₃^k times the principal y.
    pub sheet: i64,
    /// Turns around b₁..b₄ along the path in the x-plane, then around ∞.
    pub winding: [i64; 5],
    /// Continued tₐ = (x − bₐ)^{1/3} at the end point (principal at the anchor).
    pub t: [C; 4],
}

#[derive(Debug, Clone)]
pub struct PeriodData {
    pub curve: CurveSpec,
    pub omega1: M3,
    pub omega2: M3,
    pub eta1: M3,
    pub eta2: M3,
    pub tau: M3,
    pub omega_branch: [V3; 4],
    /// h′ and h″ indexed [a][c][b].
    pub h1: [[[i64; 3]; 3]; 4],
    pub h2: [[[i64; 3]; 3]; 4],
    /// φ_{a;c} indexed [a][c].
    pub phi: [[V3; 3]; 4],
    pub m: Matrix6<C>,
    pub legendre_residual: f64,
    pub homology: Homology,
    pub cycle_integrals: Vec<Forms6>,
    pub anchor: C,
    pub quad_tol: f64,
    tail: V3,
    anchor_y: C,
    omega1_inv: M3,
    gen_inv: Matrix6<f64>,
}

fn realify(u: &V3) -> Vector6<f64> {
    Vector6::new(u[0].re, u[1].re, u[2].re, u[0].im, u[1].im, u[2].im)
}

fn first3(v: &Forms6) -> V3 {
    V3::new(v[0], v[1], v[2])
}

/// Second-kind forms in the order dual to (ν₁, ν₂, ν₃) under the residue
/// pairing: (5x²+3λ₃x+λ₂)dx/3y, 2x dx/3y, x²dx/3y².
fn second_dual(v: &Forms6) -> V3 {
    V3::new(v[5], v[4], v[3])
}

fn combine(ints: &[Forms6], coeffs: &[i64]) -> Forms6 {
    let mut out = [ZERO; 6];
    for (v, &k) in ints.iter().zip(coeffs) {
        for i in 0..6 {
            out[i] += v[i] * k as f64;
        }
    }
    out
}

impl PeriodData {
    pub fn build(curve: &CurveSpec, exec: Exec) -> Result<Self> {
        Self::build_with_tolerance(curve, exec, QUAD_TOL)
    }

    /// As [`PeriodData::build`] with a relative quadrature tolerance, which
    /// also applies to every later Abel image.
    pub fn build_with_tolerance(curve: &CurveSpec, exec: Exec, quad_tol: f64) -> Result<Self> {
        if !(quad_tol > 0.0 && quad_tol < 1e-2) {
            return Err(Error::InvalidInput(format!("quadrature tolerance {quad_tol} out of range")));
        }
        let homology = build_homology_basis(curve)?;
        let ints: Vec<Result<Forms6>> = exec.map(&homology.cycles, |cyc| {
            let (v, y1) = integrate_pieces(curve, &cyc.pieces, cyc.start.y, quad_tol)?;
            if (y1 - cyc.start.y).norm() > 1e-8 * cyc.start.y.norm() {
                return Err(Error::ContinuationFailure("cycle does not close".into()));
            }
            Ok(v)
        });
        let cycle_integrals: Vec<Forms6> = ints.into_iter().collect::<Result<_>>()?;

        let mut omega1 = M3::zeros();
        let mut omega2 = M3::zeros();
        let mut eta1 = M3::zeros();
        let mut eta2 = M3::zeros();
        for i in 0..3 {
            let a = combine(&cycle_integrals, &homology.alpha[i]);
            let b = combine(&cycle_integrals, &homology.beta[i]);
            omega1.set_column(i, &(first3(&a) * C::from(0.5)));
            omega2.set_column(i, &(first3(&b) * C::from(0.5)));
            eta1.set_column(i, &(second_dual(&a) * C::from(0.5)));
            eta2.set_column(i, &(second_dual(&b) * C::from(0.5)));
        }
        let omega1_inv = omega1.try_inverse().ok_or_else(|| Error::BasisConstructionFailure("ω′ singular".into()))?;
        let tau = omega1_inv * omega2;

        let mut m = Matrix6::<C>::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&(omega1 * C::from(2.0)));
        m.fixed_view_mut::<3, 3>(0, 3).copy_from(&(omega2 * C::from(2.0)));
        m.fixed_view_mut::<3, 3>(3, 0).copy_from(&(eta1 * C::from(2.0)));
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(&(eta2 * C::from(2.0)));
        let legendre_residual = legendre_residual(&m);

        let mut gen = Matrix6::<f64>::zeros();
        for b in 0..3 {
            gen.set_column(b, &realify(&(omega1.column(b) * C::from(2.0))));
            gen.set_column(3 + b, &realify(&(omega2.column(b) * C::from(2.0))));
        }
        let gen_inv =
            gen.try_inverse().ok_or_else(|| Error::BasisConstructionFailure("periods are R-dependent".into()))?;

        let anchor = curve.centroid() + 10.0 * curve.spread();
        let t_anchor = principal_cbrt((anchor - curve.centroid()).inv());
        let (tail, anchor_y) = integrate_tail(curve, t_anchor, quad_tol)?;
        let tail = V3::new(tail[0], tail[1], tail[2]);

        let mut pd = PeriodData {
            curve: curve.clone(),
            omega1,
            omega2,
            eta1,
            eta2,
            tau,
            omega_branch: [V3::zeros(); 4],
            h1: [[[0; 3]; 3]; 4],
            h2: [[[0; 3]; 3]; 4],
            phi: [[V3::zeros(); 3]; 4],
            m,
            legendre_residual,
            homology,
            cycle_integrals,
            anchor,
            quad_tol,
            tail,
            anchor_y,
            omega1_inv,
            gen_inv,
        };
        let branch: Vec<Result<V3>> = exec.map_range(4, |a| pd.branch_vector_along(a, None));
        for (a, v) in branch.into_iter().enumerate() {
            pd.omega_branch[a] = v?;
        }
        for a in 0..4 {
            for c in 0..3 {
                let (h1, h2) = pd.solve_h_matrices(a, c)?;
                pd.h1[a][c] = h1;
                pd.h2[a][c] = h2;
                pd.phi[a][c] = pd.phi_from_h(&h1, &h2);
            }
        }
        Ok(pd)
    }

    pub fn min_im_tau_eigenvalue(&self) -> f64 {
        let y = self.tau.map(|z| z.im);
        let ys = (y + y.transpose()) * 0.5;
        SymmetricEigen::new(ys).eigenvalues.min()
    }

    pub fn tau_asymmetry(&self) -> f64 {
        (self.tau - self.tau.transpose()).map(|z| z.norm()).max()
    }

    pub fn omega1_inv(&self) -> &M3 {
        &self.omega1_inv
    }

    /// ω_a along the canonical route (or through extra waypoints), principal
    /// sheet at the anchor.
    pub fn branch_vector_along(&self, a: usize, via: Option<&[C]>) -> Result<V3> {
        let poly = self.route_through(self.curve.b[a], Some(a), via)?;
        let pieces = pieces_along(&poly, Some(a));
        let (v, _) = integrate_pieces(&self.curve, &pieces, self.anchor_y, self.quad_tol)?;
        Ok(self.tail + first3(&v))
    }

    pub fn branch_vector(&self, a: usize) -> V3 {
        self.omega_branch[a]
    }

    fn route_through(&self, to: C, target: Option<usize>, via: Option<&[C]>) -> Result<Vec<C>> {
        let mut stops: Vec<C> = via.map(|v| v.to_vec()).unwrap_or_default();
        stops.push(to);
        let mut poly = vec![self.anchor];
        let mut from = self.anchor;
        let last = stops.len() - 1;
        for (k, &s) in stops.iter().enumerate() {
            let seg = route(&self.curve, from, s, if k == last { target } else { None })?;
            poly.extend_from_slice(&seg[1..]);
            from = s;
        }
        Ok(poly)
    }

    /// Abel image of a point along the canonical route from the anchor at ∞.
    pub fn abel_point(&self, p: &SurfacePoint) -> Result<AbelPoint> {
        self.abel_point_via(p, None)
    }

    /// Abel image along a route forced through the given waypoints.
    pub fn abel_point_via(&self, p: &SurfacePoint, via: Option<&[C]>) -> Result<AbelPoint> {
        let poly = self.route_through(p.x, None, via)?;
        self.abel_point_polyline(p, &poly)
    }

    /// Abel image along an explicit polyline starting at the anchor and
    /// ending over p.
    pub fn abel_point_polyline(&self, p: &SurfacePoint, poly: &[C]) -> Result<AbelPoint> {
        if (poly[0] - self.anchor).norm() > 1e-12 * self.anchor.norm().max(1.0) {
            return Err(Error::InvalidInput("polyline must start at the anchor".into()));
        }
        if p.y == ZERO {
            if let Some(a) = (0..4).find(|&a| (self.curve.b[a] - p.x).norm() < 1e-14) {
                return Ok(AbelPoint { point: *p, u: self.omega_branch[a], sheet: 0, winding: [0; 5], t: [ZERO; 4] });
            }
        }
        let start = SurfacePoint::new(self.anchor, self.anchor_y);
        let traced = continue_along(&self.curve, poly, start)?;
        let end = traced.end();
        let k = zeta_index(end.y, p.y);
        if (zeta(k) * end.y - p.y).norm() > 1e-6 * p.y.norm().max(1e-300) {
            return Err(Error::InvalidInput("point is not on the curve".into()));
        }
        let pieces = pieces_along(poly, None);
        let (v, _) = integrate_pieces(&self.curve, &pieces, self.anchor_y, self.quad_tol)?;
        let u0 = self.tail + first3(&v);
        Ok(AbelPoint { point: *p, u: zeta_pow(&u0, k), sheet: k, winding: traced.winding_counters, t: traced.t_end() })
    }

    /// Sum of Abel images of the points.
    pub fn abel_map(&self, pts: &[SurfacePoint]) -> Result<(V3, Vec<AbelPoint>)> {
        let mut u = V3::zeros();
        let mut out = Vec::with_capacity(pts.len());
        for p in pts {
            let ap = self.abel_point(p)?;
            u += ap.u;
            out.push(ap);
        }
        Ok((u, out))
    }

    /// Real coordinates of u in the basis (2ω′₁, 2ω′₂, 2ω′₃, 2ω″₁, 2ω″₂, 2ω″₃).
    pub fn lattice_coords(&self, u: &V3) -> [f64; 6] {
        let x = self.gen_inv * realify(u);
        [x[0], x[1], x[2], x[3], x[4], x[5]]
    }

    pub fn lattice_spec(&self, kind: LatticeKind) -> LatticeSpec {
        let k_coeffs = match kind {
            LatticeKind::Full => [2; 6],
            LatticeKind::Zero => [6; 6],
            LatticeKind::Twisted { a, c } => {
                let (h1, h2) = (self.h1[a][c], self.h2[a][c]);
                let mut k = [0; 6];
                for b in 0..3 {
                    k[b] = if h2[b] == 0 { 2 } else { 6 };
                    k[3 + b] = if h1[b] == 0 { 2 } else { 6 };
                }
                k
            }
        };
        LatticeSpec { kind, k_coeffs }
    }

    pub fn lattice_membership(&self, u: &V3, lat: &LatticeSpec) -> Membership {
        let base = self.lattice_coords(u);
        let mut coords = [0.0; 6];
        let mut distance: f64 = 0.0;
        for i in 0..6 {
            coords[i] = base[i] * 2.0 / lat.k_coeffs[i] as f64;
            distance = distance.max((coords[i] - coords[i].round()).abs());
        }
        Membership { member: distance < INTEGRAL_ACCEPT, coords, distance }
    }

    /// Lattice vector 2ω′ℓ′ + 2ω″ℓ″.
    pub fn lattice_vector(&self, l1: &[i64; 3], l2: &[i64; 3]) -> V3 {
        let v1 = V3::new(C::from(l1[0] as f64), C::from(l1[1] as f64), C::from(l1[2] as f64));
        let v2 = V3::new(C::from(l2[0] as f64), C::from(l2[1] as f64), C::from(l2[2] as f64));
        (self.omega1 * v1 + self.omega2 * v2) * C::from(2.0)
    }

    /// Generators of Λ^{(a;c)} as (vector, ℓ′, ℓ″).
    pub fn twisted_generators(&self, a: usize, c: usize) -> Vec<(V3, [i64; 3], [i64; 3])> {
        let spec = self.lattice_spec(LatticeKind::Twisted { a, c });
        let mut out = Vec::new();
        for b in 0..6 {
            let mut l1 = [0; 3];
            let mut l2 = [0; 3];
            let half = spec.k_coeffs[b] / 2;
            if b < 3 {
                l1[b] = half;
            } else {
                l2[b - 3] = half;
            }
            out.push((self.lattice_vector(&l1, &l2), l1, l2));
        }
        out
    }

    /// Integers h′, h″ with 3ζ̂ᶜω_a = Σ_b 2(h′_b ω′_b + h″_b ω″_b).
    pub fn solve_h_matrices(&self, a: usize, c: usize) -> Result<([i64; 3], [i64; 3])> {
        let v = zeta_pow(&self.omega_branch[a], c as i64) * C::from(3.0);
        let x = self.lattice_coords(&v);
        let mut h1 = [0; 3];
        let mut h2 = [0; 3];
        let mut worst: f64 = 0.0;
        for b in 0..3 {
            worst = worst.max((x[b] - x[b].round()).abs());
            worst = worst.max((x[3 + b] - x[3 + b].round()).abs());
            h1[b] = x[b].round() as i64;
            h2[b] = x[3 + b].round() as i64;
        }
        if worst > INTEGRAL_REJECT {
            return Err(Error::NonIntegralSolution(worst));
        }
        Ok((h1, h2))
    }

    /// φ = (2/3)(η′h′ + η″h″)
    pub fn phi_from_h(&self, h1: &[i64; 3], h2: &[i64; 3]) -> V3 {
        let v1 = V3::new(C::from(h1[0] as f64), C::from(h1[1] as f64), C::from(h1[2] as f64));
        let v2 = V3::new(C::from(h2[0] as f64), C::from(h2[1] as f64), C::from(h2[2] as f64));
        (self.eta1 * v1 + self.eta2 * v2) * C::from(2.0 / 3.0)
    }

    pub fn phi_vector(&self, a: usize, c: usize) -> V3 {
        self.phi[a][c]
    }

    /// η-side image of a lattice vector: 2(η′ℓ′ + η″ℓ″).
    pub fn eta_vector(&self, l1: &[f64; 3], l2: &[f64; 3]) -> V3 {
        let v1 = V3::new(C::from(l1[0]), C::from(l1[1]), C::from(l1[2]));
        let v2 = V3::new(C::from(l2[0]), C::from(l2[1]), C::from(l2[2]));
        (self.eta1 * v1 + self.eta2 * v2) * C::from(2.0)
    }

    /// Anchor point (principal sheet) and its Abel image (the tail integral).
    pub fn anchor_point(&self) -> (SurfacePoint, V3) {
        (SurfacePoint::new(self.anchor, self.anchor_y), self.tail)
    }
}

/// ‖M J Mᵀ − 2πi J‖_max with J = [[0, −I], [I, 0]].
pub fn legendre_residual(m: &Matrix6<C>) -> f64 {
    let mut j = Matrix6::<C>::zeros();
    for i in 0..3 {
        j[(i, 3 + i)] = C::from(-1.0);
        j[(3 + i, i)] = C::from(1.0);
    }
    let lhs = m * j * m.transpose();
    let rhs = j * C::new(0.0, 2.0 * std::f64::consts::PI);
    (lhs - rhs).map(|z| z.norm()).max()
}
