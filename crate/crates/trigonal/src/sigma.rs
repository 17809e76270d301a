//! Kleinian sigma function
//!
//! σ(u) = c·exp(−½ ᵗu η′ω′⁻¹ u)·θ[δ](½ω′⁻¹u; ω′⁻¹ω″)
//!
//! in any genus ([`SigmaCore`]) and its trigonal specialisation
//! ([`SigmaContext`]) with the characteristic found by scanning all
//! half-integer candidates on W₂ and W₃.

use crate::cx::{C, ONE, ZERO};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::periods::{zeta_pow, PeriodData, M3, V3};
use crate::sample;
use crate::theta::{Theta, ThetaJet};
use nalgebra::{DMatrix, DVector};

pub const DEFAULT_RADIUS: usize = 12;
/// Doublings of the shell radius tried before giving up.
const ESCALATIONS: usize = 3;

/// Half-integer characteristic; θ[δ] uses a = δ″ and b = δ′.
#[derive(Debug, Clone, PartialEq)]
pub struct Characteristic {
    pub delta2: Vec<f64>,
    pub delta1: Vec<f64>,
}

impl Characteristic {
    pub fn zero(g: usize) -> Self {
        Self { delta2: vec![0.0; g], delta1: vec![0.0; g] }
    }

    /// Bit i of `idx` sets δ′ᵢ = ½, bit g+i sets δ″ᵢ = ½.
    pub fn from_index(g: usize, idx: usize) -> Self {
        let half = |bit: usize| if idx >> bit & 1 == 1 { 0.5 } else { 0.0 };
        Self { delta1: (0..g).map(half).collect(), delta2: (0..g).map(|i| half(g + i)).collect() }
    }

    pub fn index(&self) -> usize {
        let g = self.delta1.len();
        let mut idx = 0;
        for i in 0..g {
            if self.delta1[i] != 0.0 {
                idx |= 1 << i;
            }
            if self.delta2[i] != 0.0 {
                idx |= 1 << (g + i);
            }
        }
        idx
    }

    pub fn is_odd(&self) -> bool {
        let s: f64 = self.delta1.iter().zip(&self.delta2).map(|(a, b)| 4.0 * a * b).sum();
        (s.round() as i64) % 2 == 1
    }

    /// χ(ℓ) = exp(πi(2(ℓ′·δ″ − ℓ″·δ′) + ℓ′·ℓ″)), a sign.
    pub fn chi(&self, l1: &[i64], l2: &[i64]) -> f64 {
        let mut s = 0.0;
        for i in 0..l1.len() {
            s += 2.0 * (l1[i] as f64 * self.delta2[i] - l2[i] as f64 * self.delta1[i]);
            s += (l1[i] * l2[i]) as f64;
        }
        if (s.round() as i64).rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Genus independent sigma evaluation from the four half-period matrices.
#[derive(Debug, Clone)]
pub struct SigmaCore {
    pub g: usize,
    pub omega1: DMatrix<C>,
    pub omega2: DMatrix<C>,
    pub eta1: DMatrix<C>,
    pub eta2: DMatrix<C>,
    half_inv: DMatrix<C>,
    k_sym: DMatrix<C>,
    theta: Theta,
    pub delta: Characteristic,
    pub c_norm: C,
    pub radius: usize,
}

impl SigmaCore {
    pub fn new(
        omega1: DMatrix<C>,
        omega2: DMatrix<C>,
        eta1: DMatrix<C>,
        eta2: DMatrix<C>,
        delta: Characteristic,
    ) -> Result<Self> {
        let g = omega1.nrows();
        let inv = omega1.clone().try_inverse().ok_or_else(|| Error::InvalidInput("ω′ is singular".into()))?;
        let tau = &inv * &omega2;
        let tau = (&tau + tau.transpose()) * C::from(0.5);
        let k = &eta1 * &inv;
        let k_sym = (&k + k.transpose()) * C::from(0.5);
        Ok(Self {
            g,
            half_inv: inv * C::from(0.5),
            k_sym,
            theta: Theta::new(tau)?,
            omega1,
            omega2,
            eta1,
            eta2,
            delta,
            c_norm: ONE,
            radius: DEFAULT_RADIUS,
        })
    }

    pub fn tau(&self) -> &DMatrix<C> {
        &self.theta.tau
    }

    pub fn with_delta(&self, delta: Characteristic) -> Self {
        Self { delta, c_norm: ONE, ..self.clone() }
    }

    fn theta_jet(&self, z: &[C], dz: Option<&[C]>, order: usize, radius: usize) -> Result<ThetaJet> {
        let mut r = radius;
        for _ in 0..=ESCALATIONS {
            match self.theta.jet(z, &self.delta.delta2, &self.delta.delta1, dz, order, r) {
                Err(Error::TruncationInsufficient(_)) => r *= 2,
                other => return other,
            }
        }
        Err(Error::TruncationInsufficient(r / 2))
    }

    /// Taylor coefficients of s ↦ σ(u + s·d) up to `order`.
    pub fn jet(&self, u: &[C], d: &[C], order: usize) -> Result<Vec<C>> {
        self.jet_at_radius(u, Some(d), order, self.radius)
    }

    pub fn eval(&self, u: &[C]) -> Result<C> {
        Ok(self.jet_at_radius(u, None, 0, self.radius)?[0])
    }

    pub fn eval_at_radius(&self, u: &[C], radius: usize) -> Result<C> {
        Ok(self.jet_at_radius(u, None, 0, radius)?[0])
    }

    /// σ(u) together with the size of the theta terms it was summed from;
    /// their ratio measures cancellation (small on the theta divisor).
    pub fn eval_with_scale(&self, u: &[C]) -> Result<(C, f64)> {
        let (v, s) = self.jet_full(u, None, 0, self.radius)?;
        Ok((v[0], s))
    }

    fn jet_at_radius(&self, u: &[C], d: Option<&[C]>, order: usize, radius: usize) -> Result<Vec<C>> {
        Ok(self.jet_full(u, d, order, radius)?.0)
    }

    fn jet_full(&self, u: &[C], d: Option<&[C]>, order: usize, radius: usize) -> Result<(Vec<C>, f64)> {
        let uv = DVector::from_column_slice(u);
        let z = &self.half_inv * &uv;
        let ku = &self.k_sym * &uv;
        let q0 = uv.dot(&ku) * -0.5;
        let (dz, q1, q2) = match d {
            Some(d) => {
                let dv = DVector::from_column_slice(d);
                let kd = &self.k_sym * &dv;
                (Some(&self.half_inv * &dv), -dv.dot(&ku), dv.dot(&kd) * -0.5)
            }
            None => (None, ZERO, ZERO),
        };
        let th = self.theta_jet(z.as_slice(), dz.as_ref().map(|v| v.as_slice()), order, radius)?;
        let mut e = vec![ZERO; order + 1];
        e[0] = ONE;
        if order >= 1 {
            e[1] = q1;
        }
        for k in 1..order {
            e[k + 1] = (q1 * e[k] + 2.0 * q2 * e[k - 1]) / (k + 1) as f64;
        }
        let scale = self.c_norm * (q0 + th.log_scale).exp();
        let coeffs = (0..=order).map(|k| scale * (0..=k).map(|j| e[j] * th.coeffs[k - j]).sum::<C>()).collect();
        Ok((coeffs, scale.norm() * th.abs_sum))
    }

    /// Set c so that ∂σ/∂u₁(0) = 1.
    pub fn normalize(&mut self) -> Result<C> {
        self.c_norm = ONE;
        let mut e1 = vec![ZERO; self.g];
        e1[0] = ONE;
        let d = self.jet(&vec![ZERO; self.g], &e1, 1)?[1];
        if d.norm() < 1e-10 {
            return Err(Error::DegenerateNormalization);
        }
        self.c_norm = d.inv();
        Ok(self.c_norm)
    }

    /// 2ω′ℓ′ + 2ω″ℓ″
    pub fn lattice_vector(&self, l1: &[i64], l2: &[i64]) -> DVector<C> {
        let v1 = DVector::from_iterator(self.g, l1.iter().map(|&x| C::from(x as f64)));
        let v2 = DVector::from_iterator(self.g, l2.iter().map(|&x| C::from(x as f64)));
        (&self.omega1 * v1 + &self.omega2 * v2) * C::from(2.0)
    }

    /// L(u, v) = 2ᵗu(η′v′ + η″v″) for v with integer coordinates (v′, v″).
    pub fn l_form(&self, u: &[C], l1: &[i64], l2: &[i64]) -> C {
        let v1 = DVector::from_iterator(self.g, l1.iter().map(|&x| C::from(x as f64)));
        let v2 = DVector::from_iterator(self.g, l2.iter().map(|&x| C::from(x as f64)));
        let w = (&self.eta1 * v1 + &self.eta2 * v2) * C::from(2.0);
        DVector::from_column_slice(u).dot(&w)
    }

    /// σ(u + ℓ)/σ(u) = exp(−L(u + ½ℓ, ℓ))·χ(ℓ). The sign in the exponent is the
    /// one compatible with the prefactor exp(−½ᵗuη′ω′⁻¹u) when
    /// MJᵗM = 2πiJ.
    pub fn quasi_factor(&self, u: &[C], l1: &[i64], l2: &[i64]) -> C {
        let ell = self.lattice_vector(l1, l2);
        let shifted: Vec<C> = (0..self.g).map(|i| u[i] + 0.5 * ell[i]).collect();
        (-self.l_form(&shifted, l1, l2)).exp() * self.delta.chi(l1, l2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deriv {
    S1,
    S3,
    S33,
}

/// Outcome of the 64-candidate scan.
#[derive(Debug, Clone)]
pub struct CharacteristicScan {
    /// max over W₂ samples of |σ̃| / median over W₃ samples, per candidate.
    pub w2_ratio: Vec<f64>,
    /// min over W₃ samples of |σ̃| / median over W₃ samples, per candidate.
    pub w3_floor: Vec<f64>,
    pub passing: Vec<usize>,
}

const VANISH: f64 = 1e-6;
pub const SCAN_SAMPLES: usize = 8;

#[derive(Debug, Clone)]
pub struct SigmaContext {
    pub periods: PeriodData,
    pub core: SigmaCore,
    pub scan: CharacteristicScan,
}

fn dm(m: &M3) -> DMatrix<C> {
    DMatrix::from_iterator(3, 3, m.iter().cloned())
}

impl SigmaContext {
    /// Scan characteristics with the given seed, then normalize.
    pub fn new(periods: PeriodData, seed: u64, exec: Exec) -> Result<Self> {
        let template = SigmaCore::new(
            dm(&periods.omega1),
            dm(&periods.omega2),
            dm(&periods.eta1),
            dm(&periods.eta2),
            Characteristic::zero(3),
        )?;
        let scan = find_riemann_characteristic(&periods, &template, seed, exec)?;
        let mut core = template.with_delta(Characteristic::from_index(3, scan.passing[0]));
        core.normalize()?;
        Ok(Self { periods, core, scan })
    }

    pub fn delta(&self) -> &Characteristic {
        &self.core.delta
    }

    pub fn sigma(&self, u: &V3) -> Result<C> {
        self.core.eval(u.as_slice())
    }

    pub fn sigma_with_scale(&self, u: &V3) -> Result<(C, f64)> {
        self.core.eval_with_scale(u.as_slice())
    }

    pub fn sigma_at_radius(&self, u: &V3, radius: usize) -> Result<C> {
        self.core.eval_at_radius(u.as_slice(), radius)
    }

    pub fn jet(&self, u: &V3, dir: &V3, order: usize) -> Result<Vec<C>> {
        self.core.jet(u.as_slice(), dir.as_slice(), order)
    }

    /// σ(u + s·dir) from the Taylor jet at u. Near zeros of high order this
    /// avoids the cancellation of summing the theta series directly.
    pub fn sigma_along(&self, u: &V3, dir: &V3, s: C, order: usize) -> Result<C> {
        let jet = self.jet(u, dir, order)?;
        Ok(jet.iter().rev().fold(ZERO, |acc, &a| acc * s + a))
    }

    /// σ(s·dir)/sᵏ from the jet at the origin, dropping the coefficients
    /// below `lead`, together with the largest dropped coefficient. Along u₃
    /// oddness and ζ-equivariance leave only powers ≡ 5 mod 6, so with
    /// `lead` = 5 the dropped part is rounding noise that would otherwise
    /// swamp s⁵/20 for small s.
    pub fn leading_ratio(&self, dir: &V3, s: C, lead: usize, order: usize) -> Result<(C, f64)> {
        let jet = self.jet(&V3::zeros(), dir, order)?;
        let dropped = jet[..lead].iter().map(|z| z.norm()).fold(0.0, f64::max);
        let ratio = jet[lead..].iter().rev().fold(ZERO, |acc, &a| acc * s + a);
        Ok((ratio, dropped))
    }

    pub fn deriv(&self, u: &V3, which: Deriv) -> Result<C> {
        let e = |i: usize| {
            let mut v = V3::zeros();
            v[i] = ONE;
            v
        };
        Ok(match which {
            Deriv::S1 => self.jet(u, &e(0), 1)?[1],
            Deriv::S3 => self.jet(u, &e(2), 1)?[1],
            Deriv::S33 => self.jet(u, &e(2), 2)?[2] * 2.0,
        })
    }

    /// σ(u + ℓ)/σ(u) predicted for ℓ = 2ω′ℓ′ + 2ω″ℓ″.
    pub fn quasi_factor(&self, u: &V3, l1: &[i64; 3], l2: &[i64; 3]) -> C {
        self.core.quasi_factor(u.as_slice(), l1, l2)
    }

    /// σ(u + ζ̂ℓ)/σ(u) predicted: exp(−L(ζ̂²u + ½ℓ, ℓ))·χ(ℓ).
    pub fn twisted_quasi_factor(&self, u: &V3, l1: &[i64; 3], l2: &[i64; 3]) -> C {
        self.core.quasi_factor(zeta_pow(u, 2).as_slice(), l1, l2)
    }
}

/// Scan all 64 half characteristics for the one whose unnormalized σ̃
/// vanishes on W₂ but not on W₃.
pub fn find_riemann_characteristic(
    periods: &PeriodData,
    template: &SigmaCore,
    seed: u64,
    exec: Exec,
) -> Result<CharacteristicScan> {
    let mut rng = sample::rng(seed);
    let curve = &periods.curve;
    let mut w2 = Vec::with_capacity(SCAN_SAMPLES);
    let mut w3 = Vec::with_capacity(SCAN_SAMPLES);
    for _ in 0..SCAN_SAMPLES {
        let pts = sample::random_points(curve, &mut rng, 2);
        w2.push(periods.abel_map(&pts)?.0);
    }
    for _ in 0..SCAN_SAMPLES {
        let pts = sample::random_points(curve, &mut rng, 3);
        w3.push(periods.abel_map(&pts)?.0);
    }
    let rows = exec.map_range(64, |idx| -> Result<(f64, f64)> {
        let core = template.with_delta(Characteristic::from_index(3, idx));
        let mut a3 = Vec::with_capacity(SCAN_SAMPLES);
        for u in &w3 {
            a3.push(core.eval(u.as_slice())?.norm());
        }
        let floor = a3.iter().cloned().fold(f64::INFINITY, f64::min);
        a3.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let med = 0.5 * (a3[SCAN_SAMPLES / 2 - 1] + a3[SCAN_SAMPLES / 2]);
        let mut top: f64 = 0.0;
        for u in &w2 {
            top = top.max(core.eval(u.as_slice())?.norm());
        }
        Ok((top / med, floor / med))
    });
    let mut w2_ratio = Vec::with_capacity(64);
    let mut w3_floor = Vec::with_capacity(64);
    for r in rows {
        let (a, b) = r?;
        w2_ratio.push(a);
        w3_floor.push(b);
    }
    let passing: Vec<usize> = (0..64).filter(|&i| w2_ratio[i] < VANISH && w3_floor[i] > VANISH).collect();
    if passing.len() != 1 {
        return Err(Error::CharacteristicAmbiguous(passing.len()));
    }
    Ok(CharacteristicScan { w2_ratio, w3_floor, passing })
}

/// ζ₃-equivariance ratios (σ, σ₃, σ₃₃) at u.
pub fn equivariance_ratios(ctx: &SigmaContext, u: &V3) -> Result<[C; 3]> {
    let zu = zeta_pow(u, 1);
    Ok([
        ctx.sigma(&zu)? / ctx.sigma(u)?,
        ctx.deriv(&zu, Deriv::S3)? / ctx.deriv(u, Deriv::S3)?,
        ctx.deriv(&zu, Deriv::S33)? / ctx.deriv(u, Deriv::S33)?,
    ])
}
