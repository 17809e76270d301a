//! Numerical checks of the identities tying periods, sigma, al and the
//! divisor arithmetic together. Each check returns one [`CheckRecord`] with
//! the worst residual over a seeded random sample on every corpus curve.

use crate::al::{addition_check, al_algebraic, al_sigma, branch_constants, frobenius_sum, k_residues, sigma_form_sum};
use crate::curve::{CurveSpec, SurfacePoint};
use crate::cx::{principal_cbrt, zeta, C, ONE};
use crate::divisor::{
    a_func, f_func, lemma_three_ratio, lemma_two_residuals, minus_one_1, minus_one_2, minus_one_3, DivisorTuple,
};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hyper::{
    ellipsoidal_sum, hyper_al, random_points as hyper_points, HyperContext, HyperCurveSpec, HyperPeriodData,
};
use crate::periods::{zeta_pow, LatticeKind, PeriodData, V3};
use crate::sample::{self, Rand};
use crate::sigma::{equivariance_ratios, Deriv, SigmaContext};
use nalgebra::DVector;
use rand::Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Number of checks; ids run from 1 to this.
pub const CHECK_COUNT: u32 = 17;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Frobenius,
    Addition,
    Residues,
    Periodicity,
    Hyperelliptic,
    All,
}

impl Suite {
    /// Check ids run by the suite; `All` covers every id exactly once.
    pub fn checks(self) -> Vec<u32> {
        match self {
            Suite::Periodicity => vec![1, 2, 3, 5, 10, 12],
            Suite::Frobenius => vec![4, 6, 7, 8, 11, 13],
            Suite::Addition => vec![9, 15],
            Suite::Residues => vec![14, 16],
            Suite::Hyperelliptic => vec![17],
            Suite::All => (1..=CHECK_COUNT).collect(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Frobenius => "frobenius",
            Suite::Addition => "addition",
            Suite::Residues => "residues",
            Suite::Periodicity => "periodicity",
            Suite::Hyperelliptic => "hyperelliptic",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "frobenius" => Suite::Frobenius,
            "addition" => Suite::Addition,
            "residues" => Suite::Residues,
            "periodicity" => Suite::Periodicity,
            "hyperelliptic" => Suite::Hyperelliptic,
            "all" => Suite::All,
            other => return Err(Error::InvalidInput(format!("unknown suite {other:?}"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One tested relation inside a check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Part {
    pub label: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// A reported quantity that is not itself a pass/fail criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measured {
    pub label: String,
    /// [re, im]; real quantities have im = 0.
    pub value: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub id: u32,
    pub name: String,
    /// Which identity is being tested, in words.
    pub anchor: String,
    pub samples: usize,
    /// Residual and tolerance of the part closest to (or furthest past) its limit.
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub parts: Vec<Part>,
    pub measured: Vec<Measured>,
}

struct Builder {
    id: u32,
    name: &'static str,
    anchor: &'static str,
    samples: usize,
    parts: Vec<Part>,
    measured: Vec<Measured>,
}

impl Builder {
    fn new(id: u32, name: &'static str, anchor: &'static str) -> Self {
        Self { id, name, anchor, samples: 0, parts: Vec::new(), measured: Vec::new() }
    }

    fn part(&mut self, label: &str, max_residual: f64, tolerance: f64) {
        let pass = max_residual.is_finite() && max_residual < tolerance;
        self.parts.push(Part { label: label.into(), max_residual, tolerance, pass });
    }

    fn real(&mut self, label: impl Into<String>, v: f64) {
        self.measured.push(Measured { label: label.into(), value: [v, 0.0] });
    }

    fn complex(&mut self, label: impl Into<String>, v: C) {
        self.measured.push(Measured { label: label.into(), value: [v.re, v.im] });
    }

    fn finish(self) -> CheckRecord {
        let pass = self.parts.iter().all(|p| p.pass);
        // the part with the largest residual relative to its tolerance
        let worst = self
            .parts
            .iter()
            .max_by(|a, b| {
                let ra = a.max_residual / a.tolerance.abs().max(f64::MIN_POSITIVE);
                let rb = b.max_residual / b.tolerance.abs().max(f64::MIN_POSITIVE);
                ra.partial_cmp(&rb).unwrap_or(std::cmp::Ordering::Greater)
            })
            .expect("every check has a part");
        CheckRecord {
            id: self.id,
            name: self.name.into(),
            anchor: self.anchor.into(),
            samples: self.samples,
            max_residual: worst.max_residual,
            tolerance: worst.tolerance,
            pass,
            parts: self.parts,
            measured: self.measured,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Overrides the per-check number of random samples.
    pub samples: Option<usize>,
    pub exec: Exec,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 1, samples: None, exec: Exec::default() }
    }
}

impl VerifyOptions {
    fn count(&self, default: usize) -> usize {
        self.samples.unwrap_or(default).max(1)
    }

    /// Independent stream per (check, curve) so the report does not depend
    /// on which checks run or in what order.
    fn rng(&self, id: u32, curve: usize) -> Rand {
        let mix =
            self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add((id as u64) << 32).wrapping_add(curve as u64);
        sample::rng(mix)
    }
}

/// Sigma contexts for the curves under test.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub contexts: Vec<SigmaContext>,
}

impl Corpus {
    /// `precision` is the relative quadrature tolerance and `radius` the theta
    /// truncation radius; `None` keeps the defaults.
    pub fn build(
        curves: &[CurveSpec],
        seed: u64,
        radius: Option<usize>,
        precision: Option<f64>,
        exec: Exec,
    ) -> Result<Self> {
        let built = exec.map(curves, |cu| -> Result<SigmaContext> {
            let periods = match precision {
                Some(tol) => PeriodData::build_with_tolerance(cu, Exec::Sequential, tol)?,
                None => PeriodData::build(cu, Exec::Sequential)?,
            };
            let mut ctx = SigmaContext::new(periods, seed, Exec::Sequential)?;
            if let Some(r) = radius {
                ctx.core.radius = r;
            }
            Ok(ctx)
        });
        Ok(Self { contexts: built.into_iter().collect::<Result<_>>()? })
    }
}

/// Run the given checks concurrently; results come back in the order given.
pub fn run_checks(corpus: &Corpus, ids: &[u32], opts: &VerifyOptions) -> Result<Vec<CheckRecord>> {
    opts.exec.map(ids, |&id| run_check(corpus, id, opts)).into_iter().collect()
}

pub fn run_suite(corpus: &Corpus, suite: Suite, opts: &VerifyOptions) -> Result<Vec<CheckRecord>> {
    run_checks(corpus, &suite.checks(), opts)
}

pub fn run_check(corpus: &Corpus, id: u32, opts: &VerifyOptions) -> Result<CheckRecord> {
    let ctxs = &corpus.contexts;
    match id {
        1 => Ok(legendre(ctxs)),
        2 => Ok(riemann(ctxs)),
        3 => Ok(lattice_invariance(ctxs)),
        4 => theta_divisor(ctxs, opts),
        5 => quasi_periodicity(ctxs, opts),
        6 => equivariance(ctxs, opts),
        7 => normalization(ctxs),
        8 => branch_constant(ctxs),
        9 => determinant_lemmas(ctxs, opts),
        10 => inverse_maps(ctxs, opts),
        11 => cube_matched_al(ctxs, opts),
        12 => al_periodicity(ctxs, opts),
        13 => frobenius(ctxs, opts),
        14 => residues(ctxs, opts),
        15 => addition(ctxs, opts),
        16 => zero_pole_orders(ctxs, opts),
        17 => hyperelliptic(opts),
        _ => Err(Error::InvalidInput(format!("no check with id {id}"))),
    }
}

fn rel(a: C, b: C) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn random_divisor(
    ctx: &SigmaContext,
    rng: &mut Rand,
    n: usize,
) -> Result<(Vec<SurfacePoint>, V3, Vec<crate::periods::AbelPoint>)> {
    let pts = sample::random_points(&ctx.periods.curve, rng, n);
    let (u, aps) = ctx.periods.abel_map(&pts)?;
    Ok((pts, u, aps))
}

fn legendre(ctxs: &[SigmaContext]) -> CheckRecord {
    let mut b = Builder::new(1, "legendre", "generalized Legendre relation MJMᵀ = 2πiJ");
    let worst = ctxs.iter().map(|c| c.periods.legendre_residual).fold(0.0, f64::max);
    b.samples = ctxs.len();
    b.part("max |MJMᵀ − 2πiJ|", worst, 1e-8);
    b.finish()
}

fn riemann(ctxs: &[SigmaContext]) -> CheckRecord {
    let mut b = Builder::new(2, "riemann", "Riemann conditions on τ = ω′⁻¹ω″");
    b.samples = ctxs.len();
    let asym = ctxs.iter().map(|c| c.periods.tau_asymmetry()).fold(0.0, f64::max);
    let min_eig = ctxs.iter().map(|c| c.periods.min_im_tau_eigenvalue()).fold(f64::INFINITY, f64::min);
    b.part("max |τ − τᵀ|", asym, 1e-8);
    b.part("−min eigenvalue of Im τ", -min_eig, 0.0);
    b.real("min eigenvalue of Im τ", min_eig);
    b.finish()
}

fn lattice_invariance(ctxs: &[SigmaContext]) -> CheckRecord {
    let mut b = Builder::new(3, "lattice_invariance", "ζ-invariance of Λ and 3ζ̂ᶜωₐ ∈ Λ");
    let mut gens: f64 = 0.0;
    let mut branch: f64 = 0.0;
    for ctx in ctxs {
        let p = &ctx.periods;
        let full = p.lattice_spec(LatticeKind::Full);
        for k in 0..6 {
            let mut l = [[0i64; 3]; 2];
            l[k / 3][k % 3] = 1;
            let g = p.lattice_vector(&l[0], &l[1]);
            gens = gens.max(p.lattice_membership(&zeta_pow(&g, 1), &full).distance);
            b.samples += 1;
        }
        for a in 0..4 {
            for c in 0..3 {
                let v = zeta_pow(&p.omega_branch[a], c) * C::from(3.0);
                branch = branch.max(p.lattice_membership(&v, &full).distance);
                b.samples += 1;
            }
        }
    }
    b.part("ζ̂(generators) coordinates off integers", gens, 1e-6);
    b.part("3ζ̂ᶜωₐ coordinates off integers", branch, 1e-6);
    b.finish()
}

fn theta_divisor(ctxs: &[SigmaContext], opts: &VerifyOptions) -> Result<CheckRecord> {
    let mut b = Builder::new(4, "theta_divisor", "σ vanishes on W₂");
    let n = opts.count(20);
    let mut worst: f64 = 0.0;
    for (k, ctx) in ctxs.iter().enumerate() {
        let mut rng = opts.rng(4, k);
        let mut w3 = Vec::new();
        for _ in 0..9 {
            w3.push(ctx.sigma(&random_divisor(ctx, &mut rng, 3)?.1)?.norm());
        }
        w3.sort_by(|x, y| x.total_cmp(y));
        let med = w3[4];
        for _ in 0..n {
            let u = random_divisor(ctx, &mut rng, 2)?.1;
            worst = worst.max(ctx.sigma(&u)?.norm() / med);
            b.samples += 1;
        }
    }
    b.part("max |σ(W₂)| / median |σ(W₃)|", worst, 1e-6);
    Ok(b.finish())
}

fn quasi_periodicity(ctxs: &[SigmaContext], opts: &VerifyOptions) -> Result<CheckRecord> {
    let mut b = Builder::new(5, "quasi_periodicity", "σ(u+ℓ) = σ(u)exp(L(u+½ℓ,ℓ))χ(ℓ), plain and ζ-twisted");
    let n = opts.count(5);
    let (mut plain, mut twisted): (f64, f64) = (0.0, 0.0);
    for (k, ctx) in ctxs.iter().enumerate() {
        let mut rng = opts.rng(5, k);
        for _ in 0..n {
            let u = sample::random_u(&ctx.periods, &mut rng);
            let s = ctx.sigma(&u)?;
            for g in 0..6 {
                let mut l = [[0i64; 3]; 2];
                l[g / 3][g % 3] = 1;
                let ell = ctx.periods.lattice_vector(&l[0], &l[1]);
                plain = plain.max(rel(ctx.sigma(&(u + ell))?, s * ctx.quasi_factor(&u, &l[0], &l[1])));
                let moved = ctx.sigma(&(u + zeta_pow(&ell, 1)))?;
                twisted = twisted.max(rel(moved, s * ctx.twisted_quasi_factor(&u, &l[0], &l[1])));
                b.samples += 2;
            }
        }
    }
    b.part("plain generators", plain, 1e-8);
    b.part("twisted generators", twisted, 1e-8);
    Ok(b.finish())
}

fn equivariance(ctxs: &[SigmaContext], opts: &VerifyOptions) -> Result<CheckRecord> {
    let mut b = Builder::new(6, "equivariance", "σ(ζ̂u) = ζσ(u) with σ₃₃ ratio ζ² and σ₃ ratio 1");
    let n = opts.count(20);
    let mut lit = [0.0f64; 3];
    let mut chain = [0.0f64; 2];
    for (k, ctx) in ctxs.iter().enumerate() {
        let mut rng = opts.rng(6, k);
        for _ in 0..n {
            let u = sample::random_u(&ctx.periods, &mut rng);
            let [s, s3, s33] = equivariance_ratios(ctx, &u)?;
            lit[0] = lit[0].max((s - zeta(1)).norm());
            lit[1] = lit[1].max((s33 - zeta(2)).norm());
            lit[2] = lit[2].max((s3 - ONE).norm());
            chain[0] = chain[0].max((s3 - zeta(2)).norm());
            chain[1] = chain[1].max((s33 - ONE).norm());
            b.samples += 1;
        }
    }
    b.part("|σ ratio − ζ|", lit[0], 1e-8);
    b.part("|σ₃₃ ratio − ζ²|", lit[1], 1e-8);
    b.part("|σ₃ ratio − 1|", lit[2], 1e-8);
    b.real("max |σ₃ ratio − ζ²|", chain[0]);
    b.real("max |σ₃₃ ratio − 1|", chain[1]);
    Ok(b.finish())
}

fn normalization(ctxs: &[SigmaContext]) -> Result<CheckRecord> {
    let mut b = Builder::new(7, "normalization", "σ(u) = u₁ − u₃u₂² + u₃⁵/20 + ⋯ at the origin");
    let e = |i: usize| {
        let mut v = V3::zeros();
        v[i] = ONE;
        v
    };
    let (mut d1, mut probe, mut dropped): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for ctx in ctxs {
        d1 = d1.max((ctx.deriv(&V3::zeros(), Deriv::S1)? - ONE).norm());
        let (r, drop) = ctx.leading_ratio(&e(2), C::from(1e-3), 5, 12)?;
        probe = probe.max((r * 20.0 - ONE).norm());
        dropped = dropped.max(drop);
        b.samples += 1;
    }
    b.part("|∂₁σ(0) − 1|", d1, 1e-8);
    b.part("|20·σ(0,0,ε)/ε⁵ − 1| at ε = 10⁻³", probe, 0.05);
    b.real("largest Taylor coefficient below order 5 along u₃", dropped);
    Ok(b.finish())
}

fn branch_constant(ctxs: &[SigmaContext]) -> Result<CheckRecord> {
    let mut b = Builder::new(8, "branch_constant", "σ₃₃(ωₐ)·Cₐ independent of a");
    let (mut raw, mut cube): (f64, f64) = (0.0, 0.0);
    for (k, ctx) in ctxs.iter().enumerate() {
        let bc = branch_constants(ctx)?;
        raw = raw.max(bc.raw_spread());
        for a in 0..4 {
            b.complex(format!("curve {k}: σ₃₃(ω{})·C{}", a + 1, a + 1), bc.raw[a]);
            cube = cube.max((bc.invariant[a].powi(3) - ONE).norm());
        }
        b.samples += 4;
    }
    b.part("relative spread over a", raw, 1e-4);
    b.real("max |κₐ³ − 1|, κₐ = (σ₃₃(ωₐ)Cₐ)²exp(ᵗωₐφₐ)", cube);
    Ok(b.finish())
}

const COLUMN_SETS: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];

fn determinant_lemmas(ctxs: &[SigmaContext], opts: &VerifyOptions) -> Result<CheckRecord> {
    let mut b = Builder::new(9, "determinant_lemmas", "determinant identities between D and [−1]ₙD");
    let n = opts.count(20);
    let (mut two, mut three): (f64, f64) = (0.0, 0.0);
    let mut signs = [0usize; 2];
    for (k, ctx) in ctxs.iter().enumerate() {
        let curve = &ctx.periods.curve;
        let mut rng = opts.rng(9, k);
        for _ in 0..n {
            let p = sample::random_points(curve, &mut rng, 2);
            let q = minus_one_2(curve, &p[0], &p[1])?;
            two = two.max(lemma_two_residuals(&DivisorTuple::new(p), &q).into_iter().fold(0.0, f64::max));
            let d = DivisorTuple::new(sample::random_points(curve, &mut rng, 3));
            let q = minus_one_3(curve, &d.points[0], &d.points[1], &d.points[2])?;
            for _ in 0..5 {
                let i = rng.random_range(0..4);
                let j = (i + rng.random_range(1..4)) % 4;
                let r = lemma_three_ratio(&d, &q, &COLUMN_SETS[i], &COLUMN_SETS[j]);
                let (dp, dm) = ((r - ONE).norm(), (r + ONE).norm());
                three = three.max(dp.min(dm));
                signs[usize::from(dm < dp)] += 1;
            }
            b.samples += 1;
        }
    }
    b.part("[−1]₂ identities, relative", two, 1e-9);
    b.part("[−1]₃ identities up to sign, relative", three, 1e-9);
    b.real("[−1]₃ index pairs with sign +1", signs[0] as f64);
    b.real("[−1]₃ index pairs with sign −1", signs[1] as f64);
    Ok(b.finish())
}

/// True when every point is clear of the branch points and not too far out,
/// so its Abel image integrates quickly.
fn well_placed(curve: &CurveSpec, pts: &[SurfacePoint]) -> bool {
    let keep = 0.05 * curve.min_separation();
    let far = 20.0 * curve.spread().max(1.0);
    pts.iter().all(|p| curve.b.iter().all(|&b| (p.x - b).norm() > keep) && (p.x - curve.centroid()).norm() < far)
}

fn inverse_maps(ctxs: &[SigmaContext], opts: &VerifyOptions) -> Result<CheckRecord> {
    let mut b = Builder::new(10, "inverse_maps", "abel(D) + abel([−1]ₙD) ∈ Λ");
    let n = opts.count(10);
    let mut worst = [0.0f64; 3];
    let mut redrawn = 0usize;
    for (k, ctx) in ctxs.iter().enumerate() {
        let p = &ctx.periods;
        let curve = &p.curve;
        let full = p.lattice_spec(LatticeKind::Full);
        let mut rng = opts.rng(10, k);
        for order in 1..=3usize {
            let mut done = 0;
            while done < n {
                let d = sample::random_points(curve, &mut rng, order);
                let q = match order {
                    1 => minus_one_1(curve, &d[0])?,
                    2 => minus_one_2(curve, &d[0], &d[1])?,
                    _ => minus_one_3(curve, &d[0], &d[1], &d[2])?,
                };
                if !well_placed(curve, &q.points) {
                    redrawn += 1;
                    continue;
                }
                let u = p.abel_map(&d)?.0 + p.abel_map(&q.points)?.0;
                worst[order - 1] = worst[order - 1].max(p.lattice_membership(&u, &full).distance);
                done += 1;
                b.samples += 1;
            }
        }
    }
    for (i, w) in worst.iter().enumerate() {
        b.part(&format!("n = {}: coordinates off integers", i + 1), *w, 1e-6);
    }
    b.real("divisors redrawn because [−1]ₙD came close to a branch point", redrawn as f64);
    Ok(b.finish())
}

fn cube_matched_al(ctxs: &[SigmaContext], opts: &VerifyOptions) -> Result<CheckRecord> {
    let mut b = Builder::new(11, "al_cubes", "al from sigma against −ζ^{c+ε}Aₐ/∛Fₐ, compared cubed");
    let n = opts.count(20);
    let mut worst: f64 = 0.0;
    for (k, ctx) in ctxs.iter().enumerate() {
        let mut rng = opts.rng(11, k);
        for _ in 0..n {
            let (_, u, aps) = random_divisor(ctx, &mut rng, 3)?;
            for a in 0..4 {
                for c in 0..3 {
                    let s = al_sigma(ctx, a, c, &u)?;
                    let alg = al_algebraic(&ctx.periods.curve, a, c, &aps)?.value;
                    worst = worst.max(rel(alg.powi(3), s.powi(3)));
                    b.samples += 1;
                }
            }
        }
    }
    b.part("|al_alg³ − al_σ³| / |al_σ³|", worst, 1e-6);
    Ok(b.finish())
}

fn al_periodicity(ctxs: &[SigmaContext], opts: &VerifyOptions) -> Result<CheckRecord> {
    let mut b = Builder::new(12, "al_periodicity", "al_a^{(c)} periodic on Λ^{(a;c)}");
    let n = opts.count(2);
    let mut worst: f64 = 0.0;
    for (k, ctx) in ctxs.iter().enumerate() {
        let mut rng = opts.rng(12, k);
        for _ in 0..n {
            let u = sample::random_u(&ctx.periods, &mut rng);
            for a in 0..4 {
                for c in 0..3 {
                    let base = al_sigma(ctx, a, c, &u)?;
                    for (ell, _, _) in ctx.periods.twisted_generators(a, c) {
                        worst = worst.max(rel(al_sigma(ctx, a, c, &(u + ell))?, base));
                        b.samples += 1;
                    }
                }
            }
        }
    }
    b.part("relative change over generators", worst, 1e-6);
    Ok(b.finish())
}

fn frobenius(ctxs: &[SigmaContext], opts: &VerifyOptions) -> Result<CheckRecord> {
    let mut b = Builder::new(13, "frobenius", "Σₐ Π_c al_a^{(c)}(u)/f′(bₐ) = 1");
    let n = opts.count(20);
    let (mut lit, mut neg): (f64, f64) = (0.0, 0.0);
    for (k, ctx) in ctxs.iter().enumerate() {
        let mut rng = opts.rng(13, k);
        let mut forms = Vec::with_capacity(n);
        for _ in 0..n {
            let u = sample::random_u(&ctx.periods, &mut rng);
            let s = frobenius_sum(ctx, &u)?;
            lit = lit.max((s - ONE).norm());
            neg = neg.max((s + ONE).norm());
            forms.push(sigma_form_sum(ctx, &u)?);
            b.samples += 1;
        }
        let mean = forms.iter().sum::<C>() / forms.len() as f64;
        let spread = forms.iter().map(|z| (z - mean).norm()).fold(0.0, f64::max) / mean.norm();
        b.complex(format!("curve {k}: mean of Σₐ Π_c σ(u+ζ̂ᶜωₐ)/σ(u)³"), mean);
        b.real(format!("curve {k}: relative spread of that sum over u"), spread);
    }
    b.part("|Σ − 1|", lit, 1e-6);
    b.real("max |Σ + 1|", neg);
    Ok(b.finish())
}

fn residues(ctxs: &[SigmaContext], opts: &VerifyOptions) -> Result<CheckRecord> {
    let mut b = Builder::new(14, "residues", "residues of K at ∞ and at the branch points");
    let n = opts.count(10);
    let (mut inf, mut total, mut branch, mut branch_neg): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for (k, ctx) in ctxs.iter().enumerate() {
        let mut rng = opts.rng(14, k);
        let curve = &ctx.periods.curve;
        let mut done = 0;
        while done < n {
            let (pts, u, _) = random_divisor(ctx, &mut rng, 3)?;
            let res = match k_residues(curve, &pts) {
                Err(Error::ContourTooClose) => continue,
                other => other?,
            };
            inf = inf.max((res.infinity + ONE).norm());
            total = total.max(res.sum().norm());
            for a in 0..4 {
                let mut prod = ONE;
                for c in 0..3 {
                    prod *= al_sigma(ctx, a, c, &u)?;
                }
                let want = prod / curve.fprime_at_b[a];
                branch = branch.max(rel(res.branch[a], want));
                branch_neg = branch_neg.max(rel(res.branch[a], -want));
            }
            done += 1;
            b.samples += 1;
        }
    }
    b.part("|res_∞ K + 1|", inf, 1e-6);
    b.part("|Σ residues|", total, 1e-6);
    b.part("res_{Bₐ} against Π_c al_a^{(c)}/f′(bₐ), relative", branch, 1e-5);
    b.real("res_{Bₐ} against −Π_c al_a^{(c)}/f′(bₐ), relative", branch_neg);
    Ok(b.finish())
}

fn addition(ctxs: &[SigmaContext], opts: &VerifyOptions) -> Result<CheckRecord> {
    let mut b = Builder::new(15, "addition", "(3,1) addition formula at v = ωₐ");
    let n = opts.count(10);
    let (mut lit, mut neg): (f64, f64) = (0.0, 0.0);
    for (k, ctx) in ctxs.iter().enumerate() {
        let mut rng = opts.rng(15, k);
        for _ in 0..n {
            let (pts, u, _) = random_divisor(ctx, &mut rng, 3)?;
            for a in 0..4 {
                let (l, r) = addition_check(ctx, a, &pts, &u)?;
                lit = lit.max((l / r - ONE).norm());
                neg = neg.max((l / r + ONE).norm());
                b.samples += 1;
            }
        }
    }
    b.part("|LHS/RHS − 1|", lit, 1e-5);
    b.real("max |LHS/RHS + 1|", neg);
    Ok(b.finish())
}

/// Least squares slope of log|g| against log t.
fn log_slope(ts: &[f64], vals: &[C]) -> f64 {
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = vals.iter().map(|v| v.norm().ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Nearby point on the curve with x moved by s, y continued from p.
fn nudge(curve: &CurveSpec, p: &SurfacePoint, s: C) -> SurfacePoint {
    let x = p.x + s;
    SurfacePoint::new(x, p.y * principal_cbrt(curve.f(x) / curve.f(p.x)))
}

fn zero_pole_orders(ctxs: &[SigmaContext], opts: &VerifyOptions) -> Result<CheckRecord> {
    let mut b = Builder::new(16, "zero_pole_orders", "orders of Aₐ and Fₐ at special divisors");
    let n = opts.count(2);
    // (item, A order, F order)
    let items: [(&str, f64, f64); 4] = [
        ("(B_a, P1, P2)", 1.0, 3.0),
        ("[−1]₃([−1]₂(P1, P2), B_a)", 1.0, 0.0),
        ("(∞, P1, P2)", -2.0, -3.0),
        ("([−1]B_a, P1)", 3.0, 6.0),
    ];
    let mut worst = [0.0f64; 8];
    let mut slopes = [0.0f64; 8];
    for (k, ctx) in ctxs.iter().enumerate() {
        let curve = &ctx.periods.curve;
        let mut rng = opts.rng(16, k);
        let scale = curve.min_separation().cbrt();
        for _ in 0..n {
            let dir = C::from_polar(1.0, 2.0 * PI * rng.random::<f64>());
            let a = rng.random_range(0..4);
            let gen = sample::random_points(curve, &mut rng, 2);
            let near: Vec<f64> = [2e-2, 1e-2, 5e-3, 2.5e-3].iter().map(|t| t * scale).collect();
            let cubed: Vec<f64> = near.iter().map(|t| t * t * t).collect();
            let far = [1e-2, 1e-3, 1e-4];
            let q = minus_one_2(curve, &gen[0], &gen[1])?;
            let star = minus_one_3(curve, &q.points[0], &q.points[1], &curve.branch_point(a))?;
            let mut fit = |slot: usize, ts: &[f64], make: &dyn Fn(C) -> Vec<SurfacePoint>| -> Result<()> {
                let mut av = Vec::new();
                let mut fv = Vec::new();
                for &t in ts {
                    let d = make(dir * t);
                    av.push(a_func(curve, a, &d)?);
                    fv.push(f_func(curve, a, &d));
                }
                let (sa, sf) = (log_slope(ts, &av), log_slope(ts, &fv));
                let (oa, of) = (items[slot].1, items[slot].2);
                worst[2 * slot] = worst[2 * slot].max((sa - oa).abs());
                worst[2 * slot + 1] = worst[2 * slot + 1].max((sf - of).abs());
                slopes[2 * slot] = sa;
                slopes[2 * slot + 1] = sf;
                Ok(())
            };
            fit(0, &near, &|t| vec![curve.point_near_branch(a, t), gen[0], gen[1]])?;
            // the perturbation is in x, comparable to t³ near a branch point
            fit(1, &cubed, &|s| vec![nudge(curve, &star.points[0], s), star.points[1], star.points[2]])?;
            fit(2, &far, &|t| vec![curve.point_near_infinity(t), gen[0], gen[1]])?;
            fit(3, &near, &|t| {
                let p = curve.point_near_branch(a, t);
                vec![p.rotate(1), p.rotate(2), gen[0]]
            })?;
            b.samples += 1;
        }
    }
    for (slot, item) in items.iter().enumerate() {
        b.part(&format!("{}: A order {}", item.0, item.1), worst[2 * slot], 0.1);
        b.part(&format!("{}: F order {}", item.0, item.2), worst[2 * slot + 1], 0.1);
        b.real(format!("{}: last fitted A slope", item.0), slopes[2 * slot]);
        b.real(format!("{}: last fitted F slope", item.0), slopes[2 * slot + 1]);
    }
    Ok(b.finish())
}

/// Complete elliptic periods of dx/2y for y² = (x−e₁)(x−e₂)(x−e₃), e₁ < e₂ < e₃:
/// the loop around [e₁, e₂] and the loop around [e₂, e₃] (imaginary).
pub fn agm_periods(e1: f64, e2: f64, e3: f64) -> (C, C) {
    let agm = |mut a: f64, mut b: f64| {
        while (a - b).abs() > 1e-16 * a {
            let m = 0.5 * (a + b);
            b = (a * b).sqrt();
            a = m;
        }
        a
    };
    let k1 = PI / agm((e3 - e1).sqrt(), (e3 - e2).sqrt());
    let k2 = PI / agm((e3 - e1).sqrt(), (e2 - e1).sqrt());
    (C::from(k1), C::new(0.0, k2))
}

/// Genus 1 and 2 curves the calibration runs on.
pub fn hyperelliptic_corpus() -> Vec<Vec<C>> {
    let real = |v: &[f64]| v.iter().map(|&x| C::from(x)).collect::<Vec<_>>();
    vec![real(&[0.0, 1.0, 2.0]), real(&[-1.0, 0.5, 3.0]), real(&[0.0, 1.0, 2.0, 3.0, 4.0])]
}

fn hyperelliptic(opts: &VerifyOptions) -> Result<CheckRecord> {
    let mut b = Builder::new(17, "hyperelliptic", "hyperelliptic calibration: periods, Σ al²/A′ = 1, al² from sigma");
    let (mut agm, mut ell1, mut ell2, mut sq): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for (k, bs) in hyperelliptic_corpus().into_iter().enumerate() {
        let curve = HyperCurveSpec::new(bs)?;
        let periods = HyperPeriodData::build(&curve)?;
        if curve.g == 1 {
            let e: Vec<f64> = curve.b.iter().map(|z| z.re).collect();
            let (k1, k2) = agm_periods(e[0], e[1], e[2]);
            for v in [k1, k2] {
                let x = periods.lattice_coords(&DVector::from_vec(vec![v]));
                agm = agm.max(x.iter().map(|t| (t - t.round()).abs()).fold(0.0, f64::max));
            }
            let (w1, w2) = (periods.omega1[(0, 0)] * 2.0, periods.omega2[(0, 0)] * 2.0);
            let area = (w1 * w2.conj()).im.abs();
            agm = agm.max((area - k1.norm() * k2.norm()).abs() / area);
        }
        let ctx = HyperContext::new(periods, opts.seed.wrapping_add(k as u64))?;
        b.real(format!("curve {k}: standard characteristic used"), f64::from(u8::from(ctx.standard_characteristic)));
        let mut rng = opts.rng(17, k);
        let n = opts.count(20);
        for i in 0..n {
            let pts = hyper_points(&curve, &mut rng, curve.g);
            let u = ctx.periods.abel_map(&pts)?;
            for a in (1..=curve.g).map(|j| 2 * j) {
                let alg = ellipsoidal_sum(&curve, a, |r| Ok(hyper_al(&curve, r, &pts)?.powi(2)))?;
                let sig = ellipsoidal_sum(&curve, a, |r| Ok(ctx.al_sigma(r, &u)?.powi(2)))?;
                let d = (alg - ONE).norm().max((sig - ONE).norm());
                if curve.g == 1 {
                    ell1 = ell1.max(d);
                } else {
                    ell2 = ell2.max(d);
                }
            }
            // the squared comparison runs on half as many divisors
            if 2 * i < n {
                for r in 0..curve.b.len() {
                    let want = hyper_al(&curve, r, &pts)?.powi(2);
                    sq = sq.max(rel(ctx.al_sigma(r, &u)?.powi(2), want));
                }
            }
            b.samples += 1;
        }
    }
    b.part("genus 1 periods against the AGM lattice", agm, 1e-8);
    b.part("genus 1: |Σ al²/A′ − 1|", ell1, 1e-8);
    b.part("genus 2: |Σ al²/A′ − 1|", ell2, 1e-8);
    b.part("al² from sigma against F(b_r), relative", sq, 1e-6);
    Ok(b.finish())
}

impl fmt::Display for CheckRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {:<18} max residual {:.3e} (tol {:.1e}, {} samples)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.max_residual,
            self.tolerance,
            self.samples
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_partition_the_checks() {
        let mut all: Vec<u32> =
            [Suite::Frobenius, Suite::Addition, Suite::Residues, Suite::Periodicity, Suite::Hyperelliptic]
                .iter()
                .flat_map(|s| s.checks())
                .collect();
        all.sort();
        assert_eq!(all, Suite::All.checks());
        assert_eq!("residues".parse::<Suite>().unwrap(), Suite::Residues);
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn agm_matches_known_lemniscate_value() {
        // y² = x³ − x: both periods equal Γ(1/4)²/(2√(2π)) ≈ 2.62205755
        let (k1, k2) = agm_periods(-1.0, 0.0, 1.0);
        assert!((k1.re - 2.622_057_554_292_119).abs() < 1e-12);
        assert!((k2.im - 2.622_057_554_292_119).abs() < 1e-12);
    }

    #[test]
    fn log_slope_of_power() {
        let ts = [1e-2, 1e-3, 1e-4];
        let v: Vec<C> = ts.iter().map(|t| C::from(3.0 * t * t * t)).collect();
        assert!((log_slope(&ts, &v) - 3.0).abs() < 1e-12);
    }
}
