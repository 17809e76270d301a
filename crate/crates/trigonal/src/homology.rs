//! A symplectic basis of H₁ built from lifted pairs of branch-point loops.
//!
//! Candidate cycles are ℓᵢ ℓⱼ⁻¹ (a loop around bᵢ followed by a reversed loop
//! around bⱼ) lifted from a chosen sheet. Intersection numbers are counted from
//! oriented crossings of the x-plane projections whose tracked y agree, and an
//! integer reduction turns the candidates into a basis with [αᵢ, βⱼ] = δᵢⱼ.

use crate::curve::{CurveSpec, SurfacePoint};
use crate::cx::{zeta, C};
use crate::error::{Error, Result};
use crate::path::{segment_distance, Piece};
use crate::quad::track;

const ARC_EDGES_PER_TURN: usize = 160;
/// Crossings closer than this to an edge end in parameter are re-perturbed.
const CROSSING_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Cycle {
    pub pieces: Vec<Piece>,
    pub start: SurfacePoint,
    /// (i, j, sheet): loop around bᵢ, reversed loop around bⱼ, starting sheet.
    pub label: (usize, usize, i64),
}

#[derive(Debug, Clone)]
pub struct Homology {
    pub cycles: Vec<Cycle>,
    /// Intersection numbers of the candidate cycles.
    pub intersection: Vec<Vec<i64>>,
    /// Coefficients of α₁..α₃ and β₁..β₃ in terms of the candidates.
    pub alpha: [Vec<i64>; 3],
    pub beta: [Vec<i64>; 3],
}

fn loop_pieces(center: C, base: C, r: f64, ccw: bool) -> Vec<Piece> {
    let theta0 = (base - center).arg();
    let q = center + C::from_polar(r, theta0);
    let sweep = if ccw { 1.0 } else { -1.0 } * 2.0 * std::f64::consts::PI;
    vec![
        Piece::Line { from: base, to: q },
        Piece::Arc { center, radius: r, theta0, sweep },
        Piece::Line { from: q, to: base },
    ]
}

/// Pick a base point from which the rays to all four branch points are well
/// separated from the other branch points.
fn choose_base(curve: &CurveSpec) -> C {
    let m = curve.centroid();
    let s = curve.spread().max(curve.min_separation());
    let mut best = (f64::NEG_INFINITY, m);
    for k in 0..24 {
        let th = -std::f64::consts::FRAC_PI_2 + 0.173 + k as f64 * std::f64::consts::PI / 12.0;
        for rad in [1.35, 1.8] {
            let x0 = m + C::from_polar(rad * s, th);
            let mut score = f64::INFINITY;
            for j in 0..4 {
                score = score.min((x0 - curve.b[j]).norm());
                for i in 0..4 {
                    if i != j {
                        score = score.min(segment_distance(curve.b[i], x0, curve.b[j]).0);
                    }
                }
            }
            if score > best.0 {
                best = (score, x0);
            }
        }
    }
    best.1
}

fn loop_radii(curve: &CurveSpec, x0: C) -> [f64; 4] {
    let mut r = [0.0; 4];
    for j in 0..4 {
        let mut v = 0.45 * (x0 - curve.b[j]).norm();
        for i in 0..4 {
            if i != j {
                v = v.min(0.3 * (curve.b[i] - curve.b[j]).norm());
                v = v.min(0.5 * segment_distance(curve.b[j], x0, curve.b[i]).0);
            }
        }
        r[j] = v;
    }
    r
}

/// Projection of a cycle with y tracked at every vertex.
struct Traced {
    verts: Vec<C>,
    ys: Vec<C>,
}

fn trace(curve: &CurveSpec, cyc: &Cycle) -> Result<Traced> {
    let mut verts = vec![cyc.start.x];
    for p in &cyc.pieces {
        let poly = p.polyline(curve, ARC_EDGES_PER_TURN);
        verts.extend_from_slice(&poly[1..]);
    }
    let mut ys = vec![cyc.start.y];
    for w in verts.windows(2) {
        let (xa, xb) = (w[0], w[1]);
        let g = |s: f64| curve.f(xa + (xb - xa) * s);
        let y = track(&g, 3, 0.0, g(0.0), *ys.last().unwrap(), 1.0)?.0;
        ys.push(y);
    }
    let (y0, y1) = (ys[0], *ys.last().unwrap());
    if (y1 - y0).norm() > 1e-8 * y0.norm() {
        return Err(Error::BasisConstructionFailure("candidate cycle does not close".into()));
    }
    Ok(Traced { verts, ys })
}

fn cross(a: C, b: C) -> f64 {
    (a.conj() * b).im
}

/// Oriented intersection number of two traced cycles, or None when a crossing
/// is too close to a vertex to be classified reliably.
fn intersect(curve: &CurveSpec, a: &Traced, b: &Traced) -> Result<Option<i64>> {
    let mut total = 0i64;
    for i in 0..a.verts.len() - 1 {
        let (a0, a1) = (a.verts[i], a.verts[i + 1]);
        let da = a1 - a0;
        for j in 0..b.verts.len() - 1 {
            let (b0, b1) = (b.verts[j], b.verts[j + 1]);
            let db = b1 - b0;
            let den = cross(da, db);
            let scale = da.norm() * db.norm();
            if den.abs() <= 1e-14 * scale {
                // parallel: only a problem when the segments overlap
                if cross(da, b0 - a0).abs() <= 1e-12 * da.norm() * (b0 - a0).norm().max(1e-300) {
                    let (d0, _) = segment_distance(b0, a0, a1);
                    let (d1, _) = segment_distance(b1, a0, a1);
                    if d0 < 1e-12 || d1 < 1e-12 {
                        return Ok(None);
                    }
                }
                continue;
            }
            let w = b0 - a0;
            let s = cross(w, db) / den;
            let t = cross(w, da) / den;
            let near = |v: f64| v.abs() < CROSSING_GUARD || (v - 1.0).abs() < CROSSING_GUARD;
            if !(-CROSSING_GUARD..=1.0 + CROSSING_GUARD).contains(&s)
                || !(-CROSSING_GUARD..=1.0 + CROSSING_GUARD).contains(&t)
            {
                continue;
            }
            if near(s) || near(t) {
                return Ok(None);
            }
            let ga = |u: f64| curve.f(a0 + da * u);
            let gb = |u: f64| curve.f(b0 + db * u);
            let ya = track(&ga, 3, 0.0, ga(0.0), a.ys[i], s)?.0;
            let yb = track(&gb, 3, 0.0, gb(0.0), b.ys[j], t)?.0;
            if (ya - yb).norm() < 0.5 * ya.norm() {
                total += if den > 0.0 { 1 } else { -1 };
            }
        }
    }
    Ok(Some(total))
}

/// Candidate cycles ℓᵢℓⱼ⁻¹ for the given (i, j, sheet) labels, with every
/// cycle slightly perturbed so that no two share a vertex or an edge.
fn candidates(curve: &CurveSpec, labels: &[(usize, usize, i64)], attempt: usize) -> Vec<Cycle> {
    let x0 = choose_base(curve);
    let radii = loop_radii(curve, x0);
    let scale = curve.min_separation();
    labels
        .iter()
        .enumerate()
        .map(|(m, &(i, j, s))| {
            let phase = 1.3 * m as f64 + 0.7 * attempt as f64 + 0.31;
            let delta = 2e-3 * scale * (1.0 + attempt as f64) * (0.4 + 0.1 * m as f64);
            let base = x0 + C::from_polar(delta, phase);
            let shrink = 1.0 - 0.035 * (m as f64 + 1.0) - 0.01 * attempt as f64;
            let mut pieces = loop_pieces(curve.b[i], base, radii[i] * shrink, true);
            pieces.extend(loop_pieces(curve.b[j], base, radii[j] * shrink, false));
            let y = zeta(s) * curve.principal_point(base).y;
            Cycle { pieces, start: SurfacePoint::new(base, y), label: (i, j, s) }
        })
        .collect()
}

/// Intersection matrix of a set of cycles; retries with fresh perturbations
/// when a crossing is degenerate.
fn intersection_matrix(curve: &CurveSpec, labels: &[(usize, usize, i64)]) -> Result<(Vec<Cycle>, Vec<Vec<i64>>)> {
    'attempt: for attempt in 0..8 {
        let cycles = candidates(curve, labels, attempt);
        let traced: Vec<Traced> = cycles.iter().map(|c| trace(curve, c)).collect::<Result<_>>()?;
        let n = cycles.len();
        let mut e = vec![vec![0i64; n]; n];
        for p in 0..n {
            for q in p + 1..n {
                match intersect(curve, &traced[p], &traced[q])? {
                    Some(v) => {
                        e[p][q] = v;
                        e[q][p] = -v;
                    }
                    None => continue 'attempt,
                }
            }
        }
        return Ok((cycles, e));
    }
    Err(Error::BasisConstructionFailure("degenerate crossings persist".into()))
}

/// Exact determinant of a small integer matrix (Bareiss).
pub fn int_det(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

fn form(e: &[Vec<i64>], u: &[i64], v: &[i64]) -> i64 {
    let n = e.len();
    let mut s = 0;
    for i in 0..n {
        if u[i] == 0 {
            continue;
        }
        for j in 0..n {
            s += u[i] * e[i][j] * v[j];
        }
    }
    s
}

/// Integer symplectic reduction: returns pairs (eₖ, fₖ) with
/// B(eₖ, fₗ) = δₖₗ and B(eₖ, eₗ) = B(fₖ, fₗ) = 0.
pub fn symplectic_reduce(e: &[Vec<i64>]) -> Result<Vec<(Vec<i64>, Vec<i64>)>> {
    let n = e.len();
    let mut rest: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    let mut pairs = Vec::new();
    while !rest.is_empty() {
        let ev = rest.remove(0);
        // Euclid on the pairings B(ev, w) until a single ±1 remains
        loop {
            let vals: Vec<i64> = rest.iter().map(|w| form(e, &ev, w)).collect();
            let nonzero: Vec<usize> = (0..rest.len()).filter(|&k| vals[k] != 0).collect();
            if nonzero.is_empty() {
                return Err(Error::BasisConstructionFailure(
                    "candidate cycles are degenerate for the intersection form".into(),
                ));
            }
            let kmin = *nonzero.iter().min_by_key(|&&k| vals[k].abs()).unwrap();
            if nonzero.len() == 1 {
                if vals[kmin].abs() != 1 {
                    return Err(Error::BasisConstructionFailure(format!(
                        "candidates span a sublattice (pairing {})",
                        vals[kmin]
                    )));
                }
                break;
            }
            let base = rest[kmin].clone();
            for &k in &nonzero {
                if k != kmin {
                    let q = (vals[k] as f64 / vals[kmin] as f64).round() as i64;
                    for (x, y) in rest[k].iter_mut().zip(&base) {
                        *x -= q * y;
                    }
                }
            }
        }
        let k = (0..rest.len()).find(|&k| form(e, &ev, &rest[k]) != 0).unwrap();
        let mut fv = rest.remove(k);
        if form(e, &ev, &fv) < 0 {
            fv.iter_mut().for_each(|x| *x = -*x);
        }
        for w in rest.iter_mut() {
            let bwf = form(e, w, &fv);
            let bwe = form(e, w, &ev);
            for t in 0..n {
                w[t] = w[t] - bwf * ev[t] + bwe * fv[t];
            }
        }
        pairs.push((ev, fv));
    }
    Ok(pairs)
}

pub fn build_homology_basis(curve: &CurveSpec) -> Result<Homology> {
    let labels: Vec<(usize, usize, i64)> =
        [(0, 1), (1, 2), (2, 3)].iter().flat_map(|&(i, j)| [(i, j, 0), (i, j, 1)]).collect();
    let (cycles, e) = intersection_matrix(curve, &labels)?;
    let det = int_det(&e);
    if det != 1 {
        return Err(Error::BasisConstructionFailure(format!("intersection matrix has determinant {det}")));
    }
    let pairs = symplectic_reduce(&e)?;
    if pairs.len() != 3 {
        return Err(Error::BasisConstructionFailure("rank below 6".into()));
    }
    let alpha = [pairs[0].0.clone(), pairs[1].0.clone(), pairs[2].0.clone()];
    let beta = [pairs[0].1.clone(), pairs[1].1.clone(), pairs[2].1.clone()];
    Ok(Homology { cycles, intersection: e, alpha, beta })
}

impl Homology {
    /// Intersection matrix of (α₁, α₂, α₃, β₁, β₂, β₃).
    pub fn basis_intersections(&self) -> [[i64; 6]; 6] {
        let v: Vec<&Vec<i64>> = self.alpha.iter().chain(self.beta.iter()).collect();
        let mut out = [[0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                out[i][j] = form(&self.intersection, v[i], v[j]);
            }
        }
        out
    }
}

/// Intersection numbers of arbitrary cycles, used by tests and diagnostics.
pub fn cycle_intersections(curve: &CurveSpec, labels: &[(usize, usize, i64)]) -> Result<Vec<Vec<i64>>> {
    Ok(intersection_matrix(curve, labels)?.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cx::c;

    fn corpus() -> Vec<CurveSpec> {
        vec![
            CurveSpec::new([c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap(),
            CurveSpec::new([c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(3.0, -1.0)]).unwrap(),
            CurveSpec::new([c(-2.0, 0.0), c(-1.0, 0.5), c(1.0, 0.0), c(2.0, 1.0)]).unwrap(),
        ]
    }

    #[test]
    fn bareiss_determinant() {
        let m = vec![vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 4]];
        assert_eq!(int_det(&m), 18);
        let j = vec![vec![0, 1], vec![-1, 0]];
        assert_eq!(int_det(&j), 1);
    }

    #[test]
    fn reduction_of_a_scrambled_form() {
        // standard form transformed by a unimodular matrix
        let j: Vec<Vec<i64>> = (0..4)
            .map(|i| {
                (0..4)
                    .map(|k| {
                        if k == i + 2 {
                            1
                        } else if i == k + 2 {
                            -1
                        } else {
                            0
                        }
                    })
                    .collect()
            })
            .collect();
        let u = [[1, 2, 0, 1], [0, 1, 1, 0], [0, 0, 1, 3], [0, 0, 0, 1]];
        let mut e = vec![vec![0i64; 4]; 4];
        for a in 0..4 {
            for b in 0..4 {
                for p in 0..4 {
                    for q in 0..4 {
                        e[a][b] += u[a][p] * j[p][q] * u[b][q];
                    }
                }
            }
        }
        let pairs = symplectic_reduce(&e).unwrap();
        assert_eq!(pairs.len(), 2);
        for (k, (ek, fk)) in pairs.iter().enumerate() {
            for (l, (el, fl)) in pairs.iter().enumerate() {
                assert_eq!(form(&e, ek, fl), i64::from(k == l));
                assert_eq!(form(&e, ek, el), 0);
                assert_eq!(form(&e, fk, fl), 0);
            }
        }
    }

    #[test]
    fn basis_is_symplectic_on_corpus() {
        for cu in corpus() {
            let h = build_homology_basis(&cu).unwrap();
            let m = h.basis_intersections();
            for i in 0..6 {
                for j in 0..6 {
                    let want = if j == i + 3 {
                        1
                    } else if i == j + 3 {
                        -1
                    } else {
                        0
                    };
                    assert_eq!(m[i][j], want);
                }
            }
        }
    }

    #[test]
    fn sheet_sum_of_lifts_is_null_homologous() {
        // ℓ₁ℓ₂⁻¹ lifted from all three sheets sums to zero, so it meets nothing
        let cu = &corpus()[1];
        let labels = [(0, 1, 0), (0, 1, 1), (0, 1, 2), (1, 2, 0), (2, 3, 1)];
        let e = cycle_intersections(cu, &labels).unwrap();
        for k in 3..5 {
            assert_eq!(e[0][k] + e[1][k] + e[2][k], 0);
        }
    }
}
