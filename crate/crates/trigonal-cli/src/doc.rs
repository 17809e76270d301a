//! Serializable output documents. Complex numbers are [re, im] pairs and
//! matrices are lists of rows.

use serde::Serialize;
use trigonal::periods::{PeriodData, M3, V3};
use trigonal::verify::CheckRecord;
use trigonal::{CurveSpec, C};

pub type Pair = [f64; 2];

pub fn pair(z: C) -> Pair {
    [z.re, z.im]
}

pub fn matrix(m: &M3) -> Vec<Vec<Pair>> {
    (0..3).map(|i| (0..3).map(|j| pair(m[(i, j)])).collect()).collect()
}

pub fn vector(v: &V3) -> Vec<Pair> {
    v.iter().map(|&z| pair(z)).collect()
}

pub fn branch_points(curve: &CurveSpec) -> Vec<Pair> {
    curve.b.iter().map(|&z| pair(z)).collect()
}

#[derive(Debug, Serialize)]
pub struct CurvePeriods {
    pub branch_points: Vec<Pair>,
    pub legendre_residual: f64,
    pub tau_asymmetry: f64,
    pub min_im_tau_eigenvalue: f64,
    pub omega1: Vec<Vec<Pair>>,
    pub omega2: Vec<Vec<Pair>>,
    pub eta1: Vec<Vec<Pair>>,
    pub eta2: Vec<Vec<Pair>>,
    pub tau: Vec<Vec<Pair>>,
    /// ω₁..ω₄, the Abel images of the branch points.
    pub omega_branch: Vec<Vec<Pair>>,
}

impl CurvePeriods {
    pub fn new(p: &PeriodData) -> Self {
        Self {
            branch_points: branch_points(&p.curve),
            legendre_residual: p.legendre_residual,
            tau_asymmetry: p.tau_asymmetry(),
            min_im_tau_eigenvalue: p.min_im_tau_eigenvalue(),
            omega1: matrix(&p.omega1),
            omega2: matrix(&p.omega2),
            eta1: matrix(&p.eta1),
            eta2: matrix(&p.eta2),
            tau: matrix(&p.tau),
            omega_branch: p.omega_branch.iter().map(vector).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PeriodsDoc {
    pub curve: Vec<CurvePeriods>,
}

#[derive(Debug, Serialize)]
pub struct Environment {
    pub suite: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    pub theta_radius: usize,
    pub precision: f64,
    pub curves: Vec<Vec<Pair>>,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub environment: Environment,
    pub summary: Summary,
    pub check: Vec<CheckRecord>,
}

impl Report {
    pub fn new(environment: Environment, check: Vec<CheckRecord>) -> Self {
        let passed = check.iter().filter(|c| c.pass).count();
        let summary = Summary { total: check.len(), passed, failed: check.len() - passed };
        Self { environment, summary, check }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.failed == 0
    }
}

#[derive(Debug, Default, Serialize)]
pub struct AlEvalDoc {
    pub branch_points: Vec<Pair>,
    /// Branch point index, 1 to 4.
    pub a: usize,
    pub c: usize,
    pub u: Vec<Pair>,
    pub sigma_route: Pair,
    pub sigma_route_cubed: Pair,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algebraic_route: Option<Pair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algebraic_route_cubed: Option<Pair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cube_relative_difference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_value: Option<Pair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_value: Option<Pair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct SigmaEvalDoc {
    pub branch_points: Vec<Pair>,
    pub u: Vec<Pair>,
    pub sigma: Pair,
    pub sigma_1: Pair,
    pub sigma_3: Pair,
    pub sigma_33: Pair,
    /// |σ| relative to the size of the theta terms summed; tiny on Θ₂.
    pub relative_size: f64,
    pub delta1: Vec<f64>,
    pub delta2: Vec<f64>,
}

pub fn to_toml<T: Serialize>(doc: &T) -> String {
    toml::to_string(doc).expect("documents serialize to TOML")
}
