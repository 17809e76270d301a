//! The full acceptance gate: every check on the default three-curve corpus,
//! fixed seed, stated tolerances. Run with `--nocapture` to see the table.

use std::sync::OnceLock;
use trigonal::curve::default_corpus;
use trigonal::verify::{run_check, CheckRecord, Corpus, VerifyOptions, CHECK_COUNT};
use trigonal::Exec;

const SEED: u64 = 1;

fn corpus() -> &'static Corpus {
    static CORPUS: OnceLock<Corpus> = OnceLock::new();
    CORPUS.get_or_init(|| Corpus::build(&default_corpus(), SEED, None, None, Exec::default()).expect("corpus builds"))
}

fn record(id: u32) -> CheckRecord {
    let opts = VerifyOptions { seed: SEED, samples: None, exec: Exec::default() };
    run_check(corpus(), id, &opts).unwrap_or_else(|e| panic!("check {id} errored: {e}"))
}

fn gate(id: u32) {
    let r = record(id);
    let mut lines = vec![r.to_string()];
    for p in &r.parts {
        let mark = if p.pass { "ok  " } else { "FAIL" };
        lines.push(format!("    {mark} {}: {:.3e} (tol {:.1e})", p.label, p.max_residual, p.tolerance));
    }
    for m in &r.measured {
        lines.push(format!("    measured {}: {:.6e} {:+.6e}i", m.label, m.value[0], m.value[1]));
    }
    let text = lines.join("\n");
    println!("{text}");
    assert!(r.pass, "criterion {id} fails:\n{text}");
}

#[test]
fn check_ids_are_complete() {
    assert_eq!(CHECK_COUNT, 17);
}

macro_rules! criteria {
    ($($name:ident = $id:expr;)*) => {
        $(
            #[test]
            fn $name() {
                gate($id);
            }
        )*
    };
}

criteria! {
    c01_legendre_relation = 1;
    c02_riemann_conditions = 2;
    c03_lattice_invariance = 3;
    c04_theta_divisor_vanishing = 4;
    c05_quasi_periodicity = 5;
    c06_equivariance = 6;
    c07_normalization = 7;
    c08_branch_constant_independent_of_a = 8;
    c09_determinant_lemmas = 9;
    c10_inverse_maps = 10;
    c11_cube_matched_al = 11;
    c12_al_periodicity = 12;
    c13_frobenius_identity = 13;
    c14_residues = 14;
    c15_addition_formula = 15;
    c16_zero_and_pole_orders = 16;
    c17_hyperelliptic_calibration = 17;
}
