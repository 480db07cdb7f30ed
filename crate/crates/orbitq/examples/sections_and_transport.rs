//! Horospherical factorization, the polarized section it induces on the
//! dense cell, and the holonomy transport check s(g1^-1 g) = kappa s(g).

use num_complex::Complex64;
use orbitq::flows::{eval_section, horospherical_factor, verify_transport, PathSpec};
use orbitq::liealg::{builtin, BuiltinName, Covector, GroupElement};
use orbitq::numerics::{CMat, CVec, RMat, RVec};
use orbitq::orbit::{build_orbit, DeltaConvention, IntegralDatum};

fn coeff_string(v: &RVec) -> String {
    let parts: Vec<String> = v.iter().map(|c| format!("{c:+.4}")).collect();
    format!("[{}]", parts.join(", "))
}

fn main() {
    let algebra = builtin(&BuiltinName::So { p: 1, q: 3 }).unwrap();
    let mut eta = RVec::zeros(6);
    eta[0] = 1.0;
    let orbit = build_orbit(
        &algebra,
        &Covector::new(eta),
        IntegralDatum::trivial(1),
        DeltaConvention::FullTrace,
    )
    .unwrap();

    let g_minus = algebra.group_exp(
        &algebra.basis_element(1).add(&algebra.basis_element(5).scale(-1.0)).scale(0.2),
    );
    let g_l = algebra.group_exp(&algebra.basis_element(0).scale(0.5));
    let g_plus = algebra.group_exp(
        &algebra.basis_element(1).add(&algebra.basis_element(5)).scale(0.3),
    );
    let g = algebra.group_mul(&algebra.group_mul(&g_minus, &g_l), &g_plus);

    let (n_minus, a_l, n_plus) = horospherical_factor(&orbit, &g).unwrap();
    println!("horospherical factors of a sample group element:");
    println!("  lower  {}", coeff_string(&n_minus.coeffs));
    println!("  levi   {}", coeff_string(&a_l.coeffs));
    println!("  upper  {}", coeff_string(&n_plus.coeffs));

    let v = CVec::from_element(1, Complex64::new(0.8, -0.3));
    let section_g = eval_section(&orbit, &v, &g).unwrap();
    let section_e = eval_section(&orbit, &v, &algebra.group_identity()).unwrap();
    println!("\nsection values: s(e) = {:+.4}{:+.4}i, s(g) = {:+.4}{:+.4}i",
        section_e[0].re, section_e[0].im, section_g[0].re, section_g[0].im);

    let sl_algebra = builtin(&BuiltinName::Sl { n: 2 }).unwrap();
    let minus_identity = GroupElement {
        matrix: -RMat::identity(2, 2),
        group_tag: sl_algebra.group_tag,
    };
    let datum = IntegralDatum::new(
        1,
        vec![(minus_identity, CMat::identity(1, 1) * Complex64::new(-1.0, 0.0))],
    )
    .unwrap();
    let mut sl_eta = RVec::zeros(3);
    sl_eta[0] = 1.0;
    let sl_orbit = build_orbit(
        &sl_algebra,
        &Covector::new(sl_eta),
        datum,
        DeltaConvention::FullTrace,
    )
    .unwrap();
    let half_turn = sl_algebra
        .basis_element(2)
        .add(&sl_algebra.basis_element(1).scale(-1.0))
        .scale(std::f64::consts::PI);
    let spec = PathSpec::constant(half_turn);
    let report = verify_transport(&sl_orbit, &spec, &v, 25, 42).unwrap();
    println!("\nsl(2) half-turn transport:");
    println!("  kappa        {:+.9}{:+.9}i", report.kappa.re, report.kappa.im);
    println!("  samples      {} checked, {} skipped outside the cell", report.checked, report.skipped);
    println!("  worst defect {:.3e}", report.max_defect);
    println!("  transport equation at t=0, finite differences: {:.3e}", report.ode_defect);
}
