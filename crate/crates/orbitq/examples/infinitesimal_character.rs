//! The Casimir element, its Harish-Chandra projection under both rewriting
//! strategies, and the resulting infinitesimal character values.

use num_complex::Complex64;
use orbitq::liealg::{builtin, BuiltinName, Covector};
use orbitq::numerics::RVec;
use orbitq::orbit::{build_orbit, DeltaConvention, IntegralDatum};
use orbitq::uea::{
    casimir, hc_project, infinitesimal_character, levi_cartan, root_decomposition, HcStrategy,
};

fn main() {
    let algebra = builtin(&BuiltinName::So { p: 1, q: 3 }).unwrap();
    let casimir_element = casimir(&algebra).unwrap();
    println!("Casimir words on so(1,3):");
    for (word, coeff) in &casimir_element.terms {
        println!("  {word:?}  {:+.4}{:+.4}i", coeff.re, coeff.im);
    }

    for k in [1.0, 2.5] {
        let mut eta = RVec::zeros(6);
        eta[0] = k;
        let orbit = build_orbit(
            &algebra,
            &Covector::new(eta),
            IntegralDatum::trivial(1),
            DeltaConvention::FullTrace,
        )
        .unwrap();
        let cartan = levi_cartan(&orbit);
        let roots = root_decomposition(&orbit, &cartan, None).unwrap();

        println!("\nk = {k}");
        println!("  rank {} Cartan, {} roots ({} positive)",
            roots.cartan_basis.len(),
            roots.roots.len(),
            roots.roots.iter().filter(|r| r.positive).count());
        for root in &roots.roots {
            let values: Vec<String> = root
                .alpha
                .iter()
                .map(|a| format!("{:+.2}{:+.2}i", a.re, a.im))
                .collect();
            println!(
                "    alpha = ({})  {}",
                values.join(", "),
                if root.positive { "positive" } else { "negative" }
            );
        }

        for strategy in [HcStrategy::Symmetrized, HcStrategy::NormalOrdered] {
            let projection = hc_project(&casimir_element, &roots, strategy).unwrap();
            let chi =
                infinitesimal_character(&casimir_element, &orbit, &roots, strategy).unwrap();
            println!("  {strategy:?}:");
            for (exponents, coeff) in &projection.polynomial.terms {
                println!("    z^{exponents:?}  {:+.4}{:+.4}i", coeff.re, coeff.im);
            }
            println!("    chi(C) = {:.6}{:+.6}i", chi.re, chi.im);
        }
        let closed = Complex64::new(0.25, 0.0) * (Complex64::new(2.0, k)).powu(2);
        println!("  closed form (ik+2)^2/4 = {:.6}{:+.6}i", closed.re, closed.im);
    }
}
