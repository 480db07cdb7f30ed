//! End-to-end run on an algebra loaded from a file instead of a builtin:
//! parse the basis, confirm the bracket table, build a hyperbolic orbit, and
//! compute the infinitesimal character of its Casimir element.

use orbitq::liealg::{parse_algebra_file, Covector};
use orbitq::numerics::RVec;
use orbitq::orbit::{build_orbit, DeltaConvention, IntegralDatum};
use orbitq::uea::{casimir, infinitesimal_character, levi_cartan, root_decomposition, HcStrategy};

const ALGEBRA_FILE: &str = include_str!("data/lorentz3.alg");

fn main() {
    let algebra = parse_algebra_file(ALGEBRA_FILE).unwrap();
    println!(
        "loaded `{}`: {}x{} matrices, dimension {}",
        algebra.name, algebra.n, algebra.n, algebra.d
    );

    println!("\nbracket table (coefficients on the file basis):");
    for i in 0..algebra.d {
        for j in (i + 1)..algebra.d {
            let b = algebra.bracket(&algebra.basis_element(i), &algebra.basis_element(j));
            let parts: Vec<String> = b.coeffs.iter().map(|c| format!("{c:+.1}")).collect();
            println!("  [X{}, X{}] = [{}]", i + 1, j + 1, parts.join(", "));
        }
    }

    let k = 1.0;
    let mut eta = RVec::zeros(3);
    eta[0] = k;
    let orbit = build_orbit(
        &algebra,
        &Covector::new(eta),
        IntegralDatum::trivial(1),
        DeltaConvention::FullTrace,
    )
    .unwrap();

    println!("\ngrading of the orbit through eta = {k} X1*:");
    for (r, block) in &orbit.grading {
        println!("  eigenvalue {r:+.2}: {} basis vector(s)", block.len());
    }
    println!(
        "  l dim {}, u dim {}, u- dim {}",
        orbit.l_basis.len(),
        orbit.u_basis.len(),
        orbit.uminus_basis.len()
    );
    let x1 = algebra.basis_element(0);
    println!("  delta(X1) = {:.3}", orbit.delta(&x1));
    let phi = orbit.phi_real(&x1);
    println!("  phi(X1)   = {:+.3}{:+.3}i", phi.re, phi.im);

    let cartan = levi_cartan(&orbit);
    let roots = root_decomposition(&orbit, &cartan, None).unwrap();
    let positive = roots.roots.iter().filter(|r| r.positive).count();
    println!(
        "\nroot data: Cartan rank {}, {} roots ({} positive)",
        cartan.len(),
        roots.roots.len(),
        positive
    );
    for datum in &roots.roots {
        let a = datum.alpha[0];
        println!("  root alpha(X1) = {:+.3}{:+.3}i", a.re, a.im);
    }

    let c = casimir(&algebra).unwrap();
    let chi = infinitesimal_character(&c, &orbit, &roots, HcStrategy::Symmetrized).unwrap();
    println!("\ninfinitesimal character of the Casimir element:");
    println!("  chi(C) at k = {k}: {:+.6}{:+.6}i", chi.re, chi.im);
    let expected = phi * phi * 0.5;
    println!("  closed form phi(X1)^2/2: {:+.6}{:+.6}i", expected.re, expected.im);
    assert!((chi - expected).norm() < 1e-9);
}
