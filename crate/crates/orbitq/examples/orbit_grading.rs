//! Builds the hyperbolic orbit of eta = k * X1* on so(1,3) and prints the
//! grading data everything else is derived from.

use orbitq::liealg::{builtin, BuiltinName, Covector};
use orbitq::numerics::RVec;
use orbitq::orbit::{build_orbit, DeltaConvention, IntegralDatum};

fn main() {
    let algebra = builtin(&BuiltinName::So { p: 1, q: 3 }).unwrap();
    let mut eta = RVec::zeros(6);
    eta[0] = 1.0;
    let eta = Covector::new(eta);

    println!("algebra        {}  (dim {}, matrices {}x{})", algebra.name, algebra.d, algebra.n, algebra.n);
    println!("functional     eta = X1*");

    for convention in [DeltaConvention::FullTrace, DeltaConvention::HalfTrace] {
        let orbit = build_orbit(&algebra, &eta, IntegralDatum::trivial(1), convention).unwrap();
        println!("\n--- convention: {convention:?} ---");
        println!("grading element X0 coefficients: {:?}", orbit.x0.coeffs.as_slice());
        println!("grading blocks:");
        for (eigenvalue, block) in &orbit.grading {
            println!("  r = {eigenvalue:+.2}   dim {}", block.len());
            for v in block {
                let coeffs: Vec<String> =
                    v.coeffs.iter().map(|c| format!("{c:+.3}")).collect();
                println!("      [{}]", coeffs.join(", "));
            }
        }
        println!(
            "polarization u: {} directions, opposite u-: {}, stabilizer l: {}",
            orbit.u_basis.len(),
            orbit.uminus_basis.len(),
            orbit.l_basis.len()
        );
        let delta: Vec<String> =
            orbit.delta_coeffs.iter().map(|c| format!("{c:+.3}")).collect();
        println!("modular derivative delta on the basis: [{}]", delta.join(", "));
        let boost = algebra.basis_element(0);
        println!(
            "modular factor of exp(X1): {:.6}",
            orbit.delta_group(&algebra.group_exp(&boost)).unwrap()
        );
        println!(
            "phi(X1) = {:.3}  (i eta + delta on the stabilizer part)",
            orbit.phi_real(&boost)
        );
    }
}
