//! Grid refinement study for the action-integral route: the quadrature error
//! of kappa shrinks at second order, quartering with every doubling.

use num_complex::Complex64;
use orbitq::flows::{kappa_action, PathSpec, SweepChain};
use orbitq::liealg::{builtin, BuiltinName, Covector};
use orbitq::numerics::RVec;
use orbitq::orbit::{build_orbit, DeltaConvention, IntegralDatum};

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
    let spec = PathSpec::constant(algebra.basis_element(3).scale(2.0 * std::f64::consts::PI));
    let connector = algebra.basis_element(2).add(&algebra.basis_element(5));

    println!("rotation loop on so(1,3); exact holonomy is 1");
    println!("{:>8} {:>14} {:>10} {:>14}", "grid", "|kappa - 1|", "ratio", "damping part");
    let mut previous: Option<f64> = None;
    let mut last_ratio = 0.0;
    for n in [16usize, 32, 64, 128] {
        let chain = SweepChain::new(
            &orbit,
            &spec,
            orbit.base_point(),
            Some(connector.clone()),
            n,
            n,
        )
        .unwrap();
        let (kappa, _, tilde) = kappa_action(&orbit, &chain).unwrap();
        let error = (kappa - Complex64::new(1.0, 0.0)).norm();
        let ratio = previous.map_or(String::from("-"), |p| {
            last_ratio = p / error;
            format!("{last_ratio:.3}")
        });
        println!("{:>5}^2 {:>14.4e} {:>10} {:>14.4e}", n, error, ratio, tilde);
        previous = Some(error);
    }
    assert!((3.5..4.5).contains(&last_ratio), "lost second-order convergence");
}
