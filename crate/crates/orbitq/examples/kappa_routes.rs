//! The holonomy scalar of central loops computed three independent ways:
//! factoring the endpoint, integrating the transport equation at a fixed
//! point, and the action integral over a sweep surface.

use num_complex::Complex64;
use orbitq::flows::{
    integrate_group_path, kappa_action, kappa_direct, kappa_ode_fixed_point, PathSpec, SweepChain,
};
use orbitq::liealg::{builtin, BuiltinName, Covector, GroupElement};
use orbitq::numerics::{CMat, RMat, RVec};
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
    println!("so(1,3), loop with velocity 2 pi X4 (a full spatial rotation):");

    let path = integrate_group_path(&algebra, &spec);
    let direct = kappa_direct(&orbit, &path).unwrap();
    println!("  direct route       kappa = {:+.9}{:+.9}i", direct.re, direct.im);

    let base = orbit.base_point();
    let ode = kappa_ode_fixed_point(&orbit, &spec, &base).unwrap();
    println!("  fixed-point route  kappa = {:+.9}{:+.9}i", ode.re, ode.im);

    let connector = algebra.basis_element(2).add(&algebra.basis_element(5));
    let chain = SweepChain::new(&orbit, &spec, base, Some(connector), 32, 32).unwrap();
    let (action, hat, tilde) = kappa_action(&orbit, &chain).unwrap();
    println!("  action route 32^2  kappa = {:+.9}{:+.9}i", action.re, action.im);
    println!("                     exponent split: oscillatory {hat:+.6e}, damping {tilde:+.6e}");

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
    let sl_path = integrate_group_path(&sl_algebra, &PathSpec::constant(half_turn));
    let end = sl_path.end();
    println!("\nsl(2), half turn exp(pi J) with the sign datum on -Id:");
    println!("  endpoint matrix    [{:+.3} {:+.3}; {:+.3} {:+.3}]",
        end.matrix[(0, 0)], end.matrix[(0, 1)], end.matrix[(1, 0)], end.matrix[(1, 1)]);
    let sl_direct = kappa_direct(&sl_orbit, &sl_path).unwrap();
    println!("  direct route       kappa = {:+.9}{:+.9}i", sl_direct.re, sl_direct.im);
    println!("  the rotation flow fixes no orbit point, so the other routes do not apply");

    assert!((direct - ode).norm() < 1e-8);
    assert!((direct - action).norm() < 1e-3);
    assert!((sl_direct - Complex64::new(-1.0, 0.0)).norm() < 1e-9);
}
