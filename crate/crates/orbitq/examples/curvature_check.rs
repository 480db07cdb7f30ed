//! Curvature of the polarized connection: closed form against a
//! finite-difference assembly of the structure equation, plus a look at the
//! moment map pairing.

use num_complex::Complex64;
use orbitq::liealg::{builtin, BuiltinName, Covector};
use orbitq::numerics::{CMat, RVec};
use orbitq::orbit::{build_orbit, DeltaConvention, IntegralDatum};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

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

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut random_element = |scale: f64| {
        let mut a = algebra.zero();
        for i in 0..algebra.d {
            a = a.add(&algebra.basis_element(i).scale(rng.random_range(-scale..scale)));
        }
        a
    };

    let alpha = CMat::identity(1, 1) * Complex64::new(0.8, -0.4);
    println!("curvature vs finite-difference structure equation (step 1e-4):");
    println!("{:>6} {:>24} {:>14}", "point", "closed form", "rel. error");
    for k in 0..6 {
        let b = random_element(1.0);
        let c = random_element(1.0);
        let g = algebra.group_exp(&random_element(0.3));
        let (closed, fd) = orbit.curvature_fd_check(&g, &alpha, &b, &c, 1e-4).unwrap();
        let rel = (&closed - &fd).norm() / (1.0 + closed.norm());
        println!(
            "{:>6} {:>+12.6}{:+.6}i {:>14.3e}",
            k, closed[(0, 0)].re, closed[(0, 0)].im, rel
        );
    }

    println!("\nmoment map pairing over a fixed point of the bundle:");
    let g = algebra.group_exp(&random_element(0.4));
    let a1 = algebra.basis_element(0);
    let a2 = algebra.basis_element(3);
    let m1 = orbit.moment_map(&g, &alpha, &a1).unwrap()[(0, 0)];
    let m2 = orbit.moment_map(&g, &alpha, &a2).unwrap()[(0, 0)];
    let m_sum = orbit
        .moment_map(&g, &alpha, &a1.scale(2.0).add(&a2.scale(-0.5)))
        .unwrap()[(0, 0)];
    println!("  <mu, X1>              = {:+.6}{:+.6}i", m1.re, m1.im);
    println!("  <mu, X4>              = {:+.6}{:+.6}i", m2.re, m2.im);
    println!("  <mu, 2 X1 - 0.5 X4>   = {:+.6}{:+.6}i", m_sum.re, m_sum.im);
    let lin = (m_sum - (m1 * 2.0 - m2 * 0.5)).norm();
    println!("  linearity defect      = {lin:.3e}");
}
