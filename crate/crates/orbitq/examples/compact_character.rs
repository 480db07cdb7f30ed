//! Character exponents of stabilizer-valued velocity curves: the value only
//! depends on the endpoint through the datum character, and is invariant
//! under moving the evaluation point around the orbit.

use num_complex::Complex64;
use orbitq::flows::{character_value, PathSpec};
use orbitq::liealg::{builtin, BuiltinName, Covector};
use orbitq::numerics::RVec;
use orbitq::orbit::{build_orbit, DeltaConvention, IntegralDatum};
use rand::{Rng, SeedableRng};
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

    let segment = algebra
        .basis_element(0)
        .scale(0.3)
        .add(&algebra.basis_element(3).scale(0.7));
    let spec = PathSpec::constant(segment);

    for multiplicity in [1usize, 3] {
        let value =
            character_value(&orbit, &algebra.group_identity(), &spec, multiplicity).unwrap();
        let expected = Complex64::new(multiplicity as f64, 0.0)
            * (Complex64::new(2.0, 1.0) * 0.3).exp();
        println!(
            "multiplicity {multiplicity}: value {:+.9}{:+.9}i  (closed form {:+.9}{:+.9}i)",
            value.re, value.im, expected.re, expected.im
        );
        assert!((value - expected).norm() < 1e-9);
    }

    let value = character_value(&orbit, &algebra.group_identity(), &spec, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst = 0.0f64;
    for _ in 0..8 {
        let a = algebra.group_exp(
            &algebra.element(RVec::from_fn(6, |_, _| rng.random_range(-0.6..0.6))),
        );
        let moved = character_value(&orbit, &a, &spec, 1).unwrap();
        worst = worst.max((moved - value).norm());
    }
    println!("max deviation over 8 random evaluation points: {worst:.3e}");

    let off_stabilizer = PathSpec::constant(algebra.basis_element(1));
    match character_value(&orbit, &algebra.group_identity(), &off_stabilizer, 1) {
        Err(e) => println!("velocity outside the stabilizer is rejected: {e}"),
        Ok(_) => unreachable!("X2 is not a stabilizer direction"),
    }
}
