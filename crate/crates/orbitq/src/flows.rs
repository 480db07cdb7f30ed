//! Time-dependent machinery: group paths integrated from velocity curves,
//! coadjoint isotopies, the three evaluation routes for the holonomy scalar
//! kappa, compact-direction character values, horospherical factorization
//! with synthetic sections on the dense cell, and bundle-flow checks.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{OrbitqError, Result};
use crate::liealg::{AlgebraElement, Covector, GroupElement, MatrixLieAlgebra};
use crate::numerics::{self, CMat, CVec, RVec};
use crate::orbit::{HyperbolicOrbit, OrbitPoint};

/// Velocity curve of a group path on [0, 1].
#[derive(Clone)]
pub enum Velocity {
    /// List of (duration, velocity) segments; durations are rescaled to
    /// cover [0, 1].
    Piecewise(Vec<(f64, AlgebraElement)>),
    Callback(Arc<dyn Fn(f64) -> AlgebraElement + Send + Sync>),
}

impl fmt::Debug for Velocity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Velocity::Piecewise(segs) => write!(f, "Piecewise({} segments)", segs.len()),
            Velocity::Callback(_) => write!(f, "Callback"),
        }
    }
}

/// A velocity curve plus the sampling resolution used to integrate it.
#[derive(Debug, Clone)]
pub struct PathSpec {
    pub velocity: Velocity,
    pub steps: usize,
}

pub const DEFAULT_PATH_STEPS: usize = 1000;

impl PathSpec {
    pub fn constant(a: AlgebraElement) -> PathSpec {
        PathSpec { velocity: Velocity::Piecewise(vec![(1.0, a)]), steps: DEFAULT_PATH_STEPS }
    }

    pub fn piecewise(segments: Vec<(f64, AlgebraElement)>, steps: usize) -> PathSpec {
        PathSpec { velocity: Velocity::Piecewise(segments), steps }
    }

    pub fn from_fn<F>(f: F, steps: usize) -> PathSpec
    where
        F: Fn(f64) -> AlgebraElement + Send + Sync + 'static,
    {
        PathSpec { velocity: Velocity::Callback(Arc::new(f)), steps }
    }

    pub fn with_steps(mut self, steps: usize) -> PathSpec {
        self.steps = steps;
        self
    }

    /// The velocity at normalized time t in [0, 1].
    pub fn velocity_at(&self, t: f64) -> AlgebraElement {
        match &self.velocity {
            Velocity::Callback(f) => f(t.clamp(0.0, 1.0)),
            Velocity::Piecewise(segments) => {
                let total: f64 = segments.iter().map(|(d, _)| d).sum();
                let mut target = t.clamp(0.0, 1.0) * total;
                for (d, a) in segments {
                    if target <= *d || std::ptr::eq(a, &segments.last().unwrap().1) {
                        return a.clone();
                    }
                    target -= d;
                }
                segments.last().expect("empty path").1.clone()
            }
        }
    }
}

/// Group samples g_0 = e, ..., g_steps of the right-invariant flow of a
/// velocity curve.
#[derive(Debug, Clone)]
pub struct GroupPath {
    pub samples: Vec<GroupElement>,
    pub steps: usize,
}

impl GroupPath {
    pub fn end(&self) -> &GroupElement {
        self.samples.last().expect("path has at least the identity sample")
    }

    /// The flow at arbitrary t, sub-stepped from the nearest lower node.
    pub fn at(&self, algebra: &MatrixLieAlgebra, spec: &PathSpec, t: f64) -> GroupElement {
        let t = t.clamp(0.0, 1.0);
        let pos = t * self.steps as f64;
        let j = (pos.floor() as usize).min(self.steps);
        let base = self.samples[j].clone();
        let tau = t - j as f64 / self.steps as f64;
        if tau <= 0.0 {
            return base;
        }
        let sub = 4;
        let dt = tau / sub as f64;
        let mut g = base;
        for k in 0..sub {
            let tm = j as f64 / self.steps as f64 + (k as f64 + 0.5) * dt;
            g = algebra.group_mul(&algebra.group_exp(&spec.velocity_at(tm).scale(dt)), &g);
        }
        g
    }
}

/// Integrate the right-invariant equation with exact-exponential midpoint
/// steps, so group constraints are preserved without renormalization.
pub fn integrate_group_path(algebra: &MatrixLieAlgebra, spec: &PathSpec) -> GroupPath {
    integrate_with_steps(algebra, spec, spec.steps)
}

pub fn integrate_with_steps(
    algebra: &MatrixLieAlgebra,
    spec: &PathSpec,
    steps: usize,
) -> GroupPath {
    let steps = steps.max(1);
    let dt = 1.0 / steps as f64;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut g = algebra.group_identity();
    samples.push(g.clone());
    for j in 0..steps {
        let tm = (j as f64 + 0.5) * dt;
        g = algebra.group_mul(&algebra.group_exp(&spec.velocity_at(tm).scale(dt)), &g);
        samples.push(g.clone());
    }
    GroupPath { samples, steps }
}

/// Move an orbit point along the isotopy to time t.
pub fn isotopy_apply(
    orbit: &HyperbolicOrbit,
    spec: &PathSpec,
    path: &GroupPath,
    x: &OrbitPoint,
    t: f64,
) -> Result<OrbitPoint> {
    let g = path.at(&orbit.algebra, spec, t);
    orbit.point(orbit.algebra.group_mul(&g, &x.rep))
}

fn centrality_defect(algebra: &MatrixLieAlgebra, g1: &GroupElement) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b617070);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let a = algebra.element(RVec::from_fn(algebra.d, |_, _| rng.random_range(-0.8..0.8)));
        let h = algebra.group_exp(&a);
        let defect = (&g1.matrix * &h.matrix - &h.matrix * &g1.matrix).norm()
            / (1.0 + g1.matrix.norm()) / (1.0 + h.matrix.norm());
        worst = worst.max(defect);
    }
    worst
}

/// Factor an element of the stabilizer group as rep * exp(A) over the datum
/// table (identity rep first) and return (Lambda(rep), A).
fn factor_over_datum(
    orbit: &HyperbolicOrbit,
    g: &GroupElement,
) -> Result<(CMat, AlgebraElement)> {
    let algebra = &orbit.algebra;
    let m = orbit.k_datum.dim_h;
    let identity_rep = (algebra.group_identity(), CMat::identity(m, m));
    let candidates =
        std::iter::once(&identity_rep).chain(orbit.k_datum.component_table.iter());
    for (rep, lam) in candidates {
        let quotient = algebra.group_mul(&algebra.group_inv(rep)?, g);
        let a = match algebra.group_log(&quotient) {
            Ok(a) => a,
            Err(_) => continue,
        };
        let in_l = (orbit.project_l(&a).coeffs - &a.coeffs).norm();
        if in_l > 1e-8 * (1.0 + a.coeffs.norm()) {
            continue;
        }
        return Ok((lam.clone(), a));
    }
    Err(OrbitqError::FactorizationError {
        reason: "endpoint is not rep * exp(A) with A in the stabilizer algebra for any \
                 tabulated component representative"
            .into(),
    })
}

/// The datum character on the stabilizer group: Lambda(rep) e^{i eta(A)}
/// times the modular factor of g itself.
pub fn phi_group(orbit: &HyperbolicOrbit, g: &GroupElement) -> Result<CMat> {
    let (lam, a) = factor_over_datum(orbit, g)?;
    let scalar = Complex64::new(0.0, orbit.eta.pair(&a)).exp()
        * Complex64::new(orbit.delta_group(g)?, 0.0);
    Ok(lam * scalar)
}

fn scalar_of(m: &CMat) -> Result<Complex64> {
    let s = m[(0, 0)];
    let defect = (m - CMat::identity(m.nrows(), m.ncols()) * s).norm();
    if defect > 1e-9 * (1.0 + m.norm()) {
        return Err(OrbitqError::FactorizationError {
            reason: format!("datum value is not scalar (defect {defect:.3e}); no single holonomy"),
        });
    }
    Ok(s)
}

/// Direct route: factor the path endpoint over the datum table.
pub fn kappa_direct(orbit: &HyperbolicOrbit, path: &GroupPath) -> Result<Complex64> {
    kappa_direct_at(orbit, path.end())
}

pub fn kappa_direct_at(orbit: &HyperbolicOrbit, g1: &GroupElement) -> Result<Complex64> {
    let defect = centrality_defect(&orbit.algebra, g1);
    if defect > 1e-7 {
        return Err(OrbitqError::NotCentral { defect });
    }
    let (lam, a) = factor_over_datum(orbit, g1)?;
    let modular = orbit.delta(&orbit.project_l(&a)).exp();
    if (modular - 1.0).abs() > 1e-8 {
        return Err(OrbitqError::FactorizationError {
            reason: format!(
                "central endpoint carries a nonunit modular factor {modular:.6e}"
            ),
        });
    }
    let kappa = scalar_of(&lam)? * Complex64::new(0.0, orbit.eta.pair(&a)).exp()
        * Complex64::new(modular, 0.0);
    if (kappa.norm() - 1.0).abs() > 1e-9 {
        return Err(OrbitqError::FactorizationError {
            reason: format!("holonomy modulus {:.12} departs from the unit circle", kappa.norm()),
        });
    }
    Ok(kappa)
}

/// Fixed-point route: exponentiated midpoint quadrature of the Hamiltonian
/// along the path, evaluated at a point the whole isotopy fixes.
pub fn kappa_ode_fixed_point(
    orbit: &HyperbolicOrbit,
    spec: &PathSpec,
    x0: &OrbitPoint,
) -> Result<Complex64> {
    let steps = spec.steps.max(1);
    let mut max_velocity: f64 = 0.0;
    for j in 0..=steps {
        let a = spec.velocity_at(j as f64 / steps as f64);
        max_velocity =
            max_velocity.max(orbit.vector_field(&a, x0).coeffs.norm() / (1.0 + a.coeffs.norm()));
    }
    if max_velocity > 1e-7 {
        return Err(OrbitqError::NotFixedPoint { max_velocity });
    }
    let dt = 1.0 / steps as f64;
    let mut exponent = Complex64::new(0.0, 0.0);
    for j in 0..steps {
        let a = spec.velocity_at((j as f64 + 0.5) * dt);
        exponent += orbit.hamiltonian_real(&a, &x0.rep)? * dt;
    }
    Ok(exponent.exp())
}

/// Scan candidate representatives for a point fixed by the whole isotopy.
pub fn find_fixed_point(
    orbit: &HyperbolicOrbit,
    spec: &PathSpec,
    candidates: &[GroupElement],
) -> Option<OrbitPoint> {
    let steps = spec.steps.clamp(1, 64);
    for rep in candidates {
        let Ok(point) = orbit.point(rep.clone()) else { continue };
        let mut max_velocity: f64 = 0.0;
        for j in 0..=steps {
            let a = spec.velocity_at(j as f64 / steps as f64);
            max_velocity = max_velocity
                .max(orbit.vector_field(&a, &point).coeffs.norm() / (1.0 + a.coeffs.norm()));
        }
        if max_velocity < 1e-7 {
            return Some(point);
        }
    }
    None
}

/// A fixed-point-anchored sweep surface: the isotopy applied to a connector
/// path c(s) = exp(sW) moving the anchor to the target.
#[derive(Debug, Clone)]
pub struct SweepChain {
    pub spec: PathSpec,
    pub anchor: OrbitPoint,
    pub target: OrbitPoint,
    pub connector_w: AlgebraElement,
    pub n_s: usize,
    pub n_t: usize,
    path: GroupPath,
}

impl SweepChain {
    /// Build the chain and verify its boundary behavior: the anchor is held
    /// fixed, the isotopy closes over the connector, and sampled grid
    /// representatives satisfy the group constraint.
    pub fn new(
        orbit: &HyperbolicOrbit,
        spec: &PathSpec,
        anchor: OrbitPoint,
        connector_w: Option<AlgebraElement>,
        n_s: usize,
        n_t: usize,
    ) -> Result<SweepChain> {
        let algebra = &orbit.algebra;
        let n_s = n_s.max(1);
        let n_t = n_t.max(1);
        let w = match connector_w {
            Some(w) => w,
            None => {
                let mut chosen = None;
                for i in 0..algebra.d {
                    let b = algebra.basis_element(i);
                    if orbit.vector_field(&b, &anchor).coeffs.norm()
                        > 1e-8 * (1.0 + anchor.xi.coeffs.norm())
                    {
                        chosen = Some(b);
                        break;
                    }
                }
                chosen.ok_or_else(|| OrbitqError::BoundaryMismatch {
                    reason: "no basis direction moves the anchor; connector must be supplied"
                        .into(),
                })?
            }
        };

        let path = integrate_with_steps(algebra, spec, 2 * n_t);
        let chain = SweepChain {
            spec: spec.clone(),
            anchor,
            target: OrbitPoint {
                rep: algebra.group_identity(),
                xi: Covector::new(RVec::zeros(algebra.d)),
            },
            connector_w: w,
            n_s,
            n_t,
            path,
        };
        let target = orbit.point(chain.connector_rep(orbit, 1.0))?;
        let chain = SweepChain { target, ..chain };

        let xi_scale = 1.0 + chain.anchor.xi.coeffs.norm();
        for k in [0, chain.path.steps / 3, chain.path.steps / 2, chain.path.steps] {
            let moved = algebra.coadjoint_action(&chain.path.samples[k], &chain.anchor.xi)?;
            let drift = (moved.coeffs - &chain.anchor.xi.coeffs).norm();
            if drift > 1e-6 * xi_scale {
                return Err(OrbitqError::BoundaryMismatch {
                    reason: format!("isotopy moves the anchor by {drift:.3e}"),
                });
            }
        }
        for i in 0..=4 {
            let s = i as f64 / 4.0;
            let c_rep = chain.connector_rep(orbit, s);
            let c_xi = algebra.coadjoint_action(&c_rep, &orbit.eta)?;
            let end_xi = algebra
                .coadjoint_action(&algebra.group_mul(chain.path.end(), &c_rep), &orbit.eta)?;
            let gap = (end_xi.coeffs - &c_xi.coeffs).norm();
            if gap > 1e-6 * xi_scale {
                return Err(OrbitqError::BoundaryMismatch {
                    reason: format!("isotopy fails to close over the connector (gap {gap:.3e})"),
                });
            }
            let residual = c_rep.constraint_residual();
            if residual > 1e-7 {
                return Err(OrbitqError::BoundaryMismatch {
                    reason: format!("grid representative leaves the group ({residual:.3e})"),
                });
            }
        }
        Ok(chain)
    }

    fn connector_rep(&self, orbit: &HyperbolicOrbit, s: f64) -> GroupElement {
        let algebra = &orbit.algebra;
        algebra.group_mul(&algebra.group_exp(&self.connector_w.scale(s)), &self.anchor.rep)
    }

    /// Representative of the surface point at connector coordinate s and
    /// half-grid time index k (time k / (2 n_t)).
    pub fn rep(&self, orbit: &HyperbolicOrbit, s: f64, half_idx: usize) -> GroupElement {
        orbit
            .algebra
            .group_mul(&self.path.samples[half_idx], &self.connector_rep(orbit, s))
    }

    pub fn xi(&self, orbit: &HyperbolicOrbit, s: f64, half_idx: usize) -> Result<Covector> {
        orbit.algebra.coadjoint_action(&self.rep(orbit, s, half_idx), &orbit.eta)
    }
}

/// Action route: midpoint quadrature of the Kirillov form over the sweep
/// surface plus the Hamiltonian line term along the evaluation loop. The
/// s-derivative is a full-step central difference resolved through
/// tangent_solve; the t-derivative enters exactly through the velocity
/// field. Returns (kappa, hat part, tilde part) of the exponent.
pub fn kappa_action(
    orbit: &HyperbolicOrbit,
    chain: &SweepChain,
) -> Result<(Complex64, f64, f64)> {
    let n_s = chain.n_s;
    let n_t = chain.n_t;
    let ds = 1.0 / n_s as f64;
    let dt = 1.0 / n_t as f64;
    let mut exponent = Complex64::new(0.0, 0.0);
    for j in 0..n_t {
        let half_idx = 2 * j + 1;
        let t_mid = (j as f64 + 0.5) * dt;
        let a_t = chain.spec.velocity_at(t_mid);
        for i in 0..n_s {
            let s_mid = (i as f64 + 0.5) * ds;
            let rep_mid = chain.rep(orbit, s_mid, half_idx);
            let point_mid = orbit.point(rep_mid)?;
            let plus = chain.xi(orbit, s_mid + ds, half_idx)?;
            let minus = chain.xi(orbit, s_mid - ds, half_idx)?;
            let chord = Covector::new((plus.coeffs - minus.coeffs) / (2.0 * ds));
            let b_s = orbit.tangent_solve(&point_mid, &chord)?;
            let integrand = orbit
                .hamiltonian_real(&orbit.algebra.bracket(&b_s, &a_t), &point_mid.rep)?;
            exponent += integrand * ds * dt;
        }
        let loop_rep = chain.rep(orbit, 1.0, half_idx);
        exponent += orbit.hamiltonian_real(&a_t, &loop_rep)? * dt;
    }
    Ok((exponent.exp(), exponent.im, exponent.re))
}

/// Combined report over every applicable route.
#[derive(Debug, Clone)]
pub struct KappaReport {
    pub kappa_direct: Complex64,
    pub kappa_ode: Option<Complex64>,
    pub kappa_action: Option<Complex64>,
    pub action_hat: Option<f64>,
    pub action_tilde: Option<f64>,
    pub discrepancies: Vec<(String, f64)>,
    pub grid: (usize, usize),
}

/// Evaluate every route that applies: the direct factorization always, the
/// fixed-point and action routes when a fixed anchor is available.
pub fn kappa_report(
    orbit: &HyperbolicOrbit,
    spec: &PathSpec,
    anchor_candidates: &[GroupElement],
    connector_w: Option<AlgebraElement>,
    n_s: usize,
    n_t: usize,
) -> Result<KappaReport> {
    let path = integrate_group_path(&orbit.algebra, spec);
    let direct = kappa_direct(orbit, &path)?;
    let mut report = KappaReport {
        kappa_direct: direct,
        kappa_ode: None,
        kappa_action: None,
        action_hat: None,
        action_tilde: None,
        discrepancies: Vec::new(),
        grid: (n_s, n_t),
    };
    let Some(anchor) = find_fixed_point(orbit, spec, anchor_candidates) else {
        return Ok(report);
    };
    let ode = kappa_ode_fixed_point(orbit, spec, &anchor)?;
    report.kappa_ode = Some(ode);
    report.discrepancies.push(("direct-ode".into(), (direct - ode).norm()));

    let chain = SweepChain::new(orbit, spec, anchor, connector_w, n_s, n_t)?;
    let (action, hat, tilde) = kappa_action(orbit, &chain)?;
    report.kappa_action = Some(action);
    report.action_hat = Some(hat);
    report.action_tilde = Some(tilde);
    report.discrepancies.push(("direct-action".into(), (direct - action).norm()));
    report.discrepancies.push(("ode-action".into(), (ode - action).norm()));
    Ok(report)
}

/// Character value for a stabilizer-valued velocity curve conjugated to the
/// point a * eta, with dual-route verification against the linear form.
pub fn character_value(
    orbit: &HyperbolicOrbit,
    a: &GroupElement,
    c_path: &PathSpec,
    multiplicity: usize,
) -> Result<Complex64> {
    let algebra = &orbit.algebra;
    let steps = c_path.steps.max(1);
    let dt = 1.0 / steps as f64;

    let mut worst = 0.0f64;
    for j in 0..=steps {
        let c = c_path.velocity_at(j as f64 / steps as f64);
        let residual = (orbit.project_l(&c).coeffs - &c.coeffs).norm();
        worst = worst.max(residual / (1.0 + c.coeffs.norm()));
    }
    if worst > 1e-9 {
        return Err(OrbitqError::NotInLevi { residual: worst });
    }

    let mut exponent = Complex64::new(0.0, 0.0);
    let mut c_integral = algebra.zero();
    for j in 0..steps {
        let c = c_path.velocity_at((j as f64 + 0.5) * dt);
        let moved = algebra.adjoint_action(a, &c)?;
        exponent += orbit.hamiltonian_real(&moved, a)? * dt;
        c_integral = c_integral.add(&c.scale(dt));
    }
    let primary = Complex64::new(multiplicity as f64, 0.0) * exponent.exp();
    let linear = Complex64::new(multiplicity as f64, 0.0)
        * orbit.phi_real(&c_integral).exp();
    let defect = (primary - linear).norm();
    if defect > 1e-8 * (1.0 + primary.norm()) {
        return Err(OrbitqError::CrossCheck { what: "character value".into(), defect });
    }
    Ok(primary)
}

/// Factor g as exp(n_minus) exp(a_l) exp(n_plus) over the graded blocks by
/// damped least-squares iteration, path-following from the identity when
/// the direct solve stalls.
pub fn horospherical_factor(
    orbit: &HyperbolicOrbit,
    g: &GroupElement,
) -> Result<(AlgebraElement, AlgebraElement, AlgebraElement)> {
    let algebra = &orbit.algebra;
    let n = algebra.n;
    let nm = orbit.uminus_basis.len();
    let nl = orbit.l_basis.len();
    let nu = orbit.u_basis.len();
    let dim = nm + nl + nu;

    let assemble = |x: &RVec| -> (AlgebraElement, AlgebraElement, AlgebraElement) {
        let mut n_minus = algebra.zero();
        for (i, b) in orbit.uminus_basis.iter().enumerate() {
            n_minus = n_minus.add(&b.scale(x[i]));
        }
        let mut a_l = algebra.zero();
        for (i, b) in orbit.l_basis.iter().enumerate() {
            a_l = a_l.add(&b.scale(x[nm + i]));
        }
        let mut n_plus = algebra.zero();
        for (i, b) in orbit.u_basis.iter().enumerate() {
            n_plus = n_plus.add(&b.scale(x[nm + nl + i]));
        }
        (n_minus, a_l, n_plus)
    };
    let solve_to = |target: &GroupElement, start: &RVec| -> Result<RVec> {
        let residual = |x: &RVec| -> RVec {
            let (n_minus, a_l, n_plus) = assemble(x);
            let product = algebra.group_mul(
                &algebra.group_mul(&algebra.group_exp(&n_minus), &algebra.group_exp(&a_l)),
                &algebra.group_exp(&n_plus),
            );
            let diff = &product.matrix - &target.matrix;
            RVec::from_iterator(n * n, diff.iter().copied())
        };
        numerics::gauss_newton(residual, start, 1e-11, 80)
    };

    let zero_start = RVec::zeros(dim);
    let mut solution = solve_to(g, &zero_start);
    if solution.is_err() {
        if let Ok(log_g) = algebra.group_log(g) {
            let stages = 8;
            let mut warm = zero_start.clone();
            let mut ok = true;
            for k in 1..=stages {
                let partial = algebra.group_exp(&log_g.scale(k as f64 / stages as f64));
                match solve_to(&partial, &warm) {
                    Ok(x) => warm = x,
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                solution = Ok(warm);
            }
        }
    }
    let x = solution.map_err(|_| OrbitqError::CellEscape {
        reason: "factorization iteration stalled; point lies outside the dense cell".into(),
    })?;
    let (n_minus, a_l, n_plus) = assemble(&x);
    let product = algebra.group_mul(
        &algebra.group_mul(&algebra.group_exp(&n_minus), &algebra.group_exp(&a_l)),
        &algebra.group_exp(&n_plus),
    );
    let residual = (&product.matrix - &g.matrix).norm();
    if residual > 1e-9 * (1.0 + g.matrix.norm()) {
        return Err(OrbitqError::CellEscape {
            reason: format!("factorization residual {residual:.3e} exceeds tolerance"),
        });
    }
    Ok((n_minus, a_l, n_plus))
}

/// Evaluate the synthetic polarized section with fiber seed v at g,
/// shifting by a tabulated component representative when g itself escapes
/// the dense cell.
pub fn eval_section(orbit: &HyperbolicOrbit, v: &CVec, g: &GroupElement) -> Result<CVec> {
    match eval_section_in_cell(orbit, v, g) {
        Ok(value) => Ok(value),
        Err(OrbitqError::CellEscape { .. }) => {
            for (rep, _) in &orbit.k_datum.component_table {
                let shifted =
                    orbit.algebra.group_mul(g, &orbit.algebra.group_inv(rep)?);
                if let Ok(value) = eval_section_in_cell(orbit, v, &shifted) {
                    let phi_rep = phi_group(orbit, rep)?;
                    let inv = phi_rep.clone().try_inverse().ok_or_else(|| {
                        OrbitqError::FactorizationError {
                            reason: "datum value is not invertible".into(),
                        }
                    })?;
                    return Ok(inv * value);
                }
            }
            Err(OrbitqError::CellEscape {
                reason: "point escapes the dense cell under every tabulated shift".into(),
            })
        }
        Err(e) => Err(e),
    }
}

fn eval_section_in_cell(orbit: &HyperbolicOrbit, v: &CVec, g: &GroupElement) -> Result<CVec> {
    let (_, a_l, _) = horospherical_factor(orbit, g)?;
    let exponent = -(Complex64::new(0.0, orbit.eta.pair(&a_l)) + orbit.delta(&a_l));
    Ok(v * exponent.exp())
}

/// Transport check report: the holonomy, sample accounting, and the worst
/// defects seen.
#[derive(Debug, Clone)]
pub struct TransportReport {
    pub kappa: Complex64,
    pub checked: usize,
    pub skipped: usize,
    pub max_defect: f64,
    pub ode_defect: f64,
}

/// Verify s(g1^{-1} g) = kappa s(g) over random samples in the dense cell,
/// plus the transport equation at t = 0 by finite differences.
pub fn verify_transport(
    orbit: &HyperbolicOrbit,
    spec: &PathSpec,
    v: &CVec,
    samples: usize,
    seed: u64,
) -> Result<TransportReport> {
    let algebra = &orbit.algebra;
    let path = integrate_group_path(algebra, spec);
    let kappa = kappa_direct(orbit, &path)?;
    let g1_inv = algebra.group_inv(path.end())?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0usize;
    let mut skipped = 0usize;
    let mut max_defect: f64 = 0.0;
    let mut attempts = 0usize;
    while checked < samples && attempts < 40 * samples.max(1) {
        attempts += 1;
        let a = algebra.element(RVec::from_fn(algebra.d, |_, _| rng.random_range(-0.7..0.7)));
        let g = algebra.group_exp(&a);
        let lhs = match eval_section(orbit, v, &algebra.group_mul(&g1_inv, &g)) {
            Ok(x) => x,
            Err(OrbitqError::CellEscape { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let rhs = match eval_section(orbit, v, &g) {
            Ok(x) => x * kappa,
            Err(OrbitqError::CellEscape { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        max_defect = max_defect.max((lhs - rhs).norm() / (1.0 + v.norm()));
        checked += 1;
    }

    let eps = 1e-6;
    let a0 = spec.velocity_at(0.0);
    let mut rng2 = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut ode_defect: f64 = 0.0;
    let mut ode_checked = 0;
    while ode_checked < 5 && ode_defect.is_finite() {
        let a = algebra.element(RVec::from_fn(algebra.d, |_, _| rng2.random_range(-0.5..0.5)));
        let g = algebra.group_exp(&a);
        let g_eps = path.at(algebra, spec, eps);
        let inv_eps = Complex64::new(1.0 / eps, 0.0);
        let through_path = (|| -> Result<CVec> {
            let moved = algebra.group_mul(&algebra.group_inv(&g_eps)?, &g);
            Ok((eval_section(orbit, v, &moved)? - eval_section(orbit, v, &g)?) * inv_eps)
        })();
        let through_exp = (|| -> Result<CVec> {
            let moved = algebra.group_mul(&algebra.group_exp(&a0.scale(eps)), &g);
            Ok(-(eval_section(orbit, v, &moved)? - eval_section(orbit, v, &g)?) * inv_eps)
        })();
        match (through_path, through_exp) {
            (Ok(d1), Ok(d2)) => {
                ode_defect = ode_defect.max((d1 - d2).norm() / (1.0 + v.norm()));
                ode_checked += 1;
            }
            _ => continue,
        }
    }

    Ok(TransportReport { kappa, checked, skipped, max_defect, ode_defect })
}

/// Bundle-flow report: the holonomy and the defect of Phi(g1) alpha against
/// kappa alpha.
#[derive(Debug, Clone)]
pub struct BundleFlowReport {
    pub kappa: Complex64,
    pub defect: f64,
}

/// Check that the time-one bundle flow scales the fiber frame by kappa.
pub fn bundle_flow_check(
    orbit: &HyperbolicOrbit,
    spec: &PathSpec,
    alpha: &CMat,
) -> Result<BundleFlowReport> {
    let path = integrate_group_path(&orbit.algebra, spec);
    let kappa = kappa_direct(orbit, &path)?;
    let phi = phi_group(orbit, path.end())?;
    let defect = (phi * alpha - alpha * kappa).norm() / (1.0 + alpha.norm());
    Ok(BundleFlowReport { kappa, defect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{builtin, BuiltinName};
    use crate::numerics::RMat;
    use crate::orbit::{build_orbit, DeltaConvention, IntegralDatum};

    fn lorentz_orbit(k: f64) -> HyperbolicOrbit {
        let la = builtin(&BuiltinName::So { p: 1, q: 3 }).unwrap();
        let mut eta = RVec::zeros(6);
        eta[0] = k;
        build_orbit(&la, &Covector::new(eta), IntegralDatum::trivial(1), DeltaConvention::FullTrace)
            .unwrap()
    }

    fn sl2_orbit_with_table() -> HyperbolicOrbit {
        let la = builtin(&BuiltinName::Sl { n: 2 }).unwrap();
        let mut eta = RVec::zeros(3);
        eta[0] = 1.0;
        let minus_id = GroupElement {
            matrix: -RMat::identity(2, 2),
            group_tag: la.group_tag,
        };
        let lam = CMat::identity(1, 1) * Complex64::new(-1.0, 0.0);
        let datum = IntegralDatum::new(1, vec![(minus_id, lam)]).unwrap();
        build_orbit(&la, &Covector::new(eta), datum, DeltaConvention::FullTrace).unwrap()
    }

    fn rotation_loop(orbit: &HyperbolicOrbit) -> PathSpec {
        PathSpec::constant(orbit.algebra.basis_element(3).scale(2.0 * std::f64::consts::PI))
    }

    fn sl2_rotation(orbit: &HyperbolicOrbit) -> PathSpec {
        let j = orbit.algebra.basis_element(2).add(&orbit.algebra.basis_element(1).scale(-1.0));
        PathSpec::constant(j.scale(std::f64::consts::PI))
    }

    #[test]
    fn path_integration_endpoints() {
        let orbit = lorentz_orbit(1.0);
        let la = &orbit.algebra;

        let zero = PathSpec::constant(la.zero());
        let path = integrate_group_path(la, &zero);
        assert!((path.end().matrix.clone() - RMat::identity(4, 4)).norm() < 1e-12);

        let loop_spec = rotation_loop(&orbit);
        let path = integrate_group_path(la, &loop_spec);
        assert!((path.end().matrix.clone() - RMat::identity(4, 4)).norm() < 1e-9);

        let sl = sl2_orbit_with_table();
        let pi_rotation = sl2_rotation(&sl);
        let path = integrate_group_path(&sl.algebra, &pi_rotation);
        assert!((path.end().matrix.clone() + RMat::identity(2, 2)).norm() < 1e-9);
    }

    #[test]
    fn path_satisfies_velocity_equation() {
        let orbit = lorentz_orbit(1.0);
        let la = &orbit.algebra;
        let spec = PathSpec::from_fn(
            {
                let x1 = la.basis_element(0);
                let x4 = la.basis_element(3);
                move |t| x1.scale(0.4 * (1.0 - t)).add(&x4.scale(1.3 * t))
            },
            200,
        );
        let path = integrate_group_path(la, &spec);
        let n = path.steps as f64;
        let tol = 10.0 / (n * n);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let j = rng.random_range(1..path.steps);
            let g_prev = &path.samples[j - 1].matrix;
            let g_next = &path.samples[j + 1].matrix;
            let g_here = &path.samples[j].matrix;
            let deriv = (g_next - g_prev) / (2.0 / n);
            let velocity = spec.velocity_at(j as f64 / n);
            let defect = (&deriv - &velocity.matrix * g_here).norm() / (1.0 + deriv.norm());
            assert!(defect < tol, "velocity defect {defect:.3e} at node {j}");
        }
        for g in &path.samples {
            assert!(g.constraint_residual() < 1e-7);
        }
    }

    #[test]
    fn isotopy_fixes_stabilized_points_and_solves_its_equation() {
        let orbit = lorentz_orbit(1.0);
        let la = &orbit.algebra;
        let spec = rotation_loop(&orbit);
        let path = integrate_group_path(la, &spec);

        let base = orbit.base_point();
        let at_zero = isotopy_apply(&orbit, &spec, &path, &base, 0.0).unwrap();
        assert!((at_zero.xi.coeffs.clone() - &base.xi.coeffs).norm() < 1e-12);
        for t in [0.3, 0.7, 1.0] {
            let moved = isotopy_apply(&orbit, &spec, &path, &base, t).unwrap();
            assert!((moved.xi.coeffs.clone() - &base.xi.coeffs).norm() < 1e-8);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let eps = 1e-5;
        for _ in 0..20 {
            let a = la.element(RVec::from_fn(6, |_, _| rng.random_range(-0.5..0.5)));
            let x = orbit.point(la.group_exp(&a)).unwrap();
            let t = rng.random_range(0.1..0.9);
            let plus = isotopy_apply(&orbit, &spec, &path, &x, t + eps).unwrap();
            let minus = isotopy_apply(&orbit, &spec, &path, &x, t - eps).unwrap();
            let fd = (plus.xi.coeffs - minus.xi.coeffs) / (2.0 * eps);
            let here = isotopy_apply(&orbit, &spec, &path, &x, t).unwrap();
            let exact = orbit.vector_field(&spec.velocity_at(t), &here);
            let rel = (fd - &exact.coeffs).norm() / (1.0 + exact.coeffs.norm());
            assert!(rel < 1e-4, "isotopy equation defect {rel:.3e}");
        }
    }

    #[test]
    fn direct_route_values() {
        let orbit = lorentz_orbit(1.0);
        let la = &orbit.algebra;

        let trivial = integrate_group_path(la, &PathSpec::constant(la.zero()));
        let kappa = kappa_direct(&orbit, &trivial).unwrap();
        assert!((kappa - Complex64::new(1.0, 0.0)).norm() < 1e-12);

        let path = integrate_group_path(la, &rotation_loop(&orbit));
        let kappa = kappa_direct(&orbit, &path).unwrap();
        assert!((kappa - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        assert!((kappa.norm() - 1.0).abs() < 1e-9);

        let sl = sl2_orbit_with_table();
        let path = integrate_group_path(&sl.algebra, &sl2_rotation(&sl));
        let kappa = kappa_direct(&sl, &path).unwrap();
        assert!((kappa - Complex64::new(-1.0, 0.0)).norm() < 1e-9);

        let boost = integrate_group_path(la, &PathSpec::constant(la.basis_element(1)));
        assert!(matches!(
            kappa_direct(&orbit, &boost),
            Err(OrbitqError::NotCentral { .. })
        ));
    }

    #[test]
    fn ode_route_values() {
        let orbit = lorentz_orbit(1.0);
        let la = &orbit.algebra;
        let base = orbit.base_point();

        let a = la.basis_element(0).scale(0.3).add(&la.basis_element(3).scale(0.7));
        let spec = PathSpec::constant(a.clone());
        let kappa = kappa_ode_fixed_point(&orbit, &spec, &base).unwrap();
        let expected = orbit.phi_real(&a).exp();
        assert!((kappa - expected).norm() < 1e-10);

        let kappa_loop =
            kappa_ode_fixed_point(&orbit, &rotation_loop(&orbit), &base).unwrap();
        assert!((kappa_loop - Complex64::new(1.0, 0.0)).norm() < 1e-9);

        let zero = kappa_ode_fixed_point(&orbit, &PathSpec::constant(la.zero()), &base).unwrap();
        assert!((zero - Complex64::new(1.0, 0.0)).norm() < 1e-12);

        let moving = PathSpec::constant(la.basis_element(1));
        assert!(matches!(
            kappa_ode_fixed_point(&orbit, &moving, &base),
            Err(OrbitqError::NotFixedPoint { .. })
        ));
    }

    #[test]
    fn chain_boundary_validation() {
        let orbit = lorentz_orbit(1.0);
        let la = &orbit.algebra;
        let w = la.basis_element(2).add(&la.basis_element(5));
        let spec = rotation_loop(&orbit);
        SweepChain::new(&orbit, &spec, orbit.base_point(), Some(w.clone()), 8, 8).unwrap();

        let open_spec = PathSpec::constant(la.basis_element(1));
        let err = SweepChain::new(&orbit, &open_spec, orbit.base_point(), Some(w), 8, 8);
        assert!(matches!(err, Err(OrbitqError::BoundaryMismatch { .. })));
    }

    #[test]
    fn degenerate_chain_matches_ode_route() {
        let orbit = lorentz_orbit(1.0);
        let spec = rotation_loop(&orbit);
        let chain = SweepChain::new(
            &orbit,
            &spec,
            orbit.base_point(),
            Some(orbit.algebra.zero()),
            8,
            16,
        )
        .unwrap();
        let (kappa, _, _) = kappa_action(&orbit, &chain).unwrap();
        let ode = kappa_ode_fixed_point(&orbit, &spec, &orbit.base_point()).unwrap();
        assert!((kappa - ode).norm() < 1e-9);
    }

    #[test]
    fn action_route_converges_at_second_order() {
        let orbit = lorentz_orbit(1.0);
        let la = &orbit.algebra;
        let spec = rotation_loop(&orbit);
        let w = la.basis_element(2).add(&la.basis_element(5));

        let mut errors = Vec::new();
        for n in [16usize, 32] {
            let chain =
                SweepChain::new(&orbit, &spec, orbit.base_point(), Some(w.clone()), n, n)
                    .unwrap();
            let (kappa, _, tilde) = kappa_action(&orbit, &chain).unwrap();
            errors.push((kappa - Complex64::new(1.0, 0.0)).norm());
            assert!((kappa.norm() - 1.0).abs() < 1e-2);
            assert!(tilde.abs() < 1e-2);
        }
        assert!(errors[0] > 1e-3 && errors[0] < 6e-3, "coarse error {:.3e}", errors[0]);
        let ratio = errors[0] / errors[1];
        assert!(ratio > 3.0 && ratio < 5.0, "convergence ratio {ratio:.2}");
    }

    #[test]
    fn action_route_is_point_independent() {
        let orbit = lorentz_orbit(1.0);
        let la = &orbit.algebra;
        let spec = rotation_loop(&orbit);
        let w = la.basis_element(2).add(&la.basis_element(5));
        let mut kappas = Vec::new();
        for scale in [0.6, 1.0, 1.4] {
            let chain = SweepChain::new(
                &orbit,
                &spec,
                orbit.base_point(),
                Some(w.scale(scale)),
                64,
                64,
            )
            .unwrap();
            let (kappa, _, _) = kappa_action(&orbit, &chain).unwrap();
            kappas.push(kappa);
        }
        for i in 0..kappas.len() {
            for j in i + 1..kappas.len() {
                assert!(
                    (kappas[i] - kappas[j]).norm() < 2e-3,
                    "targets {i} and {j} disagree: {} vs {}",
                    kappas[i],
                    kappas[j]
                );
            }
        }
    }

    #[test]
    fn full_report_routes_agree() {
        let orbit = lorentz_orbit(1.0);
        let la = &orbit.algebra;
        let spec = rotation_loop(&orbit);
        let w = la.basis_element(2).add(&la.basis_element(5));
        let report = kappa_report(
            &orbit,
            &spec,
            &[la.group_identity()],
            Some(w),
            64,
            64,
        )
        .unwrap();
        assert!((report.kappa_direct - report.kappa_ode.unwrap()).norm() < 1e-8);
        assert!((report.kappa_direct - report.kappa_action.unwrap()).norm() < 1e-3);
        assert!(report.action_tilde.unwrap().abs() < 1e-3);
    }

    #[test]
    fn character_values() {
        let orbit = lorentz_orbit(1.0);
        let la = &orbit.algebra;
        let e = la.group_identity();

        let zero = character_value(&orbit, &e, &PathSpec::constant(la.zero()), 3).unwrap();
        assert!((zero - Complex64::new(3.0, 0.0)).norm() < 1e-12);

        let c = la.basis_element(0).scale(0.3).add(&la.basis_element(3).scale(0.7));
        let spec = PathSpec::constant(c);
        let value = character_value(&orbit, &e, &spec, 1).unwrap();
        let expected = (Complex64::new(2.0, 1.0) * 0.3).exp();
        assert!((value - expected).norm() < 1e-8, "got {value}, expected {expected}");

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..5 {
            let a = la.group_exp(&la.element(RVec::from_fn(6, |_, _| rng.random_range(-0.6..0.6))));
            let moved = character_value(&orbit, &a, &spec, 1).unwrap();
            assert!((moved - value).norm() < 1e-9);
        }

        let off = PathSpec::constant(la.basis_element(1));
        assert!(matches!(
            character_value(&orbit, &e, &off, 1),
            Err(OrbitqError::NotInLevi { .. })
        ));
    }

    #[test]
    fn horospherical_round_trip() {
        let orbit = lorentz_orbit(1.0);
        let la = &orbit.algebra;

        let (nm, al, np) = horospherical_factor(&orbit, &la.group_identity()).unwrap();
        assert!(nm.coeffs.norm() < 1e-9 && al.coeffs.norm() < 1e-9 && np.coeffs.norm() < 1e-9);

        let g_minus = la.group_exp(&la.basis_element(1).add(&la.basis_element(5).scale(-1.0)).scale(0.2));
        let g_l = la.group_exp(&la.basis_element(0).scale(0.5));
        let g_plus = la.group_exp(&la.basis_element(1).add(&la.basis_element(5)).scale(0.3));
        let g = la.group_mul(&la.group_mul(&g_minus, &g_l), &g_plus);
        let (nm, al, np) = horospherical_factor(&orbit, &g).unwrap();
        let expected_minus = la.basis_element(1).add(&la.basis_element(5).scale(-1.0)).scale(0.2);
        let expected_l = la.basis_element(0).scale(0.5);
        let expected_plus = la.basis_element(1).add(&la.basis_element(5)).scale(0.3);
        assert!((nm.coeffs.clone() - &expected_minus.coeffs).norm() < 1e-8);
        assert!((al.coeffs.clone() - &expected_l.coeffs).norm() < 1e-8);
        assert!((np.coeffs.clone() - &expected_plus.coeffs).norm() < 1e-8);

        let (nm2, al2, np2) = horospherical_factor(&orbit, &g_l).unwrap();
        assert!(nm2.coeffs.norm() < 1e-9 && np2.coeffs.norm() < 1e-9);
        assert!((al2.coeffs.clone() - &expected_l.coeffs).norm() < 1e-9);

        let sl = sl2_orbit_with_table();
        let minus_id = GroupElement {
            matrix: -RMat::identity(2, 2),
            group_tag: sl.algebra.group_tag,
        };
        assert!(matches!(
            horospherical_factor(&sl, &minus_id),
            Err(OrbitqError::CellEscape { .. })
        ));
    }

    #[test]
    fn section_equivariance() {
        let orbit = lorentz_orbit(1.0);
        let la = &orbit.algebra;
        let v = CVec::from_element(1, Complex64::new(0.8, -0.3));

        let at_identity = eval_section(&orbit, &v, &la.group_identity()).unwrap();
        assert!((at_identity.clone() - &v).norm() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = la.element(RVec::from_fn(6, |_, _| rng.random_range(-0.5..0.5)));
            let g = la.group_exp(&a);
            let mut b = la.zero();
            for u in &orbit.u_basis {
                b = b.add(&u.scale(rng.random_range(-0.8..0.8)));
            }
            let left = eval_section(&orbit, &v, &la.group_mul(&g, &la.group_exp(&b)));
            let right = eval_section(&orbit, &v, &g);
            match (left, right) {
                (Ok(l), Ok(r)) => assert!((l - r).norm() < 1e-8),
                _ => panic!("cell escape on a small sample"),
            }
        }

        for _ in 0..10 {
            let a = la.element(RVec::from_fn(6, |_, _| rng.random_range(-0.4..0.4)));
            let g = la.group_exp(&a);
            let mut l_dir = la.zero();
            for b in &orbit.l_basis {
                l_dir = l_dir.add(&b.scale(rng.random_range(-0.05..0.05)));
            }
            let shifted = eval_section(&orbit, &v, &la.group_mul(&g, &la.group_exp(&l_dir)));
            let base = eval_section(&orbit, &v, &g);
            if let (Ok(s), Ok(b0)) = (shifted, base) {
                let factor = (-(Complex64::new(0.0, orbit.eta.pair(&l_dir))
                    + orbit.delta(&l_dir)))
                .exp();
                assert!((s - b0 * factor).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn section_shifts_through_component_table() {
        let sl = sl2_orbit_with_table();
        let la = &sl.algebra;
        let v = CVec::from_element(1, Complex64::new(1.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let a = la.element(RVec::from_fn(3, |_, _| rng.random_range(-0.5..0.5)));
            let g = la.group_exp(&a);
            let minus_g = GroupElement { matrix: -g.matrix.clone(), group_tag: g.group_tag };
            let s_plus = eval_section(&sl, &v, &g).unwrap();
            let s_minus = eval_section(&sl, &v, &minus_g).unwrap();
            assert!((s_minus + &s_plus).norm() < 1e-9);
        }
    }

    #[test]
    fn transport_over_central_loops() {
        let sl = sl2_orbit_with_table();
        let spec = sl2_rotation(&sl);
        let v = CVec::from_element(1, Complex64::new(0.6, 0.4));
        let report = verify_transport(&sl, &spec, &v, 20, 42).unwrap();
        assert!(report.checked >= 20);
        assert!((report.kappa - Complex64::new(-1.0, 0.0)).norm() < 1e-9);
        assert!(report.max_defect < 1e-7, "transport defect {:.3e}", report.max_defect);
        assert!(report.ode_defect < 1e-4, "ode defect {:.3e}", report.ode_defect);

        let orbit = lorentz_orbit(1.0);
        let spec = rotation_loop(&orbit);
        let report = verify_transport(&orbit, &spec, &v, 10, 1).unwrap();
        assert!((report.kappa - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        assert!(report.max_defect < 1e-7);
    }

    #[test]
    fn bundle_flow_scales_frames() {
        let orbit = lorentz_orbit(1.0);
        let trivial = PathSpec::constant(orbit.algebra.zero());
        let alpha = CMat::identity(1, 1) * Complex64::new(0.3, 0.9);
        let report = bundle_flow_check(&orbit, &trivial, &alpha).unwrap();
        assert!((report.kappa - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(report.defect < 1e-12);

        let sl = sl2_orbit_with_table();
        let report = bundle_flow_check(&sl, &sl2_rotation(&sl), &CMat::identity(1, 1)).unwrap();
        assert!((report.kappa - Complex64::new(-1.0, 0.0)).norm() < 1e-9);
        assert!(report.defect < 1e-9);
        assert!((report.kappa.norm() - 1.0).abs() < 1e-9);
    }
}
