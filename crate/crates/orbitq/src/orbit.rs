//! Hyperbolic orbit machinery: the grading element, the nilradical split,
//! the characters delta and phi, Hamiltonians, Kirillov forms, the bundle
//! connection with its curvature, and the moment map.

use num_complex::Complex64;

use crate::error::{OrbitqError, Result};
use crate::liealg::{AlgebraElement, CElement, Covector, GroupElement, MatrixLieAlgebra};
use crate::numerics::{self, CMat, CVec, RMat, RVec};

/// How the modular character is derived from the trace over the nilradical.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaConvention {
    /// delta(A) = (1/2) Tr(ad A |_u), matching the square-root modular factor.
    HalfTrace,
    /// delta(A) = Tr(ad A |_u). Default.
    FullTrace,
}

impl DeltaConvention {
    pub fn trace_factor(self) -> f64 {
        match self {
            DeltaConvention::HalfTrace => 0.5,
            DeltaConvention::FullTrace => 1.0,
        }
    }

    /// Exponent applied to |det Ad(q)|_u| on the group side.
    pub fn det_power(self) -> f64 {
        self.trace_factor()
    }
}

/// The fiber dimension together with the unitary values of the datum on a
/// set of representatives, one per connected component of the stabilizer.
/// On the identity component the value exp(i eta(A)) Id is forced and is
/// not tabulated.
#[derive(Debug, Clone)]
pub struct IntegralDatum {
    pub dim_h: usize,
    pub component_table: Vec<(GroupElement, CMat)>,
}

impl IntegralDatum {
    pub fn new(dim_h: usize, component_table: Vec<(GroupElement, CMat)>) -> Result<Self> {
        if dim_h == 0 {
            return Err(OrbitqError::Config("datum fiber dimension must be positive".into()));
        }
        for (idx, (_, lam)) in component_table.iter().enumerate() {
            if lam.nrows() != dim_h || lam.ncols() != dim_h {
                return Err(OrbitqError::Config(format!(
                    "datum table entry {idx} is {}x{}, expected {dim_h}x{dim_h}",
                    lam.nrows(),
                    lam.ncols()
                )));
            }
            let defect = (lam.adjoint() * lam - CMat::identity(dim_h, dim_h)).norm();
            if defect > 1e-10 {
                return Err(OrbitqError::Config(format!(
                    "datum table entry {idx} is not unitary (defect {defect:.3e})"
                )));
            }
        }
        Ok(IntegralDatum { dim_h, component_table })
    }

    /// Datum with fiber dimension m and no extra components.
    pub fn trivial(dim_h: usize) -> Self {
        IntegralDatum { dim_h, component_table: Vec::new() }
    }
}

/// A point of the orbit: a group representative together with the covector
/// it moves the base functional to.
#[derive(Debug, Clone)]
pub struct OrbitPoint {
    pub rep: GroupElement,
    pub xi: Covector,
}

/// An orbit of a hyperbolic functional, with every derived structure cached:
/// the grading of the algebra by the commuting generator, the nilradical and
/// its opposite, the Levi factor, and the two characters entering phi.
#[derive(Debug, Clone)]
pub struct HyperbolicOrbit {
    pub algebra: MatrixLieAlgebra,
    pub eta: Covector,
    pub x0: AlgebraElement,
    pub grading: Vec<(f64, Vec<AlgebraElement>)>,
    pub l_basis: Vec<AlgebraElement>,
    pub u_basis: Vec<AlgebraElement>,
    pub uminus_basis: Vec<AlgebraElement>,
    pub delta_coeffs: RVec,
    pub delta_convention: DeltaConvention,
    pub k_datum: IntegralDatum,
    p_l: RMat,
    frame: RMat,
    frame_inv: RMat,
    n_minus: usize,
    n_l: usize,
    cluster_spans: Vec<(f64, usize, usize)>,
}

/// Solve Re Tr(X0 Xi) = eta(Xi) for X0 in the span of the basis.
pub fn x0_from_eta(algebra: &MatrixLieAlgebra, eta: &Covector) -> Result<AlgebraElement> {
    let d = algebra.d;
    if eta.coeffs.len() != d {
        return Err(OrbitqError::Config(format!(
            "functional has {} coefficients, algebra dimension is {d}",
            eta.coeffs.len()
        )));
    }
    let mut gram = RMat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            gram[(i, j)] = (&algebra.basis[i] * &algebra.basis[j]).trace();
        }
    }
    let svd = gram.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-12 * smax {
        return Err(OrbitqError::DegenerateTraceForm {
            cond: if smin > 0.0 { smax / smin } else { f64::INFINITY },
        });
    }
    let (coeffs, residual) = numerics::lstsq(&gram, &eta.coeffs);
    if residual > 1e-9 * (1.0 + eta.coeffs.norm()) {
        return Err(OrbitqError::DegenerateTraceForm { cond: smax / smin });
    }
    Ok(algebra.element(coeffs))
}

/// Build the full orbit structure for a hyperbolic functional.
pub fn build_orbit(
    algebra: &MatrixLieAlgebra,
    eta: &Covector,
    datum: IntegralDatum,
    convention: DeltaConvention,
) -> Result<HyperbolicOrbit> {
    let d = algebra.d;
    let x0 = x0_from_eta(algebra, eta)?;
    let ad0 = algebra.ad_matrix(&x0);
    let tol = 1e-7;
    let scale = 1.0 + ad0.norm();
    let clusters = numerics::clustered_real_eigenspaces(&ad0, tol)?;

    let mut grading: Vec<(f64, Vec<AlgebraElement>)> = Vec::new();
    let mut frame = RMat::zeros(d, d);
    let mut cluster_spans = Vec::new();
    let mut col = 0usize;
    let mut n_minus = 0usize;
    let mut n_l = 0usize;
    let mut saw_zero = false;
    for (r, vectors) in &clusters {
        let r_eff = if r.abs() <= tol * scale { 0.0 } else { *r };
        if r_eff == 0.0 {
            saw_zero = true;
        }
        let elems: Vec<AlgebraElement> =
            vectors.iter().map(|v| algebra.element(v.clone())).collect();
        cluster_spans.push((r_eff, col, vectors.len()));
        for v in vectors {
            frame.set_column(col, v);
            col += 1;
        }
        if r_eff < 0.0 {
            n_minus += vectors.len();
        } else if r_eff == 0.0 {
            n_l += vectors.len();
        }
        grading.push((r_eff, elems));
    }
    if !saw_zero && x0.coeffs.norm() > 0.0 {
        return Err(OrbitqError::NotHyperbolic {
            reason: "grading operator has no zero eigenvalue yet X0 must centralize itself".into(),
        });
    }

    let frame_inv = frame.clone().try_inverse().ok_or_else(|| OrbitqError::NotHyperbolic {
        reason: "graded eigenvectors do not span the algebra".into(),
    })?;

    let uminus_basis: Vec<AlgebraElement> = grading
        .iter()
        .filter(|(r, _)| *r < 0.0)
        .flat_map(|(_, e)| e.iter().cloned())
        .collect();
    let l_basis: Vec<AlgebraElement> = grading
        .iter()
        .filter(|(r, _)| *r == 0.0)
        .flat_map(|(_, e)| e.iter().cloned())
        .collect();
    let u_basis: Vec<AlgebraElement> = grading
        .iter()
        .filter(|(r, _)| *r > 0.0)
        .flat_map(|(_, e)| e.iter().cloned())
        .collect();

    for b in &l_basis {
        let mut v = RVec::zeros(d);
        for i in 0..d {
            v[i] = eta.pair(&algebra.bracket(&algebra.basis_element(i), b));
        }
        if v.norm() > 1e-8 * (1.0 + eta.coeffs.norm()) {
            return Err(OrbitqError::NotHyperbolic {
                reason: format!(
                    "zero-grading element fails to stabilize the functional (residual {:.3e})",
                    v.norm()
                ),
            });
        }
    }

    let mut selector = RMat::zeros(d, d);
    for i in n_minus..n_minus + n_l {
        selector[(i, i)] = 1.0;
    }
    let p_l = &frame * selector * &frame_inv;

    let factor = convention.trace_factor();
    let mut delta_coeffs = RVec::zeros(d);
    let u_range = (n_minus + n_l)..d;
    for j in 0..d {
        let projected = algebra.element(&p_l * algebra.basis_element(j).coeffs);
        let ad_in_frame = &frame_inv * algebra.ad_matrix(&projected) * &frame;
        let mut tr = 0.0;
        for i in u_range.clone() {
            tr += ad_in_frame[(i, i)];
        }
        delta_coeffs[j] = factor * tr;
    }

    let orbit = HyperbolicOrbit {
        algebra: algebra.clone(),
        eta: eta.clone(),
        x0,
        grading,
        l_basis,
        u_basis,
        uminus_basis,
        delta_coeffs,
        delta_convention: convention,
        k_datum: datum,
        p_l,
        frame,
        frame_inv,
        n_minus,
        n_l,
        cluster_spans,
    };
    orbit.check_datum_consistency()?;
    Ok(orbit)
}

fn apply_real(m: &RMat, v: &CVec) -> CVec {
    let re = RVec::from_iterator(v.len(), v.iter().map(|c| c.re));
    let im = RVec::from_iterator(v.len(), v.iter().map(|c| c.im));
    let re2 = m * re;
    let im2 = m * im;
    CVec::from_iterator(v.len(), re2.iter().zip(im2.iter()).map(|(a, b)| Complex64::new(*a, *b)))
}

impl HyperbolicOrbit {
    /// The point of the orbit moved to by a group representative.
    pub fn point(&self, rep: GroupElement) -> Result<OrbitPoint> {
        let xi = self.algebra.coadjoint_action(&rep, &self.eta)?;
        Ok(OrbitPoint { rep, xi })
    }

    /// The base point: identity representative over the defining functional.
    pub fn base_point(&self) -> OrbitPoint {
        OrbitPoint { rep: self.algebra.group_identity(), xi: self.eta.clone() }
    }

    /// Projection onto the zero-grading block along the nilradical and its
    /// opposite.
    pub fn project_l(&self, a: &AlgebraElement) -> AlgebraElement {
        self.algebra.element(&self.p_l * &a.coeffs)
    }

    pub fn project_l_c(&self, a: &CElement) -> CElement {
        self.algebra.celement(apply_real(&self.p_l, &a.coeffs))
    }

    /// The modular character as a linear functional on the algebra.
    pub fn delta(&self, a: &AlgebraElement) -> f64 {
        self.delta_coeffs.dot(&a.coeffs)
    }

    pub fn delta_c(&self, a: &CElement) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.delta_coeffs.len() {
            acc += a.coeffs[i] * self.delta_coeffs[i];
        }
        acc
    }

    /// phi(A) = i eta(P_l A) + delta(P_l A), complex-linear in A.
    pub fn phi(&self, a: &CElement) -> Complex64 {
        let p = self.project_l_c(a);
        Complex64::i() * self.eta.pair_c(&p) + self.delta_c(&p)
    }

    pub fn phi_real(&self, a: &AlgebraElement) -> Complex64 {
        let p = self.project_l(a);
        Complex64::i() * self.eta.pair(&p) + self.delta(&p)
    }

    /// The Hamiltonian h_B(g) = phi(Ad(g^-1) B).
    pub fn hamiltonian(&self, b: &CElement, g: &GroupElement) -> Result<Complex64> {
        let ginv = self.algebra.group_inv(g)?;
        let ad = self.algebra.adjoint_matrix(&ginv)?;
        let moved = self.algebra.celement(apply_real(&ad, &b.coeffs));
        Ok(self.phi(&moved))
    }

    pub fn hamiltonian_real(&self, b: &AlgebraElement, g: &GroupElement) -> Result<Complex64> {
        self.hamiltonian(&self.algebra.complexify(b), g)
    }

    /// The Kirillov form and its imaginary/real constituents at a point:
    /// (omega, omega_hat, omega_tilde) with omega = i*omega_hat + omega_tilde.
    pub fn kirillov_forms(
        &self,
        a: &AlgebraElement,
        b: &AlgebraElement,
        point: &OrbitPoint,
    ) -> Result<(Complex64, f64, f64)> {
        let c = self.algebra.bracket(a, b);
        let ginv = self.algebra.group_inv(&point.rep)?;
        let moved = self.algebra.adjoint_action(&ginv, &c)?;
        let moved_l = self.project_l(&moved);
        let hat = self.eta.pair(&moved_l);
        let tilde = self.delta(&moved_l);
        Ok((Complex64::new(tilde, hat), hat, tilde))
    }

    /// The fundamental vector field of B at a point, as a covector:
    /// component i is xi([X_i, B]).
    pub fn vector_field(&self, b: &AlgebraElement, point: &OrbitPoint) -> Covector {
        let d = self.algebra.d;
        let mut v = RVec::zeros(d);
        for i in 0..d {
            v[i] = point.xi.pair(&self.algebra.bracket(&self.algebra.basis_element(i), b));
        }
        Covector::new(v)
    }

    /// Matrix whose j-th column is the fundamental field of the j-th basis
    /// element at the point.
    pub fn tangent_matrix(&self, point: &OrbitPoint) -> RMat {
        let d = self.algebra.d;
        let mut m = RMat::zeros(d, d);
        for j in 0..d {
            let col = self.vector_field(&self.algebra.basis_element(j), point);
            m.set_column(j, &col.coeffs);
        }
        m
    }

    /// Minimum-norm B whose fundamental field at the point equals v.
    pub fn tangent_solve(&self, point: &OrbitPoint, v: &Covector) -> Result<AlgebraElement> {
        let m = self.tangent_matrix(point);
        let (coeffs, residual) = numerics::lstsq(&m, &v.coeffs);
        let tol = 1e-6 * (1.0 + v.coeffs.norm());
        if residual > tol {
            return Err(OrbitqError::NotTangent { residual, tol });
        }
        Ok(self.algebra.element(coeffs))
    }

    /// Connection value on the tangent vector determined by the direction B
    /// and the vertical part y, in the frame alpha over the representative g.
    pub fn connection_eval(
        &self,
        g: &GroupElement,
        alpha: &CMat,
        b: &CElement,
        y: &CMat,
    ) -> Result<CMat> {
        let m = self.k_datum.dim_h;
        let alpha_inv = invert_frame(alpha, m)?;
        let phi = self.hamiltonian(b, g)?;
        Ok(alpha_inv * (CMat::identity(m, m) * phi) * alpha + y)
    }

    /// The lifted Hamiltonian: Ad(alpha^-1) applied to h_A(g) Id.
    pub fn lifted_hamiltonian(
        &self,
        g: &GroupElement,
        alpha: &CMat,
        a: &AlgebraElement,
    ) -> Result<CMat> {
        let m = self.k_datum.dim_h;
        let alpha_inv = invert_frame(alpha, m)?;
        let h = self.hamiltonian_real(a, g)?;
        Ok(alpha_inv * (CMat::identity(m, m) * h) * alpha)
    }

    /// Pairing of the moment map at [g, alpha] with the direction A.
    pub fn moment_map(&self, g: &GroupElement, alpha: &CMat, a: &AlgebraElement) -> Result<CMat> {
        self.lifted_hamiltonian(g, alpha, a)
    }

    /// Curvature on the fundamental directions B, C at [g, alpha]:
    /// -h_[B,C] plus the commutator of the lifted Hamiltonians.
    pub fn curvature_eval(
        &self,
        g: &GroupElement,
        alpha: &CMat,
        b: &AlgebraElement,
        c: &AlgebraElement,
    ) -> Result<CMat> {
        let hb = self.lifted_hamiltonian(g, alpha, b)?;
        let hc = self.lifted_hamiltonian(g, alpha, c)?;
        let hbc = self.lifted_hamiltonian(g, alpha, &self.algebra.bracket(b, c))?;
        Ok(-hbc + (&hb * &hc - &hc * &hb))
    }

    /// Finite-difference check of the structure equation: returns the closed
    /// form and the value of d(connection) + [connection, connection]
    /// assembled from central differences along the group directions.
    pub fn curvature_fd_check(
        &self,
        g: &GroupElement,
        alpha: &CMat,
        b: &AlgebraElement,
        c: &AlgebraElement,
        step: f64,
    ) -> Result<(CMat, CMat)> {
        let closed = self.curvature_eval(g, alpha, b, c)?;
        let shift = |dir: &AlgebraElement, t: f64| -> GroupElement {
            self.algebra.group_mul(&self.algebra.group_exp(&dir.scale(t)), g)
        };
        let d_b_of_c = (self.lifted_hamiltonian(&shift(b, step), alpha, c)?
            - self.lifted_hamiltonian(&shift(b, -step), alpha, c)?)
            / Complex64::new(2.0 * step, 0.0);
        let d_c_of_b = (self.lifted_hamiltonian(&shift(c, step), alpha, b)?
            - self.lifted_hamiltonian(&shift(c, -step), alpha, b)?)
            / Complex64::new(2.0 * step, 0.0);
        let bracket_term = self.lifted_hamiltonian(g, alpha, &self.algebra.bracket(b, c))?;
        let hb = self.lifted_hamiltonian(g, alpha, b)?;
        let hc = self.lifted_hamiltonian(g, alpha, c)?;
        let fd = d_b_of_c - d_c_of_b + bracket_term + (&hb * &hc - &hc * &hb);
        Ok((closed, fd))
    }

    /// |det Ad(q)|_u| raised to the convention's exponent. Meaningful for q
    /// in the parabolic generated by the stabilizer and the nilradical.
    pub fn delta_group(&self, q: &GroupElement) -> Result<f64> {
        let n_u = self.algebra.d - self.n_minus - self.n_l;
        if n_u == 0 {
            return Ok(1.0);
        }
        let ad = self.algebra.adjoint_matrix(q)?;
        let in_frame = &self.frame_inv * ad * &self.frame;
        let start = self.n_minus + self.n_l;
        let block = in_frame.view((start, start), (n_u, n_u)).clone_owned();
        let det = block.lu().determinant();
        Ok(det.abs().powf(self.delta_convention.det_power()))
    }

    /// Norm of the component of an element lying outside the grading block
    /// of the given eigenvalue (outside all blocks if none matches).
    pub fn grading_projection_residual(&self, el: &AlgebraElement, r_target: f64) -> f64 {
        let ad_scale = 1.0 + self.algebra.ad_matrix(&self.x0).norm();
        let mut coords = &self.frame_inv * &el.coeffs;
        for (r, start, len) in &self.cluster_spans {
            if (r - r_target).abs() <= 1e-7 * ad_scale {
                for i in *start..*start + *len {
                    coords[i] = 0.0;
                }
            }
        }
        coords.norm()
    }

    /// A random element of the identity component of the stabilizer.
    pub fn l0_sample<R: rand::Rng>(&self, rng: &mut R) -> GroupElement {
        let mut a = self.algebra.zero();
        for b in &self.l_basis {
            a = a.add(&b.scale(rng.random_range(-1.0..1.0)));
        }
        self.algebra.group_exp(&a)
    }

    /// Cross-check the datum table: whenever two representatives differ by
    /// exp(A) with A in the stabilizer algebra, their values must differ by
    /// exp(i eta(A)).
    pub fn check_datum_consistency(&self) -> Result<()> {
        let table = &self.k_datum.component_table;
        for i in 0..table.len() {
            for j in 0..table.len() {
                if i == j {
                    continue;
                }
                let (rep_i, lam_i) = &table[i];
                let (rep_j, lam_j) = &table[j];
                let quotient =
                    self.algebra.group_mul(&self.algebra.group_inv(rep_j)?, rep_i);
                let a = match self.algebra.group_log(&quotient) {
                    Ok(a) => a,
                    Err(_) => continue,
                };
                if (self.project_l(&a).coeffs - &a.coeffs).norm() > 1e-8 * (1.0 + a.coeffs.norm())
                {
                    continue;
                }
                let expected = lam_j * Complex64::new(0.0, self.eta.pair(&a)).exp();
                let defect = (lam_i - expected).norm();
                if defect > 1e-8 {
                    return Err(OrbitqError::Config(format!(
                        "datum table entries {j} and {i} differ by a stabilizer exponential \
                         but their values disagree (defect {defect:.3e})"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn invert_frame(alpha: &CMat, m: usize) -> Result<CMat> {
    if alpha.nrows() != m || alpha.ncols() != m {
        return Err(OrbitqError::SingularFrame);
    }
    alpha.clone().try_inverse().ok_or(OrbitqError::SingularFrame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{builtin, BuiltinName};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lorentz() -> MatrixLieAlgebra {
        builtin(&BuiltinName::So { p: 1, q: 3 }).unwrap()
    }

    fn lorentz_orbit(k: f64, convention: DeltaConvention) -> HyperbolicOrbit {
        let la = lorentz();
        let mut eta = RVec::zeros(6);
        eta[0] = k;
        build_orbit(&la, &Covector::new(eta), IntegralDatum::trivial(1), convention).unwrap()
    }

    fn sl2() -> MatrixLieAlgebra {
        builtin(&BuiltinName::Sl { n: 2 }).unwrap()
    }

    fn sl2_orbit() -> HyperbolicOrbit {
        let la = sl2();
        let mut eta = RVec::zeros(3);
        eta[0] = 1.0;
        build_orbit(&la, &Covector::new(eta), IntegralDatum::trivial(1), DeltaConvention::FullTrace)
            .unwrap()
    }

    fn random_element<R: rand::Rng>(la: &MatrixLieAlgebra, rng: &mut R) -> AlgebraElement {
        la.element(RVec::from_fn(la.d, |_, _| rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn x0_solves_trace_equation() {
        let la = lorentz();
        let mut eta = RVec::zeros(6);
        eta[0] = 1.0;
        let x0 = x0_from_eta(&la, &Covector::new(eta)).unwrap();
        let mut expected = RVec::zeros(6);
        expected[0] = 0.5;
        assert!((x0.coeffs - expected).norm() < 1e-12);

        let la2 = sl2();
        let mut eta2 = RVec::zeros(3);
        eta2[0] = 1.0;
        let h0 = x0_from_eta(&la2, &Covector::new(eta2)).unwrap();
        assert!((h0.coeffs[0] - 0.5).abs() < 1e-12);
        assert!(h0.coeffs[1].abs() < 1e-12 && h0.coeffs[2].abs() < 1e-12);

        let zero = x0_from_eta(&la, &Covector::new(RVec::zeros(6))).unwrap();
        assert!(zero.coeffs.norm() == 0.0);
    }

    #[test]
    fn grading_eigenvalues_and_dimensions() {
        let orbit = lorentz_orbit(1.0, DeltaConvention::FullTrace);
        let summary: Vec<(f64, usize)> =
            orbit.grading.iter().map(|(r, e)| (*r, e.len())).collect();
        assert_eq!(summary.len(), 3);
        assert_relative_eq!(summary[0].0, -0.5, max_relative = 1e-9);
        assert_eq!(summary[0].1, 2);
        assert_eq!(summary[1].0, 0.0);
        assert_eq!(summary[1].1, 2);
        assert_relative_eq!(summary[2].0, 0.5, max_relative = 1e-9);
        assert_eq!(summary[2].1, 2);
    }

    #[test]
    fn nilradical_span_matches_hand_basis() {
        let orbit = lorentz_orbit(1.0, DeltaConvention::FullTrace);
        let d = 6;
        let mut m = RMat::zeros(d, 2);
        for (j, b) in orbit.u_basis.iter().enumerate() {
            m.set_column(j, &b.coeffs);
        }
        let p_computed = &m * (m.transpose() * &m).try_inverse().unwrap() * m.transpose();

        let mut e1 = RVec::zeros(d);
        e1[1] = 1.0;
        e1[5] = 1.0;
        let mut e2 = RVec::zeros(d);
        e2[2] = 1.0;
        e2[4] = 1.0;
        let mut h = RMat::zeros(d, 2);
        h.set_column(0, &(e1 / 2.0f64.sqrt()));
        h.set_column(1, &(e2 / 2.0f64.sqrt()));
        let p_hand = &h * h.transpose();
        assert!((p_computed - p_hand).norm() < 1e-10);
    }

    #[test]
    fn stabilizer_block_is_boost_and_rotation() {
        let orbit = lorentz_orbit(1.0, DeltaConvention::FullTrace);
        assert_eq!(orbit.l_basis.len(), 2);
        for b in &orbit.l_basis {
            for idx in [1usize, 2, 4, 5] {
                assert!(b.coeffs[idx].abs() < 1e-9);
            }
        }
    }

    #[test]
    fn delta_values_per_convention() {
        let full = lorentz_orbit(1.0, DeltaConvention::FullTrace);
        let la = full.algebra.clone();
        assert_relative_eq!(full.delta(&la.basis_element(0)), 2.0, max_relative = 1e-10);
        assert!(full.delta(&la.basis_element(3)).abs() < 1e-10);
        for idx in [1usize, 2, 4, 5] {
            assert!(full.delta(&la.basis_element(idx)).abs() < 1e-10);
        }
        let half = lorentz_orbit(1.0, DeltaConvention::HalfTrace);
        assert_relative_eq!(half.delta(&la.basis_element(0)), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn phi_on_generators() {
        for k in [1.0, 2.5] {
            let orbit = lorentz_orbit(k, DeltaConvention::FullTrace);
            let la = orbit.algebra.clone();
            let v = orbit.phi_real(&la.basis_element(0));
            assert!((v - Complex64::new(2.0, k)).norm() < 1e-10);
            assert!(orbit.phi_real(&la.basis_element(3)).norm() < 1e-10);
            let e1 = la.basis_element(1).add(&la.basis_element(5));
            assert!(orbit.phi_real(&e1).norm() < 1e-10);
        }
    }

    #[test]
    fn phi_is_complex_linear() {
        let orbit = lorentz_orbit(1.0, DeltaConvention::FullTrace);
        let la = orbit.algebra.clone();
        let a = la.complexify(&la.basis_element(0));
        let z = Complex64::new(0.3, -0.7);
        let lhs = orbit.phi(&a.scale(z));
        let rhs = z * orbit.phi(&a);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn hamiltonian_at_identity_and_commuting_pair() {
        let orbit = lorentz_orbit(1.0, DeltaConvention::FullTrace);
        let la = orbit.algebra.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let b = random_element(&la, &mut rng);
        let e = la.group_identity();
        let he = orbit.hamiltonian_real(&b, &e).unwrap();
        assert!((he - orbit.phi_real(&b)).norm() < 1e-12);

        let zero = la.bracket(&la.basis_element(0), &la.basis_element(3));
        assert!(zero.coeffs.norm() < 1e-12);
        for _ in 0..5 {
            let g = la.group_exp(&random_element(&la, &mut rng).scale(0.4));
            assert!(orbit.hamiltonian_real(&zero, &g).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn hamiltonian_is_representative_independent() {
        let orbit = lorentz_orbit(1.0, DeltaConvention::FullTrace);
        let la = orbit.algebra.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let b = random_element(&la, &mut rng);
            let g = la.group_exp(&random_element(&la, &mut rng).scale(0.5));
            let l = orbit.l0_sample(&mut rng);
            let lhs = orbit.hamiltonian_real(&b, &la.group_mul(&g, &l)).unwrap();
            let rhs = orbit.hamiltonian_real(&b, &g).unwrap();
            assert!((lhs - rhs).norm() < 1e-9 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn kirillov_form_splits_and_vanishes_on_commuting_pair() {
        let orbit = lorentz_orbit(1.0, DeltaConvention::FullTrace);
        let la = orbit.algebra.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = orbit.base_point();
        let (w, _, _) = orbit
            .kirillov_forms(&la.basis_element(0), &la.basis_element(3), &base)
            .unwrap();
        assert!(w.norm() < 1e-12);
        for _ in 0..20 {
            let a = random_element(&la, &mut rng);
            let b = random_element(&la, &mut rng);
            let g = la.group_exp(&random_element(&la, &mut rng).scale(0.5));
            let pt = orbit.point(g).unwrap();
            let (waa, _, _) = orbit.kirillov_forms(&a, &a, &pt).unwrap();
            assert!(waa.norm() < 1e-12);
            let (wab, hat, tilde) = orbit.kirillov_forms(&a, &b, &pt).unwrap();
            assert!((wab - Complex64::new(tilde, hat)).norm() < 1e-12);
        }
    }

    #[test]
    fn kirillov_hat_part_sl2() {
        let orbit = sl2_orbit();
        let la = orbit.algebra.clone();
        let base = orbit.base_point();
        let (_, hat, _) = orbit
            .kirillov_forms(&la.basis_element(1), &la.basis_element(2), &base)
            .unwrap();
        assert_relative_eq!(hat, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn vector_field_vanishes_on_stabilizer_and_matches_differences() {
        let orbit = lorentz_orbit(1.0, DeltaConvention::FullTrace);
        let la = orbit.algebra.clone();
        let base = orbit.base_point();
        for b in &orbit.l_basis {
            assert!(orbit.vector_field(b, &base).coeffs.norm() < 1e-9);
        }
        assert!(orbit.vector_field(&la.basis_element(3), &base).coeffs.norm() < 1e-9);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let step = 1e-5;
        for _ in 0..10 {
            let b = random_element(&la, &mut rng);
            let g = la.group_exp(&random_element(&la, &mut rng).scale(0.5));
            let pt = orbit.point(g.clone()).unwrap();
            let exact = orbit.vector_field(&b, &pt);
            let plus = la
                .coadjoint_action(&la.group_mul(&la.group_exp(&b.scale(step)), &g), &orbit.eta)
                .unwrap();
            let minus = la
                .coadjoint_action(&la.group_mul(&la.group_exp(&b.scale(-step)), &g), &orbit.eta)
                .unwrap();
            let fd = (plus.coeffs - minus.coeffs) / (2.0 * step);
            let scale = 1.0 + exact.coeffs.norm();
            assert!((exact.coeffs - fd).norm() < 1e-6 * scale);
        }

        let sl = sl2_orbit();
        let e_field = sl.vector_field(&sl.algebra.basis_element(1), &sl.base_point());
        assert!(e_field.coeffs.norm() > 0.5);
    }

    #[test]
    fn tangent_solve_reconstruction_and_rejection() {
        let orbit = lorentz_orbit(1.0, DeltaConvention::FullTrace);
        let la = orbit.algebra.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let base = orbit.base_point();

        let zero = orbit.tangent_solve(&base, &Covector::new(RVec::zeros(6))).unwrap();
        assert!(zero.coeffs.norm() < 1e-12);

        for _ in 0..10 {
            let b = random_element(&la, &mut rng);
            let g = la.group_exp(&random_element(&la, &mut rng).scale(0.4));
            let pt = orbit.point(g).unwrap();
            let v = orbit.vector_field(&b, &pt);
            let solved = orbit.tangent_solve(&pt, &v).unwrap();
            let back = orbit.vector_field(&solved, &pt);
            assert!((back.coeffs - &v.coeffs).norm() < 1e-7 * (1.0 + v.coeffs.norm()));
            let c = random_element(&la, &mut rng);
            let (w1, _, _) = orbit.kirillov_forms(&b, &c, &pt).unwrap();
            let (w2, _, _) = orbit.kirillov_forms(&solved, &c, &pt).unwrap();
            assert!((w1 - w2).norm() < 1e-8 * (1.0 + w1.norm()));
        }

        let mut v = RVec::zeros(6);
        v[0] = 1.0;
        let err = orbit.tangent_solve(&base, &Covector::new(v));
        assert!(matches!(err, Err(OrbitqError::NotTangent { .. })));
    }

    #[test]
    fn tangent_solve_branch_independence() {
        let orbit = lorentz_orbit(1.0, DeltaConvention::FullTrace);
        let la = orbit.algebra.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let base = orbit.base_point();
        let v = orbit.vector_field(&la.basis_element(1), &base);
        let solved = orbit.tangent_solve(&base, &v).unwrap();
        for _ in 0..10 {
            let mut stab = orbit.l_basis[0].scale(rng.random_range(-1.0..1.0));
            stab = stab.add(&orbit.l_basis[1].scale(rng.random_range(-1.0..1.0)));
            let shifted = solved.add(&stab);
            assert!(
                orbit.vector_field(&stab, &base).coeffs.norm() < 1e-9,
                "stabilizer direction must have zero field"
            );
            let c = random_element(&la, &mut rng);
            let (w1, _, _) = orbit.kirillov_forms(&solved, &c, &base).unwrap();
            let (w2, _, _) = orbit.kirillov_forms(&shifted, &c, &base).unwrap();
            assert!((w1 - w2).norm() < 1e-8 * (1.0 + w1.norm()));
        }
    }

    #[test]
    fn connection_values() {
        let orbit = lorentz_orbit(1.0, DeltaConvention::FullTrace);
        let la = orbit.algebra.clone();
        let e = la.group_identity();
        let alpha = CMat::identity(1, 1);
        let y = CMat::identity(1, 1);
        let zero_dir = la.complexify(&la.zero());
        let v = orbit.connection_eval(&e, &alpha, &zero_dir, &y).unwrap();
        assert!((v - CMat::identity(1, 1)).norm() < 1e-12);

        let x1 = la.complexify(&la.basis_element(0));
        let v2 = orbit
            .connection_eval(&e, &alpha, &x1, &CMat::zeros(1, 1))
            .unwrap();
        assert!((v2[(0, 0)] - Complex64::new(2.0, 1.0)).norm() < 1e-10);

        let alpha2 = CMat::identity(1, 1) * Complex64::new(0.3, 1.7);
        let v3 = orbit
            .connection_eval(&e, &alpha2, &x1, &CMat::zeros(1, 1))
            .unwrap();
        assert!((v2 - v3).norm() < 1e-12);

        let singular = CMat::zeros(1, 1);
        assert!(matches!(
            orbit.connection_eval(&e, &singular, &x1, &CMat::zeros(1, 1)),
            Err(OrbitqError::SingularFrame)
        ));
    }

    #[test]
    fn curvature_closed_form_and_antisymmetry() {
        let orbit = lorentz_orbit(1.0, DeltaConvention::FullTrace);
        let la = orbit.algebra.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let alpha = CMat::identity(1, 1);
        for _ in 0..10 {
            let b = random_element(&la, &mut rng);
            let c = random_element(&la, &mut rng);
            let g = la.group_exp(&random_element(&la, &mut rng).scale(0.4));
            let kbb = orbit.curvature_eval(&g, &alpha, &b, &b).unwrap();
            assert!(kbb.norm() < 1e-12);
            let kbc = orbit.curvature_eval(&g, &alpha, &b, &c).unwrap();
            let h = orbit.hamiltonian_real(&la.bracket(&b, &c), &g).unwrap();
            assert!((kbc[(0, 0)] + h).norm() < 1e-12);
        }
    }

    #[test]
    fn curvature_matches_structure_equation_differences() {
        let orbit = lorentz_orbit(1.0, DeltaConvention::FullTrace);
        let la = orbit.algebra.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let alpha = CMat::identity(1, 1);
        for _ in 0..20 {
            let b = random_element(&la, &mut rng);
            let c = random_element(&la, &mut rng);
            let g = la.group_exp(&random_element(&la, &mut rng).scale(0.4));
            let (closed, fd) = orbit.curvature_fd_check(&g, &alpha, &b, &c, 1e-4).unwrap();
            let scale = 1.0 + closed.norm();
            let gap = (closed.clone() - fd.clone()).norm();
            assert!(gap / scale < 1e-3, "closed {closed} vs fd {fd}");
        }
    }

    #[test]
    fn moment_map_values_and_equivariance() {
        let orbit = lorentz_orbit(1.0, DeltaConvention::FullTrace);
        let la = orbit.algebra.clone();
        let alpha = CMat::identity(1, 1);
        let e = la.group_identity();
        let m = orbit.moment_map(&e, &alpha, &la.basis_element(0)).unwrap();
        assert!((m[(0, 0)] - Complex64::new(2.0, 1.0)).norm() < 1e-10);

        let u_dir = la.basis_element(1).add(&la.basis_element(5));
        let mu = orbit.moment_map(&e, &alpha, &u_dir).unwrap();
        assert!(mu.norm() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let a = random_element(&la, &mut rng);
            let g0 = la.group_exp(&random_element(&la, &mut rng).scale(0.3));
            let g = la.group_exp(&random_element(&la, &mut rng).scale(0.3));
            let lhs = orbit
                .moment_map(&la.group_mul(&g, &g0), &alpha, &a)
                .unwrap();
            let moved = la
                .adjoint_action(&la.group_inv(&g).unwrap(), &a)
                .unwrap();
            let rhs = orbit.moment_map(&g0, &alpha, &moved).unwrap();
            assert!((lhs - rhs).norm() < 1e-8);
        }
    }

    #[test]
    fn hamiltonian_derivative_identity() {
        let orbit = lorentz_orbit(1.0, DeltaConvention::FullTrace);
        let la = orbit.algebra.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let step = 1e-5;
        for _ in 0..100 {
            let a = random_element(&la, &mut rng);
            let b = random_element(&la, &mut rng);
            let g = la.group_exp(&random_element(&la, &mut rng).scale(0.4));
            let plus = orbit
                .hamiltonian_real(&b, &la.group_mul(&la.group_exp(&a.scale(step)), &g))
                .unwrap();
            let minus = orbit
                .hamiltonian_real(&b, &la.group_mul(&la.group_exp(&a.scale(-step)), &g))
                .unwrap();
            let fd = (plus - minus) / (2.0 * step);
            let exact = -orbit.hamiltonian_real(&la.bracket(&a, &b), &g).unwrap();
            assert!((fd - exact).norm() < 1e-5 * (1.0 + exact.norm()));
        }
    }

    #[test]
    fn differential_pairs_with_kirillov_form() {
        let orbit = lorentz_orbit(1.0, DeltaConvention::FullTrace);
        let la = orbit.algebra.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let step = 1e-5;
        for _ in 0..50 {
            let a = random_element(&la, &mut rng);
            let b = random_element(&la, &mut rng);
            let g = la.group_exp(&random_element(&la, &mut rng).scale(0.4));
            let pt = orbit.point(g.clone()).unwrap();
            let plus = orbit
                .hamiltonian_real(&b, &la.group_mul(&la.group_exp(&a.scale(step)), &g))
                .unwrap();
            let minus = orbit
                .hamiltonian_real(&b, &la.group_mul(&la.group_exp(&a.scale(-step)), &g))
                .unwrap();
            let fd = (plus - minus) / (2.0 * step);
            let (w, hat, tilde) = orbit.kirillov_forms(&b, &a, &pt).unwrap();
            assert!((fd - w).norm() < 1e-5 * (1.0 + w.norm()));
            assert!((fd.im - hat).abs() < 1e-5 * (1.0 + hat.abs()));
            assert!((fd.re - tilde).abs() < 1e-5 * (1.0 + tilde.abs()));
        }
    }

    #[test]
    fn phi_is_stabilizer_invariant() {
        let orbit = lorentz_orbit(1.0, DeltaConvention::FullTrace);
        let la = orbit.algebra.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..100 {
            let a = random_element(&la, &mut rng);
            let l = orbit.l0_sample(&mut rng);
            let moved = la.adjoint_action(&l, &a).unwrap();
            let lhs = orbit.phi_real(&moved);
            let rhs = orbit.phi_real(&a);
            assert!((lhs - rhs).norm() < 1e-8 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn group_delta_is_multiplicative_on_parabolic() {
        for convention in [DeltaConvention::FullTrace, DeltaConvention::HalfTrace] {
            let orbit = lorentz_orbit(1.0, convention);
            let la = orbit.algebra.clone();
            let mut rng = ChaCha8Rng::seed_from_u64(47);
            for _ in 0..20 {
                let mut a = orbit.algebra.zero();
                let mut b = orbit.algebra.zero();
                for basis in orbit.l_basis.iter().chain(orbit.u_basis.iter()) {
                    a = a.add(&basis.scale(rng.random_range(-0.7..0.7)));
                    b = b.add(&basis.scale(rng.random_range(-0.7..0.7)));
                }
                let qa = la.group_exp(&a);
                let qb = la.group_exp(&b);
                let lhs = orbit.delta_group(&la.group_mul(&qa, &qb)).unwrap();
                let rhs = orbit.delta_group(&qa).unwrap() * orbit.delta_group(&qb).unwrap();
                assert!((lhs - rhs).abs() < 1e-8 * (1.0 + rhs.abs()));
            }
        }
    }

    #[test]
    fn group_delta_of_boost_exponential() {
        let orbit = lorentz_orbit(1.0, DeltaConvention::FullTrace);
        let la = orbit.algebra.clone();
        let q = la.group_exp(&la.basis_element(0));
        assert_relative_eq!(orbit.delta_group(&q).unwrap(), 2.0f64.exp(), max_relative = 1e-9);
        let half = lorentz_orbit(1.0, DeltaConvention::HalfTrace);
        assert_relative_eq!(half.delta_group(&q).unwrap(), 1.0f64.exp(), max_relative = 1e-9);
    }

    #[test]
    fn lifted_hamiltonian_derivative_on_bundle() {
        let orbit = lorentz_orbit(1.0, DeltaConvention::FullTrace);
        let la = orbit.algebra.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let alpha = CMat::identity(1, 1) * Complex64::new(0.8, -0.4);
        let step = 1e-5;
        for _ in 0..30 {
            let a = random_element(&la, &mut rng);
            let b = random_element(&la, &mut rng);
            let g = la.group_exp(&random_element(&la, &mut rng).scale(0.4));
            let plus = orbit
                .lifted_hamiltonian(&la.group_mul(&la.group_exp(&a.scale(step)), &g), &alpha, &b)
                .unwrap();
            let minus = orbit
                .lifted_hamiltonian(&la.group_mul(&la.group_exp(&a.scale(-step)), &g), &alpha, &b)
                .unwrap();
            let fd = (plus - minus) / Complex64::new(2.0 * step, 0.0);
            let exact = -orbit
                .lifted_hamiltonian(&g, &alpha, &la.bracket(&a, &b))
                .unwrap();
            let scale = 1.0 + exact.norm();
            assert!((fd - exact).norm() < 1e-5 * scale);
        }
    }

    #[test]
    fn grading_brackets_stay_in_their_block() {
        let orbit = lorentz_orbit(1.0, DeltaConvention::FullTrace);
        let la = orbit.algebra.clone();
        for (r, elems_r) in &orbit.grading {
            for (s, elems_s) in &orbit.grading {
                for a in elems_r {
                    for b in elems_s {
                        let br = la.bracket(a, b);
                        assert!(
                            orbit.grading_projection_residual(&br, r + s) < 1e-8,
                            "bracket of blocks {r} and {s} escapes block {}",
                            r + s
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn zero_functional_gives_trivial_grading() {
        let la = lorentz();
        let orbit = build_orbit(
            &la,
            &Covector::new(RVec::zeros(6)),
            IntegralDatum::trivial(1),
            DeltaConvention::FullTrace,
        )
        .unwrap();
        assert!(orbit.u_basis.is_empty());
        assert!(orbit.uminus_basis.is_empty());
        assert_eq!(orbit.l_basis.len(), 6);
        assert!(orbit.delta_coeffs.norm() == 0.0);
    }

    #[test]
    fn rotation_functional_is_rejected() {
        let la = builtin(&BuiltinName::So { p: 3, q: 0 }).unwrap();
        let mut eta = RVec::zeros(3);
        eta[0] = 1.0;
        let err = build_orbit(
            &la,
            &Covector::new(eta),
            IntegralDatum::trivial(1),
            DeltaConvention::FullTrace,
        );
        assert!(matches!(err, Err(OrbitqError::NotHyperbolic { .. })));
    }

    #[test]
    fn datum_table_consistency() {
        let la = sl2();
        let mut eta = RVec::zeros(3);
        eta[0] = 1.0;
        let minus_id = GroupElement {
            matrix: -RMat::identity(2, 2),
            group_tag: la.group_tag,
        };
        let lam = CMat::identity(1, 1) * Complex64::new(-1.0, 0.0);

        let shifted_rep = GroupElement {
            matrix: -la.group_exp(&la.basis_element(0).scale(0.3)).matrix.clone(),
            group_tag: la.group_tag,
        };
        let consistent = CMat::identity(1, 1)
            * (Complex64::new(-1.0, 0.0) * Complex64::new(0.0, 0.3).exp());
        let datum = IntegralDatum::new(
            1,
            vec![(minus_id.clone(), lam.clone()), (shifted_rep.clone(), consistent)],
        )
        .unwrap();
        build_orbit(&la, &Covector::new(eta.clone()), datum, DeltaConvention::FullTrace).unwrap();

        let broken = CMat::identity(1, 1) * Complex64::new(-1.0, 0.0);
        let datum2 = IntegralDatum::new(1, vec![(minus_id, lam), (shifted_rep, broken)]).unwrap();
        let err = build_orbit(&la, &Covector::new(eta), datum2, DeltaConvention::FullTrace);
        assert!(matches!(err, Err(OrbitqError::Config(_))));
    }

    #[test]
    fn datum_rejects_non_unitary_values() {
        let la = sl2();
        let rep = la.group_identity();
        let bad = CMat::identity(1, 1) * Complex64::new(2.0, 0.0);
        assert!(IntegralDatum::new(1, vec![(rep, bad)]).is_err());
        assert!(IntegralDatum::new(0, Vec::new()).is_err());
    }
}
