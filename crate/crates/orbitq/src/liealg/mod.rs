//! Matrix Lie algebra core: ordered bases of real matrices, derived structure
//! constants, the Killing form, adjoint and coadjoint actions, and the group
//! exponential/logarithm.

mod catalog;
mod parse;

pub use catalog::{builtin, BuiltinName};
pub use parse::parse_algebra_file;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{OrbitqError, Result};
use crate::numerics::{self, CMat, CVec, RMat, RVec};

/// Which built-in group constraint a [`GroupElement`] is expected to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupTag {
    None,
    /// g^T J g = J with J = diag(I_p, -I_q).
    SOpq { p: usize, q: usize },
    /// det g = 1.
    SL,
    /// g^T J g = J with J the standard symplectic form.
    Sp,
}

/// A finite-dimensional Lie algebra of real n x n matrices with everything
/// derived from the basis: structure constants, Killing matrix, and the
/// coordinate solver used by every other module.
#[derive(Debug, Clone)]
pub struct MatrixLieAlgebra {
    pub name: String,
    pub n: usize,
    pub d: usize,
    pub basis: Vec<RMat>,
    /// c[i][j][k] with [X_i, X_j] = sum_k c[i][j][k] X_k.
    pub structure: Vec<Vec<Vec<f64>>>,
    /// Raw trace form B_ij = Tr(ad X_i ad X_j).
    pub killing: RMat,
    /// Positive factor c when the raw Killing matrix equals c times the
    /// signature diagonal of the catalog basis; None for user algebras or
    /// bases where the Killing matrix is not diagonal.
    pub killing_normalization: Option<f64>,
    pub group_tag: GroupTag,
    coord_pinv: RMat,
    basis_vectorized: RMat,
}

/// A real algebra element: coordinates plus the cached matrix.
#[derive(Debug, Clone)]
pub struct AlgebraElement {
    pub coeffs: RVec,
    pub matrix: RMat,
}

/// A complexified element of the same algebra.
#[derive(Debug, Clone)]
pub struct CElement {
    pub coeffs: CVec,
    pub matrix: CMat,
}

/// An invertible matrix tagged with the constraint it is supposed to satisfy.
#[derive(Debug, Clone)]
pub struct GroupElement {
    pub matrix: RMat,
    pub group_tag: GroupTag,
}

/// A real linear functional on the algebra, stored against the fixed basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Covector {
    pub coeffs: RVec,
}

impl Covector {
    pub fn new(coeffs: RVec) -> Self {
        Covector { coeffs }
    }

    /// Pairing with an algebra element in coordinates.
    pub fn pair(&self, elem: &AlgebraElement) -> f64 {
        self.coeffs.dot(&elem.coeffs)
    }

    pub fn pair_c(&self, elem: &CElement) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.coeffs.len() {
            acc += elem.coeffs[i] * self.coeffs[i];
        }
        acc
    }
}

fn vectorize(m: &RMat) -> RVec {
    RVec::from_iterator(m.nrows() * m.ncols(), m.iter().copied())
}

impl MatrixLieAlgebra {
    /// Builds the algebra from an ordered basis, deriving structure constants
    /// by least-squares projection and checking closure and independence.
    pub fn new(name: &str, n: usize, basis: Vec<RMat>, group_tag: GroupTag) -> Result<Self> {
        let d = basis.len();
        assert!(d > 0, "empty basis");
        for b in &basis {
            assert_eq!(b.nrows(), n, "basis matrix with wrong row count");
            assert_eq!(b.ncols(), n, "basis matrix with wrong column count");
        }
        let mut vmat = RMat::zeros(n * n, d);
        for (j, b) in basis.iter().enumerate() {
            vmat.set_column(j, &vectorize(b));
        }
        let svd = vmat.clone().svd(true, true);
        let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let smin = svd
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if !(smin > 1e-10 * smax.max(1.0)) {
            return Err(OrbitqError::Config(format!(
                "basis matrices are linearly dependent (singular value ratio {:.3e})",
                smin / smax.max(1e-300)
            )));
        }
        let u = svd.u.as_ref().expect("SVD with U");
        let v_t = svd.v_t.as_ref().expect("SVD with V^T");
        let mut sinv = RMat::zeros(d, d);
        for i in 0..d {
            sinv[(i, i)] = 1.0 / svd.singular_values[i];
        }
        let coord_pinv = v_t.transpose() * sinv * u.transpose();

        let mut alg = MatrixLieAlgebra {
            name: name.to_string(),
            n,
            d,
            basis,
            structure: vec![vec![vec![0.0; d]; d]; d],
            killing: RMat::zeros(d, d),
            killing_normalization: None,
            group_tag,
            coord_pinv,
            basis_vectorized: vmat,
        };

        for i in 0..d {
            for j in (i + 1)..d {
                let comm = &alg.basis[i] * &alg.basis[j] - &alg.basis[j] * &alg.basis[i];
                let (coords, residual) = alg.project(&comm);
                let scale = 1.0 + comm.norm();
                if residual > 1e-10 * scale {
                    return Err(OrbitqError::ClosureError { residual });
                }
                for k in 0..d {
                    alg.structure[i][j][k] = coords[k];
                    alg.structure[j][i][k] = -coords[k];
                }
            }
        }

        let ads: Vec<RMat> = (0..d).map(|i| alg.ad_basis(i)).collect();
        for i in 0..d {
            for j in 0..d {
                alg.killing[(i, j)] = (&ads[i] * &ads[j]).trace();
            }
        }
        Ok(alg)
    }

    /// Overrides a single structure constant in place.
    ///
    /// Diagnostics hook for validation fixtures (e.g. checking that the
    /// property suites detect a corrupted bracket table); never called by the
    /// library itself.
    pub fn corrupt_structure_constant(&mut self, i: usize, j: usize, k: usize, value: f64) {
        self.structure[i][j][k] = value;
    }

    fn project(&self, m: &RMat) -> (RVec, f64) {
        let coords = &self.coord_pinv * vectorize(m);
        let residual = (&self.basis_vectorized * &coords - vectorize(m)).norm();
        (coords, residual)
    }

    fn ad_basis(&self, i: usize) -> RMat {
        let mut ad = RMat::zeros(self.d, self.d);
        for j in 0..self.d {
            for k in 0..self.d {
                ad[(k, j)] = self.structure[i][j][k];
            }
        }
        ad
    }

    /// The ad matrix of an element in basis coordinates (d x d).
    pub fn ad_matrix(&self, x: &AlgebraElement) -> RMat {
        let mut ad = RMat::zeros(self.d, self.d);
        for i in 0..self.d {
            if x.coeffs[i] == 0.0 {
                continue;
            }
            ad += self.ad_basis(i) * x.coeffs[i];
        }
        ad
    }

    pub fn ad_matrix_c(&self, x: &CElement) -> CMat {
        let mut ad = CMat::zeros(self.d, self.d);
        for i in 0..self.d {
            let c = x.coeffs[i];
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let adi = numerics::to_complex(&self.ad_basis(i));
            ad += adi * c;
        }
        ad
    }

    pub fn element(&self, coeffs: RVec) -> AlgebraElement {
        assert_eq!(coeffs.len(), self.d);
        let mut matrix = RMat::zeros(self.n, self.n);
        for i in 0..self.d {
            matrix += &self.basis[i] * coeffs[i];
        }
        AlgebraElement { coeffs, matrix }
    }

    pub fn element_from_slice(&self, coeffs: &[f64]) -> AlgebraElement {
        self.element(RVec::from_row_slice(coeffs))
    }

    /// Single basis vector as an element.
    pub fn basis_element(&self, i: usize) -> AlgebraElement {
        let mut coeffs = RVec::zeros(self.d);
        coeffs[i] = 1.0;
        self.element(coeffs)
    }

    pub fn zero(&self) -> AlgebraElement {
        self.element(RVec::zeros(self.d))
    }

    pub fn celement(&self, coeffs: CVec) -> CElement {
        assert_eq!(coeffs.len(), self.d);
        let mut matrix = CMat::zeros(self.n, self.n);
        for i in 0..self.d {
            matrix += numerics::to_complex(&self.basis[i]) * coeffs[i];
        }
        CElement { coeffs, matrix }
    }

    pub fn complexify(&self, x: &AlgebraElement) -> CElement {
        self.celement(CVec::from_iterator(
            self.d,
            x.coeffs.iter().map(|&c| Complex64::new(c, 0.0)),
        ))
    }

    /// Re-expresses an arbitrary matrix in basis coordinates, failing when it
    /// leaves the span.
    pub fn from_matrix(&self, m: &RMat) -> Result<AlgebraElement> {
        let (coords, residual) = self.project(m);
        if residual > 1e-8 * (1.0 + m.norm()) {
            return Err(OrbitqError::ClosureError { residual });
        }
        Ok(self.element(coords))
    }

    pub fn from_matrix_c(&self, m: &CMat) -> Result<CElement> {
        let re = RMat::from_fn(self.n, self.n, |i, j| m[(i, j)].re);
        let im = RMat::from_fn(self.n, self.n, |i, j| m[(i, j)].im);
        let (cre, rre) = self.project(&re);
        let (cim, rim) = self.project(&im);
        let residual = (rre * rre + rim * rim).sqrt();
        if residual > 1e-8 * (1.0 + m.norm()) {
            return Err(OrbitqError::ClosureError { residual });
        }
        Ok(self.celement(CVec::from_fn(self.d, |i, _| {
            Complex64::new(cre[i], cim[i])
        })))
    }

    /// [X, Y] re-expressed in basis coordinates.
    pub fn bracket(&self, x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
        let mut coeffs = RVec::zeros(self.d);
        for i in 0..self.d {
            if x.coeffs[i] == 0.0 {
                continue;
            }
            for j in 0..self.d {
                if y.coeffs[j] == 0.0 {
                    continue;
                }
                let f = x.coeffs[i] * y.coeffs[j];
                for k in 0..self.d {
                    coeffs[k] += f * self.structure[i][j][k];
                }
            }
        }
        self.element(coeffs)
    }

    pub fn bracket_c(&self, x: &CElement, y: &CElement) -> CElement {
        let mut coeffs = CVec::zeros(self.d);
        for i in 0..self.d {
            for j in 0..self.d {
                let f = x.coeffs[i] * y.coeffs[j];
                if f == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..self.d {
                    coeffs[k] += f * self.structure[i][j][k];
                }
            }
        }
        self.celement(coeffs)
    }

    /// Largest Jacobi-identity residual over all basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.d {
            let xi = self.basis_element(i);
            for j in 0..self.d {
                let xj = self.basis_element(j);
                for k in 0..self.d {
                    let xk = self.basis_element(k);
                    let term = self
                        .bracket(&xi, &self.bracket(&xj, &xk))
                        .coeffs
                        + self.bracket(&xj, &self.bracket(&xk, &xi)).coeffs
                        + self.bracket(&xk, &self.bracket(&xi, &xj)).coeffs;
                    worst = worst.max(term.norm());
                }
            }
        }
        worst
    }

    pub fn group_exp(&self, x: &AlgebraElement) -> GroupElement {
        GroupElement {
            matrix: numerics::exp_real(&x.matrix),
            group_tag: self.group_tag,
        }
    }

    pub fn group_identity(&self) -> GroupElement {
        GroupElement {
            matrix: RMat::identity(self.n, self.n),
            group_tag: self.group_tag,
        }
    }

    /// Principal logarithm projected into the algebra span.
    pub fn group_log(&self, g: &GroupElement) -> Result<AlgebraElement> {
        let lm = numerics::log_real(&g.matrix)?;
        let (coords, residual) = self.project(&lm);
        if residual > 1e-8 * (1.0 + lm.norm()) {
            return Err(OrbitqError::LogDomainError {
                reason: format!("logarithm leaves the algebra span (residual {residual:.3e})"),
            });
        }
        Ok(self.element(coords))
    }

    /// Ad_g A = g A g^{-1} in basis coordinates.
    pub fn adjoint_action(&self, g: &GroupElement, a: &AlgebraElement) -> Result<AlgebraElement> {
        let ginv = g
            .matrix
            .clone()
            .try_inverse()
            .ok_or(OrbitqError::SingularFrame)?;
        self.from_matrix(&(&g.matrix * &a.matrix * ginv))
    }

    pub fn adjoint_action_c(&self, g: &GroupElement, a: &CElement) -> Result<CElement> {
        let ginv = g
            .matrix
            .clone()
            .try_inverse()
            .ok_or(OrbitqError::SingularFrame)?;
        let gc = numerics::to_complex(&g.matrix);
        let gci = numerics::to_complex(&ginv);
        self.from_matrix_c(&(gc * &a.matrix * gci))
    }

    /// The d x d matrix of Ad_g in basis coordinates.
    pub fn adjoint_matrix(&self, g: &GroupElement) -> Result<RMat> {
        let ginv = g
            .matrix
            .clone()
            .try_inverse()
            .ok_or(OrbitqError::SingularFrame)?;
        let mut out = RMat::zeros(self.d, self.d);
        for j in 0..self.d {
            let m = &g.matrix * &self.basis[j] * &ginv;
            let (coords, residual) = self.project(&m);
            if residual > 1e-8 * (1.0 + m.norm()) {
                return Err(OrbitqError::ClosureError { residual });
            }
            out.set_column(j, &coords);
        }
        Ok(out)
    }

    /// Ad*_g eta, defined by (Ad*_g eta)(Y) = eta(Ad_{g^{-1}} Y).
    pub fn coadjoint_action(&self, g: &GroupElement, eta: &Covector) -> Result<Covector> {
        let ginv = GroupElement {
            matrix: g
                .matrix
                .clone()
                .try_inverse()
                .ok_or(OrbitqError::SingularFrame)?,
            group_tag: g.group_tag,
        };
        let ad = self.adjoint_matrix(&ginv)?;
        Ok(Covector::new(ad.transpose() * &eta.coeffs))
    }

    pub fn group_mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement {
            matrix: &a.matrix * &b.matrix,
            group_tag: a.group_tag,
        }
    }

    pub fn group_inv(&self, g: &GroupElement) -> Result<GroupElement> {
        Ok(GroupElement {
            matrix: g
                .matrix
                .clone()
                .try_inverse()
                .ok_or(OrbitqError::SingularFrame)?,
            group_tag: g.group_tag,
        })
    }
}

impl GroupElement {
    /// Residual of the defining constraint for the tagged group; zero for
    /// untagged elements.
    pub fn constraint_residual(&self) -> f64 {
        let n = self.matrix.nrows();
        match self.group_tag {
            GroupTag::None => 0.0,
            GroupTag::SL => (self.matrix.determinant() - 1.0).abs(),
            GroupTag::SOpq { p, q } => {
                let mut j = RMat::zeros(n, n);
                for i in 0..p {
                    j[(i, i)] = 1.0;
                }
                for i in p..p + q {
                    j[(i, i)] = -1.0;
                }
                (self.matrix.transpose() * &j * &self.matrix - &j).norm()
            }
            GroupTag::Sp => {
                let half = n / 2;
                let mut j = RMat::zeros(n, n);
                for i in 0..half {
                    j[(i, half + i)] = 1.0;
                    j[(half + i, i)] = -1.0;
                }
                (self.matrix.transpose() * &j * &self.matrix - &j).norm()
            }
        }
    }
}

impl AlgebraElement {
    pub fn add(&self, other: &AlgebraElement) -> AlgebraElement {
        AlgebraElement {
            coeffs: &self.coeffs + &other.coeffs,
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn scale(&self, s: f64) -> AlgebraElement {
        AlgebraElement {
            coeffs: &self.coeffs * s,
            matrix: &self.matrix * s,
        }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }
}

impl CElement {
    pub fn add(&self, other: &CElement) -> CElement {
        CElement {
            coeffs: &self.coeffs + &other.coeffs,
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn scale(&self, s: Complex64) -> CElement {
        CElement {
            coeffs: &self.coeffs * s,
            matrix: &self.matrix * s,
        }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }
}

/// Convenience: dense column vector from a slice of complex numbers.
pub fn cvec(values: &[Complex64]) -> CVec {
    DVector::from_row_slice(values)
}

/// Convenience: dense real matrix from row-major data.
pub fn rmat(n: usize, rows: &[f64]) -> RMat {
    DMatrix::from_row_slice(n, n, rows)
}
