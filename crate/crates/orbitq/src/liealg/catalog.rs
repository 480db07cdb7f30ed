//! Built-in algebra catalog: so(p,q) for p+q <= 4, sl(n) for n <= 3, and
//! sp(2n) for 2n <= 4, each with a documented basis order.
//!
//! Basis orders:
//! - so(p,q): boosts e_ij + e_ji (i < p <= j) in lexicographic order, then
//!   rotations e_ij - e_ji within each diagonal block in reverse-lexicographic
//!   order. For so(1,3) this yields the six-generator order used throughout:
//!   three boosts, then rotations (2,3), (1,3), (1,2).
//! - sl(n): diagonal differences e_ii - e_{i+1,i+1}, then off-diagonal units
//!   e_ij in lexicographic order. sl(2) comes out as (H, E, F).
//! - sp(2n): gl(n) block pairs e_ij - e_{n+j,n+i}, then the symmetric upper
//!   and lower off-diagonal blocks.

use crate::error::{OrbitqError, Result};
use crate::numerics::RMat;

use super::{GroupTag, MatrixLieAlgebra};

/// A catalog identifier with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinName {
    So { p: usize, q: usize },
    Sl { n: usize },
    /// `dim` is the matrix size 2n.
    Sp { dim: usize },
}

impl std::fmt::Display for BuiltinName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BuiltinName::So { p, q } => write!(f, "so({p},{q})"),
            BuiltinName::Sl { n } => write!(f, "sl({n})"),
            BuiltinName::Sp { dim } => write!(f, "sp({dim})"),
        }
    }
}

fn unit(n: usize, i: usize, j: usize) -> RMat {
    let mut m = RMat::zeros(n, n);
    m[(i, j)] = 1.0;
    m
}

/// Builds a catalog algebra.
pub fn builtin(name: &BuiltinName) -> Result<MatrixLieAlgebra> {
    match *name {
        BuiltinName::So { p, q } => {
            let n = p + q;
            if !(2..=4).contains(&n) {
                return Err(OrbitqError::UnknownAlgebra(format!(
                    "{name}: only p+q between 2 and 4 are in the catalog"
                )));
            }
            let mut basis = Vec::new();
            for i in 0..p {
                for j in p..n {
                    basis.push(unit(n, i, j) + unit(n, j, i));
                }
            }
            let mut rotations = Vec::new();
            for (lo, hi) in [(0, p), (p, n)] {
                let mut block = Vec::new();
                for i in lo..hi {
                    for j in (i + 1)..hi {
                        block.push(unit(n, i, j) - unit(n, j, i));
                    }
                }
                block.reverse();
                rotations.extend(block);
            }
            let n_boosts = basis.len();
            basis.extend(rotations);
            let mut alg =
                MatrixLieAlgebra::new(&name.to_string(), n, basis, GroupTag::SOpq { p, q })?;
            alg.killing_normalization = so_normalization(&alg, n_boosts);
            Ok(alg)
        }
        BuiltinName::Sl { n } => {
            if !(2..=3).contains(&n) {
                return Err(OrbitqError::UnknownAlgebra(format!(
                    "{name}: only n = 2 and n = 3 are in the catalog"
                )));
            }
            let mut basis = Vec::new();
            for i in 0..n - 1 {
                basis.push(unit(n, i, i) - unit(n, i + 1, i + 1));
            }
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        basis.push(unit(n, i, j));
                    }
                }
            }
            MatrixLieAlgebra::new(&name.to_string(), n, basis, GroupTag::SL)
        }
        BuiltinName::Sp { dim } => {
            if dim != 2 && dim != 4 {
                return Err(OrbitqError::UnknownAlgebra(format!(
                    "{name}: only sp(2) and sp(4) are in the catalog"
                )));
            }
            let h = dim / 2;
            let mut basis = Vec::new();
            for i in 0..h {
                for j in 0..h {
                    basis.push(unit(dim, i, j) - unit(dim, h + j, h + i));
                }
            }
            for i in 0..h {
                for j in i..h {
                    if i == j {
                        basis.push(unit(dim, i, h + i));
                    } else {
                        basis.push(unit(dim, i, h + j) + unit(dim, j, h + i));
                    }
                }
            }
            for i in 0..h {
                for j in i..h {
                    if i == j {
                        basis.push(unit(dim, h + i, i));
                    } else {
                        basis.push(unit(dim, h + i, j) + unit(dim, h + j, i));
                    }
                }
            }
            MatrixLieAlgebra::new(&name.to_string(), dim, basis, GroupTag::Sp)
        }
    }
}

/// The positive factor c with killing = c * diag(+1 on boosts, -1 on
/// rotations), when the Killing matrix has exactly that shape.
fn so_normalization(alg: &MatrixLieAlgebra, n_boosts: usize) -> Option<f64> {
    let mut reference = RMat::zeros(alg.d, alg.d);
    for i in 0..alg.d {
        reference[(i, i)] = if i < n_boosts { 1.0 } else { -1.0 };
    }
    let c = if n_boosts > 0 {
        alg.killing[(0, 0)]
    } else {
        -alg.killing[(0, 0)]
    };
    if c <= 0.0 {
        return None;
    }
    let defect = (&alg.killing - reference * c).norm();
    if defect < 1e-9 * (1.0 + alg.killing.norm()) {
        Some(c)
    } else {
        None
    }
}
