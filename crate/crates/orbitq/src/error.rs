use thiserror::Error;

/// Everything that can go wrong across the library, in one place.
///
/// Variants are grouped by the layer that raises them; the CLI maps
/// configuration problems to exit code 2 and numeric failures to exit code 3.
#[derive(Debug, Error)]
pub enum OrbitqError {
    #[error("bracket left the basis span (residual {residual:.3e}): the supplied basis is not closed under commutators")]
    ClosureError { residual: f64 },

    #[error("matrix has no usable logarithm in the algebra span: {reason}")]
    LogDomainError { reason: String },

    #[error("unknown builtin algebra `{0}`")]
    UnknownAlgebra(String),

    #[error("trace form Re Tr(XY) is degenerate on this algebra (condition {cond:.3e}); the defining equation for the grading element is unsolvable")]
    DegenerateTraceForm { cond: f64 },

    #[error("functional is not hyperbolic: {reason}")]
    NotHyperbolic { reason: String },

    #[error("singular Killing form: {0}")]
    SingularKilling(String),

    #[error("frame matrix is singular")]
    SingularFrame,

    #[error("vector is not tangent to the orbit at this point (residual {residual:.3e}, tolerance {tol:.3e})")]
    NotTangent { residual: f64, tol: f64 },

    #[error("enveloping-algebra elements refer to different bases ({left} vs {right})")]
    BasisMismatch { left: String, right: String },

    #[error("supplied elements do not form a Cartan subalgebra: {reason}")]
    NotCartan { reason: String },

    #[error("ad operator is defective on the candidate Cartan: {reason}")]
    DefectiveAd { reason: String },

    #[error("group element is not central (commutator defect {defect:.3e})")]
    NotCentral { defect: f64 },

    #[error("endpoint cannot be factored over the datum component table: {reason}")]
    FactorizationError { reason: String },

    #[error("point is not fixed by the isotopy (max velocity {max_velocity:.3e})")]
    NotFixedPoint { max_velocity: f64 },

    #[error("velocity leaves the Levi factor (projection residual {residual:.3e})")]
    NotInLevi { residual: f64 },

    #[error("group element escaped the dense factorization cell: {reason}")]
    CellEscape { reason: String },

    #[error("sweep chain boundary mismatch: {reason}")]
    BoundaryMismatch { reason: String },

    #[error("cross-check failed for {what}: defect {defect:.3e}")]
    CrossCheck { what: String, defect: f64 },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, OrbitqError>;
