//! Tensor cochain complexes on flat space.
//!
//! Fields are polynomials or symbolic expressions in the coordinates
//! `x0..x{d-1}`. Tensors hold one field per index tuple and carry the
//! membership checks and differentials of two complexes, `K` and `G`, that
//! are linked by the index maps [`phi`] and [`psi`]. [`solve_potential`]
//! inverts the `K` differential on closed inputs, and [`spacetime`] applies
//! the `G` complex to Levi-Civita connections of isotropic static metrics.
//!
//! The numeric core is generic over the coefficient type: exact rationals
//! by default, with `f64` and `f32` available where speed matters more
//! than exactness.

pub mod complex;
pub mod error;
pub mod field;
pub mod poincare;
pub mod policy;
pub mod random;
pub mod report;
pub mod spacetime;
pub mod tensor;

pub use complex::{
    d_g, d_g1_explicit, d_k, d_nabla, is_member, phi, project_to_k, psi, reconstruction_residual,
    CochainElement, MembershipReport, Space,
};
pub use error::{Error, Result};
pub use field::expr::Expr;
pub use field::polynomial::Polynomial;
pub use field::scalar::{ScalarField, ScalarFunction, ZeroCheck};
pub use field::{rational, Coefficient, Point, Value};
pub use poincare::{
    affine_kernel_basis, de_rham_homotopy, exterior_derivative, solve_potential, PotentialResult,
};
pub use policy::{EqualityPolicy, SampleDomain};
pub use report::{CheckRecord, Status, VerificationReport, Witness};
pub use spacetime::{
    build_potential, builtin_metric, check_harmonic, christoffel_lowered, christoffel_table,
    symmetric_free_part, verify_potential, ConnectionDecomposition, IsotropicMetric, MetricKind,
    Potential,
};
pub use tensor::{CyclicPermutation, Tensor, TensorCheck};

/// Exact rational scalar.
pub type Rational = field::Rational;
pub type RationalPolynomial = Polynomial<Rational>;
pub type FloatPolynomial = Polynomial<f64>;
pub type PolyTensor = Tensor<RationalPolynomial>;
pub type FloatTensor = Tensor<FloatPolynomial>;
pub type FieldTensor = Tensor<ScalarField>;
pub type PolyCochain = CochainElement<RationalPolynomial>;
pub type FieldCochain = CochainElement<ScalarField>;
