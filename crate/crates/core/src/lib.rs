//! Symbolic calculus of chiral fields: residue products, normal forms,
//! operator product expansions, the generalized Wick theorems and the
//! Borcherds identity, with an exact mode-level cross-check on graded
//! modules.

pub mod algebra;
pub mod borcherds;
pub mod engine;
pub mod expr;
pub mod oracle;
pub mod scalar;
pub mod wick;

pub use algebra::{Algebra, AlgebraError, GeneratorDecl, LieData, OpeEntry, OpeTable};
pub use borcherds::{BorcherdsReport, BorcherdsSides, BorcherdsViolation, Window};
pub use engine::{Engine, EngineError, DEFAULT_STEP_BUDGET};
pub use expr::{FieldExpr, GenId, Letter, Monomial, NormalForm, Weight};
pub use scalar::{Bindings, GaussRat, ParamSpace, Scalar, ScalarError};
pub use wick::{contour_kernel, wick_left, wick_right, SingularSeries, WickError};
pub use oracle::{GradedModule, HighestWeight, ModeMatrix, OracleError, VerifyReport};
