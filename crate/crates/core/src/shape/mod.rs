//! Reference elements, quadrature, finite element spaces and fields.

pub mod assembly;
pub mod element;
pub mod field;
pub mod poly;
pub mod quadrature;
pub mod space;
pub mod trace;

pub use assembly::CellBasis;
pub use element::{reference, tabulation, EntityKind, Family, ReferenceElement, Tabulation};
pub use field::{Analytic, CellwiseField, DiscreteField, PiecewiseField, VectorFn};
pub use quadrature::QuadratureRule;
pub use space::{Constraints, DofSpace};
