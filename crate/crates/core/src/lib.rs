//! Modular Lie algebras of Cartan type over `F_p` and the symmetric
//! invariants built from the top divided power derivation `d^(δ)`.

pub mod arith;
pub mod budget;
pub mod cartan;
pub mod divided_powers;
pub mod error;
pub mod format;
pub mod invariants;
pub mod linalg;
pub mod ring;
pub mod store;
pub mod symmetric;

pub use arith::{FieldParams, MultiIndex};
pub use budget::Budget;
pub use cartan::{AlgebraKind, BasisElement, BasisTag, CartanAlgebra, Derivation, HamiltonianStructure};
pub use divided_powers::DpPolynomial;
pub use error::{Error, Result};
pub use format::VariableScheme;
pub use invariants::{HamiltonianPair, InvariantRecord, PipelineResult};
pub use ring::{Field, Integers, PrimeField, Rationals, Ring, RingKind};
pub use store::Store;
pub use symmetric::{DeltaOptions, Monomial, SymPolynomial};
