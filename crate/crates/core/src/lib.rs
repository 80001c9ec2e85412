//! Leakage-elimination operators on code subspaces, with exact simulations of
//! parity-kick decoupling against a finite bath.
//!
//! Modules build on each other in order: [`opalg`] (dense complex operators),
//! [`codes`] (code subspaces), [`classify`] (block decomposition), [`leo`]
//! (constructing and verifying LEOs), [`models`] (system-bath Hamiltonians)
//! and [`dynamics`] (pulsed evolution).

pub mod classify;
pub mod codes;
pub mod dynamics;
pub mod error;
pub mod leo;
pub mod models;
pub mod opalg;

pub use codes::CodeSubspace;
pub use error::{LeoError, Result};
pub use leo::{LeakageEliminationOperator, LeoRoute};
pub use models::SystemBathModel;
pub use opalg::Operator;
