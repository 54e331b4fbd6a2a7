//! Two capacitively coupled charge qubits under pure dephasing.
//!
//! The crate propagates the Lindblad master equation from the `|Psi+>` Bell
//! state, decomposes the quantum Fisher information for the dephasing rate
//! and the two coupling energies into classical, pure-state and mixed-state
//! parts, and audits a published closed-form solution against the numerics.

// Negated comparisons such as `!(x <= tol)` are used on purpose so that NaN
// fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod qfi;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{bell_state_psi_plus, build_hamiltonian, DensityMatrix, SystemParams};
pub use qfi::{qfi_components, qfi_components_checked, qfi_sld, Estimand, QfiBreakdown};
pub use spectral::{spectral_decompose, SpectralDecomposition};
pub use sweep::{run_sweep, SweepConfig, SweepResult};
