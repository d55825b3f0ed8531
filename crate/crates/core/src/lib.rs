//! Commutation-based incompatibility measures for pairs of quantum measurements.
//!
//! The central quantity is `Υ_p(E, F) = Σ_ab ‖[E_a, F_b]‖_p`, the sum of Schatten
//! p-norms of all pairwise commutators between the operators of two POVMs. Around it
//! the crate provides:
//!
//! * [`linalg`]: dense complex linear algebra (Hermitian eigendecomposition, Schatten
//!   norms, spectral parts, rank-1 closed forms).
//! * [`povm`]: the measurement data model, validation, post-/pre-processing, mutually
//!   unbiased bases and seeded random constructors.
//! * [`incompat`]: `Υ_p`, its rank-1 fast path, maximal-pair certification and the
//!   composition rules.
//! * [`robustness`]: generalized incompatibility robustness `η^g` through a small
//!   primal-dual interior-point SDP solver, plus an analytic dual certificate.
//! * [`bounds`]: QRAC and entropic-uncertainty bounds and CSV curve emitters.

pub mod bounds;
pub mod error;
pub mod incompat;
pub mod linalg;
pub mod povm;
pub mod robustness;

pub use error::{Error, Result};
pub use incompat::{
    certify_maximal, max_upsilon, upsilon, upsilon_rank1, IncompatibilityResult,
    MaximalityCertificate, Method,
};
pub use linalg::{CMatrix, Hermitian, SchattenP};
pub use povm::{KrausChannel, Povm, Rank1Form, StochasticMap};
pub use robustness::{eta_g_solve, SdpSolution};
