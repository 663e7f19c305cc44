//! Generalized Pauli channels built from mutually unbiased bases.
//!
//! A channel on `ℂ^d` is fixed by a probability vector `(p_0, p_1, …, p_{d+1})`
//! or equivalently by its `d + 1` eigenvalues `λ_α`, one per basis. The crate
//! provides:
//!
//! * [`mub`]: the standard MUB families for `d = 2` and odd primes, plus loading
//!   of user families;
//! * [`channel`]: the channel, its spectrum, superoperator, Choi matrix and the
//!   Fujiwara–Algoet positivity conditions;
//! * [`metrics`]: closed forms for the extremal pure-state fidelities, the
//!   maximal output 2-norm and ∞-norm, and multiplicativity classification;
//! * [`oracle`]: brute-force optimizers that check those closed forms using only
//!   the superoperator;
//! * [`dynamics`]: constant-rate semigroups and sampled eigenvalue trajectories;
//! * [`cli`]: the `gpcfid` command-line front end.
//!
//! ```
//! use std::sync::Arc;
//! use gpc_fidelity::{channel::GeneralizedPauliChannel, metrics, mub::MubFamily};
//!
//! let fam = Arc::new(MubFamily::build(3).unwrap());
//! let ch = GeneralizedPauliChannel::from_eigenvalues(3, vec![0.4, 0.2, 0.1, 0.2], fam).unwrap();
//! assert!((metrics::f_extremes(&ch).f_max - 0.6).abs() < 1e-12);
//! assert!((metrics::nu_inf(&ch) - 0.6).abs() < 1e-12);
//! ```

pub mod channel;
pub mod cli;
pub mod dynamics;
pub mod linalg;
pub mod metrics;
pub mod mub;
pub mod oracle;
pub mod sampling;
