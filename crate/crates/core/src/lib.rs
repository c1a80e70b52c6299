//! Interval exchange transformations, Rauzy-Veech renormalization, and the
//! numerical machinery built on top of them: the Rauzy cocycle restricted to
//! H(pi), Lyapunov spectra, weak-stable survival experiments and the Veech
//! weak-mixing criterion.
//!
//! The crate is organized around a small number of building blocks:
//!
//! * [`combinatorics`] — permutation pairs, irreducibility, the singularity
//!   structure `Sigma(pi)` and the linear maps `Omega_pi` spanning `H(pi)`;
//! * [`iet`] — the phase-space map `f(lambda, pi)` and a brute-force
//!   first-return oracle;
//! * [`rauzy`] — Rauzy classes and diagrams, induction/renormalization, path
//!   matrices, and the induced first-return map on a simplex;
//! * [`cocycle`] — the accelerated cocycle restricted to `H(pi)`, Lyapunov
//!   estimation and large-deviation experiments;
//! * [`weak_stable`] — lines near the origin, their children under cocycle
//!   matrices, survival probabilities and the Veech criterion scanner;
//! * [`suspension`] — zippered rectangles and special flows.
//!
//! Length data is generic over a [`num::Scalar`], with exact rational,
//! exact quadratic-extension and arbitrary-precision floating point backends.
//! Cocycle matrices are always exact integer matrices ([`intmat::IMat`]).

pub mod cocycle;
pub mod combinatorics;
pub mod error;
pub mod iet;
pub mod intmat;
pub mod linalg;
pub mod num;
pub mod rauzy;
pub mod sampling;
pub mod stats;
pub mod suspension;
pub mod weak_stable;

pub use error::{Error, Result};
pub use num::Scalar;
