//! Simulation and numerical verification for a lattice reactant-catalyst
//! system: a diffusing field on Z^3 driven by simple symmetric exclusion.
//!
//! The crate provides, layer by layer:
//!
//! - [`kernels`]: exact transition kernels and Green functions of
//!   continuous-time simple random walk (d = 1, 3) and the Gaussian heat
//!   kernel, used everywhere else as analytic oracles;
//! - [`exclusion`]: event-driven stirring dynamics on a torus with the
//!   duality identity as an exact test oracle;
//! - [`pam`]: the reactant field u solving du/dt = kappa Delta u + xi u,
//!   with annealed moments computed by a direct solver and by a p-walker
//!   Feynman-Kac estimator that must agree;
//! - [`spectral`]: exact small-system Rayleigh-Ritz eigenvalues, the psi
//!   functional with its three bounds, and the Green-operator exponential
//!   moment bound;
//! - [`polaron`]: the variational constant entering the large-diffusivity
//!   asymptotics, solved on radial profiles with windowed-kernel variants;
//! - [`harness`]: Lyapunov slope fitting, asymptotic and intermittency
//!   scans, and reproducible staged runs with manifests.

pub mod error;
pub mod exclusion;
pub mod harness;
pub mod kernels;
pub mod lattice;
pub mod pam;
pub mod polaron;
pub mod rng;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
