//! Spectral simulation and verification toolkit for the semilinear
//! fractional damped wave equation
//!
//! ```text
//!     d²u/dt² + (-L)^alpha u + b du/dt + m² u = |u|^p
//! ```
//!
//! on compact Lie groups, concretely the flat torus `T^n` and the rotation
//! group `SO(3)`. Everything runs Fourier-side: fields are expanded over the
//! unitary dual (lattice modes on the torus, Wigner blocks on `SO(3)`), the
//! fractional Laplacian acts as the multiplier `lambda^(2 alpha)` per block,
//! and the damped-wave flow is applied mode by mode in closed form. The
//! nonlinearity is evaluated pseudospectrally on an oversampled quadrature
//! grid.
//!
//! Module map:
//!
//! * [`harmonics`] — unitary dual enumeration, quadrature grids, group
//!   Fourier analysis/synthesis, Plancherel and Sobolev norms.
//! * [`propagator`] — exact per-mode propagators for general damping and
//!   mass, decay envelopes, linear evolution.
//! * [`evolution`] — Duhamel exponential integrators for the nonlinear
//!   problem, Picard fixed-point iteration, solution-space norms.
//! * [`blowup`] — zero-mode functional, comparison ODE, blow-up detection
//!   and lifespan scaling scans.
//! * [`verify`] — property-check harness with calibrated constants.
//! * [`ode`] — adaptive ODE integrators used by the blow-up lab and as
//!   independent oracles by the check harness.

pub mod blowup;
pub mod evolution;
pub mod harmonics;
pub mod ode;
pub mod propagator;
pub mod verify;
