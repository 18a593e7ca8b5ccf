//! Simulation and stability analysis for a rigid body containing a
//! spherical damper.
//!
//! The outer body has principal moments of inertia `A1 <= A2 <= A3`; the
//! inner body is a homogeneous sphere of moment `I`, coupled to the outer
//! body by a viscous torque `k (Omega1 - Omega)`. Everything is expressed
//! in the body frame of the outer body, where the inertia tensor is
//! diagonal.
//!
//! The crate provides:
//!
//! * [`dynamics`] — parameters, state space, the coupled angular-velocity
//!   equations, and the energy/momentum balances;
//! * [`integrator`] — an adaptive Dormand-Prince 5(4) propagator with
//!   conservation monitoring and equilibrium detection;
//! * [`spectral`] — the equilibrium set, the exact linearization, an
//!   in-house dense eigensolver, and normally-stable / normally-hyperbolic
//!   classification;
//! * [`analysis`] — attainability conditions on initial data, limit
//!   identities implied by the conserved momentum, and exponential-rate
//!   fitting of converged trajectories.

pub mod analysis;
pub mod dynamics;
pub mod integrator;
pub mod spectral;

pub use analysis::{attainability, classify_limit_axis, fit_rate, AttainabilityReport, ConvergenceReport, RateFit};
pub use dynamics::{balances, rhs, Balances, BodyParams, Degeneracy, ParamError, State};
pub use integrator::{integrate, IntegratorConfig, StopReason, TrajectoryRecord};
pub use spectral::{classify, equilibrium_set, linearization, AxisLabel, Classification, Equilibrium, Spectrum, Verdict};
