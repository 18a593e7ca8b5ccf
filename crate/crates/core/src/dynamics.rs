//! Physical parameters, state space, and the coupled angular-velocity
//! equations of the rigid body with an internal spherical damper.
//!
//! All quantities live in the body frame of the outer body, where the
//! inertia tensor is `J = diag(A1, A2, A3)`. Units are dimensionless;
//! consistency is the caller's responsibility.

use nalgebra::{Vector3, Vector6};
use thiserror::Error;

/// Inertia and coupling parameters of the coupled system.
///
/// The principal moments must come already sorted, `0 < A1 <= A2 <= A3`,
/// so that axis labels in every output follow the same convention.
/// Construction rejects violations instead of silently permuting axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyParams {
    a1: f64,
    a2: f64,
    a3: f64,
    damper_inertia: f64,
    coupling: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("principal moments must satisfy 0 < A1 <= A2 <= A3 (finite), got A1={0}, A2={1}, A3={2}")]
    BadMoments(f64, f64, f64),
    #[error("damper moment of inertia must be positive and finite, got {0}")]
    BadDamperInertia(f64),
    #[error("coupling coefficient must be positive and finite, got {0}")]
    BadCoupling(f64),
}

/// Degeneracy pattern of the principal moments. Ties are decided by exact
/// equality of the input values; near-ties are treated as strict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// `A1 < A2 < A3`
    Distinct,
    /// `A1 = A2 < A3`
    LowPair,
    /// `A1 < A2 = A3`
    HighPair,
    /// `A1 = A2 = A3`
    Sphere,
}

impl BodyParams {
    pub fn new(a1: f64, a2: f64, a3: f64, damper_inertia: f64, coupling: f64) -> Result<Self, ParamError> {
        if !(a1 > 0.0 && a1 <= a2 && a2 <= a3 && a3.is_finite()) {
            return Err(ParamError::BadMoments(a1, a2, a3));
        }
        if !(damper_inertia > 0.0 && damper_inertia.is_finite()) {
            return Err(ParamError::BadDamperInertia(damper_inertia));
        }
        if !(coupling > 0.0 && coupling.is_finite()) {
            return Err(ParamError::BadCoupling(coupling));
        }
        Ok(Self { a1, a2, a3, damper_inertia, coupling })
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn a3(&self) -> f64 {
        self.a3
    }

    /// Principal moments `[A1, A2, A3]` of the outer body.
    pub fn moments(&self) -> [f64; 3] {
        [self.a1, self.a2, self.a3]
    }

    /// Moment of inertia `I` of the spherical damper.
    pub fn damper_inertia(&self) -> f64 {
        self.damper_inertia
    }

    /// Viscous coupling coefficient `k` (torque per relative angular velocity).
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// `J v`; J is diagonal in the body frame, so this is componentwise.
    pub fn j_apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(self.a1 * v.x, self.a2 * v.y, self.a3 * v.z)
    }

    /// `J^{-1} v`, componentwise for the same reason.
    pub fn j_inv_apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(v.x / self.a1, v.y / self.a2, v.z / self.a3)
    }

    pub fn degeneracy(&self) -> Degeneracy {
        match (self.a1 == self.a2, self.a2 == self.a3) {
            (false, false) => Degeneracy::Distinct,
            (true, false) => Degeneracy::LowPair,
            (false, true) => Degeneracy::HighPair,
            (true, true) => Degeneracy::Sphere,
        }
    }

    /// Axis indices (0-based) whose principal moment equals `lambda` exactly.
    pub fn eigenspace_axes(&self, lambda: f64) -> Vec<usize> {
        self.moments()
            .iter()
            .enumerate()
            .filter(|(_, a)| **a == lambda)
            .map(|(i, _)| i)
            .collect()
    }

    /// Geometric multiplicity of `lambda` as an eigenvalue of J.
    pub fn eigenspace_dim(&self, lambda: f64) -> usize {
        self.moments().iter().filter(|a| **a == lambda).count()
    }

    /// The distinct eigenvalues of J with their axis groups, in increasing order.
    pub fn distinct_moments(&self) -> Vec<(f64, Vec<usize>)> {
        let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
        for (i, a) in self.moments().iter().enumerate() {
            match out.last_mut() {
                Some((lambda, axes)) if *lambda == *a => axes.push(i),
                _ => out.push((*a, vec![i])),
            }
        }
        out
    }
}

/// The pair of body-frame angular velocities `(Omega, Omega1)` of the outer
/// body and the damper. Components are named `(p, q, r)` and `(p1, q1, r1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub omega: Vector3<f64>,
    pub omega1: Vector3<f64>,
}

impl State {
    pub fn new(omega: Vector3<f64>, omega1: Vector3<f64>) -> Self {
        Self { omega, omega1 }
    }

    pub fn from_components(p: f64, q: f64, r: f64, p1: f64, q1: f64, r1: f64) -> Self {
        Self::new(Vector3::new(p, q, r), Vector3::new(p1, q1, r1))
    }

    pub fn from_vector6(v: &Vector6<f64>) -> Self {
        Self::from_components(v[0], v[1], v[2], v[3], v[4], v[5])
    }

    pub fn as_vector6(&self) -> Vector6<f64> {
        Vector6::new(self.omega.x, self.omega.y, self.omega.z, self.omega1.x, self.omega1.y, self.omega1.z)
    }

    pub fn is_finite(&self) -> bool {
        self.omega.iter().chain(self.omega1.iter()).all(|x| x.is_finite())
    }

    /// Euclidean norm of the stacked 6-vector.
    pub fn norm(&self) -> f64 {
        (self.omega.norm_squared() + self.omega1.norm_squared()).sqrt()
    }

    /// `Omega1 - Omega`, the angular velocity of the damper relative to the
    /// outer body.
    pub fn relative_velocity(&self) -> Vector3<f64> {
        self.omega1 - self.omega
    }
}

/// Scalar balances evaluated at a state: kinetic energy, squared momentum
/// norm, and the (non-positive) energy dissipation rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Balances {
    /// `V = (<Omega, J Omega> + I <Omega1, Omega1>) / 2`
    pub kinetic_energy: f64,
    /// `K^2 = |J Omega + I Omega1|^2`, conserved along solutions.
    pub momentum_sq: f64,
    /// `dV/dt = -k |Omega1 - Omega|^2`, zero exactly when the solids are at
    /// relative rest.
    pub dissipation_rate: f64,
    /// `M = J Omega + I Omega1`, the total angular momentum in the body frame.
    pub total_momentum: Vector3<f64>,
}

/// Right-hand side of the equations of motion:
///
/// ```text
/// dOmega/dt  = J^{-1} (k (Omega1 - Omega) - Omega x (J Omega))
/// dOmega1/dt = -(k/I) (Omega1 - Omega) - Omega x Omega1
/// ```
///
/// The returned [`State`] holds the two derivative vectors. Pure function;
/// defined on all of R^6 for valid parameters.
pub fn rhs(params: &BodyParams, s: &State) -> State {
    let relative = s.omega1 - s.omega;
    let k = params.coupling();
    let omega_dot = params.j_inv_apply(&(k * relative - s.omega.cross(&params.j_apply(&s.omega))));
    let omega1_dot = -(k / params.damper_inertia()) * relative - s.omega.cross(&s.omega1);
    State::new(omega_dot, omega1_dot)
}

/// Evaluate the scalar balances at a state.
pub fn balances(params: &BodyParams, s: &State) -> Balances {
    let j_omega = params.j_apply(&s.omega);
    let i = params.damper_inertia();
    let total_momentum = j_omega + i * s.omega1;
    Balances {
        kinetic_energy: 0.5 * (s.omega.dot(&j_omega) + i * s.omega1.dot(&s.omega1)),
        momentum_sq: total_momentum.norm_squared(),
        dissipation_rate: -params.coupling() * s.relative_velocity().norm_squared(),
        total_momentum,
    }
}

/// Residual of the kinetic-energy balance evaluated through the right-hand
/// side: `|<grad V, f(s)> + k |Omega1 - Omega|^2|` with the gradient
/// `grad V = (J Omega, I Omega1)` taken analytically. Vanishes in exact
/// arithmetic; serves as a self-test of [`rhs`].
pub fn energy_balance_residual(params: &BodyParams, s: &State) -> f64 {
    let f = rhs(params, s);
    let dv = params.j_apply(&s.omega).dot(&f.omega) + params.damper_inertia() * s.omega1.dot(&f.omega1);
    (dv - balances(params, s).dissipation_rate).abs()
}

/// Residual of momentum conservation evaluated through the right-hand side:
/// `|d(K^2)/dt| = |2 <M, dM/dt>|`, zero in exact arithmetic.
pub fn momentum_balance_residual(params: &BodyParams, s: &State) -> f64 {
    let f = rhs(params, s);
    let i = params.damper_inertia();
    let m = params.j_apply(&s.omega) + i * s.omega1;
    let m_dot = params.j_apply(&f.omega) + i * f.omega1;
    (2.0 * m.dot(&m_dot)).abs()
}
