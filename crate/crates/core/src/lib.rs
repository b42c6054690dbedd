//! Constrained non-concave maximization over products of simplices.
//!
//! The crate implements the multiplicative weights update (MWU) map
//!
//! ```text
//! x'_ij = x_ij (1 + ε_i ∂P/∂x_ij) / (1 + ε_i Σ_s x_is ∂P/∂x_is)
//! ```
//!
//! together with the Baum–Eagon map for nonnegative-coefficient polynomials
//! and its surrogate-polynomial extension to rational objectives. Limit
//! points can be classified against first- and second-order KKT conditions
//! ([`stationarity`]) and their stability checked through the spectrum of
//! the projected Jacobian of the MWU map ([`spectral`]). [`experiments`]
//! hosts the reproducible studies driven by the `mwu` binary.
//!
//! ```
//! use simplex_mwu::prelude::*;
//!
//! let p = builtin("coord-2x2").unwrap();
//! let x0 = random_profile(p.shape(), 7);
//! let eps = safe_stepsize(&p, p.shape(), 64, 0);
//! let traj = run(&x0, &p, &eps, Method::Mwu, &RunOptions::new(1e-12, 100_000));
//! assert_eq!(traj.status, RunStatus::Converged);
//! let verdict = classify(traj.final_point(), &p, &Tolerances::default()).unwrap();
//! assert_eq!(verdict.verdict, Verdict::SecondOrderStationary);
//! ```

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod objective;
pub mod simplex;
pub mod spectral;
pub mod stationarity;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::dynamics::{
        baum_eagon_step, mwu_step, rational_be_step, run, safe_stepsize, Method, RunOptions, RunStatus, StepSizes,
        Trajectory,
    };
    pub use crate::error::{Error, Result};
    pub use crate::objective::{
        build_surrogate, builtin, AnyObjective, BlackBoxObjective, Objective, RationalObjective, SparsePolynomial,
    };
    pub use crate::simplex::{random_profile, support, DomainShape, StrategyProfile};
    pub use crate::spectral::{
        analytic_jacobian, compact_form, project_jacobian, spectrum, stability_verdict, JacobianBundle, Stability,
    };
    pub use crate::stationarity::{
        check_first_order, check_second_order, classify, tangent_basis, KKTReport, Tolerances, Verdict,
    };
}
