//! Numerical tensor calculus for warped-product Riemannian metrics and
//! Yamabe gradient solitons.
//!
//! The crate evaluates scalar fields through exact jet arithmetic, computes
//! curvature pointwise on chart domains, assembles warped products
//! g = g_B + f^2 g_F, verifies the soliton equation Hess h = (R - rho) g and
//! its companion identities, reconstructs 1-D-base soliton metrics from their
//! profile ODE, and probes scalar-curvature and potential-growth bounds on a
//! catalog of explicit examples.

pub mod bounds;
pub mod catalog;
pub mod curvature;
pub mod error;
pub mod expr;
pub mod grid;
pub mod hermite;
pub mod jet;
pub mod metric;
pub mod soliton;
pub mod specfile;
pub mod tashiro;
pub mod tol;
pub mod warped;

pub use error::{GeomError, Result};
pub use expr::ScalarExpr;
pub use jet::{eval_grad_hess_raw, eval_jet2, eval_value, Jet2};
pub use metric::{DomainBox, MetricField};
pub use tol::Tolerances;
