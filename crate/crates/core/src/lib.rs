//! Exact efficient frontiers for delegating a treatment decision to an
//! advisor of unknown alignment.
//!
//! A designer knows, for each subgroup of a population, the fraction that
//! needs a risky treatment. Before asking an advisor to recommend who to
//! treat, the designer chooses which auxiliary covariate the advisor may
//! condition on. A well-aligned advisor uses the covariate to target
//! treatment precisely; a misaligned one uses it to steer treatment toward
//! patients it harms, constrained only by consistency with the designer's
//! prior data. This crate computes, in exact rational arithmetic:
//!
//! - the payoff of any concrete interaction ([`game`]),
//! - the efficient frontier between worst-case and best-case payoffs and
//!   the covariate designs implementing each point ([`frontier_single`],
//!   [`frontier_aggregate`]),
//! - optimal informativeness bounds on the covariate ([`tau_design`]),
//! - the frontier under mixed beliefs about Nature ([`hurwicz`]), and
//! - brute-force verification of every closed form ([`oracle`]).
//!
//! See the guide chapters under [`guide`] for worked examples; every code
//! block there runs as a doc-test.

pub mod error;
pub mod rational;

pub mod problem;

pub mod payoff;

pub mod frontier_single;

pub mod frontier_aggregate;

pub mod game;

pub mod oracle;

pub mod tau_design;

pub mod hurwicz;

pub mod guide;

pub use error::{Error, Violation};
pub use problem::{
    validate_problem, CovariateDesign, DesignChoice, DesignPoint, Frontier, PayoffPoint, Problem,
    Segment, Subgroup, SubgroupDesign, TauBounds, VertexKind,
};
pub use rational::{parse_rational, rat, Rational};
