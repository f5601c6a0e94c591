//! Sharp bounds on causal effects in binary instrumental-variable models,
//! derived by exact polytope computation.
//!
//! The pipeline is: enumerate the latent-parameter vertices of a
//! [`Scenario`](scenarios::Scenario), push them through the scenario's
//! multilinear map, compute the facets of their convex hull
//! ([`polytope::facet_enumeration`]), and split those facets into
//! observable-only model tests and lower/upper bounds on the causal target
//! ([`bounds::partition`]). The [`oracle`] module re-derives every interval
//! by exact linear programming over mixtures of the vertices.

pub mod arith;
pub mod bounds;
pub mod data;
pub mod error;
pub mod oracle;
pub mod polytope;
pub mod scenarios;

pub use arith::{AffineForm, CoordinateSpace, LinearConstraint, Point, Rational, Relation};
pub use bounds::{evaluate_bounds, model_check, partition, BoundSet, Interval};
pub use data::ObservedTables;
pub use error::{ArithError, BoundsError, DataError, OracleError, PolytopeError, ScenarioError};
pub use oracle::{cross_check, LpOutcome, MixtureLP, Sense};
pub use polytope::{facet_enumeration, HRepresentation, VertexSet};
pub use scenarios::{ParameterPoint, Scenario, ScenarioName};
