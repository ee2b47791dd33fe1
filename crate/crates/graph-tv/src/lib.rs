//! Exact total-variation penalized regression on finite graphs.
//!
//! Minimizes `0.5 * sum_i w_i (f_i - y_i)^2 + sum_(i,j) lambda_ij |f_j - f_i|`
//! exactly, by an active-set homotopy from the unpenalized least-squares
//! solution. Includes graph builders (chains, 4-neighbourhood image grids,
//! Delaunay triangulations, dummy-vertex baseline augmentation), a dyadic
//! edge schedule for grids, automatic smoothing-parameter selection, an
//! optimality-certificate checker, and a brute-force reference minimizer
//! for small instances.

pub mod delaunay;
pub mod error;
pub mod forest;
pub mod graph;
pub mod oracle;
pub mod params;
pub mod rng;
pub mod schedule;
pub mod sim;
pub mod solver;

pub use error::{DelaunayError, ForestError, GraphError, OracleError, ParamError, SolveError};
pub use forest::ActiveForest;
pub use graph::{Edge, Graph, GridShape, LambdaSpec};
pub use oracle::{brute_force_minimize, check_certificate, CertificateReport};
pub use params::{
    estimate_sigma, local_squeezing, solve_discrepancy, squeeze_chain, BaselineMode, ChainFit,
    SqueezeConfig,
};
pub use schedule::{dyadic_grid_order, dyadic_grid_stages, natural_order, EdgeSchedule};
pub use solver::{objective, solve, working_objective, SolveOptions, SolveResult, Solver};
