//! Sequential single-item auctions for MinSum multi-robot task allocation,
//! with the maximal family of cost perturbations under which the auction
//! result does not change.
//!
//! The pipeline is [`run_auction`] → [`df_shortcut`] (together:
//! [`assign`]) for planning, and [`auction_sensitivity`] for the intervals.
//! Everything is generic over the cost scalar (`f32` or `f64`); the aliases
//! below name the common concrete types.

pub mod auction;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metric;
pub mod model;
pub mod oracle;
pub mod planner;
pub mod quotient;
pub mod scalar;
pub mod sensitivity;

pub use auction::{bid_rounds, run_auction, run_auction_traced, AuctionOutcome, Bid, RoundTrace, WinningEdge};
pub use error::{Error, Result};
pub use geometry::{euclidean_costs, obstacle_costs, Obstacle};
pub use metric::{combine_metrics, validate_metric, Axiom, MetricReport, Violation, DEFAULT_TOL};
pub use model::{plan_cost, route_cost, CostTable, Edge, EntityId, EntityKind, MrtaInstance, Plan, Route};
pub use planner::{assign, df_shortcut};
pub use quotient::{quotient_metricize, QuotientInstance};
pub use scalar::Scalar;
pub use sensitivity::{
    auction_sensitivity, contains, error_intervals, initialiser, lex_compare, replan_check,
    single_edge_bounds, EdgeBounds, EdgeRole, InitialBounds, IntervalFamily, PerturbationDelta,
    ReplanDecision, Side,
};

pub type CostTable64 = CostTable<f64>;
pub type CostTable32 = CostTable<f32>;
pub type Instance64 = MrtaInstance<f64>;
pub type Instance32 = MrtaInstance<f32>;
pub type Plan64 = Plan<f64>;
pub type Outcome64 = AuctionOutcome<f64>;
pub type IntervalFamily64 = IntervalFamily<f64>;
pub type IntervalFamily32 = IntervalFamily<f32>;
