//! Profit-maximizing dispatch and profitability analysis for a hydrogen
//! producer colocated with a renewable plant.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] holds the economic parameters, threshold prices and the
//!   per-interval gross profit.
//! * [`dispatch`] gives the closed-form optimal dispatch for the four market
//!   participation models, and [`piecewise`] extends it to concave piecewise
//!   linear electrolyzer curves.
//! * [`lp`] is an exact vertex-enumeration reference solver for the same
//!   single-interval problem.
//! * [`profitability`] estimates per-unit-capacity revenue coefficients from a
//!   price/capacity-factor history and uses them for break-even, matching and
//!   budget-constrained sizing.
//! * [`simulate`] replays a series through the dispatch policy and produces a
//!   revenue breakdown.
//! * [`ingest`] loads and validates CSV time series.

pub mod bisect;
pub mod dispatch;
pub mod ingest;
pub mod lp;
pub mod model;
pub mod piecewise;
pub mod profitability;
pub mod simulate;

pub use dispatch::{classify_region, optimal_dispatch, DispatchError, RegionLabel};
pub use model::{
    amortized_fixed_cost, compute_thresholds, gross_profit, AmortizedRates, Capacities, Dispatch,
    IntervalSignal, MarketParams, ModelError, ParticipationModel, Thresholds,
};
pub use piecewise::{optimal_dispatch_piecewise, PiecewiseProduction};
pub use profitability::{CapacityPlan, Classification, ProfitCoefficients, SignalSeries};
pub use simulate::{run_simulation, RevenueBreakdown, SimulationResult};
