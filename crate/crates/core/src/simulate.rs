//! Replays a series through the optimal dispatch policy.
//!
//! Each interval is dispatched independently (closed form, or the exact LP
//! when the thresholds are not in standard order, or the piecewise solver
//! when a production curve is given). The log keeps one row per interval and
//! the breakdown aggregates it into revenue and energy-allocation totals.

use serde::{Deserialize, Serialize};

use crate::dispatch::{dispatch_or_fallback, DispatchError, RegionLabel};
use crate::model::{
    amortized_fixed_cost, feasibility_tolerance, gross_profit, Capacities, Dispatch,
    IntervalSignal, MarketParams, ParticipationModel,
};
use crate::piecewise::{optimal_dispatch_piecewise, piecewise_gross_profit, PiecewiseProduction};
use crate::profitability::{ProfitSurface, ProfitabilityError, SignalSeries};

/// How an interval's dispatch was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DispatchSource {
    /// Closed-form region.
    Region(RegionLabel),
    /// Exact LP, used for nonstandard threshold orderings.
    Lp,
    /// Piecewise production solver.
    Piecewise,
}

impl DispatchSource {
    pub fn region(self) -> Option<RegionLabel> {
        match self {
            Self::Region(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Region(r) => r.as_str(),
            Self::Lp => "LP",
            Self::Piecewise => "PW",
        }
    }
}

/// One row of the dispatch log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalRecord {
    pub t: usize,
    pub signal: IntervalSignal,
    pub dispatch: Dispatch,
    pub source: DispatchSource,
    /// Gross profit of the interval, $.
    pub gross_profit: f64,
    /// Own renewable output consumed by the electrolyzer, kW.
    pub to_hydrogen: f64,
    /// Renewable output neither used nor sold, kW.
    pub curtailed: f64,
}

/// Annual-report style totals. Money in $, energy in kWh, hydrogen in kg,
/// shares in percent of total renewable output.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RevenueBreakdown {
    pub total_renewable_kwh: f64,
    pub pct_renewable_to_hydrogen: f64,
    pub hydrogen_kg: f64,
    /// `(pi_h + tau_h) * kg`.
    pub revenue_hydrogen: f64,
    pub pct_renewable_sold: f64,
    /// Export revenue including export RECs.
    pub revenue_renewable_sales: f64,
    /// Renewable production credit on all generation.
    pub renewable_credit: f64,
    pub pct_curtailed: f64,
    /// Curtailed energy valued at `lmp + tau_rec_ex + tau_r`. This is an
    /// export-opportunity measure, not a cash flow.
    pub lost_revenue_curtailment: f64,
    pub import_cost: f64,
    pub water_cost: f64,
    pub gross_profit: f64,
    pub amortized_fixed_cost: f64,
    pub operating_profit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub log: Vec<IntervalRecord>,
    pub breakdown: RevenueBreakdown,
}

/// Dispatches every interval and aggregates the results.
pub fn run_simulation(
    series: &SignalSeries,
    params: &MarketParams,
    caps: &Capacities,
    model: ParticipationModel,
    pw: Option<&PiecewiseProduction>,
) -> Result<SimulationResult, ProfitabilityError> {
    params.validate()?;
    caps.validate()?;
    if series.interval_hours() != params.interval_hours {
        return Err(ProfitabilityError::IntervalMismatch {
            series: series.interval_hours(),
            params: params.interval_hours,
        });
    }
    let dt = params.interval_hours;
    let mut log = Vec::with_capacity(series.len());
    let mut b = RevenueBreakdown::default();
    let mut to_h_kwh = 0.0;
    let mut sold_kwh = 0.0;
    let mut curtailed_kwh = 0.0;

    for (t, sig) in series.signals().iter().enumerate() {
        let (dispatch, source, gp) = match pw {
            Some(pw) => {
                let (d, _) = optimal_dispatch_piecewise(params, caps, sig, model, pw)?;
                let gp = piecewise_gross_profit(params, caps, sig, &d, pw)?;
                (d, DispatchSource::Piecewise, gp)
            }
            None => {
                let (d, region) = dispatch_or_fallback(params, caps, sig, model)?;
                let gp = gross_profit(params, caps, sig, &d).map_err(DispatchError::from)?;
                let source = region.map_or(DispatchSource::Lp, DispatchSource::Region);
                (d, source, gp)
            }
        };
        d_check(&dispatch, caps, sig, model)?;
        let available = sig.eta * caps.q_r;
        let to_hydrogen = dispatch.renewable_to_hydrogen(caps, sig);
        let curtailed = available - to_hydrogen - dispatch.p_ex;

        b.total_renewable_kwh += available * dt;
        to_h_kwh += to_hydrogen * dt;
        sold_kwh += dispatch.p_ex * dt;
        curtailed_kwh += curtailed * dt;
        b.hydrogen_kg += dispatch.h;
        b.revenue_hydrogen += (params.pi_h + params.tau_h) * dispatch.h;
        b.revenue_renewable_sales += (sig.lmp + params.tau_rec_ex) * dispatch.p_ex * dt;
        b.renewable_credit += params.tau_r * available * dt;
        b.lost_revenue_curtailment += curtailed * (sig.lmp + params.tau_rec_ex + params.tau_r) * dt;
        b.import_cost += (sig.lmp + params.tau_rec_im) * dispatch.p_im * dt;
        b.water_cost += params.c_w * dispatch.h;
        b.gross_profit += gp;

        log.push(IntervalRecord {
            t,
            signal: *sig,
            dispatch,
            source,
            gross_profit: gp,
            to_hydrogen,
            curtailed,
        });
    }

    if b.total_renewable_kwh > 0.0 {
        b.pct_renewable_to_hydrogen = 100.0 * to_h_kwh / b.total_renewable_kwh;
        b.pct_renewable_sold = 100.0 * sold_kwh / b.total_renewable_kwh;
        b.pct_curtailed = 100.0 * curtailed_kwh / b.total_renewable_kwh;
    }
    b.amortized_fixed_cost = amortized_fixed_cost(params, caps, series.len() as f64);
    b.operating_profit = b.gross_profit - b.amortized_fixed_cost;
    Ok(SimulationResult { log, breakdown: b })
}

fn d_check(
    d: &Dispatch,
    caps: &Capacities,
    sig: &IntervalSignal,
    model: ParticipationModel,
) -> Result<(), ProfitabilityError> {
    d.check_feasible(caps, sig, feasibility_tolerance(caps))?;
    d.check_model(model)?;
    Ok(())
}

/// Operating profit forecast for `horizon` intervals from coefficients
/// estimated on `train`, assuming the training period is representative.
/// Its accuracy is only as good as that assumption.
pub fn forecast_profit(
    train: &SignalSeries,
    caps: &Capacities,
    params: &MarketParams,
    model: ParticipationModel,
    horizon: f64,
) -> Result<f64, ProfitabilityError> {
    let surface = ProfitSurface::new(train, params, model)?.with_horizon(horizon)?;
    Ok(surface.plan(caps)?.op_profit)
}
