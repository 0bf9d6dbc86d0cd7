//! Concave piecewise linear electrolyzer production.
//!
//! Hydrogen output is bounded by every segment, `h <= (alpha_k * p_h + beta_k) * dt`,
//! so the achievable output is the lower envelope of the segments. Dispatch for
//! any number of segments goes through the exact LP solver with the envelope
//! breakpoints added as extra vertices. For two segments under the prosumer
//! model there is also an explicit threshold map, [`two_segment_closed_form`].

use serde::{Deserialize, Serialize};

use crate::dispatch::DispatchError;
use crate::lp;
use crate::model::{
    feasibility_tolerance, gross_profit_unchecked, Capacities, Dispatch, IntervalSignal,
    MarketParams, ModelError, ParticipationModel,
};

/// One production segment: slope in kg/kWh, intercept in kg/h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Segment>", into = "Vec<Segment>")]
pub struct PiecewiseProduction {
    segments: Vec<Segment>,
}

impl TryFrom<Vec<Segment>> for PiecewiseProduction {
    type Error = DispatchError;

    fn try_from(segments: Vec<Segment>) -> Result<Self, Self::Error> {
        Self::new(segments)
    }
}

impl From<PiecewiseProduction> for Vec<Segment> {
    fn from(pw: PiecewiseProduction) -> Self {
        pw.segments
    }
}

impl PiecewiseProduction {
    /// Validates concavity: strictly decreasing nonnegative slopes, a zero first
    /// intercept and strictly increasing positive breakpoints (so every segment
    /// is active somewhere on the envelope).
    pub fn new(segments: Vec<Segment>) -> Result<Self, DispatchError> {
        let bad = |msg: String| Err(DispatchError::Piecewise(msg));
        if segments.is_empty() {
            return bad("at least one segment is required".into());
        }
        if segments
            .iter()
            .any(|s| !s.slope.is_finite() || !s.intercept.is_finite())
        {
            return bad("slopes and intercepts must be finite".into());
        }
        if segments[0].intercept != 0.0 {
            return bad(format!(
                "first intercept must be 0, got {}",
                segments[0].intercept
            ));
        }
        if segments[0].slope <= 0.0 {
            return bad("first slope must be positive".into());
        }
        if segments.last().unwrap().slope < 0.0 {
            return bad("slopes must be nonnegative".into());
        }
        for w in segments.windows(2) {
            if w[1].slope >= w[0].slope {
                return bad(format!(
                    "slopes must strictly decrease, got {} then {}",
                    w[0].slope, w[1].slope
                ));
            }
            if w[1].intercept < w[0].intercept {
                return bad(format!(
                    "intercepts must not decrease, got {} then {}",
                    w[0].intercept, w[1].intercept
                ));
            }
        }
        let pw = Self { segments };
        let bps = pw.breakpoints();
        if bps.first().is_some_and(|&b| b <= 0.0) || bps.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!(
                "breakpoints must be positive and strictly increasing, got {bps:?}"
            ));
        }
        Ok(pw)
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self, DispatchError> {
        Self::new(
            pairs
                .iter()
                .map(|&(slope, intercept)| Segment { slope, intercept })
                .collect(),
        )
    }

    /// Single segment through the origin, equivalent to the linear model.
    pub fn linear(gamma: f64) -> Result<Self, DispatchError> {
        Self::from_pairs(&[(gamma, 0.0)])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Electrolyzer inputs (kW) at which the active segment changes.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.segments
            .windows(2)
            .map(|w| (w[1].intercept - w[0].intercept) / (w[0].slope - w[1].slope))
            .collect()
    }

    /// Maximum hydrogen output rate at input `p_h`, kg/h.
    pub fn output_rate(&self, p_h: f64) -> f64 {
        self.segments
            .iter()
            .map(|s| s.slope * p_h + s.intercept)
            .fold(f64::INFINITY, f64::min)
    }

    /// All breakpoints must fall strictly inside `(0, q_h)`.
    pub fn validate_for(&self, q_h: f64) -> Result<(), DispatchError> {
        if let Some(&last) = self.breakpoints().last() {
            if last >= q_h {
                return Err(DispatchError::Piecewise(format!(
                    "breakpoint {last} kW is not below electrolyzer capacity {q_h} kW"
                )));
            }
        }
        Ok(())
    }
}

/// Gross profit of a dispatch under a piecewise curve; `d.h` must not exceed
/// the envelope.
pub fn piecewise_gross_profit(
    params: &MarketParams,
    caps: &Capacities,
    sig: &IntervalSignal,
    d: &Dispatch,
    pw: &PiecewiseProduction,
) -> Result<f64, DispatchError> {
    let tol = feasibility_tolerance(caps);
    d.check_feasible(caps, sig, tol)?;
    let bound = pw.output_rate(d.p_h) * params.interval_hours;
    if d.h > bound + 1e-9 * (1.0 + bound.abs()) {
        return Err(ModelError::Infeasible {
            constraint: "piecewise production",
            detail: format!("h = {} exceeds envelope {}", d.h, bound),
        }
        .into());
    }
    Ok(gross_profit_unchecked(params, caps, sig, d))
}

/// Optimal dispatch and gross profit with a piecewise production curve, for any
/// participation model and any number of segments.
pub fn optimal_dispatch_piecewise(
    params: &MarketParams,
    caps: &Capacities,
    sig: &IntervalSignal,
    model: ParticipationModel,
    pw: &PiecewiseProduction,
) -> Result<(Dispatch, f64), DispatchError> {
    params.validate()?;
    caps.validate()?;
    sig.validate()?;
    pw.validate_for(caps.q_h)?;
    let sol = lp::solve_exact(params, caps, sig, model, Some(pw))?;
    Ok((sol.dispatch, sol.profit))
}

/// Price thresholds of a piecewise curve: for each segment `k`,
/// `pi_lo[k] = alpha_k (pi_h + tau_h - c_w) - tau_rec_im` and
/// `pi_hi[k] = alpha_k (pi_h + tau_h - c_w) - tau_rec_ex`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseThresholds {
    pub pi_lo: Vec<f64>,
    pub pi_hi: Vec<f64>,
    pub neg_im: f64,
    pub neg_ex: f64,
}

pub fn piecewise_thresholds(
    params: &MarketParams,
    pw: &PiecewiseProduction,
) -> PiecewiseThresholds {
    let margin = params.hydrogen_margin();
    PiecewiseThresholds {
        pi_lo: pw
            .segments
            .iter()
            .map(|s| s.slope * margin - params.tau_rec_im)
            .collect(),
        pi_hi: pw
            .segments
            .iter()
            .map(|s| s.slope * margin - params.tau_rec_ex)
            .collect(),
        neg_im: -params.tau_rec_im,
        neg_ex: -params.tau_rec_ex,
    }
}

/// Relative position of the two middle thresholds of a two-segment curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoSegmentOrdering {
    /// `pi_hi[1] < pi_lo[0]`: a band where only the first segment is worth
    /// running, and it is worth importing for.
    SplitBand,
    /// `pi_hi[1] >= pi_lo[0]`: a band where both segments run on own
    /// renewables only.
    Overlapping,
}

/// Explicit threshold map for a two-segment curve under the prosumer model.
///
/// With `T` the segment breakpoint, `Q = q_h` and `R = eta*q_r`, renewable
/// output is used before imports, the first segment is filled before the
/// second, a segment runs on imports iff `lmp <= pi_lo[k]` and on own
/// renewables iff `lmp < pi_hi[k]`. Requires
/// `-tau_rec_im < -tau_rec_ex < pi_lo[1]`.
pub fn two_segment_closed_form(
    params: &MarketParams,
    caps: &Capacities,
    sig: &IntervalSignal,
    pw: &PiecewiseProduction,
) -> Result<(Dispatch, TwoSegmentOrdering), DispatchError> {
    params.validate()?;
    caps.validate()?;
    sig.validate()?;
    if pw.segments.len() != 2 {
        return Err(DispatchError::Piecewise(format!(
            "closed form needs exactly 2 segments, got {}",
            pw.segments.len()
        )));
    }
    pw.validate_for(caps.q_h)?;
    let th = piecewise_thresholds(params, pw);
    if !(th.neg_im < th.neg_ex && th.neg_ex < th.pi_lo[1]) {
        return Err(DispatchError::NonstandardOrdering(params.thresholds()));
    }
    let ordering = if th.pi_hi[1] < th.pi_lo[0] {
        TwoSegmentOrdering::SplitBand
    } else {
        TwoSegmentOrdering::Overlapping
    };

    let lmp = sig.lmp;
    let r = sig.eta * caps.q_r;
    let q = caps.q_h;
    let t = pw.breakpoints()[0];
    let pos = |v: f64| v.max(0.0);

    // Own renewables run both segments, imports only the first.
    let first_imported = || {
        if r > q {
            (q, r - q, 0.0)
        } else if r >= t {
            (r, 0.0, 0.0)
        } else {
            (t, 0.0, t - r)
        }
    };
    // Only the first segment runs, topped up from the grid if needed.
    let first_only_imported = || {
        if r >= t {
            (t, r - t, 0.0)
        } else {
            (t, 0.0, t - r)
        }
    };
    let first_only_renewable = || (r.min(t), pos(r - t), 0.0);

    let (p_h, p_ex, p_im) = if lmp <= th.neg_im {
        (q, 0.0, q)
    } else if lmp <= th.neg_ex {
        (q, 0.0, pos(q - r))
    } else if lmp <= th.pi_lo[1] {
        (q, pos(r - q), pos(q - r))
    } else if lmp >= th.pi_hi[0] {
        (0.0, r, 0.0)
    } else {
        match ordering {
            TwoSegmentOrdering::SplitBand => {
                if lmp < th.pi_hi[1] {
                    first_imported()
                } else if lmp <= th.pi_lo[0] {
                    first_only_imported()
                } else {
                    first_only_renewable()
                }
            }
            TwoSegmentOrdering::Overlapping => {
                if lmp <= th.pi_lo[0] {
                    first_imported()
                } else if lmp < th.pi_hi[1] {
                    (r.min(q), pos(r - q), 0.0)
                } else {
                    first_only_renewable()
                }
            }
        }
    };
    let h = pw.output_rate(p_h) * params.interval_hours;
    Ok((Dispatch { p_h, p_ex, p_im, h }, ordering))
}
