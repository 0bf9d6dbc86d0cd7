//! Operating profit as a function of nameplate capacities.
//!
//! For a fixed electrolyzer-to-renewable ratio `kappa = q_h / q_r` every
//! interval falls in one region, and within a region the optimal gross profit
//! is linear in `(q_r, q_h)`. Summing the per-region integrands over a history
//! gives two coefficients, and the operating profit over `n` intervals is
//!
//! ```text
//! (sum_a_r - alpha_r_n) * q_r + (sum_a_h - alpha_h_n) * q_h
//! ```
//!
//! with `alpha_*_n = (n / N) * alpha_*` the amortized fixed costs. Profit is
//! therefore positively homogeneous in the capacities, so the capacity plane
//! splits into cones bounded by break-even rays. This module estimates the
//! coefficients and uses them for break-even analysis, electrolyzer matching
//! and budget-constrained sizing.

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bisect::{bisect_boundary, bisect_root};
use crate::dispatch::{region_for, DispatchError, RegionLabel};
use crate::model::{Capacities, IntervalSignal, MarketParams, ParticipationModel, Thresholds};

/// Default upper end of the ratio range searched for rays and sizing.
pub const DEFAULT_KAPPA_MAX: f64 = 3.0;
/// Default resolution of the break-even sign-change scan.
pub const DEFAULT_SCAN_STEP: f64 = 1e-3;
/// Relative width of the break-even band around zero profit.
pub const BREAK_EVEN_EPS: f64 = 1e-6;
/// Points on the budget line used to cross-check sizing.
pub const SIZING_SWEEP_POINTS: usize = 200;

const ROOT_TOL: f64 = 1e-10;
const MATCHING_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfitabilityError {
    #[error("empty series")]
    EmptySeries,
    #[error(transparent)]
    Dispatch(#[from] DispatchError),
    #[error("coefficients were estimated at kappa={coeffs} but capacities have kappa={caps}")]
    KappaMismatch { coeffs: f64, caps: f64 },
    #[error(
        "series interval length {series} h does not match parameter interval length {params} h"
    )]
    IntervalMismatch { series: f64, params: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(
        "sizing cross-check failed: returned profit {returned} is below sweep maximum {sweep_max}"
    )]
    SweepCheck { returned: f64, sweep_max: f64 },
}

impl From<crate::model::ModelError> for ProfitabilityError {
    fn from(e: crate::model::ModelError) -> Self {
        Self::Dispatch(e.into())
    }
}

/// A history of interval signals treated as the empirical distribution of
/// prices and capacity factors.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSeries {
    signals: Vec<IntervalSignal>,
    timestamps: Option<Vec<DateTime<FixedOffset>>>,
    label: String,
    interval_hours: f64,
}

impl SignalSeries {
    pub fn new(
        signals: Vec<IntervalSignal>,
        interval_hours: f64,
        label: impl Into<String>,
    ) -> Result<Self, ProfitabilityError> {
        if signals.is_empty() {
            return Err(ProfitabilityError::EmptySeries);
        }
        if !(interval_hours.is_finite() && interval_hours > 0.0) {
            return Err(ProfitabilityError::InvalidArgument(format!(
                "interval_hours must be positive, got {interval_hours}"
            )));
        }
        for (i, s) in signals.iter().enumerate() {
            s.validate()
                .map_err(|e| ProfitabilityError::InvalidArgument(format!("interval {i}: {e}")))?;
        }
        Ok(Self {
            signals,
            timestamps: None,
            label: label.into(),
            interval_hours,
        })
    }

    /// Convenience constructor from `(lmp, eta)` pairs.
    pub fn from_pairs(
        pairs: &[(f64, f64)],
        interval_hours: f64,
        label: impl Into<String>,
    ) -> Result<Self, ProfitabilityError> {
        let signals = pairs
            .iter()
            .map(|&(lmp, eta)| IntervalSignal { lmp, eta })
            .collect();
        Self::new(signals, interval_hours, label)
    }

    /// Attaches one strictly increasing timestamp per interval.
    pub fn with_timestamps(
        mut self,
        timestamps: Vec<DateTime<FixedOffset>>,
    ) -> Result<Self, ProfitabilityError> {
        if timestamps.len() != self.signals.len() {
            return Err(ProfitabilityError::InvalidArgument(format!(
                "{} timestamps for {} intervals",
                timestamps.len(),
                self.signals.len()
            )));
        }
        if let Some(i) = timestamps.windows(2).position(|w| w[1] <= w[0]) {
            return Err(ProfitabilityError::InvalidArgument(format!(
                "timestamps not strictly increasing at interval {}",
                i + 1
            )));
        }
        self.timestamps = Some(timestamps);
        Ok(self)
    }

    pub fn signals(&self) -> &[IntervalSignal] {
        &self.signals
    }

    pub fn timestamps(&self) -> Option<&[DateTime<FixedOffset>]> {
        self.timestamps.as_deref()
    }

    pub fn start(&self) -> Option<DateTime<FixedOffset>> {
        self.timestamps.as_ref().map(|t| t[0])
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn interval_hours(&self) -> f64 {
        self.interval_hours
    }

    pub fn len(&self) -> usize {
        self.signals.len()
    }

    /// Always false for a constructed series; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    /// Consecutive subrange `[from, to)` as a new series.
    pub fn slice(&self, from: usize, to: usize) -> Result<Self, ProfitabilityError> {
        if from > to || to > self.len() {
            return Err(ProfitabilityError::InvalidArgument(format!(
                "slice {from}..{to} out of range for length {}",
                self.len()
            )));
        }
        let mut out = Self::new(
            self.signals[from..to].to_vec(),
            self.interval_hours,
            self.label.clone(),
        )?;
        out.timestamps = self.timestamps.as_ref().map(|t| t[from..to].to_vec());
        Ok(out)
    }
}

/// Revenue coefficients of a series at one capacity ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfitCoefficients {
    /// Gross profit per kW of renewable capacity over the horizon, $/kW.
    pub sum_a_r: f64,
    /// Gross profit per kW of electrolyzer capacity over the horizon, $/kW.
    pub sum_a_h: f64,
    /// Ratio the regions were classified at; infinite for `q_r = 0`.
    pub kappa: f64,
    pub alpha_r_n: f64,
    pub alpha_h_n: f64,
    /// Horizon in intervals that the sums and costs refer to.
    pub n: f64,
    /// Number of series intervals in each region, indexed by [`RegionLabel::index`].
    pub region_counts: [u64; 7],
}

impl ProfitCoefficients {
    /// Empirical region probabilities; they sum to 1.
    pub fn region_probs(&self) -> [f64; 7] {
        let total: u64 = self.region_counts.iter().sum();
        let mut out = [0.0; 7];
        for (o, &c) in out.iter_mut().zip(&self.region_counts) {
            *o = c as f64 / total as f64;
        }
        out
    }

    pub fn region_prob(&self, region: RegionLabel) -> f64 {
        self.region_probs()[region.index()]
    }

    /// Same coefficients under a stationarity assumption for a horizon of
    /// `horizon` intervals.
    pub fn scaled_to(&self, horizon: f64) -> Self {
        let f = horizon / self.n;
        Self {
            sum_a_r: self.sum_a_r * f,
            sum_a_h: self.sum_a_h * f,
            alpha_r_n: self.alpha_r_n * f,
            alpha_h_n: self.alpha_h_n * f,
            n: horizon,
            ..*self
        }
    }

    /// Net profit per kW of renewable capacity.
    pub fn net_r(&self) -> f64 {
        self.sum_a_r - self.alpha_r_n
    }

    /// Net profit per kW of electrolyzer capacity.
    pub fn net_h(&self) -> f64 {
        self.sum_a_h - self.alpha_h_n
    }

    /// Scale used for the break-even band: gross revenue plus fixed cost.
    pub fn revenue_scale(&self, caps: &Capacities) -> f64 {
        self.sum_a_r.abs() * caps.q_r
            + self.sum_a_h.abs() * caps.q_h
            + self.alpha_r_n * caps.q_r
            + self.alpha_h_n * caps.q_h
    }
}

/// Sign class of an operating profit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Profitable,
    Deficit,
    BreakEven,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Profitable => "profitable",
            Self::Deficit => "deficit",
            Self::BreakEven => "break_even",
        }
    }

    /// Profit within `BREAK_EVEN_EPS * scale` of zero counts as break-even.
    pub fn of(op_profit: f64, scale: f64) -> Self {
        let band = BREAK_EVEN_EPS * scale;
        if op_profit > band {
            Self::Profitable
        } else if op_profit < -band {
            Self::Deficit
        } else {
            Self::BreakEven
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityPlan {
    pub caps: Capacities,
    /// Operating profit over the horizon, $.
    pub op_profit: f64,
    pub classification: Classification,
    pub kappa_star: Option<f64>,
}

/// Per-interval integrands `(a_r, a_h)`: the interval's optimal gross profit
/// is `a_r * q_r + a_h * q_h` for every capacity pair in the region.
pub fn region_integrands(
    region: RegionLabel,
    params: &MarketParams,
    th: &Thresholds,
    sig: &IntervalSignal,
) -> (f64, f64) {
    let dt = params.interval_hours;
    let eta = sig.eta;
    let lmp = sig.lmp;
    let value = params.electrolysis_value();
    let credit = params.tau_r * eta;
    let (a_r, a_h) = match region {
        RegionLabel::R1 => (
            (params.tau_rec_im + params.tau_r) * eta + eta * lmp,
            th.pi_lo - lmp,
        ),
        RegionLabel::R2 => ((value + params.tau_r) * eta, 0.0),
        RegionLabel::R2p | RegionLabel::R5Neg => (credit, value),
        RegionLabel::R3 => ((params.tau_rec_ex + params.tau_r) * eta + eta * lmp, 0.0),
        RegionLabel::R4 => (
            (params.tau_rec_ex + params.tau_r) * eta + eta * lmp,
            th.pi_hi - lmp,
        ),
        RegionLabel::R6Neg => (credit, th.pi_lo - lmp),
    };
    (a_r * dt, a_h * dt)
}

fn standard_thresholds(params: &MarketParams) -> Result<Thresholds, ProfitabilityError> {
    params.validate()?;
    let th = params.thresholds();
    if !th.standard {
        return Err(DispatchError::NonstandardOrdering(th).into());
    }
    Ok(th)
}

fn check_interval(series: &SignalSeries, params: &MarketParams) -> Result<(), ProfitabilityError> {
    if series.is_empty() {
        return Err(ProfitabilityError::EmptySeries);
    }
    if series.interval_hours != params.interval_hours {
        return Err(ProfitabilityError::IntervalMismatch {
            series: series.interval_hours,
            params: params.interval_hours,
        });
    }
    Ok(())
}

/// Representative capacities for classification at ratio `kappa`.
fn unit_caps(kappa: f64) -> Capacities {
    if kappa.is_infinite() {
        Capacities { q_r: 0.0, q_h: 1.0 }
    } else {
        Capacities {
            q_r: 1.0,
            q_h: kappa,
        }
    }
}

fn accumulate(
    series: &SignalSeries,
    params: &MarketParams,
    th: &Thresholds,
    class_caps: &Capacities,
    kappa: f64,
    model: ParticipationModel,
) -> ProfitCoefficients {
    let mut sum_a_r = 0.0;
    let mut sum_a_h = 0.0;
    let mut region_counts = [0u64; 7];
    for sig in &series.signals {
        let region = region_for(th, class_caps, sig, model);
        let (a_r, a_h) = region_integrands(region, params, th, sig);
        sum_a_r += a_r;
        sum_a_h += a_h;
        region_counts[region.index()] += 1;
    }
    let n = series.len() as f64;
    let share = n / params.intervals_per_year;
    ProfitCoefficients {
        sum_a_r,
        sum_a_h,
        kappa,
        alpha_r_n: share * params.alpha_r,
        alpha_h_n: share * params.alpha_h,
        n,
        region_counts,
    }
}

/// Coefficients at ratio `kappa` (`f64::INFINITY` for an electrolyzer without
/// renewables) over the series' own length.
///
/// Requires the standard threshold ordering; with a nonstandard ordering the
/// regions no longer partition the plane linearly and the error is returned.
pub fn estimate_coefficients(
    series: &SignalSeries,
    kappa: f64,
    params: &MarketParams,
    model: ParticipationModel,
) -> Result<ProfitCoefficients, ProfitabilityError> {
    if kappa.is_nan() || kappa < 0.0 {
        return Err(ProfitabilityError::InvalidArgument(format!(
            "kappa must be nonnegative, got {kappa}"
        )));
    }
    let th = standard_thresholds(params)?;
    check_interval(series, params)?;
    Ok(accumulate(
        series,
        params,
        &th,
        &unit_caps(kappa),
        kappa,
        model,
    ))
}

/// Coefficients classified at the actual capacities, so the regions match
/// the per-interval dispatch exactly.
pub fn coefficients_for(
    series: &SignalSeries,
    caps: &Capacities,
    params: &MarketParams,
    model: ParticipationModel,
) -> Result<ProfitCoefficients, ProfitabilityError> {
    caps.validate()?;
    let th = standard_thresholds(params)?;
    check_interval(series, params)?;
    let kappa = caps_kappa(caps);
    let class_caps = if caps.q_r == 0.0 && caps.q_h == 0.0 {
        unit_caps(0.0)
    } else {
        *caps
    };
    Ok(accumulate(series, params, &th, &class_caps, kappa, model))
}

fn caps_kappa(caps: &Capacities) -> f64 {
    caps.kappa()
        .unwrap_or(if caps.q_h > 0.0 { f64::INFINITY } else { 0.0 })
}

/// `(sum_a_r - alpha_r_n) q_r + (sum_a_h - alpha_h_n) q_h`.
pub fn operating_profit(
    coeffs: &ProfitCoefficients,
    caps: &Capacities,
) -> Result<f64, ProfitabilityError> {
    caps.validate()?;
    if caps.q_r > 0.0 || caps.q_h > 0.0 {
        let k = caps_kappa(caps);
        let same = if k.is_infinite() || coeffs.kappa.is_infinite() {
            k == coeffs.kappa
        } else {
            (k - coeffs.kappa).abs() <= 1e-12 * k.abs().max(coeffs.kappa.abs())
        };
        if !same {
            return Err(ProfitabilityError::KappaMismatch {
                coeffs: coeffs.kappa,
                caps: k,
            });
        }
    }
    Ok(coeffs.net_r() * caps.q_r + coeffs.net_h() * caps.q_h)
}

/// Shape of the profit curve in `q_h` for fixed `q_r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchingRegime {
    /// Electrolyzer capacity never pays for itself.
    Zero,
    /// Unique optimum strictly between 0 and `q_r`.
    Interior,
    /// Marginal value is exactly zero beyond `q_r`, so every `kappa >= 1`
    /// gives the same maximum. `kappa_star` is reported as 1.
    AnyAboveOne,
    /// Grid-fed electrolysis alone covers the electrolyzer fixed cost, so
    /// profit grows without bound in `q_h`. `kappa_star` is the search cap.
    Unbounded,
}

impl MatchingRegime {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Interior => "interior",
            Self::AnyAboveOne => "any_kappa_at_least_one",
            Self::Unbounded => "unbounded",
        }
    }
}

/// Electrolyzer matching result for a fixed renewable capacity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Matching {
    pub kappa_star: f64,
    pub q_h_star: f64,
    pub regime: MatchingRegime,
}

/// Profit surface of one series under one participation model, over a
/// horizon of `horizon` intervals (the series length unless overridden).
#[derive(Debug, Clone)]
pub struct ProfitSurface<'a> {
    series: &'a SignalSeries,
    params: MarketParams,
    th: Thresholds,
    model: ParticipationModel,
    horizon: f64,
    kappa_max: f64,
    scan_step: f64,
}

impl<'a> ProfitSurface<'a> {
    pub fn new(
        series: &'a SignalSeries,
        params: &MarketParams,
        model: ParticipationModel,
    ) -> Result<Self, ProfitabilityError> {
        let th = standard_thresholds(params)?;
        check_interval(series, params)?;
        Ok(Self {
            series,
            params: *params,
            th,
            model,
            horizon: series.len() as f64,
            kappa_max: DEFAULT_KAPPA_MAX,
            scan_step: DEFAULT_SCAN_STEP,
        })
    }

    pub fn with_horizon(mut self, horizon: f64) -> Result<Self, ProfitabilityError> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(ProfitabilityError::InvalidArgument(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        self.horizon = horizon;
        Ok(self)
    }

    pub fn with_kappa_max(mut self, kappa_max: f64) -> Result<Self, ProfitabilityError> {
        if !(kappa_max.is_finite() && kappa_max > 0.0) {
            return Err(ProfitabilityError::InvalidArgument(format!(
                "kappa_max must be positive, got {kappa_max}"
            )));
        }
        self.kappa_max = kappa_max;
        Ok(self)
    }

    pub fn with_scan_step(mut self, step: f64) -> Result<Self, ProfitabilityError> {
        if !(step.is_finite() && step > 0.0) {
            return Err(ProfitabilityError::InvalidArgument(format!(
                "scan step must be positive, got {step}"
            )));
        }
        self.scan_step = step;
        Ok(self)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn kappa_max(&self) -> f64 {
        self.kappa_max
    }

    pub fn model(&self) -> ParticipationModel {
        self.model
    }

    pub fn params(&self) -> &MarketParams {
        &self.params
    }

    fn scale(&self, c: ProfitCoefficients) -> ProfitCoefficients {
        if c.n == self.horizon {
            c
        } else {
            c.scaled_to(self.horizon)
        }
    }

    /// Coefficients at ratio `kappa`, scaled to the horizon.
    pub fn coefficients(&self, kappa: f64) -> ProfitCoefficients {
        let kappa = kappa.max(0.0);
        self.scale(accumulate(
            self.series,
            &self.params,
            &self.th,
            &unit_caps(kappa),
            kappa,
            self.model,
        ))
    }

    /// Coefficients classified at `caps`, scaled to the horizon.
    pub fn coefficients_for(&self, caps: &Capacities) -> ProfitCoefficients {
        let kappa = caps_kappa(caps);
        let class_caps = if caps.q_r == 0.0 && caps.q_h == 0.0 {
            unit_caps(0.0)
        } else {
            *caps
        };
        self.scale(accumulate(
            self.series,
            &self.params,
            &self.th,
            &class_caps,
            kappa,
            self.model,
        ))
    }

    /// Operating profit and classification at `caps`.
    pub fn plan(&self, caps: &Capacities) -> Result<CapacityPlan, ProfitabilityError> {
        caps.validate()?;
        let coeffs = self.coefficients_for(caps);
        let op_profit = operating_profit(&coeffs, caps)?;
        Ok(CapacityPlan {
            caps: *caps,
            op_profit,
            classification: Classification::of(op_profit, coeffs.revenue_scale(caps)),
            kappa_star: None,
        })
    }

    /// Profit per kW of renewables along the ray `q_h = kappa q_r`.
    pub fn ray_profit(&self, kappa: f64) -> f64 {
        let c = self.coefficients(kappa);
        c.net_r() + kappa * c.net_h()
    }

    /// Ratios in `[0, kappa_max]` at which the ray profit changes sign.
    pub fn breakeven_rays(&self) -> Vec<f64> {
        let steps = (self.kappa_max / self.scan_step).ceil().max(1.0) as usize;
        let grid: Vec<f64> = (0..=steps)
            .map(|i| (self.kappa_max * i as f64 / steps as f64).min(self.kappa_max))
            .collect();
        let values: Vec<f64> = grid.iter().map(|&k| self.ray_profit(k)).collect();
        let mut roots: Vec<f64> = Vec::new();
        for i in 0..grid.len() {
            if values[i] == 0.0 {
                if i == 0 || values[i - 1] != 0.0 {
                    roots.push(grid[i]);
                }
                continue;
            }
            if i + 1 < grid.len()
                && values[i + 1] != 0.0
                && (values[i] > 0.0) != (values[i + 1] > 0.0)
            {
                roots.push(bisect_root(grid[i], grid[i + 1], ROOT_TOL, |k| {
                    self.ray_profit(k)
                }));
            }
        }
        roots
    }

    /// Marginal profit of electrolyzer capacity at ratio `kappa`.
    pub fn marginal_electrolyzer(&self, kappa: f64) -> f64 {
        self.coefficients(kappa).net_h()
    }

    /// Electrolyzer capacity maximizing profit for renewable capacity `q_r`.
    pub fn matching_capacity(&self, q_r: f64) -> Result<Matching, ProfitabilityError> {
        if !(q_r.is_finite() && q_r > 0.0) {
            return Err(ProfitabilityError::InvalidArgument(format!(
                "renewable capacity must be positive, got {q_r}"
            )));
        }
        let matching = |kappa_star: f64, regime| Matching {
            kappa_star,
            q_h_star: kappa_star * q_r,
            regime,
        };
        if self.marginal_electrolyzer(0.0) <= 0.0 {
            return Ok(matching(0.0, MatchingRegime::Zero));
        }
        let at_one = self.coefficients(1.0);
        let d1 = at_one.net_h();
        if d1.abs() <= 1e-12 * (at_one.sum_a_h.abs() + at_one.alpha_h_n) {
            return Ok(matching(1.0, MatchingRegime::AnyAboveOne));
        }
        if d1 > 0.0 {
            return Ok(matching(self.kappa_max, MatchingRegime::Unbounded));
        }
        let (lo, hi) = bisect_boundary(0.0, 1.0, MATCHING_TOL, |k| {
            self.marginal_electrolyzer(k) > 0.0
        });
        Ok(matching(lo + 0.5 * (hi - lo), MatchingRegime::Interior))
    }

    /// Capacities on the budget line `alpha_r_n q_r + alpha_h_n q_h = budget`
    /// with ratio `kappa` (`INFINITY` for the all-electrolyzer corner).
    fn budget_point(&self, budget: f64, kappa: f64, rates: &ProfitCoefficients) -> Capacities {
        if kappa.is_infinite() {
            Capacities {
                q_r: 0.0,
                q_h: budget / rates.alpha_h_n,
            }
        } else {
            let q_r = budget / (rates.alpha_r_n + kappa * rates.alpha_h_n);
            Capacities {
                q_r,
                q_h: kappa * q_r,
            }
        }
    }

    /// Profit-maximizing capacities whose amortized fixed cost over the
    /// horizon equals `budget`.
    ///
    /// The ratio condition `sum_a_h / sum_a_r = alpha_h_n / alpha_r_n` is
    /// solved by bisection. Candidates are that root, the ends `0` and
    /// `kappa_max`, and the electrolyzer-only corner `q_r = 0`; the best is
    /// checked against a sweep of the budget line.
    pub fn optimal_nameplate(&self, budget: f64) -> Result<CapacityPlan, ProfitabilityError> {
        if !(budget.is_finite() && budget >= 0.0) {
            return Err(ProfitabilityError::InvalidArgument(format!(
                "budget must be nonnegative, got {budget}"
            )));
        }
        if budget == 0.0 {
            return Ok(CapacityPlan {
                caps: Capacities { q_r: 0.0, q_h: 0.0 },
                op_profit: 0.0,
                classification: Classification::BreakEven,
                kappa_star: Some(0.0),
            });
        }
        let rates = self.coefficients(0.0);
        if !(rates.alpha_r_n > 0.0 && rates.alpha_h_n > 0.0) {
            return Err(ProfitabilityError::InvalidArgument(
                "budget sizing needs positive fixed costs for both technologies".into(),
            ));
        }
        // Sign of d/dkappa of profit along the budget line.
        let slope = |k: f64| {
            let c = self.coefficients(k);
            c.sum_a_h * rates.alpha_r_n - c.sum_a_r * rates.alpha_h_n
        };
        let mut candidates = Vec::with_capacity(4);
        if slope(0.0) > 0.0 && slope(self.kappa_max) < 0.0 {
            let (lo, hi) = bisect_boundary(0.0, self.kappa_max, MATCHING_TOL, |k| slope(k) > 0.0);
            candidates.push(lo + 0.5 * (hi - lo));
        }
        candidates.extend([0.0, self.kappa_max, f64::INFINITY]);

        let mut best: Option<CapacityPlan> = None;
        for kappa in candidates {
            let caps = self.budget_point(budget, kappa, &rates);
            let mut plan = self.plan(&caps)?;
            plan.kappa_star = kappa.is_finite().then_some(kappa);
            if best.is_none_or(|b| plan.op_profit > b.op_profit) {
                best = Some(plan);
            }
        }
        let best = best.expect("at least one candidate");

        let sweep_max = self.budget_sweep(budget, SIZING_SWEEP_POINTS)?;
        let tol = 1e-6 * sweep_max.abs().max(1e-9 * budget);
        if best.op_profit < sweep_max - tol {
            return Err(ProfitabilityError::SweepCheck {
                returned: best.op_profit,
                sweep_max,
            });
        }
        Ok(best)
    }

    /// Best operating profit among `points` evenly spaced budget splits,
    /// from everything in electrolyzers to everything in renewables.
    pub fn budget_sweep(&self, budget: f64, points: usize) -> Result<f64, ProfitabilityError> {
        let rates = self.coefficients(0.0);
        let points = points.max(2);
        let mut best = f64::NEG_INFINITY;
        for i in 0..points {
            let s = i as f64 / (points - 1) as f64;
            let caps = Capacities {
                q_r: s * budget / rates.alpha_r_n,
                q_h: (1.0 - s) * budget / rates.alpha_h_n,
            };
            best = best.max(self.plan(&caps)?.op_profit);
        }
        Ok(best)
    }
}

/// All ratios in `[0, 3]` where the ray profit over `horizon` intervals
/// changes sign.
pub fn breakeven_rays(
    series: &SignalSeries,
    params: &MarketParams,
    model: ParticipationModel,
    horizon: f64,
) -> Result<Vec<f64>, ProfitabilityError> {
    Ok(ProfitSurface::new(series, params, model)?
        .with_horizon(horizon)?
        .breakeven_rays())
}

pub fn matching_capacity(
    series: &SignalSeries,
    params: &MarketParams,
    model: ParticipationModel,
    horizon: f64,
    q_r: f64,
) -> Result<Matching, ProfitabilityError> {
    ProfitSurface::new(series, params, model)?
        .with_horizon(horizon)?
        .matching_capacity(q_r)
}

pub fn optimal_nameplate(
    series: &SignalSeries,
    params: &MarketParams,
    model: ParticipationModel,
    horizon: f64,
    budget: f64,
) -> Result<CapacityPlan, ProfitabilityError> {
    ProfitSurface::new(series, params, model)?
        .with_horizon(horizon)?
        .optimal_nameplate(budget)
}
