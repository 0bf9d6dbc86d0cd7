//! Economic model: parameters, capacities, per-interval signals, dispatch
//! decisions, LMP thresholds and gross profit.
//!
//! Canonical units throughout: kW, kWh, hours, kg, $/kWh, $/kg, and $/kW/yr
//! for the annual fixed operating costs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("invalid capacities: {0}")]
    InvalidCapacity(String),
    #[error("invalid interval signal: {0}")]
    InvalidSignal(String),
    #[error("infeasible dispatch, {constraint} violated: {detail}")]
    Infeasible {
        constraint: &'static str,
        detail: String,
    },
}

/// Time-invariant market and plant economics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketParams {
    /// Hydrogen market price, $/kg.
    pub pi_h: f64,
    /// Green hydrogen production credit, $/kg.
    pub tau_h: f64,
    /// Renewable production tax credit, $/kWh.
    pub tau_r: f64,
    /// REC price earned on exported renewable energy, $/kWh.
    pub tau_rec_ex: f64,
    /// REC price paid to certify imported energy, $/kWh.
    pub tau_rec_im: f64,
    /// Electrolyzer efficiency, kg/kWh.
    pub gamma: f64,
    /// Marginal cost of consumables (water etc.), $/kg.
    pub c_w: f64,
    /// Annual fixed operating cost of renewable capacity, $/kW/yr.
    pub alpha_r: f64,
    /// Annual fixed operating cost of electrolyzer capacity, $/kW/yr.
    pub alpha_h: f64,
    /// Scheduling intervals per year.
    pub intervals_per_year: f64,
    /// Length of one scheduling interval, hours.
    pub interval_hours: f64,
}

impl Default for MarketParams {
    fn default() -> Self {
        Self::reference()
    }
}

impl MarketParams {
    /// Reference economics of a 2022 New York plant with hourly scheduling and
    /// a hydrogen price of 4 $/kg.
    pub fn reference() -> Self {
        Self {
            pi_h: 4.0,
            tau_h: 3.0,
            tau_r: 27.50 / 1000.0,
            tau_rec_ex: 10.00 / 1000.0,
            tau_rec_im: 31.80 / 1000.0,
            gamma: 0.019,
            c_w: 0.10,
            alpha_r: 85.50,
            alpha_h: 101.25,
            intervals_per_year: 8760.0,
            interval_hours: 1.0,
        }
    }

    pub fn with_hydrogen_price(mut self, pi_h: f64) -> Self {
        self.pi_h = pi_h;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("pi_h", self.pi_h),
            ("tau_h", self.tau_h),
            ("tau_r", self.tau_r),
            ("tau_rec_ex", self.tau_rec_ex),
            ("tau_rec_im", self.tau_rec_im),
            ("gamma", self.gamma),
            ("c_w", self.c_w),
            ("alpha_r", self.alpha_r),
            ("alpha_h", self.alpha_h),
            ("intervals_per_year", self.intervals_per_year),
            ("interval_hours", self.interval_hours),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(invalid(name, format!("must be finite, got {value}")));
            }
        }
        if self.gamma <= 0.0 {
            return Err(invalid("gamma", "must be positive".into()));
        }
        if self.interval_hours <= 0.0 {
            return Err(invalid("interval_hours", "must be positive".into()));
        }
        if self.intervals_per_year <= 0.0 {
            return Err(invalid("intervals_per_year", "must be positive".into()));
        }
        if self.alpha_r < 0.0 || self.alpha_h < 0.0 {
            return Err(invalid(
                "alpha_r/alpha_h",
                "fixed costs must be nonnegative".into(),
            ));
        }
        if self.hydrogen_margin() < 0.0 {
            return Err(invalid(
                "pi_h",
                format!(
                    "pi_h + tau_h - c_w must be nonnegative, got {}",
                    self.hydrogen_margin()
                ),
            ));
        }
        // Equal REC prices are allowed (zero-width net-zero band); the
        // thresholds then report a nonstandard ordering.
        if self.tau_rec_im < self.tau_rec_ex {
            return Err(invalid(
                "tau_rec_im",
                format!(
                    "REC import price {} below export price {} admits risk-free arbitrage",
                    self.tau_rec_im, self.tau_rec_ex
                ),
            ));
        }
        Ok(())
    }

    /// Net value of one kg of hydrogen, `pi_h + tau_h - c_w`, $/kg.
    pub fn hydrogen_margin(&self) -> f64 {
        self.pi_h + self.tau_h - self.c_w
    }

    /// Net value of one kWh fed to the electrolyzer, `gamma * (pi_h + tau_h - c_w)`, $/kWh.
    pub fn electrolysis_value(&self) -> f64 {
        self.gamma * self.hydrogen_margin()
    }

    pub fn thresholds(&self) -> Thresholds {
        compute_thresholds(self)
    }
}

fn invalid(name: &'static str, reason: String) -> ModelError {
    ModelError::InvalidParameter { name, reason }
}

/// Nameplate capacities in kW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Capacities {
    pub q_r: f64,
    pub q_h: f64,
}

impl Capacities {
    pub fn new(q_r: f64, q_h: f64) -> Result<Self, ModelError> {
        let caps = Self { q_r, q_h };
        caps.validate()?;
        Ok(caps)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.q_r.is_finite() && self.q_h.is_finite()) || self.q_r < 0.0 || self.q_h < 0.0 {
            return Err(ModelError::InvalidCapacity(format!(
                "capacities must be finite and nonnegative, got q_r={} q_h={}",
                self.q_r, self.q_h
            )));
        }
        Ok(())
    }

    /// Electrolyzer-to-renewable ratio, defined only for `q_r > 0`.
    pub fn kappa(&self) -> Option<f64> {
        (self.q_r > 0.0).then(|| self.q_h / self.q_r)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            q_r: self.q_r * s,
            q_h: self.q_h * s,
        }
    }
}

/// Exogenous state of one scheduling interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalSignal {
    /// Real-time LMP, $/kWh. May be negative.
    pub lmp: f64,
    /// Renewable capacity factor in [0, 1].
    pub eta: f64,
}

impl IntervalSignal {
    pub fn new(lmp: f64, eta: f64) -> Result<Self, ModelError> {
        let sig = Self { lmp, eta };
        sig.validate()?;
        Ok(sig)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !self.lmp.is_finite() {
            return Err(ModelError::InvalidSignal(format!(
                "lmp must be finite, got {}",
                self.lmp
            )));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(ModelError::InvalidSignal(format!(
                "capacity factor must lie in [0, 1], got {}",
                self.eta
            )));
        }
        Ok(())
    }
}

/// LMP thresholds that partition the price axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Below this price it pays to import grid power for electrolysis.
    pub pi_lo: f64,
    /// Above this price it pays to export renewable output instead of electrolysis.
    pub pi_hi: f64,
    /// `-tau_rec_im`: below this price imports are paid for.
    pub neg_im: f64,
    /// `-tau_rec_ex`: below this price exporting loses money.
    pub neg_ex: f64,
    /// True iff `neg_im < neg_ex < pi_lo < pi_hi`.
    pub standard: bool,
}

pub fn compute_thresholds(params: &MarketParams) -> Thresholds {
    let value = params.electrolysis_value();
    let pi_lo = value - params.tau_rec_im;
    let pi_hi = value - params.tau_rec_ex;
    let neg_im = -params.tau_rec_im;
    let neg_ex = -params.tau_rec_ex;
    Thresholds {
        pi_lo,
        pi_hi,
        neg_im,
        neg_ex,
        standard: neg_im < neg_ex && neg_ex < pi_lo && pi_lo < pi_hi,
    }
}

/// Market participation models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ParticipationModel {
    /// Islanded: no import, no export.
    M0,
    /// Producer: may export, may not import.
    M1p,
    /// Consumer: may import, may not export.
    M1c,
    /// Prosumer: may do either, but not both in one interval.
    M2,
}

impl ParticipationModel {
    pub const ALL: [ParticipationModel; 4] = [Self::M0, Self::M1p, Self::M1c, Self::M2];

    pub fn allows_import(self) -> bool {
        matches!(self, Self::M1c | Self::M2)
    }

    pub fn allows_export(self) -> bool {
        matches!(self, Self::M1p | Self::M2)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::M0 => "m0",
            Self::M1p => "m1p",
            Self::M1c => "m1c",
            Self::M2 => "m2",
        }
    }
}

impl fmt::Display for ParticipationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParticipationModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "m0" => Ok(Self::M0),
            "m1p" => Ok(Self::M1p),
            "m1c" => Ok(Self::M1c),
            "m2" => Ok(Self::M2),
            other => Err(format!(
                "unknown participation model `{other}` (expected m0|m1p|m1c|m2)"
            )),
        }
    }
}

/// One interval's decision: powers in kW, hydrogen in kg.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Dispatch {
    pub p_h: f64,
    pub p_ex: f64,
    pub p_im: f64,
    pub h: f64,
}

impl Dispatch {
    /// Builds a dispatch under the linear production model `h = gamma * p_h * dt`.
    pub fn linear(params: &MarketParams, p_h: f64, p_ex: f64, p_im: f64) -> Self {
        Self {
            p_h,
            p_ex,
            p_im,
            h: params.gamma * p_h * params.interval_hours,
        }
    }

    /// Renewable output left unused: `eta*q_r - (p_h - p_im) - p_ex`.
    pub fn curtailed(&self, caps: &Capacities, sig: &IntervalSignal) -> f64 {
        let available = sig.eta * caps.q_r;
        (available - self.renewable_to_hydrogen(caps, sig) - self.p_ex).max(0.0)
    }

    /// Own renewable energy rate consumed by the electrolyzer, kW.
    pub fn renewable_to_hydrogen(&self, caps: &Capacities, sig: &IntervalSignal) -> f64 {
        (self.p_h - self.p_im).clamp(0.0, sig.eta * caps.q_r)
    }

    /// Checks the physical constraints (power balance, complementarity and
    /// bounds). Violations larger than `tol` kW are reported.
    pub fn check_feasible(
        &self,
        caps: &Capacities,
        sig: &IntervalSignal,
        tol: f64,
    ) -> Result<(), ModelError> {
        let available = sig.eta * caps.q_r;
        let fail = |constraint, detail: String| Err(ModelError::Infeasible { constraint, detail });
        for (name, v) in [
            ("p_h", self.p_h),
            ("p_ex", self.p_ex),
            ("p_im", self.p_im),
            ("h", self.h),
        ] {
            if !v.is_finite() {
                return fail("finiteness", format!("{name} = {v}"));
            }
        }
        if self.p_h < -tol || self.p_h > caps.q_h + tol {
            return fail(
                "electrolyzer input limit",
                format!("p_h = {} outside [0, {}]", self.p_h, caps.q_h),
            );
        }
        if self.p_ex < -tol || self.p_ex > available + tol {
            return fail(
                "renewable export limit",
                format!("p_ex = {} outside [0, {}]", self.p_ex, available),
            );
        }
        if self.p_im < -tol || self.p_im > caps.q_h + tol {
            return fail(
                "grid-import limit",
                format!("p_im = {} outside [0, {}]", self.p_im, caps.q_h),
            );
        }
        let net = self.p_h + self.p_ex - self.p_im;
        if net < -tol || net > available + tol {
            return fail(
                "power balance",
                format!("p_h + p_ex - p_im = {net} outside [0, {available}]"),
            );
        }
        if self.p_ex > tol && self.p_im > tol {
            return fail(
                "I/O complementarity",
                format!(
                    "p_ex = {} and p_im = {} both positive",
                    self.p_ex, self.p_im
                ),
            );
        }
        if self.h < -tol {
            return fail("hydrogen output", format!("h = {} negative", self.h));
        }
        Ok(())
    }

    /// Checks the forced zeros of a participation model.
    pub fn check_model(&self, model: ParticipationModel) -> Result<(), ModelError> {
        if !model.allows_export() && self.p_ex != 0.0 {
            return Err(ModelError::Infeasible {
                constraint: "participation model",
                detail: format!("{model} forbids export, p_ex = {}", self.p_ex),
            });
        }
        if !model.allows_import() && self.p_im != 0.0 {
            return Err(ModelError::Infeasible {
                constraint: "participation model",
                detail: format!("{model} forbids import, p_im = {}", self.p_im),
            });
        }
        Ok(())
    }
}

/// Absolute feasibility tolerance used for dispatch checks, kW.
pub fn feasibility_tolerance(caps: &Capacities) -> f64 {
    1e-9 * (1.0 + caps.q_r + caps.q_h)
}

/// Gross profit of one interval under the linear production model, $.
///
/// Revenue from hydrogen sales and credits, exports with their RECs and the
/// renewable production credit on all generation, minus consumables and the
/// cost of certified imports.
pub fn gross_profit(
    params: &MarketParams,
    caps: &Capacities,
    sig: &IntervalSignal,
    d: &Dispatch,
) -> Result<f64, ModelError> {
    let tol = feasibility_tolerance(caps);
    d.check_feasible(caps, sig, tol)?;
    let expected_h = params.gamma * d.p_h * params.interval_hours;
    if (d.h - expected_h).abs() > 1e-9 * (1.0 + expected_h.abs()) {
        return Err(ModelError::Infeasible {
            constraint: "linear production",
            detail: format!("h = {} but gamma * p_h * dt = {}", d.h, expected_h),
        });
    }
    Ok(gross_profit_unchecked(params, caps, sig, d))
}

/// Gross profit with hydrogen revenue taken from `d.h`; no feasibility checks.
pub(crate) fn gross_profit_unchecked(
    params: &MarketParams,
    caps: &Capacities,
    sig: &IntervalSignal,
    d: &Dispatch,
) -> f64 {
    let dt = params.interval_hours;
    (params.pi_h + params.tau_h) * d.h
        + (sig.lmp + params.tau_rec_ex) * d.p_ex * dt
        + params.tau_r * sig.eta * caps.q_r * dt
        - params.c_w * d.h
        - (sig.lmp + params.tau_rec_im) * d.p_im * dt
}

/// Per-unit fixed costs amortized over `n` intervals, $/kW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmortizedRates {
    pub alpha_r_n: f64,
    pub alpha_h_n: f64,
}

impl AmortizedRates {
    pub fn new(params: &MarketParams, n: f64) -> Self {
        let share = n / params.intervals_per_year;
        Self {
            alpha_r_n: share * params.alpha_r,
            alpha_h_n: share * params.alpha_h,
        }
    }

    pub fn cost(&self, caps: &Capacities) -> f64 {
        self.alpha_r_n * caps.q_r + self.alpha_h_n * caps.q_h
    }
}

/// Fixed operating cost attributable to `n` intervals, `(n/N)(alpha_r q_r + alpha_h q_h)`.
pub fn amortized_fixed_cost(params: &MarketParams, caps: &Capacities, n: f64) -> f64 {
    n / params.intervals_per_year * (params.alpha_r * caps.q_r + params.alpha_h * caps.q_h)
}
