//! Closed-form optimal dispatch under the linear production model.
//!
//! Every interval falls into one operating region determined by the LMP band
//! (relative to `-tau_rec_im < -tau_rec_ex < pi_lo < pi_hi`) and by whether
//! renewable output `eta*q_r` exceeds the electrolyzer capacity `q_h`. The
//! region alone fixes the dispatch, so [`classify_region`] and
//! [`optimal_dispatch`] can never disagree.
//!
//! Ties on the capacity axis (`eta*q_r == q_h`) are assigned to the deficit
//! side; ties on the price axis follow the closed-form branch conditions
//! (`lmp <= pi_lo` imports, `lmp >= pi_hi` exports).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp;
use crate::model::{
    compute_thresholds, Capacities, Dispatch, IntervalSignal, MarketParams, ModelError,
    ParticipationModel, Thresholds,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DispatchError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(
        "nonstandard threshold ordering (-tau_rec_im={neg_im}, -tau_rec_ex={neg_ex}, pi_lo={pi_lo}, pi_hi={pi_hi}); use the LP oracle",
        neg_im = .0.neg_im, neg_ex = .0.neg_ex, pi_lo = .0.pi_lo, pi_hi = .0.pi_hi
    )]
    NonstandardOrdering(Thresholds),
    #[error("invalid piecewise production curve: {0}")]
    Piecewise(String),
}

/// Operating region of an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RegionLabel {
    /// Electrolyzer at capacity, topped up from the grid. Net consumer.
    R1,
    /// All renewable output to the electrolyzer, no trade. Net zero.
    R2,
    /// Electrolyzer at capacity, surplus curtailed because export is not allowed.
    R2p,
    /// Everything exported, no hydrogen.
    R3,
    /// Electrolyzer at capacity, surplus exported.
    R4,
    /// Negative LMP below `-tau_rec_ex`: electrolyzer at capacity, surplus curtailed.
    R5Neg,
    /// LMP at or below `-tau_rec_im`: electrolyzer runs on paid-for grid power,
    /// renewable output fully curtailed.
    R6Neg,
}

impl RegionLabel {
    pub const ALL: [RegionLabel; 7] = [
        Self::R1,
        Self::R2,
        Self::R2p,
        Self::R3,
        Self::R4,
        Self::R5Neg,
        Self::R6Neg,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::R1 => "R1",
            Self::R2 => "R2",
            Self::R2p => "R2p",
            Self::R3 => "R3",
            Self::R4 => "R4",
            Self::R5Neg => "R5_neg",
            Self::R6Neg => "R6_neg",
        }
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&r| r == self).unwrap()
    }

    /// Dispatch triple `(p_h, p_ex, p_im)` implied by this region.
    pub fn dispatch_triple(self, available: f64, q_h: f64) -> (f64, f64, f64) {
        match self {
            Self::R1 => (q_h, 0.0, q_h - available),
            Self::R2 => (available, 0.0, 0.0),
            Self::R2p | Self::R5Neg => (q_h, 0.0, 0.0),
            Self::R3 => (0.0, available, 0.0),
            Self::R4 => (q_h, available - q_h, 0.0),
            Self::R6Neg => (q_h, 0.0, q_h),
        }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegionLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown region `{s}`"))
    }
}

fn check_inputs(
    params: &MarketParams,
    caps: &Capacities,
    sig: &IntervalSignal,
) -> Result<Thresholds, DispatchError> {
    params.validate()?;
    caps.validate()?;
    sig.validate()?;
    let th = compute_thresholds(params);
    if !th.standard {
        return Err(DispatchError::NonstandardOrdering(th));
    }
    Ok(th)
}

/// Region label for one interval; requires the standard threshold ordering.
pub fn classify_region(
    params: &MarketParams,
    caps: &Capacities,
    sig: &IntervalSignal,
    model: ParticipationModel,
) -> Result<RegionLabel, DispatchError> {
    let th = check_inputs(params, caps, sig)?;
    Ok(region_for(&th, caps, sig, model))
}

pub(crate) fn region_for(
    th: &Thresholds,
    caps: &Capacities,
    sig: &IntervalSignal,
    model: ParticipationModel,
) -> RegionLabel {
    use ParticipationModel::*;
    use RegionLabel::*;

    let lmp = sig.lmp;
    let surplus = sig.eta * caps.q_r > caps.q_h;
    match model {
        M0 => {
            if surplus {
                R2p
            } else {
                R2
            }
        }
        M1p => {
            if lmp >= th.pi_hi {
                R3
            } else if !surplus {
                R2
            } else if lmp <= th.neg_ex {
                R5Neg
            } else {
                R4
            }
        }
        M1c => {
            if lmp <= th.neg_im {
                R6Neg
            } else if lmp <= th.pi_lo {
                if !surplus {
                    R1
                } else if lmp <= th.neg_ex {
                    R5Neg
                } else {
                    R2p
                }
            } else if surplus {
                R2p
            } else {
                R2
            }
        }
        M2 => {
            if lmp <= th.neg_im {
                R6Neg
            } else if lmp >= th.pi_hi {
                R3
            } else if surplus {
                if lmp <= th.neg_ex {
                    R5Neg
                } else {
                    R4
                }
            } else if lmp <= th.pi_lo {
                R1
            } else {
                R2
            }
        }
    }
}

/// Profit-maximizing dispatch of one interval and the region it falls in.
///
/// Fails with [`DispatchError::NonstandardOrdering`] when the threshold prices
/// are not ordered `-tau_rec_im < -tau_rec_ex < pi_lo < pi_hi`; use
/// [`dispatch_or_fallback`] to route those cases through the LP oracle.
pub fn optimal_dispatch(
    params: &MarketParams,
    caps: &Capacities,
    sig: &IntervalSignal,
    model: ParticipationModel,
) -> Result<(Dispatch, RegionLabel), DispatchError> {
    let th = check_inputs(params, caps, sig)?;
    let region = region_for(&th, caps, sig, model);
    let (p_h, p_ex, p_im) = region.dispatch_triple(sig.eta * caps.q_r, caps.q_h);
    Ok((Dispatch::linear(params, p_h, p_ex, p_im), region))
}

/// Closed form when the ordering is standard, exact LP otherwise. The region
/// is `None` for LP-solved intervals.
pub fn dispatch_or_fallback(
    params: &MarketParams,
    caps: &Capacities,
    sig: &IntervalSignal,
    model: ParticipationModel,
) -> Result<(Dispatch, Option<RegionLabel>), DispatchError> {
    match optimal_dispatch(params, caps, sig, model) {
        Ok((d, r)) => Ok((d, Some(r))),
        Err(DispatchError::NonstandardOrdering(_)) => {
            let sol = lp::solve_exact(params, caps, sig, model, None)?;
            Ok((sol.dispatch, None))
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{feasibility_tolerance, gross_profit};
    use ParticipationModel::*;

    fn setup() -> (MarketParams, Capacities) {
        (
            MarketParams::reference(),
            Capacities::new(45_000.0, 20_000.0).unwrap(),
        )
    }

    fn triple(d: &Dispatch) -> (f64, f64, f64) {
        (d.p_h, d.p_ex, d.p_im)
    }

    #[test]
    fn high_price_exports_everything() {
        let (p, c) = setup();
        let sig = IntervalSignal::new(0.15, 0.5).unwrap();
        let (d, r) = optimal_dispatch(&p, &c, &sig, M2).unwrap();
        assert_eq!(triple(&d), (0.0, 22_500.0, 0.0));
        assert_eq!(r, RegionLabel::R3);
    }

    #[test]
    fn low_price_low_wind_imports() {
        let (p, c) = setup();
        let sig = IntervalSignal::new(0.02, 0.1).unwrap();
        let (d, r) = optimal_dispatch(&p, &c, &sig, M2).unwrap();
        assert_eq!(d.p_h, 20_000.0);
        assert_eq!(d.p_ex, 0.0);
        assert!((d.p_im - 15_500.0).abs() < 1e-9);
        assert_eq!(r, RegionLabel::R1);
    }

    #[test]
    fn standalone_ignores_price() {
        let (p, c) = setup();
        for lmp in [-0.3, -0.02, 0.0, 0.05, 0.11, 0.5] {
            let sig = IntervalSignal::new(lmp, 0.5).unwrap();
            let (d, _) = optimal_dispatch(&p, &c, &sig, M0).unwrap();
            assert_eq!(triple(&d), (20_000.0, 0.0, 0.0));
        }
    }

    #[test]
    fn net_zero_band_without_renewables() {
        let (p, c) = setup();
        let sig = IntervalSignal::new(0.11, 0.0).unwrap();
        let (d, r) = optimal_dispatch(&p, &c, &sig, M2).unwrap();
        assert_eq!(triple(&d), (0.0, 0.0, 0.0));
        assert_eq!(r, RegionLabel::R2);
    }

    #[test]
    fn region_examples() {
        let (p, c) = setup();
        let cases = [
            (0.2, 0.5, RegionLabel::R3),
            (0.11, 0.8, RegionLabel::R4),
            (-0.05, 0.5, RegionLabel::R6Neg),
            (-0.02, 0.8, RegionLabel::R5Neg),
            (-0.02, 0.2, RegionLabel::R1),
            (0.05, 0.8, RegionLabel::R4),
        ];
        for (lmp, eta, expected) in cases {
            let sig = IntervalSignal::new(lmp, eta).unwrap();
            assert_eq!(
                classify_region(&p, &c, &sig, M2).unwrap(),
                expected,
                "lmp={lmp} eta={eta}"
            );
        }
    }

    #[test]
    fn threshold_ties_follow_branch_conditions() {
        let (p, c) = setup();
        let th = p.thresholds();
        let at_hi = IntervalSignal::new(th.pi_hi, 0.5).unwrap();
        assert_eq!(
            classify_region(&p, &c, &at_hi, M2).unwrap(),
            RegionLabel::R3
        );
        let at_lo = IntervalSignal::new(th.pi_lo, 0.1).unwrap();
        assert_eq!(
            classify_region(&p, &c, &at_lo, M2).unwrap(),
            RegionLabel::R1
        );
        let at_im = IntervalSignal::new(th.neg_im, 0.1).unwrap();
        assert_eq!(
            classify_region(&p, &c, &at_im, M1c).unwrap(),
            RegionLabel::R6Neg
        );
        // eta*q_r == q_h sits on the deficit side.
        let eq = IntervalSignal::new(0.11, 20_000.0 / 45_000.0).unwrap();
        let tied = Capacities::new(45_000.0, 45_000.0 * eq.eta).unwrap();
        assert_eq!(
            classify_region(&p, &tied, &eq, M2).unwrap(),
            RegionLabel::R2
        );
    }

    #[test]
    fn restricted_models_respect_forced_zeros() {
        let (p, c) = setup();
        for lmp in [-0.1, -0.02, 0.0, 0.05, 0.11, 0.3] {
            for eta in [0.0, 0.2, 0.44, 0.9, 1.0] {
                let sig = IntervalSignal::new(lmp, eta).unwrap();
                for m in ParticipationModel::ALL {
                    let (d, _) = optimal_dispatch(&p, &c, &sig, m).unwrap();
                    d.check_model(m).unwrap();
                    d.check_feasible(&c, &sig, feasibility_tolerance(&c))
                        .unwrap();
                    gross_profit(&p, &c, &sig, &d).unwrap();
                }
            }
        }
    }

    #[test]
    fn nonstandard_ordering_is_flagged() {
        let (mut p, c) = setup();
        p.pi_h = 0.0;
        p.tau_h = 0.6;
        p.c_w = 0.0;
        let sig = IntervalSignal::new(0.05, 0.5).unwrap();
        assert!(matches!(
            optimal_dispatch(&p, &c, &sig, M2),
            Err(DispatchError::NonstandardOrdering(_))
        ));
        let (d, region) = dispatch_or_fallback(&p, &c, &sig, M2).unwrap();
        assert!(region.is_none());
        d.check_feasible(&c, &sig, feasibility_tolerance(&c))
            .unwrap();
    }

    #[test]
    fn invalid_signal_rejected() {
        let (p, c) = setup();
        let sig = IntervalSignal {
            lmp: 0.05,
            eta: 1.5,
        };
        assert!(matches!(
            optimal_dispatch(&p, &c, &sig, M2),
            Err(DispatchError::Model(ModelError::InvalidSignal(_)))
        ));
    }
}
