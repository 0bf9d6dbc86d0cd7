//! Seeded instance generators and independent reference computations shared
//! by the integration tests and the acceptance harness.

#![allow(dead_code)]

use h2plan::lp;
use h2plan::{Capacities, IntervalSignal, MarketParams, ParticipationModel, SignalSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random market parameters around the reference values. About one draw in
/// six has a nonstandard threshold ordering.
pub fn random_params(rng: &mut ChaCha8Rng) -> MarketParams {
    let base = MarketParams::reference();
    let tau_rec_ex = rng.random_range(0.0..0.03);
    let mut p = MarketParams {
        pi_h: rng.random_range(0.5..10.0),
        tau_h: rng.random_range(0.0..3.0),
        c_w: rng.random_range(0.0..0.3),
        gamma: rng.random_range(0.015..0.025),
        tau_r: rng.random_range(0.0..0.04),
        tau_rec_ex,
        tau_rec_im: tau_rec_ex + rng.random_range(0.0..0.04),
        ..base
    };
    match rng.random_range(0..12) {
        // Electrolysis worth less than the REC spread.
        0 => {
            p.pi_h = 0.0;
            p.tau_h = rng.random_range(0.0..1.0);
            p.c_w = 0.0;
        }
        // Equal REC prices collapse the negative-price band.
        1 => p.tau_rec_im = p.tau_rec_ex,
        _ => {}
    }
    p
}

pub fn random_caps(rng: &mut ChaCha8Rng) -> Capacities {
    let q_r = rng.random_range(1.0..1e5);
    let kappa = rng.random_range(0.1..3.0);
    Capacities::new(q_r, kappa * q_r).unwrap()
}

/// LMP in $/kWh covering negative, import, net-zero and export bands.
pub fn random_lmp(rng: &mut ChaCha8Rng) -> f64 {
    match rng.random_range(0..10) {
        0 => rng.random_range(-0.15..-0.02),
        1 => rng.random_range(-0.05..0.0),
        2..=7 => rng.random_range(0.0..0.15),
        _ => rng.random_range(0.15..0.5),
    }
}

pub fn random_signal(rng: &mut ChaCha8Rng) -> IntervalSignal {
    let eta = match rng.random_range(0..20) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.random_range(0.0..1.0),
    };
    IntervalSignal::new(random_lmp(rng), eta).unwrap()
}

pub fn random_model(rng: &mut ChaCha8Rng) -> ParticipationModel {
    ParticipationModel::ALL[rng.random_range(0..4)]
}

/// Hourly synthetic series with prices drawn from `lmp` and a diurnal-ish
/// capacity factor.
pub fn synthetic_series(
    rng: &mut ChaCha8Rng,
    n: usize,
    mut lmp: impl FnMut(&mut ChaCha8Rng) -> f64,
) -> SignalSeries {
    let pairs: Vec<(f64, f64)> = (0..n)
        .map(|t| {
            let hour = (t % 24) as f64;
            let sun = (std::f64::consts::PI * (hour - 6.0) / 12.0).sin().max(0.0);
            let eta = (sun * rng.random_range(0.4..1.0) + rng.random_range(0.0..0.1)).min(1.0);
            (lmp(rng), eta)
        })
        .collect();
    SignalSeries::from_pairs(&pairs, 1.0, "synthetic").unwrap()
}

/// Optimal gross profit of one interval from the vertex-enumeration solver,
/// without any threshold logic.
pub fn lp_profit(
    params: &MarketParams,
    caps: &Capacities,
    sig: &IntervalSignal,
    model: ParticipationModel,
) -> f64 {
    lp::solve_exact(params, caps, sig, model, None)
        .unwrap()
        .profit
}

/// Operating profit of a series computed interval by interval with the LP
/// solver and the fixed-cost formula written out.
pub fn direct_operating_profit(
    series: &SignalSeries,
    params: &MarketParams,
    caps: &Capacities,
    model: ParticipationModel,
) -> f64 {
    let gross: f64 = series
        .signals()
        .iter()
        .map(|s| lp_profit(params, caps, s, model))
        .sum();
    let n = series.len() as f64;
    gross - n / params.intervals_per_year * (params.alpha_r * caps.q_r + params.alpha_h * caps.q_h)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
