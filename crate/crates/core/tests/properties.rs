//! Property tests over randomly generated instances.

mod common;

use common::*;
use h2plan::dispatch::dispatch_or_fallback;
use h2plan::piecewise::{
    optimal_dispatch_piecewise, piecewise_gross_profit, two_segment_closed_form,
};
use h2plan::profitability::{
    coefficients_for, estimate_coefficients, operating_profit, ProfitSurface,
};
use h2plan::{
    gross_profit, optimal_dispatch, run_simulation, Capacities, MarketParams, ParticipationModel,
    PiecewiseProduction,
};
use proptest::prelude::*;
use rand::Rng;
use ParticipationModel::*;

fn best_profit(
    p: &MarketParams,
    c: &Capacities,
    s: &h2plan::IntervalSignal,
    m: ParticipationModel,
) -> f64 {
    let (d, _) = dispatch_or_fallback(p, c, s, m).unwrap();
    gross_profit(p, c, s, &d).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn closed_form_matches_lp(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_params(&mut r);
        let c = random_caps(&mut r);
        let s = random_signal(&mut r);
        for m in ParticipationModel::ALL {
            let ours = best_profit(&p, &c, &s, m);
            let oracle = lp_profit(&p, &c, &s, m);
            prop_assert!(rel_err(ours, oracle) <= 1e-9, "{m}: {ours} vs {oracle}");
        }
    }

    #[test]
    fn grid_search_never_beats_exact(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_params(&mut r);
        let c = random_caps(&mut r);
        let s = random_signal(&mut r);
        let m = random_model(&mut r);
        let exact = lp_profit(&p, &c, &s, m);
        let grid = h2plan::lp::grid_oracle(&p, &c, &s, m, 100, None).unwrap();
        prop_assert!(grid <= exact + 1e-9 * exact.abs().max(1.0));
    }

    #[test]
    fn more_market_access_never_hurts(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_params(&mut r);
        let c = random_caps(&mut r);
        let s = random_signal(&mut r);
        let gp = |m| best_profit(&p, &c, &s, m);
        let tol = 1e-9 * gp(M2).abs().max(1.0);
        prop_assert!(gp(M2) + tol >= gp(M1p));
        prop_assert!(gp(M2) + tol >= gp(M1c));
        prop_assert!(gp(M1p) + tol >= gp(M0));
        prop_assert!(gp(M1c) + tol >= gp(M0));
    }

    #[test]
    fn gross_profit_is_homogeneous_in_capacity(seed in any::<u64>(), scale in 0.01f64..100.0) {
        let mut r = rng(seed);
        let p = random_params(&mut r);
        let c = random_caps(&mut r);
        let s = random_signal(&mut r);
        let m = random_model(&mut r);
        let base = best_profit(&p, &c, &s, m);
        let scaled = best_profit(&p, &c.scaled(scale), &s, m);
        prop_assert!(rel_err(scaled, scale * base) <= 1e-9);
    }

    #[test]
    fn dispatch_is_feasible_and_conserves_energy(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_params(&mut r);
        let c = random_caps(&mut r);
        let s = random_signal(&mut r);
        let m = random_model(&mut r);
        let (d, _) = dispatch_or_fallback(&p, &c, &s, m).unwrap();
        d.check_feasible(&c, &s, 1e-9 * (1.0 + c.q_r + c.q_h)).unwrap();
        d.check_model(m).unwrap();
        let available = s.eta * c.q_r;
        let balance = d.renewable_to_hydrogen(&c, &s) + d.p_ex + d.curtailed(&c, &s);
        prop_assert!((balance - available).abs() <= 1e-9 * (1.0 + available));
    }

    #[test]
    fn profit_nondecreasing_in_hydrogen_price(seed in any::<u64>(), bump in 0.0f64..3.0) {
        let mut r = rng(seed);
        let p = random_params(&mut r);
        let c = random_caps(&mut r);
        let s = random_signal(&mut r);
        let m = random_model(&mut r);
        let lo = best_profit(&p, &c, &s, m);
        let hi = best_profit(&p.with_hydrogen_price(p.pi_h + bump), &c, &s, m);
        prop_assert!(hi + 1e-9 * hi.abs().max(1.0) >= lo);
    }

    #[test]
    fn single_segment_curve_reduces_to_linear(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = random_params(&mut r);
        let c = random_caps(&mut r);
        let s = random_signal(&mut r);
        let m = random_model(&mut r);
        let pw = PiecewiseProduction::linear(p.gamma).unwrap();
        let (_, pw_profit) = optimal_dispatch_piecewise(&p, &c, &s, m, &pw).unwrap();
        prop_assert!(rel_err(pw_profit, best_profit(&p, &c, &s, m)) <= 1e-9);
    }

    #[test]
    fn two_segment_closed_form_is_optimal(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = MarketParams::reference().with_hydrogen_price(r.random_range(2.0..8.0));
        let c = random_caps(&mut r);
        let s = random_signal(&mut r);
        let a1 = r.random_range(0.015..0.03);
        let a2 = a1 * r.random_range(0.5..0.98);
        let bp = c.q_h * r.random_range(0.05..0.95);
        let pw = PiecewiseProduction::from_pairs(&[(a1, 0.0), (a2, (a1 - a2) * bp)]).unwrap();
        match two_segment_closed_form(&p, &c, &s, &pw) {
            Ok((d, _)) => {
                let ours = piecewise_gross_profit(&p, &c, &s, &d, &pw).unwrap();
                let (_, exact) = optimal_dispatch_piecewise(&p, &c, &s, M2, &pw).unwrap();
                prop_assert!(rel_err(ours, exact) <= 1e-9, "{ours} vs {exact}");
            }
            Err(h2plan::DispatchError::NonstandardOrdering(_)) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn coefficient_identity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = MarketParams::reference().with_hydrogen_price(r.random_range(1.0..8.0));
        let series = synthetic_series(&mut r, 48, random_lmp);
        let c = random_caps(&mut r);
        let m = random_model(&mut r);
        let coeffs = coefficients_for(&series, &c, &p, m).unwrap();
        let via = operating_profit(&coeffs, &c).unwrap();
        let direct = direct_operating_profit(&series, &p, &c, m);
        prop_assert!(rel_err(via, direct) <= 1e-9, "{via} vs {direct}");
        let sim = run_simulation(&series, &p, &c, m, None).unwrap();
        prop_assert!(rel_err(sim.breakdown.operating_profit, direct) <= 1e-9);
    }

    #[test]
    fn electrolyzer_coefficient_monotone_in_ratio(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = MarketParams::reference().with_hydrogen_price(r.random_range(1.0..8.0));
        let series = synthetic_series(&mut r, 96, random_lmp);
        let m = random_model(&mut r);
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=60 {
            let k = 1.5 * i as f64 / 60.0;
            let c = estimate_coefficients(&series, k, &p, m).unwrap();
            if let Some((h, rr)) = prev {
                prop_assert!(c.sum_a_h <= h + 1e-12);
                prop_assert!(c.sum_a_r >= rr - 1e-12);
            }
            prev = Some((c.sum_a_h, c.sum_a_r));
        }
        let at_one = estimate_coefficients(&series, 1.0, &p, m).unwrap();
        let beyond = estimate_coefficients(&series, 2.5, &p, m).unwrap();
        prop_assert_eq!(at_one.sum_a_h, beyond.sum_a_h);
        prop_assert_eq!(at_one.sum_a_r, beyond.sum_a_r);
    }

    #[test]
    fn profit_sign_constant_along_rays(seed in any::<u64>(), kappa in 0.05f64..3.0) {
        let mut r = rng(seed);
        let p = MarketParams::reference().with_hydrogen_price(r.random_range(1.0..8.0));
        let series = synthetic_series(&mut r, 48, random_lmp);
        let surf = ProfitSurface::new(&series, &p, M2).unwrap();
        let base = Capacities::new(1_000.0, 1_000.0 * kappa).unwrap();
        let p1 = surf.plan(&base).unwrap();
        for s in [0.1, 7.0, 250.0] {
            let ps = surf.plan(&base.scaled(s)).unwrap();
            prop_assert_eq!(ps.classification, p1.classification);
            prop_assert!(rel_err(ps.op_profit, s * p1.op_profit) <= 1e-9);
        }
    }
}

#[test]
fn closed_form_labels_agree_with_classifier() {
    let mut r = rng(11);
    for _ in 0..2_000 {
        let p = MarketParams::reference();
        let c = random_caps(&mut r);
        let s = random_signal(&mut r);
        for m in ParticipationModel::ALL {
            let (_, region) = optimal_dispatch(&p, &c, &s, m).unwrap();
            assert_eq!(region, h2plan::classify_region(&p, &c, &s, m).unwrap());
        }
    }
}
