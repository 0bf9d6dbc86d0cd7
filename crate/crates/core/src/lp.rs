//! Exact reference solver for the single-interval dispatch problem.
//!
//! The import/export complementarity makes the problem nonconvex, so it is
//! split into two linear programs: one with exports fixed to zero and one with
//! imports fixed to zero. Each has two decision variables (electrolyzer input
//! and the remaining grid flow), so it is solved exactly by evaluating the
//! objective at every feasible pairwise intersection of constraint lines. The
//! better of the two optima is the global optimum. Nothing here uses the
//! threshold prices.
//!
//! With a piecewise production curve the objective becomes concave piecewise
//! linear in the electrolyzer input; adding the curve's breakpoints as extra
//! vertical lines makes the optimum a vertex of the refined polygon.

use serde::{Deserialize, Serialize};

use crate::model::{
    Capacities, Dispatch, IntervalSignal, MarketParams, ModelError, ParticipationModel,
};
use crate::piecewise::PiecewiseProduction;

/// Which flow is fixed to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpCase {
    NoExport,
    NoImport,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpSolution {
    pub dispatch: Dispatch,
    /// Gross profit of the interval, $.
    pub profit: f64,
    pub case: LpCase,
}

/// `a*x + b*y <= c` with `a, b` in {-1, 0, 1}. Intersections of such lines are
/// computed with at most one rounding per coordinate.
#[derive(Debug, Clone, Copy)]
struct Line {
    a: f64,
    b: f64,
    c: f64,
}

impl Line {
    const fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    fn slack(&self, x: f64, y: f64) -> f64 {
        self.c - (self.a * x + self.b * y)
    }
}

fn intersect(l1: &Line, l2: &Line) -> Option<(f64, f64)> {
    if l1.a * l2.b - l2.a * l1.b == 0.0 {
        return None;
    }
    let (x, y) = if l1.b == 0.0 {
        let x = l1.c / l1.a;
        (x, (l2.c - l2.a * x) / l2.b)
    } else if l2.b == 0.0 {
        let x = l2.c / l2.a;
        (x, (l1.c - l1.a * x) / l1.b)
    } else if l1.a == 0.0 {
        let y = l1.c / l1.b;
        ((l2.c - l2.b * y) / l2.a, y)
    } else if l2.a == 0.0 {
        let y = l2.c / l2.b;
        ((l1.c - l1.b * y) / l1.a, y)
    } else {
        let det = l1.a * l2.b - l2.a * l1.b;
        (
            (l1.c * l2.b - l2.c * l1.b) / det,
            (l1.a * l2.c - l2.a * l1.c) / det,
        )
    };
    // Normalize -0.0.
    Some((x + 0.0, y + 0.0))
}

struct Objective<'a> {
    params: &'a MarketParams,
    caps: &'a Capacities,
    sig: &'a IntervalSignal,
    pw: Option<&'a PiecewiseProduction>,
}

impl Objective<'_> {
    fn hydrogen(&self, p_h: f64) -> f64 {
        match self.pw {
            Some(pw) => pw.output_rate(p_h) * self.params.interval_hours,
            None => self.params.gamma * p_h * self.params.interval_hours,
        }
    }

    fn dispatch(&self, case: LpCase, x: f64, y: f64) -> Dispatch {
        let (p_ex, p_im) = match case {
            LpCase::NoExport => (0.0, y),
            LpCase::NoImport => (y, 0.0),
        };
        Dispatch {
            p_h: x,
            p_ex,
            p_im,
            h: self.hydrogen(x),
        }
    }

    fn value(&self, d: &Dispatch) -> f64 {
        let p = self.params;
        let dt = p.interval_hours;
        let lmp = self.sig.lmp;
        p.hydrogen_margin() * d.h + (lmp + p.tau_rec_ex) * d.p_ex * dt
            - (lmp + p.tau_rec_im) * d.p_im * dt
            + p.tau_r * self.sig.eta * self.caps.q_r * dt
    }
}

fn case_constraints(case: LpCase, caps: &Capacities, available: f64, flow_cap: f64) -> Vec<Line> {
    let mut lines = vec![
        Line::new(-1.0, 0.0, 0.0),
        Line::new(1.0, 0.0, caps.q_h),
        Line::new(0.0, -1.0, 0.0),
        Line::new(0.0, 1.0, flow_cap),
    ];
    match case {
        // 0 <= p_h - p_im <= eta*q_r
        LpCase::NoExport => {
            lines.push(Line::new(-1.0, 1.0, 0.0));
            lines.push(Line::new(1.0, -1.0, available));
        }
        // p_h + p_ex <= eta*q_r
        LpCase::NoImport => lines.push(Line::new(1.0, 1.0, available)),
    }
    lines
}

/// Solves one of the two sub-LPs. `None` only if the polytope is empty, which
/// cannot happen for valid inputs (the origin is always feasible).
pub fn solve_case(
    params: &MarketParams,
    caps: &Capacities,
    sig: &IntervalSignal,
    model: ParticipationModel,
    case: LpCase,
    pw: Option<&PiecewiseProduction>,
) -> Option<LpSolution> {
    let available = sig.eta * caps.q_r;
    let flow_cap = match case {
        LpCase::NoExport if model.allows_import() => caps.q_h,
        LpCase::NoImport if model.allows_export() => available,
        _ => 0.0,
    };
    let constraints = case_constraints(case, caps, available, flow_cap);
    let mut lines = constraints.clone();
    if let Some(pw) = pw {
        lines.extend(
            pw.breakpoints()
                .into_iter()
                .filter(|&bp| bp > 0.0 && bp < caps.q_h)
                .map(|bp| Line::new(1.0, 0.0, bp)),
        );
    }

    let tol = 1e-12 * (1.0 + caps.q_h + available);
    let objective = Objective {
        params,
        caps,
        sig,
        pw,
    };
    let mut best: Option<LpSolution> = None;
    for i in 0..lines.len() {
        for j in (i + 1)..lines.len() {
            let Some((x, y)) = intersect(&lines[i], &lines[j]) else {
                continue;
            };
            if constraints.iter().any(|l| l.slack(x, y) < -tol) {
                continue;
            }
            let d = objective.dispatch(case, x, y);
            let profit = objective.value(&d);
            if best.is_none_or(|b| profit > b.profit) {
                best = Some(LpSolution {
                    dispatch: d,
                    profit,
                    case,
                });
            }
        }
    }
    best
}

/// Global optimum of the single-interval problem. Ties between the two cases
/// go to [`LpCase::NoImport`].
pub fn solve_exact(
    params: &MarketParams,
    caps: &Capacities,
    sig: &IntervalSignal,
    model: ParticipationModel,
    pw: Option<&PiecewiseProduction>,
) -> Result<LpSolution, ModelError> {
    params.validate()?;
    caps.validate()?;
    sig.validate()?;
    let no_import = solve_case(params, caps, sig, model, LpCase::NoImport, pw)
        .expect("origin is always feasible");
    let no_export = solve_case(params, caps, sig, model, LpCase::NoExport, pw)
        .expect("origin is always feasible");
    Ok(if no_export.profit > no_import.profit {
        no_export
    } else {
        no_import
    })
}

/// Brute-force search over a `(steps+1) x (steps+1)` grid of each case's
/// bounding box. Returns the best gross profit found, which never exceeds the
/// exact optimum.
pub fn grid_oracle(
    params: &MarketParams,
    caps: &Capacities,
    sig: &IntervalSignal,
    model: ParticipationModel,
    steps: usize,
    pw: Option<&PiecewiseProduction>,
) -> Result<f64, ModelError> {
    params.validate()?;
    caps.validate()?;
    sig.validate()?;
    let steps = steps.max(100);
    let available = sig.eta * caps.q_r;
    let objective = Objective {
        params,
        caps,
        sig,
        pw,
    };
    let mut best = f64::NEG_INFINITY;
    for case in [LpCase::NoExport, LpCase::NoImport] {
        let flow_cap = match case {
            LpCase::NoExport if model.allows_import() => caps.q_h,
            LpCase::NoImport if model.allows_export() => available,
            _ => 0.0,
        };
        for i in 0..=steps {
            let x = caps.q_h * i as f64 / steps as f64;
            for j in 0..=steps {
                let y = flow_cap * j as f64 / steps as f64;
                let feasible = match case {
                    LpCase::NoExport => x - y >= 0.0 && x - y <= available,
                    LpCase::NoImport => x + y <= available,
                };
                if feasible {
                    best = best.max(objective.value(&objective.dispatch(case, x, y)));
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ParticipationModel::*;

    fn setup() -> (MarketParams, Capacities) {
        (
            MarketParams::reference(),
            Capacities::new(45_000.0, 20_000.0).unwrap(),
        )
    }

    #[test]
    fn matches_hand_profit() {
        let (p, c) = setup();
        let sig = IntervalSignal::new(0.05, 0.5).unwrap();
        let sol = solve_exact(&p, &c, &sig, M2, None).unwrap();
        assert!((sol.profit - 3390.75).abs() < 1e-9, "{}", sol.profit);
        assert_eq!(sol.case, LpCase::NoImport);
        assert_eq!(sol.dispatch.p_h, 20_000.0);
        assert_eq!(sol.dispatch.p_ex, 2_500.0);
    }

    #[test]
    fn standalone_is_monotone_in_input() {
        let (p, c) = setup();
        for eta in [0.0, 0.1, 0.3, 0.5, 0.9] {
            let sig = IntervalSignal::new(0.3, eta).unwrap();
            let sol = solve_exact(&p, &c, &sig, M0, None).unwrap();
            assert_eq!(sol.dispatch.p_h, (eta * c.q_r).min(c.q_h));
            assert_eq!(sol.dispatch.p_ex, 0.0);
            assert_eq!(sol.dispatch.p_im, 0.0);
        }
    }

    #[test]
    fn paid_import_without_renewables() {
        let (p, c) = setup();
        let th = p.thresholds();
        let sig = IntervalSignal::new(-0.05, 0.0).unwrap();
        let sol = solve_exact(&p, &c, &sig, M2, None).unwrap();
        assert_eq!(
            (sol.dispatch.p_h, sol.dispatch.p_ex, sol.dispatch.p_im),
            (20_000.0, 0.0, 20_000.0)
        );
        assert!((sol.profit - (th.pi_lo + 0.05) * c.q_h).abs() < 1e-9);
    }

    #[test]
    fn grid_oracle_bounds() {
        let (p, c) = setup();
        let sig = IntervalSignal::new(0.08, 0.6).unwrap();
        let exact = solve_exact(&p, &c, &sig, M2, None).unwrap().profit;
        let grid = grid_oracle(&p, &c, &sig, M2, 1000, None).unwrap();
        assert!(grid <= exact + 1e-9 * exact.abs());
        assert!(exact - grid <= 0.01 * exact.abs());
    }

    #[test]
    fn grid_oracle_trivial_cases() {
        let p = MarketParams::reference();
        let c = Capacities::new(45_000.0, 20_000.0).unwrap();
        let sig = IntervalSignal::new(0.05, 0.0).unwrap();
        assert_eq!(grid_oracle(&p, &c, &sig, M0, 100, None).unwrap(), 0.0);
        let zero = Capacities::new(0.0, 0.0).unwrap();
        let sig = IntervalSignal::new(0.05, 0.7).unwrap();
        assert_eq!(grid_oracle(&p, &zero, &sig, M2, 100, None).unwrap(), 0.0);
    }

    #[test]
    fn intersections_are_exact_for_unit_lines() {
        let q_h = 20_000.1;
        let r = 4_500.3;
        let (x, y) = intersect(&Line::new(1.0, 0.0, q_h), &Line::new(1.0, -1.0, r)).unwrap();
        assert_eq!((x, y), (q_h, q_h - r));
        let (x, y) = intersect(&Line::new(0.0, -1.0, 0.0), &Line::new(1.0, 1.0, r)).unwrap();
        assert_eq!((x.to_bits(), y.to_bits()), (r.to_bits(), 0.0f64.to_bits()));
    }
}
