//! Subcommand implementations. Each returns the text it wants printed on
//! stdout; files are written under the output directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use h2plan::ingest::load_series;
use h2plan::profitability::{operating_profit, ProfitCoefficients, ProfitSurface};
use h2plan::simulate::forecast_profit;
use h2plan::{
    compute_thresholds, run_simulation, Capacities, Classification, MarketParams,
    ParticipationModel, SignalSeries,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{parse_grid, RunConfig};
use crate::format::{aligned, num, ser9, ser9_opt, ser9_vec};
use crate::{input, OutputFormat};

const ALL_MODELS: [ParticipationModel; 4] = [
    ParticipationModel::M0,
    ParticipationModel::M1p,
    ParticipationModel::M1c,
    ParticipationModel::M2,
];

fn render<T: Serialize>(
    format: OutputFormat,
    value: &T,
    text: impl FnOnce() -> String,
) -> Result<String> {
    match format {
        OutputFormat::Json => Ok(serde_json::to_string_pretty(value)? + "\n"),
        OutputFormat::Text => Ok(text()),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    Ok(dir)
}

fn load(cfg: &RunConfig) -> Result<SignalSeries> {
    let source = input(cfg.source())?;
    let opts = input(cfg.load_options())?;
    input(load_series(&source, &opts).map_err(anyhow::Error::from))
}

fn horizon_for(cfg: &RunConfig, series: &SignalSeries) -> Result<f64> {
    match cfg.horizon {
        Some(h) if h.is_finite() && h > 0.0 => Ok(h),
        Some(h) => input(Err(anyhow::anyhow!("horizon must be positive, got {h}"))),
        None => Ok(series.len() as f64),
    }
}

fn surface<'a>(
    cfg: &RunConfig,
    series: &'a SignalSeries,
    params: &MarketParams,
    model: ParticipationModel,
) -> Result<ProfitSurface<'a>> {
    if cfg.piecewise.is_some() {
        log::warn!("piecewise production is only used by `simulate` and `sweep`; ignoring it here");
    }
    let mut s =
        ProfitSurface::new(series, params, model)?.with_horizon(horizon_for(cfg, series)?)?;
    if let Some(k) = cfg.kappa_max {
        s = input(s.with_kappa_max(k).map_err(anyhow::Error::from))?;
    }
    Ok(s)
}

#[derive(Serialize)]
struct ThresholdReport {
    #[serde(serialize_with = "ser9")]
    pi_lo: f64,
    #[serde(serialize_with = "ser9")]
    pi_hi: f64,
    #[serde(serialize_with = "ser9")]
    neg_ex: f64,
    #[serde(serialize_with = "ser9")]
    neg_im: f64,
    standard_ordering: bool,
}

pub fn thresholds(cfg: &RunConfig, format: OutputFormat) -> Result<String> {
    let params = input(cfg.params())?;
    let th = compute_thresholds(&params);
    let report = ThresholdReport {
        pi_lo: th.pi_lo,
        pi_hi: th.pi_hi,
        neg_ex: th.neg_ex,
        neg_im: th.neg_im,
        standard_ordering: th.standard,
    };
    render(format, &report, || {
        aligned(&[
            ("pi_lo ($/kWh)", num(th.pi_lo)),
            ("pi_hi ($/kWh)", num(th.pi_hi)),
            ("neg_ex ($/kWh)", num(th.neg_ex)),
            ("neg_im ($/kWh)", num(th.neg_im)),
            (
                "ordering",
                if th.standard {
                    "standard"
                } else {
                    "nonstandard (LP fallback)"
                }
                .to_string(),
            ),
        ])
    })
}

#[derive(Serialize)]
struct BreakdownReport {
    model: &'static str,
    #[serde(serialize_with = "ser9")]
    q_r: f64,
    #[serde(serialize_with = "ser9")]
    q_h: f64,
    intervals: usize,
    #[serde(serialize_with = "ser9")]
    total_renewable_kwh: f64,
    #[serde(serialize_with = "ser9")]
    pct_renewable_to_hydrogen: f64,
    #[serde(serialize_with = "ser9")]
    hydrogen_kg: f64,
    #[serde(serialize_with = "ser9")]
    revenue_hydrogen: f64,
    #[serde(serialize_with = "ser9")]
    pct_renewable_sold: f64,
    #[serde(serialize_with = "ser9")]
    revenue_renewable_sales: f64,
    #[serde(serialize_with = "ser9")]
    renewable_credit: f64,
    #[serde(serialize_with = "ser9")]
    pct_curtailed: f64,
    #[serde(serialize_with = "ser9")]
    lost_revenue_curtailment: f64,
    #[serde(serialize_with = "ser9")]
    import_cost: f64,
    #[serde(serialize_with = "ser9")]
    water_cost: f64,
    #[serde(serialize_with = "ser9")]
    gross_profit: f64,
    #[serde(serialize_with = "ser9")]
    amortized_fixed_cost: f64,
    #[serde(serialize_with = "ser9")]
    operating_profit: f64,
}

pub fn simulate(cfg: &RunConfig, format: OutputFormat) -> Result<String> {
    let params = input(cfg.params())?;
    let model = input(cfg.model())?;
    let caps = input(cfg.capacities())?;
    let pw = input(cfg.piecewise())?;
    let series = load(cfg)?;
    let result = run_simulation(&series, &params, &caps, model, pw.as_ref())?;
    let dir = out_dir(cfg)?;

    let log_path = dir.join("dispatch_log.csv");
    let mut w = csv::Writer::from_path(&log_path)
        .with_context(|| format!("cannot write {}", log_path.display()))?;
    w.write_record([
        "t",
        "lmp",
        "eta",
        "p_h",
        "p_ex",
        "p_im",
        "h_kg",
        "region",
        "gross_profit",
    ])?;
    let stamps = series.timestamps();
    for rec in &result.log {
        let t = match stamps {
            Some(ts) => ts[rec.t].to_rfc3339(),
            None => rec.t.to_string(),
        };
        w.write_record([
            t,
            num(rec.signal.lmp),
            num(rec.signal.eta),
            num(rec.dispatch.p_h),
            num(rec.dispatch.p_ex),
            num(rec.dispatch.p_im),
            num(rec.dispatch.h),
            rec.source.as_str().to_string(),
            num(rec.gross_profit),
        ])?;
    }
    w.flush()?;

    let b = result.breakdown;
    let report = BreakdownReport {
        model: model.as_str(),
        q_r: caps.q_r,
        q_h: caps.q_h,
        intervals: series.len(),
        total_renewable_kwh: b.total_renewable_kwh,
        pct_renewable_to_hydrogen: b.pct_renewable_to_hydrogen,
        hydrogen_kg: b.hydrogen_kg,
        revenue_hydrogen: b.revenue_hydrogen,
        pct_renewable_sold: b.pct_renewable_sold,
        revenue_renewable_sales: b.revenue_renewable_sales,
        renewable_credit: b.renewable_credit,
        pct_curtailed: b.pct_curtailed,
        lost_revenue_curtailment: b.lost_revenue_curtailment,
        import_cost: b.import_cost,
        water_cost: b.water_cost,
        gross_profit: b.gross_profit,
        amortized_fixed_cost: b.amortized_fixed_cost,
        operating_profit: b.operating_profit,
    };
    write_json(&dir.join("breakdown.json"), &report)?;

    render(format, &report, || {
        aligned(&[
            ("intervals", series.len().to_string()),
            ("renewable output (kWh)", num(b.total_renewable_kwh)),
            ("to hydrogen (%)", num(b.pct_renewable_to_hydrogen)),
            ("hydrogen (kg)", num(b.hydrogen_kg)),
            ("hydrogen revenue ($)", num(b.revenue_hydrogen)),
            ("sold (%)", num(b.pct_renewable_sold)),
            ("sales revenue ($)", num(b.revenue_renewable_sales)),
            ("renewable credit ($)", num(b.renewable_credit)),
            ("curtailed (%)", num(b.pct_curtailed)),
            (
                "curtailment opportunity ($)",
                num(b.lost_revenue_curtailment),
            ),
            ("import cost ($)", num(b.import_cost)),
            ("water cost ($)", num(b.water_cost)),
            ("gross profit ($)", num(b.gross_profit)),
            ("amortized fixed cost ($)", num(b.amortized_fixed_cost)),
            ("operating profit ($)", num(b.operating_profit)),
            ("output", dir.display().to_string()),
        ])
    })
}

#[derive(Serialize)]
struct MatchingLine {
    #[serde(serialize_with = "ser9")]
    kappa_star: f64,
    regime: &'static str,
}

#[derive(Serialize)]
struct HeatmapOverlays {
    model: &'static str,
    #[serde(serialize_with = "ser9")]
    horizon: f64,
    #[serde(serialize_with = "ser9")]
    kappa_max: f64,
    #[serde(serialize_with = "ser9_vec")]
    breakeven_rays: Vec<f64>,
    matching: MatchingLine,
}

/// Ratio key for caching coefficients; `q_r = 0` maps to infinity and the
/// origin to zero, matching how the surface classifies those points.
fn kappa_key(caps: &Capacities) -> u64 {
    let k = if caps.q_r > 0.0 {
        caps.q_h / caps.q_r
    } else if caps.q_h > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    k.to_bits()
}

pub fn heatmap(cfg: &RunConfig, format: OutputFormat) -> Result<String> {
    let params = input(cfg.params())?;
    let model = input(cfg.model())?;
    let q_r_grid = input(parse_grid(cfg.q_r_grid.as_deref().unwrap_or("")).context("--q-r-grid"))?;
    let q_h_grid = input(parse_grid(cfg.q_h_grid.as_deref().unwrap_or("")).context("--q-h-grid"))?;
    let series = load(cfg)?;
    let surf = surface(cfg, &series, &params, model)?;

    let cells: Vec<Capacities> = q_r_grid
        .iter()
        .flat_map(|&q_r| q_h_grid.iter().map(move |&q_h| Capacities { q_r, q_h }))
        .collect();
    let mut representatives: BTreeMap<u64, Capacities> = BTreeMap::new();
    for c in &cells {
        representatives.entry(kappa_key(c)).or_insert(*c);
    }
    let reps: Vec<(u64, Capacities)> = representatives.into_iter().collect();
    let coeffs: BTreeMap<u64, ProfitCoefficients> = reps
        .par_iter()
        .map(|(k, c)| (*k, surf.coefficients_for(c)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect();

    let rows: Vec<(Capacities, f64, Classification)> = cells
        .par_iter()
        .map(|caps| {
            let c = &coeffs[&kappa_key(caps)];
            let op = operating_profit(c, caps)?;
            Ok((*caps, op, Classification::of(op, c.revenue_scale(caps))))
        })
        .collect::<Result<_>>()?;

    let dir = out_dir(cfg)?;
    let grid_path = dir.join("heatmap.csv");
    let mut w = csv::Writer::from_path(&grid_path)
        .with_context(|| format!("cannot write {}", grid_path.display()))?;
    w.write_record(["q_r", "q_h", "op_profit", "classification"])?;
    for (caps, op, class) in &rows {
        w.write_record([
            num(caps.q_r),
            num(caps.q_h),
            num(*op),
            class.as_str().to_string(),
        ])?;
    }
    w.flush()?;

    let rays = surf.breakeven_rays();
    let reference_q_r = q_r_grid.iter().copied().find(|&q| q > 0.0).unwrap_or(1.0);
    let matching = surf.matching_capacity(reference_q_r)?;
    let overlays = HeatmapOverlays {
        model: model.as_str(),
        horizon: surf.horizon(),
        kappa_max: surf.kappa_max(),
        breakeven_rays: rays.clone(),
        matching: MatchingLine {
            kappa_star: matching.kappa_star,
            regime: matching.regime.as_str(),
        },
    };
    write_json(&dir.join("heatmap_overlays.json"), &overlays)?;

    render(format, &overlays, || {
        let rays: Vec<String> = rays.iter().map(|&k| num(k)).collect();
        aligned(&[
            ("cells", rows.len().to_string()),
            ("unique ratios", coeffs.len().to_string()),
            (
                "break-even rays",
                if rays.is_empty() {
                    "none".into()
                } else {
                    rays.join(", ")
                },
            ),
            (
                "matching ratio",
                format!(
                    "{} ({})",
                    num(matching.kappa_star),
                    matching.regime.as_str()
                ),
            ),
            ("output", dir.display().to_string()),
        ])
    })
}

#[derive(Serialize)]
struct SizeReport {
    model: &'static str,
    #[serde(serialize_with = "ser9")]
    budget: f64,
    #[serde(serialize_with = "ser9")]
    horizon: f64,
    #[serde(serialize_with = "ser9")]
    q_r: f64,
    #[serde(serialize_with = "ser9")]
    q_h: f64,
    #[serde(serialize_with = "ser9_opt")]
    kappa_star: Option<f64>,
    #[serde(serialize_with = "ser9")]
    op_profit: f64,
    classification: &'static str,
    #[serde(serialize_with = "ser9")]
    budget_residual: f64,
}

pub fn size(cfg: &RunConfig, format: OutputFormat) -> Result<String> {
    let params = input(cfg.params())?;
    let model = input(cfg.model())?;
    let budget = match cfg.budget {
        Some(b) if b.is_finite() && b >= 0.0 => b,
        Some(b) => return input(Err(anyhow::anyhow!("budget must be nonnegative, got {b}"))),
        None => return input(Err(anyhow::anyhow!("size needs --budget"))),
    };
    let series = load(cfg)?;
    let surf = surface(cfg, &series, &params, model)?;
    let plan = surf.optimal_nameplate(budget)?;
    let rates = surf.coefficients(0.0);
    let spent = rates.alpha_r_n * plan.caps.q_r + rates.alpha_h_n * plan.caps.q_h;
    let residual = if budget > 0.0 {
        (spent - budget).abs() / budget
    } else {
        spent.abs()
    };
    if residual > 1e-9 {
        bail!("budget check failed: relative residual {}", num(residual));
    }
    let report = SizeReport {
        model: model.as_str(),
        budget,
        horizon: surf.horizon(),
        q_r: plan.caps.q_r,
        q_h: plan.caps.q_h,
        kappa_star: plan.kappa_star,
        op_profit: plan.op_profit,
        classification: plan.classification.as_str(),
        budget_residual: residual,
    };
    render(format, &report, || {
        aligned(&[
            ("q_r (kW)", num(plan.caps.q_r)),
            ("q_h (kW)", num(plan.caps.q_h)),
            (
                "kappa*",
                plan.kappa_star.map_or("electrolyzer only".into(), num),
            ),
            ("operating profit ($)", num(plan.op_profit)),
            ("classification", plan.classification.as_str().to_string()),
            ("budget residual", num(residual)),
        ])
    })
}

pub fn sweep(cfg: &RunConfig, model_flag: bool, format: OutputFormat) -> Result<String> {
    let params = input(cfg.params())?;
    let caps = input(cfg.capacities())?;
    let pw = input(cfg.piecewise())?;
    let mut prices = cfg.prices.clone().unwrap_or_default();
    if prices.is_empty() {
        return input(Err(anyhow::anyhow!("empty price list: pass --prices")));
    }
    if let Some(p) = prices.iter().find(|p| !p.is_finite()) {
        return input(Err(anyhow::anyhow!("price {p} is not finite")));
    }
    prices.sort_by(f64::total_cmp);
    prices.dedup();
    let models: Vec<ParticipationModel> = if model_flag {
        vec![input(cfg.model())?]
    } else {
        ALL_MODELS.to_vec()
    };
    let series = load(cfg)?;

    let points: Vec<(f64, ParticipationModel)> = prices
        .iter()
        .flat_map(|&p| models.iter().map(move |&m| (p, m)))
        .collect();
    let profits: Vec<f64> = points
        .par_iter()
        .map(|&(pi_h, model)| {
            let p = params.with_hydrogen_price(pi_h);
            input(p.validate().map_err(anyhow::Error::from))?;
            Ok(run_simulation(&series, &p, &caps, model, pw.as_ref())?
                .breakdown
                .operating_profit)
        })
        .collect::<Result<_>>()?;

    let dir = out_dir(cfg)?;
    let path = dir.join("sweep.csv");
    let mut w = csv::Writer::from_path(&path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(["pi_h", "model", "op_profit"])?;
    for (&(pi_h, model), &op) in points.iter().zip(&profits) {
        w.write_record([num(pi_h), model.as_str().to_string(), num(op)])?;
    }
    w.flush()?;

    #[derive(Serialize)]
    struct Row {
        #[serde(serialize_with = "ser9")]
        pi_h: f64,
        model: &'static str,
        #[serde(serialize_with = "ser9")]
        op_profit: f64,
    }
    let rows: Vec<Row> = points
        .iter()
        .zip(&profits)
        .map(|(&(pi_h, m), &op_profit)| Row {
            pi_h,
            model: m.as_str(),
            op_profit,
        })
        .collect();
    render(format, &rows, || {
        let mut out = format!("{:>12}  {:<5}  {}\n", "pi_h", "model", "op_profit");
        for r in &rows {
            out.push_str(&format!(
                "{:>12}  {:<5}  {}\n",
                num(r.pi_h),
                r.model,
                num(r.op_profit)
            ));
        }
        out
    })
}

#[derive(Serialize)]
struct Cone {
    #[serde(serialize_with = "ser9")]
    kappa_from: f64,
    #[serde(serialize_with = "ser9")]
    kappa_to: f64,
    classification: &'static str,
}

#[derive(Serialize)]
struct BreakevenReport {
    model: &'static str,
    #[serde(serialize_with = "ser9")]
    horizon: f64,
    #[serde(serialize_with = "ser9")]
    kappa_max: f64,
    #[serde(serialize_with = "ser9_vec")]
    rays: Vec<f64>,
    cones: Vec<Cone>,
}

pub fn breakeven(cfg: &RunConfig, format: OutputFormat) -> Result<String> {
    let params = input(cfg.params())?;
    let model = input(cfg.model())?;
    let series = load(cfg)?;
    let surf = surface(cfg, &series, &params, model)?;
    let rays = surf.breakeven_rays();

    let mut edges = vec![0.0];
    edges.extend(
        rays.iter()
            .copied()
            .filter(|&k| k > 0.0 && k < surf.kappa_max()),
    );
    edges.push(surf.kappa_max());
    let mut cones = Vec::new();
    for w in edges.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let plan = surf.plan(&Capacities { q_r: 1.0, q_h: mid })?;
        cones.push(Cone {
            kappa_from: w[0],
            kappa_to: w[1],
            classification: plan.classification.as_str(),
        });
    }
    let report = BreakevenReport {
        model: model.as_str(),
        horizon: surf.horizon(),
        kappa_max: surf.kappa_max(),
        rays,
        cones,
    };
    render(format, &report, || {
        let mut rows: Vec<(&str, String)> = vec![(
            "break-even rays",
            if report.rays.is_empty() {
                "none".into()
            } else {
                report
                    .rays
                    .iter()
                    .map(|&k| num(k))
                    .collect::<Vec<_>>()
                    .join(", ")
            },
        )];
        let cone_text: Vec<String> = report
            .cones
            .iter()
            .map(|c| {
                format!(
                    "[{}, {}] {}",
                    num(c.kappa_from),
                    num(c.kappa_to),
                    c.classification
                )
            })
            .collect();
        rows.push(("cones", cone_text.join("; ")));
        aligned(&rows)
    })
}

#[derive(Serialize)]
struct ForecastReport {
    model: &'static str,
    train_intervals: usize,
    test_intervals: usize,
    #[serde(serialize_with = "ser9")]
    horizon: f64,
    #[serde(serialize_with = "ser9")]
    forecast_profit: f64,
    #[serde(serialize_with = "ser9_opt")]
    realized_profit: Option<f64>,
    #[serde(serialize_with = "ser9_opt")]
    relative_error: Option<f64>,
}

pub fn forecast(cfg: &RunConfig, format: OutputFormat) -> Result<String> {
    let params = input(cfg.params())?;
    let model = input(cfg.model())?;
    let caps = input(cfg.capacities())?;
    let fraction = cfg.train_fraction.unwrap_or(0.5);
    if !(fraction > 0.0 && fraction < 1.0) {
        return input(Err(anyhow::anyhow!(
            "train fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let series = load(cfg)?;
    let split = (fraction * series.len() as f64).floor() as usize;
    if split == 0 || split == series.len() {
        return input(Err(anyhow::anyhow!(
            "series of {} intervals is too short to split at {fraction}",
            series.len()
        )));
    }
    let train = series.slice(0, split)?;
    let test = series.slice(split, series.len())?;
    let horizon = match cfg.horizon {
        Some(h) if h.is_finite() && h > 0.0 => h,
        Some(h) => return input(Err(anyhow::anyhow!("horizon must be positive, got {h}"))),
        None => test.len() as f64,
    };
    let predicted = forecast_profit(&train, &caps, &params, model, horizon)?;
    let realized = if horizon == test.len() as f64 {
        Some(
            run_simulation(&test, &params, &caps, model, None)?
                .breakdown
                .operating_profit,
        )
    } else {
        None
    };
    let relative_error = realized.map(|r| (predicted - r).abs() / r.abs().max(1.0));
    let report = ForecastReport {
        model: model.as_str(),
        train_intervals: train.len(),
        test_intervals: test.len(),
        horizon,
        forecast_profit: predicted,
        realized_profit: realized,
        relative_error,
    };
    render(format, &report, || {
        aligned(&[
            ("train intervals", train.len().to_string()),
            ("test intervals", test.len().to_string()),
            ("horizon", num(horizon)),
            ("forecast profit ($)", num(predicted)),
            ("realized profit ($)", realized.map_or("n/a".into(), num)),
            ("relative error", relative_error.map_or("n/a".into(), num)),
        ])
    })
}
