//! Run configuration: a flat TOML file whose keys mirror the command-line
//! flags. Flags override file values; unknown keys are rejected.
//!
//! Market parameters are in canonical units ($/kWh for electricity prices and
//! credits, $/kg for hydrogen, $/kW/yr for fixed costs). Relative data paths
//! are resolved against the directory containing the config file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use h2plan::ingest::{GapPolicy, LmpUnits, LoadOptions, SeriesSource};
use h2plan::{MarketParams, ParticipationModel, PiecewiseProduction};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub pi_h: Option<f64>,
    pub tau_h: Option<f64>,
    pub tau_r: Option<f64>,
    pub tau_rec_ex: Option<f64>,
    pub tau_rec_im: Option<f64>,
    pub gamma: Option<f64>,
    pub c_w: Option<f64>,
    pub alpha_r: Option<f64>,
    pub alpha_h: Option<f64>,
    pub intervals_per_year: Option<f64>,
    pub interval_hours: Option<f64>,

    pub q_r: Option<f64>,
    pub q_h: Option<f64>,
    pub model: Option<String>,
    /// Production segments as `[slope kg/kWh, intercept kg/h]` pairs.
    pub piecewise: Option<Vec<[f64; 2]>>,

    pub data: Option<PathBuf>,
    pub lmp_data: Option<PathBuf>,
    pub cf_data: Option<PathBuf>,
    pub lmp_units: Option<String>,
    pub gap_policy: Option<String>,
    pub out: Option<PathBuf>,

    pub budget: Option<f64>,
    pub prices: Option<Vec<f64>>,
    pub q_r_grid: Option<String>,
    pub q_h_grid: Option<String>,
    pub horizon: Option<f64>,
    pub kappa_max: Option<f64>,
    pub train_fraction: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        if let Some(dir) = path.parent() {
            for p in [
                &mut cfg.data,
                &mut cfg.lmp_data,
                &mut cfg.cf_data,
                &mut cfg.out,
            ]
            .into_iter()
            .flatten()
            {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    /// Copies every value set in `flags` over this config.
    pub fn overlay(mut self, flags: RunConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if flags.$f.is_some() { self.$f = flags.$f; } )* };
        }
        take!(
            pi_h,
            tau_h,
            tau_r,
            tau_rec_ex,
            tau_rec_im,
            gamma,
            c_w,
            alpha_r,
            alpha_h,
            intervals_per_year,
            interval_hours,
            q_r,
            q_h,
            model,
            piecewise,
            data,
            lmp_data,
            cf_data,
            lmp_units,
            gap_policy,
            out,
            budget,
            prices,
            q_r_grid,
            q_h_grid,
            horizon,
            kappa_max,
            train_fraction
        );
        self
    }

    /// Checks every value that is set, so a bad key fails before any
    /// computation starts regardless of which subcommand reads it.
    pub fn validate(&self) -> Result<()> {
        self.params()?;
        self.model()?;
        self.piecewise()?;
        self.load_options()?;
        match (self.q_r, self.q_h) {
            (Some(_), Some(_)) => {
                self.capacities()?;
            }
            (None, None) => {}
            _ => bail!("set both q_r and q_h, or neither"),
        }
        for (name, grid) in [("q_r_grid", &self.q_r_grid), ("q_h_grid", &self.q_h_grid)] {
            if let Some(g) = grid {
                parse_grid(g).with_context(|| format!("invalid {name}"))?;
            }
        }
        Ok(())
    }

    pub fn params(&self) -> Result<MarketParams> {
        let base = MarketParams::reference();
        let p = MarketParams {
            pi_h: self.pi_h.unwrap_or(base.pi_h),
            tau_h: self.tau_h.unwrap_or(base.tau_h),
            tau_r: self.tau_r.unwrap_or(base.tau_r),
            tau_rec_ex: self.tau_rec_ex.unwrap_or(base.tau_rec_ex),
            tau_rec_im: self.tau_rec_im.unwrap_or(base.tau_rec_im),
            gamma: self.gamma.unwrap_or(base.gamma),
            c_w: self.c_w.unwrap_or(base.c_w),
            alpha_r: self.alpha_r.unwrap_or(base.alpha_r),
            alpha_h: self.alpha_h.unwrap_or(base.alpha_h),
            intervals_per_year: self.intervals_per_year.unwrap_or(base.intervals_per_year),
            interval_hours: self.interval_hours.unwrap_or(base.interval_hours),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn model(&self) -> Result<ParticipationModel> {
        match &self.model {
            Some(m) => m.parse().map_err(anyhow::Error::msg),
            None => Ok(ParticipationModel::M2),
        }
    }

    pub fn capacities(&self) -> Result<h2plan::Capacities> {
        let (Some(q_r), Some(q_h)) = (self.q_r, self.q_h) else {
            bail!("capacities required: set q_r and q_h (kW) via --q-r/--q-h or the config");
        };
        Ok(h2plan::Capacities::new(q_r, q_h)?)
    }

    pub fn piecewise(&self) -> Result<Option<PiecewiseProduction>> {
        self.piecewise
            .as_ref()
            .map(|segs| {
                PiecewiseProduction::from_pairs(
                    &segs.iter().map(|&[a, b]| (a, b)).collect::<Vec<_>>(),
                )
                .map_err(anyhow::Error::from)
            })
            .transpose()
    }

    pub fn source(&self) -> Result<SeriesSource> {
        match (&self.data, &self.lmp_data, &self.cf_data) {
            (Some(d), None, None) => Ok(SeriesSource::Combined(d.clone())),
            (None, Some(l), Some(c)) => Ok(SeriesSource::Separate {
                lmp: l.clone(),
                capacity_factor: c.clone(),
            }),
            (None, None, None) => {
                bail!("no input series: pass --data FILE or --lmp-data and --cf-data")
            }
            _ => bail!("use either --data or both --lmp-data and --cf-data"),
        }
    }

    pub fn load_options(&self) -> Result<LoadOptions> {
        let units = self
            .lmp_units
            .as_deref()
            .map(str::parse::<LmpUnits>)
            .transpose()
            .map_err(anyhow::Error::msg)?;
        let gap_policy = self
            .gap_policy
            .as_deref()
            .map(str::parse::<GapPolicy>)
            .transpose()
            .map_err(anyhow::Error::msg)?
            .unwrap_or_default();
        Ok(LoadOptions {
            units,
            gap_policy,
            interval_hours: self.interval_hours.unwrap_or(1.0),
        })
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .unwrap_or_else(|| PathBuf::from("h2plan_out"))
    }
}

/// Parses `a,b,c` or `lo:hi:n` (n evenly spaced points, inclusive) into a
/// strictly ascending, nonempty grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    let values: Vec<f64> = if let Some((lo, rest)) = text.split_once(':') {
        let (hi, n) = rest
            .split_once(':')
            .with_context(|| format!("grid `{text}`: expected lo:hi:n"))?;
        let lo: f64 = lo
            .trim()
            .parse()
            .with_context(|| format!("grid `{text}`: bad lower bound"))?;
        let hi: f64 = hi
            .trim()
            .parse()
            .with_context(|| format!("grid `{text}`: bad upper bound"))?;
        let n: usize = n
            .trim()
            .parse()
            .with_context(|| format!("grid `{text}`: bad point count"))?;
        match n {
            0 => Vec::new(),
            1 => vec![lo],
            _ => (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    } else {
        text.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .with_context(|| format!("grid `{text}`: bad value `{}`", s.trim()))
            })
            .collect::<Result<_>>()?
    };
    if values.is_empty() {
        bail!("grid `{text}` is empty");
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        bail!("grid `{text}`: values must be finite and nonnegative");
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        bail!("grid `{text}` must be strictly ascending");
    }
    Ok(values)
}
