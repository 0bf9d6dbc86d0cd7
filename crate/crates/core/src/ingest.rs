//! CSV loading and writing of price and capacity-factor series.
//!
//! Two layouts are accepted: one combined file with columns
//! `timestamp, lmp, capacity_factor`, or two files `timestamp, lmp` and
//! `timestamp, capacity_factor` joined on the timestamp. Timestamps are
//! RFC 3339 with an explicit offset and are compared as instants, so the
//! repeated local hour at a DST change is unambiguous.
//!
//! LMP units are never guessed. They come from the caller or from a unit
//! suffix on the column name (`lmp_usd_per_mwh`, `lmp_usd_per_kwh`), and a
//! conflict between the two is an error. Loaded prices are always $/kWh.

use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Duration, FixedOffset};
use thiserror::Error;

use crate::model::IntervalSignal;
use crate::profitability::{ProfitabilityError, SignalSeries};

/// Capacity factors this far outside `[0, 1]` are clamped with a warning.
pub const ETA_CLAMP_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot open {path}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("CSV error in {file}")]
    Csv { file: String, source: csv::Error },
    #[error("{file}: missing column `{column}`")]
    MissingColumn { file: String, column: &'static str },
    #[error("{file} row {row}: cannot parse {column} `{value}`: {reason}")]
    Parse {
        file: String,
        row: u64,
        column: &'static str,
        value: String,
        reason: String,
    },
    #[error("{file} row {row}: duplicate timestamp {timestamp}")]
    Duplicate {
        file: String,
        row: u64,
        timestamp: String,
    },
    #[error("{file} row {row}: timestamp {timestamp} is earlier than the previous row")]
    NonMonotone {
        file: String,
        row: u64,
        timestamp: String,
    },
    #[error(
        "{file} row {row}: spacing of {hours} h is not a multiple of the {interval} h interval"
    )]
    Spacing {
        file: String,
        row: u64,
        hours: f64,
        interval: f64,
    },
    #[error("gap of {missing} interval(s) before {timestamp}")]
    Gap { timestamp: String, missing: u64 },
    #[error("timestamp {timestamp} present in the {present} file only")]
    Unmatched {
        timestamp: String,
        present: &'static str,
    },
    #[error("{file} row {row}: capacity factor {value} outside [0, 1]")]
    Eta { file: String, row: u64, value: f64 },
    #[error("LMP units not declared; pass them explicitly or use a unit-suffixed column name")]
    UnitsUndeclared,
    #[error("declared LMP units {declared} conflict with column `{column}`")]
    UnitConflict { declared: LmpUnits, column: String },
    #[error("empty series")]
    Empty,
    #[error("cannot emit a series without timestamps")]
    MissingTimestamps,
    #[error("{0}")]
    Series(#[from] ProfitabilityError),
}

/// Unit of the LMP column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LmpUnits {
    UsdPerMwh,
    UsdPerKwh,
}

impl LmpUnits {
    fn to_kwh(self, v: f64) -> f64 {
        match self {
            Self::UsdPerMwh => v / 1000.0,
            Self::UsdPerKwh => v,
        }
    }
}

impl fmt::Display for LmpUnits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::UsdPerMwh => "mwh",
            Self::UsdPerKwh => "kwh",
        })
    }
}

impl FromStr for LmpUnits {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mwh" | "usd_per_mwh" => Ok(Self::UsdPerMwh),
            "kwh" | "usd_per_kwh" => Ok(Self::UsdPerKwh),
            other => Err(format!("unknown LMP units `{other}` (expected mwh|kwh)")),
        }
    }
}

/// What to do with intervals missing from the series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GapPolicy {
    #[default]
    Error,
    /// Skip missing intervals.
    Drop,
    /// Repeat the last known value.
    FillPrevious,
}

impl FromStr for GapPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "error" => Ok(Self::Error),
            "drop" => Ok(Self::Drop),
            "fill_previous" => Ok(Self::FillPrevious),
            other => Err(format!(
                "unknown gap policy `{other}` (expected error|drop|fill_previous)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadOptions {
    /// Declared LMP units; may be omitted when the column name carries them.
    pub units: Option<LmpUnits>,
    pub gap_policy: GapPolicy,
    pub interval_hours: f64,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            units: None,
            gap_policy: GapPolicy::Error,
            interval_hours: 1.0,
        }
    }
}

/// Where a series comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeriesSource {
    Combined(PathBuf),
    Separate {
        lmp: PathBuf,
        capacity_factor: PathBuf,
    },
}

struct Row {
    ts: DateTime<FixedOffset>,
    line: u64,
    lmp: Option<f64>,
    eta: Option<f64>,
}

#[derive(Clone, Copy)]
enum Columns {
    Lmp,
    CapacityFactor,
    Both,
}

fn open(path: &Path) -> Result<File, IngestError> {
    File::open(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a series from disk and labels it with the file name(s).
pub fn load_series(source: &SeriesSource, opts: &LoadOptions) -> Result<SignalSeries, IngestError> {
    match source {
        SeriesSource::Combined(path) => {
            let name = path.display().to_string();
            read_combined(open(path)?, &name, opts)
        }
        SeriesSource::Separate {
            lmp,
            capacity_factor,
        } => {
            let lmp_name = lmp.display().to_string();
            let cf_name = capacity_factor.display().to_string();
            read_separate(
                (open(lmp)?, lmp_name.as_str()),
                (open(capacity_factor)?, cf_name.as_str()),
                opts,
            )
        }
    }
}

/// Reads a combined `timestamp, lmp, capacity_factor` CSV.
pub fn read_combined<R: Read>(
    reader: R,
    name: &str,
    opts: &LoadOptions,
) -> Result<SignalSeries, IngestError> {
    let rows = read_rows(reader, name, Columns::Both, opts)?;
    let joined = rows
        .into_iter()
        .map(|r| (r.ts, r.line, r.lmp.unwrap(), r.eta.unwrap()))
        .collect();
    assemble(joined, name, name, opts)
}

/// Reads and joins separate `timestamp, lmp` and `timestamp, capacity_factor`
/// CSVs. Each argument is a reader and a display name.
pub fn read_separate<R1: Read, R2: Read>(
    lmp: (R1, &str),
    cf: (R2, &str),
    opts: &LoadOptions,
) -> Result<SignalSeries, IngestError> {
    let lmp_rows = read_rows(lmp.0, lmp.1, Columns::Lmp, opts)?;
    let cf_rows = read_rows(cf.0, cf.1, Columns::CapacityFactor, opts)?;

    let mut joined = Vec::with_capacity(lmp_rows.len().max(cf_rows.len()));
    let (mut i, mut j) = (0, 0);
    let mut last: Option<(f64, f64)> = None;
    while i < lmp_rows.len() || j < cf_rows.len() {
        let a = lmp_rows.get(i);
        let b = cf_rows.get(j);
        let (ts, line, lmp_v, eta_v) = match (a, b) {
            (Some(a), Some(b)) if a.ts == b.ts => {
                i += 1;
                j += 1;
                (a.ts, a.line, a.lmp, b.eta)
            }
            (Some(a), Some(b)) if b.ts < a.ts => {
                j += 1;
                (b.ts, b.line, None, b.eta)
            }
            (Some(a), _) => {
                i += 1;
                (a.ts, a.line, a.lmp, None)
            }
            (None, Some(b)) => {
                j += 1;
                (b.ts, b.line, None, b.eta)
            }
            (None, None) => unreachable!(),
        };
        let (lmp_v, eta_v) = match (lmp_v, eta_v) {
            (Some(l), Some(e)) => (l, e),
            (l, e) => {
                let present = if l.is_some() {
                    "LMP"
                } else {
                    "capacity factor"
                };
                match (opts.gap_policy, last) {
                    (GapPolicy::Drop, _) => continue,
                    (GapPolicy::FillPrevious, Some((pl, pe))) => (l.unwrap_or(pl), e.unwrap_or(pe)),
                    _ => {
                        return Err(IngestError::Unmatched {
                            timestamp: ts.to_rfc3339(),
                            present,
                        })
                    }
                }
            }
        };
        last = Some((lmp_v, eta_v));
        joined.push((ts, line, lmp_v, eta_v));
    }
    let label = format!("{}+{}", lmp.1, cf.1);
    assemble(joined, lmp.1, &label, opts)
}

fn find_column(headers: &csv::StringRecord, wanted: &[&str]) -> Option<(usize, String)> {
    headers.iter().enumerate().find_map(|(i, h)| {
        let h = h.trim().to_ascii_lowercase();
        wanted.contains(&h.as_str()).then_some((i, h))
    })
}

fn resolve_units(declared: Option<LmpUnits>, column: &str) -> Result<LmpUnits, IngestError> {
    let from_header = match column {
        "lmp_usd_per_mwh" => Some(LmpUnits::UsdPerMwh),
        "lmp_usd_per_kwh" => Some(LmpUnits::UsdPerKwh),
        _ => None,
    };
    match (declared, from_header) {
        (Some(d), Some(h)) if d != h => Err(IngestError::UnitConflict {
            declared: d,
            column: column.to_string(),
        }),
        (Some(u), _) | (None, Some(u)) => Ok(u),
        (None, None) => Err(IngestError::UnitsUndeclared),
    }
}

fn parse_f64(value: &str, file: &str, row: u64, column: &'static str) -> Result<f64, IngestError> {
    let parse_err = |reason: String| IngestError::Parse {
        file: file.to_string(),
        row,
        column,
        value: value.to_string(),
        reason,
    };
    let v: f64 = value
        .parse()
        .map_err(|e: std::num::ParseFloatError| parse_err(e.to_string()))?;
    if !v.is_finite() {
        return Err(parse_err("not a finite number".into()));
    }
    Ok(v)
}

fn read_rows<R: Read>(
    reader: R,
    file: &str,
    columns: Columns,
    opts: &LoadOptions,
) -> Result<Vec<Row>, IngestError> {
    let csv_err = |source| IngestError::Csv {
        file: file.to_string(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(IngestError::Empty);
    }
    let missing = |column| IngestError::MissingColumn {
        file: file.to_string(),
        column,
    };
    let (ts_col, _) = find_column(&headers, &["timestamp"]).ok_or_else(|| missing("timestamp"))?;
    let lmp_col = match columns {
        Columns::Lmp | Columns::Both => {
            let (i, name) = find_column(&headers, &["lmp", "lmp_usd_per_mwh", "lmp_usd_per_kwh"])
                .ok_or_else(|| missing("lmp"))?;
            Some((i, resolve_units(opts.units, &name)?))
        }
        Columns::CapacityFactor => None,
    };
    let eta_col = match columns {
        Columns::CapacityFactor | Columns::Both => Some(
            find_column(&headers, &["capacity_factor"])
                .ok_or_else(|| missing("capacity_factor"))?
                .0,
        ),
        Columns::Lmp => None,
    };

    let mut rows: Vec<Row> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let raw_ts = field(ts_col);
        let ts = DateTime::parse_from_rfc3339(raw_ts).map_err(|e| IngestError::Parse {
            file: file.to_string(),
            row: line,
            column: "timestamp",
            value: raw_ts.to_string(),
            reason: e.to_string(),
        })?;
        if let Some(prev) = rows.last() {
            if ts == prev.ts {
                return Err(IngestError::Duplicate {
                    file: file.to_string(),
                    row: line,
                    timestamp: raw_ts.to_string(),
                });
            }
            if ts < prev.ts {
                return Err(IngestError::NonMonotone {
                    file: file.to_string(),
                    row: line,
                    timestamp: raw_ts.to_string(),
                });
            }
        }
        let lmp = match lmp_col {
            Some((i, units)) => Some(units.to_kwh(parse_f64(field(i), file, line, "lmp")?)),
            None => None,
        };
        let eta = match eta_col {
            Some(i) => Some(clamp_eta(
                parse_f64(field(i), file, line, "capacity_factor")?,
                file,
                line,
            )?),
            None => None,
        };
        rows.push(Row { ts, line, lmp, eta });
    }
    if rows.is_empty() {
        return Err(IngestError::Empty);
    }
    Ok(rows)
}

fn clamp_eta(v: f64, file: &str, row: u64) -> Result<f64, IngestError> {
    if (0.0..=1.0).contains(&v) {
        return Ok(v);
    }
    if (-ETA_CLAMP_TOL..0.0).contains(&v) || (v > 1.0 && v <= 1.0 + ETA_CLAMP_TOL) {
        let c = v.clamp(0.0, 1.0);
        log::warn!("{file} row {row}: capacity factor {v} clamped to {c}");
        return Ok(c);
    }
    Err(IngestError::Eta {
        file: file.to_string(),
        row,
        value: v,
    })
}

/// Applies the gap policy to joined rows and builds the series.
fn assemble(
    rows: Vec<(DateTime<FixedOffset>, u64, f64, f64)>,
    file: &str,
    label: &str,
    opts: &LoadOptions,
) -> Result<SignalSeries, IngestError> {
    if rows.is_empty() {
        return Err(IngestError::Empty);
    }
    let step_secs = opts.interval_hours * 3600.0;
    if !(step_secs.is_finite() && step_secs >= 1.0 && step_secs.fract() == 0.0) {
        return Err(IngestError::Series(ProfitabilityError::InvalidArgument(
            format!(
                "interval_hours must be a positive whole number of seconds, got {}",
                opts.interval_hours
            ),
        )));
    }
    let step = step_secs as i64;

    let mut timestamps = Vec::with_capacity(rows.len());
    let mut signals = Vec::with_capacity(rows.len());
    for (k, &(ts, line, lmp, eta)) in rows.iter().enumerate() {
        if k > 0 {
            let prev: DateTime<FixedOffset> = timestamps[timestamps.len() - 1];
            let diff = (ts - prev).num_seconds();
            if diff % step != 0 {
                return Err(IngestError::Spacing {
                    file: file.to_string(),
                    row: line,
                    hours: diff as f64 / 3600.0,
                    interval: opts.interval_hours,
                });
            }
            let missing = (diff / step - 1) as u64;
            if missing > 0 {
                match opts.gap_policy {
                    GapPolicy::Error => {
                        return Err(IngestError::Gap {
                            timestamp: ts.to_rfc3339(),
                            missing,
                        })
                    }
                    GapPolicy::Drop => {}
                    GapPolicy::FillPrevious => {
                        let fill: IntervalSignal = signals[signals.len() - 1];
                        for j in 1..=missing as i64 {
                            timestamps.push(prev + Duration::seconds(j * step));
                            signals.push(fill);
                        }
                    }
                }
            }
        }
        timestamps.push(ts);
        signals.push(IntervalSignal { lmp, eta });
    }
    Ok(SignalSeries::new(signals, opts.interval_hours, label)?.with_timestamps(timestamps)?)
}

/// Writes a series as a combined CSV with LMP in $/kWh. Values are written
/// in shortest round-trip form, so reading the output back with
/// [`LmpUnits::UsdPerKwh`] reproduces the series exactly.
pub fn write_series<W: Write>(series: &SignalSeries, writer: W) -> Result<(), IngestError> {
    let timestamps = series.timestamps().ok_or(IngestError::MissingTimestamps)?;
    let csv_err = |source| IngestError::Csv {
        file: "output".into(),
        source,
    };
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["timestamp", "lmp_usd_per_kwh", "capacity_factor"])
        .map_err(csv_err)?;
    for (ts, sig) in timestamps.iter().zip(series.signals()) {
        w.write_record([ts.to_rfc3339(), sig.lmp.to_string(), sig.eta.to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| csv_err(e.into()))?;
    Ok(())
}

/// [`write_series`] to a file.
pub fn emit_series(series: &SignalSeries, path: &Path) -> Result<(), IngestError> {
    let f = File::create(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_series(series, std::io::BufWriter::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(units: LmpUnits) -> LoadOptions {
        LoadOptions {
            units: Some(units),
            ..LoadOptions::default()
        }
    }

    const MWH: &str = "timestamp,lmp,capacity_factor
2022-06-01T00:00:00Z,55.0,0.1
2022-06-01T01:00:00Z,-12.5,0.0
2022-06-01T02:00:00Z,120.25,0.75
";

    #[test]
    fn converts_mwh_prices() {
        let s = read_combined(MWH.as_bytes(), "mwh.csv", &opts(LmpUnits::UsdPerMwh)).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.signals()[0].lmp, 0.055);
        assert_eq!(s.signals()[1].lmp, -0.0125);
        assert_eq!(s.signals()[2].eta, 0.75);
    }

    #[test]
    fn duplicate_timestamp_names_row() {
        let csv = "timestamp,lmp,capacity_factor
2022-06-01T00:00:00Z,0.05,0.1
2022-06-01T01:00:00Z,0.05,0.1
2022-06-01T01:00:00+00:00,0.05,0.1
";
        let err = read_combined(csv.as_bytes(), "dup.csv", &opts(LmpUnits::UsdPerKwh)).unwrap_err();
        assert!(
            matches!(err, IngestError::Duplicate { row: 4, .. }),
            "{err}"
        );
        assert!(err.to_string().contains("row 4"));
    }

    #[test]
    fn nonmonotone_rejected() {
        let csv = "timestamp,lmp,capacity_factor
2022-06-01T01:00:00Z,0.05,0.1
2022-06-01T00:00:00Z,0.05,0.1
";
        let err = read_combined(csv.as_bytes(), "x.csv", &opts(LmpUnits::UsdPerKwh)).unwrap_err();
        assert!(matches!(err, IngestError::NonMonotone { row: 3, .. }));
    }

    #[test]
    fn eta_clamped_at_tolerance_edge() {
        let csv = "timestamp,lmp,capacity_factor
2022-06-01T00:00:00Z,0.05,1.0000000001
2022-06-01T01:00:00Z,0.05,-0.0000000001
";
        let s = read_combined(csv.as_bytes(), "x.csv", &opts(LmpUnits::UsdPerKwh)).unwrap();
        assert_eq!(s.signals()[0].eta, 1.0);
        assert_eq!(s.signals()[1].eta, 0.0);
        let bad = "timestamp,lmp,capacity_factor\n2022-06-01T00:00:00Z,0.05,1.001\n";
        let err = read_combined(bad.as_bytes(), "x.csv", &opts(LmpUnits::UsdPerKwh)).unwrap_err();
        assert!(matches!(err, IngestError::Eta { row: 2, .. }));
    }

    #[test]
    fn units_must_be_declared() {
        let err = read_combined(MWH.as_bytes(), "x.csv", &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, IngestError::UnitsUndeclared));
        let suffixed = MWH.replace("lmp,", "lmp_usd_per_mwh,");
        let s = read_combined(suffixed.as_bytes(), "x.csv", &LoadOptions::default()).unwrap();
        assert_eq!(s.signals()[0].lmp, 0.055);
        let err =
            read_combined(suffixed.as_bytes(), "x.csv", &opts(LmpUnits::UsdPerKwh)).unwrap_err();
        assert!(matches!(err, IngestError::UnitConflict { .. }));
    }

    #[test]
    fn gap_policies() {
        let csv = "timestamp,lmp,capacity_factor
2022-06-01T00:00:00Z,0.05,0.1
2022-06-01T03:00:00Z,0.07,0.3
";
        let mut o = opts(LmpUnits::UsdPerKwh);
        let err = read_combined(csv.as_bytes(), "x.csv", &o).unwrap_err();
        assert!(matches!(err, IngestError::Gap { missing: 2, .. }));
        o.gap_policy = GapPolicy::Drop;
        assert_eq!(read_combined(csv.as_bytes(), "x.csv", &o).unwrap().len(), 2);
        o.gap_policy = GapPolicy::FillPrevious;
        let s = read_combined(csv.as_bytes(), "x.csv", &o).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.signals()[2].lmp, 0.05);
        assert_eq!(s.signals()[3].lmp, 0.07);
        let ts = s.timestamps().unwrap();
        assert_eq!((ts[2] - ts[1]).num_hours(), 1);
    }

    #[test]
    fn irregular_spacing_rejected() {
        let csv = "timestamp,lmp,capacity_factor
2022-06-01T00:00:00Z,0.05,0.1
2022-06-01T00:30:00Z,0.07,0.3
";
        let err = read_combined(csv.as_bytes(), "x.csv", &opts(LmpUnits::UsdPerKwh)).unwrap_err();
        assert!(matches!(err, IngestError::Spacing { .. }));
    }

    #[test]
    fn dst_fall_back_hours_are_distinct() {
        let csv = "timestamp,lmp,capacity_factor
2022-11-06T00:00:00-04:00,0.03,0.0
2022-11-06T01:00:00-04:00,0.03,0.0
2022-11-06T01:00:00-05:00,0.02,0.0
2022-11-06T02:00:00-05:00,0.02,0.0
";
        let s = read_combined(csv.as_bytes(), "dst.csv", &opts(LmpUnits::UsdPerKwh)).unwrap();
        assert_eq!(s.len(), 4);
    }

    #[test]
    fn separate_files_join_on_instant() {
        let lmp = "timestamp,lmp
2022-06-01T00:00:00Z,50
2022-06-01T01:00:00Z,60
2022-06-01T02:00:00Z,70
";
        let cf = "timestamp,capacity_factor
2022-06-01T01:00:00+00:00,0.5
2022-06-01T02:00:00+00:00,0.6
";
        let mut o = opts(LmpUnits::UsdPerMwh);
        let err =
            read_separate((lmp.as_bytes(), "lmp.csv"), (cf.as_bytes(), "cf.csv"), &o).unwrap_err();
        assert!(matches!(err, IngestError::Unmatched { present: "LMP", .. }));
        o.gap_policy = GapPolicy::Drop;
        let s = read_separate((lmp.as_bytes(), "lmp.csv"), (cf.as_bytes(), "cf.csv"), &o).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.signals()[0].lmp, 0.06);
        assert_eq!(s.signals()[1].eta, 0.6);
    }

    #[test]
    fn header_only_is_empty() {
        let err = read_combined(
            "timestamp,lmp,capacity_factor\n".as_bytes(),
            "x.csv",
            &opts(LmpUnits::UsdPerKwh),
        )
        .unwrap_err();
        assert_eq!(err.to_string(), "empty series");
        let err = read_combined("".as_bytes(), "x.csv", &opts(LmpUnits::UsdPerKwh)).unwrap_err();
        assert_eq!(err.to_string(), "empty series");
    }

    #[test]
    fn write_then_read_is_identical() {
        let s = read_combined(MWH.as_bytes(), "mwh.csv", &opts(LmpUnits::UsdPerMwh)).unwrap();
        let mut buf = Vec::new();
        write_series(&s, &mut buf).unwrap();
        let back = read_combined(buf.as_slice(), "back.csv", &LoadOptions::default()).unwrap();
        for (a, b) in s.signals().iter().zip(back.signals()) {
            assert_eq!(a.lmp.to_bits(), b.lmp.to_bits());
            assert_eq!(a.eta.to_bits(), b.eta.to_bits());
        }
        assert_eq!(s.timestamps(), back.timestamps());
    }
}
