//! Plain-text file formats.
//!
//! Floating-point columns are written as `{:.9e}`: ten significant digits,
//! `.` as decimal separator, no grouping.

use std::io::{BufRead, Read, Write};

use serde::Serialize;

use crate::campaign::{CampaignConfig, CampaignResult, CorrectionSweep, RateDependentSweep, TRANSMISSION_CONVENTION};
use crate::detector::SuperpositionMeasurement;
use crate::error::{Error, Result};
use crate::interference::RateOctet;

/// Formats a float for data files.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.9e}")
}

fn csv_err(e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => Error::Parse(e.to_string()),
    }
}

pub const CAMPAIGN_COLUMNS: [&str; 6] = ["rate_hz", "mean_kappa", "std_kappa", "mean_eps", "mean_delta", "n_undefined"];

pub fn write_campaign_csv<W: Write>(result: &CampaignResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CAMPAIGN_COLUMNS).map_err(csv_err)?;
    for s in &result.summaries {
        w.write_record([
            fmt_float(s.rate_hz),
            fmt_float(s.mean_kappa),
            fmt_float(s.std_kappa),
            fmt_float(s.mean_eps),
            fmt_float(s.mean_delta),
            s.n_undefined.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Metadata written next to every result file.
#[derive(Debug, Clone, Serialize)]
pub struct Sidecar<'a> {
    pub software: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub transmission_convention: &'static str,
    pub config: &'a CampaignConfig,
    pub errors: Vec<String>,
}

impl<'a> Sidecar<'a> {
    pub fn new(config: &'a CampaignConfig, errors: Vec<String>) -> Self {
        Self {
            software: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            seed: config.rng_seed,
            transmission_convention: TRANSMISSION_CONVENTION,
            config,
            errors,
        }
    }
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Io(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Columns: `rate_hz`, then one `kappa_tau_<ns>ns` column per assumed
/// deadtime. Rates past a curve's truncation point are left empty.
pub fn write_correction_sweep_csv<W: Write>(sweep: &CorrectionSweep, rates: &[f64], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["rate_hz".to_string()];
    header.extend(sweep.curves.iter().map(|c| format!("kappa_tau_{:.3}ns", c.assumed_tau * 1e9)));
    w.write_record(&header).map_err(csv_err)?;
    for (i, &r) in rates.iter().enumerate() {
        let mut row = vec![fmt_float(r)];
        row.extend(sweep.curves.iter().map(|c| c.kappa.get(i).map(|&k| fmt_float(k)).unwrap_or_default()));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rate_dependent_csv<W: Write>(sweep: &RateDependentSweep, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rate_hz", "kappa_matched", "kappa_constant"]).map_err(csv_err)?;
    for i in 0..sweep.rates.len() {
        w.write_record([
            fmt_float(sweep.rates[i]),
            fmt_float(sweep.matched[i]),
            fmt_float(sweep.constant[i]),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct OctetRow {
    r0: f64,
    ra: f64,
    rb: f64,
    rc: f64,
    rab: f64,
    rac: f64,
    rbc: f64,
    rabc: f64,
    acquisition_time_s: f64,
}

/// One octet per CSV row with columns
/// `r0,ra,rb,rc,rab,rac,rbc,rabc,acquisition_time_s`.
pub fn read_rate_octets<R: Read>(input: R) -> Result<Vec<(RateOctet, f64)>> {
    let mut out = Vec::new();
    for (i, row) in csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input)
        .deserialize::<OctetRow>()
        .enumerate()
    {
        let r = row.map_err(csv_err)?;
        let octet = RateOctet::from_array([r.r0, r.ra, r.rb, r.rc, r.rab, r.rac, r.rbc, r.rabc])
            .map_err(|e| Error::Domain(format!("row {}: {e}", i + 1)))?;
        out.push((octet, r.acquisition_time_s));
    }
    Ok(out)
}

pub fn write_rate_octets<W: Write>(octets: &[(RateOctet, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r0", "ra", "rb", "rc", "rab", "rac", "rbc", "rabc", "acquisition_time_s"])
        .map_err(csv_err)?;
    for (o, t) in octets {
        let mut row: Vec<String> = o.to_array().iter().map(|&x| fmt_float(x)).collect();
        row.push(fmt_float(*t));
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// CSV with columns `r_both,r_only1,r_only2,r_none` and an optional
/// `repetitions` column.
pub fn read_superposition<R: Read>(input: R) -> Result<Vec<SuperpositionMeasurement>> {
    let mut out = Vec::new();
    for row in csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input)
        .deserialize::<SuperpositionMeasurement>()
    {
        let m = row.map_err(csv_err)?;
        m.validate()?;
        out.push(m);
    }
    Ok(out)
}

pub fn write_superposition<W: Write>(rows: &[SuperpositionMeasurement], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r_both", "r_only1", "r_only2", "r_none"]).map_err(csv_err)?;
    for m in rows {
        w.write_record([m.r_both, m.r_only1, m.r_only2, m.r_none].map(fmt_float))
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// One number per line. Blank lines and lines starting with `#` are
/// skipped.
pub fn read_values<R: BufRead>(input: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::Parse(format!("line {}: '{t}' is not a number", i + 1)))?;
        out.push(v);
    }
    Ok(out)
}

pub fn write_values<W: Write>(values: &[f64], mut out: W) -> Result<()> {
    for v in values {
        writeln!(out, "{}", fmt_float(*v))?;
    }
    Ok(())
}

/// Reads a detection timestamp list, seconds, and checks it is sorted.
pub fn read_timestamps<R: BufRead>(input: R) -> Result<Vec<f64>> {
    let t = read_values(input)?;
    if let Some(i) = t.windows(2).position(|w| w[0] > w[1]) {
        return Err(Error::Unsorted(i + 1));
    }
    Ok(t)
}
