//! Sweeps over the decoherence strength, figure presets and the search for
//! sudden vanishing of squeezing or entanglement.

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{solve_strengths, ChannelKind, Knob};
use crate::error::{Error, Result};
use crate::initial_state::{CorrelationSet, SystemConfig};
use crate::metrics::{closed_form_moments, closed_form_report, SqueezingReport};
use crate::oracle::{post_selected_correlations, MAX_FAST_SPINS};

pub const CSV_HEADER: &str = "p,xi1_sq,xi2_sq,xi3_sq,zeta2_sq,zeta3_sq,concurrence,source";
pub const DEFAULT_STEP: f64 = 0.005;
const MAX_GRID_POINTS: usize = 10_000_000;

/// Serializes non-finite reals as the tokens `inf`, `-inf` and `nan`.
pub(crate) mod real {
    use serde::Serializer;

    pub fn token(x: f64) -> String {
        if x.is_nan() {
            "nan".to_string()
        } else {
            x.to_string()
        }
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&token(*x))
        }
    }

    pub fn serialize_map<S: Serializer>(
        map: &std::collections::BTreeMap<&'static str, f64>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(map.len()))?;
        for (k, v) in map {
            if v.is_finite() {
                m.serialize_entry(k, v)?;
            } else {
                m.serialize_entry(k, &token(*v))?;
            }
        }
        m.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PGrid {
    Range { start: f64, stop: f64, step: f64 },
    List(Vec<f64>),
}

fn check_in_unit(p: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidGrid(format!("{what} {p} outside [0, 1]")))
    }
}

impl PGrid {
    pub fn range(start: f64, stop: f64, step: f64) -> Result<Self> {
        check_in_unit(start, "start")?;
        check_in_unit(stop, "stop")?;
        if start > stop {
            return Err(Error::InvalidGrid(format!("start {start} exceeds stop {stop}")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
        }
        if (stop - start) / step > MAX_GRID_POINTS as f64 {
            return Err(Error::InvalidGrid(format!("more than {MAX_GRID_POINTS} points")));
        }
        Ok(PGrid::Range { start, stop, step })
    }

    pub fn list(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("empty point list".to_string()));
        }
        for &p in &points {
            check_in_unit(p, "point")?;
        }
        Ok(PGrid::List(points))
    }

    /// The full figure range `[0, 1]` with the default step.
    pub fn unit() -> Self {
        PGrid::Range { start: 0.0, stop: 1.0, step: DEFAULT_STEP }
    }

    pub fn points(&self) -> Vec<f64> {
        match self {
            PGrid::List(points) => points.clone(),
            PGrid::Range { start, stop, step } => {
                let count = ((stop - start) / step + 1e-9).floor() as usize;
                // Rounding keeps grid values free of accumulated binary noise.
                (0..=count)
                    .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                    .map(|p| p.min(*stop))
                    .collect()
            }
        }
    }
}

impl FromStr for PGrid {
    type Err = Error;

    /// `start:stop:step`, or a comma-separated list of points.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidGrid(format!("cannot parse `{s}`"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [start, stop, step] => PGrid::range(num(start)?, num(stop)?, num(step)?),
            [single] => PGrid::list(single.split(',').map(num).collect::<Result<_>>()?),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Closed,
    Oracle,
    Both,
}

impl Source {
    fn includes_oracle(self) -> bool {
        matches!(self, Source::Oracle | Source::Both)
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "closed" => Ok(Source::Closed),
            "oracle" => Ok(Source::Oracle),
            "both" => Ok(Source::Both),
            other => Err(format!("unknown source `{other}` (expected closed, oracle or both)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub kind: ChannelKind,
    pub theta: f64,
    pub n_spins: usize,
    pub knob: Knob,
    pub grid: PGrid,
    pub source: Source,
    pub format: Format,
    pub output: Option<PathBuf>,
}

impl SweepSpec {
    pub fn config(&self) -> Result<SystemConfig> {
        let cfg = SystemConfig::new(self.n_spins, self.theta)?;
        if self.source.includes_oracle() && self.n_spins > MAX_FAST_SPINS {
            return Err(Error::TooManySpins { path: "symmetric", max: MAX_FAST_SPINS, n: self.n_spins });
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowSource {
    Closed,
    Oracle,
    Error,
}

impl fmt::Display for RowSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowSource::Closed => "closed",
            RowSource::Oracle => "oracle",
            RowSource::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(serialize_with = "real::serialize")]
    pub p: f64,
    #[serde(serialize_with = "real::serialize")]
    pub xi1_sq: f64,
    #[serde(serialize_with = "real::serialize")]
    pub xi2_sq: f64,
    #[serde(serialize_with = "real::serialize")]
    pub xi3_sq: f64,
    #[serde(serialize_with = "real::serialize")]
    pub zeta2_sq: f64,
    #[serde(serialize_with = "real::serialize")]
    pub zeta3_sq: f64,
    #[serde(serialize_with = "real::serialize")]
    pub concurrence: f64,
    pub source: RowSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Moments behind the row. Closed-form rows carry `|u|` as a real `u`.
    #[serde(skip)]
    pub correlations: Option<CorrelationSet>,
    #[serde(skip)]
    pub report: Option<SqueezingReport>,
}

impl SweepRow {
    fn from_report(p: f64, source: RowSource, c: CorrelationSet, r: SqueezingReport) -> Self {
        Self {
            p,
            xi1_sq: r.xi1_sq,
            xi2_sq: r.xi2_sq,
            xi3_sq: r.xi3_sq,
            zeta2_sq: r.zeta2_sq,
            zeta3_sq: r.zeta3_sq,
            concurrence: r.concurrence,
            source,
            error: None,
            correlations: Some(c),
            report: Some(r),
        }
    }

    fn failed(p: f64, err: &Error) -> Self {
        let nan = f64::NAN;
        Self {
            p,
            xi1_sq: nan,
            xi2_sq: nan,
            xi3_sq: nan,
            zeta2_sq: nan,
            zeta3_sq: nan,
            concurrence: nan,
            source: RowSource::Error,
            error: Some(err.to_string()),
            correlations: None,
            report: None,
        }
    }

    /// Fields in CSV column order.
    pub fn csv_record(&self) -> [String; 8] {
        let t = real::token;
        [
            t(self.p),
            t(self.xi1_sq),
            t(self.xi2_sq),
            t(self.xi3_sq),
            t(self.zeta2_sq),
            t(self.zeta3_sq),
            t(self.concurrence),
            self.source.to_string(),
        ]
    }
}

fn closed_row(kind: ChannelKind, cfg: &SystemConfig, p: f64, knob: Knob) -> SweepRow {
    let run = || -> Result<SweepRow> {
        let mo = closed_form_moments(kind, cfg, p, knob)?;
        let report = closed_form_report(kind, cfg, p, knob)?;
        let c = CorrelationSet {
            sz: mo.sz,
            szz: mo.szz,
            y: mo.y,
            u: Complex64::new(mo.u_abs, 0.0),
            q: mo.q,
        };
        Ok(SweepRow::from_report(p, RowSource::Closed, c, report))
    };
    run().unwrap_or_else(|e| SweepRow::failed(p, &e))
}

fn oracle_row(kind: ChannelKind, cfg: &SystemConfig, p: f64, knob: Knob) -> SweepRow {
    let run = || -> Result<SweepRow> {
        let ch = solve_strengths(kind, p, knob)?;
        let c = post_selected_correlations(cfg, &ch)?;
        let report = SqueezingReport::from_correlations(&c, cfg.n_spins);
        Ok(SweepRow::from_report(p, RowSource::Oracle, c, report))
    };
    run().unwrap_or_else(|e| SweepRow::failed(p, &e))
}

/// One row per grid point (two with [`Source::Both`], closed form first), in
/// grid order. Strengths are re-solved at every `p`; a point where that fails
/// yields an error row and the sweep continues.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let cfg = spec.config()?;
    let points = spec.grid.points();
    let rows: Vec<Vec<SweepRow>> = points
        .par_iter()
        .map(|&p| match spec.source {
            Source::Closed => vec![closed_row(spec.kind, &cfg, p, spec.knob)],
            Source::Oracle => vec![oracle_row(spec.kind, &cfg, p, spec.knob)],
            Source::Both => vec![
                closed_row(spec.kind, &cfg, p, spec.knob),
                oracle_row(spec.kind, &cfg, p, spec.knob),
            ],
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        w.write_record(row.csv_record())?;
    }
    w.flush()
}

#[derive(Serialize)]
struct JsonMeta<'a> {
    spec: &'a SweepSpec,
    version: &'static str,
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    meta: JsonMeta<'a>,
    rows: &'a [SweepRow],
}

pub fn write_json<W: Write>(spec: &SweepSpec, rows: &[SweepRow], mut out: W) -> io::Result<()> {
    let doc = JsonDocument {
        meta: JsonMeta { spec, version: env!("CARGO_PKG_VERSION") },
        rows,
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)
}

/// Renders rows in the spec's format.
pub fn render(spec: &SweepSpec, rows: &[SweepRow]) -> Vec<u8> {
    let mut buf = Vec::new();
    let written = match spec.format {
        Format::Csv => write_csv(rows, &mut buf),
        Format::Json => write_json(spec, rows, &mut buf),
    };
    written.expect("writing to a Vec cannot fail");
    buf
}

pub const PRESET_IDS: [&str; 16] = [
    "fig1a", "fig1b", "fig1c", "fig1d", "fig2a", "fig2b", "fig2c", "fig2d", "fig3a", "fig3b",
    "fig3c", "fig3d", "fig4a", "fig4b", "fig4c", "fig4d",
];

/// Figure configurations. Variant `a` runs the bare channel with no weak
/// measurement or reversal.
pub fn figure_preset(id: &str) -> Result<SweepSpec> {
    let unknown = || Error::UnknownPreset(id.to_string());
    let key = id.trim().to_ascii_lowercase();
    let rest = key.strip_prefix("fig").ok_or_else(unknown)?;
    let mut chars = rest.chars();
    let (figure, variant) = match (chars.next(), chars.next(), chars.next()) {
        (Some(f), Some(v), None) => (f, v),
        _ => return Err(unknown()),
    };
    let variant_index = match variant {
        'a' => 0,
        'b' => 1,
        'c' => 2,
        'd' => 3,
        _ => return Err(unknown()),
    };
    let (kind, theta, strengths): (ChannelKind, f64, [Knob; 3]) = match figure {
        '1' => (ChannelKind::AmplitudeDamping, 0.1 * PI, [Knob::M(2.0), Knob::M(4.0), Knob::M(30.0)]),
        '2' => (ChannelKind::AmplitudeDamping, 1.8 * PI, [Knob::M(4.0), Knob::M(8.0), Knob::M(70.0)]),
        '3' => (ChannelKind::Depolarizing, 1.8 * PI, [Knob::N(2.0), Knob::N(10.0), Knob::N(500.0)]),
        '4' => (ChannelKind::PhaseDamping, 1.8 * PI, [Knob::M(1.0), Knob::M(0.5), Knob::M(0.01)]),
        _ => return Err(unknown()),
    };
    let knob = if variant_index == 0 { Knob::Bypass } else { strengths[variant_index - 1] };
    Ok(SweepSpec {
        kind,
        theta,
        n_spins: 12,
        knob,
        grid: PGrid::unit(),
        source: Source::Closed,
        format: Format::Csv,
        output: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SssdQuantity {
    Zeta2,
    Zeta3,
    Concurrence,
}

impl FromStr for SssdQuantity {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "zeta2" => Ok(SssdQuantity::Zeta2),
            "zeta3" => Ok(SssdQuantity::Zeta3),
            "concurrence" | "cr" => Ok(SssdQuantity::Concurrence),
            other => Err(format!("unknown quantity `{other}` (expected zeta2, zeta3 or concurrence)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SssdOutcome {
    /// Smallest `p` in `(0, 1)` where the quantity reaches 0.
    Vanishes { p_star: f64 },
    /// Positive on `[0, 1)`, zero only at `p = 1`.
    VanishesAtBoundary,
    NoVanishing,
}

impl fmt::Display for SssdOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SssdOutcome::Vanishes { p_star } => write!(f, "{p_star:.8}"),
            SssdOutcome::VanishesAtBoundary => f.write_str("none (vanishes only at p = 1)"),
            SssdOutcome::NoVanishing => f.write_str("none"),
        }
    }
}

/// Closed-form value of the clipped quantity at `p`.
pub fn sssd_value(
    kind: ChannelKind,
    cfg: &SystemConfig,
    knob: Knob,
    quantity: SssdQuantity,
    p: f64,
) -> Result<f64> {
    let r = closed_form_report(kind, cfg, p, knob)?;
    Ok(match quantity {
        SssdQuantity::Zeta2 => r.zeta2_sq,
        SssdQuantity::Zeta3 => r.zeta3_sq,
        SssdQuantity::Concurrence => r.concurrence,
    })
}

const SSSD_SCAN_POINTS: usize = 10_000;
const SSSD_TOL: f64 = 1e-8;

/// Scans `[0, 1]` for the first point where the quantity is 0 and refines
/// it by bisection to `1e-8`.
pub fn find_sssd(
    kind: ChannelKind,
    cfg: &SystemConfig,
    knob: Knob,
    quantity: SssdQuantity,
) -> Result<SssdOutcome> {
    let value = |p: f64| sssd_value(kind, cfg, knob, quantity, p);
    let initial = value(0.0)?;
    if !(initial > 0.0) {
        return Err(Error::NotSqueezedInitially(initial));
    }
    let mut lo = 0.0;
    let mut hi = None;
    for i in 1..=SSSD_SCAN_POINTS {
        let p = i as f64 / SSSD_SCAN_POINTS as f64;
        if value(p)? > 0.0 {
            lo = p;
        } else {
            hi = Some(p);
            break;
        }
    }
    let Some(mut hi) = hi else {
        return Ok(SssdOutcome::NoVanishing);
    };
    if hi == 1.0 && value(1.0 - SSSD_TOL)? > 0.0 {
        return Ok(SssdOutcome::VanishesAtBoundary);
    }
    while hi - lo > SSSD_TOL {
        let mid = 0.5 * (lo + hi);
        if value(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(SssdOutcome::Vanishes { p_star: hi })
}
