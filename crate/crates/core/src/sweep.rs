//! Parameter sweeps over SNR, α₁ or ζ, and their CSV form.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::capacity::{ec_closed_form_approx, ec_total_exact, legacy_ec};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::montecarlo::{simulate_bpsk_link, LinkEstimate, McConfig};
use crate::outage::{legacy_outage, legacy_zeta_upper_bound, outage_total};
use crate::scenario::{LegacyModel, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Snr,
    Alpha1,
    Zeta,
}

impl Axis {
    /// CSV header of the independent variable.
    pub fn column(self) -> &'static str {
        match self {
            Axis::Snr => "snr_db",
            Axis::Alpha1 => "alpha1",
            Axis::Zeta => "zeta",
        }
    }

    pub fn default_grid(self) -> Grid {
        match self {
            Axis::Snr => Grid::new(-10.0, 1.0, Some(40.0)),
            Axis::Alpha1 => Grid::new(0.55, 0.01, Some(0.95)),
            Axis::Zeta => Grid::new(0.0, 0.01, None),
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snr" | "snr_db" => Ok(Axis::Snr),
            "alpha1" => Ok(Axis::Alpha1),
            "zeta" => Ok(Axis::Zeta),
            _ => Err(Error::invalid("axis", format!("expected snr, alpha1 or zeta, got `{s}`"))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Snr => "snr",
            Axis::Alpha1 => "alpha1",
            Axis::Zeta => "zeta",
        })
    }
}

/// `start:step:stop`. A missing stop (`auto`) is filled in by the sweep,
/// which for ζ is the certain-outage bound `α₂/(α₁γ_th)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub step: f64,
    pub stop: Option<f64>,
}

impl Grid {
    pub fn new(start: f64, step: f64, stop: Option<f64>) -> Self {
        Grid { start, step, stop }
    }

    /// Points `start + k·step` up to `stop`; `stop` itself is appended when
    /// the step does not land on it.
    pub fn values(&self, auto_stop: Option<f64>) -> Result<Vec<f64>> {
        let stop = self
            .stop
            .or(auto_stop)
            .ok_or_else(|| Error::invalid("grid", "stop is `auto` but this axis has no automatic bound"))?;
        if !(self.step > 0.0) || !self.start.is_finite() || !stop.is_finite() {
            return Err(Error::invalid("grid", "step must be positive and bounds finite"));
        }
        if stop < self.start {
            return Err(Error::invalid("grid", format!("stop {stop} is below start {}", self.start)));
        }
        let slack = 1e-9 * self.step;
        let count = ((stop - self.start + slack) / self.step).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(Error::invalid("grid", "more than 10^6 points"));
        }
        let mut v: Vec<f64> = (0..count).map(|k| self.start + self.step * k as f64).collect();
        let last = *v.last().expect("count >= 1");
        if (stop - last).abs() <= slack {
            *v.last_mut().expect("count >= 1") = stop;
        } else {
            v.push(stop);
        }
        Ok(v)
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let bad = || Error::invalid("grid", format!("expected start:step:stop, got `{s}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let num = |p: &str| p.parse::<f64>().map_err(|_| bad());
        let stop = match parts[2] {
            "auto" | "" => None,
            p => Some(num(p)?),
        };
        Ok(Grid::new(num(parts[0])?, num(parts[1])?, stop))
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.stop {
            Some(stop) => write!(f, "{}:{}:{}", self.start, self.step, stop),
            None => write!(f, "{}:{}:auto", self.start, self.step),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub x: f64,
    pub values: Vec<f64>,
}

/// A sweep's rows under a fixed column set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub axis: Axis,
    pub columns: Vec<String>,
    pub rows: Vec<SweepRecord>,
}

impl SweepTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.values[k]).collect())
    }

    pub fn xs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.x).collect()
    }

    /// Header plus one row per record. Numbers use Rust's shortest
    /// round-trip formatting, so [`Self::read_csv`] restores them exactly.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![self.axis.column().to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.x.to_string()];
            rec.extend(r.values.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        let first = header.get(0).ok_or_else(|| Error::Parse("empty header".into()))?;
        let axis: Axis = first.parse().map_err(|_| Error::Parse(format!("unknown axis column `{first}`")))?;
        let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let nums = rec
                .iter()
                .map(|f| f.parse::<f64>().map_err(|_| Error::Parse(format!("not a number: `{f}`"))))
                .collect::<Result<Vec<f64>>>()?;
            if nums.len() != columns.len() + 1 {
                return Err(Error::Parse(format!("row has {} cells, expected {}", nums.len(), columns.len() + 1)));
            }
            rows.push(SweepRecord {
                x: nums[0],
                values: nums[1..].to_vec(),
            });
        }
        Ok(SweepTable { axis, columns, rows })
    }

    /// Fixed-width text rendering.
    pub fn to_text(&self) -> String {
        let mut s = format!("{:>12}", self.axis.column());
        for c in &self.columns {
            s.push_str(&format!(" {c:>14}"));
        }
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!("{:>12.6}", r.x));
            for v in &r.values {
                s.push_str(&format!(" {v:>14.6e}"));
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Outage,
    Capacity,
}

/// Everything a sweep needs: base scenario, legacy ζ, axis, grid and an
/// optional Monte Carlo column pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub metric: Metric,
    pub scenario: Scenario,
    pub zeta: f64,
    pub axis: Axis,
    pub grid: Grid,
    pub mc: Option<McConfig>,
    #[serde(skip)]
    pub execution: Execution,
}

impl SweepSpec {
    pub fn columns(&self) -> Vec<String> {
        let mut c: Vec<&str> = match self.metric {
            Metric::Outage => vec!["po_exact", "po_legacy"],
            Metric::Capacity => vec!["ec_exact", "ec_approx", "ec_legacy"],
        };
        if self.mc.is_some() {
            c.extend(["mc_mean", "mc_stderr"]);
        }
        c.into_iter().map(str::to_string).collect()
    }

    pub fn grid_values(&self) -> Result<Vec<f64>> {
        let auto = match self.axis {
            Axis::Zeta => Some(legacy_zeta_upper_bound(&self.scenario)),
            _ => None,
        };
        self.grid.values(auto)
    }

    fn point(&self, x: f64) -> Result<(Scenario, LegacyModel)> {
        Ok(match self.axis {
            Axis::Snr => (self.scenario.with_snr_db(x)?, LegacyModel::from_zeta(self.zeta)?),
            Axis::Alpha1 => (self.scenario.with_alpha1(x)?, LegacyModel::from_zeta(self.zeta)?),
            Axis::Zeta => (self.scenario, LegacyModel::from_zeta(x)?),
        })
    }
}

/// SplitMix64 finalizer; gives each grid point its own simulation seed.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn point_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64))
}

fn evaluate(spec: &SweepSpec, index: usize, x: f64) -> Result<SweepRecord> {
    let (s, legacy) = spec.point(x)?;
    let mut values = match spec.metric {
        Metric::Outage => vec![outage_total(&s), legacy_outage(&s, &legacy)],
        Metric::Capacity => vec![ec_total_exact(&s)?, ec_closed_form_approx(&s)?, legacy_ec(&s, &legacy)?],
    };
    if let Some(cfg) = spec.mc {
        let cfg = McConfig {
            seed: point_seed(cfg.seed, index),
            execution: Execution::Sequential,
            ..cfg
        };
        let LinkEstimate { outage, ec, .. } = simulate_bpsk_link(&s, &cfg)?;
        let est = match spec.metric {
            Metric::Outage => outage,
            Metric::Capacity => ec,
        };
        values.extend([est.mean, est.stderr]);
    }
    Ok(SweepRecord { x, values })
}

/// Evaluates every grid point; rows come back in grid order whatever the
/// execution mode.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    if let Some(cfg) = &spec.mc {
        cfg.validate()?;
    }
    let xs = spec.grid_values()?;
    let rows = spec
        .execution
        .try_map_collect(xs.len(), |k| evaluate(spec, k, xs[k]))?;
    Ok(SweepTable {
        axis: spec.axis,
        columns: spec.columns(),
        rows,
    })
}

/// One JSON-lines entry describing a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub chunk: Option<u64>,
    pub points: usize,
    pub wall_time_s: f64,
    pub spec: serde_json::Value,
}

impl RunManifest {
    pub fn new<T: Serialize>(command: &str, spec: &T, mc: Option<&McConfig>, points: usize, started: Instant) -> Result<Self> {
        Ok(RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: mc.map(|c| c.seed),
            samples: mc.map(|c| c.samples),
            chunk: mc.map(|c| c.chunk),
            points,
            wall_time_s: started.elapsed().as_secs_f64(),
            spec: serde_json::to_value(spec)?,
        })
    }

    pub fn append_to(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
        writeln!(f, "{}", serde_json::to_string(self)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing_and_values() {
        let g: Grid = "0:5:20".parse().unwrap();
        assert_eq!(g.values(None).unwrap(), vec![0.0, 5.0, 10.0, 15.0, 20.0]);
        let g: Grid = "0:0.4:1".parse().unwrap();
        assert_eq!(g.values(None).unwrap(), vec![0.0, 0.4, 0.8, 1.0]);
        let g: Grid = "0:0.1:auto".parse().unwrap();
        assert!(g.values(None).is_err());
        assert_eq!(*g.values(Some(0.35)).unwrap().last().unwrap(), 0.35);
        assert!("1:2".parse::<Grid>().is_err());
        assert!("0:-1:4".parse::<Grid>().unwrap().values(None).is_err());
        assert_eq!(g.to_string().parse::<Grid>().unwrap(), g);
    }

    #[test]
    fn zeta_axis_auto_stop() {
        let spec = SweepSpec {
            metric: Metric::Outage,
            scenario: Scenario::new(0.6, 10.0, 1.0, 0.5).unwrap(),
            zeta: 0.0,
            axis: Axis::Zeta,
            grid: Axis::Zeta.default_grid(),
            mc: None,
            execution: Execution::Sequential,
        };
        let t = run_sweep(&spec).unwrap();
        assert!((t.rows.last().unwrap().x - 1.6095).abs() < 1e-3);
        assert_eq!(*t.column("po_legacy").unwrap().last().unwrap(), 1.0);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let spec = SweepSpec {
            metric: Metric::Capacity,
            scenario: Scenario::new(0.8, 0.0, 1.0, 1.0).unwrap(),
            zeta: 0.01,
            axis: Axis::Snr,
            grid: "0:7:21".parse().unwrap(),
            mc: None,
            execution: Execution::Parallel,
        };
        let t = run_sweep(&spec).unwrap();
        let text = t.to_csv_string().unwrap();
        assert!(text.starts_with("snr_db,ec_exact,ec_approx,ec_legacy\n"));
        assert_eq!(SweepTable::read_csv(text.as_bytes()).unwrap(), t);
    }

    #[test]
    fn point_seeds_differ() {
        assert_ne!(point_seed(1, 0), point_seed(1, 1));
        assert_eq!(point_seed(9, 4), point_seed(9, 4));
    }
}
