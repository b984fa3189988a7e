use std::collections::BTreeMap;
use std::str::FromStr;

use super::config::{Method, ScenarioConfig};
use super::trial::{run_with, PsoSummary, Scenario, TrialFlag, TrialSeeds};
use crate::channel::UpaSize;
use crate::seed::mix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVar {
    /// Tx–RIS distance, m.
    D1,
    /// Tx–Rx distance, m.
    DTr,
    /// Transmit power, dBm.
    Pt,
    /// Number of RIS elements.
    Mi,
}

impl SweepVar {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVar::D1 => "d1",
            SweepVar::DTr => "dTR",
            SweepVar::Pt => "PT",
            SweepVar::Mi => "MI",
        }
    }

    /// `cfg` with this variable set to `value`.
    pub fn apply(&self, cfg: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut out = cfg.clone();
        match self {
            SweepVar::D1 => {
                let g = &mut out.geometry;
                if g.d2.is_none() {
                    g.ris_x = None;
                    g.d2_over_d1 = None;
                }
                g.d1 = Some(value);
            }
            SweepVar::DTr => out.geometry.d_tr = value,
            SweepVar::Pt => out.power.tx_power_dbm = value,
            SweepVar::Mi => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::Config(format!("M_I = {value} must be a positive integer")));
                }
                out.arrays.ris = UpaSize::near_square(value as usize)?;
            }
        }
        out.validate()?;
        Ok(out)
    }
}

impl std::fmt::Display for SweepVar {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "d1" => Ok(SweepVar::D1),
            "dtr" | "d_tr" => Ok(SweepVar::DTr),
            "pt" | "p_t" => Ok(SweepVar::Pt),
            "mi" | "m_i" => Ok(SweepVar::Mi),
            other => Err(Error::Config(format!(
                "unknown sweep variable `{other}` (expected d1, dTR, PT, MI)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVar,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn new(variable: SweepVar, values: Vec<f64>) -> Result<Self> {
        let spec = Self { variable, values };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep needs at least one value".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep values must be finite".into()));
        }
        let up = self.values.windows(2).all(|w| w[0] < w[1]);
        let down = self.values.windows(2).all(|w| w[0] > w[1]);
        if !(up || down) {
            return Err(Error::Config("sweep values must be strictly ordered".into()));
        }
        Ok(())
    }
}

impl FromStr for SweepSpec {
    type Err = Error;

    /// `var=v1,v2,...`
    fn from_str(s: &str) -> Result<Self> {
        let (var, list) = s
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("sweep `{s}` is not of the form var=v1,v2,...")))?;
        let values = list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad sweep value `{}`", v.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(var.parse()?, values)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_var: SweepVar,
    pub sweep_value: f64,
    pub method: Method,
    pub trial: usize,
    pub seed: u64,
    pub rate: f64,
    pub flags: Vec<TrialFlag>,
    pub pso: Option<PsoSummary>,
}

impl ResultRow {
    pub fn flag_label(&self) -> String {
        if self.flags.is_empty() {
            "ok".to_string()
        } else {
            self.flags.iter().map(TrialFlag::as_str).collect::<Vec<_>>().join("|")
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub sweep_value: f64,
    pub method: Method,
    pub trials: usize,
    pub mean: f64,
    /// Sample standard deviation (zero for a single trial).
    pub std: f64,
    pub flagged: usize,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<Aggregate>,
}

impl SweepOutput {
    pub fn mean(&self, sweep_value: f64, method: Method) -> Option<f64> {
        self.aggregates
            .iter()
            .find(|a| a.sweep_value == sweep_value && a.method == method)
            .map(|a| a.mean)
    }
}

/// Seed recorded for one `(sweep point, method, trial)` cell.
pub fn cell_seed(master: u64, sweep_index: usize, method: Method, trial: usize) -> u64 {
    mix(master, &[sweep_index as u64, method.id(), trial as u64])
}

/// Channel seed of a trial; shared by every method and sweep point so that
/// comparisons are paired.
pub fn channel_seed(master: u64, trial: usize) -> u64 {
    mix(master, &[u64::from_le_bytes(*b"channel\0"), trial as u64])
}

struct Job {
    sweep_index: usize,
    method: Method,
    trial: usize,
}

/// Runs every `(value, method, trial)` cell; rows come back ordered by
/// value, then method (config order), then trial, whatever `workers` is.
pub fn run_sweep(cfg: &ScenarioConfig, sweep: &SweepSpec, workers: usize) -> Result<SweepOutput> {
    sweep.validate()?;
    cfg.validate()?;
    let mut points = Vec::with_capacity(sweep.values.len());
    for &v in &sweep.values {
        let c = sweep.variable.apply(cfg, v)?;
        let s = Scenario::new(&c)?;
        points.push((c, s));
    }

    let mut jobs = Vec::new();
    for sweep_index in 0..points.len() {
        for &method in &cfg.run.methods {
            for trial in 0..cfg.run.trials {
                jobs.push(Job {
                    sweep_index,
                    method,
                    trial,
                });
            }
        }
    }

    let master = cfg.run.master_seed;
    let run = |job: &Job| -> Result<ResultRow> {
        let (pcfg, scenario) = &points[job.sweep_index];
        let seed = cell_seed(master, job.sweep_index, job.method, job.trial);
        let seeds = TrialSeeds {
            channel: channel_seed(master, job.trial),
            method: seed,
        };
        let chan = scenario.draw_channel(seeds.channel)?;
        let res = run_with(pcfg, scenario, job.method, &chan, seeds.method)?;
        Ok(ResultRow {
            sweep_var: sweep.variable,
            sweep_value: sweep.values[job.sweep_index],
            method: job.method,
            trial: job.trial,
            seed,
            rate: res.rate,
            flags: res.flags,
            pso: res.pso,
        })
    };

    let rows = execute(&jobs, workers, run)?;
    let aggregates = aggregate(&rows);
    Ok(SweepOutput { rows, aggregates })
}

#[cfg(feature = "parallel")]
fn execute<F>(jobs: &[Job], workers: usize, run: F) -> Result<Vec<ResultRow>>
where
    F: Fn(&Job) -> Result<ResultRow> + Sync,
{
    use rayon::prelude::*;
    if workers <= 1 {
        return jobs.iter().map(run).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| jobs.par_iter().map(&run).collect())
}

#[cfg(not(feature = "parallel"))]
fn execute<F>(jobs: &[Job], _workers: usize, run: F) -> Result<Vec<ResultRow>>
where
    F: Fn(&Job) -> Result<ResultRow>,
{
    jobs.iter().map(run).collect()
}

/// Mean and sample standard deviation per `(value, method)`, in first-seen order.
pub fn aggregate(rows: &[ResultRow]) -> Vec<Aggregate> {
    let mut order: Vec<(u64, Method)> = Vec::new();
    let mut groups: BTreeMap<(u64, Method), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        let key = (r.sweep_value.to_bits(), r.method);
        groups
            .entry(key)
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let mut g = groups[&key].clone();
            g.sort_by_key(|r| r.trial);
            let n = g.len();
            let mean = g.iter().map(|r| r.rate).sum::<f64>() / n as f64;
            let var = if n > 1 {
                g.iter().map(|r| (r.rate - mean).powi(2)).sum::<f64>() / (n - 1) as f64
            } else {
                0.0
            };
            Aggregate {
                sweep_value: f64::from_bits(key.0),
                method: key.1,
                trials: n,
                mean,
                std: var.sqrt(),
                flagged: g.iter().filter(|r| r.flags.contains(&TrialFlag::RankDeficient)).count(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.arrays.ris = UpaSize { nx: 2, ny: 2 };
        cfg.pso.particles = 6;
        cfg.pso.iterations = 5;
        cfg.run.trials = 3;
        cfg
    }

    #[test]
    fn parse_sweeps() {
        let s: SweepSpec = "d1=20,60,100".parse().unwrap();
        assert_eq!(s.variable, SweepVar::D1);
        assert_eq!(s.values, vec![20.0, 60.0, 100.0]);
        assert_eq!("PT=40,30".parse::<SweepSpec>().unwrap().variable, SweepVar::Pt);
        assert!("d1=20,20".parse::<SweepSpec>().is_err());
        assert!("d1=20,10,30".parse::<SweepSpec>().is_err());
        assert!("d1=".parse::<SweepSpec>().is_err());
        assert!("x=1".parse::<SweepSpec>().is_err());
        assert!("d1 20".parse::<SweepSpec>().is_err());
    }

    #[test]
    fn apply_sweep_values() {
        let cfg = ScenarioConfig::default();
        let c = SweepVar::Mi.apply(&cfg, 144.0).unwrap();
        assert_eq!(c.arrays.ris, UpaSize { nx: 12, ny: 12 });
        assert!(SweepVar::Mi.apply(&cfg, 12.5).is_err());
        let c = SweepVar::Pt.apply(&cfg, 40.0).unwrap();
        assert_eq!(c.power.tx_power_dbm, 40.0);
        let c = SweepVar::D1.apply(&cfg, 60.0).unwrap();
        assert!((c.geometry.distances().unwrap().1 - 60.0).abs() < 1e-12);
        assert!(SweepVar::D1.apply(&cfg, 1.0).is_err());
    }

    #[test]
    fn single_cell() {
        let mut cfg = tiny();
        cfg.run.trials = 1;
        cfg.run.methods = vec![Method::Random];
        let out = run_sweep(&cfg, &"d1=30".parse().unwrap(), 1).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert_eq!(out.aggregates.len(), 1);
        assert_eq!(out.aggregates[0].std, 0.0);
    }

    #[test]
    fn rows_ordered_and_worker_independent() {
        let cfg = tiny();
        let sweep: SweepSpec = "PT=0,10".parse().unwrap();
        let a = run_sweep(&cfg, &sweep, 1).unwrap();
        let b = run_sweep(&cfg, &sweep, 3).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.rows.len(), 2 * 4 * 3);
        let keys: Vec<(usize, usize, usize)> = a
            .rows
            .iter()
            .map(|r| {
                let si = sweep.values.iter().position(|v| *v == r.sweep_value).unwrap();
                let mi = cfg.run.methods.iter().position(|m| *m == r.method).unwrap();
                (si, mi, r.trial)
            })
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }

    #[test]
    fn adding_a_method_leaves_others_untouched() {
        let mut cfg = tiny();
        cfg.run.methods = vec![Method::Random];
        let sweep: SweepSpec = "d1=20,40".parse().unwrap();
        let alone = run_sweep(&cfg, &sweep, 1).unwrap();
        cfg.run.methods = vec![Method::Pso, Method::Random];
        let both = run_sweep(&cfg, &sweep, 1).unwrap();
        let random: Vec<&ResultRow> = both.rows.iter().filter(|r| r.method == Method::Random).collect();
        assert_eq!(random.len(), alone.rows.len());
        for (x, y) in alone.rows.iter().zip(random) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn aggregates_ignore_row_order() {
        let cfg = tiny();
        let out = run_sweep(&cfg, &"d1=20".parse().unwrap(), 1).unwrap();
        let mut shuffled = out.rows.clone();
        shuffled.reverse();
        let mut a = aggregate(&out.rows);
        let mut b = aggregate(&shuffled);
        a.sort_by_key(|x| x.method);
        b.sort_by_key(|x| x.method);
        assert_eq!(a, b);
    }
}
