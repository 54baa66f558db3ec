//! Monte Carlo validation: simulated paths killed at a matrix-exponential
//! horizon, with estimators and standard errors for each identity.
//!
//! Stable and Brownian paths are walked on a time grid (Brownian steps use
//! bridge extremes). Compound-Poisson paths without a Gaussian part are
//! simulated exactly at their jump epochs. Path `i` draws from a ChaCha
//! stream keyed on `(seed, i)`, so results do not depend on thread count.

mod driver;
mod phase;
mod stable;

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::levy::LevyModel;
use crate::me::MeDist;

pub use driver::Segment;
pub use phase::PhaseEstimate;
pub use stable::{stable_increment, stable_scale, stable_unit};

use driver::Driver;

/// Largest fraction of paths allowed to reach the horizon cap.
pub const CAP_FRACTION: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    /// Grid step in time units.
    pub step: f64,
    pub paths: usize,
    pub seed: u64,
    /// Paths are stopped at this time and reported as capped.
    pub horizon_cap: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            paths: 3000,
            seed: 0x5eed,
            horizon_cap: 50.0,
        }
    }
}

impl SimConfig {
    fn check(&self) -> Result<()> {
        if !(self.step > 0.0) || self.paths == 0 || !(self.horizon_cap > 0.0) {
            return Err(Error::InvalidParameter(
                "simulation needs step > 0, paths ≥ 1 and a positive horizon cap".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn rng(&self, path: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(path as u64);
        rng
    }
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let value = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - value).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            value,
            se: (var / n as f64).sqrt(),
            n,
        }
    }

    /// `|value − target| ≤ k·se`, with a rounding floor for degenerate
    /// samples.
    pub fn agrees(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.se + 1e-12
    }
}

/// Two-sided exit from `(lower, upper)` for a path started at 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Barrier {
    pub upper: f64,
    pub lower: f64,
}

/// Process reflected at its infimum, started at `start`, watched until it
/// exceeds `level`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reflection {
    pub start: f64,
    pub level: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BarrierSpec {
    pub exits: Vec<Barrier>,
    pub reflections: Vec<Reflection>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exit {
    /// Crossed `upper` first.
    Up,
    /// Went below `lower` first, landing at the given position.
    Down(f64),
    /// Neither before the horizon.
    Neither,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathSummary {
    pub horizon: f64,
    pub terminal: f64,
    pub sup: f64,
    pub inf: f64,
    pub capped: bool,
    pub exits: Vec<Exit>,
    /// Regulator at the passage of each reflected process, if it happened.
    pub reflected: Vec<Option<f64>>,
}

#[derive(Clone, Debug)]
pub struct Simulation {
    paths: Vec<PathSummary>,
    capped: usize,
}

impl Simulation {
    pub fn paths(&self) -> &[PathSummary] {
        &self.paths
    }

    pub fn capped(&self) -> usize {
        self.capped
    }

    pub fn estimate(&self, f: impl Fn(&PathSummary) -> f64) -> Estimate {
        let xs: Vec<f64> = self.paths.iter().map(f).collect();
        Estimate::from_samples(&xs)
    }
}

struct Watch<'a> {
    spec: &'a BarrierSpec,
    sup: f64,
    inf: f64,
    exits: Vec<Exit>,
    regulator: Vec<f64>,
    reflected: Vec<Option<f64>>,
}

impl<'a> Watch<'a> {
    fn new(spec: &'a BarrierSpec) -> Self {
        Self {
            spec,
            sup: 0.0,
            inf: 0.0,
            exits: vec![Exit::Neither; spec.exits.len()],
            regulator: vec![0.0; spec.reflections.len()],
            reflected: vec![None; spec.reflections.len()],
        }
    }

    fn see(&mut self, s: &Segment) {
        self.sup = self.sup.max(s.high);
        self.inf = self.inf.min(s.low);
        for (b, e) in self.spec.exits.iter().zip(self.exits.iter_mut()) {
            if *e != Exit::Neither {
                continue;
            }
            let up = s.high > b.upper;
            let down = s.low < b.lower;
            *e = match (up, down) {
                (true, false) => Exit::Up,
                (false, true) => Exit::Down(s.low.min(s.end)),
                (true, true) if s.up_first => Exit::Up,
                (true, true) => Exit::Down(s.low),
                (false, false) => Exit::Neither,
            };
        }
        for (k, r) in self.spec.reflections.iter().enumerate() {
            if self.reflected[k].is_some() {
                continue;
            }
            let before = self.regulator[k];
            let after = before.max(-(r.start + s.low));
            let crossed = if s.up_first {
                r.start + s.high + before > r.level
            } else {
                r.start + s.high + before > r.level || r.start + s.end + after > r.level
            };
            self.regulator[k] = after;
            if crossed {
                self.reflected[k] = Some(if s.up_first { before } else { after });
            }
        }
    }
}

/// Simulator for one Lévy model.
#[derive(Clone, Debug)]
pub struct Simulator {
    model: LevyModel<f64>,
    config: SimConfig,
    driver: Driver,
}

impl Simulator {
    pub fn new(model: LevyModel<f64>, config: SimConfig) -> Result<Self> {
        config.check()?;
        let driver = Driver::new(&model, config.step);
        Ok(Self {
            model,
            config,
            driver,
        })
    }

    pub fn model(&self) -> &LevyModel<f64> {
        &self.model
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    fn check_capped(&self, capped: usize) -> Result<()> {
        if capped as f64 > CAP_FRACTION * self.config.paths as f64 {
            return Err(Error::HorizonCapExceeded {
                capped,
                total: self.config.paths,
            });
        }
        Ok(())
    }

    /// Simulates `config.paths` paths up to an independent draw of `horizon`.
    pub fn simulate_paths(&self, horizon: &MeDist<f64>, spec: &BarrierSpec) -> Result<Simulation> {
        let paths = (0..self.config.paths)
            .into_par_iter()
            .map(|i| self.one_path(i, horizon, spec))
            .collect::<Result<Vec<_>>>()?;
        let capped = paths.iter().filter(|p| p.capped).count();
        self.check_capped(capped)?;
        Ok(Simulation { paths, capped })
    }

    fn one_path(&self, i: usize, horizon: &MeDist<f64>, spec: &BarrierSpec) -> Result<PathSummary> {
        let mut rng = self.config.rng(i);
        let h = horizon.sample(&mut rng)?;
        let capped = h > self.config.horizon_cap;
        let end = h.min(self.config.horizon_cap);
        let mut watch = Watch::new(spec);
        let (mut t, mut x) = (0.0, 0.0);
        self.driver.advance(&mut t, &mut x, end, &mut rng, &mut |s| {
            watch.see(s);
            false
        })?;
        Ok(PathSummary {
            horizon: h,
            terminal: x,
            sup: watch.sup,
            inf: watch.inf,
            capped,
            exits: watch.exits,
            reflected: watch.reflected,
        })
    }

    /// Writes `path_id,time,value` rows for the first `count` paths.
    pub fn dump_paths(&self, horizon: &MeDist<f64>, count: usize, out: impl Write) -> Result<()> {
        let io = |e: csv::Error| Error::Io(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["path_id", "time", "value"]).map_err(io)?;
        for i in 0..count {
            let mut rng = self.config.rng(i);
            let end = horizon.sample(&mut rng)?.min(self.config.horizon_cap);
            let mut rows = vec![(0.0, 0.0)];
            let (mut t, mut x) = (0.0, 0.0);
            self.driver.advance(&mut t, &mut x, end, &mut rng, &mut |s| {
                if s.high > s.end && s.up_first && s.high > s.start {
                    rows.push((s.t_end, s.high));
                }
                rows.push((s.t_end, s.end));
                false
            })?;
            for (t, v) in rows {
                w.write_record([i.to_string(), format!("{t:.17e}"), format!("{v:.17e}")])
                    .map_err(io)?;
            }
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}
