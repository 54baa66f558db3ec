//! Simulation with an explicit phase process for phase-type horizons.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::me::MeDist;

use super::{Estimate, Simulator};

/// Fewest level-passage events accepted for a generator estimate.
pub const MIN_PASSAGES: usize = 50;

struct PhChain {
    alpha: Vec<f64>,
    rate: Vec<f64>,
    /// Row `i`: probabilities of moving to each phase, then of exiting.
    next: Vec<Vec<f64>>,
}

impl PhChain {
    fn new(h: &MeDist<f64>) -> Result<Self> {
        if !h.is_phase_type() {
            return Err(Error::NotPhaseType(
                "phase tracking needs a probability vector and a sub-intensity matrix".into(),
            ));
        }
        let p = h.dim();
        let g = h.generator();
        let mut rate = Vec::with_capacity(p);
        let mut next = Vec::with_capacity(p);
        for i in 0..p {
            let r = -g.re(i, i);
            let mut row: Vec<f64> = (0..p)
                .map(|j| if i == j { 0.0 } else { g.re(i, j).max(0.0) / r })
                .collect();
            row.push(h.exit()[i].max(0.0) / r);
            rate.push(r);
            next.push(row);
        }
        Ok(Self {
            alpha: h.alpha().to_vec(),
            rate,
            next,
        })
    }

    fn pick<G: Rng + ?Sized>(weights: &[f64], rng: &mut G) -> usize {
        let total: f64 = weights.iter().sum();
        let mut u = rng.random::<f64>() * total;
        for (k, w) in weights.iter().enumerate() {
            if u < *w {
                return k;
            }
            u -= w;
        }
        weights.len() - 1
    }

    /// Initial phase, or `None` for the atom at zero.
    fn start<G: Rng + ?Sized>(&self, rng: &mut G) -> Option<usize> {
        let mass: f64 = self.alpha.iter().sum();
        if rng.random::<f64>() >= mass {
            return None;
        }
        Some(Self::pick(&self.alpha, rng))
    }

    fn hold<G: Rng + ?Sized>(&self, i: usize, rng: &mut G) -> f64 {
        rng.sample::<f64, _>(Exp1) / self.rate[i]
    }

    /// Next phase, or `None` on absorption.
    fn step<G: Rng + ?Sized>(&self, i: usize, rng: &mut G) -> Option<usize> {
        let k = Self::pick(&self.next[i], rng);
        (k < self.rate.len()).then_some(k)
    }
}

/// Empirical generator of the phase seen at first passage over each level.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseEstimate {
    pub generator: Vec<Vec<f64>>,
    pub se: Vec<Vec<f64>>,
    /// Total level length passed in each phase.
    pub occupation: Vec<f64>,
    pub passages: usize,
}

#[derive(Clone, Debug)]
struct Counts {
    moves: Vec<Vec<f64>>,
    kills: Vec<f64>,
    occupation: Vec<f64>,
}

impl Counts {
    fn zeros(p: usize) -> Self {
        Self {
            moves: vec![vec![0.0; p]; p],
            kills: vec![0.0; p],
            occupation: vec![0.0; p],
        }
    }

    fn merge(mut self, o: Self) -> Self {
        for (a, b) in self.moves.iter_mut().zip(o.moves) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (x, y) in self.kills.iter_mut().zip(o.kills) {
            *x += y;
        }
        for (x, y) in self.occupation.iter_mut().zip(o.occupation) {
            *x += y;
        }
        self
    }
}

impl Simulator {
    /// Estimates the generator `−Φ(−T)` of the phase at first passage over
    /// level `x`, as a Markov chain in `x` killed at the horizon.
    ///
    /// Off-diagonal rates are transition counts over level occupation, so
    /// they are nonnegative; standard errors are Poisson.
    pub fn phase_tracked(&self, horizon: &MeDist<f64>) -> Result<PhaseEstimate> {
        let chain = PhChain::new(horizon)?;
        let p = horizon.dim();
        let counts = (0..self.config.paths)
            .into_par_iter()
            .map(|i| self.phase_path(i, &chain))
            .collect::<Result<Vec<_>>>()?;
        let capped = counts.iter().filter(|c| c.1).count();
        self.check_capped(capped)?;
        let total = counts
            .into_iter()
            .map(|c| c.0)
            .fold(Counts::zeros(p), Counts::merge);
        let passages = total.moves.iter().flatten().sum::<f64>() + total.kills.iter().sum::<f64>();
        if passages < MIN_PASSAGES as f64 || total.occupation.iter().any(|l| *l <= 0.0) {
            return Err(Error::InsufficientPassages(passages as usize));
        }
        let mut generator = vec![vec![0.0; p]; p];
        let mut se = vec![vec![0.0; p]; p];
        for i in 0..p {
            let l = total.occupation[i];
            let mut out = total.kills[i];
            for j in 0..p {
                if i != j {
                    let n = total.moves[i][j];
                    generator[i][j] = n / l;
                    se[i][j] = n.sqrt() / l;
                    out += n;
                }
            }
            generator[i][i] = -out / l;
            se[i][i] = out.sqrt() / l;
        }
        Ok(PhaseEstimate {
            generator,
            se,
            occupation: total.occupation,
            passages: passages as usize,
        })
    }

    fn phase_path(&self, i: usize, chain: &PhChain) -> Result<(Counts, bool)> {
        let p = chain.rate.len();
        let mut c = Counts::zeros(p);
        let mut rng = self.config.rng(i);
        let Some(mut phase) = chain.start(&mut rng) else {
            return Ok((c, false));
        };
        let (mut t, mut x, mut sup) = (0.0, 0.0, 0.0);
        let mut seen = phase;
        loop {
            let d = chain.hold(phase, &mut rng);
            let left = self.config.horizon_cap - t;
            let capped = d >= left;
            self.driver.advance(&mut t, &mut x, d.min(left), &mut rng, &mut |s| {
                if s.high > sup {
                    if phase != seen {
                        c.moves[seen][phase] += 1.0;
                        seen = phase;
                    }
                    c.occupation[phase] += s.high - sup;
                    sup = s.high;
                }
                false
            })?;
            if capped {
                return Ok((c, true));
            }
            match chain.step(phase, &mut rng) {
                Some(j) => phase = j,
                None => {
                    c.kills[seen] += 1.0;
                    return Ok((c, false));
                }
            }
        }
    }

    /// `P(τ_x⁺ < τ̂₀)`, where the process is only checked for ruin at the
    /// epochs of a renewal process with phase-type gaps.
    pub fn observation_ruin(&self, gaps: &MeDist<f64>, x: f64) -> Result<Estimate> {
        let chain = PhChain::new(gaps)?;
        let outcomes = (0..self.config.paths)
            .into_par_iter()
            .map(|i| self.ruin_path(i, &chain, x))
            .collect::<Result<Vec<_>>>()?;
        let capped = outcomes.iter().filter(|o| o.is_none()).count();
        self.check_capped(capped)?;
        let xs: Vec<f64> = outcomes.into_iter().map(|o| o.unwrap_or(0.0)).collect();
        Ok(Estimate::from_samples(&xs))
    }

    fn ruin_path(&self, i: usize, chain: &PhChain, level: f64) -> Result<Option<f64>> {
        let mut rng = self.config.rng(i);
        let (mut t, mut x) = (0.0, 0.0);
        let mut phase = chain.start(&mut rng);
        loop {
            let Some(ph) = phase else {
                // an observation epoch
                if x < 0.0 {
                    return Ok(Some(0.0));
                }
                phase = chain.start(&mut rng);
                if phase.is_none() {
                    return Err(Error::InvalidParameter(
                        "observation gaps need no atom at zero".into(),
                    ));
                }
                continue;
            };
            let d = chain.hold(ph, &mut rng);
            let left = self.config.horizon_cap - t;
            let passed = self.driver.advance(&mut t, &mut x, d.min(left), &mut rng, &mut |s| {
                s.high > level
            })?;
            if passed {
                return Ok(Some(1.0));
            }
            if d >= left {
                return Ok(None);
            }
            phase = chain.step(ph, &mut rng);
        }
    }
}
