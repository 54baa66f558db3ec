//! Path increments of the three families, delivered as segments.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::Result;
use crate::levy::LevyModel;
use crate::me::MeDist;

use super::stable::stable_increment;

/// A piece of path over `[t_start, t_end]`.
///
/// `high` and `low` are the extremes over the piece. When both lie beyond a
/// pair of barriers, `up_first` says which was reached first.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub t_start: f64,
    pub t_end: f64,
    pub start: f64,
    pub high: f64,
    pub low: f64,
    pub end: f64,
    pub up_first: bool,
}

#[derive(Clone, Debug)]
pub(crate) enum Driver {
    /// Grid walk with stable increments; extremes at grid points only.
    Stable { alpha: f64, step: f64 },
    /// Grid walk; Brownian-bridge extremes within each step.
    Diffusive {
        sigma: f64,
        drift: f64,
        step: f64,
        jumps: Option<(f64, MeDist<f64>)>,
    },
    /// Exact: linear rise at the premium rate between ME jumps.
    Events {
        premium: f64,
        intensity: f64,
        jumps: MeDist<f64>,
    },
}

fn bridge_extreme<G: Rng + ?Sized>(a: f64, b: f64, var: f64, rng: &mut G, up: bool) -> f64 {
    if var == 0.0 {
        return if up { a.max(b) } else { a.min(b) };
    }
    let u: f64 = 1.0 - rng.random::<f64>();
    let r = ((b - a).powi(2) - 2.0 * var * u.ln()).sqrt();
    if up {
        (a + b + r) / 2.0
    } else {
        (a + b - r) / 2.0
    }
}

impl Driver {
    pub(crate) fn new(model: &LevyModel<f64>, step: f64) -> Self {
        match model {
            LevyModel::Stable { alpha } => Driver::Stable {
                alpha: *alpha,
                step,
            },
            LevyModel::BrownianDrift { sigma, gamma } => Driver::Diffusive {
                sigma: *sigma,
                drift: *gamma,
                step,
                jumps: None,
            },
            LevyModel::CramerLundberg {
                premium,
                intensity,
                jumps,
                sigma,
            } if *sigma == 0.0 => Driver::Events {
                premium: *premium,
                intensity: *intensity,
                jumps: jumps.clone(),
            },
            LevyModel::CramerLundberg {
                premium,
                intensity,
                jumps,
                sigma,
            } => Driver::Diffusive {
                sigma: *sigma,
                drift: *premium,
                step,
                jumps: Some((*intensity, jumps.clone())),
            },
        }
    }

    /// Advances `(t, x)` by `duration`, calling `visit` on each segment until
    /// it returns `true`. Returns whether the walk was stopped.
    pub(crate) fn advance<G: Rng + ?Sized>(
        &self,
        t: &mut f64,
        x: &mut f64,
        duration: f64,
        rng: &mut G,
        visit: &mut dyn FnMut(&Segment) -> bool,
    ) -> Result<bool> {
        match self {
            Driver::Events {
                premium,
                intensity,
                jumps,
            } => {
                let mut left = duration;
                loop {
                    let wait = if *intensity > 0.0 {
                        rng.sample::<f64, _>(Exp1) / intensity
                    } else {
                        f64::INFINITY
                    };
                    let start = *x;
                    if wait >= left {
                        let end = start + premium * left;
                        let seg = Segment {
                            t_start: *t,
                            t_end: *t + left,
                            start,
                            high: end,
                            low: start,
                            end,
                            up_first: true,
                        };
                        *t += left;
                        *x = end;
                        return Ok(visit(&seg));
                    }
                    let peak = start + premium * wait;
                    let end = peak - jumps.sample(rng)?;
                    let seg = Segment {
                        t_start: *t,
                        t_end: *t + wait,
                        start,
                        high: peak,
                        low: start.min(end),
                        end,
                        up_first: true,
                    };
                    *t += wait;
                    *x = end;
                    left -= wait;
                    if visit(&seg) {
                        return Ok(true);
                    }
                }
            }
            Driver::Stable { step, .. } | Driver::Diffusive { step, .. } => {
                let full = (duration / step).floor();
                let rest = duration - full * step;
                let n = full as u64;
                for k in 0..=n {
                    let dt = if k < n { *step } else { rest };
                    if dt <= 0.0 {
                        break;
                    }
                    let seg = self.grid_step(*t, *x, dt, rng)?;
                    *t = seg.t_end;
                    *x = seg.end;
                    if visit(&seg) {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    fn grid_step<G: Rng + ?Sized>(&self, t: f64, x: f64, dt: f64, rng: &mut G) -> Result<Segment> {
        match self {
            Driver::Stable { alpha, .. } => {
                let end = x + stable_increment(*alpha, dt, rng);
                Ok(Segment {
                    t_start: t,
                    t_end: t + dt,
                    start: x,
                    high: x.max(end),
                    low: x.min(end),
                    end,
                    up_first: end > x,
                })
            }
            Driver::Diffusive {
                sigma,
                drift,
                jumps,
                ..
            } => {
                let z: f64 = rng.sample(StandardNormal);
                let cont = x + drift * dt + sigma * dt.sqrt() * z;
                let var = sigma * sigma * dt;
                let high = bridge_extreme(x, cont, var, rng, true);
                let low = bridge_extreme(x, cont, var, rng, false);
                let mut end = cont;
                if let Some((rate, law)) = jumps {
                    let mut clock = rng.sample::<f64, _>(Exp1) / rate;
                    while clock < dt {
                        end -= law.sample(rng)?;
                        clock += rng.sample::<f64, _>(Exp1) / rate;
                    }
                }
                Ok(Segment {
                    t_start: t,
                    t_end: t + dt,
                    start: x,
                    high,
                    low: low.min(end),
                    end,
                    up_first: rng.random::<bool>(),
                })
            }
            Driver::Events { .. } => unreachable!("event-driven family has no grid"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_covers_duration_exactly() {
        let d = Driver::new(&LevyModel::stable(1.5).unwrap(), 0.001);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (mut t, mut x) = (0.0, 0.0);
        let mut count = 0;
        d.advance(&mut t, &mut x, 0.0125, &mut rng, &mut |_| {
            count += 1;
            false
        })
        .unwrap();
        assert_eq!(count, 13);
        assert!((t - 0.0125).abs() < 1e-15);
    }

    #[test]
    fn events_rise_linearly_between_jumps() {
        let model =
            LevyModel::cramer_lundberg(2.0, 1.0, MeDist::exponential(1.0).unwrap(), 0.0).unwrap();
        let d = Driver::new(&model, 0.001);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (mut t, mut x) = (0.0, 0.0);
        d.advance(&mut t, &mut x, 5.0, &mut rng, &mut |s| {
            assert!((s.high - s.start - 2.0 * (s.t_end - s.t_start)).abs() < 1e-12);
            assert!(s.end <= s.high && s.low <= s.start);
            false
        })
        .unwrap();
        assert!((t - 5.0).abs() < 1e-12);
    }

    #[test]
    fn bridge_extremes_bracket_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let a = rng.random::<f64>();
            let b = rng.random::<f64>();
            assert!(bridge_extreme(a, b, 0.01, &mut rng, true) >= a.max(b));
            assert!(bridge_extreme(a, b, 0.01, &mut rng, false) <= a.min(b));
        }
    }
}
