//! Single-path simulators.
//!
//! Cost is reported as "updates": one per reaction event for exact paths and
//! one per (step, reaction channel) Poisson draw for tau-leap paths.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid_argument, Error, Result};
use crate::model::{ReactionNetwork, State};
use crate::stochastics::RandomStream;

/// Exact simulation algorithm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ExactMethod {
    /// Modified next reaction method (internal clocks per channel).
    #[default]
    NextReaction,
    /// Gillespie's direct method.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub exact_method: ExactMethod,
    /// Abort a path once it needs more than this many updates.
    pub max_updates: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            exact_method: ExactMethod::NextReaction,
            max_updates: 1_000_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathResult {
    pub final_state: State,
    pub updates: u64,
    pub rng_draws: u64,
}

/// Time grid `0 = t_0 < t_1 < ... < t_n = T` with spacing `h` and a shorter
/// final step when `h` does not divide `T`. Ratios within 1e-9 of an integer
/// count as exact division, so `T * M^-l` grids never get a sliver step from
/// rounding.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Grid {
    pub steps: u64,
    h: f64,
    horizon: f64,
}

impl Grid {
    pub fn new(horizon: f64, h: f64) -> Self {
        if horizon <= 0.0 {
            return Grid {
                steps: 0,
                h,
                horizon,
            };
        }
        let r = horizon / h;
        let nearest = libm::round(r);
        let steps = if nearest >= 1.0 && (r - nearest).abs() <= 1e-9 * r {
            nearest as u64
        } else {
            libm::floor(r) as u64 + 1
        };
        Grid { steps, h, horizon }
    }

    /// Whether `h` divides the horizon (up to the tolerance above).
    pub fn is_exact(horizon: f64, h: f64) -> bool {
        let r = horizon / h;
        let nearest = libm::round(r);
        nearest >= 1.0 && (r - nearest).abs() <= 1e-9 * r
    }

    /// `t_n`.
    #[inline]
    pub fn time(&self, n: u64) -> f64 {
        if n >= self.steps {
            self.horizon
        } else {
            n as f64 * self.h
        }
    }

    /// `t_{n+1} - t_n`.
    #[inline]
    pub fn step_len(&self, n: u64) -> f64 {
        self.time(n + 1) - self.time(n)
    }
}

fn check_common(network: &ReactionNetwork, x0: &[i64], horizon: f64) -> Result<()> {
    network.check_dimension(x0)?;
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(invalid_argument("horizon T must be finite and >= 0"));
    }
    Ok(())
}

/// Statistically exact draw of `X(T)`, using the configured exact method.
pub fn exact_path(
    network: &ReactionNetwork,
    x0: &[i64],
    horizon: f64,
    opts: &SimOptions,
    stream: &mut RandomStream,
) -> Result<PathResult> {
    check_common(network, x0, horizon)?;
    if x0.iter().any(|&x| x < 0) {
        return Err(invalid_argument(
            "exact paths need a nonnegative initial state",
        ));
    }
    let draws0 = stream.draws();
    let (counts, updates) = match opts.exact_method {
        ExactMethod::NextReaction => next_reaction(network, x0, horizon, opts.max_updates, stream)?,
        ExactMethod::Direct => direct(network, x0, horizon, opts.max_updates, stream)?,
    };
    Ok(PathResult {
        final_state: State::at(counts, horizon),
        updates,
        rng_draws: stream.draws() - draws0,
    })
}

fn next_reaction(
    network: &ReactionNetwork,
    x0: &[i64],
    horizon: f64,
    max_updates: u64,
    stream: &mut RandomStream,
) -> Result<(Vec<i64>, u64)> {
    let r = network.num_reactions();
    let mut counts = x0.to_vec();
    let mut props = vec![0.0; r];
    network.fill_propensities(&counts, &mut props);
    // Internal time already consumed, and internal time of the next firing,
    // for each unit-rate process Y_k.
    let mut internal = vec![0.0; r];
    let mut next_fire: Vec<f64> = (0..r).map(|_| stream.unit_exponential()).collect();
    let mut t = 0.0;
    let mut updates = 0u64;
    loop {
        let mut best = f64::INFINITY;
        let mut mu = usize::MAX;
        for k in 0..r {
            if props[k] > 0.0 {
                let dt = (next_fire[k] - internal[k]) / props[k];
                if dt < best {
                    best = dt;
                    mu = k;
                }
            }
        }
        if mu == usize::MAX || t + best > horizon {
            break;
        }
        let dt = best.max(0.0);
        t += dt;
        for k in 0..r {
            internal[k] += props[k] * dt;
        }
        internal[mu] = next_fire[mu];
        network.apply(&mut counts, mu, 1);
        next_fire[mu] += stream.unit_exponential();
        for &j in network.dependents(mu) {
            props[j] = network.reactions()[j].propensity(&counts);
        }
        updates += 1;
        if updates > max_updates {
            return Err(Error::PathBudgetExceeded { limit: max_updates });
        }
    }
    Ok((counts, updates))
}

fn direct(
    network: &ReactionNetwork,
    x0: &[i64],
    horizon: f64,
    max_updates: u64,
    stream: &mut RandomStream,
) -> Result<(Vec<i64>, u64)> {
    let r = network.num_reactions();
    let mut counts = x0.to_vec();
    let mut props = vec![0.0; r];
    network.fill_propensities(&counts, &mut props);
    let mut t = 0.0;
    let mut updates = 0u64;
    loop {
        let total: f64 = props.iter().sum();
        if total <= 0.0 {
            break;
        }
        t += stream.unit_exponential() / total;
        if t > horizon {
            break;
        }
        let target = stream.uniform() * total;
        let mut acc = 0.0;
        let mut mu = r - 1;
        for (k, &a) in props.iter().enumerate() {
            acc += a;
            if target < acc {
                mu = k;
                break;
            }
        }
        // Rounding can leave `target` past the last partial sum; fall back
        // to the last channel with positive rate.
        while props[mu] == 0.0 {
            mu -= 1;
        }
        network.apply(&mut counts, mu, 1);
        for &j in network.dependents(mu) {
            props[j] = network.reactions()[j].propensity(&counts);
        }
        updates += 1;
        if updates > max_updates {
            return Err(Error::PathBudgetExceeded { limit: max_updates });
        }
    }
    Ok((counts, updates))
}

/// Euler tau-leaping with step `h`, clamping the last step to end at `T`.
pub fn tau_leap_path(
    network: &ReactionNetwork,
    x0: &[i64],
    horizon: f64,
    h: f64,
    opts: &SimOptions,
    stream: &mut RandomStream,
) -> Result<PathResult> {
    check_common(network, x0, horizon)?;
    if !(h.is_finite() && h > 0.0) {
        return Err(invalid_argument("tau-leap step h must be finite and > 0"));
    }
    let r = network.num_reactions();
    let grid = Grid::new(horizon, h);
    let updates = grid.steps.saturating_mul(r as u64);
    if updates > opts.max_updates {
        return Err(Error::PathBudgetExceeded {
            limit: opts.max_updates,
        });
    }
    let draws0 = stream.draws();
    let mut counts = x0.to_vec();
    let mut props = vec![0.0; r];
    for n in 0..grid.steps {
        let dt = grid.step_len(n);
        network.fill_propensities(&counts, &mut props);
        for k in 0..r {
            let fired = stream.poisson_unchecked(props[k] * dt);
            if fired > 0 {
                network.apply(&mut counts, k, fired as i64);
            }
        }
    }
    Ok(PathResult {
        final_state: State::at(counts, horizon),
        updates,
        rng_draws: stream.draws() - draws0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Reaction, Species};

    fn decay(x0: u64, kappa: f64) -> ReactionNetwork {
        ReactionNetwork::new(
            vec![Species::new("S", x0)],
            vec![Reaction::new("decay", &[(0, 1)], &[], kappa)],
        )
        .unwrap()
    }

    #[test]
    fn grid_exact_division() {
        let g = Grid::new(1.0, 1.0 / 81.0);
        assert_eq!(g.steps, 81);
        assert_eq!(g.time(81), 1.0);
        let g = Grid::new(1.0, 0.3);
        assert_eq!(g.steps, 4);
        assert!((g.step_len(3) - 0.1).abs() < 1e-12);
        let g = Grid::new(1.0, 5.0);
        assert_eq!(g.steps, 1);
        assert_eq!(g.step_len(0), 1.0);
        assert_eq!(Grid::new(0.0, 0.1).steps, 0);
        assert!(Grid::is_exact(20.0, 20.0 / 729.0));
        assert!(!Grid::is_exact(1.0, 0.3));
    }

    #[test]
    fn no_reactions_keeps_state() {
        let net = ReactionNetwork::new(vec![Species::new("A", 4)], vec![]).unwrap();
        let mut s = RandomStream::new(1, 0);
        for method in [ExactMethod::NextReaction, ExactMethod::Direct] {
            let opts = SimOptions {
                exact_method: method,
                ..SimOptions::default()
            };
            let p = exact_path(&net, &[4], 3.0, &opts, &mut s).unwrap();
            assert_eq!(p.final_state, State::at(vec![4], 3.0));
            assert_eq!(p.updates, 0);
        }
    }

    #[test]
    fn absorbing_state_jumps_to_horizon() {
        let net = decay(3, 1.0);
        let mut s = RandomStream::new(1, 0);
        let p = exact_path(&net, &[3], 1e6, &SimOptions::default(), &mut s).unwrap();
        assert_eq!(p.final_state.counts, vec![0]);
        assert_eq!(p.updates, 3);
        assert_eq!(p.final_state.time, 1e6);
    }

    #[test]
    fn budget_cap_aborts() {
        let net = decay(1000, 1.0);
        let opts = SimOptions {
            max_updates: 10,
            ..SimOptions::default()
        };
        let mut s = RandomStream::new(1, 0);
        assert_eq!(
            exact_path(&net, &[1000], 10.0, &opts, &mut s),
            Err(Error::PathBudgetExceeded { limit: 10 })
        );
        assert!(tau_leap_path(&net, &[1000], 1.0, 0.01, &opts, &mut s).is_err());
    }

    #[test]
    fn argument_errors() {
        let net = decay(10, 1.0);
        let mut s = RandomStream::new(1, 0);
        let o = SimOptions::default();
        assert!(tau_leap_path(&net, &[10], 1.0, 0.0, &o, &mut s).is_err());
        assert!(tau_leap_path(&net, &[10], 1.0, -0.5, &o, &mut s).is_err());
        assert!(exact_path(&net, &[10, 1], 1.0, &o, &mut s).is_err());
        assert!(exact_path(&net, &[-1], 1.0, &o, &mut s).is_err());
        assert!(exact_path(&net, &[10], -1.0, &o, &mut s).is_err());
    }

    #[test]
    fn single_step_when_h_exceeds_horizon() {
        // One step: final = x0 + Poisson(lambda(x0) T) * zeta, replayed by hand.
        let net = decay(50, 0.7);
        let o = SimOptions::default();
        let mut s = RandomStream::new(3, 9);
        let p = tau_leap_path(&net, &[50], 2.0, 10.0, &o, &mut s).unwrap();
        let mut r = RandomStream::new(3, 9);
        let fired = r.poisson(0.7 * 50.0 * 2.0).unwrap() as i64;
        assert_eq!(p.final_state.counts, vec![50 - fired]);
        assert_eq!(p.updates, 1);
    }

    #[test]
    fn tau_updates_are_steps_times_channels() {
        let net = ReactionNetwork::new(
            vec![Species::new("A", 10), Species::new("B", 10)],
            vec![
                Reaction::new("f", &[(0, 1)], &[(1, 1)], 1.0),
                Reaction::new("b", &[(1, 1)], &[(0, 1)], 1.0),
            ],
        )
        .unwrap();
        let mut s = RandomStream::new(3, 9);
        let p = tau_leap_path(&net, &[10, 10], 1.0, 0.25, &SimOptions::default(), &mut s).unwrap();
        assert_eq!(p.updates, 8);
        assert_eq!(p.final_state.counts.iter().sum::<i64>(), 20);
    }

    #[test]
    fn replay_is_exact() {
        let net = decay(500, 1.0);
        let o = SimOptions::default();
        let a = exact_path(&net, &[500], 1.0, &o, &mut RandomStream::new(8, 8)).unwrap();
        let b = exact_path(&net, &[500], 1.0, &o, &mut RandomStream::new(8, 8)).unwrap();
        assert_eq!(a, b);
    }
}
