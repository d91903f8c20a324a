//! Coupled pairs of paths sharing Poisson channels.
//!
//! Each coupled channel `k` is split into three unit-rate processes: one
//! running at `A_k1 = min(lambda_k(first), lambda_k(second))` that moves both
//! paths, and two running at the excesses `A_k2`, `A_k3` that move only one.
//! Both marginals keep their own law while the paths jump together most of
//! the time. The three families draw from distinct tagged substreams of the
//! pair's [`RandomStream`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid_argument, Error, Result};
use crate::model::{ReactionNetwork, State};
use crate::paths::{Grid, SimOptions};
use crate::stochastics::RandomStream;

const SHARED: u64 = 1;
const FIRST_ONLY: u64 = 2;
const SECOND_ONLY: u64 = 3;

/// Terminal states of a coupled pair.
///
/// `fine` is the more accurate member: the finer tau path, the exact path in
/// an exact/tau pair, or the target network in an exact/exact pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPairResult {
    pub fine_final: State,
    pub coarse_final: State,
    pub updates: u64,
    /// Share of `updates` that moved the fine member.
    pub fine_updates: u64,
    pub rng_draws: u64,
}

struct Families {
    shared: RandomStream,
    first: RandomStream,
    second: RandomStream,
}

impl Families {
    fn new(stream: &RandomStream) -> Self {
        Families {
            shared: stream.family(SHARED),
            first: stream.family(FIRST_ONLY),
            second: stream.family(SECOND_ONLY),
        }
    }

    fn get(&mut self, family: u64) -> &mut RandomStream {
        match family {
            SHARED => &mut self.shared,
            FIRST_ONLY => &mut self.first,
            _ => &mut self.second,
        }
    }

    fn draws(&self) -> u64 {
        self.shared.draws() + self.first.draws() + self.second.draws()
    }
}

/// Tau-leap paths at `h_fine` and `m * h_fine`, coupled channel by channel.
///
/// The coarse propensities are evaluated once per coarse step and held fixed
/// through the `m` inner fine steps. The horizon must be a whole number of
/// coarse steps.
pub fn coupled_tau_pair(
    network: &ReactionNetwork,
    x0: &[i64],
    horizon: f64,
    h_fine: f64,
    m: u32,
    opts: &SimOptions,
    stream: &RandomStream,
) -> Result<CoupledPairResult> {
    if m < 2 {
        return Err(invalid_argument(
            "refinement factor M must be an integer >= 2",
        ));
    }
    tau_pair(network, x0, horizon, h_fine, m, opts, stream)
}

/// The degenerate `M = 1` coupling, in which both members use the same step.
/// Both paths are then identical; only useful for testing.
#[doc(hidden)]
pub fn coupled_tau_pair_equal_steps(
    network: &ReactionNetwork,
    x0: &[i64],
    horizon: f64,
    h: f64,
    opts: &SimOptions,
    stream: &RandomStream,
) -> Result<CoupledPairResult> {
    tau_pair(network, x0, horizon, h, 1, opts, stream)
}

fn tau_pair(
    network: &ReactionNetwork,
    x0: &[i64],
    horizon: f64,
    h_fine: f64,
    m: u32,
    opts: &SimOptions,
    stream: &RandomStream,
) -> Result<CoupledPairResult> {
    network.check_dimension(x0)?;
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(invalid_argument("horizon T must be finite and >= 0"));
    }
    if !(h_fine.is_finite() && h_fine > 0.0) {
        return Err(invalid_argument("fine step must be finite and > 0"));
    }
    let h_coarse = h_fine * f64::from(m);
    if horizon > 0.0 && !Grid::is_exact(horizon, h_coarse) {
        return Err(invalid_argument(format!(
            "coarse step {h_coarse} does not divide the horizon {horizon}"
        )));
    }
    let coarse_steps = Grid::new(horizon, h_coarse).steps;
    let r = network.num_reactions();
    let fine_steps = coarse_steps.saturating_mul(u64::from(m));
    let updates = fine_steps.saturating_mul(2 * r as u64);
    if updates > opts.max_updates {
        return Err(Error::PathBudgetExceeded {
            limit: opts.max_updates,
        });
    }

    let mut fam = Families::new(stream);
    let mut fine = x0.to_vec();
    let mut coarse = x0.to_vec();
    let mut lam_fine = vec![0.0; r];
    let mut lam_coarse = vec![0.0; r];
    for _ in 0..coarse_steps {
        network.fill_propensities(&coarse, &mut lam_coarse);
        for _ in 0..m {
            network.fill_propensities(&fine, &mut lam_fine);
            for k in 0..r {
                let a1 = lam_fine[k].min(lam_coarse[k]);
                let a2 = lam_fine[k] - a1;
                let a3 = lam_coarse[k] - a1;
                let both = fam.shared.poisson_unchecked(a1 * h_fine) as i64;
                let only_fine = if a2 > 0.0 {
                    fam.first.poisson_unchecked(a2 * h_fine) as i64
                } else {
                    0
                };
                let only_coarse = if a3 > 0.0 {
                    fam.second.poisson_unchecked(a3 * h_fine) as i64
                } else {
                    0
                };
                if both + only_fine > 0 {
                    network.apply(&mut fine, k, both + only_fine);
                }
                if both + only_coarse > 0 {
                    network.apply(&mut coarse, k, both + only_coarse);
                }
            }
        }
    }
    Ok(CoupledPairResult {
        fine_final: State::at(fine, horizon),
        coarse_final: State::at(coarse, horizon),
        updates,
        fine_updates: updates / 2,
        rng_draws: fam.draws(),
    })
}

/// Exact path `X` coupled to a tau-leap path `Z` with step `h`, simulated by
/// a next reaction method over the `3R` processes `Y_{k,i}`.
///
/// `Z` fires at rates frozen at its value on the last grid point; the frozen
/// copy is refreshed whenever the next event would cross a grid boundary.
/// Ties in the next firing time go to the smallest `(k, i)`.
///
/// Updates count every firing plus one per grid refresh.
pub fn coupled_exact_tau(
    network: &ReactionNetwork,
    x0: &[i64],
    horizon: f64,
    h: f64,
    opts: &SimOptions,
    stream: &RandomStream,
) -> Result<CoupledPairResult> {
    network.check_dimension(x0)?;
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(invalid_argument("horizon T must be finite and >= 0"));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(invalid_argument("tau-leap step h must be finite and > 0"));
    }
    if x0.iter().any(|&x| x < 0) {
        return Err(invalid_argument(
            "exact paths need a nonnegative initial state",
        ));
    }
    let r = network.num_reactions();
    let mut fam = Families::new(stream);
    let mut x = x0.to_vec();
    let mut z = x0.to_vec();
    if horizon == 0.0 {
        return Ok(pair_result(x, z, 0.0, 0, 0, 0));
    }
    let grid = Grid::new(horizon, h);
    let mut lam_x = vec![0.0; r];
    let mut lam_z = vec![0.0; r];
    network.fill_propensities(&x, &mut lam_x);
    network.fill_propensities(&z, &mut lam_z);

    // Clock c = 3k + (i - 1) for channel k and family i.
    let clocks = 3 * r;
    let mut rate = vec![0.0; clocks];
    let mut internal = vec![0.0; clocks];
    let mut next_fire = vec![0.0; clocks];
    for c in 0..clocks {
        next_fire[c] = fam.get(c as u64 % 3 + 1).unit_exponential();
    }

    let mut t = 0.0;
    let mut boundary = 1u64;
    let mut t_tau = grid.time(boundary);
    let mut updates = 0u64;
    let mut fine_updates = 0u64;
    loop {
        for k in 0..r {
            let a1 = lam_x[k].min(lam_z[k]);
            rate[3 * k] = a1;
            rate[3 * k + 1] = lam_x[k] - a1;
            rate[3 * k + 2] = lam_z[k] - a1;
        }
        let mut delta = f64::INFINITY;
        let mut mu = usize::MAX;
        for c in 0..clocks {
            if rate[c] != 0.0 {
                let dt = (next_fire[c] - internal[c]) / rate[c];
                if dt < delta {
                    delta = dt;
                    mu = c;
                }
            }
        }
        if t + delta >= t_tau {
            let step = t_tau - t;
            for c in 0..clocks {
                internal[c] += rate[c] * step;
            }
            t = t_tau;
            updates += 1;
            if boundary >= grid.steps {
                break;
            }
            network.fill_propensities(&z, &mut lam_z);
            boundary += 1;
            t_tau = grid.time(boundary);
        } else {
            let delta = delta.max(0.0);
            let k = mu / 3;
            let family = mu % 3 + 1;
            if family != SECOND_ONLY as usize {
                network.apply(&mut x, k, 1);
                for &j in network.dependents(k) {
                    lam_x[j] = network.reactions()[j].propensity(&x);
                }
                fine_updates += 1;
            }
            if family != FIRST_ONLY as usize {
                network.apply(&mut z, k, 1);
            }
            for c in 0..clocks {
                internal[c] += rate[c] * delta;
            }
            internal[mu] = next_fire[mu];
            next_fire[mu] += fam.get(family as u64).unit_exponential();
            t += delta;
            updates += 1;
        }
        if updates > opts.max_updates {
            return Err(Error::PathBudgetExceeded {
                limit: opts.max_updates,
            });
        }
    }
    Ok(pair_result(
        x,
        z,
        horizon,
        updates,
        fine_updates,
        fam.draws(),
    ))
}

fn pair_result(
    fine: Vec<i64>,
    coarse: Vec<i64>,
    horizon: f64,
    updates: u64,
    fine_updates: u64,
    rng_draws: u64,
) -> CoupledPairResult {
    CoupledPairResult {
        fine_final: State::at(fine, horizon),
        coarse_final: State::at(coarse, horizon),
        updates,
        fine_updates,
        rng_draws,
    }
}

/// Pairing of reaction channels between two networks for an exact/exact
/// coupling. Paired reactions need not have equal net change vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelMap {
    pairs: Vec<(usize, usize)>,
    unpaired_first: Vec<usize>,
    unpaired_second: Vec<usize>,
    sizes: (usize, usize),
}

impl ChannelMap {
    pub fn new(
        pairs: Vec<(usize, usize)>,
        first: &ReactionNetwork,
        second: &ReactionNetwork,
    ) -> Result<Self> {
        let (na, nb) = (first.num_reactions(), second.num_reactions());
        for (n, &(a, b)) in pairs.iter().enumerate() {
            if a >= na || b >= nb {
                return Err(Error::InvalidChannelMap(format!(
                    "pair ({a}, {b}) out of range for networks with {na} and {nb} reactions"
                )));
            }
            if pairs[..n].iter().any(|&(a2, b2)| a2 == a || b2 == b) {
                return Err(Error::InvalidChannelMap(format!(
                    "reaction appears in more than one pair: ({a}, {b})"
                )));
            }
        }
        let unpaired_first = (0..na)
            .filter(|k| !pairs.iter().any(|p| p.0 == *k))
            .collect();
        let unpaired_second = (0..nb)
            .filter(|k| !pairs.iter().any(|p| p.1 == *k))
            .collect();
        Ok(ChannelMap {
            pairs,
            unpaired_first,
            unpaired_second,
            sizes: (na, nb),
        })
    }

    /// Every channel paired with itself.
    pub fn identity(network: &ReactionNetwork) -> Self {
        let pairs = (0..network.num_reactions()).map(|k| (k, k)).collect();
        Self::new(pairs, network, network).expect("identity map is valid")
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn unpaired_first(&self) -> &[usize] {
        &self.unpaired_first
    }

    pub fn unpaired_second(&self) -> &[usize] {
        &self.unpaired_second
    }

    fn check(&self, first: &ReactionNetwork, second: &ReactionNetwork) -> Result<()> {
        if self.sizes != (first.num_reactions(), second.num_reactions()) {
            return Err(Error::InvalidChannelMap(format!(
                "map built for networks with {:?} reactions, used with ({}, {})",
                self.sizes,
                first.num_reactions(),
                second.num_reactions()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Clock {
    Shared(usize, usize),
    First(usize),
    Second(usize),
}

/// Exact simulation of two networks coupled through `map`.
///
/// Paired channels `(a, b)` share a process at rate
/// `min(lambda_a(first), lambda_b(second))` plus one excess process per side;
/// unpaired channels run on their own. Both marginals are exact chains of
/// their own network.
pub fn coupled_exact_exact(
    first: &ReactionNetwork,
    second: &ReactionNetwork,
    x0_first: &[i64],
    x0_second: &[i64],
    horizon: f64,
    map: &ChannelMap,
    opts: &SimOptions,
    stream: &RandomStream,
) -> Result<CoupledPairResult> {
    first.check_dimension(x0_first)?;
    second.check_dimension(x0_second)?;
    map.check(first, second)?;
    if !(horizon.is_finite() && horizon >= 0.0) {
        return Err(invalid_argument("horizon T must be finite and >= 0"));
    }
    if x0_first.iter().chain(x0_second.iter()).any(|&x| x < 0) {
        return Err(invalid_argument(
            "exact paths need a nonnegative initial state",
        ));
    }

    let mut clocks: Vec<(Clock, u64)> = Vec::new();
    for &(a, b) in map.pairs() {
        clocks.push((Clock::Shared(a, b), SHARED));
        clocks.push((Clock::First(a), FIRST_ONLY));
        clocks.push((Clock::Second(b), SECOND_ONLY));
    }
    clocks.extend(
        map.unpaired_first()
            .iter()
            .map(|&a| (Clock::First(a), FIRST_ONLY)),
    );
    clocks.extend(
        map.unpaired_second()
            .iter()
            .map(|&b| (Clock::Second(b), SECOND_ONLY)),
    );
    // For the excess clocks of a pair, remember the partner channel so the
    // shared rate can be subtracted.
    let partner: Vec<Option<usize>> = {
        let mut v = Vec::with_capacity(clocks.len());
        for &(a, b) in map.pairs() {
            v.push(None);
            v.push(Some(b));
            v.push(Some(a));
        }
        v.resize(clocks.len(), None);
        v
    };

    let mut fam = Families::new(stream);
    let mut xa = x0_first.to_vec();
    let mut xb = x0_second.to_vec();
    let mut lam_a = vec![0.0; first.num_reactions()];
    let mut lam_b = vec![0.0; second.num_reactions()];
    first.fill_propensities(&xa, &mut lam_a);
    second.fill_propensities(&xb, &mut lam_b);

    let n = clocks.len();
    let mut rate = vec![0.0; n];
    let mut internal = vec![0.0; n];
    let mut next_fire: Vec<f64> = clocks
        .iter()
        .map(|&(_, family)| fam.get(family).unit_exponential())
        .collect();

    let mut t = 0.0;
    let mut updates = 0u64;
    let mut fine_updates = 0u64;
    loop {
        for c in 0..n {
            rate[c] = match (clocks[c].0, partner[c]) {
                (Clock::Shared(a, b), _) => lam_a[a].min(lam_b[b]),
                (Clock::First(a), Some(b)) => lam_a[a] - lam_a[a].min(lam_b[b]),
                (Clock::Second(b), Some(a)) => lam_b[b] - lam_a[a].min(lam_b[b]),
                (Clock::First(a), None) => lam_a[a],
                (Clock::Second(b), None) => lam_b[b],
            };
        }
        let mut delta = f64::INFINITY;
        let mut mu = usize::MAX;
        for c in 0..n {
            if rate[c] > 0.0 {
                let dt = (next_fire[c] - internal[c]) / rate[c];
                if dt < delta {
                    delta = dt;
                    mu = c;
                }
            }
        }
        if mu == usize::MAX || t + delta > horizon {
            break;
        }
        let delta = delta.max(0.0);
        let (moves_a, moves_b) = match clocks[mu].0 {
            Clock::Shared(a, b) => (Some(a), Some(b)),
            Clock::First(a) => (Some(a), None),
            Clock::Second(b) => (None, Some(b)),
        };
        if let Some(a) = moves_a {
            first.apply(&mut xa, a, 1);
            for &j in first.dependents(a) {
                lam_a[j] = first.reactions()[j].propensity(&xa);
            }
            fine_updates += 1;
        }
        if let Some(b) = moves_b {
            second.apply(&mut xb, b, 1);
            for &j in second.dependents(b) {
                lam_b[j] = second.reactions()[j].propensity(&xb);
            }
        }
        for c in 0..n {
            internal[c] += rate[c] * delta;
        }
        internal[mu] = next_fire[mu];
        next_fire[mu] += fam.get(clocks[mu].1).unit_exponential();
        t += delta;
        updates += 1;
        if updates > opts.max_updates {
            return Err(Error::PathBudgetExceeded {
                limit: opts.max_updates,
            });
        }
    }
    Ok(pair_result(
        xa,
        xb,
        horizon,
        updates,
        fine_updates,
        fam.draws(),
    ))
}
