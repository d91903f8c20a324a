use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A chemical species with its initial copy number.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Species {
    pub name: String,
    pub initial: u64,
}

impl Species {
    pub fn new(name: impl Into<String>, initial: u64) -> Self {
        Species {
            name: name.into(),
            initial,
        }
    }
}

/// One reaction channel with mass-action kinetics.
///
/// Stoichiometry is stored sparsely as `(species index, count)` pairs. The
/// net change vector is derived from reactants and products at construction
/// and only holds nonzero entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    name: String,
    reactants: Vec<(usize, u32)>,
    products: Vec<(usize, u32)>,
    rate: f64,
    cap: Option<u64>,
    net_change: Vec<(usize, i64)>,
}

impl Reaction {
    /// Builds a mass-action reaction. Repeated species in either list are
    /// summed.
    pub fn new(
        name: impl Into<String>,
        reactants: &[(usize, u32)],
        products: &[(usize, u32)],
        rate: f64,
    ) -> Self {
        let reactants = normalize(reactants);
        let products = normalize(products);
        let mut net_change: Vec<(usize, i64)> = Vec::new();
        for &(i, c) in products.iter() {
            net_change.push((i, i64::from(c)));
        }
        for &(i, c) in reactants.iter() {
            match net_change.iter_mut().find(|(j, _)| *j == i) {
                Some(entry) => entry.1 -= i64::from(c),
                None => net_change.push((i, -i64::from(c))),
            }
        }
        net_change.retain(|&(_, d)| d != 0);
        net_change.sort_unstable_by_key(|&(i, _)| i);
        Reaction {
            name: name.into(),
            reactants,
            products,
            rate,
            cap: None,
            net_change,
        }
    }

    /// Caps the combinatorial factor of the propensity at `cap`, giving
    /// `rate * min(h(x), cap)`. With a single reactant of stoichiometry one
    /// this is the `mu * min(x, k)` service rate of an M/M/k queue.
    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = Some(cap);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn reactants(&self) -> &[(usize, u32)] {
        &self.reactants
    }

    pub fn products(&self) -> &[(usize, u32)] {
        &self.products
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn cap(&self) -> Option<u64> {
        self.cap
    }

    /// Nonzero entries of the net change vector `products - reactants`.
    pub fn net_change(&self) -> &[(usize, i64)] {
        &self.net_change
    }

    /// A reaction whose firing leaves the state unchanged.
    pub fn is_null(&self) -> bool {
        self.net_change.is_empty()
    }

    /// Reactant count for species `i` (zero if absent).
    pub fn reactant_count(&self, i: usize) -> u32 {
        self.reactants
            .iter()
            .find(|(j, _)| *j == i)
            .map_or(0, |&(_, c)| c)
    }

    /// Mass-action intensity at `counts`.
    ///
    /// The falling factorial `x!/(x-nu)!` is formed by repeated
    /// multiplication. Any reactant with a count below its stoichiometric
    /// requirement (including negative counts left by tau-leaping) forces
    /// the propensity to zero.
    #[inline]
    pub fn propensity(&self, counts: &[i64]) -> f64 {
        let mut h = 1.0;
        for &(i, nu) in self.reactants.iter() {
            let x = counts[i];
            if x < i64::from(nu) {
                return 0.0;
            }
            for j in 0..i64::from(nu) {
                h *= (x - j) as f64;
            }
        }
        if let Some(cap) = self.cap {
            h = h.min(cap as f64);
        }
        self.rate * h
    }
}

fn normalize(entries: &[(usize, u32)]) -> Vec<(usize, u32)> {
    let mut out: Vec<(usize, u32)> = Vec::with_capacity(entries.len());
    for &(i, c) in entries {
        if c == 0 {
            continue;
        }
        match out.iter_mut().find(|(j, _)| *j == i) {
            Some(entry) => entry.1 += c,
            None => out.push((i, c)),
        }
    }
    out.sort_unstable_by_key(|&(i, _)| i);
    out
}

/// A validated reaction network.
///
/// Immutable after construction. Besides species and reactions it keeps a
/// dependency table: for each reaction, the reactions whose propensity can
/// change when it fires.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetwork {
    species: Vec<Species>,
    reactions: Vec<Reaction>,
    dependents: Vec<Vec<usize>>,
}

impl ReactionNetwork {
    pub fn new(species: Vec<Species>, reactions: Vec<Reaction>) -> Result<Self> {
        if species.is_empty() {
            return Err(Error::InvalidNetwork(
                "at least one species is required".into(),
            ));
        }
        for (a, s) in species.iter().enumerate() {
            if species[..a].iter().any(|t| t.name == s.name) {
                return Err(Error::InvalidNetwork(format!(
                    "duplicate species name '{}'",
                    s.name
                )));
            }
        }
        let d = species.len();
        for (k, r) in reactions.iter().enumerate() {
            if !(r.rate.is_finite() && r.rate >= 0.0) {
                return Err(Error::InvalidNetwork(format!(
                    "reaction {} ('{}') has rate constant {}; expected a finite value >= 0",
                    k, r.name, r.rate
                )));
            }
            if let Some(&(i, _)) = r
                .reactants
                .iter()
                .chain(r.products.iter())
                .find(|(i, _)| *i >= d)
            {
                return Err(Error::InvalidNetwork(format!(
                    "reaction {} ('{}') references species index {} but only {} species exist",
                    k, r.name, i, d
                )));
            }
        }
        let dependents = reactions
            .iter()
            .map(|r| {
                (0..reactions.len())
                    .filter(|&j| {
                        r.net_change
                            .iter()
                            .any(|&(i, _)| reactions[j].reactant_count(i) > 0)
                    })
                    .collect()
            })
            .collect();
        Ok(ReactionNetwork {
            species,
            reactions,
            dependents,
        })
    }

    pub fn species(&self) -> &[Species] {
        &self.species
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    /// Number of species `d`.
    pub fn dimension(&self) -> usize {
        self.species.len()
    }

    /// Number of reaction channels `R`.
    pub fn num_reactions(&self) -> usize {
        self.reactions.len()
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s.name == name)
    }

    pub fn reaction_index(&self, name: &str) -> Option<usize> {
        self.reactions.iter().position(|r| r.name == name)
    }

    /// Declared initial counts.
    pub fn initial_counts(&self) -> Vec<i64> {
        self.species.iter().map(|s| s.initial as i64).collect()
    }

    pub fn initial_state(&self) -> State {
        State::new(self.initial_counts())
    }

    /// Reactions whose propensity may change after reaction `k` fires.
    pub fn dependents(&self, k: usize) -> &[usize] {
        &self.dependents[k]
    }

    /// Indices of reactions with a zero net change vector.
    pub fn null_reactions(&self) -> Vec<usize> {
        (0..self.reactions.len())
            .filter(|&k| self.reactions[k].is_null())
            .collect()
    }

    /// Intensity of reaction `k` in `state`.
    pub fn propensity(&self, state: &State, k: usize) -> Result<f64> {
        self.check_dimension(&state.counts)?;
        let r = self.reactions.get(k).ok_or(Error::IndexOutOfRange {
            index: k,
            limit: self.reactions.len(),
        })?;
        Ok(r.propensity(&state.counts))
    }

    /// Intensities of every reaction channel, in reaction order.
    pub fn all_propensities(&self, state: &State) -> Result<Vec<f64>> {
        self.check_dimension(&state.counts)?;
        let mut out = vec![0.0; self.reactions.len()];
        self.fill_propensities(&state.counts, &mut out);
        Ok(out)
    }

    /// Unchecked variant used on hot simulation paths.
    #[inline]
    pub(crate) fn fill_propensities(&self, counts: &[i64], out: &mut [f64]) {
        for (a, r) in out.iter_mut().zip(self.reactions.iter()) {
            *a = r.propensity(counts);
        }
    }

    /// Adds `times` firings of reaction `k` to `counts`.
    #[inline]
    pub(crate) fn apply(&self, counts: &mut [i64], k: usize, times: i64) {
        for &(i, d) in self.reactions[k].net_change.iter() {
            counts[i] += d * times;
        }
    }

    pub(crate) fn check_dimension(&self, counts: &[i64]) -> Result<()> {
        if counts.len() != self.species.len() {
            return Err(Error::DimensionMismatch {
                expected: self.species.len(),
                found: counts.len(),
            });
        }
        Ok(())
    }
}

/// Copy numbers at a point in time.
///
/// Counts are signed: tau-leaping may drive a species below zero, which the
/// propensity indicator then handles. Exact simulators never go negative.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct State {
    pub counts: Vec<i64>,
    pub time: f64,
}

impl State {
    pub fn new(counts: Vec<i64>) -> Self {
        State { counts, time: 0.0 }
    }

    pub fn at(counts: Vec<i64>, time: f64) -> Self {
        State { counts, time }
    }
}
