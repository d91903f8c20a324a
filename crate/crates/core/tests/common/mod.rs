#![allow(dead_code)]

use ctmc_mlmc::coupling::ChannelMap;
use ctmc_mlmc::{Reaction, ReactionNetwork, Species};

pub fn decay(kappa: f64, x0: u64) -> ReactionNetwork {
    ReactionNetwork::new(
        vec![Species::new("S", x0)],
        vec![Reaction::new("decay", &[(0, 1)], &[], kappa)],
    )
    .unwrap()
}

pub fn mm_inf(lambda: f64, mu: f64) -> ReactionNetwork {
    ReactionNetwork::new(
        vec![Species::new("S", 0)],
        vec![
            Reaction::new("arrival", &[], &[(0, 1)], lambda),
            Reaction::new("service", &[(0, 1)], &[], mu),
        ],
    )
    .unwrap()
}

pub fn isomerization(theta: f64) -> ReactionNetwork {
    let n = (1000.0 / theta).floor() as u64;
    ReactionNetwork::new(
        vec![Species::new("A", n), Species::new("B", n)],
        vec![
            Reaction::new("forward", &[(0, 1)], &[(1, 1)], theta),
            Reaction::new("backward", &[(1, 1)], &[(0, 1)], theta),
        ],
    )
    .unwrap()
}

/// Gene transcription, translation and dimerisation with the single gene
/// folded into a zero-order transcription channel. Species (M, P, D).
pub fn dimer() -> ReactionNetwork {
    ReactionNetwork::new(
        vec![
            Species::new("M", 0),
            Species::new("P", 0),
            Species::new("D", 0),
        ],
        vec![
            Reaction::new("transcription", &[], &[(0, 1)], 25.0),
            Reaction::new("translation", &[(0, 1)], &[(0, 1), (1, 1)], 1000.0),
            Reaction::new("dimerization", &[(1, 2)], &[(2, 1)], 0.001),
            Reaction::new("mrna_decay", &[(0, 1)], &[], 0.1),
            Reaction::new("protein_decay", &[(1, 1)], &[], 1.0),
        ],
    )
    .unwrap()
}

/// Species (G, S, T, V).
pub fn viral() -> ReactionNetwork {
    ReactionNetwork::new(
        vec![
            Species::new("G", 0),
            Species::new("S", 0),
            Species::new("T", 10),
            Species::new("V", 0),
        ],
        vec![
            Reaction::new("R1", &[(2, 1)], &[(2, 1), (0, 1)], 1.0),
            Reaction::new("R2", &[(0, 1)], &[(2, 1)], 0.025),
            Reaction::new("R3", &[(2, 1)], &[(2, 1), (1, 1)], 1000.0),
            Reaction::new("R4", &[(2, 1)], &[], 0.25),
            Reaction::new("R5", &[(1, 1)], &[], 2.0),
            Reaction::new("R6", &[(0, 1), (1, 1)], &[(3, 1)], 7.5e-6),
        ],
    )
    .unwrap()
}

/// The viral model with the structural protein replaced by its quasi
/// equilibrium mean 500 T. Species (G, T, V).
pub fn viral_reduced() -> ReactionNetwork {
    ReactionNetwork::new(
        vec![
            Species::new("G", 0),
            Species::new("T", 10),
            Species::new("V", 0),
        ],
        vec![
            Reaction::new("R1", &[(1, 1)], &[(1, 1), (0, 1)], 1.0),
            Reaction::new("R2", &[(0, 1)], &[(1, 1)], 0.025),
            Reaction::new("R4", &[(1, 1)], &[], 0.25),
            Reaction::new("R6", &[(0, 1), (1, 1)], &[(1, 1), (2, 1)], 3.75e-3),
        ],
    )
    .unwrap()
}

pub fn viral_map(full: &ReactionNetwork, reduced: &ReactionNetwork) -> ChannelMap {
    ChannelMap::new(vec![(0, 0), (1, 1), (3, 2), (5, 3)], full, reduced).unwrap()
}

/// Mean and variance of the sample.
pub fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}
