//! Scaling diagnostics.
//!
//! Exponents are extracted heuristically from the initial condition and rate
//! constants: `N = max(2, max_i x_i(0))`, `alpha_i = ln max(x_i(0), 1) / ln N`
//! and `beta_k = ln max(kappa_k, N^-12) / ln N`. Nothing here feeds back into
//! simulation; the profile is reporting only.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{ReactionNetwork, State};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalingProfile {
    /// The large system parameter `N`.
    pub n: f64,
    /// Per-species abundance exponents.
    pub alpha: Vec<f64>,
    /// Per-reaction rate-constant exponents.
    pub beta: Vec<f64>,
    /// Time-scale exponent.
    pub gamma: f64,
    /// Per-reaction speed exponents `c_k = beta_k + nu_k . alpha - gamma`.
    pub c: Vec<f64>,
    /// Per-reaction jump-size exponents; `None` for null reactions.
    pub rho_k: Vec<Option<f64>>,
    /// `min_k rho_k`.
    pub rho: f64,
    /// `N^gamma * sum_k N^{c_k}`, the order of the work of one exact path.
    pub nbar: f64,
}

pub fn compute_scaling(network: &ReactionNetwork, state0: &State) -> Result<ScalingProfile> {
    network.check_dimension(&state0.counts)?;
    if network.num_reactions() == 0 {
        return Err(Error::ScalingUndefined("network has no reactions"));
    }
    if network.null_reactions().len() == network.num_reactions() {
        return Err(Error::ScalingUndefined(
            "every reaction has a zero net change",
        ));
    }
    let max_count = state0.counts.iter().copied().max().unwrap_or(0).max(0) as f64;
    let n = max_count.max(2.0);
    let ln_n = libm::log(n);

    let alpha: Vec<f64> = state0
        .counts
        .iter()
        .map(|&x| libm::log((x as f64).max(1.0)) / ln_n)
        .collect();
    let floor = libm::pow(n, -12.0);
    let beta: Vec<f64> = network
        .reactions()
        .iter()
        .map(|r| libm::log(r.rate().max(floor)) / ln_n)
        .collect();
    // beta_k + nu_k . alpha
    let order: Vec<f64> = network
        .reactions()
        .iter()
        .zip(beta.iter())
        .map(|(r, b)| {
            b + r
                .reactants()
                .iter()
                .map(|&(i, nu)| f64::from(nu) * alpha[i])
                .sum::<f64>()
        })
        .collect();

    let mut gamma = f64::NEG_INFINITY;
    let mut rho_k = Vec::with_capacity(network.num_reactions());
    for (k, r) in network.reactions().iter().enumerate() {
        let mut rk: Option<f64> = None;
        for &(i, _) in r.net_change() {
            gamma = gamma.max(order[k] - alpha[i]);
            rk = Some(rk.map_or(alpha[i], |v: f64| v.min(alpha[i])));
        }
        rho_k.push(rk);
    }
    let c: Vec<f64> = order.iter().map(|o| o - gamma).collect();
    let rho = rho_k
        .iter()
        .flatten()
        .fold(f64::INFINITY, |acc, &v| acc.min(v));
    let nbar = libm::pow(n, gamma) * c.iter().map(|&ck| libm::pow(n, ck)).sum::<f64>();

    Ok(ScalingProfile {
        n,
        alpha,
        beta,
        gamma,
        c,
        rho_k,
        rho,
        nbar,
    })
}

/// `A(h) = N^-rho (N^gamma h) + (N^gamma h)^2`, the predicted order of the
/// squared difference between coupled paths at step size `h`.
pub fn a_of_h(profile: &ScalingProfile, h: f64) -> f64 {
    let scaled = libm::pow(profile.n, profile.gamma) * h;
    libm::pow(profile.n, -profile.rho) * scaled + scaled * scaled
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Reaction, Species};
    use alloc::vec;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1.0)
    }

    #[test]
    fn reversible_isomerization() {
        let net = ReactionNetwork::new(
            vec![Species::new("S1", 10_000), Species::new("S2", 10_000)],
            vec![
                Reaction::new("fwd", &[(0, 1)], &[(1, 1)], 100.0),
                Reaction::new("bwd", &[(1, 1)], &[(0, 1)], 100.0),
            ],
        )
        .unwrap();
        let p = compute_scaling(&net, &net.initial_state()).unwrap();
        assert_eq!(p.n, 10_000.0);
        assert!(p.alpha.iter().all(|&a| close(a, 1.0)));
        assert!(p.beta.iter().all(|&b| close(b, 0.5)));
        assert!(close(p.gamma, 0.5));
        assert!(close(p.rho, 1.0));
    }

    #[test]
    fn classical_scaling_has_zero_gamma() {
        // A -> B at unit rate and 2A -> B at rate 1/N, both with O(N) counts.
        let n = 1000u64;
        let net = ReactionNetwork::new(
            vec![Species::new("A", n), Species::new("B", n)],
            vec![
                Reaction::new("conv", &[(0, 1)], &[(1, 1)], 1.0),
                Reaction::new("dimer", &[(0, 2)], &[(1, 1)], 1.0 / n as f64),
            ],
        )
        .unwrap();
        let p = compute_scaling(&net, &net.initial_state()).unwrap();
        assert!(close(p.gamma, 0.0));
        for k in 0..2 {
            assert!(close(p.c[k], 1.0));
            assert!(close(p.rho_k[k].unwrap(), 1.0));
        }
    }

    #[test]
    fn all_zero_state_with_zero_order_source() {
        let net = ReactionNetwork::new(
            vec![Species::new("S", 0)],
            vec![Reaction::new("birth", &[], &[(0, 1)], 1.0)],
        )
        .unwrap();
        let p = compute_scaling(&net, &net.initial_state()).unwrap();
        assert_eq!(p.alpha, vec![0.0]);
        assert_eq!(p.beta, vec![0.0]);
        assert_eq!(p.gamma, 0.0);
        assert_eq!(p.rho, 0.0);
    }

    #[test]
    fn no_reactions_is_an_error() {
        let net = ReactionNetwork::new(vec![Species::new("S", 4)], vec![]).unwrap();
        assert!(matches!(
            compute_scaling(&net, &net.initial_state()),
            Err(Error::ScalingUndefined(_))
        ));
    }

    #[test]
    fn a_of_h_examples() {
        let p = ScalingProfile {
            n: 1000.0,
            alpha: vec![],
            beta: vec![],
            gamma: 0.0,
            c: vec![],
            rho_k: vec![],
            rho: 1.0,
            nbar: 0.0,
        };
        assert!(close(a_of_h(&p, 1e-2), 1.1e-4));

        // Balance point N^gamma h = N^-rho makes the two terms equal.
        let q = ScalingProfile {
            gamma: 0.5,
            ..p.clone()
        };
        let h = libm::pow(q.n, -q.rho) / libm::pow(q.n, q.gamma);
        let scaled = libm::pow(q.n, q.gamma) * h;
        assert!(close(a_of_h(&q, h), 2.0 * scaled * scaled));

        let z = ScalingProfile {
            gamma: 0.0,
            rho: 0.0,
            ..p
        };
        assert!(close(a_of_h(&z, 0.3), 0.3 + 0.09));
    }
}
