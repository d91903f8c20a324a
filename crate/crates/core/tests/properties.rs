use ctmc_mlmc::coupling::{coupled_exact_exact, coupled_exact_tau, coupled_tau_pair, ChannelMap};
use ctmc_mlmc::mlmc::{allocate, predicted_cost};
use ctmc_mlmc::model::compute_scaling;
use ctmc_mlmc::paths::{exact_path, tau_leap_path, ExactMethod, SimOptions};
use ctmc_mlmc::{RandomStream, Reaction, ReactionNetwork, Species, State};
use proptest::prelude::*;

fn reaction_strategy(species: usize) -> impl Strategy<Value = Reaction> {
    let side = proptest::collection::vec((0..species, 1u32..4), 0..3);
    (side.clone(), side, 0.0f64..50.0).prop_map(|(r, p, k)| Reaction::new("r", &r, &p, k))
}

/// Reactions that turn `a` molecules of one kind into `a` molecules of
/// others, so the total count is conserved. Rates are kept small enough that
/// tau-leaping at the step used below does not overdraw into the unstable
/// regime.
fn conservative_network() -> impl Strategy<Value = ReactionNetwork> {
    let reaction =
        (0usize..3, 0usize..3, 0usize..3, 1u32..3, 0.01f64..2.0).prop_map(|(i, j, k, a, rate)| {
            if a == 1 {
                Reaction::new("r", &[(i, 1)], &[(j, 1)], rate)
            } else {
                Reaction::new("r", &[(i, 2)], &[(j, 1), (k, 1)], rate / 200.0)
            }
        });
    (
        proptest::collection::vec(reaction, 1..5),
        proptest::collection::vec(0u64..60, 3),
    )
        .prop_map(|(rs, x)| {
            let species = x
                .iter()
                .enumerate()
                .map(|(i, &n)| Species::new(format!("S{i}"), n))
                .collect();
            ReactionNetwork::new(species, rs).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn propensities_are_nonnegative_and_respect_requirements(
        r in reaction_strategy(3),
        counts in proptest::collection::vec(-5i64..20, 3),
    ) {
        let a = r.propensity(&counts);
        prop_assert!(a >= 0.0);
        let short = r.reactants().iter().any(|&(i, nu)| counts[i] < i64::from(nu));
        if short {
            prop_assert_eq!(a, 0.0);
        }
    }

    #[test]
    fn total_count_is_conserved_by_every_simulator(net in conservative_network(), seed in any::<u64>()) {
        let x0 = net.initial_counts();
        let total: i64 = x0.iter().sum();
        let opts = SimOptions::default();
        let stream = RandomStream::new(seed, 0);
        let sum = |c: &[i64]| c.iter().sum::<i64>();

        for method in [ExactMethod::NextReaction, ExactMethod::Direct] {
            let o = SimOptions { exact_method: method, ..opts };
            let r = exact_path(&net, &x0, 2.0, &o, &mut stream.clone()).unwrap();
            prop_assert_eq!(sum(&r.final_state.counts), total);
        }
        let r = tau_leap_path(&net, &x0, 2.0, 0.05, &opts, &mut stream.clone()).unwrap();
        prop_assert_eq!(sum(&r.final_state.counts), total);
        let r = coupled_tau_pair(&net, &x0, 2.0, 0.05, 2, &opts, &stream).unwrap();
        prop_assert_eq!(sum(&r.fine_final.counts), total);
        prop_assert_eq!(sum(&r.coarse_final.counts), total);
        let r = coupled_exact_tau(&net, &x0, 2.0, 0.05, &opts, &stream).unwrap();
        prop_assert_eq!(sum(&r.fine_final.counts), total);
        prop_assert_eq!(sum(&r.coarse_final.counts), total);
        let map = ChannelMap::identity(&net);
        let r = coupled_exact_exact(&net, &net, &x0, &x0, 2.0, &map, &opts, &stream).unwrap();
        prop_assert_eq!(sum(&r.fine_final.counts), total);
        prop_assert_eq!(sum(&r.coarse_final.counts), total);
        prop_assert!(r.fine_final.counts.iter().all(|&c| c >= 0));
    }

    #[test]
    fn scaling_speeds_never_exceed_jump_sizes(
        rs in proptest::collection::vec(reaction_strategy(3), 1..6),
        counts in proptest::collection::vec(0i64..100_000, 3),
    ) {
        let species = (0..3).map(|i| Species::new(format!("S{i}"), 0)).collect();
        let net = ReactionNetwork::new(species, rs).unwrap();
        prop_assume!(net.null_reactions().len() < net.num_reactions());
        let p = compute_scaling(&net, &State::new(counts)).unwrap();
        let mut max_gap = f64::NEG_INFINITY;
        for (c, rho) in p.c.iter().zip(&p.rho_k) {
            if let Some(rho) = rho {
                prop_assert!(c - rho <= 1e-9);
                max_gap = max_gap.max(c - rho);
            }
        }
        prop_assert!(max_gap.abs() <= 1e-9);
        prop_assert!(p.rho >= 0.0);
    }

    #[test]
    fn allocation_beats_feasible_perturbations(
        ks in proptest::collection::vec(0.01f64..1e4, 2..6),
        shift in proptest::collection::vec(-1.0f64..1.0, 6),
        eps in 0.1f64..10.0,
    ) {
        let a = allocate(&ks, eps, 1.96).unwrap();
        let budget = (eps / 1.96) * (eps / 1.96);
        prop_assert!((a.targets.iter().sum::<f64>() / budget - 1.0).abs() < 1e-12);
        // Move mass along a zero-sum direction while staying positive.
        let mean: f64 = shift[..ks.len()].iter().sum::<f64>() / ks.len() as f64;
        let dir: Vec<f64> = shift[..ks.len()].iter().map(|s| s - mean).collect();
        let limit = a.targets.iter().zip(&dir)
            .filter(|(_, d)| **d < 0.0)
            .map(|(v, d)| -v / d)
            .fold(f64::INFINITY, f64::min);
        let step = 0.5 * limit.min(1.0);
        let moved: Vec<f64> = a.targets.iter().zip(&dir).map(|(v, d)| v + step * d).collect();
        prop_assert!(predicted_cost(&ks, &a.targets) <= predicted_cost(&ks, &moved) * (1.0 + 1e-12));
    }
}
