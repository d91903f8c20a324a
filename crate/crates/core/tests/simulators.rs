mod common;

use common::{decay, isomerization, mm_inf, moments};
use ctmc_mlmc::paths::{exact_path, tau_leap_path, ExactMethod, SimOptions};
use ctmc_mlmc::RandomStream;

fn exact_finals(
    net: &ctmc_mlmc::ReactionNetwork,
    t: f64,
    n: u64,
    seed: u64,
    method: ExactMethod,
) -> Vec<f64> {
    let x0 = net.initial_counts();
    let opts = SimOptions {
        exact_method: method,
        ..SimOptions::default()
    };
    (0..n)
        .map(|i| {
            let mut s = RandomStream::new(seed, i);
            exact_path(net, &x0, t, &opts, &mut s)
                .unwrap()
                .final_state
                .counts[0] as f64
        })
        .collect()
}

fn tau_finals(net: &ctmc_mlmc::ReactionNetwork, t: f64, h: f64, n: u64, seed: u64) -> Vec<f64> {
    let x0 = net.initial_counts();
    (0..n)
        .map(|i| {
            let mut s = RandomStream::new(seed, i);
            tau_leap_path(net, &x0, t, h, &SimOptions::default(), &mut s)
                .unwrap()
                .final_state
                .counts[0] as f64
        })
        .collect()
}

#[test]
fn exact_decay_mean_next_reaction() {
    let net = decay(1.0, 1000);
    let (mean, _) = moments(&exact_finals(
        &net,
        1.0,
        100_000,
        11,
        ExactMethod::NextReaction,
    ));
    let truth = 1000.0 * (-1.0f64).exp();
    assert!((mean - truth).abs() <= 1.5, "mean {mean} vs {truth}");
}

#[test]
fn exact_decay_mean_direct() {
    let net = decay(1.0, 1000);
    let (mean, var) = moments(&exact_finals(&net, 1.0, 100_000, 12, ExactMethod::Direct));
    let p = (-1.0f64).exp();
    assert!((mean - 1000.0 * p).abs() <= 1.5, "mean {mean}");
    // Binomial(1000, e^-1) variance, loose band.
    let v = 1000.0 * p * (1.0 - p);
    assert!((var / v - 1.0).abs() < 0.03, "variance {var} vs {v}");
}

#[test]
fn mm_infinity_transient_mean() {
    let net = mm_inf(10.0, 1.0);
    let (mean, _) = moments(&exact_finals(
        &net,
        8.0,
        100_000,
        13,
        ExactMethod::NextReaction,
    ));
    let truth = 10.0 * (1.0 - (-8.0f64).exp());
    assert!((mean - truth).abs() <= 0.05, "mean {mean} vs {truth}");
}

#[test]
fn tau_leap_decay_mean_recursion() {
    let net = decay(1.0, 10_000);
    let n = 100_000;
    let (mean, var) = moments(&tau_finals(&net, 1.0, 0.25, n, 14));
    let truth = 10_000.0 * 0.75f64.powi(4);
    assert_eq!(truth, 3164.0625);
    assert!(
        (mean - truth).abs() <= 4.0 * (var / n as f64).sqrt(),
        "mean {mean} vs {truth}"
    );
}

#[test]
fn tau_leap_single_step_when_h_exceeds_horizon() {
    // One step: final = x0 - Poisson(1000 * T).
    let net = decay(1.0, 1000);
    let n = 50_000;
    let finals = tau_finals(&net, 0.5, 1.0, n, 15);
    let (mean, var) = moments(&finals);
    assert!((mean - 500.0).abs() <= 4.0 * (500.0 / n as f64).sqrt());
    assert!((var / 500.0 - 1.0).abs() < 0.05);
    let x0 = net.initial_counts();
    let mut s = RandomStream::new(15, 0);
    let r = tau_leap_path(&net, &x0, 0.5, 1.0, &SimOptions::default(), &mut s).unwrap();
    assert_eq!(r.updates, 1);
}

#[test]
fn tau_leap_weak_bias_is_first_order() {
    let x0 = 1000.0;
    let net = decay(1.0, 1000);
    let n = 100_000;
    let exact = x0 * (-1.0f64).exp();
    let mut biases = Vec::new();
    for (j, h) in [1.0 / 9.0, 1.0 / 27.0].into_iter().enumerate() {
        let (mean, var) = moments(&tau_finals(&net, 1.0, h, n, 16 + j as u64));
        let steps = (1.0 / h).round() as i32;
        let analytic = x0 * ((1.0 - h).powi(steps) - (-1.0f64).exp());
        let bias = mean - exact;
        assert!(
            (bias - analytic).abs() <= 4.0 * (var / n as f64).sqrt(),
            "h={h}: bias {bias} vs {analytic}"
        );
        biases.push(bias);
    }
    let ratio = biases[0].abs() / biases[1].abs();
    assert!((2.0..=4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn symmetric_isomerization_keeps_its_mean() {
    let net = isomerization(1.0);
    let n = 20_000;
    let (mean, var) = moments(&exact_finals(&net, 1.0, n, 17, ExactMethod::NextReaction));
    assert!(
        (mean - 1000.0).abs() <= 4.0 * (var / n as f64).sqrt(),
        "mean {mean}"
    );
}

#[test]
fn isomerization_conserves_total() {
    let net = isomerization(10.0);
    let x0 = net.initial_counts();
    for i in 0..200 {
        for method in [ExactMethod::NextReaction, ExactMethod::Direct] {
            let opts = SimOptions {
                exact_method: method,
                ..SimOptions::default()
            };
            let r = exact_path(&net, &x0, 1.0, &opts, &mut RandomStream::new(18, i)).unwrap();
            assert_eq!(r.final_state.counts.iter().sum::<i64>(), 200);
        }
        let r = tau_leap_path(
            &net,
            &x0,
            1.0,
            0.3,
            &SimOptions::default(),
            &mut RandomStream::new(19, i),
        )
        .unwrap();
        assert_eq!(r.final_state.counts.iter().sum::<i64>(), 200);
    }
}

#[test]
fn updates_are_reproducible_and_additive() {
    let net = decay(1.0, 1000);
    let x0 = net.initial_counts();
    let opts = SimOptions::default();
    let run = |i| exact_path(&net, &x0, 1.0, &opts, &mut RandomStream::new(20, i)).unwrap();
    let total: u64 = (0..50).map(|i| run(i).updates).sum();
    let again: u64 = (0..50).map(|i| run(i).updates).sum();
    assert_eq!(total, again);
    for i in 0..50 {
        let r = run(i);
        assert_eq!(r.updates as i64, 1000 - r.final_state.counts[0]);
    }
}
