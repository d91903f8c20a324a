use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid_argument, Result};

/// Per-level target estimator variances.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub targets: Vec<f64>,
    /// Every `K_l` was zero; the budget was split evenly instead.
    pub degenerate: bool,
}

/// Minimizes `sum_l K_l / V_l` subject to `sum_l V_l = (epsilon / z)^2`.
///
/// The Lagrange conditions give `V_l` proportional to `sqrt(K_l)`. Levels
/// with `K_l = 0` get `V_l = 0` and are run at the minimum sample count.
pub fn allocate(costs: &[f64], epsilon: f64, z: f64) -> Result<Allocation> {
    if costs.is_empty() {
        return Err(invalid_argument("allocation needs at least one level"));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) || !(z.is_finite() && z > 0.0) {
        return Err(invalid_argument("epsilon and z must be finite and > 0"));
    }
    if costs.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
        return Err(invalid_argument("level costs K_l must be finite and >= 0"));
    }
    let budget = (epsilon / z) * (epsilon / z);
    let roots: Vec<f64> = costs.iter().map(|&k| libm::sqrt(k)).collect();
    let total: f64 = roots.iter().sum();
    if total == 0.0 {
        return Ok(Allocation {
            targets: vec![budget / costs.len() as f64; costs.len()],
            degenerate: true,
        });
    }
    Ok(Allocation {
        targets: roots.iter().map(|r| budget * r / total).collect(),
        degenerate: false,
    })
}

/// `sum_l K_l / V_l`, skipping levels with `K_l = 0`.
pub fn predicted_cost(costs: &[f64], targets: &[f64]) -> f64 {
    costs
        .iter()
        .zip(targets)
        .filter(|(k, _)| **k > 0.0)
        .map(|(k, v)| k / v)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_levels() {
        let a = allocate(&[4.0, 1.0], 1.96, 1.96).unwrap();
        assert!((a.targets[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((a.targets[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(!a.degenerate);
    }

    #[test]
    fn single_level_takes_whole_budget() {
        let a = allocate(&[7.0], 2.0, 1.0).unwrap();
        assert_eq!(a.targets, vec![4.0]);
    }

    #[test]
    fn equal_costs_split_evenly() {
        let a = allocate(&[3.0; 4], 1.0, 1.0).unwrap();
        assert!(a.targets.iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn zero_cost_levels() {
        let a = allocate(&[0.0, 9.0], 1.0, 1.0).unwrap();
        assert_eq!(a.targets, vec![0.0, 1.0]);
        let b = allocate(&[0.0, 0.0], 1.0, 1.0).unwrap();
        assert!(b.degenerate);
        assert_eq!(b.targets, vec![0.5, 0.5]);
        assert_eq!(predicted_cost(&[0.0, 9.0], &a.targets), 9.0);
    }

    #[test]
    fn bad_inputs() {
        assert!(allocate(&[], 1.0, 1.96).is_err());
        assert!(allocate(&[1.0], 0.0, 1.96).is_err());
        assert!(allocate(&[-1.0], 1.0, 1.96).is_err());
        assert!(allocate(&[f64::NAN], 1.0, 1.96).is_err());
    }
}
