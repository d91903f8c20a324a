/// One-pass mean and variance (Welford), mergeable with Chan's formula.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &Welford) -> Welford {
        if other.n == 0 {
            return *self;
        }
        if self.n == 0 {
            return *other;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let (na, nb, nf) = (self.n as f64, other.n as f64, n as f64);
        Welford {
            n,
            mean: self.mean + delta * nb / nf,
            m2: self.m2 + other.m2 + delta * delta * na * nb / nf,
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero with fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        }
    }

    /// Variance of the sample mean, `s^2 / n`.
    pub fn mean_variance(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.variance() / self.n as f64
        }
    }
}

/// Outcome of one level sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    /// The level summand, e.g. `f(Z_l) - f(Z_{l-1})`.
    pub value: f64,
    /// `f` of the fine member alone.
    pub fine_value: f64,
    pub updates: u64,
    pub fine_updates: u64,
}

/// Streaming statistics of a level.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LevelAccumulator {
    pub summand: Welford,
    pub fine: Welford,
    pub updates: u64,
    pub fine_updates: u64,
}

impl LevelAccumulator {
    #[inline]
    pub fn push(&mut self, s: &Sample) {
        self.summand.push(s.value);
        self.fine.push(s.fine_value);
        self.updates += s.updates;
        self.fine_updates += s.fine_updates;
    }

    pub fn merge(&self, other: &LevelAccumulator) -> LevelAccumulator {
        LevelAccumulator {
            summand: self.summand.merge(&other.summand),
            fine: self.fine.merge(&other.fine),
            updates: self.updates + other.updates,
            fine_updates: self.fine_updates + other.fine_updates,
        }
    }

    pub fn count(&self) -> u64 {
        self.summand.count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_pass(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn empty_and_single() {
        let mut w = Welford::new();
        assert_eq!(w.variance(), 0.0);
        assert_eq!(w.mean_variance(), 0.0);
        w.push(3.0);
        assert_eq!(w.mean(), 3.0);
        assert_eq!(w.variance(), 0.0);
    }

    #[test]
    fn large_offset_is_stable() {
        let mut w = Welford::new();
        for i in 0..1000 {
            w.push(1e9 + (i % 2) as f64);
        }
        assert!((w.variance() - 0.25025025025).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn matches_two_pass(xs in proptest::collection::vec(-1e4f64..1e4, 2..200)) {
            let mut w = Welford::new();
            xs.iter().for_each(|&x| w.push(x));
            let (m, v) = two_pass(&xs);
            prop_assert!((w.mean() - m).abs() <= 1e-9 * (1.0 + m.abs()));
            prop_assert!((w.variance() - v).abs() <= 1e-7 * (1.0 + v));
        }

        #[test]
        fn merge_equals_sequential(xs in proptest::collection::vec(-1e3f64..1e3, 2..200), cut in 0usize..200) {
            let cut = cut.min(xs.len());
            let mut all = Welford::new();
            xs.iter().for_each(|&x| all.push(x));
            let (mut a, mut b) = (Welford::new(), Welford::new());
            xs[..cut].iter().for_each(|&x| a.push(x));
            xs[cut..].iter().for_each(|&x| b.push(x));
            let m = a.merge(&b);
            prop_assert_eq!(m.count(), all.count());
            prop_assert!((m.mean() - all.mean()).abs() <= 1e-9 * (1.0 + all.mean().abs()));
            prop_assert!((m.variance() - all.variance()).abs() <= 1e-7 * (1.0 + all.variance()));
        }
    }
}
