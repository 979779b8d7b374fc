use serde::Serialize;

/// Streaming mean/variance accumulator (Welford, with Chan's merge).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

/// Mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    pub se: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let mean = self.mean + d * (other.n as f64 / n as f64);
        let m2 = self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64);
        Moments { n, mean, m2 }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance (zero for fewer than two samples).
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stat(&self) -> Stat {
        let se = if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        };
        Stat { mean: self.mean, se }
    }
}

/// Pairwise merge of an ordered slice; the tree shape depends only on the length.
pub(crate) fn pairwise<T: Clone>(items: &[T], merge: &impl Fn(&T, &T) -> T) -> Option<T> {
    match items.len() {
        0 => None,
        1 => Some(items[0].clone()),
        n => {
            let (a, b) = items.split_at(n / 2);
            let left = pairwise(a, merge)?;
            let right = pairwise(b, merge)?;
            Some(merge(&left, &right))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn merge_matches_single_pass(xs in prop::collection::vec(-1e3f64..1e3, 2..200), cut in 0usize..200) {
            let cut = cut % xs.len();
            let mut all = Moments::default();
            xs.iter().for_each(|&x| all.push(x));
            let mut a = Moments::default();
            let mut b = Moments::default();
            xs[..cut].iter().for_each(|&x| a.push(x));
            xs[cut..].iter().for_each(|&x| b.push(x));
            let m = a.merge(&b);
            prop_assert_eq!(m.count(), all.count());
            prop_assert!((m.mean() - all.mean()).abs() <= 1e-9 * (1.0 + all.mean().abs()));
            prop_assert!((m.variance() - all.variance()).abs() <= 1e-7 * (1.0 + all.variance()));
        }
    }

    #[test]
    fn known_values() {
        let mut m = Moments::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            m.push(x);
        }
        assert_eq!(m.mean(), 2.5);
        assert!((m.variance() - 5.0 / 3.0).abs() < 1e-15);
        let s = m.stat();
        assert!((s.se - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pairwise_order() {
        let v: Vec<u32> = (1..=7).collect();
        assert_eq!(pairwise(&v, &|a, b| a + b), Some(28));
        assert_eq!(pairwise::<u32>(&[], &|a, b| a + b), None);
    }
}
