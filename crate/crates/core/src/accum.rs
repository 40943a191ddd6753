//! Streaming moment accumulators and fixed-order parallel reduction.

use rayon::prelude::*;

/// Replicates per parallel work unit. Results are combined in block order,
/// so the outcome does not depend on how blocks are scheduled.
pub(crate) const BLOCK: u64 = 4096;

/// Running count, mean and central moments up to order four.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Moments {
    pub n: f64,
    pub mean: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        let n1 = self.n;
        self.n += 1.0;
        let n = self.n;
        let delta = x - self.mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let t1 = delta * dn * n1;
        self.mean += dn;
        self.m4 += t1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * self.m2 - 4.0 * dn * self.m3;
        self.m3 += t1 * dn * (n - 2.0) - 3.0 * dn * self.m2;
        self.m2 += t1;
    }

    pub fn merge(&mut self, o: &Moments) {
        if o.n == 0.0 {
            return;
        }
        if self.n == 0.0 {
            *self = *o;
            return;
        }
        let (na, nb) = (self.n, o.n);
        let n = na + nb;
        let d = o.mean - self.mean;
        let d2 = d * d;
        let m2 = self.m2 + o.m2 + d2 * na * nb / n;
        let m3 = self.m3 + o.m3 + d * d2 * na * nb * (na - nb) / (n * n)
            + 3.0 * d * (na * o.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + o.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * o.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * d * (na * o.m3 - nb * self.m3) / n;
        *self = Moments { n, mean: self.mean + d * nb / n, m2, m3, m4 };
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2.0 {
            0.0
        } else {
            self.m2 / (self.n - 1.0)
        }
    }

    pub fn se_mean(&self) -> f64 {
        if self.n < 1.0 {
            return 0.0;
        }
        (self.variance() / self.n).sqrt()
    }

    /// Plug-in standard error of the sample variance.
    pub fn se_variance(&self) -> f64 {
        let n = self.n;
        if n < 4.0 {
            return f64::NAN;
        }
        let s2 = self.variance();
        let mu4 = self.m4 / n;
        ((mu4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
    }
}

/// Runs `f` over consecutive replicate ranges of size [`BLOCK`] in parallel
/// and returns the per-block results in block order.
pub(crate) fn map_blocks<T, F>(reps: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(std::ops::Range<u64>) -> T + Sync,
{
    let blocks = reps.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| f(b * BLOCK..((b + 1) * BLOCK).min(reps)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(xs: &[f64]) -> (f64, f64, f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let c = |p: i32| xs.iter().map(|x| (x - mean).powi(p)).sum::<f64>();
        (mean, c(2), c(3), c(4))
    }

    #[test]
    fn streaming_and_merged_moments_match_two_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37 % 101) as f64).sqrt() - 3.0).collect();
        let (mean, m2, m3, m4) = direct(&xs);

        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));

        let mut merged = Moments::default();
        for chunk in xs.chunks(77) {
            let mut part = Moments::default();
            chunk.iter().for_each(|&x| part.push(x));
            merged.merge(&part);
        }
        for m in [whole, merged] {
            assert!((m.mean - mean).abs() < 1e-12);
            assert!((m.m2 - m2).abs() < 1e-9 * m2);
            assert!((m.m3 - m3).abs() < 1e-8 * m2.powf(1.5));
            assert!((m.m4 - m4).abs() < 1e-9 * m4);
        }
    }

    #[test]
    fn blocks_come_back_in_order() {
        let out = map_blocks(3 * BLOCK + 5, |r| (r.start, r.end));
        assert_eq!(out.len(), 4);
        assert_eq!(out[3], (3 * BLOCK, 3 * BLOCK + 5));
        assert!(out.windows(2).all(|w| w[0].1 == w[1].0));
    }
}
