use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        if self.sum.is_finite() {
            self.sum + self.compensation
        } else {
            self.sum
        }
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn kahan_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().collect::<KahanSum>().total()
}

/// Uniform draws addressed by `(seed, sample index)`.
///
/// Sample `i` of a `dims`-dimensional stream always reads the same words of the
/// ChaCha keystream, so any chunking of the index range reproduces the same points.
#[derive(Debug, Clone)]
pub struct CounterUniform {
    rng: ChaCha8Rng,
    dims: usize,
}

impl CounterUniform {
    pub fn new(seed: u64, dims: usize) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            dims,
        }
    }

    /// Position the stream at sample `index`.
    pub fn seek(&mut self, index: u64) {
        // each f64 consumes two 32-bit words
        self.rng
            .set_word_pos(u128::from(index) * self.dims as u128 * 2);
    }

    /// Write the next sample (coordinates in `[0, 1)`) into `out`.
    pub fn next_point(&mut self, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dims);
        for x in out.iter_mut() {
            *x = self.rng.gen::<f64>();
        }
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_and_std_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = kahan_sum(xs.iter().copied()) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = kahan_sum(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Ratio of means `Σy / Σx` with its delta-method standard error.
pub fn ratio_and_std_error(ys: &[f64], xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let my = kahan_sum(ys.iter().copied()) / n;
    let mx = kahan_sum(xs.iter().copied()) / n;
    let ratio = my / mx;
    if xs.len() < 2 {
        return (ratio, 0.0);
    }
    let var = kahan_sum(ys.iter().zip(xs).map(|(y, x)| {
        let r = y - ratio * x;
        r * r
    })) / (n - 1.0);
    (ratio, (var / n).sqrt() / mx.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_beats_naive() {
        let xs: Vec<f64> = std::iter::once(1.0)
            .chain(std::iter::repeat_n(1e-16, 10_000))
            .collect();
        let naive: f64 = xs.iter().sum();
        assert_eq!(naive, 1.0);
        assert!((kahan_sum(xs) - (1.0 + 1e-12)).abs() < 1e-20);
    }

    #[test]
    fn overflow_stays_infinite() {
        assert_eq!(kahan_sum([f64::INFINITY, 1.0]), f64::INFINITY);
        assert_eq!(kahan_sum([f64::MAX, f64::MAX, 1.0]), f64::INFINITY);
        assert!(kahan_sum([f64::INFINITY, f64::NEG_INFINITY]).is_nan());
    }

    #[test]
    fn counter_stream_is_chunk_independent() {
        let mut a = CounterUniform::new(42, 3);
        let mut sequential = vec![[0.0; 3]; 10];
        a.seek(0);
        for p in sequential.iter_mut() {
            a.next_point(p);
        }
        let mut b = CounterUniform::new(42, 3);
        for (i, expected) in sequential.iter().enumerate().rev() {
            let mut p = [0.0; 3];
            b.seek(i as u64);
            b.next_point(&mut p);
            assert_eq!(&p, expected);
        }
    }

    #[test]
    fn mean_and_error() {
        let (m, se) = mean_and_std_error(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((se - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
        let (r, _) = ratio_and_std_error(&[1.0, 3.0], &[2.0, 2.0]);
        assert_eq!(r, 1.0);
    }
}
