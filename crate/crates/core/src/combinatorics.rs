//! Binomials, subset iteration and numerically careful sums.

/// Exact `C(n, k)`, or `None` on u128 overflow. Zero when `k > n`.
pub fn choose(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at each step.
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// `C(n, k)` with negative or oversized lower index mapped to zero.
pub fn choose_signed(n: i64, k: i64) -> Option<u128> {
    if n < 0 || k < 0 || k > n {
        return Some(0);
    }
    choose(n as u64, k as u64)
}

/// `ln C(n, k)`; `-inf` when the binomial is zero.
pub fn ln_choose(n: i64, k: i64) -> f64 {
    if n < 0 || k < 0 || k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    let mut acc = 0.0;
    for i in 0..k {
        acc += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    acc
}

/// `C(n, kr) * C(n - kr, kl)`, saturating at `u128::MAX`.
pub fn placement_count(n: usize, kr: usize, kl: usize) -> u128 {
    if kr + kl > n {
        return 0;
    }
    match (choose(n as u64, kr as u64), choose((n - kr) as u64, kl as u64)) {
        (Some(a), Some(b)) => a.saturating_mul(b),
        _ => u128::MAX,
    }
}

/// Advance `idx` to the next `k`-subset of `0..n` in lexicographic order.
/// Returns `false` once the last subset has been passed.
pub fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Calls `f` on every `k`-subset of `pool` (lexicographic in positions).
pub fn for_each_subset<F: FnMut(&[usize])>(pool: &[usize], k: usize, mut f: F) {
    let n = pool.len();
    if k > n {
        return;
    }
    let mut pos: Vec<usize> = (0..k).collect();
    let mut buf = vec![0usize; k];
    loop {
        for (b, &p) in buf.iter_mut().zip(&pos) {
            *b = pool[p];
        }
        f(&buf);
        if k == 0 || !next_combination(&mut pos, n) {
            break;
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(mut self, other: CompensatedSum) -> CompensatedSum {
        self.add(other.sum);
        self.add(other.comp);
        self
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Accumulates `ln Σ exp(x_i)` without overflow. Terms are grouped by a
/// running maximum and the scaled mantissa sum is compensated.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: CompensatedSum,
}

impl Default for LogSumExp {
    fn default() -> Self {
        LogSumExp { max: f64::NEG_INFINITY, scaled: CompensatedSum::default() }
    }
}

impl LogSumExp {
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            let rescale = (self.max - x).exp();
            let old = self.scaled.value() * rescale;
            self.scaled = CompensatedSum::default();
            self.scaled.add(old);
            self.max = x;
        }
        self.scaled.add((x - self.max).exp());
    }

    pub fn merge(mut self, other: LogSumExp) -> LogSumExp {
        if other.max == f64::NEG_INFINITY {
            return self;
        }
        if self.max == f64::NEG_INFINITY {
            return other;
        }
        if other.max > self.max {
            return other.merge(self);
        }
        self.scaled.add(other.scaled.value() * (other.max - self.max).exp());
        self
    }

    pub fn ln(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.value().ln()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_binomials() {
        assert_eq!(choose(5, 2), Some(10));
        assert_eq!(choose(5, 0), Some(1));
        assert_eq!(choose(3, 4), Some(0));
        assert_eq!(choose_signed(4, -1), Some(0));
        assert_eq!(choose(100, 50), Some(100891344545564193334812497256));
        assert_eq!(choose(400, 200), None);
        assert!((ln_choose(100, 50) - (100891344545564193334812497256f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn placements() {
        assert_eq!(placement_count(8, 2, 2), 28 * 15);
        assert_eq!(placement_count(4, 1, 1), 12);
        assert_eq!(placement_count(3, 2, 2), 0);
    }

    #[test]
    fn subsets_are_lexicographic_and_complete() {
        let mut seen = Vec::new();
        for_each_subset(&[0, 1, 2, 3], 2, |s| seen.push(s.to_vec()));
        assert_eq!(seen, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        let mut empty = 0;
        for_each_subset(&[5, 6], 0, |s| {
            assert!(s.is_empty());
            empty += 1;
        });
        assert_eq!(empty, 1);
    }

    #[test]
    fn logsumexp_matches_direct() {
        let xs = [-3.0, 0.5, 2.0, -700.0, 1.0];
        let mut acc = LogSumExp::default();
        for &x in &xs {
            acc.add(x);
        }
        let direct: f64 = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((acc.ln() - direct).abs() < 1e-14);

        let mut a = LogSumExp::default();
        a.add(-3.0);
        a.add(2.0);
        let mut b = LogSumExp::default();
        b.add(0.5);
        b.add(1.0);
        b.add(-700.0);
        assert!((a.merge(b).ln() - direct).abs() < 1e-14);
        assert_eq!(LogSumExp::default().ln(), f64::NEG_INFINITY);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s: CompensatedSum = [1e16, 1.0, -1e16, 1.0].into_iter().collect();
        assert_eq!(s.value(), 2.0);
    }
}
