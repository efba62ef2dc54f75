//! Small numeric helpers shared by the kernels.

/// `|x|^{p-2} x`, evaluated as `sign(x)|x|^{p-1}`; exactly zero at `x = 0`
/// for every `p`, which is the convention needed when `1 < p < 2`.
#[inline]
pub fn signed_pow(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if p == 2.0 {
        x
    } else {
        x.signum() * x.abs().powf(p - 1.0)
    }
}

#[inline]
pub fn abs_pow(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x * x
    } else if p == 1.0 {
        x.abs()
    } else {
        x.abs().powf(p)
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// `(Σ |x|^p)^{1/p}` with compensated accumulation.
pub fn lp_norm_of(values: &[f64], p: f64) -> f64 {
    compensated_sum(values.iter().map(|&x| abs_pow(x, p))).powf(1.0 / p)
}

pub fn sup_norm(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `max - min` of a slice (0 for empty input).
pub fn spread(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    hi - lo
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_pow_convention() {
        assert_eq!(signed_pow(0.0, 1.5), 0.0);
        assert_eq!(signed_pow(-1.0, 1.5), -1.0);
        assert!((signed_pow(4.0, 1.5) - 2.0).abs() < 1e-15);
        assert!((signed_pow(-2.0, 3.0) + 4.0).abs() < 1e-15);
    }

    #[test]
    fn compensation_recovers_small_terms() {
        let mut xs = vec![1.0e16];
        xs.extend(std::iter::repeat(1.0).take(1000));
        xs.push(-1.0e16);
        assert_eq!(compensated_sum(xs), 1000.0);
    }

    #[test]
    fn spread_of_slice() {
        assert_eq!(spread(&[]), 0.0);
        assert_eq!(spread(&[3.0, -1.0, 2.0]), 4.0);
    }
}
