//! Small floating-point helpers shared across modules.

/// Log-sum-exp with the usual max shift; tolerates empty input and -inf.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = values.iter().map(|v| (v - m).exp()).sum();
    m + s.ln()
}

/// Kahan-compensated sum; keeps normalization error independent of length.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse_is_shift_invariant() {
        let a = log_sum_exp(&[1000.0, 1000.0]);
        assert!((a - (1000.0 + 2.0f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn kahan_beats_naive_on_long_sums() {
        let n = 1 << 20;
        let v = 1.0 / n as f64;
        let s = kahan_sum((0..n).map(|_| v));
        assert!((s - 1.0).abs() < 1e-15);
    }
}
