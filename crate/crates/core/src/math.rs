//! Small numerical helpers shared across modules.

/// `log(sum(exp(x)))` without overflow. Returns `-inf` for an empty slice or
/// when every entry is `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    log_sum_exp_iter(xs.iter().copied())
}

pub fn log_sum_exp_iter<I>(xs: I) -> f64
where
    I: Iterator<Item = f64> + Clone,
{
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `log(exp(a) + exp(b))`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Log-space convex combination `log((1 - s) e^a + s e^b)` for `s` in `[0, 1]`.
pub fn log_mix(a: f64, b: f64, s: f64) -> f64 {
    if s == 0.0 {
        return a;
    }
    if s == 1.0 {
        return b;
    }
    log_add_exp((-s).ln_1p() + a, s.ln() + b)
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse_matches_naive_and_survives_large_inputs() {
        let xs = [0.1, -0.3, 2.0];
        let naive = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs) - naive).abs() < 1e-15);
        let big = [1000.0, 1000.0];
        assert!((log_sum_exp(&big) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn log_mix_endpoints_are_exact() {
        assert_eq!(log_mix(-1.0, -2.0, 0.0), -1.0);
        assert_eq!(log_mix(-1.0, -2.0, 1.0), -2.0);
        let m = log_mix(0.5f64.ln(), 0.25f64.ln(), 0.5);
        assert!((m.exp() - 0.375).abs() < 1e-15);
        assert_eq!(log_mix(f64::NEG_INFINITY, f64::NEG_INFINITY, 0.3), f64::NEG_INFINITY);
    }

    #[test]
    fn slope_of_a_line() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [1.0, 3.0, 5.0];
        assert!((ls_slope(&xs, &ys) - 2.0).abs() < 1e-15);
    }
}
