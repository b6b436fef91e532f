//! Small numeric helpers shared across modules.

/// Neumaier-compensated sum. Order of accumulation is the iterator order,
/// so results are reproducible bit for bit.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Trapezoid-rule cumulative integral; the first entry is zero.
pub fn cumulative_trapezoid(times: &[f64], values: &[f64]) -> Vec<f64> {
    debug_assert_eq!(times.len(), values.len());
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    for i in 0..times.len() {
        if i > 0 {
            acc += 0.5 * (times[i] - times[i - 1]) * (values[i] + values[i - 1]);
        }
        out.push(acc);
    }
    out
}

/// `n` points log-spaced between `lo` and `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}

/// Relative difference `|a - b| / max(|a|, |b|, floor)`.
pub fn rel_diff(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut v = vec![1.0e16, 1.0, -1.0e16];
        v.extend(std::iter::repeat(1.0).take(10));
        assert_eq!(compensated_sum(v), 11.0);
    }

    #[test]
    fn trapezoid_of_linear_is_exact() {
        let t: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|x| 2.0 * x).collect();
        let c = cumulative_trapezoid(&t, &y);
        assert_eq!(c[0], 0.0);
        assert!((c[10] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn log_space_endpoints() {
        let v = log_space(1e-3, 1e3, 7);
        assert!((v[0] - 1e-3).abs() < 1e-18);
        assert!((v[6] - 1e3).abs() < 1e-9);
        assert!((v[3] - 1.0).abs() < 1e-12);
    }
}
