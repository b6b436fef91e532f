//! Adaptive Gauss–Kronrod (7/15) quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
// Gauss weights for the odd Kronrod nodes 1, 3, 5 and the centre
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_PANELS: usize = 4_000;

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive `∫_a^b f`: the panel with the largest error estimate
/// is bisected until the total estimate meets `max(rel·|I|, abs)`.
/// Returns the value and the final error estimate.
pub fn integrate_with_error(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel: f64,
    abs: f64,
) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let mut heap = std::collections::BinaryHeap::new();
    let (value, err) = gk15(&f, a, b);
    heap.push(Panel { a, b, value, err });
    let (mut total, mut err_total) = (value, err);
    for _ in 0..MAX_PANELS {
        if !total.is_finite() {
            return Err(Error::DivergentIntegrand(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        let floor = 64.0 * f64::EPSILON * total.abs();
        if err_total <= (rel * total.abs()).max(abs).max(floor) {
            break;
        }
        let p = heap.pop().expect("nonempty panel heap");
        let mid = 0.5 * (p.a + p.b);
        let (v1, e1) = gk15(&f, p.a, mid);
        let (v2, e2) = gk15(&f, mid, p.b);
        total += v1 + v2 - p.value;
        err_total += e1 + e2 - p.err;
        heap.push(Panel { a: p.a, b: mid, value: v1, err: e1 });
        heap.push(Panel { a: mid, b: p.b, value: v2, err: e2 });
    }
    // re-add from panels to shed accumulated update roundoff
    let mut vals: Vec<f64> = heap.iter().map(|p| p.value).collect();
    vals.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    let total = crate::numeric::compensated_sum(vals);
    let err_total: f64 = heap.iter().map(|p| p.err).sum();
    Ok((total, err_total))
}

/// `∫_a^b f` to relative tolerance `rel` (with absolute floor `abs`).
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel: f64, abs: f64) -> Result<f64> {
    let (v, e) = integrate_with_error(f, a, b, rel, abs)?;
    if e > 1e3 * (rel * v.abs()).max(abs).max(64.0 * f64::EPSILON * v.abs()) {
        return Err(Error::QuadratureFailed(e));
    }
    Ok(v)
}

/// `∫_0^∞ f` for a nonnegative integrand behaving like `c ρ^β` (`β > -1`)
/// near zero and decaying at infinity. The range is cut into dyadic
/// intervals; the piece below the smallest one is closed analytically.
pub fn integrate_half_line(f: impl Fn(f64) -> f64, beta: f64, rel: f64) -> Result<f64> {
    if !(beta > -1.0) {
        return Err(Error::DivergentIntegrand(format!(
            "integrand behaves like ρ^{beta} at the origin"
        )));
    }
    const K_LO: i32 = -90;
    const K_HI: i32 = 200;
    let mut pieces = Vec::new();
    let mut total = 0.0_f64;
    let mut quiet = 0;
    let mut seen = false;
    for k in K_LO..K_HI {
        let a = 2f64.powi(k);
        let v = integrate(&f, a, 2.0 * a, 1e-3 * rel, 0.0)?;
        pieces.push(v);
        total += v;
        if v > 0.0 {
            seen = true;
        }
        // stop once the tail has been negligible for a while
        if seen && v.abs() <= 1e-18 * total.abs() && a > 1.0 {
            quiet += 1;
            if quiet >= 4 {
                break;
            }
        } else {
            quiet = 0;
        }
        if k == K_HI - 1 && seen {
            return Err(Error::DivergentIntegrand(
                "integrand does not decay at large ρ".into(),
            ));
        }
    }
    if !seen {
        return Ok(0.0);
    }
    let eps = 2f64.powi(K_LO);
    let head = f(eps) * eps / (beta + 1.0);
    // sum small terms first
    pieces.push(head);
    pieces.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    Ok(crate::numeric::compensated_sum(pieces))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-14, 0.0).unwrap();
        assert!((v - 8.0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_half_line() {
        let v = integrate_half_line(|x| (-x * x).exp(), 0.0, 1e-12).unwrap();
        let exact = 0.5 * std::f64::consts::PI.sqrt();
        assert!((v - exact).abs() < 1e-12 * exact, "{v}");
    }

    #[test]
    fn singular_power_at_origin() {
        // ∫₀^∞ ρ^{-1/2} e^{-ρ} = Γ(1/2)
        let v = integrate_half_line(|x| x.powf(-0.5) * (-x).exp(), -0.5, 1e-10).unwrap();
        let exact = std::f64::consts::PI.sqrt();
        assert!((v - exact).abs() < 1e-9 * exact, "{v}");
        assert!(integrate_half_line(|x| 1.0 / x, -1.0, 1e-8).is_err());
    }
}
