//! Dyadic rescaling `f ↦ λ^a f(λ·)` with `λ = 2^m`, done by exact
//! coefficient reindexing on a fixed box.

use num_complex::Complex64;

use super::{GridSpec, SpectrumField};
use crate::error::{Error, Result};

/// Coefficients below this fraction of the largest one are treated as
/// roundoff when checking lattice admissibility.
const NEGLIGIBLE: f64 = 1e-14;

/// Returns the spectrum of `λ^a f(λx)` with `λ = 2^m`: the coefficient at
/// lattice vector `q` moves to `λq` and is multiplied by `λ^a`.
///
/// Fails with [`Error::ScaleOutOfBand`] if a non-negligible mode would land
/// on or beyond the Nyquist planes, or (for `m < 0`) off the lattice.
pub fn scale_field_dyadic(f: &SpectrumField, m: i32, a: f64) -> Result<SpectrumField> {
    let g = *f.grid();
    if m == 0 {
        return Ok(f.clone());
    }
    let factor = 2f64.powi(m).powf(a);
    let thr = NEGLIGIBLE * f.max_abs();
    let half = (g.n() / 2) as i64;
    let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
    for (idx, c) in f.coeffs().iter().enumerate() {
        if c.norm() <= thr {
            continue;
        }
        let q = g.mode(idx);
        let target = if m > 0 {
            q.map(|x| x << m)
        } else {
            let d = 1i64 << (-m);
            if q.iter().any(|x| x % d != 0) {
                return Err(Error::ScaleOutOfBand(m));
            }
            q.map(|x| x / d)
        };
        if target.iter().any(|x| x.abs() >= half) {
            return Err(Error::ScaleOutOfBand(m));
        }
        let t = g.index_of(target).ok_or(Error::ScaleOutOfBand(m))?;
        out[t] = c * factor;
    }
    Ok(SpectrumField::from_raw(g, out))
}

/// Re-expresses a spectrum supported on `2^m ℤ³` as a field on its
/// fundamental period cell: the grid `(n, L / 2^m)`. Norms measured on
/// the returned field are integrals over one period.
pub fn periodic_cell_view(f: &SpectrumField, m: u32) -> Result<SpectrumField> {
    let g = *f.grid();
    let lambda = 1i64 << m;
    let cell = GridSpec::new(g.n(), g.box_length() / lambda as f64)?;
    let thr = NEGLIGIBLE * f.max_abs();
    let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
    for (idx, c) in f.coeffs().iter().enumerate() {
        let p = g.mode(idx);
        if p.iter().all(|x| x % lambda == 0) {
            let q = p.map(|x| x / lambda);
            // |q| < n/(2λ) always fits on the cell grid
            let t = cell.index_of(q).expect("reindexed mode on cell grid");
            out[t] = *c;
        } else if c.norm() > thr {
            return Err(Error::InvalidArgument(format!(
                "spectrum not supported on the 2^{m} sublattice"
            )));
        }
    }
    Ok(SpectrumField::from_raw(cell, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> GridSpec {
        GridSpec::new(16, 2.0 * PI).unwrap()
    }

    #[test]
    fn identity_for_m_zero() {
        let g = grid();
        let mut f = SpectrumField::zeros(g);
        f.set_mode_pair([1, 2, 0], Complex64::new(0.3, -0.1));
        assert_eq!(scale_field_dyadic(&f, 0, 1.0).unwrap(), f);
    }

    #[test]
    fn single_mode_moves_and_doubles() {
        let g = grid();
        let mut f = SpectrumField::zeros(g);
        let c = Complex64::new(0.25, 0.5);
        f.set_mode_pair([1, -2, 3], c);
        let s = scale_field_dyadic(&f, 1, 1.0).unwrap();
        assert_eq!(s.coeff([2, -4, 6]), c * 2.0);
        assert_eq!(s.coeff([-2, 4, -6]), c.conj() * 2.0);
        assert_eq!(s.coeff([1, -2, 3]), Complex64::new(0.0, 0.0));
        let back = scale_field_dyadic(&s, -1, 1.0).unwrap();
        assert!(back.sub(&f).coeff_norm() < 1e-15);
    }

    #[test]
    fn out_of_band_rejected() {
        let g = grid();
        let mut f = SpectrumField::zeros(g);
        f.set_mode_pair([5, 0, 0], Complex64::new(1.0, 0.0));
        assert!(matches!(
            scale_field_dyadic(&f, 1, 1.0),
            Err(Error::ScaleOutOfBand(1))
        ));
        assert!(matches!(
            scale_field_dyadic(&f, -1, 1.0),
            Err(Error::ScaleOutOfBand(-1))
        ));
    }

    #[test]
    fn cell_view_reproduces_samples() {
        let g = grid();
        let mut f = SpectrumField::zeros(g);
        f.set_mode_pair([1, 0, 2], Complex64::new(0.5, 0.0));
        let s = scale_field_dyadic(&f, 1, 0.0).unwrap();
        let cell = periodic_cell_view(&s, 1).unwrap();
        assert_eq!(cell.grid().box_length(), PI);
        assert_eq!(cell.coeffs(), f.coeffs());
    }
}
