//! Three-dimensional complex FFT on cubic grids, built from `rustfft`
//! line transforms.
//!
//! Layout is row-major `(i0, i1, i2)` with `i2` contiguous. Every line is
//! transformed independently, so the result does not depend on how the
//! lines are distributed over threads.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

pub(crate) struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();

/// Cached plan for an `n × n × n` transform.
pub(crate) fn plan(n: usize) -> Arc<Fft3> {
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Fft3 {
                n,
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

impl Fft3 {
    /// Unnormalized transform in place (`e^{-i…}` forward, `e^{+i…}` inverse).
    pub(crate) fn process(&self, data: &mut [Complex64], dir: Direction) {
        let n = self.n;
        let plane = n * n;
        assert_eq!(data.len(), plane * n, "buffer does not match grid");
        let fft = match dir {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        };

        // axis 2: contiguous lines
        data.par_chunks_mut(plane).for_each(|p| fft.process(p));

        // axis 1: transpose each plane, transform rows, transpose back
        data.par_chunks_mut(plane).for_each(|p| {
            let mut buf = vec![Complex64::new(0.0, 0.0); plane];
            transpose(p, &mut buf, n);
            fft.process(&mut buf);
            transpose(&buf, p, n);
        });

        // axis 0: gather (i0, i2) slabs for each i1
        let mut buf = vec![Complex64::new(0.0, 0.0); plane];
        for i1 in 0..n {
            for i0 in 0..n {
                let base = (i0 * n + i1) * n;
                for i2 in 0..n {
                    buf[i2 * n + i0] = data[base + i2];
                }
            }
            fft.process(&mut buf);
            for i0 in 0..n {
                let base = (i0 * n + i1) * n;
                for i2 in 0..n {
                    data[base + i2] = buf[i2 * n + i0];
                }
            }
        }
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const BLOCK: usize = 16;
    for ib in (0..n).step_by(BLOCK) {
        for jb in (0..n).step_by(BLOCK) {
            for i in ib..(ib + BLOCK).min(n) {
                for j in jb..(jb + BLOCK).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

