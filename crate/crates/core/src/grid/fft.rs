//! Two-dimensional FFT on square row-major buffers, built from cached
//! one-dimensional `rustfft` plans.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

// Below this side length the rayon fan-out costs more than it saves.
const PARALLEL_MIN_N: usize = 64;

#[derive(Clone)]
pub(crate) struct Plan2d {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn cache() -> &'static RwLock<HashMap<usize, Plan2d>> {
    static PLANS: OnceLock<RwLock<HashMap<usize, Plan2d>>> = OnceLock::new();
    PLANS.get_or_init(|| RwLock::new(HashMap::new()))
}

pub(crate) fn plan(n: usize) -> Plan2d {
    if let Some(p) = cache().read().expect("fft cache poisoned").get(&n) {
        return p.clone();
    }
    let mut planner = FftPlanner::new();
    let p = Plan2d {
        n,
        forward: planner.plan_fft_forward(n),
        inverse: planner.plan_fft_inverse(n),
    };
    cache()
        .write()
        .expect("fft cache poisoned")
        .entry(n)
        .or_insert(p)
        .clone()
}

impl Plan2d {
    /// Unnormalised `Σ_j e^{-2πi jm/N} u_j` along both axes.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// Unnormalised `Σ_m e^{+2πi jm/N} û_m` along both axes.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
    }

    /// [`Self::forward`] without the final transpose: the output holds
    /// `û[m2][m1]`. Only meaningful for multipliers symmetric in `(m1, m2)`.
    pub(crate) fn forward_transposed(&self, data: &mut [Complex64]) {
        rows(data, self.n, &self.forward);
        transpose_in_place(data, self.n);
        rows(data, self.n, &self.forward);
    }

    /// Inverse of [`Self::forward_transposed`]'s layout.
    pub(crate) fn inverse_transposed(&self, data: &mut [Complex64]) {
        rows(data, self.n, &self.inverse);
        transpose_in_place(data, self.n);
        rows(data, self.n, &self.inverse);
    }

    fn run(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n);
        rows(data, n, fft);
        transpose_in_place(data, n);
        rows(data, n, fft);
        transpose_in_place(data, n);
    }
}

fn rows(data: &mut [Complex64], n: usize, fft: &Arc<dyn Fft<f64>>) {
    if n >= PARALLEL_MIN_N {
        let rows_per_task = (n / rayon::current_num_threads().max(1)).max(8);
        data.par_chunks_mut(n * rows_per_task).for_each(|block| {
            let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
            fft.process_with_scratch(block, &mut scratch);
        });
    } else {
        fft.process(data);
    }
}

fn transpose_in_place(d: &mut [Complex64], n: usize) {
    const B: usize = 16;
    if n % B != 0 {
        for i in 0..n {
            for j in i + 1..n {
                d.swap(i * n + j, j * n + i);
            }
        }
        return;
    }
    for ib in (0..n).step_by(B) {
        for jb in (ib..n).step_by(B) {
            for i in ib..ib + B {
                let j0 = if ib == jb { i + 1 } else { jb };
                for j in j0..jb + B {
                    d.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}
