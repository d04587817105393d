use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|p| {
        let mut p = p.borrow_mut();
        let (planner, cache) = &mut *p;
        cache
            .entry((n, inverse))
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                }
            })
            .clone()
    })
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Unnormalized in-place 2-D transform of an `n x n` row-major array.
pub(crate) fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    debug_assert_eq!(data.len(), n * n);
    let fft = plan(n, inverse);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(data, &mut scratch);
    transpose(data, n);
    fft.process_with_scratch(data, &mut scratch);
    transpose(data, n);
}
