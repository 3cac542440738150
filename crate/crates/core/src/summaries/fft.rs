use std::cell::RefCell;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Runs `f` with forward and inverse plans of length `n` from this thread's planner.
pub(crate) fn with_fft<R>(n: usize, f: impl FnOnce(&dyn Fft<f64>, &dyn Fft<f64>) -> R) -> R {
    let (fwd, inv): (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(n), p.plan_fft_inverse(n))
    });
    f(fwd.as_ref(), inv.as_ref())
}
