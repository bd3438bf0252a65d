//! Finite-difference validation of reverse-mode gradients.

use super::params::ParamStore;
use super::tape::{differentiate, Tape, Var};
use crate::error::Result;

/// Relative discrepancy `|a - b| / max(|a|, |b|, 1)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Compares the reverse-mode gradient of `f` with central differences of step `h` for every
/// scalar in `store`, returning the largest relative error.
///
/// Inputs that should be checked too are registered as parameters of the store.
pub fn grad_check<F>(store: &mut ParamStore, h: f64, f: F) -> Result<f64>
where
    F: Fn(&mut Tape<'_>) -> Var,
{
    let analytic = {
        let mut tape = Tape::new(store);
        let loss = f(&mut tape);
        differentiate(&tape, loss)?
    };
    let eval = |store: &ParamStore| {
        let mut tape = Tape::new(store);
        let loss = f(&mut tape);
        tape.value(loss).item()
    };

    let mut worst: f64 = 0.0;
    for p in 0..store.len() {
        for k in 0..store.values()[p].len() {
            let orig = store.values()[p].data()[k];
            store.values_mut()[p].data_mut()[k] = orig + h;
            let up = eval(store);
            store.values_mut()[p].data_mut()[k] = orig - h;
            let down = eval(store);
            store.values_mut()[p].data_mut()[k] = orig;
            let numeric = (up - down) / (2.0 * h);
            worst = worst.max(relative_error(analytic[p].data()[k], numeric));
        }
    }
    Ok(worst)
}
