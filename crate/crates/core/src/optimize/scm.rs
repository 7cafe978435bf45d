//! Strongest-CIR maximization: pick the time tap with the largest coherent
//! magnitude and co-phase every sub-surface to the direct path on that tap.

use num_complex::Complex64;

use super::PhaseVector;
use crate::error::{Error, Result};
use crate::spectra::ComplexMat;

/// `argmax_l (sum_m |g[m,l]| + |d[l]|)^2`, smallest index on ties.
pub fn strongest_tap(d_taps: &[Complex64], g_taps: &ComplexMat) -> Result<usize> {
    if d_taps.is_empty() {
        return Err(Error::parameter("d_taps", "need at least one tap"));
    }
    Error::check_len("cascaded CIR taps", d_taps.len(), g_taps.ncols())?;
    let mut best = (0, f64::NEG_INFINITY);
    for (l, d) in d_taps.iter().enumerate() {
        let strength = (g_taps.column(l).iter().map(|g| g.norm()).sum::<f64>() + d.norm()).powi(2);
        if strength > best.1 {
            best = (l, strength);
        }
    }
    Ok(best.0)
}

/// `phi_m = exp(j(arg d[l*] - arg g[m,l*]))` on the strongest tap `l*`.
///
/// If every tap at `l*` is zero there is nothing to align to and all
/// coefficients are 1.
pub fn scm_optimize(d_taps: &[Complex64], g_taps: &ComplexMat) -> Result<PhaseVector> {
    if g_taps.nrows() == 0 {
        return Err(Error::parameter("g_taps", "need at least one sub-surface"));
    }
    let l = strongest_tap(d_taps, g_taps)?;
    let d = d_taps[l];
    let column = g_taps.column(l);
    if d.norm() == 0.0 && column.iter().all(|g| g.norm() == 0.0) {
        return Ok(PhaseVector::ones(g_taps.nrows()));
    }
    let d_angle = d.arg();
    Ok(PhaseVector::from_angles(
        &column.iter().map(|g| d_angle - g.arg()).collect::<Vec<_>>(),
    ))
}
