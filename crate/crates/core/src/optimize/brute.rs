//! Exhaustive grid search with coordinate refinement. Used as the reference
//! optimum when checking the other optimizers.

use num_complex::Complex64;

use super::{unit, GainQuadratic, PhaseVector};
use crate::error::{Error, Result};
use crate::spectra::ComplexMat;

/// Largest grid (`Q^M`) the exhaustive search will enumerate.
pub const BRUTE_FORCE_BUDGET: u128 = 10_000_000;

const REFINE_TOL: f64 = 1e-10;
const REFINE_MAX_SWEEPS: usize = 100_000;

/// Cyclic exact coordinate ascent from `start`: each `phi_m` is set to its
/// optimum given the others until no coefficient moves by more than
/// `1e-10`. Returns the final point and the objective after every update
/// (first entry is the starting value).
pub fn coordinate_ascent(
    quad: &GainQuadratic,
    start: &PhaseVector,
) -> Result<(PhaseVector, Vec<f64>)> {
    let m = quad.num_subsurfaces();
    Error::check_len("starting point", m, start.len())?;
    let r = quad.matrix();
    let mut v = start.as_slice().to_vec();
    v.push(Complex64::new(1.0, 0.0));
    let mut history = vec![quad.value_homogeneous(&v)];
    for _ in 0..REFINE_MAX_SWEEPS {
        let mut moved: f64 = 0.0;
        for i in 0..m {
            let s: Complex64 = (0..=m).filter(|&j| j != i).map(|j| r[(i, j)] * v[j]).sum();
            if s.norm() == 0.0 {
                continue;
            }
            let new = unit(s);
            moved = moved.max((new - v[i]).norm());
            v[i] = new;
            history.push(quad.value_homogeneous(&v));
        }
        if moved < REFINE_TOL {
            break;
        }
    }
    v.truncate(m);
    Ok((PhaseVector::project(&v), history))
}

/// Best point of the grid `{exp(j 2 pi q / Q)}^M`, then refined by
/// [`coordinate_ascent`].
pub fn brute_force_optimize(
    d_cfr: &[Complex64],
    g_cfr: &ComplexMat,
    grid_size: usize,
) -> Result<PhaseVector> {
    let quad = GainQuadratic::new(d_cfr, g_cfr)?;
    let m = quad.num_subsurfaces();
    if grid_size == 0 {
        return Err(Error::parameter("grid_size", "must be positive"));
    }
    let candidates = (grid_size as u128)
        .checked_pow(m as u32)
        .unwrap_or(u128::MAX);
    if candidates > BRUTE_FORCE_BUDGET {
        return Err(Error::BudgetExceeded {
            candidates,
            limit: BRUTE_FORCE_BUDGET,
        });
    }
    let points: Vec<Complex64> = (0..grid_size)
        .map(|q| {
            Complex64::from_polar(
                1.0,
                2.0 * std::f64::consts::PI * q as f64 / grid_size as f64,
            )
        })
        .collect();

    let mut digits = vec![0usize; m];
    let mut v: Vec<Complex64> = vec![points[0]; m];
    v.push(Complex64::new(1.0, 0.0));
    let mut best = (quad.value_homogeneous(&v), digits.clone());
    'search: loop {
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == m {
                break 'search;
            }
            digits[pos] += 1;
            if digits[pos] < grid_size {
                v[pos] = points[digits[pos]];
                break;
            }
            digits[pos] = 0;
            v[pos] = points[0];
            pos += 1;
        }
        let value = quad.value_homogeneous(&v);
        if value > best.0 {
            best = (value, digits.clone());
        }
    }
    let start = PhaseVector::project(&best.1.iter().map(|&q| points[q]).collect::<Vec<_>>());
    Ok(coordinate_ascent(&quad, &start)?.0)
}
