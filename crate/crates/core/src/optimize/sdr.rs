//! Semidefinite relaxation of the sum-gain problem with Gaussian
//! randomization.
//!
//! The lifted problem is `max tr(R V)` over Hermitian `V >= 0` with
//! `diag(V) = 1`. It is solved with a low-rank factorization `V = U^H U`
//! (unit-norm columns `u_i`, rank `k` with `k(k+1)/2 > n`) by exact
//! block-coordinate ascent: each sweep replaces `u_i` with the normalized
//! gradient `sum_{j != i} R[j,i] u_j`. Termination is certified with a dual
//! point: `z_i = Re (R V)_{ii}` shifted by `max(0, lambda_max(R - Diag z))`
//! is feasible for `min 1^T z s.t. Diag(z) >= R`, so the reported duality gap
//! is an upper bound on the distance to the SDP optimum.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use super::{unit, GainQuadratic, PhaseVector};
use crate::error::{Error, Result};
use crate::spectra::{gaussian_complex, ComplexMat};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions {
    /// Required relative duality gap.
    pub tolerance: f64,
    pub max_sweeps: usize,
    /// Sweeps between dual certificate evaluations once the iterates settle.
    pub check_every: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_sweeps: 20_000,
            check_every: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    /// `k x n` factor with unit-norm columns, `V = U^H U`.
    pub factor: ComplexMat,
    pub primal: f64,
    /// Value of a feasible dual point, `>= primal`.
    pub dual: f64,
    pub relative_gap: f64,
    pub sweeps: usize,
}

impl SdpSolution {
    pub fn gram(&self) -> ComplexMat {
        self.factor.adjoint() * &self.factor
    }
}

fn factor_rank(n: usize) -> usize {
    let mut k = 1;
    while k * (k + 1) / 2 <= n {
        k += 1;
    }
    (k + 1).min(n).max(1)
}

/// `sum_{j != i} R[j,i] u_j`.
fn partial_gradient(r: &ComplexMat, u: &ComplexMat, i: usize) -> Vec<Complex64> {
    let k = u.nrows();
    let mut g = vec![Complex64::new(0.0, 0.0); k];
    for j in 0..r.nrows() {
        if j == i {
            continue;
        }
        let w = r[(j, i)];
        if w == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (gi, uj) in g.iter_mut().zip(u.column(j).iter()) {
            *gi += w * uj;
        }
    }
    g
}

/// Objective and certified duality gap for the current factor.
fn certificate(r: &ComplexMat, u: &ComplexMat) -> (f64, f64) {
    let n = r.nrows();
    let rv = r * (u.adjoint() * u);
    let z: Vec<f64> = (0..n).map(|i| rv[(i, i)].re).collect();
    let primal: f64 = z.iter().sum();
    let mut slack = r.clone();
    for (i, zi) in z.iter().enumerate() {
        slack[(i, i)] -= Complex64::new(*zi, 0.0);
    }
    // Hermitize against round-off before the eigen solve.
    let slack = (&slack + slack.adjoint()) * Complex64::new(0.5, 0.0);
    let lambda_max = slack.symmetric_eigenvalues().max();
    let dual = primal + n as f64 * lambda_max.max(0.0);
    (primal, dual)
}

/// Solves `max tr(R V) s.t. V >= 0, diag(V) = 1` for Hermitian `R`.
pub fn solve_unit_diagonal_sdp<G: Rng + ?Sized>(
    r: &ComplexMat,
    options: &SdpOptions,
    rng: &mut G,
) -> Result<SdpSolution> {
    let n = r.nrows();
    Error::check_len("SDP cost matrix", n, r.ncols())?;
    if n == 0 {
        return Err(Error::parameter("r", "empty cost matrix"));
    }
    let scale = r.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let k = factor_rank(n);
    let mut u = DMatrix::from_fn(k, n, |_, _| gaussian_complex(1, 1.0, rng)[0]);
    for mut col in u.column_iter_mut() {
        let norm = col.norm();
        col /= Complex64::new(norm, 0.0);
    }
    if scale == 0.0 || !scale.is_finite() {
        return Ok(SdpSolution {
            factor: u,
            primal: 0.0,
            dual: 0.0,
            relative_gap: 0.0,
            sweeps: 0,
        });
    }
    let rn = r / Complex64::new(scale, 0.0);

    let mut stationarity = f64::INFINITY;
    let mut relative_gap = f64::INFINITY;
    for sweep in 1..=options.max_sweeps {
        stationarity = 0.0;
        for i in 0..n {
            let g = partial_gradient(&rn, &u, i);
            let norm = g.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if norm <= 1e-300 {
                continue;
            }
            for (slot, gi) in u.column_mut(i).iter_mut().zip(&g) {
                let new = gi / norm;
                stationarity = f64::max(stationarity, (new - *slot).norm());
                *slot = new;
            }
        }
        if stationarity < 1e-6 || sweep % options.check_every == 0 {
            let (primal, dual) = certificate(&rn, &u);
            relative_gap = (dual - primal) / primal.abs().max(f64::MIN_POSITIVE);
            if relative_gap <= options.tolerance {
                return Ok(SdpSolution {
                    factor: u,
                    primal: primal * scale,
                    dual: dual * scale,
                    relative_gap,
                    sweeps: sweep,
                });
            }
        }
    }
    Err(Error::SolverNotConverged {
        iterations: options.max_sweeps,
        stationarity,
        relative_gap,
    })
}

/// SDR with `n_randomizations` Gaussian candidates drawn with covariance `V`.
///
/// Each candidate is projected entrywise to unit modulus, rotated so the
/// reference (last) entry is 1, and scored on the sum-gain objective. The
/// best candidate is returned.
pub fn sdr_optimize<G: Rng + ?Sized>(
    d_cfr: &[Complex64],
    g_cfr: &ComplexMat,
    n_randomizations: usize,
    rng: &mut G,
) -> Result<PhaseVector> {
    sdr_optimize_with(d_cfr, g_cfr, n_randomizations, &SdpOptions::default(), rng)
}

pub fn sdr_optimize_with<G: Rng + ?Sized>(
    d_cfr: &[Complex64],
    g_cfr: &ComplexMat,
    n_randomizations: usize,
    options: &SdpOptions,
    rng: &mut G,
) -> Result<PhaseVector> {
    if n_randomizations == 0 {
        return Err(Error::parameter("n_randomizations", "must be at least 1"));
    }
    let quad = GainQuadratic::new(d_cfr, g_cfr)?;
    let m = quad.num_subsurfaces();
    let solution = solve_unit_diagonal_sdp(quad.matrix(), options, rng)?;
    let factor = &solution.factor;
    let k = factor.nrows();

    let mut best: Option<(f64, PhaseVector)> = None;
    let mut candidate = vec![Complex64::new(0.0, 0.0); m + 1];
    for _ in 0..n_randomizations {
        let draw = gaussian_complex(k, 1.0, rng);
        for (i, slot) in candidate.iter_mut().enumerate() {
            // xi = U^H r has covariance U^H U = V.
            let xi: Complex64 = factor
                .column(i)
                .iter()
                .zip(&draw)
                .map(|(a, b)| a.conj() * b)
                .sum();
            *slot = unit(xi);
        }
        let reference = candidate[m].conj();
        let phi = PhaseVector::project(
            &candidate[..m]
                .iter()
                .map(|v| v * reference)
                .collect::<Vec<_>>(),
        );
        let value = quad.value(&phi);
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, phi));
        }
    }
    Ok(best.expect("at least one randomization").1)
}
