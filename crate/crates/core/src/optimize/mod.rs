//! Reflection-coefficient optimization and rate evaluation.
//!
//! All optimizers target the sum power gain `sum_n |sum_m phi_m G[n,m] + D[n]|^2`
//! over unit-modulus `phi`, which is the Jensen upper bound of the OFDM rate
//! with constant terms dropped.

mod brute;
mod scm;
mod sdr;

pub use brute::{brute_force_optimize, coordinate_ascent, BRUTE_FORCE_BUDGET};
pub use scm::{scm_optimize, strongest_tap};
pub use sdr::{sdr_optimize, sdr_optimize_with, solve_unit_diagonal_sdp, SdpOptions, SdpSolution};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::estimation::ChannelEstimate;
use crate::spectra::{idft, ComplexMat, ComplexVec};

const UNIT_MODULUS_TOL: f64 = 1e-12;

/// `M` unit-modulus IRS reflection coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector(Vec<Complex64>);

impl PhaseVector {
    pub fn new(phi: Vec<Complex64>) -> Result<Self> {
        if let Some(bad) = phi.iter().find(|p| {
            let dev = (p.norm() - 1.0).abs();
            dev.is_nan() || dev > UNIT_MODULUS_TOL
        }) {
            return Err(Error::parameter(
                "phi",
                format!("coefficient {bad} is not unit modulus"),
            ));
        }
        Ok(Self(phi))
    }

    pub fn from_angles(angles: &[f64]) -> Self {
        Self(
            angles
                .iter()
                .map(|&a| Complex64::from_polar(1.0, a))
                .collect(),
        )
    }

    pub fn ones(m: usize) -> Self {
        Self(vec![Complex64::new(1.0, 0.0); m])
    }

    /// Projects each entry onto the unit circle; zeros map to 1.
    pub fn project(raw: &[Complex64]) -> Self {
        Self(raw.iter().map(|&z| unit(z)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn angles(&self) -> Vec<f64> {
        self.0.iter().map(|p| p.arg()).collect()
    }
}

pub(crate) fn unit(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r > 0.0 && r.is_finite() {
        z / r
    } else {
        Complex64::new(1.0, 0.0)
    }
}

/// Per-sub-carrier power gains `W_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSpectrum(pub Vec<f64>);

impl GainSpectrum {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

fn check_channels(phi: &[Complex64], d_cfr: &[Complex64], g_cfr: &ComplexMat) -> Result<()> {
    Error::check_len("cascaded CFR rows", d_cfr.len(), g_cfr.nrows())?;
    Error::check_len("reflection coefficients", g_cfr.ncols(), phi.len())
}

/// `W_n = |sum_m phi_m G[n,m] + D[n]|^2`.
pub fn channel_gain(
    phi: &PhaseVector,
    d_cfr: &[Complex64],
    g_cfr: &ComplexMat,
) -> Result<GainSpectrum> {
    check_channels(phi.as_slice(), d_cfr, g_cfr)?;
    Ok(GainSpectrum(
        d_cfr
            .iter()
            .enumerate()
            .map(|(n, d)| {
                let reflected: Complex64 = phi
                    .as_slice()
                    .iter()
                    .enumerate()
                    .map(|(m, p)| p * g_cfr[(n, m)])
                    .sum();
                (reflected + d).norm_sqr()
            })
            .collect(),
    ))
}

/// Gain spectrum of the direct link alone (no IRS deployed).
pub fn direct_gain(d_cfr: &[Complex64]) -> GainSpectrum {
    GainSpectrum(d_cfr.iter().map(|d| d.norm_sqr()).collect())
}

/// Sum power gain over all sub-carriers, the quantity every optimizer maximizes.
pub fn sum_gain_objective(
    phi: &PhaseVector,
    d_cfr: &[Complex64],
    g_cfr: &ComplexMat,
) -> Result<f64> {
    Ok(channel_gain(phi, d_cfr, g_cfr)?.total())
}

/// Time-domain form of the sum gain: `sum_l |sum_m phi_m g[m,l] + d[l]|^2`.
/// For `L`-tap channels this equals the frequency-domain sum divided by `N`.
pub fn time_domain_objective(
    phi: &PhaseVector,
    d_taps: &[Complex64],
    g_taps: &ComplexMat,
) -> Result<f64> {
    Error::check_len("cascaded CIR taps", d_taps.len(), g_taps.ncols())?;
    Error::check_len("reflection coefficients", g_taps.nrows(), phi.len())?;
    Ok((0..d_taps.len())
        .map(|l| {
            let reflected: Complex64 = phi
                .as_slice()
                .iter()
                .enumerate()
                .map(|(m, p)| p * g_taps[(m, l)])
                .sum();
            (reflected + d_taps[l]).norm_sqr()
        })
        .sum())
}

/// `L`-tap CIRs recovered from the CFR estimates, `(d taps, M x L g taps)`.
pub fn estimate_cirs(est: &ChannelEstimate) -> Result<(ComplexVec, ComplexMat)> {
    let taps = est.d_cir_hat.len();
    let n = est.d_hat.len();
    let mut d = idft(&est.d_hat, n)?;
    d.truncate(taps);
    let m = est.g_hat.ncols();
    let mut g = DMatrix::zeros(m, taps);
    for j in 0..m {
        let col: Vec<Complex64> = est.g_hat.column(j).iter().copied().collect();
        for (l, v) in idft(&col, n)?.into_iter().take(taps).enumerate() {
            g[(j, l)] = v;
        }
    }
    Ok((d, g))
}

/// Homogenized quadratic form of the sum-gain problem.
///
/// With `C = [G d]` (`N x (M+1)`) and `v = [phi; 1]`, the objective is
/// `v^H R v` where `R = C^H C`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainQuadratic {
    r: ComplexMat,
}

impl GainQuadratic {
    pub fn new(d_cfr: &[Complex64], g_cfr: &ComplexMat) -> Result<Self> {
        Error::check_len("cascaded CFR rows", d_cfr.len(), g_cfr.nrows())?;
        let (n, m) = (g_cfr.nrows(), g_cfr.ncols());
        let c = DMatrix::from_fn(
            n,
            m + 1,
            |k, j| if j < m { g_cfr[(k, j)] } else { d_cfr[k] },
        );
        Ok(Self { r: c.adjoint() * c })
    }

    pub fn matrix(&self) -> &ComplexMat {
        &self.r
    }

    pub fn num_subsurfaces(&self) -> usize {
        self.r.nrows() - 1
    }

    /// `v^H R v` for a full homogenized vector.
    pub fn value_homogeneous(&self, v: &[Complex64]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, vi) in v.iter().enumerate() {
            let row: Complex64 = v
                .iter()
                .enumerate()
                .map(|(j, vj)| self.r[(i, j)] * vj)
                .sum();
            acc += vi.conj() * row;
        }
        acc.re
    }

    pub fn value(&self, phi: &PhaseVector) -> f64 {
        let mut v = phi.as_slice().to_vec();
        v.push(Complex64::new(1.0, 0.0));
        self.value_homogeneous(&v)
    }
}

/// Rate-formula constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// `Pt`, watts.
    pub transmit_power: f64,
    /// `sigma^2`, watts.
    pub noise_var: f64,
    /// SNR gap, dB.
    pub gamma_db: f64,
    pub n: usize,
    pub lcp: usize,
}

impl LinkBudget {
    pub fn gamma(&self) -> f64 {
        10f64.powf(self.gamma_db / 10.0)
    }

    pub fn rate(&self, w: &GainSpectrum) -> f64 {
        achievable_rate(
            w,
            self.transmit_power,
            self.noise_var,
            self.gamma(),
            self.n,
            self.lcp,
        )
    }

    pub fn upper_bound(&self, w: &GainSpectrum) -> f64 {
        rate_upper_bound(
            w,
            self.transmit_power,
            self.noise_var,
            self.gamma(),
            self.n,
            self.lcp,
        )
    }

    /// Rates for `w` with a data fraction of `payload_fraction` in the frame.
    pub fn report(&self, w: &GainSpectrum, payload_fraction: f64) -> RateReport {
        let rate = self.rate(w);
        RateReport {
            rate_bps_hz: rate,
            upper_bound: self.upper_bound(w),
            effective_rate: payload_fraction.clamp(0.0, 1.0) * rate,
            gamma_db: self.gamma_db,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub rate_bps_hz: f64,
    pub upper_bound: f64,
    pub effective_rate: f64,
    pub gamma_db: f64,
}

/// `(1/(N+Lcp)) sum_n log2(1 + Pt W_n / (N Gamma sigma^2))`, bits/s/Hz.
/// `gamma` is linear.
pub fn achievable_rate(
    w: &GainSpectrum,
    pt: f64,
    noise_var: f64,
    gamma: f64,
    n: usize,
    lcp: usize,
) -> f64 {
    let snr_scale = pt / (n as f64 * gamma * noise_var);
    w.0.iter().map(|wn| (snr_scale * wn).ln_1p()).sum::<f64>()
        / std::f64::consts::LN_2
        / (n + lcp) as f64
}

/// Jensen bound: `(N/(N+Lcp)) log2(1 + mean_n(Pt W_n / (N Gamma sigma^2)))`.
pub fn rate_upper_bound(
    w: &GainSpectrum,
    pt: f64,
    noise_var: f64,
    gamma: f64,
    n: usize,
    lcp: usize,
) -> f64 {
    if w.0.is_empty() {
        return 0.0;
    }
    let snr_scale = pt / (n as f64 * gamma * noise_var);
    let mean = w.0.iter().sum::<f64>() / w.0.len() as f64;
    n as f64 / (n + lcp) as f64 * (snr_scale * mean).ln_1p() / std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::cir_to_cfr;
    use crate::spectra::{gaussian_complex, RngStream};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_instance(
        seed: u64,
        n: usize,
        m: usize,
        taps: usize,
    ) -> (ComplexVec, ComplexMat, ComplexVec, ComplexMat) {
        let mut rng = RngStream::new(seed, 0).generator();
        let d_taps = gaussian_complex(taps, 1.0, &mut rng);
        let g_taps = DMatrix::from_fn(m, taps, |_, _| gaussian_complex(1, 1.0, &mut rng)[0]);
        let d_cfr = cir_to_cfr(&d_taps, n).unwrap();
        let mut g_cfr = DMatrix::zeros(n, m);
        for j in 0..m {
            let row: Vec<Complex64> = g_taps.row(j).iter().copied().collect();
            for (k, v) in cir_to_cfr(&row, n).unwrap().into_iter().enumerate() {
                g_cfr[(k, j)] = v;
            }
        }
        (d_taps, g_taps, d_cfr, g_cfr)
    }

    #[test]
    fn phase_vector_rejects_non_unit() {
        assert!(PhaseVector::new(vec![c(1.0, 0.0), c(0.5, 0.0)]).is_err());
        assert!(PhaseVector::new(vec![c(f64::NAN, 0.0)]).is_err());
        let p = PhaseVector::from_angles(&[0.1, -2.0, 3.0]);
        assert!(PhaseVector::new(p.as_slice().to_vec()).is_ok());
        assert_eq!(
            PhaseVector::project(&[c(0.0, 0.0), c(0.0, -3.0)]).as_slice(),
            &[c(1.0, 0.0), c(0.0, -1.0)]
        );
    }

    #[test]
    fn gain_direct_only() {
        let d = vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0)];
        let g = DMatrix::zeros(3, 2);
        let w = channel_gain(&PhaseVector::from_angles(&[0.3, 1.2]), &d, &g).unwrap();
        assert_eq!(w.0, vec![5.0, 0.25, 9.0]);
        assert_eq!(direct_gain(&d), w);
    }

    #[test]
    fn gain_perfect_cancellation() {
        let d = vec![c(1.0, 2.0), c(-0.5, 0.7), c(0.2, 3.0)];
        let phi = PhaseVector::from_angles(&[0.9]);
        let g = DMatrix::from_fn(3, 1, |n, _| -d[n] * phi.as_slice()[0].conj());
        let w = channel_gain(&phi, &d, &g).unwrap();
        assert!(w.0.iter().all(|v| v.abs() < 1e-28));
    }

    #[test]
    fn gain_matches_elementwise_recomputation() {
        let (_, _, d, g) = random_instance(1, 16, 3, 4);
        let phi = PhaseVector::from_angles(&[0.4, -1.1, 2.5]);
        let w = channel_gain(&phi, &d, &g).unwrap();
        for n in 0..16 {
            let mut h = d[n];
            h += phi.as_slice()[0] * g[(n, 0)];
            h += phi.as_slice()[1] * g[(n, 1)];
            h += phi.as_slice()[2] * g[(n, 2)];
            assert!((w.0[n] - h.norm_sqr()).abs() <= 1e-12 * h.norm_sqr().max(1.0));
        }
        assert!(channel_gain(&PhaseVector::ones(2), &d, &g).is_err());
    }

    #[test]
    fn quadratic_form_equals_sum_gain() {
        let (_, _, d, g) = random_instance(2, 32, 4, 3);
        let q = GainQuadratic::new(&d, &g).unwrap();
        let phi = PhaseVector::from_angles(&[0.1, 0.2, -0.3, 2.0]);
        let direct = sum_gain_objective(&phi, &d, &g).unwrap();
        assert!((q.value(&phi) - direct).abs() <= 1e-12 * direct);
    }

    #[test]
    fn rate_examples() {
        let (pt, s2, gamma, n, lcp) = (1e-3, 1e-11, 10f64.powf(0.9), 64, 8);
        assert_eq!(
            achievable_rate(&GainSpectrum(vec![0.0; 64]), pt, s2, gamma, n, lcp),
            0.0
        );
        let flat = GainSpectrum(vec![n as f64 * gamma * s2 / pt; 64]);
        let r = achievable_rate(&flat, pt, s2, gamma, n, lcp);
        assert!((r - 64.0 / 72.0).abs() < 1e-12);
        assert!((rate_upper_bound(&flat, pt, s2, gamma, n, lcp) - r).abs() < 1e-12);
    }

    #[test]
    fn jensen_bound_strictness() {
        let x = 3.0;
        let flat = GainSpectrum(vec![x, x]);
        let split = GainSpectrum(vec![0.0, 2.0 * x]);
        let args = (1.0, 1.0, 1.0, 2, 0);
        let b_flat = rate_upper_bound(&flat, args.0, args.1, args.2, args.3, args.4);
        let b_split = rate_upper_bound(&split, args.0, args.1, args.2, args.3, args.4);
        assert!((b_flat - b_split).abs() < 1e-12);
        assert!(
            achievable_rate(&split, args.0, args.1, args.2, args.3, args.4)
                < achievable_rate(&flat, args.0, args.1, args.2, args.3, args.4)
        );
    }

    #[test]
    fn jensen_on_random_spectra() {
        let mut rng = RngStream::new(3, 0).generator();
        for _ in 0..1000 {
            let w = GainSpectrum(
                gaussian_complex(64, 1e-8, &mut rng)
                    .iter()
                    .map(|z| z.norm_sqr())
                    .collect(),
            );
            let r = achievable_rate(&w, 1e-3, 1e-11, 7.94, 64, 8);
            let b = rate_upper_bound(&w, 1e-3, 1e-11, 7.94, 64, 8);
            assert!(b - r >= -1e-12, "{b} < {r}");
        }
    }

    #[test]
    fn parseval_bridge() {
        for seed in 0..20 {
            let (dt, gt, d, g) = random_instance(100 + seed, 64, 3, 5);
            let phi = PhaseVector::from_angles(&[seed as f64, 1.0, -0.5]);
            let freq = sum_gain_objective(&phi, &d, &g).unwrap();
            let time = time_domain_objective(&phi, &dt, &gt).unwrap();
            assert!((freq - 64.0 * time).abs() <= 1e-10 * freq);
        }
    }

    #[test]
    fn estimate_cirs_recovers_exact_taps() {
        let (dt, gt, d, g) = random_instance(7, 64, 2, 4);
        let est = ChannelEstimate {
            d_hat: d,
            g_hat: g,
            d_cir_hat: vec![c(0.0, 0.0); 4],
            g_cir_hat: DMatrix::zeros(2, 4),
        };
        let (d2, g2) = estimate_cirs(&est).unwrap();
        assert!(d2.iter().zip(&dt).all(|(a, b)| (a - b).norm() < 1e-10));
        assert!((g2 - gt).norm() < 1e-10);
    }

    #[test]
    fn estimate_cirs_flat_channel() {
        let est = ChannelEstimate {
            d_hat: vec![c(0.5, -0.25); 8],
            g_hat: DMatrix::from_element(8, 1, c(2.0, 0.0)),
            d_cir_hat: vec![c(0.0, 0.0); 1],
            g_cir_hat: DMatrix::zeros(1, 1),
        };
        let (d, g) = estimate_cirs(&est).unwrap();
        assert!((d[0] - c(0.5, -0.25)).norm() < 1e-15);
        assert!((g[(0, 0)] - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn report_discounts_rate() {
        let budget = LinkBudget {
            transmit_power: 1e-3,
            noise_var: 1e-11,
            gamma_db: 9.0,
            n: 64,
            lcp: 8,
        };
        let w = GainSpectrum(vec![1e-8; 64]);
        let rep = budget.report(&w, 137.0 / 150.0);
        assert!(rep.rate_bps_hz > 0.0);
        assert!(
            rep.effective_rate <= rep.rate_bps_hz && rep.rate_bps_hz <= rep.upper_bound + 1e-12
        );
        assert!((rep.effective_rate / rep.rate_bps_hz - 137.0 / 150.0).abs() < 1e-15);
    }
}
