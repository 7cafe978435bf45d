//! Comb-pilot least-squares estimation of the direct and cascaded CFRs from
//! `M + 1` pilot symbols, each sent under a different IRS reflection state.
//!
//! Per symbol `i` the AP observes the superimposed channel
//! `h_i = G phi_i + d` on the pilot tones. LS on the tones followed by
//! IDFT -> keep `L` taps -> zero pad -> DFT interpolates `h_i` onto all `N`
//! sub-carriers. Stacking the `M + 1` estimates gives `H = [d G] Theta + V`,
//! and `[d G] = H Theta^{-1}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::channel::{cir_to_cfr, ChannelRealization};
use crate::error::{Error, Result};
use crate::spectra::{dft_matrix, gaussian_complex, idft, ComplexMat, ComplexVec};

/// Comb of `np` equally spaced pilot tones among `n` sub-carriers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PilotGrid {
    n: usize,
    np: usize,
}

impl PilotGrid {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn np(&self) -> usize {
        self.np
    }

    pub fn spacing(&self) -> usize {
        self.n / self.np
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.np).map(move |i| i * self.spacing())
    }

    pub fn data_indices(&self) -> impl Iterator<Item = usize> + '_ {
        let delta = self.spacing();
        (0..self.n).filter(move |k| k % delta != 0)
    }
}

pub fn make_pilot_grid(n: usize, np: usize) -> Result<PilotGrid> {
    if np == 0 || n == 0 {
        return Err(Error::parameter(
            "np",
            "pilot and sub-carrier counts must be positive",
        ));
    }
    if !n.is_multiple_of(np) {
        return Err(Error::parameter(
            "np",
            format!("{np} pilot tones do not divide {n} sub-carriers"),
        ));
    }
    Ok(PilotGrid { n, np })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    Dft,
    OnOff,
    Custom,
}

/// `(M+1) x (M+1)` training matrix. Column `i` is `[1; phi_i]`, the IRS
/// state during pilot symbol `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionPattern {
    theta: ComplexMat,
    kind: PatternKind,
}

impl ReflectionPattern {
    /// `F_{M+1}`: orthogonal, unit modulus, `Theta^H Theta = (M+1) I`.
    pub fn dft(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::parameter("m", "need at least one sub-surface"));
        }
        Ok(Self {
            theta: dft_matrix(m + 1),
            kind: PatternKind::Dft,
        })
    }

    /// All sub-surfaces off for symbol 0, then sub-surface `i` alone on for
    /// symbol `i`.
    pub fn onoff(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::parameter("m", "need at least one sub-surface"));
        }
        let theta = DMatrix::from_fn(m + 1, m + 1, |r, col| {
            if r == 0 || r == col {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Ok(Self {
            theta,
            kind: PatternKind::OnOff,
        })
    }

    /// Arbitrary training matrix. Must be square with a first row of ones and
    /// reasonably conditioned.
    pub fn custom(theta: ComplexMat) -> Result<Self> {
        if theta.nrows() != theta.ncols() || theta.nrows() < 2 {
            return Err(Error::Dimension {
                context: "custom reflection pattern",
                expected: theta.nrows().max(2),
                actual: theta.ncols(),
            });
        }
        if theta
            .row(0)
            .iter()
            .any(|v| (v - Complex64::new(1.0, 0.0)).norm() > 1e-12)
        {
            return Err(Error::parameter(
                "theta",
                "first row must be all ones (direct link is always present)",
            ));
        }
        let pattern = Self {
            theta,
            kind: PatternKind::Custom,
        };
        let cond = pattern.condition_number();
        if !cond.is_finite() || cond > 1e12 {
            return Err(Error::Singular {
                context: "custom reflection pattern",
            });
        }
        Ok(pattern)
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    pub fn theta(&self) -> &ComplexMat {
        &self.theta
    }

    pub fn num_subsurfaces(&self) -> usize {
        self.theta.nrows() - 1
    }

    pub fn num_symbols(&self) -> usize {
        self.theta.ncols()
    }

    /// IRS coefficients `phi_i` used during pilot symbol `i`.
    pub fn state(&self, i: usize) -> ComplexVec {
        self.theta.column(i).iter().skip(1).copied().collect()
    }

    /// Ratio of the largest to the smallest singular value of `Theta`.
    pub fn condition_number(&self) -> f64 {
        let sv = self.theta.clone().singular_values();
        let max = sv.max();
        let min = sv.min();
        if min <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    pub fn inverse(&self) -> Result<ComplexMat> {
        match self.kind {
            PatternKind::Dft => {
                Ok(self.theta.adjoint() / Complex64::new(self.num_symbols() as f64, 0.0))
            }
            PatternKind::OnOff => {
                // d = h_0, g_i = h_i - h_0.
                let size = self.num_symbols();
                Ok(DMatrix::from_fn(size, size, |r, col| {
                    let one = Complex64::new(1.0, 0.0);
                    match (r, col) {
                        (0, 0) => one,
                        (0, _) => -one,
                        (r, col) if r == col => one,
                        _ => Complex64::new(0.0, 0.0),
                    }
                }))
            }
            PatternKind::Custom => self.theta.clone().try_inverse().ok_or(Error::Singular {
                context: "reflection pattern inverse",
            }),
        }
    }

    /// `trace((Theta^H Theta)^{-1})`.
    pub fn noise_enhancement(&self) -> Result<f64> {
        let gram = self.theta.adjoint() * &self.theta;
        let inv = gram.try_inverse().ok_or(Error::Singular {
            context: "reflection pattern Gram matrix",
        })?;
        Ok(inv.trace().re)
    }
}

/// Received pilot tones of one training symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotSymbolObservation {
    pub y_pilot: ComplexVec,
    pub symbol_index: usize,
}

/// Estimated direct and cascaded channels in both domains.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub d_hat: ComplexVec,
    /// `N x M`.
    pub g_hat: ComplexMat,
    pub d_cir_hat: ComplexVec,
    /// `M x L`.
    pub g_cir_hat: ComplexMat,
}

impl ChannelEstimate {
    /// Perfect-CSI "estimate" taken straight from a realization.
    pub fn from_truth(real: &ChannelRealization) -> Self {
        Self {
            d_hat: real.direct_cfr.clone(),
            g_hat: real.cascaded_cfr.clone(),
            d_cir_hat: real.direct_cir.clone(),
            g_cir_hat: real.group_cirs.clone(),
        }
    }

    pub fn num_subsurfaces(&self) -> usize {
        self.g_hat.ncols()
    }
}

fn check_pilots(pilots: &[Complex64], grid: &PilotGrid) -> Result<()> {
    Error::check_len("pilot sequence", grid.np(), pilots.len())
}

/// Received pilot tones for training symbol `symbol` of `pattern`:
/// `y = X (G phi_i + d) + v` on the comb, with `X = sqrt(p) diag(pilots)`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_pilot_symbol<R: Rng + ?Sized>(
    real: &ChannelRealization,
    pattern: &ReflectionPattern,
    symbol: usize,
    pilots: &[Complex64],
    grid: &PilotGrid,
    power_per_tone: f64,
    noise_var: f64,
    rng: &mut R,
) -> Result<PilotSymbolObservation> {
    check_pilots(pilots, grid)?;
    Error::check_len("realization sub-carriers", grid.n(), real.num_subcarriers())?;
    Error::check_len(
        "pattern sub-surfaces",
        real.num_subsurfaces(),
        pattern.num_subsurfaces(),
    )?;
    if symbol >= pattern.num_symbols() {
        return Err(Error::parameter(
            "symbol",
            "index beyond the training pattern",
        ));
    }
    let h = real.superimposed_cfr(&pattern.state(symbol))?;
    let noise = gaussian_complex(grid.np(), noise_var, rng);
    let amp = power_per_tone.sqrt();
    let y_pilot = grid
        .indices()
        .zip(pilots)
        .zip(noise)
        .map(|((k, x), v)| amp * x * h[k] + v)
        .collect();
    Ok(PilotSymbolObservation {
        y_pilot,
        symbol_index: symbol,
    })
}

/// Per-tone LS: `r = X^{-1} y`.
pub fn ls_estimate(
    obs: &PilotSymbolObservation,
    pilots: &[Complex64],
    power_per_tone: f64,
) -> Result<ComplexVec> {
    Error::check_len("pilot sequence", obs.y_pilot.len(), pilots.len())?;
    let amp = power_per_tone.sqrt();
    obs.y_pilot
        .iter()
        .zip(pilots)
        .map(|(y, x)| {
            let tone = amp * x;
            if tone.norm_sqr() == 0.0 {
                Err(Error::Singular {
                    context: "pilot tone with zero amplitude",
                })
            } else {
                Ok(y / tone)
            }
        })
        .collect()
}

/// First `taps` samples of the `len`-point inverse transform of `cfr`.
fn truncated_cir(cfr: &[Complex64], taps: usize) -> Result<ComplexVec> {
    let mut cir = idft(cfr, cfr.len())?;
    cir.truncate(taps);
    Ok(cir)
}

/// DFT interpolation of pilot-tone estimates onto all `N` sub-carriers,
/// assuming the channel has at most `taps` taps.
pub fn interpolate_cfr(r: &[Complex64], grid: &PilotGrid, taps: usize) -> Result<ComplexVec> {
    Error::check_len("pilot estimates", grid.np(), r.len())?;
    if taps == 0 {
        return Err(Error::parameter("taps", "must be positive"));
    }
    if grid.np() < taps {
        return Err(Error::Aliasing {
            pilots: grid.np(),
            taps,
        });
    }
    cir_to_cfr(&truncated_cir(r, taps)?, grid.n())
}

/// `[d G] = H Theta^{-1}` for a stack `H` of `M + 1` interpolated CFRs
/// (`N x (M+1)`).
pub fn estimate_channels(
    h_hat_stack: &ComplexMat,
    pattern: &ReflectionPattern,
    taps: usize,
) -> Result<ChannelEstimate> {
    Error::check_len(
        "estimate stack columns",
        pattern.num_symbols(),
        h_hat_stack.ncols(),
    )?;
    let n = h_hat_stack.nrows();
    if taps == 0 || taps > n {
        return Err(Error::parameter("taps", "must lie in 1..=N"));
    }
    let decoupled = h_hat_stack * pattern.inverse()?;
    let m = pattern.num_subsurfaces();
    let column = |j: usize| -> ComplexVec { decoupled.column(j).iter().copied().collect() };
    let d_hat = column(0);
    let d_cir_hat = truncated_cir(&d_hat, taps)?;
    let g_hat = decoupled.columns(1, m).into_owned();
    let mut g_cir_hat = DMatrix::zeros(m, taps);
    for j in 0..m {
        for (l, v) in truncated_cir(&column(j + 1), taps)?.into_iter().enumerate() {
            g_cir_hat[(j, l)] = v;
        }
    }
    Ok(ChannelEstimate {
        d_hat,
        g_hat,
        d_cir_hat,
        g_cir_hat,
    })
}

/// Closed-form per-sub-carrier MSE of `[d G]`:
/// `sigma^2 N L / (Np Pt) * trace((Theta^H Theta)^{-1})`.
pub fn theoretical_mse(
    pattern: &ReflectionPattern,
    noise_var: f64,
    n: usize,
    np: usize,
    pt: f64,
    taps: usize,
) -> Result<f64> {
    Ok(minimum_mse(noise_var, n, np, pt, taps) * pattern.noise_enhancement()?)
}

/// The MSE floor reached by any orthogonal unit-modulus pattern.
pub fn minimum_mse(noise_var: f64, n: usize, np: usize, pt: f64, taps: usize) -> f64 {
    noise_var * n as f64 * taps as f64 / (np as f64 * pt)
}

/// `(1/N) || [d_hat G_hat] - [d G] ||_F^2` for one realization.
pub fn empirical_mse(
    estimate: &ChannelEstimate,
    d_true: &[Complex64],
    g_true: &ComplexMat,
) -> Result<f64> {
    let n = d_true.len();
    Error::check_len("direct estimate", n, estimate.d_hat.len())?;
    Error::check_len("cascaded estimate rows", n, estimate.g_hat.nrows())?;
    Error::check_len("cascaded estimate rows", n, g_true.nrows())?;
    Error::check_len(
        "cascaded estimate columns",
        g_true.ncols(),
        estimate.g_hat.ncols(),
    )?;
    let direct: f64 = estimate
        .d_hat
        .iter()
        .zip(d_true)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    let cascaded: f64 = (&estimate.g_hat - g_true)
        .iter()
        .map(|v| v.norm_sqr())
        .sum();
    Ok((direct + cascaded) / n as f64)
}

/// Settings of the first sub-frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSetup {
    pub grid: PilotGrid,
    pub pilots: ComplexVec,
    pub pattern: ReflectionPattern,
    /// Total transmit power `Pt`, watts; each tone carries `Pt / N`.
    pub transmit_power: f64,
    pub noise_var: f64,
    pub taps: usize,
}

impl TrainingSetup {
    /// Zadoff-Chu (root 1) pilots on an `np`-tone comb.
    pub fn new(
        n: usize,
        np: usize,
        pattern: ReflectionPattern,
        transmit_power: f64,
        noise_var: f64,
        taps: usize,
    ) -> Result<Self> {
        let grid = make_pilot_grid(n, np)?;
        if np < taps {
            return Err(Error::Aliasing { pilots: np, taps });
        }
        Ok(Self {
            grid,
            pilots: crate::spectra::zadoff_chu(np, 1)?,
            pattern,
            transmit_power,
            noise_var,
            taps,
        })
    }

    pub fn power_per_tone(&self) -> f64 {
        self.transmit_power / self.grid.n() as f64
    }

    /// Runs the whole first sub-frame against `real`: simulate all `M + 1`
    /// pilot symbols, LS, interpolate, decouple.
    pub fn estimate<R: Rng + ?Sized>(
        &self,
        real: &ChannelRealization,
        rng: &mut R,
    ) -> Result<ChannelEstimate> {
        let n = self.grid.n();
        let symbols = self.pattern.num_symbols();
        let mut stack = DMatrix::zeros(n, symbols);
        for i in 0..symbols {
            let obs = simulate_pilot_symbol(
                real,
                &self.pattern,
                i,
                &self.pilots,
                &self.grid,
                self.power_per_tone(),
                self.noise_var,
                rng,
            )?;
            let r = ls_estimate(&obs, &self.pilots, self.power_per_tone())?;
            for (k, v) in interpolate_cfr(&r, &self.grid, self.taps)?
                .into_iter()
                .enumerate()
            {
                stack[(k, i)] = v;
            }
        }
        estimate_channels(&stack, &self.pattern, self.taps)
    }

    pub fn theoretical_mse(&self) -> Result<f64> {
        theoretical_mse(
            &self.pattern,
            self.noise_var,
            self.grid.n(),
            self.grid.np(),
            self.transmit_power,
            self.taps,
        )
    }
}
