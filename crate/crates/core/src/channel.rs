//! Quasi-static frequency-selective Rician channels for the direct link and
//! the per-element cascaded (user -> IRS element -> AP) link.
//!
//! Every CIR has `L` taps. Tap 0 is the line-of-sight component carrying
//! `1/(1+eta)` of the link gain with a random phase; taps `1..L` are i.i.d.
//! Rayleigh and share the remaining `eta/(1+eta)` uniformly. Cascaded LoS
//! phases follow a planar steering law across the element grid so that
//! neighbouring elements stay strongly correlated.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::spectra::{gaussian_complex, twiddles, ComplexMat, ComplexVec};

/// Placement of the user relative to the IRS and the AP, in meters.
///
/// The AP sits at the origin and the IRS at `irs_ap_distance` along the x
/// axis; the user moves on a parallel line offset by `user_lateral_offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub irs_ap_distance: f64,
    pub user_lateral_offset: f64,
    pub user_horizontal: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            irs_ap_distance: 50.0,
            user_lateral_offset: 2.0,
            user_horizontal: 45.0,
        }
    }
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        if self.irs_ap_distance.is_nan() || self.irs_ap_distance <= 0.0 {
            return Err(Error::parameter("irs_ap_distance", "must be > 0"));
        }
        if self.user_lateral_offset.is_nan() || self.user_lateral_offset <= 0.0 {
            return Err(Error::parameter("user_lateral_offset", "must be > 0"));
        }
        Ok(())
    }

    /// `(user -> AP, user -> IRS)` distances.
    pub fn user_distances(&self) -> (f64, f64) {
        user_distances(self)
    }
}

pub fn user_distances(geom: &Geometry) -> (f64, f64) {
    let user_ap = geom.user_horizontal.hypot(geom.user_lateral_offset);
    let user_irs = (geom.irs_ap_distance - geom.user_horizontal).hypot(geom.user_lateral_offset);
    (user_ap, user_irs)
}

/// Tap count, Rician split and path-loss law shared by all links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingProfile {
    pub num_taps: usize,
    /// Total NLoS power over LoS power.
    pub eta: f64,
    pub pathloss_exponent_direct: f64,
    pub pathloss_exponent_user_irs: f64,
    pub pathloss_exponent_irs_ap: f64,
    /// Loss at the 1 m reference distance, dB.
    pub ref_loss_db: f64,
}

impl Default for FadingProfile {
    fn default() -> Self {
        Self {
            num_taps: 6,
            eta: 0.5,
            pathloss_exponent_direct: 3.5,
            pathloss_exponent_user_irs: 2.4,
            pathloss_exponent_irs_ap: 2.2,
            ref_loss_db: 30.0,
        }
    }
}

impl FadingProfile {
    pub fn validate(&self) -> Result<()> {
        if self.num_taps == 0 {
            return Err(Error::parameter("num_taps", "must be at least 1"));
        }
        if !self.eta.is_finite() || self.eta < 0.0 {
            return Err(Error::parameter("eta", "must be finite and >= 0"));
        }
        if self.num_taps == 1 && self.eta > 0.0 {
            return Err(Error::parameter(
                "eta",
                "a single-tap profile has no NLoS taps, eta must be 0",
            ));
        }
        Ok(())
    }

    fn los_amplitude(&self, gain: f64) -> f64 {
        (gain / (1.0 + self.eta)).sqrt()
    }

    fn nlos_tap_power(&self, gain: f64) -> f64 {
        if self.num_taps <= 1 {
            0.0
        } else {
            gain * self.eta / ((1.0 + self.eta) * (self.num_taps - 1) as f64)
        }
    }

    /// Direct user -> AP gain.
    pub fn direct_gain(&self, geom: &Geometry) -> Result<f64> {
        let (user_ap, _) = geom.user_distances();
        path_loss_linear(user_ap, self.pathloss_exponent_direct, self.ref_loss_db)
    }

    /// Per-element cascaded gain, product of the user -> IRS and IRS -> AP losses.
    pub fn cascaded_gain(&self, geom: &Geometry) -> Result<f64> {
        let (_, user_irs) = geom.user_distances();
        Ok(
            path_loss_linear(user_irs, self.pathloss_exponent_user_irs, self.ref_loss_db)?
                * path_loss_linear(
                    geom.irs_ap_distance,
                    self.pathloss_exponent_irs_ap,
                    self.ref_loss_db,
                )?,
        )
    }
}

/// `10^(-ref_loss_db/10) * distance^(-exponent)`.
pub fn path_loss_linear(distance: f64, exponent: f64, ref_loss_db: f64) -> Result<f64> {
    if distance.is_nan() || distance <= 0.0 {
        return Err(Error::parameter(
            "distance",
            format!("{distance} is not > 0"),
        ));
    }
    Ok(10f64.powf(-ref_loss_db / 10.0) * distance.powf(-exponent))
}

/// Element grid of the IRS and its partition into rectangular sub-surfaces.
///
/// Elements are indexed row-major over the `rows x cols` grid. Sub-surface
/// `m` is the `m`-th tile when tiles are enumerated row-major over the tile
/// grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IrsLayout {
    pub rows: usize,
    pub cols: usize,
    pub tile_rows: usize,
    pub tile_cols: usize,
}

impl IrsLayout {
    pub fn new(rows: usize, cols: usize, tile_rows: usize, tile_cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 || tile_rows == 0 || tile_cols == 0 {
            return Err(Error::parameter(
                "layout",
                "all dimensions must be positive",
            ));
        }
        if !rows.is_multiple_of(tile_rows) {
            return Err(Error::parameter(
                "tile_rows",
                format!("{tile_rows} does not divide {rows} rows"),
            ));
        }
        if !cols.is_multiple_of(tile_cols) {
            return Err(Error::parameter(
                "tile_cols",
                format!("{tile_cols} does not divide {cols} cols"),
            ));
        }
        Ok(Self {
            rows,
            cols,
            tile_rows,
            tile_cols,
        })
    }

    /// Tiling of a `rows x cols` surface into `m` sub-surfaces.
    ///
    /// Among all tile grids `gr x gc` with `gr | rows`, `gc | cols` and
    /// `gr * gc == m`, picks the most square one (`gr <= gc` on ties).
    pub fn with_subsurfaces(rows: usize, cols: usize, m: usize) -> Result<Self> {
        let best = (1..=rows)
            .filter(|gr| rows.is_multiple_of(*gr) && m.is_multiple_of(*gr))
            .map(|gr| (gr, m / gr))
            .filter(|&(_, gc)| gc >= 1 && cols.is_multiple_of(gc))
            .min_by_key(|&(gr, gc)| (gr.abs_diff(gc), gr > gc));
        match best {
            Some((gr, gc)) => Self::new(rows, cols, rows / gr, cols / gc),
            None => Err(Error::parameter(
                "m",
                format!("{m} sub-surfaces cannot tile a {rows}x{cols} surface"),
            )),
        }
    }

    pub fn num_elements(&self) -> usize {
        self.rows * self.cols
    }

    pub fn num_subsurfaces(&self) -> usize {
        (self.rows / self.tile_rows) * (self.cols / self.tile_cols)
    }

    pub fn elements_per_subsurface(&self) -> usize {
        self.tile_rows * self.tile_cols
    }

    /// Sub-surface that owns element `k`.
    pub fn subsurface_of(&self, k: usize) -> usize {
        let (p, q) = (k / self.cols, k % self.cols);
        (p / self.tile_rows) * (self.cols / self.tile_cols) + q / self.tile_cols
    }
}

/// LoS phase law of the cascaded link: element `(p, q)` gets phase
/// `theta0 + pi * (p * a + q * b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosSteering {
    pub theta0: f64,
    pub a: f64,
    pub b: f64,
}

impl LosSteering {
    pub fn draw<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            theta0: draw_phase(rng),
            a: rng.random_range(-2.0..=2.0),
            b: rng.random_range(-2.0..=2.0),
        }
    }
}

/// Uniform phase on (0, 2pi].
fn draw_phase<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    2.0 * PI * (1.0 - rng.random::<f64>())
}

/// Direct-link CIR with the given LoS phase.
pub fn gen_direct_cir_with_phase<R: Rng + ?Sized>(
    profile: &FadingProfile,
    gain: f64,
    los_phase: f64,
    rng: &mut R,
) -> Result<ComplexVec> {
    profile.validate()?;
    if gain.is_nan() || gain < 0.0 {
        return Err(Error::parameter("gain", "must be >= 0"));
    }
    let mut cir = Vec::with_capacity(profile.num_taps);
    cir.push(Complex64::from_polar(
        profile.los_amplitude(gain),
        los_phase,
    ));
    cir.extend(gaussian_complex(
        profile.num_taps - 1,
        profile.nlos_tap_power(gain),
        rng,
    ));
    Ok(cir)
}

pub fn gen_direct_cir<R: Rng + ?Sized>(
    profile: &FadingProfile,
    gain: f64,
    rng: &mut R,
) -> Result<ComplexVec> {
    let theta = draw_phase(rng);
    gen_direct_cir_with_phase(profile, gain, theta, rng)
}

/// `K x L` per-element cascaded CIRs for a fixed LoS steering.
pub fn gen_element_cirs_with<R: Rng + ?Sized>(
    profile: &FadingProfile,
    layout: &IrsLayout,
    cascaded_gain: f64,
    steering: &LosSteering,
    rng: &mut R,
) -> Result<ComplexMat> {
    profile.validate()?;
    if cascaded_gain.is_nan() || cascaded_gain < 0.0 {
        return Err(Error::parameter("cascaded_gain", "must be >= 0"));
    }
    let taps = profile.num_taps;
    let los = profile.los_amplitude(cascaded_gain);
    let nlos = profile.nlos_tap_power(cascaded_gain);
    let mut out = DMatrix::zeros(layout.num_elements(), taps);
    for k in 0..layout.num_elements() {
        let (p, q) = ((k / layout.cols) as f64, (k % layout.cols) as f64);
        let phase = steering.theta0 + PI * (p * steering.a + q * steering.b);
        out[(k, 0)] = Complex64::from_polar(los, phase);
        for (l, v) in gaussian_complex(taps - 1, nlos, rng)
            .into_iter()
            .enumerate()
        {
            out[(k, l + 1)] = v;
        }
    }
    Ok(out)
}

pub fn gen_element_cirs<R: Rng + ?Sized>(
    profile: &FadingProfile,
    layout: &IrsLayout,
    cascaded_gain: f64,
    rng: &mut R,
) -> Result<ComplexMat> {
    let steering = LosSteering::draw(rng);
    gen_element_cirs_with(profile, layout, cascaded_gain, &steering, rng)
}

/// Sums element CIRs over each sub-surface tile, giving an `M x L` matrix.
pub fn group_elements(element_cirs: &ComplexMat, layout: &IrsLayout) -> Result<ComplexMat> {
    Error::check_len(
        "element CIR rows",
        layout.num_elements(),
        element_cirs.nrows(),
    )?;
    let mut out = DMatrix::zeros(layout.num_subsurfaces(), element_cirs.ncols());
    for k in 0..element_cirs.nrows() {
        let m = layout.subsurface_of(k);
        for l in 0..element_cirs.ncols() {
            out[(m, l)] += element_cirs[(k, l)];
        }
    }
    Ok(out)
}

/// `N`-point CFR of an `L`-tap CIR (zero padded, unnormalized DFT).
pub fn cir_to_cfr(cir: &[Complex64], n: usize) -> Result<ComplexVec> {
    if cir.len() > n {
        return Err(Error::parameter(
            "n",
            format!("{} taps do not fit in {n} sub-carriers", cir.len()),
        ));
    }
    let w = twiddles(n);
    Ok((0..n)
        .map(|k| {
            cir.iter()
                .enumerate()
                .map(|(l, c)| c * w[(k * l) % n])
                .sum()
        })
        .collect())
}

/// Parameters needed to draw a [`ChannelRealization`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub num_subcarriers: usize,
    pub profile: FadingProfile,
    pub layout: IrsLayout,
    pub geometry: Geometry,
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        self.profile.validate()?;
        self.geometry.validate()?;
        if self.profile.num_taps > self.num_subcarriers {
            return Err(Error::parameter(
                "num_taps",
                "cannot exceed the number of sub-carriers",
            ));
        }
        Ok(())
    }

    /// One quasi-static draw.
    ///
    /// Randomness is consumed in a fixed order (direct LoS phase, direct NLoS
    /// taps, steering, element NLoS taps) that does not depend on the tiling,
    /// so one stream yields the same element channels for every `M`.
    pub fn realize<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<ChannelRealization> {
        self.validate()?;
        let direct_cir = gen_direct_cir(
            &self.profile,
            self.profile.direct_gain(&self.geometry)?,
            rng,
        )?;
        let element_cirs = gen_element_cirs(
            &self.profile,
            &self.layout,
            self.profile.cascaded_gain(&self.geometry)?,
            rng,
        )?;
        ChannelRealization::from_cirs(direct_cir, element_cirs, &self.layout, self.num_subcarriers)
    }
}

/// One draw of every channel in the system. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub direct_cir: ComplexVec,
    /// `K x L`.
    pub element_cirs: ComplexMat,
    /// `M x L`, row `m` is the tile sum for sub-surface `m`.
    pub group_cirs: ComplexMat,
    /// Length `N`.
    pub direct_cfr: ComplexVec,
    /// `N x M`, column `m` is the CFR of sub-surface `m`.
    pub cascaded_cfr: ComplexMat,
}

impl ChannelRealization {
    pub fn from_cirs(
        direct_cir: ComplexVec,
        element_cirs: ComplexMat,
        layout: &IrsLayout,
        n: usize,
    ) -> Result<Self> {
        Error::check_len("element CIR taps", direct_cir.len(), element_cirs.ncols())?;
        let group_cirs = group_elements(&element_cirs, layout)?;
        let direct_cfr = cir_to_cfr(&direct_cir, n)?;
        let mut cascaded_cfr = DMatrix::zeros(n, group_cirs.nrows());
        for m in 0..group_cirs.nrows() {
            let row: Vec<Complex64> = group_cirs.row(m).iter().copied().collect();
            for (k, v) in cir_to_cfr(&row, n)?.into_iter().enumerate() {
                cascaded_cfr[(k, m)] = v;
            }
        }
        Ok(Self {
            direct_cir,
            element_cirs,
            group_cirs,
            direct_cfr,
            cascaded_cfr,
        })
    }

    /// Same element channels regrouped under another tiling.
    pub fn regroup(&self, layout: &IrsLayout) -> Result<Self> {
        Self::from_cirs(
            self.direct_cir.clone(),
            self.element_cirs.clone(),
            layout,
            self.direct_cfr.len(),
        )
    }

    pub fn num_subcarriers(&self) -> usize {
        self.direct_cfr.len()
    }

    pub fn num_subsurfaces(&self) -> usize {
        self.cascaded_cfr.ncols()
    }

    /// `h = G phi + d` for per-sub-surface coefficients `phi` (any modulus).
    pub fn superimposed_cfr(&self, phi: &[Complex64]) -> Result<ComplexVec> {
        Error::check_len("reflection coefficients", self.num_subsurfaces(), phi.len())?;
        Ok((0..self.num_subcarriers())
            .map(|k| {
                self.direct_cfr[k]
                    + phi
                        .iter()
                        .enumerate()
                        .map(|(m, p)| p * self.cascaded_cfr[(k, m)])
                        .sum::<Complex64>()
            })
            .collect())
    }
}
