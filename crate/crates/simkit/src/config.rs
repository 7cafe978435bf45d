//! Flat `key = value` configuration for the experiments.
//!
//! Keys match the [`SystemConfig`] field names, `#` starts a comment and
//! unknown keys are rejected. Lists (`powers_dbm`, `horizontals_m`,
//! `m_values`) are comma separated; `layout` is `ROWSxCOLS`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use irsim_core::channel::{ChannelModel, FadingProfile, Geometry, IrsLayout};
use irsim_core::optimize::LinkBudget;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: key `{key}` given twice")]
    DuplicateKey { key: String, line: usize },
    #[error("line {line}: malformed value `{value}` for key `{key}`")]
    Malformed {
        key: String,
        line: usize,
        value: String,
    },
    #[error("`{field}` must be positive")]
    NotPositive { field: &'static str },
    #[error("cyclic prefix lcp = {lcp} is shorter than the channel, l = {l}")]
    CyclicPrefixTooShort { lcp: usize, l: usize },
    #[error("np = {np} does not divide n = {n}")]
    PilotsNotDivisor { np: usize, n: usize },
    #[error("np = {np} pilot tones cannot resolve l = {l} taps")]
    TooFewPilots { np: usize, l: usize },
    #[error("l = {l} taps do not fit in n = {n} sub-carriers")]
    ChannelLongerThanSymbol { l: usize, n: usize },
    #[error("{m} sub-surfaces cannot tile a {rows}x{cols} surface")]
    SubsurfacesDoNotTile { m: usize, rows: usize, cols: usize },
    #[error(
        "frame of {frame_symbols} symbols leaves no data after {pilot_symbols} pilot symbols (m = {m})"
    )]
    FrameTooShort {
        frame_symbols: usize,
        pilot_symbols: usize,
        m: usize,
    },
    #[error("eta = {eta} is invalid: must be finite, >= 0, and 0 when l = 1")]
    InvalidEta { eta: f64 },
    #[error("geometry field `{field}` must be a positive distance")]
    InvalidGeometry { field: &'static str },
    #[error("`{field}` must be finite")]
    NotFinite { field: &'static str },
    #[error("sweep `{field}` is empty")]
    EmptySweep { field: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverheadModel {
    /// Pilot symbols carry no payload: `effective = (T - (M+1)) / T * rate`.
    Symbol,
    /// Adds the resource-element fraction `(M+1) Np / (T N)` as a second metric.
    ResourceElement,
}

impl OverheadModel {
    fn as_str(self) -> &'static str {
        match self {
            OverheadModel::Symbol => "symbol",
            OverheadModel::ResourceElement => "resource_element",
        }
    }
}

impl FromStr for OverheadModel {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "symbol" => Ok(OverheadModel::Symbol),
            "resource_element" => Ok(OverheadModel::ResourceElement),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub n: usize,
    pub np: usize,
    pub lcp: usize,
    pub l: usize,
    pub irs_rows: usize,
    pub irs_cols: usize,
    pub m: usize,
    pub frame_symbols: usize,
    pub pt_dbm: f64,
    pub noise_dbm: f64,
    pub gamma_db: f64,
    pub eta: f64,
    pub irs_ap_distance: f64,
    pub user_lateral_offset: f64,
    pub user_horizontal: f64,
    pub pathloss_exponent_direct: f64,
    pub pathloss_exponent_user_irs: f64,
    pub pathloss_exponent_irs_ap: f64,
    pub ref_loss_db: f64,
    pub sdr_randomizations: usize,
    pub realizations: usize,
    pub seed: u64,
    pub overhead_model: OverheadModel,
    pub powers_dbm: Vec<f64>,
    pub horizontals_m: Vec<f64>,
    pub m_values: Vec<usize>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let geometry = Geometry::default();
        let profile = FadingProfile::default();
        Self {
            n: 64,
            np: 64,
            lcp: 8,
            l: profile.num_taps,
            irs_rows: 12,
            irs_cols: 12,
            m: 12,
            frame_symbols: 150,
            pt_dbm: 0.0,
            noise_dbm: -80.0,
            gamma_db: 9.0,
            eta: profile.eta,
            irs_ap_distance: geometry.irs_ap_distance,
            user_lateral_offset: geometry.user_lateral_offset,
            user_horizontal: geometry.user_horizontal,
            pathloss_exponent_direct: profile.pathloss_exponent_direct,
            pathloss_exponent_user_irs: profile.pathloss_exponent_user_irs,
            pathloss_exponent_irs_ap: profile.pathloss_exponent_irs_ap,
            ref_loss_db: profile.ref_loss_db,
            sdr_randomizations: 100,
            realizations: 2000,
            seed: 1,
            overhead_model: OverheadModel::Symbol,
            powers_dbm: (0..=8).map(|i| -10.0 + 5.0 * i as f64).collect(),
            horizontals_m: (0..=8).map(|i| 10.0 + 5.0 * i as f64).collect(),
            m_values: vec![1, 2, 4, 6, 9, 12, 16, 24, 36],
        }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

fn parse_value<T: FromStr>(key: &str, line: usize, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Malformed {
        key: key.to_string(),
        line,
        value: value.to_string(),
    })
}

fn parse_list<T: FromStr>(key: &str, line: usize, value: &str) -> Result<Vec<T>, ConfigError> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|item| parse_value(key, line, item.trim()))
        .collect()
}

fn join<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(T::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

impl SystemConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg = Self::parse(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses config text on top of the defaults. Does not validate.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    text: content.to_string(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if seen.iter().any(|k| k == key) {
                return Err(ConfigError::DuplicateKey {
                    key: key.to_string(),
                    line,
                });
            }
            cfg.set(key, value, line)?;
            seen.push(key.to_string());
        }
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        match key {
            "n" => self.n = parse_value(key, line, value)?,
            "np" => self.np = parse_value(key, line, value)?,
            "lcp" => self.lcp = parse_value(key, line, value)?,
            "l" => self.l = parse_value(key, line, value)?,
            "layout" => {
                let (r, c) =
                    value
                        .split_once(['x', 'X'])
                        .ok_or_else(|| ConfigError::Malformed {
                            key: key.to_string(),
                            line,
                            value: value.to_string(),
                        })?;
                self.irs_rows = parse_value(key, line, r.trim())?;
                self.irs_cols = parse_value(key, line, c.trim())?;
            }
            "m" => self.m = parse_value(key, line, value)?,
            "frame_symbols" => self.frame_symbols = parse_value(key, line, value)?,
            "pt_dbm" => self.pt_dbm = parse_value(key, line, value)?,
            "noise_dbm" => self.noise_dbm = parse_value(key, line, value)?,
            "gamma_db" => self.gamma_db = parse_value(key, line, value)?,
            "eta" => self.eta = parse_value(key, line, value)?,
            "irs_ap_distance" => self.irs_ap_distance = parse_value(key, line, value)?,
            "user_lateral_offset" => self.user_lateral_offset = parse_value(key, line, value)?,
            "user_horizontal" => self.user_horizontal = parse_value(key, line, value)?,
            "pathloss_exponent_direct" => {
                self.pathloss_exponent_direct = parse_value(key, line, value)?
            }
            "pathloss_exponent_user_irs" => {
                self.pathloss_exponent_user_irs = parse_value(key, line, value)?
            }
            "pathloss_exponent_irs_ap" => {
                self.pathloss_exponent_irs_ap = parse_value(key, line, value)?
            }
            "ref_loss_db" => self.ref_loss_db = parse_value(key, line, value)?,
            "sdr_randomizations" => self.sdr_randomizations = parse_value(key, line, value)?,
            "realizations" => self.realizations = parse_value(key, line, value)?,
            "seed" => self.seed = parse_value(key, line, value)?,
            "overhead_model" => self.overhead_model = parse_value(key, line, value)?,
            "powers_dbm" => self.powers_dbm = parse_list(key, line, value)?,
            "horizontals_m" => self.horizontals_m = parse_list(key, line, value)?,
            "m_values" => self.m_values = parse_list(key, line, value)?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    key: key.to_string(),
                    line,
                })
            }
        }
        Ok(())
    }

    /// Serializes every field; `parse` of the output gives back `self`.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("n", self.n.to_string());
        kv("np", self.np.to_string());
        kv("lcp", self.lcp.to_string());
        kv("l", self.l.to_string());
        kv("layout", format!("{}x{}", self.irs_rows, self.irs_cols));
        kv("m", self.m.to_string());
        kv("frame_symbols", self.frame_symbols.to_string());
        kv("pt_dbm", self.pt_dbm.to_string());
        kv("noise_dbm", self.noise_dbm.to_string());
        kv("gamma_db", self.gamma_db.to_string());
        kv("eta", self.eta.to_string());
        kv("irs_ap_distance", self.irs_ap_distance.to_string());
        kv("user_lateral_offset", self.user_lateral_offset.to_string());
        kv("user_horizontal", self.user_horizontal.to_string());
        kv(
            "pathloss_exponent_direct",
            self.pathloss_exponent_direct.to_string(),
        );
        kv(
            "pathloss_exponent_user_irs",
            self.pathloss_exponent_user_irs.to_string(),
        );
        kv(
            "pathloss_exponent_irs_ap",
            self.pathloss_exponent_irs_ap.to_string(),
        );
        kv("ref_loss_db", self.ref_loss_db.to_string());
        kv("sdr_randomizations", self.sdr_randomizations.to_string());
        kv("realizations", self.realizations.to_string());
        kv("seed", self.seed.to_string());
        kv("overhead_model", self.overhead_model.as_str().to_string());
        kv("powers_dbm", join(&self.powers_dbm));
        kv("horizontals_m", join(&self.horizontals_m));
        kv("m_values", join(&self.m_values));
        s
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, value) in [
            ("n", self.n),
            ("np", self.np),
            ("l", self.l),
            ("irs_rows", self.irs_rows),
            ("irs_cols", self.irs_cols),
            ("m", self.m),
            ("frame_symbols", self.frame_symbols),
            ("sdr_randomizations", self.sdr_randomizations),
            ("realizations", self.realizations),
        ] {
            if value == 0 {
                return Err(ConfigError::NotPositive { field });
            }
        }
        for (field, value) in [
            ("pt_dbm", self.pt_dbm),
            ("noise_dbm", self.noise_dbm),
            ("gamma_db", self.gamma_db),
            ("pathloss_exponent_direct", self.pathloss_exponent_direct),
            (
                "pathloss_exponent_user_irs",
                self.pathloss_exponent_user_irs,
            ),
            ("pathloss_exponent_irs_ap", self.pathloss_exponent_irs_ap),
            ("ref_loss_db", self.ref_loss_db),
            ("user_horizontal", self.user_horizontal),
        ] {
            if !value.is_finite() {
                return Err(ConfigError::NotFinite { field });
            }
        }
        if self.l > self.n {
            return Err(ConfigError::ChannelLongerThanSymbol {
                l: self.l,
                n: self.n,
            });
        }
        if self.lcp < self.l {
            return Err(ConfigError::CyclicPrefixTooShort {
                lcp: self.lcp,
                l: self.l,
            });
        }
        if !self.n.is_multiple_of(self.np) {
            return Err(ConfigError::PilotsNotDivisor {
                np: self.np,
                n: self.n,
            });
        }
        if self.np < self.l {
            return Err(ConfigError::TooFewPilots {
                np: self.np,
                l: self.l,
            });
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) || (self.l == 1 && self.eta > 0.0) {
            return Err(ConfigError::InvalidEta { eta: self.eta });
        }
        for (field, value) in [
            ("irs_ap_distance", self.irs_ap_distance),
            ("user_lateral_offset", self.user_lateral_offset),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::InvalidGeometry { field });
            }
        }
        self.check_subsurfaces(self.m)?;
        for (field, empty) in [
            ("powers_dbm", self.powers_dbm.is_empty()),
            ("horizontals_m", self.horizontals_m.is_empty()),
            ("m_values", self.m_values.is_empty()),
        ] {
            if empty {
                return Err(ConfigError::EmptySweep { field });
            }
        }
        if self.powers_dbm.iter().any(|p| !p.is_finite()) {
            return Err(ConfigError::NotFinite {
                field: "powers_dbm",
            });
        }
        if self.horizontals_m.iter().any(|p| !p.is_finite()) {
            return Err(ConfigError::NotFinite {
                field: "horizontals_m",
            });
        }
        Ok(())
    }

    /// Tiling and frame-length checks for a sub-surface count.
    pub fn check_subsurfaces(&self, m: usize) -> Result<IrsLayout, ConfigError> {
        let layout =
            IrsLayout::with_subsurfaces(self.irs_rows, self.irs_cols, m).map_err(|_| {
                ConfigError::SubsurfacesDoNotTile {
                    m,
                    rows: self.irs_rows,
                    cols: self.irs_cols,
                }
            })?;
        if self.frame_symbols <= m + 1 {
            return Err(ConfigError::FrameTooShort {
                frame_symbols: self.frame_symbols,
                pilot_symbols: m + 1,
                m,
            });
        }
        Ok(layout)
    }

    pub fn transmit_power(&self) -> f64 {
        dbm_to_watts(self.pt_dbm)
    }

    pub fn noise_var(&self) -> f64 {
        dbm_to_watts(self.noise_dbm)
    }

    pub fn geometry(&self) -> Geometry {
        Geometry {
            irs_ap_distance: self.irs_ap_distance,
            user_lateral_offset: self.user_lateral_offset,
            user_horizontal: self.user_horizontal,
        }
    }

    pub fn profile(&self) -> FadingProfile {
        FadingProfile {
            num_taps: self.l,
            eta: self.eta,
            pathloss_exponent_direct: self.pathloss_exponent_direct,
            pathloss_exponent_user_irs: self.pathloss_exponent_user_irs,
            pathloss_exponent_irs_ap: self.pathloss_exponent_irs_ap,
            ref_loss_db: self.ref_loss_db,
        }
    }

    pub fn channel_model(&self, m: usize) -> Result<ChannelModel, ConfigError> {
        Ok(ChannelModel {
            num_subcarriers: self.n,
            profile: self.profile(),
            layout: self.check_subsurfaces(m)?,
            geometry: self.geometry(),
        })
    }

    pub fn link_budget(&self) -> LinkBudget {
        LinkBudget {
            transmit_power: self.transmit_power(),
            noise_var: self.noise_var(),
            gamma_db: self.gamma_db,
            n: self.n,
            lcp: self.lcp,
        }
    }

    /// Fraction of the frame left for data under the symbol-level model.
    pub fn payload_fraction(&self, m: usize) -> f64 {
        (self.frame_symbols - (m + 1)) as f64 / self.frame_symbols as f64
    }

    /// Fraction of resource elements left for data when only pilot tones count.
    pub fn payload_fraction_re(&self, m: usize) -> f64 {
        1.0 - ((m + 1) * self.np) as f64 / (self.frame_symbols * self.n) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = SystemConfig::default();
        cfg.validate().unwrap();
        assert_eq!(SystemConfig::parse(&cfg.to_config_string()).unwrap(), cfg);
    }

    #[test]
    fn non_default_round_trip() {
        let cfg = SystemConfig {
            pt_dbm: -7.25,
            eta: 0.1,
            seed: u64::MAX,
            overhead_model: OverheadModel::ResourceElement,
            powers_dbm: vec![-3.5, 1e-3],
            m_values: vec![4],
            ..SystemConfig::default()
        };
        assert_eq!(SystemConfig::parse(&cfg.to_config_string()).unwrap(), cfg);
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg =
            SystemConfig::parse("# header\n\nnp = 8   # comb\nlayout = 6x6\nm = 4\n").unwrap();
        assert_eq!((cfg.np, cfg.irs_rows, cfg.irs_cols, cfg.m), (8, 6, 6, 4));
        cfg.validate().unwrap();
    }

    #[test]
    fn malformed_value_names_key_and_line() {
        let err = SystemConfig::parse("n = 64\n# ok\npt_dbm = ten\n").unwrap_err();
        match err {
            ConfigError::Malformed { key, line, value } => {
                assert_eq!((key.as_str(), line, value.as_str()), ("pt_dbm", 3, "ten"));
            }
            other => panic!("{other:?}"),
        }
        assert!(err_string("m_values = 1, x").contains("m_values"));
    }

    fn err_string(text: &str) -> String {
        SystemConfig::parse(text).unwrap_err().to_string()
    }

    #[test]
    fn unknown_duplicate_and_syntax_errors() {
        assert!(matches!(
            SystemConfig::parse("foo = 1"),
            Err(ConfigError::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            SystemConfig::parse("n = 64\nn = 32"),
            Err(ConfigError::DuplicateKey { line: 2, .. })
        ));
        assert!(matches!(
            SystemConfig::parse("just words"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            SystemConfig::parse("overhead_model = bits"),
            Err(ConfigError::Malformed { .. })
        ));
    }

    #[test]
    fn each_invariant_has_its_own_error() {
        let check = |text: &str| SystemConfig::parse(text).unwrap().validate().unwrap_err();
        assert!(matches!(
            check("lcp = 4"),
            ConfigError::CyclicPrefixTooShort { lcp: 4, l: 6 }
        ));
        assert!(matches!(
            check("np = 12"),
            ConfigError::PilotsNotDivisor { np: 12, n: 64 }
        ));
        assert!(matches!(
            check("np = 4"),
            ConfigError::TooFewPilots { np: 4, l: 6 }
        ));
        assert!(matches!(
            check("m = 5"),
            ConfigError::SubsurfacesDoNotTile { m: 5, .. }
        ));
        assert!(matches!(
            check("m = 144\nframe_symbols = 145"),
            ConfigError::FrameTooShort { .. }
        ));
        assert!(matches!(check("eta = -1"), ConfigError::InvalidEta { .. }));
        assert!(matches!(
            check("l = 1\nlcp = 8"),
            ConfigError::InvalidEta { .. }
        ));
        assert!(matches!(
            check("irs_ap_distance = 0"),
            ConfigError::InvalidGeometry {
                field: "irs_ap_distance"
            }
        ));
        assert!(matches!(
            check("realizations = 0"),
            ConfigError::NotPositive {
                field: "realizations"
            }
        ));
        assert!(matches!(
            check("powers_dbm ="),
            ConfigError::EmptySweep {
                field: "powers_dbm"
            }
        ));
        assert!(matches!(
            check("n = 4\nnp = 4"),
            ConfigError::ChannelLongerThanSymbol { .. }
        ));
        assert!(matches!(
            check("pt_dbm = inf"),
            ConfigError::NotFinite { field: "pt_dbm" }
        ));
    }

    #[test]
    fn full_tiling_needs_long_frame() {
        let short = SystemConfig {
            frame_symbols: 145,
            ..SystemConfig::default()
        };
        assert!(matches!(
            short.check_subsurfaces(144),
            Err(ConfigError::FrameTooShort { .. })
        ));
        let long = SystemConfig {
            frame_symbols: 146,
            ..short
        };
        assert_eq!(long.check_subsurfaces(144).unwrap().num_subsurfaces(), 144);
    }

    #[test]
    fn unit_conversions() {
        assert!((dbm_to_watts(0.0) - 1e-3).abs() < 1e-18);
        assert!((dbm_to_watts(-80.0) - 1e-11).abs() < 1e-24);
        let cfg = SystemConfig::default();
        assert!((cfg.payload_fraction(12) - 137.0 / 150.0).abs() < 1e-15);
        assert!((cfg.payload_fraction_re(12) - (1.0 - 13.0 * 64.0 / (150.0 * 64.0))).abs() < 1e-15);
    }

    #[test]
    fn load_reports_missing_file() {
        let err = SystemConfig::load(Path::new("/nonexistent/simkit.conf")).unwrap_err();
        assert!(matches!(err, ConfigError::Io { .. }));
    }
}
