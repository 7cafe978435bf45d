//! The three Monte Carlo studies: estimation MSE versus transmit power, rate
//! versus user distance, and effective rate versus IRS grouping ratio.

use irsim_core::channel::{ChannelModel, ChannelRealization};
use irsim_core::estimation::{empirical_mse, ChannelEstimate, ReflectionPattern, TrainingSetup};
use irsim_core::optimize::{channel_gain, direct_gain, scm_optimize, sdr_optimize, PhaseVector};
use irsim_core::RngStream;
use thiserror::Error;

use crate::config::{dbm_to_watts, ConfigError, OverheadModel, SystemConfig};
use crate::stats::{ratio_of_means, summarize, Summary};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] irsim_core::Error),
}

pub type RunResult<T> = Result<T, RunError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    MseVsPower,
    RateVsDistance,
    RateVsGrouping,
}

impl Experiment {
    pub fn id(self) -> &'static str {
        match self {
            Experiment::MseVsPower => "mse_vs_power",
            Experiment::RateVsDistance => "rate_vs_distance",
            Experiment::RateVsGrouping => "rate_vs_grouping",
        }
    }

    pub fn sweep_name(self) -> &'static str {
        match self {
            Experiment::MseVsPower => "pt_dbm",
            Experiment::RateVsDistance => "user_horizontal_m",
            Experiment::RateVsGrouping => "grouping_ratio",
        }
    }

    /// Metric drawn in the SVG chart.
    pub fn headline_metric(self) -> &'static str {
        match self {
            Experiment::MseVsPower => "mse_db",
            Experiment::RateVsDistance => "rate",
            Experiment::RateVsGrouping => "effective_rate",
        }
    }

    pub fn axis_labels(self) -> (&'static str, &'static str) {
        match self {
            Experiment::MseVsPower => ("transmit power Pt (dBm)", "normalized MSE (dB)"),
            Experiment::RateVsDistance => (
                "user-AP horizontal distance (m)",
                "achievable rate (bit/s/Hz)",
            ),
            Experiment::RateVsGrouping => (
                "grouping ratio rho = M/K (dimensionless)",
                "effective rate (bit/s/Hz)",
            ),
        }
    }

    pub fn run(self, cfg: &SystemConfig) -> RunResult<ExperimentOutput> {
        match self {
            Experiment::MseVsPower => run_mse_vs_power(cfg, &cfg.powers_dbm),
            Experiment::RateVsDistance => run_rate_vs_distance(cfg, &cfg.horizontals_m),
            Experiment::RateVsGrouping => run_rate_vs_grouping(cfg, &cfg.m_values),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: &'static str,
    pub sweep_name: &'static str,
    pub sweep_value: f64,
    pub scheme: &'static str,
    pub metric: &'static str,
    pub value: f64,
    pub stderr: f64,
    pub realizations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub experiment: Experiment,
    pub rows: Vec<ResultRow>,
    /// Extra `key = value` facts written to the sidecar file.
    pub metadata: Vec<(String, String)>,
}

impl ExperimentOutput {
    pub fn find(&self, sweep_value: f64, scheme: &str, metric: &str) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.sweep_value == sweep_value && r.scheme == scheme && r.metric == metric)
    }
}

struct RowSink<'a> {
    experiment: Experiment,
    cfg: &'a SystemConfig,
    rows: Vec<ResultRow>,
}

impl<'a> RowSink<'a> {
    fn new(experiment: Experiment, cfg: &'a SystemConfig) -> Self {
        Self {
            experiment,
            cfg,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, sweep_value: f64, scheme: &'static str, metric: &'static str, s: Summary) {
        self.rows.push(ResultRow {
            experiment: self.experiment.id(),
            sweep_name: self.experiment.sweep_name(),
            sweep_value,
            scheme,
            metric,
            value: s.mean,
            stderr: s.stderr,
            realizations: self.cfg.realizations,
            seed: self.cfg.seed,
        });
    }
}

const CHANNEL_LABEL: u64 = 0;

fn channel_stream(cfg: &SystemConfig, realization: usize) -> RngStream {
    RngStream::new(cfg.seed, realization as u64).fork(CHANNEL_LABEL)
}

/// Pilot comb densities and patterns compared in the MSE study.
pub const MSE_SCHEMES: [(&str, &str, usize, MsePattern); 3] = [
    ("dft_np8", "theory_dft_np8", 8, MsePattern::Dft),
    ("dft_np16", "theory_dft_np16", 16, MsePattern::Dft),
    ("onoff_np8", "theory_onoff_np8", 8, MsePattern::OnOff),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MsePattern {
    Dft,
    OnOff,
}

fn mse_setups(cfg: &SystemConfig, pt: f64) -> RunResult<Vec<TrainingSetup>> {
    MSE_SCHEMES
        .iter()
        .map(|&(_, _, np, kind)| {
            if !cfg.n.is_multiple_of(np) {
                return Err(ConfigError::PilotsNotDivisor { np, n: cfg.n }.into());
            }
            if np < cfg.l {
                return Err(ConfigError::TooFewPilots { np, l: cfg.l }.into());
            }
            let pattern = match kind {
                MsePattern::Dft => ReflectionPattern::dft(cfg.m)?,
                MsePattern::OnOff => ReflectionPattern::onoff(cfg.m)?,
            };
            Ok(TrainingSetup::new(
                cfg.n,
                np,
                pattern,
                pt,
                cfg.noise_var(),
                cfg.l,
            )?)
        })
        .collect()
}

/// Mean per-sub-carrier power of `[d G]`.
pub fn channel_power(real: &ChannelRealization) -> f64 {
    let n = real.num_subcarriers() as f64;
    let direct: f64 = real.direct_cfr.iter().map(|v| v.norm_sqr()).sum();
    let cascaded: f64 = real.cascaded_cfr.iter().map(|v| v.norm_sqr()).sum();
    (direct + cascaded) / n
}

/// Normalized estimation MSE of the DFT and ON/OFF training schemes, next to
/// their closed-form values.
pub fn run_mse_vs_power(cfg: &SystemConfig, powers_dbm: &[f64]) -> RunResult<ExperimentOutput> {
    cfg.validate()?;
    if powers_dbm.is_empty() {
        return Err(ConfigError::EmptySweep {
            field: "powers_dbm",
        }
        .into());
    }
    let model = cfg.channel_model(cfg.m)?;
    let setups: Vec<Vec<TrainingSetup>> = powers_dbm
        .iter()
        .map(|&p| mse_setups(cfg, dbm_to_watts(p)))
        .collect::<RunResult<_>>()?;

    let reals = cfg.realizations;
    let mut power = Vec::with_capacity(reals);
    // mse[point][scheme][realization]
    let mut mse = vec![vec![Vec::with_capacity(reals); MSE_SCHEMES.len()]; powers_dbm.len()];
    for r in 0..reals {
        let real = model.realize(&mut channel_stream(cfg, r).generator())?;
        power.push(channel_power(&real));
        let base = RngStream::new(cfg.seed, r as u64);
        for (p, point_setups) in setups.iter().enumerate() {
            for (s, setup) in point_setups.iter().enumerate() {
                let label = 1 + (p * MSE_SCHEMES.len() + s) as u64;
                let est = setup.estimate(&real, &mut base.fork(label).generator())?;
                mse[p][s].push(empirical_mse(&est, &real.direct_cfr, &real.cascaded_cfr)?);
            }
        }
    }

    let to_db = |s: Summary| Summary {
        mean: 10.0 * s.mean.log10(),
        stderr: 10.0 / std::f64::consts::LN_10 * s.stderr / s.mean,
    };
    let mut sink = RowSink::new(Experiment::MseVsPower, cfg);
    for (p, &pt_dbm) in powers_dbm.iter().enumerate() {
        for (s, &(name, theory_name, _, _)) in MSE_SCHEMES.iter().enumerate() {
            sink.push(
                pt_dbm,
                name,
                "mse_db",
                to_db(ratio_of_means(&mse[p][s], &power)),
            );
            let theory = vec![setups[p][s].theoretical_mse()?; reals];
            sink.push(
                pt_dbm,
                theory_name,
                "mse_db",
                to_db(ratio_of_means(&theory, &power)),
            );
        }
    }
    let norm = summarize(&power);
    Ok(ExperimentOutput {
        experiment: Experiment::MseVsPower,
        rows: sink.rows,
        metadata: vec![
            (
                "normalization".into(),
                "mean per-sub-carrier power of [d G], (1/N) E||[d G]||_F^2".into(),
            ),
            ("normalization_power".into(), format!("{:.8e}", norm.mean)),
            (
                "normalization_power_stderr".into(),
                format!("{:.8e}", norm.stderr),
            ),
        ],
    })
}

/// The five schemes compared in the rate studies, in CSV order.
pub const RATE_SCHEMES: [&str; 5] = [
    "proposed_est_scm",
    "proposed_est_sdr",
    "onoff_est_sdr",
    "no_irs",
    "perfect_csi_sdr",
];

/// Rates of one scheme on one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSample {
    /// Achievable rate on the true channel with the chosen phases.
    pub rate: f64,
    /// Rate the receiver would predict from its own channel estimate.
    pub rate_est: f64,
    pub bound: f64,
}

const PILOT_NOISE_LABEL: u64 = 1;
const RANDOMIZATION_LABEL: u64 = 2;

/// Runs all [`RATE_SCHEMES`] on one realization. `stream` is the
/// realization's stream. Both training schemes see the same pilot-noise
/// draws and every SDR call the same randomization draws (common random
/// numbers), so scheme differences are measured pairwise.
pub fn rate_samples(
    cfg: &SystemConfig,
    real: &ChannelRealization,
    stream: &RngStream,
) -> RunResult<[RateSample; 5]> {
    let m = real.num_subsurfaces();
    let budget = cfg.link_budget();
    let pt = cfg.transmit_power();
    let noise = cfg.noise_var();

    let truth_sample = |phi: &PhaseVector, est: &ChannelEstimate| -> RunResult<RateSample> {
        let w = channel_gain(phi, &real.direct_cfr, &real.cascaded_cfr)?;
        let w_est = channel_gain(phi, &est.d_hat, &est.g_hat)?;
        Ok(RateSample {
            rate: budget.rate(&w),
            rate_est: budget.rate(&w_est),
            bound: budget.upper_bound(&w),
        })
    };

    let proposed = TrainingSetup::new(cfg.n, cfg.np, ReflectionPattern::dft(m)?, pt, noise, cfg.l)?
        .estimate(real, &mut stream.fork(PILOT_NOISE_LABEL).generator())?;
    let onoff = TrainingSetup::new(
        cfg.n,
        cfg.np,
        ReflectionPattern::onoff(m)?,
        pt,
        noise,
        cfg.l,
    )?
    .estimate(real, &mut stream.fork(PILOT_NOISE_LABEL).generator())?;

    let phi_scm = scm_optimize(&proposed.d_cir_hat, &proposed.g_cir_hat)?;
    let phi_sdr = sdr_optimize(
        &proposed.d_hat,
        &proposed.g_hat,
        cfg.sdr_randomizations,
        &mut stream.fork(RANDOMIZATION_LABEL).generator(),
    )?;
    let phi_onoff = sdr_optimize(
        &onoff.d_hat,
        &onoff.g_hat,
        cfg.sdr_randomizations,
        &mut stream.fork(RANDOMIZATION_LABEL).generator(),
    )?;
    let perfect = ChannelEstimate::from_truth(real);
    let phi_perfect = sdr_optimize(
        &perfect.d_hat,
        &perfect.g_hat,
        cfg.sdr_randomizations,
        &mut stream.fork(RANDOMIZATION_LABEL).generator(),
    )?;

    let w_direct = direct_gain(&real.direct_cfr);
    let no_irs = RateSample {
        rate: budget.rate(&w_direct),
        rate_est: budget.rate(&w_direct),
        bound: budget.upper_bound(&w_direct),
    };
    Ok([
        truth_sample(&phi_scm, &proposed)?,
        truth_sample(&phi_sdr, &proposed)?,
        truth_sample(&phi_onoff, &onoff)?,
        no_irs,
        truth_sample(&phi_perfect, &perfect)?,
    ])
}

fn push_rate_rows(sink: &mut RowSink<'_>, sweep_value: f64, samples: &[[RateSample; 5]], m: usize) {
    let cfg = sink.cfg;
    let fraction = cfg.payload_fraction(m);
    let fraction_re = cfg.payload_fraction_re(m);
    for (s, &scheme) in RATE_SCHEMES.iter().enumerate() {
        let pick = |f: fn(&RateSample) -> f64| -> Summary {
            summarize(&samples.iter().map(|x| f(&x[s])).collect::<Vec<_>>())
        };
        let rate = pick(|x| x.rate);
        let scaled = |k: f64| Summary {
            mean: k * rate.mean,
            stderr: k * rate.stderr,
        };
        sink.push(sweep_value, scheme, "rate", rate);
        sink.push(sweep_value, scheme, "rate_est", pick(|x| x.rate_est));
        sink.push(sweep_value, scheme, "bound", pick(|x| x.bound));
        sink.push(sweep_value, scheme, "effective_rate", scaled(fraction));
        if cfg.overhead_model == OverheadModel::ResourceElement {
            sink.push(
                sweep_value,
                scheme,
                "effective_rate_re",
                scaled(fraction_re),
            );
        }
    }
}

/// Per-realization samples of every rate scheme at one user distance.
pub fn rate_vs_distance_samples(
    cfg: &SystemConfig,
    horizontal: f64,
) -> RunResult<Vec<[RateSample; 5]>> {
    let mut model: ChannelModel = cfg.channel_model(cfg.m)?;
    model.geometry.user_horizontal = horizontal;
    model.validate()?;
    (0..cfg.realizations)
        .map(|r| {
            let real = model.realize(&mut channel_stream(cfg, r).generator())?;
            rate_samples(cfg, &real, &RngStream::new(cfg.seed, r as u64))
        })
        .collect()
}

pub fn run_rate_vs_distance(
    cfg: &SystemConfig,
    horizontals_m: &[f64],
) -> RunResult<ExperimentOutput> {
    cfg.validate()?;
    if horizontals_m.is_empty() {
        return Err(ConfigError::EmptySweep {
            field: "horizontals_m",
        }
        .into());
    }
    let mut sink = RowSink::new(Experiment::RateVsDistance, cfg);
    for &h in horizontals_m {
        let samples = rate_vs_distance_samples(cfg, h)?;
        push_rate_rows(&mut sink, h, &samples, cfg.m);
    }
    Ok(ExperimentOutput {
        experiment: Experiment::RateVsDistance,
        rows: sink.rows,
        metadata: overhead_metadata(cfg),
    })
}

/// Per-realization samples for every `m` in `m_values`. Each realization
/// draws one element-level channel and regroups it for every tiling.
pub fn rate_vs_grouping_samples(
    cfg: &SystemConfig,
    m_values: &[usize],
) -> RunResult<Vec<Vec<[RateSample; 5]>>> {
    let layouts = m_values
        .iter()
        .map(|&m| cfg.check_subsurfaces(m))
        .collect::<Result<Vec<_>, _>>()?;
    let Some(first) = layouts.first() else {
        return Err(ConfigError::EmptySweep { field: "m_values" }.into());
    };
    let model = ChannelModel {
        layout: *first,
        ..cfg.channel_model(cfg.m)?
    };
    let mut out = vec![Vec::with_capacity(cfg.realizations); layouts.len()];
    for r in 0..cfg.realizations {
        let base = model.realize(&mut channel_stream(cfg, r).generator())?;
        let stream = RngStream::new(cfg.seed, r as u64);
        for (slot, layout) in out.iter_mut().zip(&layouts) {
            let real = base.regroup(layout)?;
            slot.push(rate_samples(cfg, &real, &stream)?);
        }
    }
    Ok(out)
}

pub fn run_rate_vs_grouping(cfg: &SystemConfig, m_values: &[usize]) -> RunResult<ExperimentOutput> {
    cfg.validate()?;
    let samples = rate_vs_grouping_samples(cfg, m_values)?;
    let k = (cfg.irs_rows * cfg.irs_cols) as f64;
    let mut sink = RowSink::new(Experiment::RateVsGrouping, cfg);
    for (&m, point) in m_values.iter().zip(&samples) {
        push_rate_rows(&mut sink, m as f64 / k, point, m);
    }
    let mut metadata = overhead_metadata(cfg);
    metadata.push((
        "m_values".into(),
        m_values
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(", "),
    ));
    Ok(ExperimentOutput {
        experiment: Experiment::RateVsGrouping,
        rows: sink.rows,
        metadata,
    })
}

fn overhead_metadata(cfg: &SystemConfig) -> Vec<(String, String)> {
    let mut meta = vec![
        (
            "rate_evaluation".into(),
            "rate and bound use the true channel; rate_est uses the scheme's own estimate".into(),
        ),
        (
            "effective_rate".into(),
            "(T - (M + 1)) / T * rate, pilot symbols carry no payload".into(),
        ),
    ];
    if cfg.overhead_model == OverheadModel::ResourceElement {
        meta.push((
            "effective_rate_re".into(),
            "(1 - (M + 1) Np / (T N)) * rate, only pilot tones counted".into(),
        ));
    }
    meta
}
