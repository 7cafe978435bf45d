//! Channel estimation and passive beamforming for an OFDM uplink assisted by
//! an intelligent reflecting surface (IRS).
//!
//! - [`spectra`]: DFT conventions, Zadoff-Chu pilots, seeded random streams.
//! - [`channel`]: Rician frequency-selective direct and cascaded channels.
//! - [`estimation`]: comb-pilot LS estimation with IRS training patterns.
//! - [`optimize`]: SCM, SDR and brute-force reflection optimizers, rates.

pub mod channel;
pub mod error;
pub mod estimation;
pub mod optimize;
pub mod spectra;

pub use channel::{ChannelModel, ChannelRealization, FadingProfile, Geometry, IrsLayout};
pub use error::{Error, Result};
pub use estimation::{ChannelEstimate, PatternKind, PilotGrid, ReflectionPattern, TrainingSetup};
pub use num_complex::Complex64;
pub use optimize::{GainSpectrum, LinkBudget, PhaseVector, RateReport};
pub use spectra::{ComplexMat, ComplexVec, RngStream, SimRng};
