//! Classical two-particle angular-momentum simulations under Bell-type
//! detectors and an ensemble-dependent detector.
//!
//! Three local detector families (direct projection, sign threshold and a
//! stochastic sign threshold) stay within the CHSH bound, while the
//! ensemble-dependent detector reaches `C = 2√2`. The [`oracles`] module
//! holds naive reference computations and deliberately shares no code with
//! the modules it is used to check.

pub mod analysis;
pub mod cli;
pub mod detectors;
pub mod distributions;
pub mod error;
pub mod geometry;
pub mod oracles;
pub mod rng;

pub use analysis::{
    chsh, e_closed, estimate_correlation, fine_feasible, inequality_from_joint, lune_probability,
    sweep_chsh, ChshMode, ChshResult, CorrelationRecord, Feasibility, JointTable, MonteCarlo,
};
pub use detectors::{
    measure_ensemble, measure_pair, measure_pointlike, measure_sequence, DetectorModel,
    MeasurementRecord, Outcome,
};
pub use distributions::{ConfigDensity, Ensemble, PairSource};
pub use error::{Error, Result};
pub use geometry::{AngularMomentumVector, Axis, PhaseSpacePoint, Sign};
pub use rng::RngStream;
