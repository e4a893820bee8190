//! A posteriori diagnostics for eddy viscosity models: flow scales, dissipation
//! statistics, resolution verdicts and dissipation bounds computed from
//! velocity-field time series, plus a small periodic pseudo-spectral solver for
//! generating verifiable test flows.

pub mod closures;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod grid;
pub mod io;
pub mod scales;
pub mod solver;
pub mod timestats;

pub use closures::{ClosureKind, ClosureSpec, ClosureStats};
pub use diagnostics::{
    AnalysisOptions, BoundEvaluation, DiagnosticsReport, DissipationSeries, ResolutionVerdict,
    Verdict,
};
pub use error::{Error, Result};
pub use field::{Field, Snapshot, SnapshotSeries};
pub use grid::Grid;
pub use scales::FlowScales;
pub use solver::{Forcing, SolverConfig};
pub use timestats::{InfAverage, TimeSeries};
