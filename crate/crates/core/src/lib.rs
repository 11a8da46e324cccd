//! Simulation and verification toolkit for the truncation question in
//! long-range percolation.
//!
//! The crate samples bond configurations lazily over infinite edge sets,
//! estimates survival under truncated measures, and builds the block-event
//! renormalizations used to show that truncated models keep percolating.
//! Every block construction is checked configuration by configuration: the
//! edges each event reads are recorded, and the connections it certifies are
//! confirmed by an independent search.
//!
//! Modules:
//! - [`sequences`]: parameter sequences `(p_n)`, truncation, summability diagnostics.
//! - [`sampler`]: canonical edge identifiers and replayable edge variates.
//! - [`oriented`]: the oriented long-range graph and survival estimates.
//! - [`renorm`]: block parameters, block events and the renormalized exploration.
//! - [`aniso`]: the anisotropic long-range square lattice and its couplings.
//! - [`harness`]: experiment configs, sweeps, result records and plots.

pub mod aniso;
pub mod error;
pub mod harness;
pub mod oriented;
pub mod parallel;
pub mod renorm;
pub mod sampler;
pub mod sequences;
pub mod stats;
pub mod unionfind;

pub use error::{Error, ErrorClass, Result};
pub use sampler::{BondConfig, ConfigSeed, Cutoff, EdgeId};
pub use sequences::{ProbSequence, SumMode, TruncatedSequence};
pub use stats::EstimateResult;
