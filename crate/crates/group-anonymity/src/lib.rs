//! Group anonymity for statistical microfiles.
//!
//! Individual (record-level) anonymization hides who a row belongs to; it
//! does nothing about what a *group* of rows reveals in aggregate. A
//! distribution of counts over regions can expose, say, where a particular
//! subpopulation concentrates, even when every record is individually
//! anonymous. This crate masks such group-level features while provably
//! retaining a chosen part of the distribution's structure.
//!
//! The approach: build a signal from the microfile (bucket counts, ratios of
//! counts, or the difference of two ratio series), take a wavelet
//! decomposition, replace the approximation coefficients so extreme values
//! flatten out, and reconstruct while keeping the detail coefficients fixed —
//! so high-frequency structure survives exactly (up to one global scale
//! factor). The masked distribution is then realized by moving a minimal set
//! of records between buckets, and an audit confirms the rewrite.
//!
//! Modules:
//! - [`wavelet`]: Daubechies filters, periodic decomposition, reconstruction
//!   matrices.
//! - [`signal`], [`builder`], [`group`]: signals and how they are extracted
//!   from a microfile for a group specification.
//! - [`masking`]: extremum detection, coefficient replacement, the three
//!   masking pipelines, and detail-fidelity verification.
//! - [`microdata`]: CSV microfile I/O, record redistribution planning, audit.
//! - [`config`], [`cli`]: run configuration and the command implementations.
//! - [`profiles`]: built-in census study profiles with published expected
//!   values, used as test oracles and demos.

pub mod builder;
pub mod cli;
pub mod config;
pub mod error;
pub mod group;
pub mod masking;
pub mod microdata;
pub mod profiles;
pub mod signal;
pub mod wavelet;

pub use builder::{
    build_concentration_signal, build_difference_signal, build_group_totals, build_quantity_signal,
};
pub use config::{Mode, RunConfig};
pub use error::{Error, Result};
pub use group::{GroupSpec, PairedGroupSpec};
pub use masking::{
    mask_concentration, mask_difference, mask_quantity, verify_detail_fidelity, MaskingOptions,
    MaskingResult, MaskingStrategy, RoundingMode, Side, SolvePolicy,
};
pub use microdata::{
    apply_plan, audit, plan_redistribution, AuditReport, Microfile, RedistributionMode, SwapPlan,
};
pub use signal::{Signal, SignalFlavor};
pub use wavelet::{decompose, Decomposition, ReconstructionMatrix, WaveletFilter};
