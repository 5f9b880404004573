//! Mirror-inversion experiments: state and Bell-pair transfer, sector phases
//! and the two density-matrix comparison metrics.

mod metrics;
mod phases;
mod transfer;

pub use metrics::{attenuated_correlation, fidelity_metric, partial_trace};
pub use phases::{estimate_sector_phases, sector_phases, SectorPhaseTable, SECTOR_PHASE_TOLERANCE};
pub use transfer::{
    classify_bell, six_state_design, transfer_entangled, transfer_single, BellKind, SiteInput,
    TransferMode, TransferReport, TransferSetup, BELL_THRESHOLD,
};
