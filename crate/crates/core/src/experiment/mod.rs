//! The phase-grid experiment and the theorem-verification suites.

mod phase;
mod suites;

pub use phase::{
    format_phase_csv, run_phase_cell, run_phase_grid, write_phase_csv, CellResult, PhaseGridConfig, CSV_HEADER,
};
pub use suites::{
    verify_representation_suite, verify_stability_suite, verify_uniqueness_suite, SuiteKind, SuiteReport,
    SuiteSeeds, SIGNAL_AGREEMENT_TOL, STABILITY_SLACK, SUITE_D, SUITE_M, SUITE_N, SUITE_SIGMA_MAX_SQ,
};
