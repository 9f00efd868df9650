//! Verification campaigns over scenarios and generated map families.

mod campaigns;
mod config;
mod report;
mod scenario;

pub use campaigns::{
    run_suite, scenarios, verify_convergence_41_to_44, verify_corollaries_45_46, verify_theorem_32,
    verify_theorem_33, verify_theorem_34, write_outputs, Suite, LORENTZ_CAVEAT, T42_CAVEAT,
    T42_NORMAL_CAVEAT, WEAK_CAVEAT,
};
pub use config::{CampaignConfig, FamilyConfig};
pub use report::{all_passed, num, summary_table, write_trials_csv, CampaignReport, CheckResult, Status};
pub use scenario::{corpus, family_matrix, grid_alpha_map, injected_non_monotone, Expected, Scenario, X0Policy};
