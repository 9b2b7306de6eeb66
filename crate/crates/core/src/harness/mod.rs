//! End-to-end audits: the γ-smoothed majorant, the smoothing estimates and
//! their empirical constants, the sharpness and mass-concentration
//! experiments, and the named checks run by `logdiff verify`.

pub mod experiments;
pub mod family;
pub mod gamma;
pub mod sharpness;
pub mod suite;
pub mod theorems;

pub use family::{generic_family, harnack_family, InitialDatum};
pub use gamma::{build_v0, build_v0_auto, v0_postconditions, SmoothingGamma, V0Construction};
pub use sharpness::{delta_mass_check, sharpness_sweep, SweepRow};
pub use suite::{run_check, ExperimentConfig, CHECKS};
pub use theorems::{
    audit_theorem_1_1, audit_theorem_1_3, audit_theorem_4_1, bootstrap_rescale, claim2_inequality_check,
    find_k_for_time, k_bound, AuditOutcome, KSolution, SolverConfig,
};
