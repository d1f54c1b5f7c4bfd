//! Decay fits, inequality reports, and the suites that sample each estimate
//! along the exact flows.

pub mod airy;
mod evolve;
pub mod fit;
pub mod report;
pub mod schrodinger;

pub use airy::{
    airy_decay_experiment, check_airy_local_energy, check_airy_pointwise, check_monomial_estimate, AiryDecay,
    LocalEnergy,
};
pub use fit::{fit_decay, fit_decay_excluding, geometric_times, log_spaced, DecayFit, Exclusion};
pub use report::{InequalityReport, InequalitySample, RatioBound};
pub use schrodinger::{
    check_dispersive_schrodinger, check_ks_schrodinger, check_ks_schrodinger_series, check_local_mass, check_lp_decay,
    KsEntry, LpDecay,
};
