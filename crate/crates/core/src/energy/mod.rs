//! Discrete curvatures and the integral energies built from them.
//!
//! Tuples with coincident points have curvature 0.

mod curvature;
mod etad;
mod estimate;
mod sup;

pub use curvature::{
    kappa, kappa_prime, kappa_simplex, kappa_svdm, menger_c, tangent_point_radius,
    tangent_point_radius_with, TANGENT_TOL,
};
pub use estimate::{
    energy, energy_tp, EnergyEstimate, EnergyMode, EnergyParams, EstimateParams, InnerStats, MC_CHUNK,
};
pub use etad::{eta_d_check, eta_d_lower_bound, EtaDReport, EtaDViolation};
pub use sup::{sup_kappa, SearchParams, SupKappa};
