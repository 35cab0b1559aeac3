//! Approximate self-similar profile: H⁻¹, T₁/T₂, the radiation Σ_b, the
//! correction ladder, the error Ψ_b and its localisation, and the weighted
//! error norms.

pub mod error_profile;
pub mod fixtures;
pub mod inverse;
pub mod ladder;
pub mod radiation;
pub mod scaling;

pub use error_profile::{
    approximate_profile, error_profile, error_profile_direct, localize, ApproximateProfile, ErrorProfile,
    LocalizedProfile,
};
pub use inverse::{invert_h, Kernels, Profile, TProfiles};
pub use ladder::{build_ladder, CorrectionLadder};
pub use radiation::{build_radiation, Radiation};
