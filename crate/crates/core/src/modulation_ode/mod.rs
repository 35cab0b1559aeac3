//! The finite-dimensional b-system, its (U, V) coordinates, shooting over the
//! unstable direction, and the reconstruction of λ(s), t(s) and the rate law.

pub mod coords;
pub mod equilibrium;
pub mod rate;
pub mod rk45;
pub mod shoot;
pub mod system;
pub mod trajectory;

pub use coords::{change_coords, check_matrix_structure, MatrixCheck};
pub use equilibrium::{b_e, b_e_ds, s_for_b1};
pub use rate::{reconstruct_rate, RateFit, RateReport};
pub use shoot::{shoot_unstable, ShootConfig, ShootResult};
pub use system::{c_b1, ode_rhs, CMode};
pub use trajectory::{integrate, Dynamics, ExitEvent, Frame, IntegrateOptions, Trajectory, Trap};
