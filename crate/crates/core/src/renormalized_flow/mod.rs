//! The decomposed flow u = Q̃_b + ε in renormalised variables: the
//! ε-equation with modulation parameters fixed by the orthogonality
//! conditions (ε, HᵏΦ_M) = 0, the bootstrap diagnostics, the monotonicity
//! monitor, and the exit map over (Ṽ₂(0), τ̃(0)).

pub mod brouwer;
pub mod config;
pub mod context;
pub mod initial;
pub mod lyapunov;
pub mod modulation;
pub mod run;
pub mod state;
pub mod step;

pub use brouwer::{brouwer_shoot, BrouwerConfig, BrouwerResult, ExitCell, ExitMap};
pub use config::{FlowConfig, Forcing, TauControl};
pub use context::{forcing_split, FlowContext, ForcingSplit, MovingProfile};
pub use initial::build_initial_data;
pub use lyapunov::{lyapunov_monitor, residual_constant, LyapunovReport};
pub use modulation::{jacobian, modulation_solve, ModulationSolve};
pub use run::{run_trap, write_run_log, FlowExit, FlowRecord, FlowRun, RunOptions};
pub use state::{energy, BootstrapFlags, Coordinate, ExitSet, FlowState, Xi};
pub use step::{step, StepReport};
