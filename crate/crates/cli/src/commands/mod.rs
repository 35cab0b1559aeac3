//! One module per subcommand. Each writes into its own output directory and
//! returns the summary lines printed on success.

pub mod flow;
pub mod ode;
pub mod profiles;
pub mod report;
pub mod spectrum;
