//! Dynamics of a susceptible prey / infected prey / predator system with a
//! strong or weak Allee effect in the prey and herd-like aggregation in the
//! predation term.

pub mod cli;
pub mod codim1;
pub mod codim2;
pub mod equilibria;
pub mod error;
pub mod integrate;
pub mod model;
pub mod numerics;
pub mod scan;

pub use error::{Error, Result};
pub use model::{ParamName, Parameters, State};
