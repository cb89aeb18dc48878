//! Closed forms, quadrature checks and Monte Carlo samplers for CLE
//! integrability: the three-point structure constant, electrical thickness,
//! Liouville area laws, stable Lévy jump laws and random-walk loop soups.

pub mod cle_mc;
pub mod cli_io;
pub mod error;
pub mod levy;
pub mod quadrature;
pub mod replicate;
pub mod specialfn;

pub use error::{Error, Result};
