pub mod cascade;
pub mod config;
pub mod constellation;
pub mod error;
pub mod ground;
pub mod harness;
pub mod orbital;
pub mod report;
pub mod risk;
pub mod routing;
pub mod time;
pub mod topology;
pub mod traffic;

pub use error::{Error, Result};
