pub mod eikonal;
pub mod error;
pub mod oracle;
pub mod quantize;
pub mod reduction;
pub mod residual;
pub mod sweep;
pub mod symring;
pub mod transport;

pub use error::{Error, Result};
