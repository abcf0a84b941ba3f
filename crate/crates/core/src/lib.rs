pub mod apnum;
pub mod asymfit;
pub mod contour;
pub mod diagram;
pub mod error;
pub mod fixtures;
pub mod growth;
pub mod model;
pub mod pipeline;
pub mod recurrence;
pub mod selftest;
pub mod theta;
pub mod zeros;

pub use error::{Error, Result};
