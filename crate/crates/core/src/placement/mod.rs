//! Source placement: the expected-error cost, greedy and exhaustive
//! selection, and the equal-spacing baselines.

mod baseline;
mod cost;
mod exhaustive;
mod greedy;
mod prior;

pub use baseline::*;
pub use cost::*;
pub use exhaustive::*;
pub use greedy::*;
pub use prior::*;
