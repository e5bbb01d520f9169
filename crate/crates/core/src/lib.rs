//! Energy decay of absorptive shoebox rooms.
//!
//! The crate computes the closed-form damping density of a rectangular room
//! with six absorptive walls, turns it into power responses, energy decay
//! curves and reverberation times, and synthesizes late reverberation by
//! shaping Gaussian noise with the resulting envelope. An image-source
//! simulator and a sphere-sampling oracle are included as references.

pub mod decay;
pub mod density;
pub mod error;
pub mod ism;
pub mod oracle;
pub mod quad;
pub mod room;
pub mod synthesis;

pub use decay::{DecayCurve, LaplaceSum, RtEstimate, TimeGrid};
pub use density::DampingDensity;
pub use error::{Error, Result};
pub use ism::{ImpulseResponse, IsmConfig};
/// Engine version recorded alongside generated artifacts.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use room::{AxisDamping, BandedRoom, ShoeboxRoom};
