//! Dynamical coherence of quantum channels: resource non-generating
//! measures, distances to maximally incoherent operations and the
//! associated discrimination game.

pub mod channel;
pub mod coherence;
pub mod discrimination;
pub mod distance;
pub mod error;
pub mod linalg;
pub mod optimize;
pub mod random;
pub mod rni;
pub mod sdp;
pub mod state;

pub use channel::{ChoiMatrix, KrausChannel, MioVariant};
pub use coherence::StaticMeasure;
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use state::DensityMatrix;
