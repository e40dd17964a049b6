//! Cache-aided scalar linear function retrieval over GF(q).
//!
//! Users each cache parts of a file library under MAN placement and later
//! demand a linear combination of the files. The server answers with
//! alternating-sign multicast messages touching a leader set, and every
//! untransmitted message can be rebuilt from the transmitted ones.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod combinat;
pub mod decoder;
pub mod demand;
pub mod encoder;
pub mod error;
pub mod gf;
pub mod linalg;
pub mod placement;

pub use combinat::UserSubset;
pub use decoder::{DecodeReport, DecoderError};
pub use demand::DemandError;
pub use encoder::{EncoderError, MulticastMessage, TransmissionPlan};
pub use error::Error;
pub use gf::{Field, FieldElement, FieldError};
pub use linalg::{DemandBasis, DemandMatrix, GfMatrix, LeaderSet, LinalgError};
pub use placement::{CacheContent, FileLibrary, PlacementError};
