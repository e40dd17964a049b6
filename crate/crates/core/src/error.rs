use crate::analysis::AnalysisError;
use crate::combinat::CombinatError;
use crate::decoder::DecoderError;
use crate::demand::DemandError;
use crate::encoder::EncoderError;
use crate::gf::FieldError;
use crate::linalg::LinalgError;
use crate::placement::PlacementError;

/// Any error raised by this crate.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Combinat(#[from] CombinatError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error(transparent)]
    Demand(#[from] DemandError),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
    #[error(transparent)]
    Decoder(#[from] DecoderError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}
