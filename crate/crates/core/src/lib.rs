//! Integer group-ring operators over sofic groups, realized as permutation-block
//! integer matrices, with exact and numeric spectral analysis.

pub mod cli;
pub mod exactpoly;
pub mod groupring;
pub mod groups;
pub mod linalg;
pub mod perm;
pub mod quantize;
pub mod rootlab;
pub mod serde_util;
pub mod spectra;

use thiserror::Error;

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Group(#[from] groups::GroupError),
    #[error(transparent)]
    Ring(#[from] groupring::RingError),
    #[error(transparent)]
    Poly(#[from] exactpoly::PolyError),
    #[error(transparent)]
    Root(#[from] rootlab::RootError),
    #[error(transparent)]
    Spectra(#[from] spectra::SpectraError),
    #[error(transparent)]
    Quantize(#[from] quantize::QuantizeError),
}
