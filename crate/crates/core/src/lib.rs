//! Exact weight distributions of binary quadratic residue codes.
//!
//! The pipeline builds the extended code, derives congruences for its
//! low-weight counts from the action of `PSL₂(p)`, counts short codewords
//! exhaustively with a sharded revolving-door census, and completes the
//! distribution through the Gleason form of the weight enumerator.

pub mod bitlinalg;
pub mod census;
pub mod congruence;
pub mod decimal;
pub mod fixtures;
pub mod gleason;
pub mod psl2;
pub mod qrcode;
pub mod regression;

use thiserror::Error;

/// Any failure from the library, for callers that drive several stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] bitlinalg::BitLinalgError),
    #[error(transparent)]
    Code(#[from] qrcode::QrCodeError),
    #[error(transparent)]
    Group(#[from] psl2::Psl2Error),
    #[error(transparent)]
    Congruence(#[from] congruence::CongruenceError),
    #[error(transparent)]
    Census(#[from] census::CensusError),
    #[error(transparent)]
    Gleason(#[from] gleason::GleasonError),
    #[error(transparent)]
    Fixture(#[from] fixtures::FixtureError),
}
