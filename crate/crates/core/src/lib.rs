//! True random bits from speckle-pattern frames.
//!
//! A frame's bright spots are reduced to centroids, the centroids to a set of
//! occupied urns, the set to its exact lexicographic rank `I` in `[0, T)`, and
//! the rank to an unbiased bit string by Elias coding. The crate also carries
//! the statistical audit used to check the output and a synthetic speckle
//! simulator with known ground truth.

pub mod centroids;
pub mod comb;
pub mod elias;
pub mod error;
pub mod frame;
pub mod pipeline;
pub mod sim;
pub mod stats;

pub use centroids::{CentroidSet, Connectivity, SpotParams};
pub use comb::{lex_rank, lex_unrank, predecessor_count, total_combinations, LexIndex};
pub use elias::{binary_entropy, elias_decode, elias_encode, expected_efficiency, BitString, EliasTable};
pub use error::{Error, Result};
pub use frame::{Frame, LevelSpec, PixelMask};
