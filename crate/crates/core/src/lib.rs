//! Reed-Muller codes, binary memoryless symmetric channels, recursive
//! projection-aggregation (RPA) decoding, analytic error bounds for the
//! decoder, and a reproducible Monte Carlo harness.

pub mod bits;
pub mod bounds;
pub mod channel;
pub mod decoder;
pub mod error;
pub mod oracle;
pub mod rm_code;
pub mod sim;

pub use bits::BitVec;
pub use bounds::{BoundInputs, BoundReport};
pub use channel::{ChannelModel, ChannelOutput, DiscreteBms, LLR_MAX};
pub use decoder::{
    aggregate, boxplus, fht_decode, project, rpa_decode, DecoderConfig, FhtResult, LlrVector,
    ProjectionEstimates, ProjectionIndex, TieBreak,
};
pub use error::{Error, Result};
pub use rm_code::{Codeword, Message, RmCode};
pub use sim::{run_trials, SimConfig, SimResult, TieMode};
