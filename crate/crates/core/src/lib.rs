//! Varshamov-Tenengolts codes for channels with insertions, deletions and
//! substitutions.
//!
//! Positions are one-based throughout, matching the weighted checksum
//! `sum_{i=1}^{n} i * v_i`.
//!
//! - [`code`]: code parameters, checksum, systematic encoder.
//! - [`channel`]: fixed-count and i.i.d. IDS channel simulation.
//! - [`hd`]: single-error hard-decision decoder.
//! - [`siso`]: bitwise MAP decoder on the (syndrome, drift) trellis.

pub mod bits;
pub mod channel;
pub mod code;
pub mod hd;
pub mod siso;

pub use bits::{BitWord, ParseBitWordError};
pub use channel::{
    corrupt_fixed, corrupt_iid, edit_distance, ChannelError, ChannelMode, ChannelSpec, CorruptionLog,
    ErrorEvent, ErrorKind,
};
pub use code::{CodeError, VtParams};
pub use hd::{decode_hd, HdOutcome, HdStatus};
pub use siso::{decode_siso, exact_map_oracle, forward_backward, ChannelPrior, LlrVector, SisoError, SisoOutcome};
