//! Physical configuration: the spring coefficient schedule, the log-power
//! potential families, the periodic grid, test packets and the smooth cutoff.
//!
//! Every value here is immutable after construction.

mod cutoff;
mod grid;
mod packet;
mod potential;
mod schedule;

pub use cutoff::CutoffFunction;
pub use grid::GridSpec;
pub use packet::{make_packet, packet_corpus, PacketShape, PacketSide, WavePacket, DEFAULT_SHARPNESS, NYQUIST_MARGIN};
pub use potential::{PotentialSpec, RangeClass, TimeModulation, X_FAR};
pub(crate) use potential::profile as profile_value;
pub use schedule::{CoefficientSchedule, InteriorProfile};
