mod envelope;
mod profile;
mod recurrence;
mod schedule;

pub use envelope::{envelope_argmax, envelope_eval, weak_duality_bound, ArgMax, Envelope, Piece, ARGMAX_DEPTH};
pub use profile::AlphaProfile;
pub use recurrence::{f_exact, f_exact_capped, FTable, DEFAULT_STATE_CAP};
pub use schedule::{build_schedule, expand_schedule, for_each_gate, profile_hash, read_ksched, write_ksched, RebalanceSchedule, Strategy};
