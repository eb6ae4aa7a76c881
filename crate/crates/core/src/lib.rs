//! Multimodal car- and ride-sharing for company fleets.
//!
//! Employees travel between meetings; shared company cars wait at depots.
//! [`model`] prices every leg by car and by the cheapest other mode,
//! [`ridegraph`] enumerates trip variants with ride-share insertions and
//! lays them out in a time-space graph, and the fleet assignment is solved
//! either directly ([`edgeform`]) or by column generation ([`colgen`]).
//! [`oracle`] enumerates tiny instances exhaustively.

pub mod colgen;
pub mod edgeform;
pub mod experiments;
pub mod instgen;
pub mod model;
pub mod oracle;
pub mod plan;
pub mod ridegraph;

pub use milp;
