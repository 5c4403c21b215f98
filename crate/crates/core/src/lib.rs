//! Continuous-time conflict-based search for multi-agent pathfinding on
//! weighted metric graphs.
//!
//! Agents are discs moving at unit speed along graph edges, with waits of
//! arbitrary real duration. The solver is a two-level search: a high-level
//! constraint tree resolved by either plain splits or one of several
//! symmetry-breaking split rules, and a low-level optimal single-agent
//! planner over safe intervals.

pub mod cliques;
pub mod constraints;
pub mod emit;
pub mod geometry;
pub mod oracle;
pub mod roadmap;
pub mod search;
pub mod sipp;
pub mod sweep;
pub mod validate;
pub mod world;

pub use constraints::{Conflict, MoveId, NegativeConstraint, PositiveConstraint};
pub use geometry::{MotionSegment, Point2, TimeInterval, DEFAULT_RADIUS};
pub use sipp::{plan, plan_with_landmarks, SafeIntervalTable, TimedMove, TimedPath};
pub use world::{Graph, GridMap, Instance};
