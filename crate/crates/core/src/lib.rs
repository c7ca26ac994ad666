//! Gossip-based distributed slicing.
//!
//! Nodes with a fixed attribute estimate which slice (a fixed proportion of
//! the population ordered by attribute) they belong to. Two protocol
//! families are provided: ordering by swapping random values (JK and
//! mod-JK) and ranking by sampling attributes (plain and sliding-window),
//! together with a deterministic cycle-based simulator, disorder metrics
//! and statistical checks of the underlying bounds.

pub mod analysis;
pub mod domain;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod ordering;
pub mod population;
pub mod ranking;
pub mod sampling;
pub mod trial;

pub use domain::{attribute_ranks, misplaced, Attribute, NodeId, RankPoint, SliceSpec};
pub use engine::{
    run, AttributeDistribution, ChurnMode, ChurnSchedule, Concurrency, Protocol, Sampler,
    Simulation, SimulationConfig, ViewFreshness,
};
pub use error::{Error, Result};
pub use metrics::MetricsRecord;
