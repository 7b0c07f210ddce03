//! Simulated annealing on explicit search graphs, learned cooling schedules
//! and the models used to optimize them.

// `!(x >= 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod convergence_lab;
pub mod error;
pub mod gadget_factory;
pub mod graph_learner;
pub mod inequalities;
pub mod report;
pub mod rng;
pub mod sa_engine;
pub mod schedule_optimizer;
pub mod search_graph;
pub mod simplex;
pub mod stationary_model;
pub mod temperature_grid;

pub use error::{Error, Result};
pub use sa_engine::{ScoreEstimate, ScoreMode};
pub use search_graph::{CoolingSchedule, GraphBuilder, RunLengthSchedule, SearchGraph, Temperature};
pub use temperature_grid::TemperatureGrid;
pub use stationary_model::MonotoneStationaryGraph;
