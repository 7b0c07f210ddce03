//! Shared fixtures for the benchmarks.

use annealing_core::gadget_factory::{build_gadget, GadgetSpec};
use annealing_core::SearchGraph;

/// Lower-bound gadget of the given drop size, path scale and threshold constant.
pub fn gadget_fixture(x: u64, m_prime: u64, c: u64) -> SearchGraph {
    build_gadget(&GadgetSpec::new(x, m_prime, c)).expect("valid gadget parameters")
}
