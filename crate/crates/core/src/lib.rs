//! Gateway placement for sub-GHz LPWAN networks.
//!
//! The crate is `no_std` (it needs `alloc`) and carries only the algorithmic
//! pieces of the planner:
//!
//! - [`scene`]: 2.5D city model (extruded footprints), the receiver grid and
//!   the wall-crossing kernel.
//! - [`propagation`]: per-gateway path-gain maps from a direct-path model
//!   with wall penetration and an optional single knife-edge term.
//! - [`linkbudget`]: thermal noise power, SNR maps and threshold algebra.
//! - [`coverage`]: coverage masks, union fractions, redundancy and
//!   best-gateway association.
//! - [`placement`]: budgeted maximum coverage (greedy, lazy greedy,
//!   exhaustive oracle) and standalone ranking.
//!
//! File formats, configuration and the command line live in the `lora-place`
//! crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cellset;
pub mod coverage;
pub mod linkbudget;
pub mod placement;
pub mod propagation;
pub mod scene;

pub use cellset::CellSet;

pub use coverage::{
    association_map, coverage_mask, coverage_table, evaluate_sensors, redundancy_map,
    union_fraction, AssociationMap, CoverageError, CoverageMask, CoverageRow, CoverageTable,
    RedundancyMap, SensorReading,
};
pub use linkbudget::{LinkBudget, LinkBudgetError, SnrMap, Thresholds, BOLTZMANN, SNR_NONE};
pub use placement::{
    exhaustive_optimum, greedy_select, lazy_greedy_select, marginal_gain, standalone_ranking,
    Optimum, PlacementError, Selection, SelectionStats,
};
pub use propagation::{
    compute_path_gain_map, free_space_path_gain, knife_edge_loss, PathGainMap, PathGainModel,
    PropagationConfig, PropagationError, Provenance, NO_PATH,
};
pub use scene::{
    Bounds, Building, GatewaySite, GridError, GridSpec, Material, Point2, Point3, Scene,
    SceneError, WallCrossing,
};
