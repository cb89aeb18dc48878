//! Lattice CLE: random-walk loop soups on a square grid, their clusters and
//! outer boundaries, and harmonic-measure estimators for conformal radius,
//! logarithmic capacity and electrical thickness.

mod cluster;
pub mod experimental;
mod grid;
mod harmonic;
mod soup;
mod ssw;

pub use cluster::{cluster_loops, outermost_loop_around, polygon_area, winding_number, ClusterOutline};
pub use grid::GridDomain;
pub use harmonic::{
    circle_polygon, default_delta_stop, electrical_thickness_estimate, estimate_log_capacity, estimate_log_cr,
    estimate_log_cr_segments, wos_exit, CapacityConfig, CapacityEstimate, CrEstimate, SegmentIndex,
    ThicknessEstimate,
};
pub use soup::{rooted_loop_mass, sample_rw_loop_soup, LoopSoupSample, LoopSoupSampler};
pub use ssw::{
    nested_loop_chain, outermost_loop_sample, rw_intensity, sample_outermost_log_cr, ssw_moment_from_samples,
    ssw_moment_mc, ChainLink, CleMcConfig, SswEstimate,
};
