//! Simulation and hardware-requirement optimization for swap-asap quantum
//! repeater chains laid over a real fiber path.
//!
//! The numeric layers are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix them to `f64`, which is what the optimizer
//! and the command-line tool use.

// `!(x > 0)` is deliberate throughout: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod estimate;
pub mod fibergrid;
pub mod hardware;
pub mod metrics;
pub mod modes;
pub mod optimizer;
pub mod oracle;
pub mod scalar;
pub mod sim;

pub use scalar::Scalar;

/// Hardware parameters in double precision.
pub type HardwareParams = hardware::HardwareParams<f64>;
/// Color-center component figures in double precision.
pub type ColorCenterComponents = hardware::ColorCenterComponents<f64>;
/// Cost breakdown in double precision.
pub type CostBreakdown = hardware::CostBreakdown<f64>;
/// Path-derived context for no-imperfection probabilities.
pub type PathContext = hardware::PathContext<f64>;

pub type FiberSegment = fibergrid::FiberSegment<f64>;
pub type FiberPath = fibergrid::FiberPath<f64>;
pub type ChainConfiguration = fibergrid::ChainConfiguration<f64>;
pub type PlacementTable = fibergrid::PlacementTable<f64>;
pub type ElementaryLink = fibergrid::ElementaryLink<f64>;

pub type SimConfig = sim::SimConfig<f64>;
pub type PairRecord = sim::PairRecord<f64>;

pub type SkrResult = metrics::SkrResult<f64>;
pub type BqcResult = metrics::BqcResult<f64>;
pub type MetricResult = metrics::MetricResult<f64>;

pub type DensityMatrix = oracle::DensityMatrix<f64>;

/// Single-precision variants, mainly useful for memory-bound sweeps.
pub type HardwareParams32 = hardware::HardwareParams<f32>;
pub type SimConfig32 = sim::SimConfig<f32>;
pub type PairRecord32 = sim::PairRecord<f32>;
