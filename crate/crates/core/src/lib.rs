//! Drainage directions over flat regions of raster digital elevation models.
//!
//! Flats are resolved in linear time by superimposing a gradient away from
//! higher terrain on a doubled gradient towards lower terrain. The result is
//! an integer increment mask; elevations are never modified unless
//! [`flats::alter_dem`] is asked to produce an altered copy.
//!
//! ```
//! use flatdrain::flats::resolve_flats;
//! use flatdrain::flow::{d8_flow_directions, d8_masked_flow_directions, EdgePolicy};
//! use flatdrain::synthetic::paper_example_dem;
//!
//! let dem = paper_example_dem();
//! let dirs = d8_flow_directions(&dem, EdgePolicy::AsPseudocode);
//! let res = resolve_flats(&dem, &dirs).unwrap();
//! let resolved = d8_masked_flow_directions(&res.flatmask, &res.labels, &dirs).unwrap();
//! assert_eq!(res.report.drainable_flat_count, 1);
//! # let _ = resolved;
//! ```
//!
//! [`gm`] holds an iterative baseline used as an oracle and for timing.

pub mod bench;
pub mod cli;
pub mod error;
pub mod flats;
pub mod flow;
pub mod gm;
pub mod raster;
pub mod synthetic;

pub use error::{Error, Result};
pub use raster::{CellIndex, Direction, Grid};
