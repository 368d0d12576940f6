//! Radial reduction of mean curvature flow for curvature-adapted complex
//! equifocal submanifolds.
//!
//! A scenario ([`ChamberModel`]) fixes a set of root covectors with focal
//! offsets and multiplicities. From it the crate builds the open chamber
//! `{w : β_i(w) < d_i⁺}`, the convex potential `ρ` whose gradient is the
//! radial mean curvature field, the complex principal curvature spectrum of
//! parallel translates, and flows of the field that collapse onto boundary
//! strata in finite time.
//!
//! ```
//! use chamberflow::{catalog, flow, FlowOptions};
//!
//! let model = catalog::builtin("rank1", &[1.0, 0.0, 1.0]).unwrap();
//! let traj = flow::integrate(&model, &[0.0], &FlowOptions::default()).unwrap();
//! let t = traj.status.collapse_time().unwrap();
//! assert!((t - 1f64.cosh().ln()).abs() < 1e-8);
//! ```

pub mod catalog;
pub mod chamber;
pub mod cli;
mod error;
pub mod field;
pub mod flow;
mod linalg;
pub mod spectrum;

pub use catalog::{ChamberModel, RadialDatum};
pub use chamber::{CoxeterGroup, StratumId};
pub use error::{Error, Result};
pub use field::FieldEval;
pub use flow::{FlowOptions, FlowStatus, Sample, Trajectory, TypeOneReport};
pub use spectrum::{Branch, HyperplaneArrangement, SpectrumSlice};
