//! Core algorithms for a vision-based tactile sensor built around a randomly
//! textured elastomer membrane.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled,
//! and contains no I/O. It covers:
//!
//! - [`imaging`]: frames and seeded random marker patterns.
//! - [`membrane`]: a synthetic membrane simulator with analytic ground truth.
//! - [`flow`]: dense inverse-search optical flow.
//! - [`contact`]: contact-area and shear-force estimation from a flow field.
//! - [`calibration`]: log synchronisation and the origin-constrained cubic fit.
//! - [`grasp`]: a closed-loop fingertip alignment controller and payload model.
//!
//! The `rayon` feature parallelises the flow engine over patch rows; results
//! are bit-identical regardless of thread count.
#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod calibration;
pub mod contact;
mod error;
pub mod grid;
pub mod flow;
pub mod grasp;
pub mod imaging;
pub(crate) mod math;
pub mod membrane;
mod par;
pub mod rng;

pub use calibration::CalibrationModel;
pub use contact::{ContactState, EstimatorParams};
pub use grid::{Mask, Roi, ScalarGrid};
pub use error::Error;
pub use flow::{FlowField, FlowParams};
pub use imaging::{Frame, MarkerPattern};
pub use membrane::{DeformationKind, DeformationSpec, GroundTruth};

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// 2-vector used for displacements and forces.
pub type Vec2 = [f64; 2];
