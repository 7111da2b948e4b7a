//! Wavelet-based edge enhancement for image classification datasets.
//!
//! Two enhancement methods are provided:
//!
//! * [`naive`]: decompose with a multilevel Haar transform, zero the coarsest
//!   approximation and reconstruct from the detail bands alone.
//! * [`mm`]: smooth, take one Haar level, keep only the local maxima of the
//!   gradient modulus along the gradient direction and reconstruct from
//!   those edges plus the approximation band.
//!
//! [`dataset`] reads and writes MNIST IDX, CIFAR-10 binary and directory
//! datasets, and [`batch`] runs a method over a whole dataset with
//! deterministic output ordering.

pub mod batch;
pub mod dataset;
pub mod dump;
pub mod dwt;
pub mod error;
pub mod image;
pub mod mm;
pub mod naive;

pub use crate::error::{Error, Result};
pub use crate::image::{gaussian_smooth, Image, Kernel1D, Plane};

/// Version string recorded in provenance manifests.
pub const TOOL_VERSION: &str = concat!("wavedge ", env!("CARGO_PKG_VERSION"));
