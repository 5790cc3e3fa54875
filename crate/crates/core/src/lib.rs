//! Riemannian geometry on spaces of closed curves.
//!
//! Two metric families are implemented on uniformly sampled closed curves:
//!
//! * **inner** metrics, constant-coefficient Sobolev metrics built from
//!   arc-length derivatives ([`inner`]);
//! * **outer** metrics, induced from a right-invariant Sobolev metric on the
//!   diffeomorphism group through the reproducing kernel of `(1 − Δ)^s`
//!   ([`kernel`], [`outer`]).
//!
//! Geodesic distances for both are estimated by path-energy minimization and
//! returned as certified upper bounds. [`flows`] integrates kernel vector
//! fields into diffeomorphism actions and provides the Fourier smoothing
//! operators; [`compare`] runs the distance-comparison experiments.

pub mod bessel;
pub mod compare;
pub mod config;
pub mod curve;
pub mod error;
pub mod flows;
pub mod fourier;
pub mod inner;
pub mod kernel;
pub mod linalg;
pub mod optim;
pub mod outer;
mod path;
pub mod report;

pub use config::MetricConfig;
pub use curve::{Curve, TangentField};
pub use error::{Error, Result};
pub use kernel::{CometricGram, SobolevKernel};
