//! Ellipsoid packings of closed symplectic 4-manifolds.
//!
//! The crate is split into an exact half and a floating-point half.
//!
//! * [`lattice`], [`decompose`], [`packing`] and [`bubbling`] work over
//!   arbitrary-precision rationals. They turn a symplectic class on an integral
//!   lattice into a polarization (weighted curve classes), and then into a list
//!   of ellipsoids whose volumes add up to the volume of the manifold exactly.
//! * [`localmodel`] and [`toric`] evaluate the local Liouville geometry near a
//!   polarization curve in binary64 and check it against finite differences,
//!   Runge–Kutta integration and Monte Carlo quadrature. [`verify`] bundles
//!   those checks into a suite with pinned tolerances.
//!
//! Sampling loops run on rayon when the `parallel` feature is on (the default);
//! see [`par::Execution`].

pub mod bubbling;
pub mod decompose;
pub mod error;
pub mod fd;
pub mod lattice;
pub mod linalg;
pub mod localmodel;
pub mod ode;
pub mod packing;
pub mod par;
pub mod rational;
pub mod svg;
pub mod toric;
pub mod verify;

pub use error::{Error, Result};
pub use lattice::{CohomologyClass, LatticeModel, Rational};
