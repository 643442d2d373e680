//! Simulation of a longitudinal Stern-Gerlach experiment on free electrons:
//! an electron gun, a two-wire gradient magnet, and a detection screen.
//!
//! Coordinate convention used throughout: the beam travels along +x, the
//! magnet wires are displaced along y, and the field gradient (and the
//! spin-dependent deflection) points along z. The frame is right-handed.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod export;
pub mod field;
pub mod kinematics;
pub mod physics;

pub use error::{Error, Result};
pub use physics::{constants, Constants, ElectronState, Spin, Vec3};
