//! Exact sumset arithmetic over Z and Z/nZ with the structure theory needed
//! to verify sharp doubling thresholds and progression-cover bounds at desk
//! scale: stabilizers and the Kneser bound, critical-pair classification with
//! structure witnesses, layered modular reduction, planar lifts and
//! compression, exact rational thresholds, and an exhaustive sharded scan
//! engine that certifies every statement over canonical enumerations.
//!
//! All verification is exact: thresholds compare as rationals, irrational
//! bounds are decided radical-free, and every scan is deterministic for a
//! fixed configuration.
//!
//! The `parallel` feature (default) routes scans through rayon; disabling it
//! leaves a pure sequential build.

pub mod bounds;
pub mod cyclic;
pub mod error;
pub mod families;
pub mod geom2d;
pub mod intset;
pub mod kemperman;
pub mod modred;
pub mod rational;
pub mod verifier;

pub use error::{Error, Result};
pub use intset::{
    canonical_pair, doubling_r, normalize_pair, AffineRecord, ArithProgression, IntSet,
};
pub use rational::Rational;
