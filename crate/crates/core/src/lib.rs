//! Nonpositive-curvature checks for finite cell complexes.
//!
//! Covers graph metrics and intervals, weak systolicity with explicit
//! witnesses, minimal disc fillings of bigons and triangles, C'(1/6) small
//! cancellation, van Kampen diagram classification and the shortcut
//! avoidance probe. Heavy loops run on rayon through [`par`] unless the
//! `parallel` feature is off.

pub mod complex;
pub mod diagram;
pub mod error;
pub mod generators;
pub mod io;
pub mod metric;
pub mod par;
pub mod presentation;
pub mod report;
pub mod sap;
pub mod smallcancel;
pub mod wsys;
