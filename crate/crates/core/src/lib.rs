//! Measurement and data-normalization toolkit for molecular spectrum and
//! structure generation: tagged spectrum text formats, peak-matching and
//! cosine spectrum metrics, token/sequence accuracy, 3D geometry diagnostics,
//! hashed fingerprints and instruction-record generation.

pub mod fingerprints;
pub mod geometry;
pub mod molgraph;
pub mod nmr_metrics;
pub mod seq_metrics;
pub mod spectra;
pub mod taskgen;
pub mod vec_metrics;
