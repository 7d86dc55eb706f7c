//! Truncated shape operators of PF submanifolds of the path space and their spectra.

pub mod basis;
pub mod operator;
pub mod spectrum;

pub use basis::{fiber_basis, TangentBasis};
pub use operator::{
    fiber_image, pgh_image, preimage_image, sff_preimage, shape_fiber, shape_pgh_orbit, shape_preimage,
    OperatorMatrix,
};
pub use spectrum::{
    pairing_defect, refined_spectrum, spectrum_and_traces, Extrapolation, FTrace, Richardson, SpectrumReport,
    Truncation, ZetaFit,
};
