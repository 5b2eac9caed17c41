//! Spectral-geometry workbench for Hodge Laplacians on hypersurfaces.

pub mod exterior;
pub mod curvature;
pub mod mesh;
pub mod spectrum;
pub mod reilly;
pub mod bounds;
