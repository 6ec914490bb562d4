pub mod acceptance;
pub mod bessel;
pub mod discretization;
pub mod extension;
pub mod mlfunc;
pub mod quadrature;
pub mod reglab;
pub mod spectral;
pub mod special;
pub mod wavesolve;

/// Version string stamped into every emitted artifact.
pub const VERSION: &str = concat!("fracwave-core ", env!("CARGO_PKG_VERSION"));
