pub mod rotation;
pub mod spectral_basis;
pub mod element;
pub mod geometry;
pub mod solver;
pub mod bench;
