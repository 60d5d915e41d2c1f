pub mod geometry;
pub mod mesh;
pub mod dual;
pub mod ops;
pub mod meshgen;
pub mod fields;
pub mod poisson;
pub mod study;
