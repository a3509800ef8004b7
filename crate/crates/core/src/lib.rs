//! Exponent groups of almost periodic orbits: exact subgroup algebra over a
//! symbol basis, B-sequences and their dual solenoids, circle maps and
//! suspensions, and numerical exponent probes.

pub mod circle;
pub mod exponents;
pub mod groups;
pub mod harness;
pub mod lattice;
pub mod realfield;
pub mod solenoid;
pub mod torus;
