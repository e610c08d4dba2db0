//! Computational toolkit for abelian and local nonabelian vortex moduli.

pub mod exact;
pub mod geometry;
pub mod hecke;
pub mod pi1;
pub mod strata;
pub mod vortex;
