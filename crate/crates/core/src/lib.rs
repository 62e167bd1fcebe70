//! Invariant gauge theory on the Calabi hyperkähler manifold T*CP².

pub mod bundles;
pub mod connections;
pub mod exterior;
pub mod gauge;
pub mod geometry;
pub mod scalar;
pub mod su3;
pub mod instantons;
