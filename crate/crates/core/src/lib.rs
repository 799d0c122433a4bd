//! Torus-equivariant spectral triples on the odd quantum spheres S_q^{2ℓ+1},
//! realized on finite windows of the basis lattice ℕ^ℓ × ℤ.

pub mod dirac;
pub mod extension;
pub mod growth_graph;
pub mod index_pairing;
pub mod lattice;
pub mod qoperators;
