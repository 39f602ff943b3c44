//! Symmetric chain decompositions of Young's lattice `L(m,n)`: parametric
//! chain families, their exact generating functions, and a two-stage prover
//! that certifies the families cover the lattice exactly once.

pub mod chainfam;
pub mod cli;
pub mod fixtures;
pub mod latsum;
pub mod lattice;
pub mod oracle;
pub mod ratfun;
pub mod ratproof;
pub mod scdbuild;
