//! Peisert-type Cayley graphs over finite fields, their realisation as block
//! graphs of point-line orthogonal arrays, and exact certification of their
//! clique, spectral, colouring and EKR structure.

pub mod bitset;
pub mod budget;
pub mod clique;
pub mod ekr;
pub mod field;
pub mod graph;
pub mod hadamard;
pub mod linalg;
pub mod oa;
pub mod peisert;
pub mod report;
