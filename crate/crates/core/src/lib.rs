//! Overlap and layout engine for long-read assembly, built on semiring
//! sparse matrix algebra.
//!
//! The pipeline reads a FASTA file, selects reliable k-mers with a two-pass
//! Bloom-filtered counter, builds a reads-by-kmers matrix `A`, computes the
//! candidate overlap matrix `C = A*At` under a position-tracking semiring,
//! filters candidates with x-drop seed-and-extend alignment into a bidirected
//! overlap matrix `R`, and iteratively removes transitive edges to produce
//! the string matrix `S`. A simulated 2D process grid runs the same matrix
//! product block-wise and tallies communication, next to an analytic cost
//! model for comparing 1D and 2D layouts.

pub mod align;
pub mod cli;
pub mod gridsim;
pub mod kmers;
pub mod overlap;
pub mod seqio;
pub mod spmat;
pub mod synth;
pub mod trred;
