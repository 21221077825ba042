//! Floquet-Markov master equations for periodically driven open quantum systems.
//!
//! The crate builds Davies (LGKS) generators for a system coupled to several
//! thermal baths, either with a constant Hamiltonian or with a periodic one
//! handled through Floquet theory, and keeps every dissipative channel
//! separately so that heat currents, power and entropy production can be
//! audited channel by channel.
//!
//! Units: ħ = k_B = 1. Density matrices are vectorized by column stacking.
//!
//! Module map:
//!
//! * [`operator`]: dense operators, spectral/Bohr decompositions, superoperators, Choi checks.
//! * [`bath`]: spectral densities obeying the KMS relation by construction.
//! * [`floquet`]: propagators, monodromy and quasi-energies, harmonic decomposition.
//! * [`generator`]: static and Floquet channel generators.
//! * [`dynamics`]: semigroup evolution, steady states and limit cycles.
//! * [`thermo`]: heat currents, power, entropy production and law checks.
//! * [`qubit`]: the diagonally modulated qubit as a closed-form model.

pub mod bath;
pub mod dynamics;
mod error;
pub mod floquet;
pub mod generator;
pub mod operator;
pub mod parallel;
pub mod quadrature;
pub mod qubit;
pub mod thermo;

pub use error::{Error, Result};

pub use num_complex::Complex64;

/// Dense complex matrix used for every operator in the crate.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
